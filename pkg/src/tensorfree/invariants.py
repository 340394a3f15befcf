"""D-tuples of permutations as trace-invariants.

A trace-invariant on n tensors with D colors is encoded by a PermTuple:
color c sends the output indices of tensor s to the input indices of tensor
sigma_c(s).  Two regimes of relabeling equivalence exist: mixed (simultaneous
conjugation, one ensemble of tensors with inputs and outputs) and pure
(independent two-sided relabeling of a T / T-bar pair).
"""
from __future__ import annotations

import itertools
import json
import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from . import errors
from .partitions import BipartitePartition, SetPartition
from .perms import Perm, all_perms

FLAVORS = ("mixed", "pure")


class PermTuple:
    """A D-tuple of permutations of the same degree n."""

    __slots__ = ("perms",)

    def __init__(self, perms: Iterable[Perm]):
        perms = tuple(perms)
        if not perms:
            raise ValueError("need at least one color")
        if len({p.n for p in perms}) != 1:
            raise ValueError("all colors must have the same degree")
        object.__setattr__(self, "perms", perms)

    def __setattr__(self, name, value):  # pragma: no cover - guard
        raise AttributeError("PermTuple is immutable")

    @classmethod
    def identity(cls, n: int, D: int) -> "PermTuple":
        return cls([Perm.identity(n)] * D)

    @classmethod
    def constant(cls, p: Perm, D: int) -> "PermTuple":
        return cls([p] * D)

    @property
    def n(self) -> int:
        return self.perms[0].n

    @property
    def D(self) -> int:
        return len(self.perms)

    def __getitem__(self, c: int) -> Perm:
        return self.perms[c]

    def __iter__(self):
        return iter(self.perms)

    def __eq__(self, other) -> bool:
        return isinstance(other, PermTuple) and self.perms == other.perms

    def __hash__(self) -> int:
        return hash(self.perms)

    def __repr__(self) -> str:
        return "PermTuple([" + ", ".join(str(p) for p in self.perms) + f"]) on n={self.n}"

    # -- relabelings --------------------------------------------------------

    def conjugate(self, eta: Perm) -> "PermTuple":
        inv = eta.inverse()
        return PermTuple([eta * p * inv for p in self.perms])

    def left_mul(self, eta: Perm) -> "PermTuple":
        return PermTuple([eta * p for p in self.perms])

    def right_mul(self, nu: Perm) -> "PermTuple":
        return PermTuple([p * nu for p in self.perms])

    def extend(self, extra: Perm) -> "PermTuple":
        """Append one more color (used for pairings and thick edges)."""
        return PermTuple(self.perms + (extra,))

    # -- connectivity --------------------------------------------------------

    def components_mixed(self) -> SetPartition:
        """Join of the cycle partitions of all colors."""
        out = SetPartition.from_permutation(self.perms[0])
        for p in self.perms[1:]:
            out = out.join(SetPartition.from_permutation(p))
        return out

    def components_pure(self) -> BipartitePartition:
        """Join of the per-color pairings {s, sigma_c(s)b}."""
        out = BipartitePartition.from_pairing(self.perms[0])
        for p in self.perms[1:]:
            out = out.join(BipartitePartition.from_pairing(p))
        return out

    @property
    def K_m(self) -> int:
        return self.components_mixed().num_blocks

    @property
    def K_p(self) -> int:
        return self.components_pure().num_blocks

    # -- restriction / union -------------------------------------------------

    def restrict_mixed(self, block: Sequence[int]) -> "PermTuple":
        """Relabel a union-of-cycles block (sorted) to 1..m and restrict."""
        block = sorted(block)
        rank = {x: i + 1 for i, x in enumerate(block)}
        perms = []
        for p in self.perms:
            perms.append(Perm(rank[p(x)] for x in block))
        return PermTuple(perms)

    def restrict_pure(self, whites: Sequence[int], blacks: Sequence[int]) -> "PermTuple":
        """Restrict the bijections to whites -> blacks, both relabeled 1..m."""
        whites, blacks = sorted(whites), sorted(blacks)
        rank = {x: i + 1 for i, x in enumerate(blacks)}
        perms = []
        for p in self.perms:
            perms.append(Perm(rank[p(x)] for x in whites))
        return PermTuple(perms)

    @staticmethod
    def disjoint_union(pieces: Sequence["PermTuple"]) -> "PermTuple":
        if len({t.D for t in pieces}) != 1:
            raise ValueError("all pieces must have the same number of colors")
        D = pieces[0].D
        offsets = [0]
        for t in pieces:
            offsets.append(offsets[-1] + t.n)
        n = offsets[-1]
        perms = []
        for c in range(D):
            images = list(range(1, n + 1))
            for t, off in zip(pieces, offsets):
                for s in range(1, t.n + 1):
                    images[off + s - 1] = off + t.perms[c](s)
            perms.append(Perm(images))
        return PermTuple(perms)


@dataclass(frozen=True)
class InvariantClass:
    """Canonical representative of an orbit under ~m or ~p."""

    representative: PermTuple
    flavor: str
    canonical: bool = True

    @property
    def n(self) -> int:
        return self.representative.n

    @property
    def D(self) -> int:
        return self.representative.D

    def key(self) -> tuple:
        return (self.flavor, tuple(p.images for p in self.representative.perms))

    def text(self) -> str:
        parts = [f"flavor={self.flavor}", f"D={self.D}", f"n={self.n}"]
        parts += [f"c{c + 1}={self.representative[c]}" for c in range(self.D)]
        return ";".join(parts)

    @classmethod
    def from_text(cls, text: str) -> "InvariantClass":
        fields = dict(
            (k, v) for k, v in (item.split("=", 1) for item in text.split(";"))
        )
        flavor, D, n = fields["flavor"], int(fields["D"]), int(fields["n"])
        perms = [Perm.from_text(fields[f"c{c + 1}"], n=n) for c in range(D)]
        return canonicalize(PermTuple(perms), flavor)

    def to_json(self) -> str:
        return json.dumps(
            {
                "flavor": self.flavor,
                "D": self.D,
                "n": self.n,
                "colors": [list(p.images) for p in self.representative.perms],
            },
            sort_keys=True,
        )

    @classmethod
    def from_json(cls, blob: str) -> "InvariantClass":
        data = json.loads(blob)
        perms = [Perm(images) for images in data["colors"]]
        return canonicalize(PermTuple(perms), data["flavor"])


def _check_flavor(flavor: str) -> None:
    if flavor not in FLAVORS:
        raise ValueError(f"flavor must be one of {FLAVORS}, got {flavor!r}")


@lru_cache(maxsize=200_000)
def _mixed_min(perms: tuple[tuple[int, ...], ...]) -> tuple[tuple[int, ...], ...]:
    """Lexicographic minimum of the simultaneous-conjugation orbit."""
    n = len(perms[0]) if perms else 0
    if n <= 1 or not perms:
        return perms
    tuples = [Perm(p) for p in perms]
    best = None
    for eta in all_perms(n):
        inv = eta.inverse()
        cand = tuple((eta * p * inv).images for p in tuples)
        if best is None or cand < best:
            best = cand
    return best


def _pure_min(perms: tuple[tuple[int, ...], ...]) -> tuple[tuple[int, ...], ...]:
    """Lexicographic minimum of the two-sided orbit {eta s nu}.

    The first color can always be brought to the identity (the unique
    lexicographic minimum of S_n), after which the residual freedom is the
    simultaneous conjugation of the remaining colors composed with the
    inverse of the first.
    """
    first = Perm(perms[0]).inverse()
    reduced = tuple((Perm(p) * first).images for p in perms[1:])
    n = first.n
    ident = tuple(range(1, n + 1))
    return (ident,) + _mixed_min(reduced)


def canonicalize(s: PermTuple, flavor: str) -> InvariantClass:
    """Lexicographically minimal orbit element under ~m (conjugation) or ~p
    (independent two-sided relabeling)."""
    _check_flavor(flavor)
    errors.check("canonicalization degree", s.n, errors.cap_n())
    raw = tuple(p.images for p in s.perms)
    images = _mixed_min(raw) if flavor == "mixed" else _pure_min(raw)
    return InvariantClass(PermTuple([Perm(im) for im in images]), flavor)


@lru_cache(maxsize=500_000)
def _canonical_key_cached(flavor: str, raw: tuple[tuple[int, ...], ...]) -> tuple:
    images = _mixed_min(raw) if flavor == "mixed" else _pure_min(raw)
    return (flavor, images)


def canonical_key(s: PermTuple, flavor: str) -> tuple:
    """Hashable canonical key of the class of s (table lookups)."""
    _check_flavor(flavor)
    return _canonical_key_cached(flavor, tuple(p.images for p in s.perms))


def _relabel_word_mixed(word: tuple, eta: Perm) -> tuple:
    out = [None] * len(word)
    for s, w in enumerate(word, start=1):
        out[eta(s) - 1] = w
    return tuple(out)


def canonical_class_and_word(s: PermTuple, flavor: str, word: tuple) -> tuple:
    """Canonical (class key, word) pair for multilabel tables.

    Mixed: word is one label per tensor; conjugating by eta sends label s to
    slot eta(s).  Pure: word is a (white labels, black labels) pair; the
    relabeling s' = eta s nu sends white slot s to the old nu(s) and black
    slot t to the old eta^{-1}(t).  Among all relabelings reaching the
    canonical representative, the lexicographically smallest permuted word
    is chosen, so equal (class, word) data always collide.
    """
    _check_flavor(flavor)
    key = canonical_key(s, flavor)
    target = key[1]
    n = s.n
    best_word = None
    if flavor == "mixed":
        if len(word) != n:
            raise ValueError("mixed word must have one label per tensor")
        for eta in all_perms(n):
            inv = eta.inverse()
            cand = tuple((eta * p * inv).images for p in s.perms)
            if cand != target:
                continue
            w = _relabel_word_mixed(tuple(word), eta)
            if best_word is None or w < best_word:
                best_word = w
    else:
        whites, blacks = word
        if len(whites) != n or len(blacks) != n:
            raise ValueError("pure word must label all whites and blacks")
        first_inv = s.perms[0].inverse()
        reduced = tuple((p * first_inv).images for p in s.perms[1:])
        for eta in all_perms(n):
            inv = eta.inverse()
            cand_rest = tuple((eta * Perm(r) * inv).images for r in reduced)
            if (tuple(range(1, n + 1)),) + cand_rest != target:
                continue
            # sigma' = eta sigma nu with nu = sigma_1^{-1} eta^{-1}
            nu = first_inv * inv
            w_white = tuple(whites[nu(t) - 1] for t in range(1, n + 1))
            w_black = _relabel_word_mixed(tuple(blacks), eta)
            w = (w_white, w_black)
            if best_word is None or w < best_word:
                best_word = w
    assert best_word is not None
    return (key, best_word)


def enumerate_classes(
    n: int, D: int, flavor: str, connected_only: bool = False
) -> list[InvariantClass]:
    """One canonical representative per orbit, exhaustively.

    The pure case is enumerated through the mixed classes one color down
    (divide every color by the first), which keeps the raw loop at
    (n!)^(D-1) tuples instead of (n!)^D.
    """
    _check_flavor(flavor)
    import math

    if flavor == "pure":
        raw_count = math.factorial(n) ** max(D - 1, 0)
    else:
        raw_count = math.factorial(n) ** D
    errors.check("class enumeration", raw_count, errors.cap_enum())

    seen: dict[tuple, InvariantClass] = {}
    if flavor == "mixed":
        for combo in itertools.product(all_perms(n), repeat=D):
            t = PermTuple(combo)
            key = canonical_key(t, "mixed")
            if key not in seen:
                seen[key] = InvariantClass(PermTuple([Perm(i) for i in key[1]]), "mixed")
    else:
        ident = Perm.identity(n)
        for combo in itertools.product(all_perms(n), repeat=D - 1):
            t = PermTuple((ident,) + combo)
            key = canonical_key(t, "pure")
            if key not in seen:
                seen[key] = InvariantClass(PermTuple([Perm(i) for i in key[1]]), "pure")
    out = list(seen.values())
    if connected_only:
        if flavor == "mixed":
            out = [c for c in out if c.representative.K_m == 1]
        else:
            out = [c for c in out if c.representative.K_p == 1]
    out.sort(key=lambda c: c.key())
    return out


def pure_to_mixed(s: PermTuple) -> PermTuple:
    """Reduce a pure invariant to a mixed one with one color less:
    (sigma_1 sigma_D^{-1}, ..., sigma_{D-1} sigma_D^{-1}).  Class equality
    transports: s ~p s' iff the reduced tuples are ~m."""
    if s.D < 2:
        raise ValueError("need at least two colors to reduce")
    last_inv = s.perms[-1].inverse()
    return PermTuple([p * last_inv for p in s.perms[:-1]])


# -- orbit distances and Gram products ---------------------------------------


def orbit_distance(a: InvariantClass, b: InvariantClass) -> tuple[int, int]:
    """Distance between orbits and the number of relabelings attaining it.

    Mixed: min over eta of sum_c |sigma_c eta tau_c^{-1} eta^{-1}|.
    Pure: min over (eta, nu) of sum_c |sigma_c eta tau_c^{-1} nu|.
    """
    if a.flavor != b.flavor:
        raise ValueError("flavor mismatch")
    if a.n != b.n or a.D != b.D:
        raise ValueError("class shapes do not match")
    s, t = a.representative, b.representative
    n = a.n
    best, count = None, 0
    if a.flavor == "mixed":
        for eta in all_perms(n):
            inv = eta.inverse()
            d = sum(
                (s.perms[c] * eta * t.perms[c].inverse() * inv).length
                for c in range(a.D)
            )
            if best is None or d < best:
                best, count = d, 1
            elif d == best:
                count += 1
    else:
        t_inv = [p.inverse() for p in t.perms]
        for eta in all_perms(n):
            mids = [s.perms[c] * eta * t_inv[c] for c in range(a.D)]
            for nu in all_perms(n):
                d = sum((m * nu).length for m in mids)
                if best is None or d < best:
                    best, count = d, 1
                elif d == best:
                    count += 1
    return best, count


def gram_leading(a: InvariantClass, b: InvariantClass) -> tuple[int, int]:
    """Leading term C * N^(-d) of the Ginibre covariance between two orbits:
    returns (exponent, coefficient).  On the diagonal the coefficient is the
    cardinal of the centralizer (mixed) or the pair count (pure)."""
    d, mult = orbit_distance(a, b)
    return (-d, mult)


def exact_gram_entry(a: InvariantClass, b: InvariantClass):
    """The full Ginibre covariance sum_relabelings N^{-d} as an exact Laurent
    polynomial (normalized so the diagonal is O(1)); invertibility of the
    resulting matrix is what makes the trace-invariants independent, and it
    can be checked at explicit N with exact rational arithmetic."""
    from .weingarten import LaurentPoly

    if a.flavor != b.flavor or a.n != b.n or a.D != b.D:
        raise ValueError("class shapes do not match")
    s, t = a.representative, b.representative
    n, D = a.n, a.D
    coeffs: dict[int, int] = {}
    if a.flavor == "mixed":
        for eta in all_perms(n):
            inv = eta.inverse()
            d = sum(
                (s.perms[c] * eta * t.perms[c].inverse() * inv).length
                for c in range(D)
            )
            coeffs[-d] = coeffs.get(-d, 0) + 1
    else:
        t_inv = [p.inverse() for p in t.perms]
        for eta in all_perms(n):
            mids = [s.perms[c] * eta * t_inv[c] for c in range(D)]
            for nu in all_perms(n):
                d = sum((m * nu).length for m in mids)
                coeffs[-d] = coeffs.get(-d, 0) + 1
    return LaurentPoly(coeffs)


# -- numeric evaluation -------------------------------------------------------


@dataclass(frozen=True)
class DenseTensor:
    """Dense complex tensor with out_slots output and in_slots input indices,
    all of range N."""

    array: np.ndarray
    out_slots: int
    in_slots: int

    def __post_init__(self):
        if self.array.ndim != self.out_slots + self.in_slots:
            raise ValueError("array rank does not match slot counts")
        dims = set(self.array.shape)
        if len(dims) > 1:
            raise ValueError("all index ranges must be equal")

    @property
    def N(self) -> int:
        return self.array.shape[0] if self.array.ndim else 1

    @classmethod
    def identity(cls, N: int, D: int) -> "DenseTensor":
        """The unnormalized identity on (C^N)^{tensor D}."""
        eye = np.eye(N, dtype=complex)
        arr = eye
        for _ in range(D - 1):
            arr = np.tensordot(arr, eye, axes=0)
        # arrange as out_1..out_D ; in_1..in_D
        order = [2 * i for i in range(D)] + [2 * i + 1 for i in range(D)]
        arr = arr.transpose(order)
        return cls(arr, D, D)


def _label(i: int) -> str:
    letters = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ"
    return letters[i]


def eval_trace_invariant(
    s: PermTuple, flavor: str, tensors: Sequence[DenseTensor]
) -> complex:
    """Exact index-sum contraction of the labeled trace-invariant.

    Mixed: `tensors` is one tensor A per label (or a single tensor reused
    for all labels).  Pure: 2n tensors, T_1..T_n then Tbar_1..Tbar_n (or a
    [T, Tbar] pair reused for all labels).
    """
    _check_flavor(flavor)
    n, D = s.n, s.D
    if flavor == "mixed":
        if len(tensors) == 1:
            tensors = list(tensors) * n
        if len(tensors) != n:
            raise ValueError(f"need {n} tensors, got {len(tensors)}")
        if any(t.out_slots != D or t.in_slots != D for t in tensors):
            raise ValueError("mixed evaluation needs D outputs and D inputs per tensor")
    else:
        if len(tensors) == 2:
            tensors = [tensors[0]] * n + [tensors[1]] * n
        if len(tensors) != 2 * n:
            raise ValueError(f"need 2n={2 * n} tensors, got {len(tensors)}")
        if any(t.out_slots != D or t.in_slots != 0 for t in tensors[:n]):
            raise ValueError("pure evaluation needs D-output tensors first")
        if any(t.out_slots != 0 or t.in_slots != D for t in tensors[n:]):
            raise ValueError("pure evaluation needs D-input tensors last")
    N = tensors[0].N
    errors.check("contraction grid", N ** (n * D), errors.cap_contract())

    # one index label per (color, tensor label): output c of s carries (c, s),
    # matched with input c of sigma_c(s)
    def out_label(c: int, v: int) -> str:
        return _label(c * n + (v - 1))

    subs = []
    if flavor == "mixed":
        inv = [p.inverse() for p in s.perms]
        for v in range(1, n + 1):
            outs = "".join(out_label(c, v) for c in range(D))
            ins = "".join(out_label(c, inv[c](v)) for c in range(D))
            subs.append(outs + ins)
        ops = [t.array for t in tensors]
    else:
        inv = [p.inverse() for p in s.perms]
        for v in range(1, n + 1):
            subs.append("".join(out_label(c, v) for c in range(D)))
        for v in range(1, n + 1):
            subs.append("".join(out_label(c, inv[c](v)) for c in range(D)))
        ops = [t.array for t in tensors]
    expr = ",".join(subs) + "->"
    return complex(np.einsum(expr, *ops, optimize=True))


def eval_factorized_pure(s: PermTuple, tensors: Sequence[DenseTensor]) -> complex:
    """Pure evaluation as a product over pure connected components; used to
    cross-check factorization."""
    n = s.n
    if len(tensors) == 2:
        tensors = [tensors[0]] * n + [tensors[1]] * n
    comps = s.components_pure()
    out = 1.0 + 0.0j
    for whites, blacks in comps.blocks:
        sub = s.restrict_pure(whites, blacks)
        sub_tensors = [tensors[w - 1] for w in sorted(whites)] + [
            tensors[n + b - 1] for b in sorted(blacks)
        ]
        out *= eval_trace_invariant(sub, "pure", sub_tensors)
    return out
