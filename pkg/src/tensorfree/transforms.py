"""Moment <-> free-cumulant transforms.

Finite N: the cumulant of an invariant is a partition sum of per-block
kernels, where the kernel of a block is the Weingarten-weighted sum of all
moments of that size; the inverse expands moments over multiplicatively
extended cumulants with N^{nD - d} weights.  Values are exact rational
functions of N (Laurent polynomials embed); any ring-like value with + and *
works, which the tests exploit with symbolic entries.

First order: for melonic invariants the transform pair is a Moebius
inversion over the per-cycle product of non-crossing lattices, with the
labeling normalized so the canonical pairing is the identity.  The mixed
(Wishart-scaled) variant runs the same lattice against the pairing of
(s, id).  Beyond melonic, the dominant set S(s) is materialized by direct
minimization.
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from . import errors
from .errors import MissingEntryError
from .invariants import (
    InvariantClass,
    PermTuple,
    canonical_class_and_word,
    canonical_key,
    enumerate_classes,
)
from .melonic import canonical_pairing, distance_to_pairing
from .partitions import (
    BipartitePartition,
    SetPartition,
    bipartite_coarsenings,
    coarsenings,
    moebius_partition,
)
from .perms import (
    Perm,
    all_perms,
    cayley_distance,
    enumerate_noncrossing,
    moebius_nc,
    moebius_nc_tuple,
)
from .weingarten import LaurentPoly, RationalFunctionInN, weingarten


class MomentTable:
    """Mapping from invariant classes (optionally with generator words) to
    values; `regime` is "finite" (Laurent/rational values) or "asymptotic"
    (big-rational values)."""

    def __init__(self, flavor: str, regime: str, multilabel: bool = False):
        if flavor not in ("mixed", "pure"):
            raise ValueError(f"bad flavor {flavor!r}")
        if regime not in ("finite", "asymptotic"):
            raise ValueError(f"bad regime {regime!r}")
        self.flavor = flavor
        self.regime = regime
        self.multilabel = multilabel
        self.entries: dict = {}

    def _key(self, s: PermTuple | InvariantClass, word):
        if isinstance(s, InvariantClass):
            s = s.representative
        if self.multilabel:
            if word is None:
                raise ValueError("table is multilabel: a word is required")
            return canonical_class_and_word(s, self.flavor, word)
        if word is not None:
            raise ValueError("table is single-label: no word expected")
        return canonical_key(s, self.flavor)

    def set(self, s, value, word=None) -> None:
        self.entries[self._key(s, word)] = value

    def has(self, s, word=None) -> bool:
        return self._key(s, word) in self.entries

    def value(self, s, word=None):
        key = self._key(s, word)
        try:
            return self.entries[key]
        except KeyError:
            raise MissingEntryError(f"no table entry for {key!r}") from None

    def copy(self) -> "MomentTable":
        out = type(self)(self.flavor, self.regime, self.multilabel)
        out.entries = dict(self.entries)
        return out

    def __len__(self) -> int:
        return len(self.entries)

    # -- serialization ------------------------------------------------------

    @staticmethod
    def _value_to_json(v):
        if isinstance(v, LaurentPoly):
            return {"laurent": v.to_json()}
        if isinstance(v, RationalFunctionInN):
            return {"ratfun": v.serialize()}
        v = Fraction(v)
        return {"rational": f"{v.numerator}/{v.denominator}"}

    @staticmethod
    def _value_from_json(data):
        if "laurent" in data:
            return LaurentPoly.from_json(data["laurent"])
        if "ratfun" in data:
            return RationalFunctionInN.deserialize(data["ratfun"])
        return Fraction(data["rational"])

    def to_json(self) -> str:
        items = []
        for key, value in sorted(self.entries.items(), key=repr):
            if self.multilabel:
                (flavor, images), word = key
            else:
                flavor, images = key
                word = None
            cls = InvariantClass(PermTuple([Perm(im) for im in images]), flavor)
            rec = {"class": cls.text(), "value": self._value_to_json(value)}
            if word is not None:
                rec["word"] = list(word) if self.flavor == "mixed" else [
                    list(word[0]),
                    list(word[1]),
                ]
            items.append(rec)
        return json.dumps(
            {
                "flavor": self.flavor,
                "regime": self.regime,
                "multilabel": self.multilabel,
                "entries": items,
            },
            sort_keys=True,
            indent=1,
        )

    @classmethod
    def from_json(cls, blob: str) -> "MomentTable":
        data = json.loads(blob)
        out = cls(data["flavor"], data["regime"], data.get("multilabel", False))
        for rec in data["entries"]:
            icls = InvariantClass.from_text(rec["class"])
            word = rec.get("word")
            if word is not None:
                if out.flavor == "pure":
                    word = (tuple(word[0]), tuple(word[1]))
                else:
                    word = tuple(word)
            out.set(icls.representative, cls._value_from_json(rec["value"]), word=word)
        return out


class CumulantTable(MomentTable):
    """Same shape as MomentTable; the name records which side it holds."""


def closure_check(table: MomentTable, n: int, D: int) -> None:
    """Verify the table holds every class of each size up to n (what the
    finite transforms can touch through block restrictions)."""
    if table.multilabel:
        return  # multilabel closure is checked lazily on lookup
    for m in range(1, n + 1):
        for cls in enumerate_classes(m, D, table.flavor):
            if not table.has(cls.representative):
                raise MissingEntryError(
                    f"table not closed: missing size-{m} class {cls.text()}"
                )


# -- finite-N transforms -------------------------------------------------------


def _weingarten_type_product(types: tuple[tuple[int, ...], ...]) -> RationalFunctionInN:
    out = RationalFunctionInN((1,))
    from .perms import IntegerPartition

    for t in types:
        out = out * weingarten(IntegerPartition(t))
    return out


def _block_kernel(moments: MomentTable, rho: PermTuple, memo: dict):
    """sum over tau in S_m^D of E[Tr_tau] prod_c W(rho_c tau_c^{-1});
    a class function of rho in either flavor, grouped by Weingarten cycle
    types so each rational-function product is taken once."""
    key = canonical_key(rho, moments.flavor)
    if key in memo:
        return memo[key]
    m, D = rho.n, rho.D
    groups: dict = {}
    for combo in itertools.product(all_perms(m), repeat=D):
        tau = PermTuple(combo)
        types = tuple(
            (rho.perms[c] * combo[c].inverse()).cycle_type().parts for c in range(D)
        )
        val = moments.value(tau)
        groups[types] = groups.get(types, 0) + val
    total = 0
    for types, acc in groups.items():
        total = total + acc * _weingarten_type_product(types)
    memo[key] = total
    return total


def finite_cumulant_mixed(moments: MomentTable, s: PermTuple):
    """Mixed finite-size free cumulant of s from a finite moment table."""
    if moments.flavor != "mixed" or moments.regime != "finite":
        raise ValueError("need a finite mixed moment table")
    closure_check(moments, s.n, s.D)
    comp = s.components_mixed()
    memo: dict = {}
    total = 0
    for pi in coarsenings(comp):
        term = moebius_partition(pi)
        for block in pi.blocks:
            term = term * _block_kernel(moments, s.restrict_mixed(block), memo)
        total = total + term
    return total


def finite_cumulant_pure(moments: MomentTable, s: PermTuple):
    """Pure finite-size free cumulant: the double sum over tau and bipartite
    partitions, organized as per-block kernels.  For purely connected s the
    sum collapses to a single kernel (the mixed formula)."""
    if moments.flavor != "pure" or moments.regime != "finite":
        raise ValueError("need a finite pure moment table")
    closure_check(moments, s.n, s.D)
    comp = s.components_pure()
    memo: dict = {}
    total = 0
    for pi in bipartite_coarsenings(comp):
        k = pi.num_blocks
        term = (-1) ** (k - 1) * math.factorial(k - 1)
        for whites, blacks in pi.blocks:
            term = term * _block_kernel(
                moments, s.restrict_pure(whites, blacks), memo
            )
        total = total + term
    return total


def _mult_ext_cumulant_mixed(cumulants: MomentTable, tau: PermTuple, memo: dict):
    """sum over pi >= Pi(tau) of prod_G K[tau|_G]; a class function."""
    key = canonical_key(tau, "mixed")
    if key in memo:
        return memo[key]
    comp = tau.components_mixed()
    total = 0
    for pi in coarsenings(comp):
        term = 1
        for block in pi.blocks:
            term = term * cumulants.value(tau.restrict_mixed(block))
        total = total + term
    memo[key] = total
    return total


def _mult_ext_cumulant_pure(cumulants: MomentTable, tau: PermTuple, memo: dict):
    key = canonical_key(tau, "pure")
    if key in memo:
        return memo[key]
    comp = tau.components_pure()
    total = 0
    for pi in bipartite_coarsenings(comp):
        term = 1
        for whites, blacks in pi.blocks:
            term = term * cumulants.value(tau.restrict_pure(whites, blacks))
        total = total + term
    memo[key] = total
    return total


def finite_moment_from_cumulants(cumulants: MomentTable, s: PermTuple):
    """E[Tr_s] = sum over tau of (multiplicatively extended cumulants)
    times N^{nD - d(s, tau)}, in the flavor of the table."""
    if cumulants.regime != "finite":
        raise ValueError("need a finite cumulant table")
    closure_check(cumulants, s.n, s.D)
    n, D = s.n, s.D
    flavor = cumulants.flavor
    memo: dict = {}
    mult = (
        _mult_ext_cumulant_mixed if flavor == "mixed" else _mult_ext_cumulant_pure
    )
    # group tau by class: the N-weight sum is a Laurent polynomial per class
    weights: dict = {}
    reps: dict = {}
    for combo in itertools.product(all_perms(n), repeat=D):
        tau = PermTuple(combo)
        d = sum(cayley_distance(s.perms[c], combo[c]) for c in range(D))
        key = canonical_key(tau, flavor)
        reps.setdefault(key, tau)
        w = weights.setdefault(key, {})
        e = n * D - d
        w[e] = w.get(e, 0) + 1
    total = 0
    for key, expmap in weights.items():
        total = total + mult(cumulants, reps[key], memo) * LaurentPoly(
            {e: Fraction(c) for e, c in expmap.items()}
        )
    return total


@dataclass(frozen=True)
class EntryPattern:
    """The entry-index pattern whose classical cumulant equals the finite
    free cumulant: outputs i_c(sigma_c(s)), inputs i_c(s), over distinct
    index values i_c(1..n)."""

    flavor: str
    perms: PermTuple

    def output_indices(self, slot: int, assignment: Sequence[Sequence[int]]):
        return tuple(
            assignment[c][self.perms[c](slot) - 1] for c in range(self.perms.D)
        )

    def input_indices(self, slot: int, assignment: Sequence[Sequence[int]]):
        return tuple(assignment[c][slot - 1] for c in range(self.perms.D))

    def describe(self) -> str:
        n, D = self.perms.n, self.perms.D
        rows = []
        for s in range(1, n + 1):
            outs = ",".join(f"i{c + 1}({self.perms[c](s)})" for c in range(D))
            ins = ",".join(f"i{c + 1}({s})" for c in range(D))
            if self.flavor == "mixed":
                rows.append(f"A[{outs};{ins}]")
            else:
                rows.append(f"T[{outs}] Tbar[{ins}]")
        return " * ".join(rows)


def microscopic_cumulant(s: PermTuple, flavor: str) -> EntryPattern:
    """Descriptor of the tensor-entry pattern the Monte Carlo oracle should
    take a classical cumulant of; its estimate converges to the finite free
    cumulant of s."""
    if flavor not in ("mixed", "pure"):
        raise ValueError(f"bad flavor {flavor!r}")
    return EntryPattern(flavor, s)


# -- first-order (asymptotic) transforms ---------------------------------------


def _noncrossing_poset(base: PermTuple) -> Iterable[PermTuple]:
    per_color = [enumerate_noncrossing(p) for p in base.perms]
    for combo in itertools.product(*per_color):
        yield PermTuple(combo)


def _phi_mult_pure(phi: MomentTable, tau: PermTuple, word=None):
    out = 1
    comp = tau.components_pure()
    for whites, blacks in comp.blocks:
        sub = tau.restrict_pure(whites, blacks)
        sub_word = None
        if word is not None:
            ws, bs = word
            sub_word = (
                tuple(ws[x - 1] for x in sorted(whites)),
                tuple(bs[x - 1] for x in sorted(blacks)),
            )
        out = out * phi.value(sub, word=sub_word)
    return out


def _phi_mult_mixed(phi: MomentTable, tau: PermTuple, word=None):
    out = 1
    comp = tau.components_mixed()
    for block in comp.blocks:
        sub = tau.restrict_mixed(block)
        sub_word = tuple(word[x - 1] for x in sorted(block)) if word is not None else None
        out = out * phi.value(sub, word=sub_word)
    return out


def _normalize_pure(s: PermTuple, word):
    """Right-compose with the inverse canonical pairing so the pairing
    becomes the identity; permute the white labels accordingly."""
    eta = canonical_pairing(s)
    sp = s.right_mul(eta.inverse())
    wp = None
    if word is not None:
        ws, bs = word
        inv = eta.inverse()
        wp = (tuple(ws[inv(i) - 1] for i in range(1, s.n + 1)), tuple(bs))
    return sp, wp


def asymptotic_cumulant_melonic(phi: MomentTable, s: PermTuple, word=None) -> Fraction:
    """First-order free cumulant of a purely connected melonic invariant:
    kappa = sum over tau below s in the per-cycle non-crossing product of
    the multiplicative phi times the Moebius factor."""
    if s.D < 3:
        raise ValueError("melonic free cumulants need at least 3 colors")
    if s.K_p != 1:
        raise ValueError("input must be purely connected")
    sp, wp = _normalize_pure(s, word)
    total = 0
    for tau in _noncrossing_poset(sp):
        mob = moebius_nc_tuple(sp.perms[c] * tau.perms[c].inverse() for c in range(sp.D))
        total = total + _phi_mult_pure(phi, tau, wp) * mob
    return total


def asymptotic_moment_from_cumulants_melonic(
    kappa: MomentTable, s: PermTuple, word=None
) -> Fraction:
    """Inverse transform: the multiplicative asymptotic moment of a melonic
    invariant is the plain sum of multiplicative cumulants over the poset."""
    if s.D < 3:
        raise ValueError("melonic free cumulants need at least 3 colors")
    sp, wp = _normalize_pure(s, word)
    total = 0
    for tau in _noncrossing_poset(sp):
        total = total + _phi_mult_pure(kappa, tau, wp)
    return total


def _wishart_base(s: PermTuple):
    ident = Perm.identity(s.n)
    ext = s.extend(ident)
    eta = canonical_pairing(ext)
    return eta


def asymptotic_cumulant_wishart_mixed(phi: MomentTable, s: PermTuple, word=None) -> Fraction:
    """Wishart-scaled mixed first-order cumulant: the lattice runs over
    tau with tau eta^{-1} below s eta^{-1}, eta the canonical pairing of
    (s, id); phi extends multiplicatively over mixed components."""
    if s.K_m != 1:
        raise ValueError("input must be connected")
    eta = _wishart_base(s)
    base = PermTuple([p * eta.inverse() for p in s.perms])
    total = 0
    for rho in _noncrossing_poset(base):
        tau = PermTuple([r * eta for r in rho.perms])
        mob = moebius_nc_tuple(s.perms[c] * tau.perms[c].inverse() for c in range(s.D))
        total = total + _phi_mult_mixed(phi, tau, word) * mob
    return total


def asymptotic_moment_from_cumulants_wishart(
    kappa: MomentTable, s: PermTuple, word=None
) -> Fraction:
    """Inverse of the Wishart-scaled transform over the same poset."""
    eta = _wishart_base(s)
    base = PermTuple([p * eta.inverse() for p in s.perms])
    total = 0
    for rho in _noncrossing_poset(base):
        tau = PermTuple([r * eta for r in rho.perms])
        total = total + _phi_mult_mixed(kappa, tau, word)
    return total


def _kappa_mult_pure_ext(kappa_pure: MomentTable, ext: PermTuple):
    out = 1
    for whites, blacks in ext.components_pure().blocks:
        out = out * kappa_pure.value(ext.restrict_pure(whites, blacks))
    return out


def pure_from_mixed_cumulants(kappa_mixed: MomentTable, s: PermTuple) -> Fraction:
    """kappa of (s, id) in D+1 colors, from the mixed cumulants:
    sum over nu with nu eta^{-1} below eta^{-1} of kappa^m[s nu^{-1}] M(nu)."""
    eta = _wishart_base(s)
    total = 0
    for rho in enumerate_noncrossing(eta.inverse()):
        nu = rho * eta
        reduced = s.right_mul(nu.inverse())
        val = 1
        for block in reduced.components_mixed().blocks:
            val = val * kappa_mixed.value(reduced.restrict_mixed(block))
        total = total + val * moebius_nc(nu)
    return total


def mixed_from_pure_cumulants(kappa_pure: MomentTable, s: PermTuple) -> Fraction:
    """kappa^m of s from the pure cumulants one color up:
    sum over nu with nu eta^{-1} below eta^{-1} of kappa[(s, nu)]."""
    eta = _wishart_base(s)
    total = 0
    for rho in enumerate_noncrossing(eta.inverse()):
        nu = rho * eta
        total = total + _kappa_mult_pure_ext(kappa_pure, s.extend(nu))
    return total


# -- higher orders: the dominant set --------------------------------------------


def _pairing_respects(eta: Perm, pi: BipartitePartition) -> bool:
    where_w = {x: i for i, (w, _) in enumerate(pi.blocks) for x in w}
    where_b = {x: i for i, (_, b) in enumerate(pi.blocks) for x in b}
    return all(where_w[s] == where_b[eta(s)] for s in range(1, eta.n + 1))


def _min_connecting_distance(tau: PermTuple, pi: BipartitePartition) -> int | None:
    """min over eta in H_{tau, pi} of d(tau, eta): eta maps each block to its
    matched barred block and connects every restriction."""
    best = None
    for eta in all_perms(tau.n):
        if not _pairing_respects(eta, pi):
            continue
        ok = True
        for whites, blacks in pi.blocks:
            sub = tau.restrict_pure(whites, blacks)
            sub_eta = Perm(
                sorted(blacks).index(eta(w)) + 1 for w in sorted(whites)
            )
            if sub.extend(sub_eta).K_p != 1:
                ok = False
                break
        if not ok:
            continue
        d = distance_to_pairing(tau, eta)
        if best is None or d < best:
            best = d
    return best


def dominant_set(
    s: PermTuple, assume_compatible_lattice: bool = False
) -> set[tuple[BipartitePartition, PermTuple]]:
    """The set S(s) of (partition, tau) pairs that dominate the finite
    cumulant of a purely connected invariant, by direct minimization.

    With `assume_compatible_lattice` the conjectural shortcut is taken for a
    compatible s with unique minimizer eta: S = {(Pi_p(tau), tau) :
    tau eta^{-1} below s eta^{-1}}.
    """
    if s.K_p != 1:
        raise ValueError("input must be purely connected")
    errors.check("dominant-set degree", s.n, 4)
    if assume_compatible_lattice:
        from .melonic import is_compatible

        ok, minimizers = is_compatible(s)
        if not ok or len(minimizers) != 1:
            raise ValueError("shortcut needs a compatible s with a unique minimizer")
        eta = minimizers[0]
        base = PermTuple([p * eta.inverse() for p in s.perms])
        out = set()
        for rho in _noncrossing_poset(base):
            tau = PermTuple([r * eta for r in rho.perms])
            out.add((tau.components_pure(), tau))
        return out

    r_min = min(distance_to_pairing(s, eta) for eta in all_perms(s.n))
    out = set()
    for combo in itertools.product(all_perms(s.n), repeat=s.D):
        tau = PermTuple(combo)
        d_st = sum(cayley_distance(s.perms[c], combo[c]) for c in range(s.D))
        if d_st > r_min:
            continue
        for pi in bipartite_coarsenings(tau.components_pure()):
            dmin = _min_connecting_distance(tau, pi)
            if dmin is None:
                continue
            if d_st + dmin == r_min:
                out.add((pi, tau))
    return out


def asymptotic_cumulant_general(phi: MomentTable, s: PermTuple) -> Fraction:
    """Rescaled limit of the finite cumulant of any purely connected s:
    the sum over the dominant set of block-products of phi times Moebius."""
    total = 0
    for pi, tau in dominant_set(s):
        val = 1
        for whites, blacks in pi.blocks:
            val = val * phi.value(tau.restrict_pure(whites, blacks))
        mob = moebius_nc_tuple(s.perms[c] * tau.perms[c].inverse() for c in range(s.D))
        total = total + val * mob
    return total


def free_additive_convolution_melonic(
    kappa_a: MomentTable, kappa_b: MomentTable
) -> MomentTable:
    """Entrywise sum of first-order cumulant tables (free additive
    convolution of independent ensembles in the same scaling class)."""
    if kappa_a.flavor != kappa_b.flavor or kappa_a.regime != kappa_b.regime:
        raise ValueError("tables must share flavor and regime")
    if kappa_a.multilabel != kappa_b.multilabel:
        raise ValueError("tables must agree on labeling")
    out = CumulantTable(kappa_a.flavor, kappa_a.regime, kappa_a.multilabel)
    keys = set(kappa_a.entries) | set(kappa_b.entries)
    for key in keys:
        va = kappa_a.entries.get(key, 0)
        vb = kappa_b.entries.get(key, 0)
        out.entries[key] = va + vb
    return out
