"""Set partitions of {1..n} and bipartite partitions of {1..n, 1b..nb},
with join, refinement order, Moebius functions, exhaustive enumeration, and
the classical moment/cumulant transforms.

Bipartite partitions are stored as matched pairs of blocks (unbarred side,
barred side), each pair balanced by construction.  Barred elements are
written with a "b" suffix in text form: "{1,2;1b,2b|3;3b}".
"""
from __future__ import annotations

import itertools
import math
from fractions import Fraction
from typing import Callable, Iterable, Mapping

from .perms import Perm

DEFAULT_ENUM_CAP = 7


class SetPartition:
    """A partition of {1..n} into disjoint nonempty blocks."""

    __slots__ = ("n", "blocks")

    def __init__(self, n: int, blocks: Iterable[Iterable[int]]):
        blocks = tuple(sorted((tuple(sorted(b)) for b in blocks), key=lambda b: b[0]))
        seen = [x for b in blocks for x in b]
        if sorted(seen) != list(range(1, n + 1)):
            raise ValueError(f"blocks do not partition 1..{n}: {blocks!r}")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "blocks", blocks)

    def __setattr__(self, name, value):  # pragma: no cover - guard
        raise AttributeError("SetPartition is immutable")

    @classmethod
    def singletons(cls, n: int) -> "SetPartition":
        """The finest partition 0_n."""
        return cls(n, [(i,) for i in range(1, n + 1)])

    @classmethod
    def full(cls, n: int) -> "SetPartition":
        """The coarsest partition 1_n."""
        return cls(n, [tuple(range(1, n + 1))] if n else [])

    @classmethod
    def from_permutation(cls, p: Perm) -> "SetPartition":
        """The partition induced by the cycles of p."""
        return cls(p.n, p.cycles())

    @classmethod
    def from_text(cls, text: str) -> "SetPartition":
        body = text.strip().strip("{}")
        blocks = [
            [int(tok) for tok in grp.split(",") if tok.strip()]
            for grp in body.split("|")
            if grp.strip()
        ]
        n = max((x for b in blocks for x in b), default=0)
        return cls(n, blocks)

    @property
    def num_blocks(self) -> int:
        return len(self.blocks)

    def block_of(self, x: int) -> tuple[int, ...]:
        for b in self.blocks:
            if x in b:
                return b
        raise KeyError(x)

    def join(self, other: "SetPartition") -> "SetPartition":
        """The finest partition coarser than both, via union-find."""
        if self.n != other.n:
            raise ValueError(f"size mismatch: {self.n} vs {other.n}")
        parent = list(range(self.n + 1))

        def find(x: int) -> int:
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for part in (self, other):
            for b in part.blocks:
                for x in b[1:]:
                    ra, rb = find(b[0]), find(x)
                    if ra != rb:
                        parent[rb] = ra
        groups: dict[int, list[int]] = {}
        for x in range(1, self.n + 1):
            groups.setdefault(find(x), []).append(x)
        return SetPartition(self.n, groups.values())

    def leq(self, other: "SetPartition") -> bool:
        """Refinement order: every block of self lies inside a block of other."""
        if self.n != other.n:
            raise ValueError(f"size mismatch: {self.n} vs {other.n}")
        where = {}
        for i, b in enumerate(other.blocks):
            for x in b:
                where[x] = i
        return all(len({where[x] for x in b}) == 1 for b in self.blocks)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, SetPartition)
            and self.n == other.n
            and self.blocks == other.blocks
        )

    def __hash__(self) -> int:
        return hash((self.n, self.blocks))

    def __str__(self) -> str:
        return "{" + "|".join(",".join(map(str, b)) for b in self.blocks) + "}"

    def __repr__(self) -> str:
        return f"SetPartition.from_text({str(self)!r})"


def join(a: SetPartition, b: SetPartition) -> SetPartition:
    return a.join(b)


def leq(a: SetPartition, b: SetPartition) -> bool:
    return a.leq(b)


def moebius_partition(pi: SetPartition) -> int:
    """lambda_pi = (-1)^{#pi - 1} (#pi - 1)!, the Moebius function of the
    interval [pi, 1_n] in the partition lattice."""
    k = pi.num_blocks
    return (-1) ** (k - 1) * math.factorial(k - 1)


def moebius_partition_rel(finer: SetPartition, coarser: SetPartition) -> int:
    """Relative Moebius function: the product over blocks B of coarser of
    the absolute form applied to finer restricted to B."""
    if not finer.leq(coarser):
        raise ValueError("first argument must refine the second")
    where = {}
    for i, b in enumerate(finer.blocks):
        for x in b:
            where[x] = i
    out = 1
    for b in coarser.blocks:
        k = len({where[x] for x in b})
        out *= (-1) ** (k - 1) * math.factorial(k - 1)
    return out


def enumerate_partitions(n: int, cap: int = DEFAULT_ENUM_CAP) -> list[SetPartition]:
    """All partitions of {1..n} (Bell-number many)."""
    if n > cap:
        raise ValueError(f"n={n} exceeds enumeration cap {cap}")
    out: list[SetPartition] = []

    def rec(i: int, blocks: list[list[int]]):
        if i > n:
            out.append(SetPartition(n, [tuple(b) for b in blocks]))
            return
        for b in blocks:
            b.append(i)
            rec(i + 1, blocks)
            b.pop()
        blocks.append([i])
        rec(i + 1, blocks)
        blocks.pop()

    rec(1, [])
    return out


def coarsenings(pi: SetPartition) -> list[SetPartition]:
    """All partitions >= pi (groupings of its blocks)."""
    k = pi.num_blocks
    out = []
    for grouping in enumerate_partitions(k, cap=max(k, DEFAULT_ENUM_CAP)):
        blocks = [
            tuple(sorted(x for i in grp for x in pi.blocks[i - 1]))
            for grp in grouping.blocks
        ]
        out.append(SetPartition(pi.n, blocks))
    return out


class BipartitePartition:
    """A partition of {1..n, 1b..nb} in which every block has as many
    unbarred as barred elements, stored as matched (unbarred, barred) pairs."""

    __slots__ = ("n", "blocks")

    def __init__(self, n: int, blocks: Iterable[tuple[Iterable[int], Iterable[int]]]):
        blocks = tuple(
            sorted(
                ((tuple(sorted(w)), tuple(sorted(b))) for w, b in blocks),
                key=lambda wb: wb[0][0],
            )
        )
        whites = [x for w, _ in blocks for x in w]
        blacks = [x for _, b in blocks for x in b]
        if sorted(whites) != list(range(1, n + 1)) or sorted(blacks) != list(
            range(1, n + 1)
        ):
            raise ValueError(f"blocks do not partition both sides of 1..{n}")
        if any(len(w) != len(b) for w, b in blocks):
            raise ValueError("blocks must balance unbarred and barred elements")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "blocks", blocks)

    def __setattr__(self, name, value):  # pragma: no cover - guard
        raise AttributeError("BipartitePartition is immutable")

    @classmethod
    def from_pairing(cls, eta: Perm) -> "BipartitePartition":
        """The perfect matching {s, eta(s)b}."""
        return cls(eta.n, [((s,), (eta(s),)) for s in range(1, eta.n + 1)])

    @classmethod
    def full(cls, n: int) -> "BipartitePartition":
        r = tuple(range(1, n + 1))
        return cls(n, [(r, r)] if n else [])

    @classmethod
    def from_text(cls, text: str) -> "BipartitePartition":
        body = text.strip().strip("{}")
        blocks = []
        for grp in body.split("|"):
            if not grp.strip():
                continue
            wpart, bpart = grp.split(";")
            w = [int(t) for t in wpart.split(",") if t.strip()]
            b = [int(t.strip().rstrip("b")) for t in bpart.split(",") if t.strip()]
            blocks.append((w, b))
        n = max((x for w, _ in blocks for x in w), default=0)
        return cls(n, blocks)

    @property
    def num_blocks(self) -> int:
        return len(self.blocks)

    def join(self, other: "BipartitePartition") -> "BipartitePartition":
        if self.n != other.n:
            raise ValueError(f"size mismatch: {self.n} vs {other.n}")
        # union-find over 2n slots: 1..n unbarred, n+1..2n barred
        parent = list(range(2 * self.n + 1))

        def find(x: int) -> int:
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        def union(a: int, b: int):
            ra, rb = find(a), find(b)
            if ra != rb:
                parent[rb] = ra

        for part in (self, other):
            for w, b in part.blocks:
                root = w[0]
                for x in w[1:]:
                    union(root, x)
                for x in b:
                    union(root, self.n + x)
        groups: dict[int, tuple[list[int], list[int]]] = {}
        for x in range(1, self.n + 1):
            groups.setdefault(find(x), ([], []))[0].append(x)
            groups.setdefault(find(self.n + x), ([], []))[1].append(x)
        return BipartitePartition(self.n, groups.values())

    def leq(self, other: "BipartitePartition") -> bool:
        if self.n != other.n:
            raise ValueError(f"size mismatch: {self.n} vs {other.n}")
        where_w = {x: i for i, (w, _) in enumerate(other.blocks) for x in w}
        where_b = {x: i for i, (_, b) in enumerate(other.blocks) for x in b}
        for w, b in self.blocks:
            targets = {where_w[x] for x in w} | {where_b[x] for x in b}
            if len(targets) != 1:
                return False
        return True

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, BipartitePartition)
            and self.n == other.n
            and self.blocks == other.blocks
        )

    def __hash__(self) -> int:
        return hash((self.n, self.blocks))

    def __str__(self) -> str:
        return "{" + "|".join(
            ",".join(map(str, w)) + ";" + ",".join(f"{x}b" for x in b)
            for w, b in self.blocks
        ) + "}"

    def __repr__(self) -> str:
        return f"BipartitePartition.from_text({str(self)!r})"


def moebius_bipartite(pi: BipartitePartition) -> int:
    """Same block-count formula as for plain partitions."""
    k = pi.num_blocks
    return (-1) ** (k - 1) * math.factorial(k - 1)


def bipartite_coarsenings(pi: BipartitePartition) -> list[BipartitePartition]:
    """All bipartite partitions >= pi; any grouping of its (balanced) blocks
    is again balanced."""
    k = pi.num_blocks
    out = []
    for grouping in enumerate_partitions(k, cap=max(k, DEFAULT_ENUM_CAP)):
        blocks = []
        for grp in grouping.blocks:
            w = sorted(x for i in grp for x in pi.blocks[i - 1][0])
            b = sorted(x for i in grp for x in pi.blocks[i - 1][1])
            blocks.append((w, b))
        out.append(BipartitePartition(pi.n, blocks))
    return out


def enumerate_bipartite(n: int, cap: int = DEFAULT_ENUM_CAP) -> list[BipartitePartition]:
    """All bipartite partitions of {1..n, 1b..nb}: a partition on each side
    plus a size-preserving matching of blocks."""
    if n > cap:
        raise ValueError(f"n={n} exceeds enumeration cap {cap}")
    side = enumerate_partitions(n, cap)
    out = []
    for pw in side:
        for pb in side:
            if sorted(map(len, pw.blocks)) != sorted(map(len, pb.blocks)):
                continue
            # match blocks of equal size in all possible ways
            by_size: dict[int, tuple[list, list]] = {}
            for b in pw.blocks:
                by_size.setdefault(len(b), ([], []))[0].append(b)
            for b in pb.blocks:
                by_size.setdefault(len(b), ([], []))[1].append(b)
            choices = []
            for size, (ws, bs) in sorted(by_size.items()):
                choices.append(
                    [list(zip(ws, perm)) for perm in itertools.permutations(bs)]
                )
            for combo in itertools.product(*choices):
                blocks = [pair for grp in combo for pair in grp]
                out.append(BipartitePartition(n, blocks))
    return out


# -- classical moment/cumulant transforms -----------------------------------

MomentFn = Callable[[frozenset[int]], object]


def _as_fn(m: Mapping | Callable) -> Callable:
    return m if callable(m) else m.__getitem__


def classical_cumulant_from_moments(n: int, moments: Mapping | MomentFn):
    """k_n(x_1..x_n) = sum over partitions of lambda_pi times the product of
    block moments; `moments` maps a frozenset of indices to E[prod x_i]."""
    mom = _as_fn(moments)
    total = 0
    for pi in enumerate_partitions(n, cap=max(n, DEFAULT_ENUM_CAP)):
        term = moebius_partition(pi)
        for b in pi.blocks:
            term = term * mom(frozenset(b))
        total = total + term
    return total


def moment_from_classical_cumulants(n: int, cumulants: Mapping | MomentFn):
    """E[x_1..x_n] = sum over partitions of the product of block cumulants."""
    cum = _as_fn(cumulants)
    total = 0
    for pi in enumerate_partitions(n, cap=max(n, DEFAULT_ENUM_CAP)):
        term = 1
        for b in pi.blocks:
            term = term * cum(frozenset(b))
        total = total + term
    return total


def bipartite_cumulant_from_moments(n: int, moments: Callable[[frozenset, frozenset], object]):
    """Cumulant of a balanced family f_1..f_n, fb_1..fb_n whose unbalanced
    moments vanish: the partition sum restricts to bipartite partitions.
    `moments(W, B)` is E[prod_{i in W} f_i prod_{j in B} fb_j]."""
    total = 0
    for pi in enumerate_bipartite(n, cap=max(n, DEFAULT_ENUM_CAP)):
        term = moebius_bipartite(pi)
        for w, b in pi.blocks:
            term = term * moments(frozenset(w), frozenset(b))
        total = total + term
    return total


def bipartite_moment_from_cumulants(n: int, cumulants: Callable[[frozenset, frozenset], object]):
    total = 0
    for pi in enumerate_bipartite(n, cap=max(n, DEFAULT_ENUM_CAP)):
        term = 1
        for w, b in pi.blocks:
            term = term * cumulants(frozenset(w), frozenset(b))
        total = total + term
    return total


def bipartite_count(n: int, profile: Mapping[int, int]) -> Fraction:
    """Closed-form count of bipartite partitions with d_i blocks of size i+i:
    n!^2 / prod_i d_i! (i!)^{2 d_i}."""
    denom = 1
    for i, d in profile.items():
        denom *= math.factorial(d) * math.factorial(i) ** (2 * d)
    return Fraction(math.factorial(n) ** 2, denom)
