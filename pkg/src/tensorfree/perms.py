"""Permutations of {1..n}: composition, Cayley distance, the non-crossing
(geodesic) order, its Moebius function, genus, and Catalan counting.

Permutations are stored in one-line form, 1-based: ``Perm((3, 1, 2))`` maps
1 -> 3, 2 -> 1, 3 -> 2.  Cycle notation is a derived view.  All values are
immutable and hashable, so they can be used as dict keys and shared freely
between threads.
"""
from __future__ import annotations

import itertools
import math
import re
from functools import lru_cache
from typing import Iterable, Iterator, Sequence


class Perm:
    """A bijection of {1..n} in one-line form."""

    __slots__ = ("images",)

    def __init__(self, images: Iterable[int]):
        images = tuple(images)
        n = len(images)
        if sorted(images) != list(range(1, n + 1)):
            raise ValueError(f"not a bijection of 1..{n}: {images!r}")
        object.__setattr__(self, "images", images)

    def __setattr__(self, name, value):  # pragma: no cover - guard
        raise AttributeError("Perm is immutable")

    # -- constructors ------------------------------------------------------

    @classmethod
    def identity(cls, n: int) -> "Perm":
        return cls(range(1, n + 1))

    @classmethod
    def full_cycle(cls, n: int) -> "Perm":
        """The cycle (1 2 ... n)."""
        return cls(tuple(range(2, n + 1)) + (1,)) if n else cls(())

    @classmethod
    def transposition(cls, n: int, i: int, j: int) -> "Perm":
        images = list(range(1, n + 1))
        images[i - 1], images[j - 1] = j, i
        return cls(images)

    @classmethod
    def from_cycles(cls, n: int, cycles: Iterable[Sequence[int]]) -> "Perm":
        images = list(range(1, n + 1))
        seen: set[int] = set()
        for cycle in cycles:
            for a, b in zip(cycle, cycle[1:] + type(cycle)([cycle[0]])):
                if a in seen:
                    raise ValueError(f"element {a} repeated in cycles")
                seen.add(a)
                images[a - 1] = b
        return cls(images)

    @classmethod
    def from_text(cls, text: str, n: int | None = None) -> "Perm":
        """Parse either cycle form "(1 3 2)(4)" or one-line form "[3,1,2,4]"."""
        text = text.strip()
        if text.startswith("["):
            images = [int(tok) for tok in re.findall(r"-?\d+", text)]
            return cls(images)
        cycles = [
            [int(tok) for tok in re.split(r"[,\s]+", grp.strip()) if tok]
            for grp in re.findall(r"\(([^()]*)\)", text)
        ]
        support = [a for cyc in cycles for a in cyc]
        if n is None:
            n = max(support, default=0)
        return cls.from_cycles(n, [c for c in cycles if len(c) > 1])

    # -- basic structure ---------------------------------------------------

    @property
    def n(self) -> int:
        return len(self.images)

    def __call__(self, i: int) -> int:
        return self.images[i - 1]

    def __mul__(self, other: "Perm") -> "Perm":
        """Composition: (p * q)(i) = p(q(i))."""
        if self.n != other.n:
            raise ValueError(f"degree mismatch: {self.n} vs {other.n}")
        img = self.images
        return Perm(img[j - 1] for j in other.images)

    def inverse(self) -> "Perm":
        inv = [0] * self.n
        for i, j in enumerate(self.images, start=1):
            inv[j - 1] = i
        return Perm(inv)

    def conjugate(self, eta: "Perm") -> "Perm":
        """eta * self * eta^{-1}."""
        return eta * self * eta.inverse()

    def cycles(self) -> tuple[tuple[int, ...], ...]:
        """Disjoint cycles, each starting at its minimum, sorted by minimum."""
        out = []
        seen = [False] * self.n
        for start in range(1, self.n + 1):
            if seen[start - 1]:
                continue
            cyc = []
            i = start
            while not seen[i - 1]:
                seen[i - 1] = True
                cyc.append(i)
                i = self(i)
            out.append(tuple(cyc))
        return tuple(out)

    @property
    def num_cycles(self) -> int:
        seen = [False] * self.n
        count = 0
        for start in range(1, self.n + 1):
            if not seen[start - 1]:
                count += 1
                i = start
                while not seen[i - 1]:
                    seen[i - 1] = True
                    i = self(i)
        return count

    @property
    def length(self) -> int:
        """Minimal number of transpositions: |p| = n - #cycles."""
        return self.n - self.num_cycles

    def cycle_type(self) -> "IntegerPartition":
        return IntegerPartition(sorted((len(c) for c in self.cycles()), reverse=True))

    def is_identity(self) -> bool:
        return all(self.images[i] == i + 1 for i in range(self.n))

    # -- ordering / hashing / text -----------------------------------------

    def __eq__(self, other) -> bool:
        return isinstance(other, Perm) and self.images == other.images

    def __lt__(self, other: "Perm") -> bool:
        return self.images < other.images

    def __le__(self, other: "Perm") -> bool:
        return self.images <= other.images

    def __hash__(self) -> int:
        return hash(self.images)

    def one_line_str(self) -> str:
        return "[" + ",".join(map(str, self.images)) + "]"

    def __str__(self) -> str:
        if self.n == 0:
            return "()"
        return "".join("(" + " ".join(map(str, c)) + ")" for c in self.cycles())

    def __repr__(self) -> str:
        return f"Perm.from_text({str(self)!r}, n={self.n})"


class IntegerPartition:
    """A weakly decreasing sequence of positive parts summing to n."""

    __slots__ = ("parts",)

    def __init__(self, parts: Iterable[int]):
        parts = tuple(parts)
        if any(p <= 0 for p in parts) or any(
            parts[i] < parts[i + 1] for i in range(len(parts) - 1)
        ):
            raise ValueError(f"parts must be positive and weakly decreasing: {parts!r}")
        object.__setattr__(self, "parts", parts)

    def __setattr__(self, name, value):  # pragma: no cover - guard
        raise AttributeError("IntegerPartition is immutable")

    @property
    def n(self) -> int:
        return sum(self.parts)

    @property
    def num_parts(self) -> int:
        return len(self.parts)

    def multiplicity(self, i: int) -> int:
        """Number of parts equal to i."""
        return sum(1 for p in self.parts if p == i)

    def __eq__(self, other) -> bool:
        return isinstance(other, IntegerPartition) and self.parts == other.parts

    def __hash__(self) -> int:
        return hash(self.parts)

    def __iter__(self) -> Iterator[int]:
        return iter(self.parts)

    def __repr__(self) -> str:
        return f"IntegerPartition({list(self.parts)})"


# -- distances and the geodesic order --------------------------------------


def cayley_distance(p: Perm, q: Perm) -> int:
    """d(p, q) = |p q^{-1}| = n - #(p q^{-1})."""
    if p.n != q.n:
        raise ValueError(f"degree mismatch: {p.n} vs {q.n}")
    return (p * q.inverse()).length


def is_geodesic(tau: Perm, sigma: Perm) -> bool:
    """True iff tau lies on a geodesic from the identity to sigma,
    i.e. |tau| + |tau sigma^{-1}| = |sigma| (written tau <= sigma)."""
    return tau.length + cayley_distance(tau, sigma) == sigma.length


def _nc_position_partitions(k: int) -> Iterator[tuple[tuple[int, ...], ...]]:
    """Non-crossing partitions of positions 0..k-1 by recursive choice of the
    block containing the smallest element."""
    if k == 0:
        yield ()
        return
    for parts in _nc_parts(tuple(range(k))):
        yield parts


def _nc_parts(elems: tuple[int, ...]) -> Iterator[tuple[tuple[int, ...], ...]]:
    if not elems:
        yield ()
        return
    first, rest = elems[0], elems[1:]
    for m in range(len(rest) + 1):
        for chosen in itertools.combinations(range(len(rest)), m):
            block = (first,) + tuple(rest[i] for i in chosen)
            # the complement splits into independent gaps between chosen slots
            gaps = []
            prev = -1
            for idx in chosen:
                gaps.append(rest[prev + 1 : idx])
                prev = idx
            gaps.append(rest[prev + 1 :])
            for combo in itertools.product(*(_nc_parts(g) for g in gaps)):
                yield (block,) + tuple(itertools.chain.from_iterable(combo))


def noncrossing_on_cycle(cycle: Sequence[int], n: int) -> list[Perm]:
    """All permutations of {1..n} supported on `cycle` (given in traversal
    order) that are non-crossing on it; elements off the cycle are fixed."""
    out = []
    k = len(cycle)
    for parts in _nc_position_partitions(k):
        images = list(range(1, n + 1))
        for block in parts:
            for a, b in zip(block, block[1:] + (block[0],)):
                images[cycle[a] - 1] = cycle[b]
        out.append(Perm(images))
    return out


def enumerate_noncrossing(sigma: Perm) -> list[Perm]:
    """All tau with tau <= sigma (on a geodesic from id to sigma).

    Works cycle by cycle: the count for a single n-cycle is the Catalan
    number C_n, and for general sigma the set is the product of the
    per-cycle non-crossing sets.
    """
    n = sigma.n
    per_cycle = [noncrossing_on_cycle(c, n) for c in sigma.cycles()]
    out = []
    for combo in itertools.product(*per_cycle):
        images = list(range(1, n + 1))
        for part in combo:
            for i in range(1, n + 1):
                if part(i) != i:
                    images[i - 1] = part(i)
        out.append(Perm(images))
    return out


def catalan(n: int) -> int:
    """C_n = binom(2n, n) / (n + 1)."""
    if n < 0:
        raise ValueError("n must be >= 0")
    return math.comb(2 * n, n) // (n + 1)


def moebius_nc(nu: Perm | IntegerPartition) -> int:
    """Moebius function on the non-crossing lattice, evaluated on cycle type:
    the product over cycles of length p of (-1)^{p-1} C_{p-1}.

    The value only depends on the cycle type; the caller is responsible for
    nu being interpretable as a non-crossing element of its ambient geodesic.
    """
    parts = nu.cycle_type().parts if isinstance(nu, Perm) else nu.parts
    out = 1
    for p in parts:
        out *= (-1) ** (p - 1) * catalan(p - 1)
    return out


def moebius_nc_tuple(perms: Iterable[Perm]) -> int:
    """Product of moebius_nc over a tuple of permutations (one per color)."""
    out = 1
    for p in perms:
        out *= moebius_nc(p)
    return out


# -- genus ------------------------------------------------------------------


def _num_joined_components(sigma: Perm, tau: Perm) -> int:
    parent = list(range(sigma.n + 1))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for i in range(1, sigma.n + 1):
        for j in (sigma(i), tau(i)):
            ri, rj = find(i), find(j)
            if ri != rj:
                parent[rj] = ri
    return len({find(i) for i in range(1, sigma.n + 1)})


def genus(sigma: Perm, tau: Perm) -> int:
    """Genus of the bipartite map (sigma, tau):
    2K - 2g = #sigma + #tau + #(sigma tau^{-1}) - n."""
    if sigma.n != tau.n:
        raise ValueError(f"degree mismatch: {sigma.n} vs {tau.n}")
    n = sigma.n
    k = _num_joined_components(sigma, tau)
    twice_g = 2 * k - sigma.num_cycles - tau.num_cycles - (sigma * tau.inverse()).num_cycles + n
    assert twice_g >= 0 and twice_g % 2 == 0, "Euler relation violated"
    return twice_g // 2


@lru_cache(maxsize=None)
def all_perms(n: int) -> tuple[Perm, ...]:
    """All of S_n, in lexicographic one-line order."""
    return tuple(Perm(p) for p in itertools.permutations(range(1, n + 1)))


def fuss_catalan_probe(n: int, D: int) -> int:
    """Number of connected melonic classes at (n, D), by brute-force
    enumeration (no closed form is asserted here)."""
    from . import invariants, melonic

    count = 0
    for cls in invariants.enumerate_classes(n, D, "pure", connected_only=True):
        if melonic.is_melonic(cls.representative):
            count += 1
    return count
