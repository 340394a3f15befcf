"""Degree theory and melonic structure of trace-invariants.

The degree of a D-tuple is
    omega(s) = sum_{c1<c2} |s_c1 s_c2^{-1}| - (D-1)(n - K_p(s)),
a non-negative integer that vanishes exactly on melonic invariants when
D >= 4.  Melonicity itself is defined for every D by the recursive dipole
contraction, which also produces the canonical pairing of black and white
vertices.  The pairing-relative degree

    bar_omega(s; eta) = D K_p(s, eta) - (D-1) K_p(s) - n + d(s, eta)

controls how far a Wick pairing eta is from optimal.

Beyond exhaustive pairing scans no better procedure is known for the
minimum of bar_omega, and no additive bound machinery is built here: at
six colors there are connected invariants whose scaling is strictly below
every per-component additive estimate, so order_of_dominance always
measures, never infers.  Scans are capped at degree 7.
"""
from __future__ import annotations

import itertools
import random
from . import errors
from .errors import NotMelonicError
from .invariants import PermTuple
from .perms import Perm, all_perms, cayley_distance


def pair_distance_sum(s: PermTuple) -> int:
    """sum over color pairs c1 < c2 of |s_c1 s_c2^{-1}|."""
    total = 0
    for c1, c2 in itertools.combinations(range(s.D), 2):
        total += cayley_distance(s.perms[c1], s.perms[c2])
    return total


def distance_to_pairing(s: PermTuple, eta: Perm) -> int:
    """d(s, eta) = sum_c |s_c eta^{-1}|."""
    return sum(cayley_distance(p, eta) for p in s.perms)


def degree(s: PermTuple) -> int:
    """The non-negative degree omega(s)."""
    val = pair_distance_sum(s) - (s.D - 1) * (s.n - s.K_p)
    assert val >= 0, f"degree came out negative for {s!r}"
    return val


def degree_with_pairing(s: PermTuple, eta: Perm) -> int:
    """omega of the extended tuple (s_1..s_D, eta)."""
    return degree(s.extend(eta))


def bar_degree(s: PermTuple, eta: Perm) -> int:
    """bar_omega(s; eta) = D K_p(s,eta) - (D-1) K_p(s) - n + d(s, eta)."""
    if eta.n != s.n:
        raise ValueError("degree mismatch between tuple and pairing")
    k_ext = s.extend(eta).K_p
    return s.D * k_ext - (s.D - 1) * s.K_p - s.n + distance_to_pairing(s, eta)


# -- melonic recognition via dipole contraction ------------------------------


def _dipole_reduce(s: PermTuple, order: random.Random | None = None) -> dict[int, int] | None:
    """Contract (D-1)-dipoles until nothing is left; returns the recorded
    pairing {white -> black} or None if the reduction gets stuck.

    `order` randomizes the scan order, used to check order-independence.
    """
    D = s.D
    maps = [dict(enumerate(p.images, start=1)) for p in s.perms]
    alive = set(range(1, s.n + 1))
    pairing: dict[int, int] = {}
    while alive:
        candidates = []
        for w in alive:
            targets: dict[int, int] = {}
            for c in range(D):
                t = maps[c][w]
                targets[t] = targets.get(t, 0) + 1
            for t, hits in targets.items():
                if hits >= D - 1:
                    candidates.append((w, t, hits))
        if not candidates:
            return None
        if order is not None:
            order.shuffle(candidates)
        w, t, hits = candidates[0]
        if hits == D - 1 and D >= 2:
            # the one color not joining w to t gets rewired through the pair
            c0 = next(c for c in range(D) if maps[c][w] != t)
            target = maps[c0][w]
            source = next(u for u in alive if maps[c0][u] == t)
            maps[c0][source] = target
        else:
            # joined by all D colors: an isolated two-vertex component
            assert hits == D or D == 1
        pairing[w] = t
        alive.remove(w)
        for c in range(D):
            del maps[c][w]
    return pairing


def melonic_pairing(s: PermTuple, seed: int | None = None) -> Perm | None:
    """The canonical pairing (white -> black) if s is melonic, else None.

    The recorded pairing does not depend on the order in which dipoles are
    removed; pass a seed to randomize the scan for order-independence tests.
    """
    order = random.Random(seed) if seed is not None else None
    pairing = _dipole_reduce(s, order)
    if pairing is None:
        return None
    return Perm(pairing[w] for w in range(1, s.n + 1))


def is_melonic(s: PermTuple) -> bool:
    return melonic_pairing(s) is not None


def canonical_pairing(s: PermTuple) -> Perm:
    eta = melonic_pairing(s)
    if eta is None:
        raise NotMelonicError(f"invariant is not melonic: {s!r}")
    return eta


# -- compatibility ------------------------------------------------------------


def nabla(s: PermTuple, eta: Perm) -> int:
    """sum_{c1<c2} (|s_c1 eta^{-1}| + |s_c2 eta^{-1}| - |s_c1 s_c2^{-1}|) >= 0."""
    return (s.D - 1) * distance_to_pairing(s, eta) - pair_distance_sum(s)


def nabla2(s: PermTuple, t: PermTuple) -> int:
    """Two-tuple version:
    sum_{c1<c2} (|s_c1 t_c1^{-1}| + |t_c1 t_c2^{-1}| + |t_c2 s_c2^{-1}| - |s_c1 s_c2^{-1}|)."""
    if s.n != t.n or s.D != t.D:
        raise ValueError("shape mismatch")
    total = 0
    for c1, c2 in itertools.combinations(range(s.D), 2):
        total += (
            cayley_distance(s.perms[c1], t.perms[c1])
            + cayley_distance(t.perms[c1], t.perms[c2])
            + cayley_distance(t.perms[c2], s.perms[c2])
            - cayley_distance(s.perms[c1], s.perms[c2])
        )
    assert total >= 0
    return total


def is_compatible(s: PermTuple) -> tuple[bool, list[Perm]]:
    """True iff some eta lies on a geodesic between every pair of colors;
    returns the full set of minimizers of nabla."""
    errors.check("eta scan degree", s.n, 7)
    best, argmins = None, []
    for eta in all_perms(s.n):
        v = nabla(s, eta)
        if best is None or v < best:
            best, argmins = v, [eta]
        elif v == best:
            argmins.append(eta)
    return best == 0, argmins


def min_bar_degree(s: PermTuple, connected: bool = True) -> tuple[int, list[Perm]]:
    """min over eta of bar_omega(s; eta), by exhaustive scan with a running
    minimum; `connected` restricts to K_p(s, eta) = 1 (the Wick pairings
    that connect everything)."""
    errors.check("eta scan degree", s.n, 7)
    best, argmins = None, []
    for eta in all_perms(s.n):
        if connected and s.extend(eta).K_p != 1:
            continue
        v = bar_degree(s, eta)
        if best is None or v < best:
            best, argmins = v, [eta]
        elif v == best:
            argmins.append(eta)
    if best is None:
        raise ValueError("no pairing satisfies the connectivity constraint")
    return best, argmins


def order_of_dominance(s: PermTuple, scaling: str) -> int:
    """How suppressed an invariant is relative to first order.

    pure-gaussian:  1 + (D-1)(K_p - 1) + min{bar_omega(s; eta) : K_p(s,eta)=1}
    wishart-mixed:  the same with (s, id) appended and mixed connectivity.
    """
    if scaling == "pure-gaussian":
        base, k = s, s.K_p
        dm1 = s.D - 1
    elif scaling == "wishart-mixed":
        base, k = s.extend(Perm.identity(s.n)), s.K_m
        dm1 = s.D
    else:
        raise ValueError(f"unknown scaling {scaling!r}")
    minimum, _ = min_bar_degree(base)
    return 1 + dm1 * (k - 1) + minimum


def first_order_classes(n: int, D: int, flavor: str) -> list:
    """First-order (dominant) classes: purely connected melonic for the pure
    Gaussian scaling; connected with (s, id) melonic for the Wishart-scaled
    mixed one."""
    from .invariants import enumerate_classes

    out = []
    for cls in enumerate_classes(n, D, flavor, connected_only=True):
        s = cls.representative
        if flavor == "pure":
            if is_melonic(s):
                out.append(cls)
        else:
            if is_melonic(s.extend(Perm.identity(n))):
                out.append(cls)
    return out
