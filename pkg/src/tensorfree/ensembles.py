"""Exact finite-N Gaussian and Wishart moment/cumulant polynomials, scaling
reports, asymptotic moment tables, the melonic covariance fixed point, and
the subadditivity probe.

Conventions: the pure Gaussian covariance is E[T Tbar] = C N^{1-D} per
matched index (C = 1 unless requested), so every Wick pairing eta of the n
tensor pairs contributes C^n N^{n - d(s, eta)} to E[Tr_s].
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from . import errors, melonic
from .invariants import InvariantClass, PermTuple, canonicalize
from .melonic import distance_to_pairing
from .perms import Perm, all_perms, enumerate_noncrossing
from .weingarten import LaurentPoly

GAUSSIAN_CAP_N = 8


@dataclass(frozen=True)
class ScalingReport:
    """Leading-order data of one invariant: the scaling exponent r, the
    asymptotic moment phi (number of minimizing Wick pairings), and the
    minimizers themselves."""

    invariant: InvariantClass
    kind: str  # "pure-gaussian" | "wishart-mixed"
    exponent: int
    phi: int
    minimizer_pairings: tuple[Perm, ...]

    def __post_init__(self):
        assert self.phi == len(self.minimizer_pairings) >= 1


def gaussian_moment_exact(s: PermTuple, covariance: Fraction | int = 1) -> LaurentPoly:
    """E[Tr_s(T, Tbar)] = sum over Wick pairings eta of C^n N^{n - d(s, eta)}."""
    errors.check("Wick sum degree", s.n, GAUSSIAN_CAP_N)
    weight = Fraction(covariance) ** s.n
    out: dict[int, Fraction] = {}
    for eta in all_perms(s.n):
        e = s.n - distance_to_pairing(s, eta)
        out[e] = out.get(e, Fraction(0)) + weight
    return LaurentPoly(out)


def gaussian_moment_exact_multilabel(
    s: PermTuple,
    word: tuple[tuple, tuple],
    covariances: Mapping | None = None,
) -> LaurentPoly:
    """Multilabel Wick sum: only pairings matching each white label's tensor
    with its own conjugate contribute.  `word` is (white labels, black
    labels); `covariances` maps a label to its C (default 1)."""
    whites, blacks = word
    if len(whites) != s.n or len(blacks) != s.n:
        raise ValueError("word must label all whites and blacks")
    out: dict[int, Fraction] = {}
    for eta in all_perms(s.n):
        if any(blacks[eta(i) - 1] != whites[i - 1] for i in range(1, s.n + 1)):
            continue
        weight = Fraction(1)
        if covariances:
            for w in whites:
                weight *= Fraction(covariances.get(w, 1))
        e = s.n - distance_to_pairing(s, eta)
        out[e] = out.get(e, Fraction(0)) + weight
    return LaurentPoly(out)


def gaussian_cumulant_exact(
    components: Sequence[PermTuple], covariance: Fraction | int = 1
) -> LaurentPoly:
    """Classical cumulant of the trace-invariants of purely connected pieces:
    the Wick sum restricted to pairings that connect everything."""
    for piece in components:
        if piece.K_p != 1:
            raise ValueError("every component must be purely connected")
    s = PermTuple.disjoint_union(list(components))
    errors.check("Wick sum degree", s.n, GAUSSIAN_CAP_N)
    weight = Fraction(covariance) ** s.n
    out: dict[int, Fraction] = {}
    for eta in all_perms(s.n):
        if s.extend(eta).K_p != 1:
            continue
        e = s.n - distance_to_pairing(s, eta)
        out[e] = out.get(e, Fraction(0)) + weight
    return LaurentPoly(out)


def gaussian_scaling(s: PermTuple) -> ScalingReport:
    """r(s) = n - min{d(s, eta) : K_p(s, eta) = 1}, with all minimizers."""
    errors.check("eta scan degree", s.n, GAUSSIAN_CAP_N)
    best, mins = None, []
    for eta in all_perms(s.n):
        if s.extend(eta).K_p != 1:
            continue
        d = distance_to_pairing(s, eta)
        if best is None or d < best:
            best, mins = d, [eta]
        elif d == best:
            mins.append(eta)
    cls = canonicalize(s, "pure")
    return ScalingReport(cls, "pure-gaussian", s.n - best, len(mins), tuple(mins))


def wishart_scaling(s: PermTuple) -> ScalingReport:
    """r_W(s) = r(s, id) with mixed connectivity: the minimum of
    d(s, eta) + |eta| over eta with K_m(s, eta) = 1."""
    errors.check("eta scan degree", s.n, GAUSSIAN_CAP_N)
    ext = s.extend(Perm.identity(s.n))
    best, mins = None, []
    for eta in all_perms(s.n):
        if ext.extend(eta).K_p != 1:
            continue
        d = distance_to_pairing(ext, eta)
        if best is None or d < best:
            best, mins = d, [eta]
        elif d == best:
            mins.append(eta)
    cls = canonicalize(s, "mixed")
    return ScalingReport(cls, "wishart-mixed", s.n - best, len(mins), tuple(mins))


# -- Wishart matrix (D = 1) ----------------------------------------------------


def wishart_matrix_moment(n: int, t: Fraction | int = 1) -> LaurentPoly:
    """E[Tr W^n] = sum over tau in S_n of N^{#(gamma tau^{-1}) + #tau - n} t^{#tau}
    for the rectangular Wishart of ratio t."""
    errors.check("Wishart sum degree", n, 9)
    t = Fraction(t)
    gamma = Perm.full_cycle(n)
    out: dict[int, Fraction] = {}
    for tau in all_perms(n):
        e = (gamma * tau.inverse()).num_cycles + tau.num_cycles - n
        out[e] = out.get(e, Fraction(0)) + t**tau.num_cycles
    return LaurentPoly(out)


def wishart_matrix_moment_asymptotic(n: int, t: Fraction | int = 1) -> Fraction:
    """The n-th moment of the Marchenko-Pastur law of parameter t:
    sum over non-crossing tau of t^{#tau}; t = 1 gives the Catalan number."""
    t = Fraction(t)
    gamma = Perm.full_cycle(n)
    return sum((t**tau.num_cycles for tau in enumerate_noncrossing(gamma)), Fraction(0))


# -- asymptotic moment tables ----------------------------------------------------


def gaussian_phi_table(n_max: int, D: int, covariance: Fraction | int = 1):
    """Asymptotic moments of the pure Gaussian on all purely connected
    melonic classes up to n_max: phi = C^n (the unique minimal pairing)."""
    from .transforms import MomentTable

    table = MomentTable(flavor="pure", regime="asymptotic")
    C = Fraction(covariance)
    for n in range(1, n_max + 1):
        for cls in melonic.first_order_classes(n, D, "pure"):
            table.set(cls.representative, C**n)
    return table


def gaussian_multilabel_phi_table(n_max: int, D: int, labels: Sequence[str] = ("a", "b"),
                                  covariances: Mapping | None = None):
    """Joint asymptotic moments of independent pure Gaussian ensembles: on a
    first-order class the moment is prod_i C_{x_i} when every black label is
    the conjugate of its canonically paired white label, else 0."""
    from .transforms import MomentTable

    table = MomentTable(flavor="pure", regime="asymptotic", multilabel=True)
    for n in range(1, n_max + 1):
        for cls in melonic.first_order_classes(n, D, "pure"):
            s = cls.representative
            eta = melonic.canonical_pairing(s)
            for whites in itertools.product(labels, repeat=n):
                for blacks in itertools.product(labels, repeat=n):
                    matched = all(
                        blacks[eta(i) - 1] == whites[i - 1] for i in range(1, n + 1)
                    )
                    if matched:
                        val = Fraction(1)
                        if covariances:
                            for w in whites:
                                val *= Fraction(covariances.get(w, 1))
                    else:
                        val = Fraction(0)
                    table.set(s, val, word=(whites, blacks))
    return table


def wishart_mixed_phi_table(n_max: int, D: int):
    """phi^m = 1 on every first-order mixed class (connected, (s, id)
    melonic), the Wishart-tensor values."""
    from .transforms import MomentTable

    table = MomentTable(flavor="mixed", regime="asymptotic")
    for n in range(1, n_max + 1):
        for cls in melonic.first_order_classes(n, D, "mixed"):
            table.set(cls.representative, Fraction(1))
    return table


def wishart_multilabel_phi_table(n_max: int, D: int, labels: Sequence[str] = ("a", "b")):
    """Joint Wishart-type mixed moments of independent ensembles: 1 when the
    word is constant along the canonical pairing of (s, id), else 0."""
    from .transforms import MomentTable

    table = MomentTable(flavor="mixed", regime="asymptotic", multilabel=True)
    for n in range(1, n_max + 1):
        for cls in melonic.first_order_classes(n, D, "mixed"):
            s = cls.representative
            eta = melonic.canonical_pairing(s.extend(Perm.identity(n)))
            for word in itertools.product(labels, repeat=n):
                matched = all(word[eta(i) - 1] == word[i - 1] for i in range(1, n + 1))
                table.set(s, Fraction(1 if matched else 0), word=word)
    return table


# -- the melonic covariance fixed point ------------------------------------------


class PowerSeries:
    """Truncated multivariate power series with rational coefficients,
    graded by total degree in the coupling markers."""

    __slots__ = ("order", "names", "terms")

    def __init__(self, names: Sequence[str], order: int,
                 terms: Mapping[tuple[int, ...], Fraction] | None = None):
        object.__setattr__(self, "names", tuple(names))
        object.__setattr__(self, "order", order)
        clean = {}
        for expo, c in (terms or {}).items():
            c = Fraction(c)
            if c and sum(expo) <= order:
                clean[tuple(expo)] = c
        object.__setattr__(self, "terms", clean)

    def __setattr__(self, name, value):  # pragma: no cover - guard
        raise AttributeError("PowerSeries is immutable")

    @classmethod
    def constant(cls, names, order, value):
        return cls(names, order, {(0,) * len(names): Fraction(value)})

    def variable(self, name: str) -> "PowerSeries":
        expo = [0] * len(self.names)
        expo[self.names.index(name)] = 1
        return PowerSeries(self.names, self.order, {tuple(expo): Fraction(1)})

    def __add__(self, other):
        if isinstance(other, (int, Fraction)):
            other = PowerSeries.constant(self.names, self.order, other)
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = out.get(e, Fraction(0)) + c
        return PowerSeries(self.names, self.order, out)

    def __neg__(self):
        return PowerSeries(self.names, self.order, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        if isinstance(other, (int, Fraction)):
            other = PowerSeries.constant(self.names, self.order, other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return PowerSeries(
                self.names, self.order, {e: c * other for e, c in self.terms.items()}
            )
        out: dict[tuple[int, ...], Fraction] = {}
        for e1, c1 in self.terms.items():
            d1 = sum(e1)
            for e2, c2 in other.terms.items():
                if d1 + sum(e2) > self.order:
                    continue
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, Fraction(0)) + c1 * c2
        return PowerSeries(self.names, self.order, out)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        out = PowerSeries.constant(self.names, self.order, 1)
        for _ in range(k):
            out = out * self
        return out

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, PowerSeries)
            and self.names == other.names
            and self.terms == other.terms
        )

    def coefficient(self, expo: tuple[int, ...]) -> Fraction:
        return self.terms.get(tuple(expo), Fraction(0))

    def by_total_degree(self) -> dict[int, Fraction]:
        out: dict[int, Fraction] = {}
        for e, c in self.terms.items():
            d = sum(e)
            out[d] = out.get(d, Fraction(0)) + c
        return out

    def evaluate(self, values: Mapping[str, Fraction]) -> Fraction:
        total = Fraction(0)
        for e, c in self.terms.items():
            term = c
            for name, k in zip(self.names, e):
                term *= Fraction(values[name]) ** k
            total += term
        return total

    def __repr__(self) -> str:
        return f"PowerSeries(names={self.names}, order={self.order}, terms={self.terms})"


def melonic_fixed_point(
    couplings: Mapping[str, tuple[Fraction | int, int]], truncation_order: int
) -> PowerSeries:
    """The unique formal power series G solving G = 1 - sum n_tau z_tau G^{n_tau},
    one marker variable per coupling; the rational prefactor z scales each
    insertion.  With no couplings G = 1.  The rescaled asymptotic moments of
    the perturbed ensemble follow by multiplying the Gaussian ones by G^n.

    Every coupling is taken at the melonic scaling (the universality branch
    where the covariance is merely dressed); enhanced scalings that leave
    the Gaussian class are out of scope.
    """
    names = tuple(couplings)
    G = PowerSeries.constant(names, truncation_order, 1)
    for _ in range(truncation_order + 1):
        acc = PowerSeries.constant(names, truncation_order, 1)
        for name, (z, n_tau) in couplings.items():
            term = G.variable(name) * Fraction(z) * n_tau * G**n_tau
            acc = acc - term
        G = acc
    return G


# -- subadditivity probe -----------------------------------------------------------


@dataclass(frozen=True)
class SubadditivityReport:
    components: tuple[InvariantClass, ...]
    union_exponent: int
    sum_of_exponents: int
    verdict: str  # "strict" | "non-strict" | "violation" | "degenerate"


def subadditivity_probe(components: Sequence[PermTuple]) -> SubadditivityReport:
    """Compare r(union) against the sum of per-component r's."""
    reports = [gaussian_scaling(c) for c in components]
    union = PermTuple.disjoint_union(list(components))
    r_union = gaussian_scaling(union).exponent
    r_sum = sum(rep.exponent for rep in reports)
    if len(components) == 1:
        verdict = "degenerate"
    elif r_union < r_sum:
        verdict = "strict"
    elif r_union == r_sum:
        verdict = "non-strict"
    else:
        verdict = "violation"
    return SubadditivityReport(
        tuple(rep.invariant for rep in reports), r_union, r_sum, verdict
    )
