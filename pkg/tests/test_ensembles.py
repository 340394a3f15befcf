import itertools
import random
from fractions import Fraction

import pytest

from tensorfree.ensembles import (
    PowerSeries,
    gaussian_cumulant_exact,
    gaussian_moment_exact,
    gaussian_moment_exact_multilabel,
    gaussian_multilabel_phi_table,
    gaussian_phi_table,
    gaussian_scaling,
    melonic_fixed_point,
    subadditivity_probe,
    wishart_matrix_moment,
    wishart_matrix_moment_asymptotic,
    wishart_mixed_phi_table,
    wishart_scaling,
)
from tensorfree.invariants import PermTuple
from tensorfree.melonic import canonical_pairing, first_order_classes, min_bar_degree
from tensorfree.perms import Perm, catalan
from tensorfree.weingarten import LaurentPoly

T12 = Perm.from_text("(1 2)", n=2)
MELON2 = PermTuple([T12, Perm.identity(2), Perm.identity(2)])


def test_gaussian_moment_basics():
    assert gaussian_moment_exact(PermTuple.identity(1, 3)) == LaurentPoly.monomial(1)
    assert gaussian_moment_exact(PermTuple.identity(1, 3), covariance=Fraction(3, 2)) == \
        LaurentPoly.monomial(1, Fraction(3, 2))


def test_gaussian_moment_melonic_structure():
    # purely connected melonic at D=3: N plus terms of exponent <= 0
    poly = gaussian_moment_exact(MELON2)
    exp, coeff = poly.leading()
    assert (exp, coeff) == (1, 1)
    rest = poly - LaurentPoly.monomial(1)
    assert all(e <= 3 - MELON2.D for e in rest.coeffs)


def test_gaussian_moment_matrix_case_catalan_leading():
    # D=2, purely connected: leading coefficient is the Catalan number
    for n in (2, 3, 4):
        s = PermTuple([Perm.full_cycle(n), Perm.identity(n)])
        assert s.K_p == 1
        exp, coeff = gaussian_moment_exact(s).leading()
        assert exp == 1 and coeff == catalan(n)


def test_gaussian_cumulant_exact():
    # a single purely connected component: the cumulant is the moment
    assert gaussian_cumulant_exact([MELON2]) == gaussian_moment_exact(MELON2)
    # two order-1 invariants at D=3: only eta=(12) connects them
    one = PermTuple.identity(1, 3)
    cum = gaussian_cumulant_exact([one, one])
    assert cum == LaurentPoly.monomial(-1)
    with pytest.raises(ValueError):
        gaussian_cumulant_exact([PermTuple.identity(2, 3)])


def test_gaussian_cumulant_leading_matches_degree_formula():
    # leading exponent 1 - (D-1)(K_p-1) - min bar_omega, coefficient the count
    samples = [
        [MELON2],
        [MELON2, MELON2],
        [PermTuple.identity(1, 3), MELON2],
        [PermTuple([Perm.full_cycle(3), Perm.identity(3), Perm.identity(3)])],
    ]
    for comps in samples:
        s = PermTuple.disjoint_union(list(comps))
        mn, mins = min_bar_degree(s, connected=True)
        exp, coeff = gaussian_cumulant_exact(comps).leading()
        assert exp == 1 - (s.D - 1) * (s.K_p - 1) - mn
        assert coeff == len(mins)


def test_gaussian_scaling_reports():
    rep = gaussian_scaling(MELON2)
    assert rep.exponent == 1 and rep.phi == 1
    assert rep.minimizer_pairings == (canonical_pairing(MELON2),)
    assert gaussian_scaling(PermTuple.identity(1, 3)).exponent == 1


def test_wishart_scaling():
    # connected but not purely connected, (s, id) melonic: still first order
    rigid = PermTuple.constant(T12, 3)
    rep = wishart_scaling(rigid)
    assert rep.exponent == 1
    assert rep.kind == "wishart-mixed"


def test_wishart_matrix_moment_small():
    assert wishart_matrix_moment(1, Fraction(1, 2)) == LaurentPoly.monomial(1, Fraction(1, 2))
    assert wishart_matrix_moment_asymptotic(1, 3) == 3
    # MP moments at t: n=2 gives t + t^2
    t = Fraction(2, 3)
    assert wishart_matrix_moment_asymptotic(2, t) == t + t**2


@pytest.mark.parametrize("n", range(1, 8))
def test_wishart_square_asymptotic_is_catalan(n):
    assert wishart_matrix_moment_asymptotic(n, 1) == catalan(n)


@pytest.mark.parametrize("n", range(1, 6))
def test_wishart_matrix_moment_cross_checks(n):
    poly = wishart_matrix_moment(n, 1)
    # independent oracle 1: at N=1 the trace moment is E|x|^{2n} = n!
    import math

    assert poly(1) == math.factorial(n)
    # independent oracle 2: the D=2 pure Gaussian Wick sum computes the same
    wick = gaussian_moment_exact(
        PermTuple([Perm.full_cycle(n).inverse(), Perm.identity(n)])
    )
    assert poly == wick
    # asymptotic = coefficient of N after dividing by N ... i.e. leading term
    exp, coeff = poly.leading()
    assert exp == 1 and coeff == wishart_matrix_moment_asymptotic(n, 1)


def test_gaussian_multilabel_moment():
    # mismatched labels kill the covariance: for id_1 with (a; b) nothing pairs
    one = PermTuple.identity(1, 3)
    assert gaussian_moment_exact_multilabel(one, (("a",), ("b",))).is_zero()
    assert gaussian_moment_exact_multilabel(one, (("a",), ("a",))) == LaurentPoly.monomial(1)
    # the mismatched-word sum vanishes at first order (here exactly)
    s = MELON2
    total = LaurentPoly.zero()
    for whites in itertools.product("ab", repeat=2):
        for blacks in itertools.product("ab", repeat=2):
            if whites == blacks:
                continue  # canonical pairing of MELON2 is the identity
            total = total + gaussian_moment_exact_multilabel(s, (whites, blacks))
    assert total.coefficient(1) == 0


def test_phi_tables():
    phi = gaussian_phi_table(2, 3)
    assert phi.value(PermTuple.identity(1, 3)) == 1
    assert phi.value(MELON2) == 1
    phi_c = gaussian_phi_table(2, 3, covariance=Fraction(5))
    assert phi_c.value(MELON2) == 25
    ml = gaussian_multilabel_phi_table(2, 3, labels=("a", "b"))
    assert ml.value(MELON2, word=(("a", "a"), ("a", "a"))) == 1
    assert ml.value(MELON2, word=(("a", "b"), ("a", "b"))) == 1
    assert ml.value(MELON2, word=(("a", "a"), ("a", "b"))) == 0
    wm = wishart_mixed_phi_table(2, 3)
    assert wm.value(PermTuple.constant(T12, 3)) == 1


def test_melonic_fixed_point():
    # no couplings
    g = melonic_fixed_point({}, 4)
    assert g == PowerSeries.constant((), 4, 1)
    # single quartic-type coupling: coefficients are (-2)^k C_k
    g = melonic_fixed_point({"z": (1, 2)}, 6)
    for k in range(7):
        assert g.coefficient((k,)) == Fraction((-2) ** k * catalan(k))
    # rational prefactor scales insertion-wise
    g3 = melonic_fixed_point({"z": (Fraction(1, 3), 2)}, 4)
    for k in range(5):
        assert g3.coefficient((k,)) == Fraction((-2) ** k * catalan(k), 3**k)


def test_melonic_fixed_point_residual_two_couplings():
    # independent check: the computed G satisfies its own equation to order
    order = 5
    couplings = {"u": (1, 2), "v": (Fraction(1, 2), 3)}
    g = melonic_fixed_point(couplings, order)
    rhs = PowerSeries.constant(g.names, order, 1)
    for name, (z, ntau) in couplings.items():
        rhs = rhs - g.variable(name) * Fraction(z) * ntau * g**ntau
    assert g == rhs
    # evaluation folds the series to a number
    val = g.evaluate({"u": Fraction(1, 10), "v": Fraction(0)})
    assert val == sum(
        Fraction((-2) ** k * catalan(k), 10**k) for k in range(order + 1)
    )


def test_subadditivity_probe():
    rep = subadditivity_probe([MELON2, MELON2])
    assert rep.verdict == "strict"
    assert rep.union_exponent == 2 - MELON2.D  # naive additive bound, saturated
    assert rep.sum_of_exponents == 2
    single = subadditivity_probe([MELON2])
    assert single.verdict == "degenerate"


def test_moment_is_bipartite_cumulant_sum():
    # classical moment-cumulant over pure components, exact in LaurentPoly:
    # E[Tr_s] = sum over bipartite partitions >= Pi_p(s) of products of
    # connected Wick sums
    from tensorfree.invariants import enumerate_classes
    from tensorfree.partitions import bipartite_coarsenings

    for n in (1, 2, 3, 4):
        for cls in enumerate_classes(n, 3, "pure"):
            s = cls.representative
            comp = s.components_pure()
            total = LaurentPoly.zero()
            for pi in bipartite_coarsenings(comp):
                term = LaurentPoly.constant(1)
                for whites, blacks in pi.blocks:
                    sub = s.restrict_pure(whites, blacks)
                    pieces = [
                        sub.restrict_pure(w2, b2)
                        for w2, b2 in sub.components_pure().blocks
                    ]
                    term = term * gaussian_cumulant_exact(pieces)
                total = total + term
            assert total == gaussian_moment_exact(s), cls.text()
