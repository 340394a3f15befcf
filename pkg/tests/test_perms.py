import itertools
import random

import pytest

from tensorfree.perms import (
    IntegerPartition,
    Perm,
    all_perms,
    catalan,
    cayley_distance,
    enumerate_noncrossing,
    genus,
    is_geodesic,
    moebius_nc,
)


def test_compose_identity_and_involution():
    id3 = Perm.identity(3)
    c3 = Perm.from_text("(1 2 3)")
    assert id3 * c3 == c3 and c3 * id3 == c3
    t = Perm.from_text("(1 2)", n=2)
    assert t * t == Perm.identity(2)


def test_compose_hand_evaluation():
    # (123)(12): apply (12) first, then (123): 1->2->3, 2->1->2, 3->3->1
    c = Perm.from_text("(1 2 3)") * Perm.from_text("(1 2)", n=3)
    assert c == Perm.from_text("(1 3)", n=3)


def test_cycle_count_plus_length():
    rng = random.Random(0)
    for _ in range(50):
        n = rng.randint(1, 7)
        p = rng.choice(all_perms(n))
        assert p.num_cycles + p.length == n


def test_cayley_distance_examples():
    id3 = Perm.identity(3)
    c3 = Perm.from_text("(1 2 3)")
    assert cayley_distance(c3, c3) == 0
    assert cayley_distance(id3, c3) == 2
    assert cayley_distance(Perm.from_text("(1 2)", n=3), c3) == 1


def test_cayley_distance_axioms():
    rng = random.Random(1)
    perms = all_perms(4)
    for _ in range(100):
        p, q, r = (rng.choice(perms) for _ in range(3))
        assert cayley_distance(p, p) == 0
        assert cayley_distance(p, q) == cayley_distance(q, p)
        assert cayley_distance(p, r) <= cayley_distance(p, q) + cayley_distance(q, r)


def test_is_geodesic_trivial_and_s3_exhaustive():
    c3 = Perm.from_text("(1 2 3)")
    assert is_geodesic(Perm.identity(3), c3)
    assert is_geodesic(c3, c3)
    assert is_geodesic(Perm.from_text("(1 3)", n=3), c3)
    assert not is_geodesic(Perm.from_text("(1 3 2)"), c3)
    # cross-check against the length identity on all of S_3 x S_3
    for tau, sigma in itertools.product(all_perms(3), repeat=2):
        expected = tau.length + cayley_distance(tau, sigma) == sigma.length
        assert is_geodesic(tau, sigma) == expected


def test_enumerate_noncrossing_counts():
    assert len(enumerate_noncrossing(Perm.full_cycle(1))) == 1
    assert len(enumerate_noncrossing(Perm.full_cycle(3))) == 5
    # product over cycles: (12)(34) gives C_2 * C_2 = 4
    s = Perm.from_cycles(4, [(1, 2), (3, 4)])
    assert len(enumerate_noncrossing(s)) == 4


@pytest.mark.parametrize("n", range(1, 9))
def test_noncrossing_full_cycle_is_catalan(n):
    assert len(enumerate_noncrossing(Perm.full_cycle(n))) == catalan(n)


def test_noncrossing_matches_geodesic_filter():
    # independent oracle: filter all of S_n by the length identity
    for sigma in [Perm.full_cycle(4), Perm.from_cycles(5, [(1, 3, 5), (2, 4)])]:
        brute = {t for t in all_perms(sigma.n) if is_geodesic(t, sigma)}
        assert set(enumerate_noncrossing(sigma)) == brute


def _blocks_noncrossing(blocks, order):
    pos = {x: i for i, x in enumerate(order)}
    for b1, b2 in itertools.combinations(blocks, 2):
        for p1, p2 in itertools.combinations(sorted(pos[x] for x in b1), 2):
            for q1, q2 in itertools.combinations(sorted(pos[x] for x in b2), 2):
                if p1 < q1 < p2 < q2 or q1 < p1 < q2 < p2:
                    return False
    return True


def test_noncrossing_cycles_are_noncrossing_partitions():
    # direct crossing-pattern check on 1 < ... < n, plus cyclic increase
    n = 5
    gamma = Perm.full_cycle(n)
    for tau in enumerate_noncrossing(gamma):
        assert _blocks_noncrossing(tau.cycles(), list(range(1, n + 1)))
        for cyc in tau.cycles():
            # starting at the minimum, the traversal must be increasing
            assert list(cyc) == sorted(cyc)


def test_moebius_nc_values():
    assert moebius_nc(Perm.identity(4)) == 1
    assert moebius_nc(Perm.from_text("(1 2)", n=2)) == -1
    assert moebius_nc(Perm.from_text("(1 2 3)")) == 2
    assert moebius_nc(IntegerPartition([3, 2, 1])) == 2 * (-1) * 1


@pytest.mark.parametrize("n", range(2, 7))
def test_moebius_column_sum_vanishes(n):
    gamma = Perm.full_cycle(n)
    total = sum(moebius_nc(gamma * tau.inverse()) for tau in enumerate_noncrossing(gamma))
    assert total == 0


def test_genus_examples():
    for n in range(1, 6):
        assert genus(Perm.full_cycle(n), Perm.identity(n)) == 0
    assert genus(Perm.full_cycle(3), Perm.from_text("(1 3)", n=3)) == 0
    assert genus(Perm.full_cycle(3), Perm.from_text("(1 3 2)")) == 1


def test_genus_nonnegative_and_planar_iff_geodesic_single_cycle():
    for sigma in [Perm.full_cycle(4), Perm.full_cycle(5)]:
        for tau in all_perms(sigma.n):
            g = genus(sigma, tau)
            assert g >= 0
            # for a single cycle, genus 0 with one component <=> tau <= sigma
            assert (g == 0) == is_geodesic(tau, sigma)


def test_catalan_values():
    assert catalan(0) == 1
    assert catalan(7) == 429
    assert [catalan(k) for k in range(6)] == [1, 1, 2, 5, 14, 42]


def test_text_roundtrip():
    p = Perm.from_text("[3,1,2,4]")
    assert str(p) == "(1 3 2)(4)"
    assert Perm.from_text(str(p)) == p
    assert Perm.from_text(p.one_line_str()) == p


def test_from_cycles_and_errors():
    with pytest.raises(ValueError):
        Perm((1, 1, 2))
    with pytest.raises(ValueError):
        Perm.identity(2) * Perm.identity(3)
    with pytest.raises(ValueError):
        Perm.from_cycles(3, [(1, 2), (2, 3)])


def test_fuss_catalan_probe():
    from tensorfree.perms import fuss_catalan_probe

    assert fuss_catalan_probe(1, 3) == 1
    assert fuss_catalan_probe(2, 3) == 3
    assert fuss_catalan_probe(3, 3) == 6
    assert fuss_catalan_probe(2, 4) == 4
