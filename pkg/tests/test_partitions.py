import random
from fractions import Fraction

import pytest

from tensorfree.partitions import (
    BipartitePartition,
    SetPartition,
    bipartite_coarsenings,
    bipartite_count,
    bipartite_cumulant_from_moments,
    bipartite_moment_from_cumulants,
    classical_cumulant_from_moments,
    coarsenings,
    enumerate_bipartite,
    enumerate_partitions,
    moebius_partition,
    moebius_partition_rel,
    moment_from_classical_cumulants,
)
from tensorfree.perms import Perm


def test_join_examples():
    p = SetPartition.from_text("{1,2|3}")
    assert SetPartition.singletons(3).join(p) == p
    q = SetPartition.from_text("{1|2,3}")
    assert p.join(q) == SetPartition.full(3)
    a = SetPartition.from_permutation(Perm.from_text("(1 2)", n=3))
    b = SetPartition.from_permutation(Perm.from_text("(1 3)", n=3))
    assert a.join(b) == SetPartition.full(3)


def test_join_algebra():
    rng = random.Random(2)
    parts = enumerate_partitions(5)
    for _ in range(60):
        a, b, c = (rng.choice(parts) for _ in range(3))
        assert a.join(b) == b.join(a)
        assert a.join(a) == a
        assert a.join(b.join(c)) == a.join(b).join(c)
        assert SetPartition.singletons(5).join(a) == a
        assert SetPartition.full(5).join(a) == SetPartition.full(5)


def test_leq():
    p = SetPartition.from_text("{1,2|3}")
    assert SetPartition.singletons(3).leq(p)
    assert p.leq(p)
    assert not p.leq(SetPartition.from_text("{1,3|2}"))


def test_moebius_partition():
    assert moebius_partition(SetPartition.full(4)) == 1
    three = SetPartition.from_text("{1|2|3}")
    assert moebius_partition(three) == 2
    finer = SetPartition.from_text("{1|2|3|4}")
    coarser = SetPartition.from_text("{1,2|3,4}")
    assert moebius_partition_rel(finer, coarser) == 1
    assert moebius_partition_rel(coarser, coarser) == 1
    with pytest.raises(ValueError):
        moebius_partition_rel(coarser, finer)


def test_enumerate_partitions_bell():
    assert [len(enumerate_partitions(n)) for n in range(6)] == [1, 1, 2, 5, 15, 52]
    assert len({p for p in enumerate_partitions(4)}) == 15
    with pytest.raises(ValueError):
        enumerate_partitions(9)


def test_coarsenings():
    pi = SetPartition.from_text("{1,2|3|4}")
    cs = coarsenings(pi)
    assert len(cs) == 5  # Bell(3)
    assert all(pi.leq(c) for c in cs)


def test_bipartite_invariants_and_counts():
    for n in range(5):
        allb = enumerate_bipartite(n)
        assert len(allb) == len(set(allb))
        for pi in allb:
            assert all(len(w) == len(b) for w, b in pi.blocks)
        # cross-check the closed-form profile count
        from collections import Counter

        by_profile = Counter()
        for pi in allb:
            prof = Counter(len(w) for w, _ in pi.blocks)
            by_profile[tuple(sorted(prof.items()))] += 1
        for prof, count in by_profile.items():
            assert count == bipartite_count(n, dict(prof))


def test_bipartite_profile_examples():
    allb = enumerate_bipartite(2)
    pairs = [p for p in allb if all(len(w) == 1 for w, _ in p.blocks)]
    blocks2 = [p for p in allb if any(len(w) == 2 for w, _ in p.blocks)]
    assert len(pairs) == 2  # profile d_1 = 2
    assert len(blocks2) == 1  # profile d_2 = 1
    assert len(enumerate_bipartite(1)) == 1


def test_bipartite_join_and_leq():
    eta = Perm.from_text("(1 2)", n=2)
    m1 = BipartitePartition.from_pairing(Perm.identity(2))
    m2 = BipartitePartition.from_pairing(eta)
    assert m1.join(m2) == BipartitePartition.full(2)
    assert m1.leq(BipartitePartition.full(2))
    assert not BipartitePartition.full(2).leq(m1)
    pi = BipartitePartition.from_pairing(Perm.identity(3))
    assert len(bipartite_coarsenings(pi)) == 5


def test_bipartite_text_roundtrip():
    pi = BipartitePartition(3, [((1, 2), (1, 3)), ((3,), (2,))])
    assert str(pi) == "{1,2;1b,3b|3;2b}"
    assert BipartitePartition.from_text(str(pi)) == pi


def test_classical_cumulants_small_and_roundtrip():
    # n=1: k_1 = E[x];  n=2: k_2 = E[xy] - E[x]E[y]
    mom = {frozenset({1}): Fraction(3), frozenset({2}): Fraction(5), frozenset({1, 2}): Fraction(4)}
    assert classical_cumulant_from_moments(1, {frozenset({1}): Fraction(3)}) == 3
    assert classical_cumulant_from_moments(2, mom) == 4 - 15

    rng = random.Random(3)
    for n in range(1, 6):
        moments = {}
        for pi in enumerate_partitions(n):
            for b in pi.blocks:
                moments.setdefault(
                    frozenset(b), Fraction(rng.randint(-9, 9), rng.randint(1, 5))
                )
        # cumulant of the sub-family indexed by each support set
        cumulants = {}
        for s in moments:
            idx = sorted(s)
            sub = lambda t, idx=idx: moments[frozenset(idx[i - 1] for i in t)]
            cumulants[s] = classical_cumulant_from_moments(len(s), sub)
        for s in moments:
            idx = sorted(s)
            sub = lambda t, idx=idx: cumulants[frozenset(idx[i - 1] for i in t)]
            assert moment_from_classical_cumulants(len(s), sub) == moments[s]


def test_bipartite_cumulant_roundtrip():
    rng = random.Random(4)
    n = 3
    moments = {}
    for pi in enumerate_bipartite(n):
        for w, b in pi.blocks:
            moments.setdefault(
                (frozenset(w), frozenset(b)), Fraction(rng.randint(-9, 9), rng.randint(1, 5))
            )

    def restrict(table, wset, bset):
        widx, bidx = sorted(wset), sorted(bset)

        def fn(w, b):
            return table[
                (frozenset(widx[i - 1] for i in w), frozenset(bidx[j - 1] for j in b))
            ]

        return fn

    cumulants = {
        key: bipartite_cumulant_from_moments(len(key[0]), restrict(moments, *key))
        for key in moments
    }
    for key in moments:
        rebuilt = bipartite_moment_from_cumulants(len(key[0]), restrict(cumulants, *key))
        assert rebuilt == moments[key]
