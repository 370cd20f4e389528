from fractions import Fraction

import pytest
from hypothesis import given

from agtr.core import Labeling, UniverseMismatch, build_clustering, clustering_from_labels
from agtr.metrics import accuracy, cluster_mapping, precision, precision_recall, recall
from agtr.refinement import random_refinement
from oracles import as_sets, brute_precision_num, brute_recall_num
from strategies import clustering_pairs


def test_fixture_values(fig1):
    c, d = fig1
    # (2 + 4) / 8 and (2 + 2 + 4) / 8 by hand
    assert brute_precision_num(as_sets(c), as_sets(d)) == 6
    assert precision(c, d).numerator == 6 and precision(c, d).value == 0.75
    assert recall(c, d).numerator == 8 and recall(c, d).value == 1.0


def test_identity(fig1):
    c, _ = fig1
    assert precision(c, c).value == 1.0 == recall(c, c).value


def test_all_singleton_reference():
    c = build_clustering([(i, f"c{i % 3}") for i in range(10)])
    singles = build_clustering([(i, f"s{i}") for i in range(10)])
    assert precision(c, singles).as_fraction() == Fraction(c.n_clusters, 10)
    assert recall(c, singles).value == 1.0


def test_mapping_identity_and_tiebreak(fig1):
    c, d = fig1
    assert cluster_mapping(c, c).pairs == {"c1": "c1", "c2": "c2"}
    m = cluster_mapping(c, d)
    assert m.pairs == {"c1": "d1", "c2": "d3"}
    assert m.overlaps == {"c1": 2, "c2": 4}


def test_mapping_tiebreak_is_lexicographic_not_insertion_order():
    c = build_clustering([(i, "c") for i in range(4)])
    d = build_clustering([(2, "zz"), (3, "zz"), (0, "aa"), (1, "aa")])
    assert cluster_mapping(c, d).pairs == {"c": "aa"}


def test_mapping_to_singletons():
    c = build_clustering([(i, f"c{i % 2}") for i in range(6)])
    singles = build_clustering([(i, f"s{i}") for i in range(6)])
    m = cluster_mapping(c, singles)
    assert set(m.overlaps.values()) == {1}
    assert all(next(iter(singles.members(t))) in c.members(s) for s, t in m.pairs.items())


def test_universe_mismatch():
    a = build_clustering([(1, "a")])
    b = build_clustering([(2, "a")])
    for fn in (precision, recall, cluster_mapping):
        with pytest.raises(UniverseMismatch):
            fn(a, b)


@given(clustering_pairs())
def test_against_brute_force_and_duality(pair):
    c, d = pair
    cs, ds = as_sets(c), as_sets(d)
    p, r = precision(c, d), recall(c, d)
    assert p.numerator == brute_precision_num(cs, ds)
    assert r.numerator == brute_recall_num(cs, ds)
    assert precision(c, d) == recall(d, c)
    assert (p, r) == precision_recall(c, d)
    assert 0 < p.value <= 1 and 0 < r.value <= 1


@given(clustering_pairs())
def test_mapping_overlap_is_max(pair):
    c, d = pair
    m = cluster_mapping(c, d)
    cs, ds = as_sets(c), as_sets(d)
    assert set(m.pairs) == set(c.names)
    for src, dst in m.pairs.items():
        best = max(len(cs[src] & dj) for dj in ds.values())
        assert len(cs[src] & ds[dst]) == best == m.overlaps[src]
        # tie-break: no lexicographically smaller target reaches the max
        assert all(len(cs[src] & ds[n]) < best for n in ds if n < dst)
    assert sum(m.overlaps.values()) == precision(c, d).numerator


def test_accuracy_values():
    same = Labeling({1: "a", 2: "a", 3: "b"})
    assert accuracy(same, same).value == 1.0
    got = accuracy(Labeling({1: "a", 2: "a", 3: "b"}), Labeling({1: "a", 2: "b", 3: "b"}))
    assert (got.numerator, got.denominator) == (2, 3)
    assert got.warnings == ()


def test_accuracy_disjoint_vocabularies():
    got = accuracy(Labeling({1: "a", 2: "b"}), Labeling({1: "x", 2: "y"}))
    assert got.value == 0.0
    assert got.warnings == ("disjoint_vocabularies",)


def test_accuracy_unlabeled_never_matches():
    got = accuracy(Labeling({1: None, 2: "a"}), Labeling({1: None, 2: "a"}))
    assert got.numerator == 1


def test_accuracy_mismatch():
    with pytest.raises(UniverseMismatch):
        accuracy(Labeling({1: "a"}), Labeling({2: "a"}))


def test_accuracy_below_recall_against_any_gtr():
    import random

    rng = random.Random(5)
    for trial in range(200):
        m = rng.randint(2, 60)
        vocab = [f"f{i}" for i in range(rng.randint(1, 6))]
        ref = Labeling({i: rng.choice(vocab) for i in range(m)})
        pred = Labeling({i: (rng.choice(vocab) if rng.random() > 0.1 else None) for i in range(m)})
        d = clustering_from_labels(ref)
        r = random_refinement(d, rng.random(), trial)
        assert accuracy(pred, ref).numerator <= recall(clustering_from_labels(pred), r).numerator
