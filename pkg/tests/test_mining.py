from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from p2proute.mining import (
    Cluster,
    DatasetFormatError,
    MiningParams,
    TransactionDataset,
    concentration,
    format_dataset,
    frequent_closed_itemsets,
    homogeneity,
    parse_dataset,
    select_clusters,
    support_threshold,
)

from conftest import brute_force_closed


def fs(*xs):
    return frozenset(xs)


# frozen from brute_force_closed(d1, 0.2); identical to the hand listing
D1_CLOSED_020 = {
    (fs("W1"), fs("SP1", "SP2", "SP3", "SP6", "SP7")),
    (fs("W1", "W2", "W3"), fs("SP1", "SP2", "SP3")),
    (fs("W4", "W5"), fs("SP4", "SP5", "SP6")),
    (fs("W4", "W5", "W8"), fs("SP5", "SP6")),
    (fs("W8"), fs("SP5", "SP6", "SP8")),
    (fs("W1", "W6", "W7"), fs("SP6", "SP7")),
    (fs("W9"), fs("SP7", "SP8")),
}

TABLE1_SELECTION = [
    (fs("W1", "W2", "W3"), fs("SP1", "SP2", "SP3")),
    (fs("W4", "W5"), fs("SP4", "SP5", "SP6")),
    (fs("W1", "W6", "W7"), fs("SP6", "SP7")),
    (fs("W9"), fs("SP7", "SP8")),
]


def as_pairs(clusters):
    return {(c.pattern, c.support_set) for c in clusters}


transactions = st.lists(
    st.frozensets(st.sampled_from([f"i{k}" for k in range(12)]), min_size=1, max_size=8),
    min_size=1,
    max_size=12,
).map(lambda rows: TransactionDataset(tuple((f"t{i + 1}", r) for i, r in enumerate(rows))))

minfrs = st.sampled_from([0.1, 0.2, 0.25, 0.3, 0.5, 0.75, 1.0])


class TestFrequentClosedItemsets:
    def test_oracle_agrees_with_frozen_d1_listing(self, d1):
        assert brute_force_closed(d1, 0.2) == D1_CLOSED_020

    def test_d1_minfr_20(self, d1):
        assert support_threshold(0.2, len(d1)) == 2
        assert as_pairs(frequent_closed_itemsets(d1, 0.2)) == D1_CLOSED_020

    def test_d1_minfr_60(self, d1):
        assert support_threshold(0.6, len(d1)) == 5
        assert as_pairs(frequent_closed_itemsets(d1, 0.6)) == {
            (fs("W1"), fs("SP1", "SP2", "SP3", "SP6", "SP7"))
        }

    def test_single_transaction(self):
        ds = TransactionDataset((("t1", fs("a", "b")),))
        assert as_pairs(frequent_closed_itemsets(ds, 1.0)) == {(fs("a", "b"), fs("t1"))}

    def test_empty_dataset_gives_nothing(self):
        assert frequent_closed_itemsets(TransactionDataset(()), 0.5) == []

    def test_output_sorted_by_pattern(self, d1):
        out = frequent_closed_itemsets(d1, 0.2)
        assert out == sorted(out, key=lambda c: c.sort_key)

    def test_threshold_is_robust_to_float_error(self):
        assert support_threshold(0.2, 10) == 2
        assert support_threshold(0.3, 10) == 3
        assert support_threshold(0.2, 8) == 2

    @settings(max_examples=150, deadline=None)
    @given(transactions, minfrs)
    def test_matches_brute_force(self, ds, minfr):
        assert as_pairs(frequent_closed_itemsets(ds, minfr)) == brute_force_closed(ds, minfr)

    @settings(max_examples=100, deadline=None)
    @given(transactions, minfrs)
    def test_closure_and_exact_support(self, ds, minfr):
        for c in frequent_closed_itemsets(ds, minfr):
            assert c.support_set == ds.support(c.pattern)
            assert frozenset.intersection(*(ds.items_of(t) for t in c.support_set)) == c.pattern

    @settings(max_examples=100, deadline=None)
    @given(transactions, minfrs, minfrs)
    def test_raising_minfr_never_adds(self, ds, a, b):
        lo, hi = sorted((a, b))
        assert as_pairs(frequent_closed_itemsets(ds, hi)) <= as_pairs(frequent_closed_itemsets(ds, lo))


class TestMeasures:
    def test_homogeneity_examples(self, d1):
        assert homogeneity(Cluster(fs("W1", "W2", "W3"), fs("SP1", "SP2", "SP3")), d1) == 1
        assert homogeneity(Cluster(fs("W4", "W5"), fs("SP4", "SP5", "SP6")), d1) == Fraction(6, 11)

    def test_homogeneity_full_transactions(self):
        ds = TransactionDataset((("t1", fs("a", "b")), ("t2", fs("a", "b")), ("t3", fs("c",))))
        assert homogeneity(Cluster(fs("a", "b"), fs("t1", "t2")), ds) == 1

    def test_concentration_examples(self, d1):
        c = Cluster(fs("W1", "W2", "W3"), fs("SP1", "SP2", "SP3"))
        assert concentration(c, d1) == (Fraction(3, 5) + 1 + 1) / 3
        assert float(concentration(c, d1)) == pytest.approx(0.867, abs=1e-3)
        assert concentration(Cluster(fs("W4", "W5"), fs("SP4", "SP5", "SP6")), d1) == 1

    def test_single_item_clusters_are_fully_concentrated(self, d1):
        for c in frequent_closed_itemsets(d1, 0.2):
            if len(c.pattern) == 1:
                assert concentration(c, d1) == 1

    def test_interestingness_is_the_mean(self, d1):
        for c in select_clusters(d1, MiningParams(0.2, 1)):
            assert c.interestingness == (c.homogeneity + c.concentration) / 2
            assert 0 < c.interestingness <= 1


class TestSelectClusters:
    def test_table1_selection(self, d1):
        out = select_clusters(d1, MiningParams(0.2, 1))
        assert [(c.pattern, c.support_set) for c in out] == TABLE1_SELECTION

    def test_final_step_is_a_tie_broken_by_classified_count(self, d1):
        from p2proute.mining import evaluate

        w9 = evaluate(Cluster(fs("W9"), fs("SP7", "SP8")), d1)
        w458 = evaluate(Cluster(fs("W4", "W5", "W8"), fs("SP5", "SP6")), d1)
        assert w9.interestingness == w458.interestingness == Fraction(2, 3)
        classified = fs("SP1", "SP2", "SP3", "SP4", "SP5", "SP6", "SP7")
        assert len(w9.support_set & classified) == 1
        assert len(w458.support_set & classified) == 2

    def test_identical_transactions_give_one_cluster(self):
        ds = TransactionDataset(tuple((f"t{i}", fs("a", "b")) for i in range(4)))
        out = select_clusters(ds, MiningParams(0.5, 1))
        assert as_pairs(out) == {(fs("a", "b"), fs("t0", "t1", "t2", "t3"))}

    def test_no_frequent_pattern(self, d1):
        assert select_clusters(d1, MiningParams(1.0, 1)) == []

    @settings(max_examples=100, deadline=None)
    @given(transactions, minfrs, st.integers(1, 3))
    def test_each_new_cluster_brings_m_unclassified(self, ds, minfr, m):
        seen = frozenset()
        out = select_clusters(ds, MiningParams(minfr, m))
        for i, c in enumerate(out):
            if i:
                assert len(c.support_set - seen) >= m
            seen |= c.support_set

    @settings(max_examples=50, deadline=None)
    @given(transactions, minfrs)
    def test_deterministic(self, ds, minfr):
        a = select_clusters(ds, MiningParams(minfr, 1))
        b = select_clusters(ds, MiningParams(minfr, 1))
        assert [(c.pattern, c.support_set) for c in a] == [(c.pattern, c.support_set) for c in b]


class TestValidation:
    def test_bad_params(self):
        with pytest.raises(ValueError):
            MiningParams(0, 1)
        with pytest.raises(ValueError):
            MiningParams(1.5, 1)
        with pytest.raises(ValueError):
            MiningParams(0.2, 0)

    def test_dataset_invariants(self):
        with pytest.raises(ValueError):
            TransactionDataset((("t1", fs("a")), ("t1", fs("b"))))
        with pytest.raises(ValueError):
            TransactionDataset((("t1", fs()),))
        with pytest.raises(ValueError):
            TransactionDataset((("t1", fs("a")),), item_universe=fs("b"))


class TestDatasetFormat:
    def test_round_trip(self, d1, d2):
        for ds in (d1, d2):
            assert parse_dataset(format_dataset(ds)) == ds

    def test_comments_and_blank_lines(self):
        ds = parse_dataset("# header\n\nt1: a b\n  # indented comment\nt2: b\n")
        assert ds.ids == ["t1", "t2"]
        assert ds.items_of("t1") == fs("a", "b")

    @pytest.mark.parametrize(
        "text, line",
        [("t1: a\nno colon here\n", 2), ("t1:\n", 1), ("t1: a\nt1: b\n", 2), (": a\n", 1)],
    )
    def test_errors_name_the_line(self, text, line):
        with pytest.raises(DatasetFormatError) as err:
            parse_dataset(text)
        assert err.value.line == line
        assert f"line {line}" in str(err.value)

    def test_d1_shape(self, d1):
        assert len(d1) == 8 and len(d1.item_universe) == 9
