import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from p2proute.hypergraph import (
    Hypergraph,
    NoConstraintsError,
    OracleTooLargeError,
    format_hypergraph,
    from_clusters,
    is_minimal_transversal,
    is_transversal,
    minimal_transversals,
    minimal_transversals_bruteforce,
    parse_hypergraph,
)
from p2proute.mining import Cluster, MiningParams, select_clusters

from conftest import D2_COMMUNITIES, FIG2_MINTR, brute_force_transversals


def fs(*xs):
    return frozenset(xs)


VERTS = [f"v{i}" for i in range(1, 11)]

hypergraphs = st.lists(
    st.frozensets(st.sampled_from(VERTS), min_size=1, max_size=5), min_size=1, max_size=8
).map(lambda edges: Hypergraph.from_edges(edges, VERTS))


class TestFromClusters:
    def test_d2_clusters(self):
        clusters = [Cluster(fs("x"), frozenset(e)) for e in D2_COMMUNITIES]
        h = from_clusters(clusters, [f"SP{i}" for i in range(1, 11)])
        assert set(h.hyperedges) == {frozenset(e) for e in D2_COMMUNITIES}

    def test_d1_selection(self, d1):
        h = from_clusters(select_clusters(d1, MiningParams(0.2, 1)), d1.ids)
        assert set(h.hyperedges) == {
            fs("SP1", "SP2", "SP3"),
            fs("SP4", "SP5", "SP6"),
            fs("SP6", "SP7"),
            fs("SP7", "SP8"),
        }

    def test_uncovered_superpeer_becomes_singleton(self):
        assert from_clusters([], ["A"]).hyperedges == (fs("A"),)
        h = from_clusters([Cluster(fs("x"), fs("A", "B"))], ["A", "B", "C"])
        assert set(h.hyperedges) == {fs("A", "B"), fs("C")}

    def test_empty(self):
        h = from_clusters([], [])
        assert h.hyperedges == () and h.vertices == frozenset()

    def test_duplicate_support_sets_collapse(self):
        clusters = [Cluster(fs("x"), fs("A", "B")), Cluster(fs("y"), fs("A", "B"))]
        assert from_clusters(clusters, ["A", "B"]).hyperedges == (fs("A", "B"),)

    def test_unknown_superpeer_rejected(self):
        with pytest.raises(ValueError):
            from_clusters([Cluster(fs("x"), fs("Z"))], ["A"])


class TestTransversalPredicates:
    def test_fig2(self, fig2):
        assert is_transversal(fig2, {"v2", "v3", "v5"})
        assert not is_transversal(fig2, {"v2"})
        assert is_transversal(fig2, fig2.vertices)
        assert not is_minimal_transversal(fig2, {"v2", "v3", "v5"})
        assert is_minimal_transversal(fig2, {"v2", "v5"})
        assert is_minimal_transversal(fig2, {"v1", "v5"})

    def test_single_edge(self):
        h = Hypergraph.from_edges([{"a", "b"}])
        assert is_minimal_transversal(h, {"a"})
        assert not is_minimal_transversal(h, {"a", "b"})


class TestMinimalTransversals:
    def test_fig2(self, fig2):
        assert minimal_transversals(fig2) == [frozenset(s) for s in FIG2_MINTR]

    def test_fig2_bruteforce(self, fig2):
        assert minimal_transversals_bruteforce(fig2) == [frozenset(s) for s in FIG2_MINTR]

    def test_singleton_edges_force_both(self):
        h = Hypergraph.from_edges([{"a"}, {"b"}])
        assert minimal_transversals(h) == [fs("a", "b")]

    def test_single_edge_bruteforce(self):
        h = Hypergraph.from_edges([{"a", "b"}])
        assert minimal_transversals_bruteforce(h) == [fs("a"), fs("b")]

    def test_no_hyperedge_is_an_error(self):
        with pytest.raises(NoConstraintsError, match="no constraints"):
            minimal_transversals(Hypergraph(fs("a"), ()))

    def test_oracle_limit(self):
        h = Hypergraph.from_edges([{f"x{i}" for i in range(21)}])
        with pytest.raises(OracleTooLargeError, match="oracle too large"):
            minimal_transversals_bruteforce(h)

    def test_canonical_order(self, d2_hypergraph):
        out = minimal_transversals(d2_hypergraph)
        sizes = [len(s) for s in out]
        assert sizes == sorted(sizes)
        assert [sorted(s) for s in out][:2] == [["SP1", "SP2", "SP6"], ["SP1", "SP6", "SP8"]]

    @settings(max_examples=200, deadline=None)
    @given(hypergraphs)
    def test_incremental_matches_oracles(self, h):
        berge = minimal_transversals(h)
        assert berge == minimal_transversals_bruteforce(h)
        assert set(berge) == brute_force_transversals(h.hyperedges, h.vertices)

    @settings(max_examples=100, deadline=None)
    @given(hypergraphs)
    def test_sound_covering_antichain(self, h):
        out = minimal_transversals(h)
        for s in out:
            assert is_minimal_transversal(h, s)
            assert all(s & e for e in h.hyperedges)
        for a in out:
            for b in out:
                assert a == b or not a <= b


class TestFormat:
    def test_round_trip(self, d2_hypergraph):
        assert parse_hypergraph(format_hypergraph(d2_hypergraph)) == d2_hypergraph

    def test_invalid_edges(self):
        with pytest.raises(ValueError):
            Hypergraph(fs("a"), (fs(),))
        with pytest.raises(ValueError):
            Hypergraph(fs("a"), (fs("b"),))
