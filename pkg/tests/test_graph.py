import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats as sps

from noisyop.graph import (
    ConnectivityError,
    ErdosRenyi,
    GraphError,
    StochasticBlock,
    TrustMatrix,
    UndirectedGraph,
    WattsStrogatz,
    features,
    generate,
    graph_from_edge_rows,
    local_clustering,
    read_edge_list,
    read_trust_csv,
    trust_from_adjacency,
    trust_matrix,
    write_edge_list,
    write_trust_csv,
)

from .conftest import brute_bfs_lengths, complete, isolated, star


class TestUndirectedGraph:
    def test_self_loops_in_adjacency(self):
        g = UndirectedGraph(3, ((0, 1),))
        a = g.adjacency()
        assert np.all(np.diag(a) == 1)
        assert a[0, 1] == a[1, 0] == 1
        assert g.degrees().tolist() == [2, 2, 1]
        assert g.degrees(include_self_loops=False).tolist() == [1, 1, 0]

    def test_without_self_loops(self):
        g = UndirectedGraph(2, ((0, 1),), self_loops=False)
        assert np.all(np.diag(g.adjacency()) == 0)

    @pytest.mark.parametrize("edges", [((0, 0),), ((0, 3),), ((0, 1), (1, 0)), ((-1, 1),)])
    def test_rejects_bad_edges(self, edges):
        with pytest.raises(GraphError):
            UndirectedGraph(3, edges)

    def test_rejects_empty_and_oversized(self):
        with pytest.raises(GraphError):
            UndirectedGraph(0, ())
        with pytest.raises(GraphError):
            UndirectedGraph(2001, ())

    def test_from_adjacency_roundtrip(self, rng):
        a = np.triu(rng.random((8, 8)) < 0.4, 1)
        a = (a | a.T).astype(int)
        g = UndirectedGraph.from_adjacency(a)
        assert np.array_equal(g.adjacency(include_self_loops=False), a)

    def test_from_adjacency_asymmetric(self):
        with pytest.raises(GraphError):
            UndirectedGraph.from_adjacency(np.array([[0, 1], [0, 0]]))

    def test_connectivity(self):
        assert complete(4).is_connected()
        assert not isolated(3).is_connected()


class TestGenerate:
    def test_er_p1_is_complete(self):
        g = generate(ErdosRenyi(4, 1.0), 0)
        assert g.num_edges == 6
        assert np.all(g.adjacency() == 1)

    def test_er_p0_is_empty(self):
        assert generate(ErdosRenyi(5, 0.0), 0).num_edges == 0

    def test_ws_ring_lattice(self):
        g = generate(WattsStrogatz(20, 4, 0.0), 0)
        assert np.all(g.degrees(include_self_loops=False) == 4)
        assert np.allclose(local_clustering(g.adjacency(False)), 0.5)
        # q=0 is deterministic
        assert g.edges == generate(WattsStrogatz(20, 4, 0.0), 99).edges

    def test_ws_rewiring_preserves_edge_count(self):
        for q in (0.3, 1.0):
            g = generate(WattsStrogatz(30, 6, q), 1)
            assert g.num_edges == 30 * 3

    def test_seeded_draws_repeat(self):
        for cfg in (ErdosRenyi(30, 0.2), WattsStrogatz(30, 4, 0.5), StochasticBlock.two_groups(30, 6, 0.3)):
            assert generate(cfg, 7).edges == generate(cfg, 7).edges
            assert generate(cfg, 7).edges != generate(cfg, 8).edges

    def test_connected_retry(self):
        g = generate(ErdosRenyi(30, 0.12), 3, connected=True)
        assert g.is_connected()

    def test_connected_failure_is_explicit(self):
        with pytest.raises(ConnectivityError):
            generate(ErdosRenyi(20, 0.0), 0, connected=True, max_tries=5)

    @pytest.mark.parametrize(
        "cfg",
        [ErdosRenyi(10, 1.5), ErdosRenyi(10, -0.1), WattsStrogatz(10, 3, 0.1), WattsStrogatz(10, 10, 0.1),
         WattsStrogatz(10, 4, 2.0)],
    )
    def test_invalid_params(self, cfg):
        with pytest.raises(GraphError):
            generate(cfg, 0)

    def test_sbm_validation(self):
        with pytest.raises(GraphError):
            generate(StochasticBlock([5, 5], [[0.1, 0.2], [0.3, 0.1]]), 0)
        with pytest.raises(GraphError):
            generate(StochasticBlock([5, 5], [[0.1, 1.2], [1.2, 0.1]]), 0)

    def test_two_groups_probabilities(self):
        sbm = StochasticBlock.two_groups(100, 50, 0.7)
        assert sbm.sizes == (50, 50)
        assert sbm.probs[0][0] == 0.7
        assert sbm.probs[0][1] == pytest.approx(0.3)

    def test_sbm_uniform_matches_er_edge_count(self):
        n, k = 100, 10
        sbm = StochasticBlock([50, 50], [[k / n, k / n], [k / n, k / n]])
        rng = np.random.default_rng(0)
        counts = np.array([generate(sbm, rng).num_edges for _ in range(200)])
        pairs = n * (n - 1) / 2
        mean, sd = pairs * k / n, np.sqrt(pairs * (k / n) * (1 - k / n))
        assert abs(counts.mean() - mean) < 3 * sd / np.sqrt(200)

    def test_er_edge_count_mean(self):
        n, p, draws = 40, 0.3, 1000
        rng = np.random.default_rng(1)
        counts = np.array([generate(ErdosRenyi(n, p), rng).num_edges for _ in range(draws)])
        pairs = n * (n - 1) / 2
        assert abs(counts.mean() - pairs * p) < 3 * np.sqrt(pairs * p * (1 - p) / draws)

    def test_sbm_uniform_degree_histogram_matches_er(self):
        n, p = 100, 0.1
        rng = np.random.default_rng(2)
        sbm = StochasticBlock([50, 50], [[p, p], [p, p]])
        deg_sbm = np.concatenate([generate(sbm, rng).degrees(False) for _ in range(200)])
        deg_er = np.concatenate([generate(ErdosRenyi(n, p), rng).degrees(False) for _ in range(200)])
        bins = [0, 6, 8, 10, 12, 14, 100]
        h1, _ = np.histogram(deg_sbm, bins)
        h2, _ = np.histogram(deg_er, bins)
        _, pval, _, _ = sps.chi2_contingency(np.vstack([h1, h2]))
        assert pval > 0.01

    def test_ws_q1_clustering_near_er(self):
        n, k = 100, 10
        rng = np.random.default_rng(3)
        c = np.array([features(generate(WattsStrogatz(n, k, 1.0), rng)).avg_clustering for _ in range(200)])
        assert abs(c.mean() - k / n) < 3 * c.std(ddof=1)


class TestTrustMatrix:
    def test_single_node(self):
        a = trust_matrix(UndirectedGraph(1, ()), 0.01)
        assert a.weights.tolist() == [[1 / 1.01]]

    def test_two_node_path(self):
        a = trust_matrix(UndirectedGraph(2, ((0, 1),)), 0.01)
        assert np.allclose(a.weights, 1 / 2.02, rtol=0, atol=1e-15)
        assert np.allclose(a.row_sums(), 1 / 1.01, rtol=0, atol=1e-15)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(1, 40), st.floats(0.0, 1.0), st.floats(1e-4, 2.0), st.integers(0, 2**32 - 1))
    def test_row_sums(self, n, p, eta, seed):
        a = trust_matrix(generate(ErdosRenyi(n, p), seed), eta)
        assert np.max(np.abs(a.row_sums() - 1 / (1 + eta))) < 1e-12
        assert a.is_substochastic()
        g_adj = generate(ErdosRenyi(n, p), seed).adjacency()
        assert np.array_equal(a.weights > 0, g_adj > 0)

    def test_eta_must_be_positive(self):
        with pytest.raises(GraphError):
            trust_matrix(complete(3), 0.0)

    def test_empty_row_rejected(self):
        with pytest.raises(GraphError):
            trust_from_adjacency(np.array([[1, 1], [0, 0]]), 0.01)

    def test_read_only(self):
        a = trust_matrix(complete(3))
        with pytest.raises(ValueError):
            a.weights[0, 0] = 1.0

    def test_negative_weights(self):
        with pytest.raises(GraphError):
            TrustMatrix(np.array([[-0.1]]), 0.01)


class TestFeatures:
    def test_complete(self):
        f = features(complete(5))
        assert (f.density, f.avg_clustering, f.avg_shortest_path, f.avg_degree) == (1.0, 1.0, 1.0, 4.0)
        assert f.connected

    def test_star(self):
        f = features(star(5))
        assert f.avg_clustering == 0.0
        assert f.avg_shortest_path == pytest.approx(1.6, abs=1e-15)
        assert f.density == pytest.approx(0.4, abs=1e-15)

    def test_ring_lattice(self):
        assert features(generate(WattsStrogatz(20, 4, 0.0), 0)).avg_clustering == pytest.approx(0.5)

    def test_disconnected_has_no_path_length(self):
        f = features(UndirectedGraph(4, ((0, 1), (2, 3))))
        assert f.avg_shortest_path is None
        assert not f.connected

    @settings(max_examples=30, deadline=None)
    @given(st.integers(2, 25), st.floats(0.05, 0.9), st.integers(0, 2**32 - 1))
    def test_against_networkx(self, n, p, seed):
        g = generate(ErdosRenyi(n, p), seed)
        f = features(g)
        h = nx.from_numpy_array(g.adjacency(include_self_loops=False))
        assert f.density == pytest.approx(nx.density(h), abs=1e-12)
        assert f.avg_clustering == pytest.approx(nx.average_clustering(h), abs=1e-12)
        assert f.connected == nx.is_connected(h)
        if f.connected:
            assert f.avg_shortest_path == pytest.approx(nx.average_shortest_path_length(h), abs=1e-12)
            dist = brute_bfs_lengths(g.adjacency())
            assert f.avg_shortest_path == pytest.approx(dist.sum() / (n * (n - 1)), abs=1e-12)


class TestCsv:
    def test_edge_list_roundtrip(self, tmp_path):
        g = generate(ErdosRenyi(12, 0.3), 4)
        path = tmp_path / "edges.csv"
        write_edge_list(path, g)
        assert path.read_text().splitlines()[0] == "src,dst,weight"
        h = graph_from_edge_rows(read_edge_list(path), n=12)
        assert h.edges == g.edges and h.self_loops

    def test_trust_roundtrip_exact(self, tmp_path):
        a = trust_matrix(generate(ErdosRenyi(9, 0.4), 4))
        path = tmp_path / "trust.csv"
        write_trust_csv(path, a)
        assert np.array_equal(read_trust_csv(path).weights, a.weights)

    def test_bad_header(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("a,b\n1,2\n")
        with pytest.raises(GraphError):
            read_edge_list(path)
