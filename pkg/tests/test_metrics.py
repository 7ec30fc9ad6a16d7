import random

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.sparse.csgraph import floyd_warshall

from conftest import random_snapshot, tr
from kgevo.exceptions import EmptyGraph, NotConverged
from kgevo.metrics import (
    DirectedGraph,
    GraphMetrics,
    degree_stats,
    diameter,
    eccentricity,
    hits,
    largest_component,
    metrics_report,
    pagerank,
    radius,
    subgraph_included,
)


def random_digraph(n, p, seed):
    rng = random.Random(seed)
    edges = [(u, v) for u in range(n) for v in range(n) if u != v and rng.random() < p]
    return DirectedGraph(range(n), edges)


# ---------------------------------------------------------------- oracles


def dense_pagerank(g, damping=0.85, iters=200):
    nodes = sorted(g.nodes)
    n = len(nodes)
    M = np.zeros((n, n))
    for u, v in g.edges():
        M[nodes.index(u), nodes.index(v)] = 1.0
    for i in range(n):
        row = M[i].sum()
        M[i] = M[i] / row if row else np.full(n, 1.0 / n)
    G = damping * M + (1 - damping) / n
    x = np.full(n, 1.0 / n)
    for _ in range(iters):
        x = x @ G
    return dict(zip(nodes, x))


def dense_hits(g, iters=200):
    nodes = sorted(g.nodes)
    n = len(nodes)
    A = np.zeros((n, n))
    for u, v in g.edges():
        A[nodes.index(u), nodes.index(v)] = 1.0
    # principal eigenvectors of A A^T (hubs) and A^T A (authorities)
    h = np.ones(n)
    for _ in range(iters):
        h = A @ (A.T @ h)
        h /= np.linalg.norm(h)
    a = A.T @ h
    a /= np.linalg.norm(a)
    return dict(zip(nodes, h)), dict(zip(nodes, a))


EIGHT = DirectedGraph(range(8), [(0, 1), (0, 2), (1, 2), (2, 0), (3, 2), (4, 2), (4, 5),
                                 (5, 6), (6, 4), (6, 7), (7, 3), (1, 6)])


# ---------------------------------------------------------------- inclusion


def test_subgraph_included():
    s = random_snapshot(20, seed=1)
    t = tr("zz", "p", "yy")
    assert subgraph_included(s, s)
    assert subgraph_included(set(), s)
    assert not subgraph_included(s | {t}, s)
    assert subgraph_included(s, s | {t})


# ---------------------------------------------------------------- degrees


def test_ratio_examples():
    g = DirectedGraph(["iso"], [("a", "x"), ("b", "x"), ("c", "x")])
    per, hist = degree_stats(g)
    assert per["x"] == {"n_in": 3, "n_out": 0, "ratio": 3.0}
    assert per["iso"]["ratio"] == 0.0
    assert hist == {0: 1, 1: 3, 3: 1}


def test_degrees_match_brute_force():
    g = random_digraph(10, 0.3, 2)
    edges = g.edges()
    per, _ = degree_stats(g)
    for v in range(10):
        n_in = sum(1 for _, b in edges if b == v)
        n_out = sum(1 for a, _ in edges if a == v)
        assert per[v] == {"n_in": n_in, "n_out": n_out, "ratio": n_in / (n_out + 1)}


def test_from_triples_skips_literals():
    g = DirectedGraph.from_triples({tr("a", "p", "b"), tr("a", "name", '"A"')})
    assert g.edges() == [(tr("a", "p", "b").subject, tr("a", "p", "b").object)]


# ---------------------------------------------------------------- distances


def test_single_node_distances():
    g = DirectedGraph(["a"])
    assert (eccentricity(g, "a"), radius(g), diameter(g)) == (0, 0, 0)


def test_path_of_four():
    g = DirectedGraph(edges=[(0, 1), (2, 1), (2, 3)])
    assert diameter(g) == 3 and radius(g) == 2


def test_empty_graph_errors():
    with pytest.raises(EmptyGraph):
        radius(DirectedGraph())
    with pytest.raises(EmptyGraph):
        diameter(DirectedGraph())


@pytest.mark.parametrize("seed", range(10))
def test_distances_match_floyd_warshall(seed):
    rng = random.Random(seed)
    n = rng.randint(1, 20)
    g = random_digraph(n, rng.choice([0.05, 0.1, 0.2]), seed)
    W = np.zeros((n, n))
    for u, v in g.edges():
        W[u, v] = W[v, u] = 1
    D = floyd_warshall(W, directed=False, unweighted=True)
    for v in range(n):
        finite = D[v][np.isfinite(D[v])]
        assert eccentricity(g, v) == int(finite.max())
    comp = largest_component(g)
    ecc = [int(D[v][np.isfinite(D[v])].max()) for v in comp]
    assert radius(g) == min(ecc) and diameter(g) == max(ecc)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 15), st.lists(st.tuples(st.integers(0, 14), st.integers(0, 14)), max_size=40))
def test_radius_diameter_bounds(n, edges):
    g = DirectedGraph(range(n), [(u % n, v % n) for u, v in edges])
    r, d = radius(g), diameter(g)
    assert r <= d <= 2 * r


# ---------------------------------------------------------------- pagerank


def test_pagerank_three_cycle():
    pr = pagerank(DirectedGraph(edges=[(0, 1), (1, 2), (2, 0)]))
    assert all(v == pytest.approx(1 / 3, abs=1e-12) for v in pr.values())


def test_pagerank_sink():
    pr = pagerank(DirectedGraph(edges=[("a", "b")]))
    assert pr["b"] > pr["a"]


def test_pagerank_matches_dense_oracle():
    ours = pagerank(EIGHT)
    ref = dense_pagerank(EIGHT)
    for n in ours:
        assert ours[n] == pytest.approx(ref[n], abs=1e-8)
    nxr = nx.pagerank(nx.DiGraph(EIGHT.edges()), alpha=0.85, tol=1e-12)
    for n in ours:
        assert ours[n] == pytest.approx(nxr[n], abs=1e-8)


@pytest.mark.parametrize("seed", range(5))
def test_pagerank_invariants(seed):
    g = random_digraph(12, 0.15, seed)
    pr = pagerank(g)
    assert sum(pr.values()) == pytest.approx(1.0, abs=1e-9)
    assert min(pr.values()) >= 0
    relabel = {v: f"n{(v * 7) % 12:02d}" for v in range(12)}
    pr2 = pagerank(DirectedGraph(relabel.values(), [(relabel[u], relabel[v]) for u, v in g.edges()]))
    for v in range(12):
        assert pr2[relabel[v]] == pytest.approx(pr[v], abs=1e-12)


def test_pagerank_not_converged():
    with pytest.raises(NotConverged) as info:
        pagerank(EIGHT, max_iter=1)
    assert info.value.residual > 0


def test_pagerank_rejects_bad_damping():
    with pytest.raises(ValueError):
        pagerank(EIGHT, damping=1.0)


# ---------------------------------------------------------------- hits


def test_hits_star():
    hub, auth = hits(DirectedGraph(edges=[("a", "b"), ("a", "c"), ("a", "d")]))
    assert max(hub, key=hub.get) == "a"
    assert sorted(hub.values())[-2] < hub["a"]
    assert auth["b"] == auth["c"] == auth["d"] == pytest.approx(1 / np.sqrt(3))
    assert auth["a"] == 0.0


def test_hits_no_edges():
    hub, auth = hits(DirectedGraph(["a", "b"]))
    assert hub == auth == {"a": 0.0, "b": 0.0}


def test_hits_matches_dense_oracle():
    hub, auth = hits(EIGHT)
    ref_h, ref_a = dense_hits(EIGHT)
    for n in hub:
        assert hub[n] == pytest.approx(ref_h[n], abs=1e-8)
        assert auth[n] == pytest.approx(ref_a[n], abs=1e-8)


@pytest.mark.parametrize("seed", range(5))
def test_hits_invariants(seed):
    g = random_digraph(12, 0.2, seed)
    hub, auth = hits(g)
    assert np.linalg.norm(list(hub.values())) == pytest.approx(1.0, abs=1e-12)
    assert np.linalg.norm(list(auth.values())) == pytest.approx(1.0, abs=1e-12)
    has_in = {v for _, v in g.edges()}
    for v in g.nodes - has_in:
        assert auth[v] == 0.0


# ---------------------------------------------------------------- report


def test_report_and_estimator():
    snap = random_snapshot(60, seed=3)
    rep = metrics_report(snap)
    assert set(rep) >= {"radius", "diameter", "pagerank", "hits", "degree_histogram"}
    assert sum(rep["pagerank"].values()) == pytest.approx(1.0, abs=1e-9)
    est = GraphMetrics().fit(snap)
    assert est.get_params() == {"damping": 0.85, "tol": 1e-10, "max_iter": 200}
    assert est.radius_ == rep["radius"] and est.diameter_ == rep["diameter"]
    empty = GraphMetrics().fit(set())
    assert empty.radius_ is None and empty.pagerank_ == {}
