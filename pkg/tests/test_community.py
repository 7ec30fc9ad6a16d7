import itertools
import random
from collections import deque

import networkx as nx
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import iri, tr
from kgevo.community import (
    GirvanNewman,
    UndirectedGraph,
    detect_communities,
    edge_betweenness,
    modularity,
    project,
)
from kgevo.rdf import RDF_TYPE, Iri, Triple


def random_graph(n, p, seed):
    rng = random.Random(seed)
    edges = [(u, v) for u in range(n) for v in range(u + 1, n) if rng.random() < p]
    return UndirectedGraph(range(n), edges)


def clique_edges(nodes):
    return list(itertools.combinations(nodes, 2))


# ---------------------------------------------------------------- oracles


def bfs_counts(adj, s):
    dist, sigma = {s: 0}, {s: 1}
    q = deque([s])
    while q:
        v = q.popleft()
        for w in adj[v]:
            if w not in dist:
                dist[w] = dist[v] + 1
                sigma[w] = 0
                q.append(w)
            if dist[w] == dist[v] + 1:
                sigma[w] += sigma[v]
    return dist, sigma


def brute_edge_betweenness(g):
    """Sum over unordered pairs of the share of shortest paths through each edge."""
    nodes = sorted(g.adjacency)
    info = {s: bfs_counts(g.adjacency, s) for s in nodes}
    out = {}
    for u, v in g.edges():
        total = 0.0
        for s, t in itertools.combinations(nodes, 2):
            ds, ss = info[s]
            dt, st_ = info[t]
            if t not in ds:
                continue
            for a, b in ((u, v), (v, u)):
                if a in ds and b in dt and ds[a] + 1 + dt[b] == ds[t]:
                    total += ss[a] * st_[b] / ss[t]
        out[(u, v)] = total
    return out


def modularity_by_pairs(g, partition):
    m = g.number_of_edges()
    label = {n: k for k, c in enumerate(partition) for n in c}
    q = 0.0
    for i in g.adjacency:
        for j in g.adjacency:
            if label[i] == label[j]:
                a = 1.0 if j in g.adjacency[i] else 0.0
                q += a - g.degree(i) * g.degree(j) / (2 * m)
    return q / (2 * m)


def set_partitions(items):
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in set_partitions(rest):
        yield [[first]] + part
        for k in range(len(part)):
            yield part[:k] + [[first] + part[k]] + part[k + 1:]


def naive_girvan_newman(g):
    """Global recompute each round via networkx; same tie and level rules."""
    G = nx.Graph()
    G.add_nodes_from(g.adjacency)
    G.add_edges_from(g.edges())
    original = G.copy()
    levels = [sorted((frozenset(c) for c in nx.connected_components(G)), key=min)]
    while G.number_of_edges():
        eb = nx.edge_betweenness_centrality(G, normalized=False)
        eb = {tuple(sorted(e)): val for e, val in eb.items()}
        top = max(eb.values())
        u, v = min(e for e, val in eb.items() if val >= top - 1e-9 * max(1.0, top))
        before = nx.number_connected_components(G)
        G.remove_edge(u, v)
        if nx.number_connected_components(G) > before:
            levels.append(sorted((frozenset(c) for c in nx.connected_components(G)), key=min))
    qs = [nx.community.modularity(original, lvl) if original.number_of_edges() else 0.0 for lvl in levels]
    best = max(qs)
    return levels[next(i for i, q in enumerate(qs) if q >= best - 1e-12)]


# ---------------------------------------------------------------- projection


def test_project_basic():
    snap = {tr("a", "p", "b"), tr("a", "name", '"A"'), tr("c", "name", '"C"'),
            Triple(iri("a"), Iri(RDF_TYPE), iri("T"))}
    g = project(snap)
    assert g.nodes == {iri("a"), iri("b"), iri("c")}
    assert g.edges() == [(iri("a"), iri("b"))]
    g2 = project(snap, include_types=True)
    assert g2.has_edge(iri("a"), iri("T"))
    assert project(snap, predicates=[iri("name")]).number_of_edges() == 0


def test_project_self_loop_and_duplicates():
    g = project({tr("a", "p", "a"), tr("a", "p", "b"), tr("b", "q", "a")})
    assert g.number_of_edges() == 1 and g.degree(iri("a")) == 1


# ---------------------------------------------------------------- betweenness


def test_single_edge():
    assert edge_betweenness(UndirectedGraph(edges=[("a", "b")])) == {("a", "b"): 1.0}


def test_path_of_three():
    assert edge_betweenness(UndirectedGraph(edges=[("a", "b"), ("b", "c")])) == {
        ("a", "b"): 2.0, ("b", "c"): 2.0}


def test_four_cycle_equal():
    eb = edge_betweenness(UndirectedGraph(edges=[(0, 1), (1, 2), (2, 3), (3, 0)]))
    assert len(set(eb.values())) == 1
    assert list(eb.values())[0] == pytest.approx(2.0)


@pytest.mark.parametrize("seed", range(12))
def test_betweenness_matches_oracles(seed):
    rng = random.Random(seed)
    g = random_graph(rng.randint(2, 30), rng.choice([0.08, 0.15, 0.3]), seed)
    ours = edge_betweenness(g)
    brute = brute_edge_betweenness(g)
    G = nx.Graph(g.edges())
    ref = {tuple(sorted(e)): v for e, v in nx.edge_betweenness_centrality(G, normalized=False).items()}
    assert set(ours) == set(brute) == set(ref)
    for e in ours:
        assert ours[e] == pytest.approx(brute[e], abs=1e-9)
        assert ours[e] == pytest.approx(ref[e], abs=1e-9)


# ---------------------------------------------------------------- modularity


def test_modularity_single_community_is_zero():
    g = random_graph(10, 0.4, 1)
    assert modularity(g, [g.nodes]) == pytest.approx(0.0, abs=1e-12)


def test_two_disjoint_triangles():
    g = UndirectedGraph(edges=clique_edges("abc") + clique_edges("def"))
    assert modularity(g, [set("abc"), set("def")]) == pytest.approx(0.5, abs=1e-12)


@pytest.mark.parametrize("seed", range(6))
def test_modularity_matches_pairwise_form(seed):
    g = random_graph(15, 0.25, seed)
    rng = random.Random(seed)
    labels = {n: rng.randrange(4) for n in g.nodes}
    partition = [[n for n in g.nodes if labels[n] == k] for k in range(4)]
    partition = [c for c in partition if c]
    expected = modularity_by_pairs(g, partition)
    assert modularity(g, partition) == pytest.approx(expected, abs=1e-12)
    G = nx.Graph()
    G.add_nodes_from(g.nodes)
    G.add_edges_from(g.edges())
    assert modularity(g, partition) == pytest.approx(nx.community.modularity(G, partition), abs=1e-12)


def test_modularity_rejects_bad_partitions():
    g = UndirectedGraph(edges=[(0, 1)])
    with pytest.raises(ValueError):
        modularity(g, [[0]])
    with pytest.raises(ValueError):
        modularity(g, [[0, 1], [1]])


# ---------------------------------------------------------------- Girvan–Newman


def test_empty_graph():
    assert detect_communities(UndirectedGraph()) == ([], [])


def test_two_four_cliques_with_bridge():
    g = UndirectedGraph(edges=clique_edges(range(4)) + clique_edges(range(4, 8)) + [(3, 4)])
    partition, dendrogram = detect_communities(g)
    assert partition == [frozenset(range(4)), frozenset(range(4, 8))]
    assert dendrogram[0] == [frozenset(range(8))]


def test_two_six_cliques_with_bridge():
    g = UndirectedGraph(edges=clique_edges(range(6)) + clique_edges(range(6, 12)) + [(0, 6)])
    partition, _ = detect_communities(g)
    assert partition == [frozenset(range(6)), frozenset(range(6, 12))]


@pytest.mark.parametrize("n", [2, 3, 4, 5, 6])
def test_clique_stays_whole_and_is_optimal(n):
    g = UndirectedGraph(edges=clique_edges(range(n)))
    partition, _ = detect_communities(g)
    assert partition == [frozenset(range(n))]
    best = max(modularity(g, p) for p in set_partitions(list(range(n))))
    assert modularity(g, partition) == pytest.approx(best, abs=1e-12)


def test_isolated_nodes_are_singletons():
    g = UndirectedGraph(nodes=["z"], edges=clique_edges("abc"))
    partition, _ = detect_communities(g)
    assert frozenset({"z"}) in partition
    assert frozenset("abc") in partition


def test_dendrogram_levels_grow_by_components():
    g = random_graph(16, 0.2, 3)
    _, dendrogram = detect_communities(g)
    sizes = [len(level) for level in dendrogram]
    assert sizes == sorted(set(sizes))
    assert sizes[-1] == 16
    for level in dendrogram:
        assert frozenset().union(*level) == g.nodes


@pytest.mark.parametrize("seed", range(10))
def test_matches_naive_girvan_newman(seed):
    rng = random.Random(100 + seed)
    g = random_graph(rng.randint(4, 20), rng.choice([0.15, 0.25, 0.4]), 100 + seed)
    partition, _ = detect_communities(g)
    assert partition == naive_girvan_newman(g)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 11), st.integers(0, 11)), max_size=30))
def test_partition_covers_and_is_deterministic(edges):
    g = UndirectedGraph(edges=[(u, v) for u, v in edges if u != v])
    p1, _ = detect_communities(g)
    p2, _ = detect_communities(g)
    assert p1 == p2
    assert sorted(n for c in p1 for n in c) == sorted(g.nodes)


def test_estimator_on_snapshot():
    snap = {tr(f"a{i}", "p", f"a{j}") for i, j in clique_edges(range(4))}
    snap |= {tr(f"b{i}", "p", f"b{j}") for i, j in clique_edges(range(4))}
    snap.add(tr("a0", "bridge", "b0"))
    snap.add(tr("a1", "name", '"x"'))
    est = GirvanNewman()
    assert est.get_params() == {"predicates": None, "include_types": False}
    est.fit(snap)
    assert len(est.partition_) == 2
    assert est.labels_[iri("a0")] != est.labels_[iri("b0")]
    assert est.modularity_ > 0.3
    assert sum(len(c.triples) for c in est.communities_) == 12
    assert GirvanNewman().fit_predict(est.graph_) == est.labels_
