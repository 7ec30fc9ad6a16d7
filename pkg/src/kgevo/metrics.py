"""Structural measures over a snapshot's directed graph: degrees, distances, PageRank, HITS."""

from __future__ import annotations

from collections import Counter, deque
from typing import Hashable, Iterable

import numpy as np
from sklearn.base import BaseEstimator

from ._validation import check_interval, check_snapshot
from .exceptions import EmptyGraph, NotConverged
from .rdf import Triple, is_node


class DirectedGraph:
    def __init__(self, nodes: Iterable[Hashable] = (), edges: Iterable[tuple] = ()):
        self.out_adjacency: dict[Hashable, set] = {}
        for n in nodes:
            self.add_node(n)
        for u, v in edges:
            self.add_edge(u, v)

    @classmethod
    def from_triples(cls, triples: Iterable[Triple]) -> DirectedGraph:
        """Nodes are IRIs and blank nodes; literal-valued triples are ignored."""
        g = cls()
        for t in triples:
            if is_node(t.object):
                g.add_edge(t.subject, t.object)
        return g

    @property
    def nodes(self) -> set:
        return set(self.out_adjacency)

    def add_node(self, n):
        self.out_adjacency.setdefault(n, set())

    def add_edge(self, u, v):
        self.add_node(u)
        self.add_node(v)
        self.out_adjacency[u].add(v)

    def edges(self) -> list[tuple]:
        return sorted((u, v) for u, vs in self.out_adjacency.items() for v in vs)

    def __len__(self):
        return len(self.out_adjacency)

    def undirected(self) -> dict[Hashable, set]:
        adj = {n: set() for n in self.out_adjacency}
        for u, vs in self.out_adjacency.items():
            for v in vs:
                if u != v:
                    adj[u].add(v)
                    adj[v].add(u)
        return adj


def subgraph_included(kg1: Iterable[Triple], kg2: Iterable[Triple]) -> bool:
    """True iff every triple of ``kg1`` is also in ``kg2`` (covers nodes and edges)."""
    return frozenset(kg1) <= frozenset(kg2)


def degree_stats(g: DirectedGraph) -> tuple[dict, dict[int, int]]:
    """Per-node in/out degree with ratio ``n_in / (n_out + 1)``, and a degree histogram.

    The histogram counts nodes by number of distinct neighbours, ignoring
    direction.
    """
    n_in = Counter()
    for u, vs in g.out_adjacency.items():
        for v in vs:
            n_in[v] += 1
    per_node = {}
    for n, vs in g.out_adjacency.items():
        i, o = n_in[n], len(vs)
        per_node[n] = {"n_in": i, "n_out": o, "ratio": i / (o + 1)}
    und = g.undirected()
    hist = Counter(len(nbrs) for nbrs in und.values())
    return per_node, dict(sorted(hist.items()))


# -------------------------------------------------------------------- distances


def _bfs(adj: dict, source) -> dict:
    dist = {source: 0}
    queue = deque([source])
    while queue:
        v = queue.popleft()
        for w in adj[v]:
            if w not in dist:
                dist[w] = dist[v] + 1
                queue.append(w)
    return dist


def eccentricity(g: DirectedGraph, v) -> int:
    """Largest undirected distance from ``v`` within its connected component."""
    if v not in g.out_adjacency:
        raise KeyError(v)
    return max(_bfs(g.undirected(), v).values())


def largest_component(g: DirectedGraph) -> list:
    adj = g.undirected()
    seen: set = set()
    best: list = []
    for start in sorted(adj):
        if start in seen:
            continue
        comp = _bfs(adj, start)
        seen.update(comp)
        if len(comp) > len(best):
            best = sorted(comp)
    return best


def _component_eccentricities(g: DirectedGraph) -> dict:
    if not g.out_adjacency:
        raise EmptyGraph("graph has no nodes")
    adj = g.undirected()
    return {v: max(_bfs(adj, v).values()) for v in largest_component(g)}


def radius(g: DirectedGraph) -> int:
    return min(_component_eccentricities(g).values())


def diameter(g: DirectedGraph) -> int:
    return max(_component_eccentricities(g).values())


# ------------------------------------------------------------------ centrality


def _adjacency_matrix(g: DirectedGraph) -> tuple[list, np.ndarray]:
    nodes = sorted(g.out_adjacency)
    index = {n: i for i, n in enumerate(nodes)}
    A = np.zeros((len(nodes), len(nodes)))
    for u, vs in g.out_adjacency.items():
        for v in vs:
            A[index[u], index[v]] = 1.0
    return nodes, A


def pagerank(g: DirectedGraph, damping: float = 0.85, tol: float = 1e-10,
             max_iter: int = 200) -> dict:
    """PageRank by power iteration; dangling mass is spread uniformly."""
    damping = check_interval(damping, "damping", 0.0, 1.0)
    nodes, A = _adjacency_matrix(g)
    n = len(nodes)
    if n == 0:
        return {}
    out_deg = A.sum(axis=1)
    dangling = out_deg == 0
    P = np.divide(A, out_deg[:, None], out=np.zeros_like(A), where=~dangling[:, None])
    x = np.full(n, 1.0 / n)
    residual = np.inf
    for _ in range(max_iter):
        new = damping * (x @ P + x[dangling].sum() / n) + (1.0 - damping) / n
        new /= new.sum()
        residual = np.abs(new - x).sum()
        x = new
        if residual < tol:
            return dict(zip(nodes, x.tolist()))
    raise NotConverged(f"pagerank did not converge in {max_iter} iterations", residual)


def hits(g: DirectedGraph, tol: float = 1e-10, max_iter: int = 200) -> tuple[dict, dict]:
    """Hub and authority scores, each L2-normalized; all zeros for an edgeless graph."""
    nodes, A = _adjacency_matrix(g)
    n = len(nodes)
    if n == 0:
        return {}, {}
    if not A.any():
        zeros = dict.fromkeys(nodes, 0.0)
        return zeros, dict(zeros)
    h = np.full(n, 1.0 / np.sqrt(n))
    a = np.zeros(n)
    residual = np.inf
    for _ in range(max_iter):
        a_new = A.T @ h
        a_new /= np.linalg.norm(a_new)
        h_new = A @ a_new
        h_new /= np.linalg.norm(h_new)
        residual = max(np.abs(a_new - a).sum(), np.abs(h_new - h).sum())
        a, h = a_new, h_new
        if residual < tol:
            return dict(zip(nodes, h.tolist())), dict(zip(nodes, a.tolist()))
    raise NotConverged(f"hits did not converge in {max_iter} iterations", residual)


def metrics_report(snapshot: Iterable[Triple], damping: float = 0.85, tol: float = 1e-10,
                   max_iter: int = 200) -> dict:
    """All structural measures of one snapshot, keyed by node strings."""
    g = DirectedGraph.from_triples(snapshot)
    per_node, hist = degree_stats(g)
    hub, auth = hits(g, tol, max_iter)
    pr = pagerank(g, damping, tol, max_iter)
    report = {
        "nodes": len(g),
        "edges": len(g.edges()),
        "radius": radius(g) if len(g) else None,
        "diameter": diameter(g) if len(g) else None,
        "pagerank": {str(n): s for n, s in sorted(pr.items())},
        "hits": {
            "hub": {str(n): s for n, s in sorted(hub.items())},
            "authority": {str(n): s for n, s in sorted(auth.items())},
        },
        "degree": {str(n): d for n, d in sorted(per_node.items())},
        "degree_histogram": [[k, c] for k, c in hist.items()],
    }
    return report


class GraphMetrics(BaseEstimator):
    """Fit computes every structural measure of a snapshot.

    Attributes
    ----------
    graph_, pagerank_, hub_, authority_, degrees_, degree_histogram_,
    radius_, diameter_
    """

    def __init__(self, damping=0.85, tol=1e-10, max_iter=200):
        self.damping = damping
        self.tol = tol
        self.max_iter = max_iter

    def fit(self, X, y=None):
        self.graph_ = DirectedGraph.from_triples(check_snapshot(X))
        self.pagerank_ = pagerank(self.graph_, self.damping, self.tol, self.max_iter)
        self.hub_, self.authority_ = hits(self.graph_, self.tol, self.max_iter)
        self.degrees_, self.degree_histogram_ = degree_stats(self.graph_)
        if len(self.graph_):
            self.radius_, self.diameter_ = radius(self.graph_), diameter(self.graph_)
        else:
            self.radius_ = self.diameter_ = None
        return self
