"""Girvan–Newman community detection over the undirected projection of a snapshot."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Hashable, Iterable

from sklearn.base import BaseEstimator

from ._validation import check_snapshot
from .rdf import RDF_TYPE, Iri, Triple, is_node

# relative tolerance when comparing betweenness values for ties
_TIE_RTOL = 1e-9


class UndirectedGraph:
    """Simple undirected graph: symmetric adjacency sets, no self-loops."""

    def __init__(self, nodes: Iterable[Hashable] = (), edges: Iterable[tuple] = ()):
        self.adjacency: dict[Hashable, set] = {}
        for n in nodes:
            self.add_node(n)
        for u, v in edges:
            self.add_edge(u, v)

    @property
    def nodes(self) -> set:
        return set(self.adjacency)

    def add_node(self, n):
        self.adjacency.setdefault(n, set())

    def add_edge(self, u, v):
        self.add_node(u)
        self.add_node(v)
        if u != v:
            self.adjacency[u].add(v)
            self.adjacency[v].add(u)

    def remove_edge(self, u, v):
        self.adjacency[u].discard(v)
        self.adjacency[v].discard(u)

    def has_edge(self, u, v) -> bool:
        return v in self.adjacency.get(u, ())

    def degree(self, n) -> int:
        return len(self.adjacency[n])

    def edges(self) -> list[tuple]:
        """Each edge once as ``(u, v)`` with ``u < v``, sorted."""
        return sorted((u, v) for u, nbrs in self.adjacency.items() for v in nbrs if u < v)

    def number_of_edges(self) -> int:
        return sum(len(n) for n in self.adjacency.values()) // 2

    def __len__(self):
        return len(self.adjacency)

    def copy(self) -> UndirectedGraph:
        g = UndirectedGraph()
        g.adjacency = {n: set(nbrs) for n, nbrs in self.adjacency.items()}
        return g

    def subgraph(self, nodes: Iterable) -> UndirectedGraph:
        keep = set(nodes) & set(self.adjacency)
        g = UndirectedGraph()
        g.adjacency = {n: self.adjacency[n] & keep for n in keep}
        return g

    def connected_components(self) -> list[frozenset]:
        seen: set = set()
        comps = []
        for start in sorted(self.adjacency):
            if start in seen:
                continue
            comp = {start}
            queue = deque([start])
            while queue:
                v = queue.popleft()
                for w in self.adjacency[v]:
                    if w not in comp:
                        comp.add(w)
                        queue.append(w)
            seen |= comp
            comps.append(frozenset(comp))
        return comps


def project(snapshot: Iterable[Triple], predicates: Iterable[str] | None = None,
            include_types: bool = False, type_predicate: str = RDF_TYPE) -> UndirectedGraph:
    """Undirected simple graph over the IRI/blank-node terms of ``snapshot``.

    Literal objects contribute their subject as a node but no edge. ``rdf:type``
    triples are skipped unless ``include_types``; ``predicates`` restricts the
    projection to an allow-list of predicate IRIs.
    """
    allow = None if predicates is None else {p.value if isinstance(p, Iri) else p for p in predicates}
    g = UndirectedGraph()
    for t in snapshot:
        p = t.predicate.value
        if allow is not None and p not in allow:
            continue
        if p == type_predicate and not include_types:
            continue
        g.add_node(t.subject)
        if is_node(t.object):
            g.add_edge(t.subject, t.object)
    return g


# ---------------------------------------------------------------- betweenness


def _accumulate(adj: list[set[int]], sources: Iterable[int], eb: dict[tuple[int, int], float]):
    # Brandes: one BFS per source, dependencies pushed back onto edges
    for s in sources:
        dist = {s: 0}
        sigma = {s: 1}
        preds: dict[int, list[int]] = {s: []}
        order = []
        queue = deque([s])
        while queue:
            v = queue.popleft()
            order.append(v)
            dv, sv = dist[v] + 1, sigma[v]
            for w in adj[v]:
                dw = dist.get(w)
                if dw is None:
                    dist[w] = dv
                    sigma[w] = 0
                    preds[w] = []
                    queue.append(w)
                    dw = dv
                if dw == dv:
                    sigma[w] += sv
                    preds[w].append(v)
        delta = dict.fromkeys(order, 0.0)
        for w in reversed(order):
            coeff = (1.0 + delta[w]) / sigma[w]
            for v in preds[w]:
                c = sigma[v] * coeff
                eb[(v, w) if v < w else (w, v)] += c
                delta[v] += c


def _indexed(g: UndirectedGraph) -> tuple[list, list[set[int]]]:
    nodes = sorted(g.adjacency)
    index = {n: i for i, n in enumerate(nodes)}
    adj = [{index[w] for w in g.adjacency[n]} for n in nodes]
    return nodes, adj


def _edge_betweenness_indexed(adj: list[set[int]], sources: Iterable[int]) -> dict[tuple[int, int], float]:
    eb = {(u, v): 0.0 for u in sources for v in adj[u] if u < v}
    _accumulate(adj, sources, eb)
    for e in eb:
        eb[e] /= 2.0
    return eb


def edge_betweenness(g: UndirectedGraph) -> dict[tuple, float]:
    """Exact shortest-path edge betweenness, each unordered node pair counted once."""
    nodes, adj = _indexed(g)
    eb = _edge_betweenness_indexed(adj, range(len(nodes)))
    return {(nodes[u], nodes[v]): val for (u, v), val in eb.items()}


# ------------------------------------------------------------------ modularity


def modularity(g: UndirectedGraph, partition: Iterable[Iterable]) -> float:
    """Newman modularity; 0 for a graph without edges."""
    m = g.number_of_edges()
    membership = {}
    for k, comm in enumerate(partition):
        for n in comm:
            if n in membership:
                raise ValueError(f"node {n!r} assigned to two communities")
            membership[n] = k
    missing = set(g.adjacency) - set(membership)
    if missing:
        raise ValueError(f"partition does not cover {len(missing)} node(s)")
    if m == 0:
        return 0.0
    internal: dict[int, int] = {}
    degree: dict[int, int] = {}
    for n, nbrs in g.adjacency.items():
        k = membership[n]
        degree[k] = degree.get(k, 0) + len(nbrs)
        internal[k] = internal.get(k, 0) + sum(1 for w in nbrs if membership[w] == k)
    q = 0.0
    for k, d in degree.items():
        q += internal.get(k, 0) / 2 / m - (d / (2 * m)) ** 2
    return q


# ---------------------------------------------------------------- Girvan–Newman


def _component(adj: list[set[int]], start: int) -> set[int]:
    comp = {start}
    queue = deque([start])
    while queue:
        v = queue.popleft()
        for w in adj[v]:
            if w not in comp:
                comp.add(w)
                queue.append(w)
    return comp


def _components(adj: list[set[int]]) -> list[frozenset[int]]:
    seen: set[int] = set()
    out = []
    for s in range(len(adj)):
        if s not in seen:
            comp = _component(adj, s)
            seen |= comp
            out.append(frozenset(comp))
    return out


def _pick_edge(eb: dict[tuple[int, int], float]) -> tuple[int, int]:
    top = max(eb.values())
    cutoff = top - _TIE_RTOL * max(1.0, abs(top))
    return min(e for e, val in eb.items() if val >= cutoff)


def detect_communities(g: UndirectedGraph) -> tuple[list[frozenset], list[list[frozenset]]]:
    """Run Girvan–Newman to exhaustion and keep the most modular level.

    Returns ``(partition, dendrogram)``. The dendrogram lists the component
    partition at the start and after every edge removal that increased the
    number of components. The max-betweenness edge is removed each round,
    ties going to the smallest ``(u, v)`` in node order; the chosen level is
    the first one reaching the maximal modularity.
    """
    if not g.adjacency:
        return [], []
    nodes, adj = _indexed(g)
    work = [set(a) for a in adj]
    levels = [_components(work)]
    eb = _edge_betweenness_indexed(work, range(len(nodes)))
    n_comps = len(levels[0])
    while eb:
        u, v = _pick_edge(eb)
        affected = _component(work, u)
        work[u].discard(v)
        work[v].discard(u)
        for e in [e for e in eb if e[0] in affected]:
            del eb[e]
        eb.update(_edge_betweenness_indexed(work, sorted(affected)))
        if v not in _component(work, u):
            n_comps += 1
            levels.append(_components(work))
    best, best_q = 0, None
    for i, level in enumerate(levels):
        q = modularity(g, ([nodes[k] for k in c] for c in level))
        if best_q is None or q > best_q + 1e-12:
            best, best_q = i, q
    dendrogram = [_relabel(level, nodes) for level in levels]
    return dendrogram[best], dendrogram


def _relabel(level: list[frozenset[int]], nodes: list) -> list[frozenset]:
    ordered = sorted(level, key=min)
    return [frozenset(nodes[k] for k in c) for c in ordered]


# ------------------------------------------------------------------ communities


@dataclass(frozen=True)
class Community:
    id: int
    nodes: frozenset
    triples: frozenset[Triple]

    def as_dict(self) -> dict:
        return {"community": self.id, "nodes": [str(n) for n in sorted(self.nodes)]}


def build_communities(partition: Iterable[Iterable], snapshot: Iterable[Triple]) -> list[Community]:
    """Attach to every node set the snapshot triples induced by it."""
    parts = [frozenset(c) for c in partition]
    member = {n: k for k, c in enumerate(parts) for n in c}
    induced: list[set[Triple]] = [set() for _ in parts]
    for t in snapshot:
        k = member.get(t.subject)
        if k is not None and is_node(t.object) and member.get(t.object) == k:
            induced[k].add(t)
    return [Community(k, c, frozenset(induced[k])) for k, c in enumerate(parts)]


class GirvanNewman(BaseEstimator):
    """Girvan–Newman community detection as an estimator.

    ``fit`` accepts either a snapshot (iterable of triples), which is first
    projected to an undirected graph, or an :class:`UndirectedGraph`.

    Attributes
    ----------
    graph_ : UndirectedGraph
    partition_ : list of frozenset
    dendrogram_ : list of list of frozenset
    modularity_ : float
    labels_ : dict mapping node to community id
    communities_ : list of Community, only when fitted on a snapshot
    """

    def __init__(self, predicates=None, include_types=False):
        self.predicates = predicates
        self.include_types = include_types

    def fit(self, X, y=None):
        if isinstance(X, UndirectedGraph):
            self.graph_ = X
            snapshot = None
        else:
            snapshot = check_snapshot(X)
            self.graph_ = project(snapshot, self.predicates, self.include_types)
        self.partition_, self.dendrogram_ = detect_communities(self.graph_)
        self.modularity_ = modularity(self.graph_, self.partition_)
        self.labels_ = {n: k for k, c in enumerate(self.partition_) for n in c}
        if snapshot is not None:
            self.communities_ = build_communities(self.partition_, snapshot)
        return self

    def fit_predict(self, X, y=None):
        return self.fit(X).labels_
