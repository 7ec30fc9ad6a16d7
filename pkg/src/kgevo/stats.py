"""Per-resource change features, expected-evolution statistics and noteworthy flagging."""

from __future__ import annotations

import json
import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._validation import check_interval
from .community import project
from .exceptions import EmptyInput, InvalidTheta
from .rdf import RDF_TYPE, Iri, Node, Triple, is_node
from .store import ChangeSet

ADDED = "added"
DELETED = "deleted"
FAMILIES = ("type", "prop", "typeprop")


@dataclass(frozen=True, order=True)
class TypeCount:
    cls: str
    sign: str

    def label(self) -> str:
        return f"type:{self.sign}:{self.cls}"


@dataclass(frozen=True, order=True)
class PropCount:
    prop: str
    sign: str

    def label(self) -> str:
        return f"prop:{self.sign}:{self.prop}"


@dataclass(frozen=True, order=True)
class TypePropCount:
    cls: str
    prop: str
    sign: str

    def label(self) -> str:
        return f"typeprop:{self.sign}:{self.cls}|{self.prop}"


FeatureKey = TypeCount | PropCount | TypePropCount


def _key_order(key) -> tuple:
    return (type(key).__name__, key.label())


@dataclass
class FeatureVector:
    resource: Node
    counts: dict = field(default_factory=dict)

    def get(self, key) -> int:
        return self.counts.get(key, 0)


@dataclass(frozen=True)
class KeyStats:
    mean: float
    variance: float
    support: int


EvolutionDescription = dict  # FeatureKey -> KeyStats


@dataclass(frozen=True)
class Trigger:
    key: FeatureKey
    delta: float
    mean: float
    variance: float
    p: float


@dataclass(frozen=True)
class NoteworthyReport:
    resource: Node
    triggers: tuple[Trigger, ...]
    threshold: float

    def json_lines(self, **extra) -> list[str]:
        out = []
        for t in self.triggers:
            rec = {
                "resource": str(self.resource),
                "key": t.key.label(),
                "delta": t.delta,
                "mu": t.mean,
                "sigma2": t.variance,
                "p": t.p,
            }
            rec.update(extra)
            out.append(json.dumps(rec, ensure_ascii=False))
        return out


def type_index(snapshot: Iterable[Triple], type_predicate: str = RDF_TYPE) -> dict[Node, set[str]]:
    """Map every typed resource to the IRIs of its classes."""
    index: dict[Node, set[str]] = defaultdict(set)
    for t in snapshot:
        if t.predicate.value == type_predicate and isinstance(t.object, Iri):
            index[t.subject].add(t.object.value)
    return dict(index)


def extract_features(cs: ChangeSet, types: Mapping[Node, Iterable[str]],
                     families: Iterable[str] = FAMILIES,
                     type_predicate: str = RDF_TYPE) -> list[FeatureVector]:
    """One feature vector per subject of the changeset's updates.

    ``types`` is the type index of the older snapshot.
    """
    families = set(families)
    unknown = families - set(FAMILIES)
    if unknown:
        raise ValueError(f"unknown feature families: {sorted(unknown)}")
    vectors: dict[Node, FeatureVector] = {}
    for sign, triples in ((ADDED, cs.added), (DELETED, cs.deleted)):
        for t in triples:
            vec = vectors.get(t.subject)
            if vec is None:
                vec = vectors[t.subject] = FeatureVector(t.subject)
            counts = vec.counts
            p = t.predicate.value
            if "prop" in families:
                k = PropCount(p, sign)
                counts[k] = counts.get(k, 0) + 1
            if "type" in families and p == type_predicate and isinstance(t.object, Iri):
                k = TypeCount(t.object.value, sign)
                counts[k] = counts.get(k, 0) + 1
            if "typeprop" in families:
                for cls in types.get(t.subject, ()):
                    k = TypePropCount(cls, p, sign)
                    counts[k] = counts.get(k, 0) + 1
    return [vectors[r] for r in sorted(vectors)]


def describe_evolution(vectors: Iterable[FeatureVector]) -> EvolutionDescription:
    """Mean and population variance of each feature over all resources.

    A resource lacking a feature contributes a count of 0.
    """
    vectors = list(vectors)
    if not vectors:
        raise EmptyInput("describe_evolution needs at least one feature vector")
    n = len(vectors)
    keys = sorted({k for v in vectors for k in v.counts}, key=_key_order)
    desc = {}
    for k in keys:
        values = [v.counts.get(k, 0) for v in vectors]
        mean = math.fsum(values) / n
        var = math.fsum((x - mean) ** 2 for x in values) / n
        desc[k] = KeyStats(mean, var, n)
    return desc


def tail_probability(delta: float, mean: float, variance: float) -> float:
    """Two-sided Gaussian tail P(|Z| >= |z|); degenerate variance gives 0 or 1."""
    if variance <= 0.0:
        return 1.0 if delta == mean else 0.0
    z = (delta - mean) / math.sqrt(variance)
    return math.erfc(abs(z) / math.sqrt(2.0))


def _check_theta(theta) -> float:
    return check_interval(theta, "theta", 0.0, 1.0, exc=InvalidTheta)


def flag_noteworthy(vectors: Iterable[FeatureVector], desc: EvolutionDescription,
                    theta: float) -> list[NoteworthyReport]:
    theta = _check_theta(theta)
    reports = []
    for vec in vectors:
        triggers = []
        for key, st in desc.items():
            delta = vec.counts.get(key, 0)
            p = tail_probability(delta, st.mean, st.variance)
            if p < theta:
                triggers.append(Trigger(key, delta, st.mean, st.variance, p))
        if triggers:
            reports.append(NoteworthyReport(vec.resource, tuple(triggers), theta))
    return reports


def local_noteworthy(vectors: Iterable[FeatureVector], communities: Iterable[Iterable[Node]] | Mapping,
                     theta: float) -> dict[int, list[NoteworthyReport]]:
    """Flag resources against the statistics of their own community.

    ``communities`` is a sequence of node sets (ids are positions) or a
    mapping from community id to node set. Unassigned resources are skipped.
    """
    theta = _check_theta(theta)
    if isinstance(communities, Mapping):
        items = list(communities.items())
    else:
        items = list(enumerate(communities))
    member = {}
    for cid, nodes in items:
        for n in nodes:
            member[n] = cid
    grouped: dict = {cid: [] for cid, _ in items}
    for vec in vectors:
        cid = member.get(vec.resource)
        if cid is not None:
            grouped[cid].append(vec)
    out = {}
    for cid, group in grouped.items():
        if not group:
            out[cid] = []
            continue
        out[cid] = flag_noteworthy(group, describe_evolution(group), theta)
    return out


def community_features(community, snapshot: Iterable[Triple]) -> dict:
    """Density and size of a community over the undirected projection of ``snapshot``."""
    nodes = frozenset(getattr(community, "nodes", community))
    g = project(snapshot).subgraph(nodes)
    node_count = len(nodes)
    edge_count = g.number_of_edges()
    internal = sum(1 for t in snapshot
                   if t.subject in nodes and is_node(t.object) and t.object in nodes)
    density = 0.0 if node_count < 2 else edge_count / (node_count * (node_count - 1) / 2)
    return {
        "density": density,
        "node_count": node_count,
        "edge_count": edge_count,
        "internal_triple_count": internal,
    }


class NoteworthyDetector(BaseEstimator):
    """Learn the expected evolution from feature vectors, then flag outliers.

    Parameters
    ----------
    theta : float
        Sensitivity threshold in (0, 1) on the two-sided tail probability.
    """

    def __init__(self, theta=0.05):
        self.theta = theta

    def fit(self, X, y=None):
        _check_theta(self.theta)
        self.description_ = describe_evolution(X)
        return self

    def predict(self, X):
        check_is_fitted(self, "description_")
        return flag_noteworthy(X, self.description_, self.theta)

    def fit_predict(self, X, y=None):
        X = list(X)
        return self.fit(X).predict(X)

    def transform(self, X):
        """Minimum tail probability per resource over all fitted features."""
        check_is_fitted(self, "description_")
        out = []
        for vec in X:
            ps = [tail_probability(vec.counts.get(k, 0), st.mean, st.variance)
                  for k, st in self.description_.items()]
            out.append(min(ps) if ps else 1.0)
        return out
