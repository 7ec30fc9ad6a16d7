"""TransE embeddings and embedding-based similarity between KG versions."""

from __future__ import annotations

import csv
import io
import json
import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._validation import check_positive_int, check_snapshot
from .exceptions import EmptySnapshot, NoTrainableTriples, UnknownEntity
from .rdf import BlankNode, Iri, Node, Triple, is_node


def entity_key(node: Node) -> str:
    return node.value if isinstance(node, Iri) else node.n3()


def entity_from_key(key: str) -> Node:
    return BlankNode(key[2:]) if key.startswith("_:") else Iri(key)


@dataclass
class EmbeddingModel:
    dim: int
    seed: int
    entities: dict[Node, np.ndarray] = field(default_factory=dict)
    relations: dict[str, np.ndarray] = field(default_factory=dict)

    def __contains__(self, node) -> bool:
        return node in self.entities

    def vector(self, node: Node) -> np.ndarray:
        try:
            return self.entities[node]
        except KeyError:
            raise UnknownEntity(str(node)) from None

    def to_dict(self) -> dict:
        return {
            "dim": self.dim,
            "seed": self.seed,
            "entities": {entity_key(n): v.tolist() for n, v in sorted(self.entities.items())},
            "relations": {r: v.tolist() for r, v in sorted(self.relations.items())},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict()) + "\n"

    @classmethod
    def from_dict(cls, d: dict) -> EmbeddingModel:
        return cls(
            int(d["dim"]),
            int(d["seed"]),
            {entity_from_key(k): np.asarray(v, dtype=float) for k, v in d["entities"].items()},
            {k: np.asarray(v, dtype=float) for k, v in d["relations"].items()},
        )

    @classmethod
    def from_json(cls, text: str | bytes) -> EmbeddingModel:
        return cls.from_dict(json.loads(text))


def _normalize_rows(M: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(M, axis=1, keepdims=True)
    norms[norms == 0] = 1.0
    return M / norms


class TransE(BaseEstimator):
    """Translational embeddings trained with a margin ranking loss.

    Plain SGD over shuffled positives, one corrupted head or tail per
    positive, L2 distance. Entity vectors are renormalized to unit length
    after every epoch. Training is fully determined by ``seed``.

    Attributes
    ----------
    model_ : EmbeddingModel
    loss_trace_ : list of float
        Mean hinge loss of each epoch.
    """

    def __init__(self, dim=50, margin=1.0, learning_rate=0.01, epochs=100, seed=0):
        self.dim = dim
        self.margin = margin
        self.learning_rate = learning_rate
        self.epochs = epochs
        self.seed = seed

    def fit(self, X, y=None):
        dim = check_positive_int(self.dim, "dim")
        if dim < 2:
            raise ValueError("dim must be >= 2")
        epochs = check_positive_int(self.epochs, "epochs", allow_zero=True)
        triples = sorted(t for t in check_snapshot(X) if is_node(t.object))
        if not triples:
            raise NoTrainableTriples("no triple with an IRI or blank-node object")
        entities = sorted({t.subject for t in triples} | {t.object for t in triples})
        relations = sorted({t.predicate.value for t in triples})
        e_idx = {e: i for i, e in enumerate(entities)}
        r_idx = {r: i for i, r in enumerate(relations)}
        data = np.array([(e_idx[t.subject], r_idx[t.predicate.value], e_idx[t.object]) for t in triples])

        rng = np.random.default_rng(self.seed)
        bound = 6.0 / math.sqrt(dim)
        E = _normalize_rows(rng.uniform(-bound, bound, (len(entities), dim)))
        R = _normalize_rows(rng.uniform(-bound, bound, (len(relations), dim)))
        n_ent = len(entities)
        lr, margin = float(self.learning_rate), float(self.margin)
        trace = []
        for _ in range(epochs):
            total = 0.0
            for h, r, t in data[rng.permutation(len(data))]:
                h2, t2 = h, t
                corrupt_head = rng.random() < 0.5
                if n_ent > 1:
                    repl = int(rng.integers(n_ent - 1))
                    original = h if corrupt_head else t
                    repl += repl >= original  # uniform over entities other than the original
                    if corrupt_head:
                        h2 = repl
                    else:
                        t2 = repl
                pos = E[h] + R[r] - E[t]
                neg = E[h2] + R[r] - E[t2]
                d_pos, d_neg = np.linalg.norm(pos), np.linalg.norm(neg)
                loss = margin + d_pos - d_neg
                if loss <= 0.0:
                    continue
                total += loss
                g_pos = pos / d_pos if d_pos > 0 else np.zeros(dim)
                g_neg = neg / d_neg if d_neg > 0 else np.zeros(dim)
                E[h] -= lr * g_pos
                E[t] += lr * g_pos
                R[r] -= lr * (g_pos - g_neg)
                E[h2] += lr * g_neg
                E[t2] -= lr * g_neg
            E = _normalize_rows(E)
            trace.append(total / len(data))
        self.model_ = EmbeddingModel(
            dim, int(self.seed),
            {e: E[i].copy() for i, e in enumerate(entities)},
            {r: R[i].copy() for i, r in enumerate(relations)},
        )
        self.loss_trace_ = trace
        return self

    def transform(self, X):
        """Stack the vectors of the given entities into an array."""
        check_is_fitted(self, "model_")
        return np.vstack([self.model_.vector(n) for n in X])

    def distance(self, triple: Triple) -> float:
        check_is_fitted(self, "model_")
        m = self.model_
        try:
            r = m.relations[triple.predicate.value]
        except KeyError:
            raise UnknownEntity(triple.predicate.value) from None
        return float(np.linalg.norm(m.vector(triple.subject) + r - m.vector(triple.object)))


def train_transe(triples: Iterable[Triple], dim: int = 50, margin: float = 1.0,
                 learning_rate: float = 0.01, epochs: int = 100, seed: int = 0) -> tuple[EmbeddingModel, list[float]]:
    est = TransE(dim, margin, learning_rate, epochs, seed).fit(triples)
    return est.model_, est.loss_trace_


def loss_trace_csv(trace: Iterable[float]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["epoch", "mean_loss"])
    for i, v in enumerate(trace, start=1):
        w.writerow([i, repr(float(v))])
    return buf.getvalue()


# ------------------------------------------------------------------ similarity


def _aggregate(nodes: Iterable[Node], model: EmbeddingModel) -> np.ndarray | None:
    vecs = [model.entities[n] for n in nodes if n in model.entities]
    if not vecs:
        return None
    return np.mean(vecs, axis=0)


def node_sim(n: Node, neigh_v1: Iterable[Node], neigh_v2: Iterable[Node], model: EmbeddingModel) -> float:
    """Cosine similarity of the mean embeddings of a node's two neighbourhoods.

    0 when either neighbourhood has no embedded member.
    """
    a, b = _aggregate(neigh_v1, model), _aggregate(neigh_v2, model)
    if a is None or b is None:
        return 0.0
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        return 0.0
    return float(np.dot(a, b) / (na * nb))


def neighborhoods(snapshot: Iterable[Triple]) -> dict[Node, set[Node]]:
    """Directly connected IRI/blank nodes of every node, in either direction."""
    out: dict[Node, set[Node]] = defaultdict(set)
    for t in snapshot:
        if is_node(t.object) and t.subject != t.object:
            out[t.subject].add(t.object)
            out[t.object].add(t.subject)
    return out


@dataclass(frozen=True)
class SemanticSimReport:
    per_node: Mapping[Node, float]
    aggregate: float

    def as_dict(self) -> dict:
        return {
            "aggregate": self.aggregate,
            "nodes": {str(n): s for n, s in sorted(self.per_node.items())},
        }


def semantic_sim(v1: Iterable[Triple], v2: Iterable[Triple], model: EmbeddingModel) -> SemanticSimReport:
    """Average node similarity over every node of ``v1``."""
    n1, n2 = neighborhoods(v1), neighborhoods(v2)
    if not n1:
        raise EmptySnapshot("v1 has no nodes linked by non-literal triples")
    per_node = {n: node_sim(n, n1[n], n2.get(n, ()), model) for n in sorted(n1)}
    return SemanticSimReport(per_node, math.fsum(per_node.values()) / len(per_node))


def matetee_sim(a: Node, b: Node, model: EmbeddingModel) -> float:
    """``1 / (1 + ||A - B||)`` over the two entity embeddings."""
    va, vb = model.vector(a), model.vector(b)
    return 1.0 / (1.0 + float(np.linalg.norm(va - vb)))
