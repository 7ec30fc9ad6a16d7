"""Versioned RDF snapshot storage and knowledge-graph evolution analytics."""

__version__ = "0.1.0"

from .community import GirvanNewman, UndirectedGraph, detect_communities, edge_betweenness, modularity, project
from .embeddings import EmbeddingModel, TransE, matetee_sim, node_sim, semantic_sim, train_transe
from .events import EventConfig, EvolutionEvent, classify_events, iou
from .metrics import DirectedGraph, GraphMetrics, hits, pagerank
from .perturb import PerturbConfig, controlled_series, perturb
from .rdf import BlankNode, Dictionary, Iri, Literal, Triple, canonical_serialize, parse_ntriples, read_ntriples
from .stats import NoteworthyDetector, describe_evolution, extract_features, flag_noteworthy, local_noteworthy
from .store import ChangeSet, SnapshotMeta, VersionStore, version_id

__all__ = [
    "BlankNode", "ChangeSet", "Dictionary", "DirectedGraph", "EmbeddingModel", "EventConfig",
    "EvolutionEvent", "GirvanNewman", "GraphMetrics", "Iri", "Literal", "NoteworthyDetector",
    "PerturbConfig", "SnapshotMeta", "TransE", "Triple", "UndirectedGraph", "VersionStore",
    "canonical_serialize", "classify_events", "controlled_series", "describe_evolution",
    "detect_communities", "edge_betweenness", "extract_features", "flag_noteworthy", "hits", "iou",
    "local_noteworthy", "matetee_sim", "modularity", "node_sim", "pagerank", "parse_ntriples",
    "perturb", "project", "read_ntriples", "semantic_sim", "train_transe", "version_id",
]
