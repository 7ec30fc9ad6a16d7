"""Cross-ontology evolution measures and per-version schema counts."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from datetime import datetime, timedelta
from typing import Iterable, Sequence

from .exceptions import UndefinedDependency
from .rdf import OWL, RDF, RDF_TYPE, RDFS, Iri, Literal, Triple, is_node
from .store import ChangeSet, format_timestamp, parse_timestamp

DCT_MODIFIED = "http://purl.org/dc/terms/modified"
SUBCLASS_OF = RDFS + "subClassOf"
CLASS_TYPES = frozenset({OWL + "Class", RDFS + "Class"})
PROPERTY_TYPES = frozenset({
    RDF + "Property",
    OWL + "ObjectProperty",
    OWL + "DatatypeProperty",
    OWL + "AnnotationProperty",
    OWL + "FunctionalProperty",
    OWL + "InverseFunctionalProperty",
    OWL + "TransitiveProperty",
    OWL + "SymmetricProperty",
    OWL + "AsymmetricProperty",
    OWL + "ReflexiveProperty",
    OWL + "IrreflexiveProperty",
    OWL + "OntologyProperty",
})
# rdf:type objects that describe schema elements rather than instances
META_TYPES = CLASS_TYPES | PROPERTY_TYPES | frozenset({
    OWL + "Ontology",
    OWL + "NamedIndividual",
    OWL + "Restriction",
    OWL + "AllDisjointClasses",
    OWL + "AllDifferent",
    RDFS + "Datatype",
})
BUILTIN_NAMESPACES = (RDF, RDFS, OWL)
DEFAULT_THRESHOLD = timedelta(days=7)


def touched_terms(cs: ChangeSet) -> frozenset[str]:
    """Subjects, predicates and non-literal objects of every changed triple."""
    out = set()
    for t in cs.updates:
        out.add(str(t.subject) if not isinstance(t.subject, Iri) else t.subject.value)
        out.add(t.predicate.value)
        if isinstance(t.object, Iri):
            out.add(t.object.value)
        elif is_node(t.object):
            out.add(str(t.object))
    return frozenset(out)


@dataclass(frozen=True)
class OntologyChange:
    ontology: str
    timestamp: datetime
    changes: ChangeSet = field(default_factory=ChangeSet)

    def __post_init__(self):
        object.__setattr__(self, "timestamp", parse_timestamp(self.timestamp))

    @property
    def touched_terms(self) -> frozenset[str]:
        return touched_terms(self.changes)


@dataclass(frozen=True)
class SyncResult:
    es_seconds: float
    threshold_seconds: float
    synchronized: bool
    aligned_terms: frozenset[str] = frozenset()


@dataclass(frozen=True)
class DependencyResult:
    externally_induced: int
    ontology_specific: int
    ed: float


def _seconds(threshold) -> float:
    if isinstance(threshold, timedelta):
        return threshold.total_seconds()
    return float(threshold)


def _strip_builtins(terms: frozenset[str], ignore_builtins: bool) -> frozenset[str]:
    if not ignore_builtins:
        return terms
    return frozenset(t for t in terms if not t.startswith(BUILTIN_NAMESPACES))


def change_alignment(c1: OntologyChange, c2: OntologyChange, ignore_builtins: bool = False) -> frozenset[str]:
    """Terms touched by both changes.

    ``ignore_builtins`` drops RDF/RDFS/OWL vocabulary, which nearly every
    schema change touches.
    """
    return _strip_builtins(c1.touched_terms & c2.touched_terms, ignore_builtins)


def evolutionary_sync(c1: OntologyChange, c2: OntologyChange, threshold=DEFAULT_THRESHOLD,
                      ignore_builtins: bool = False) -> SyncResult:
    """Absolute time gap between two changes, compared against ``threshold``."""
    t = _seconds(threshold)
    es = abs((c1.timestamp - c2.timestamp).total_seconds())
    return SyncResult(es, t, es <= t, change_alignment(c1, c2, ignore_builtins))


def _induced(change: OntologyChange, external: Sequence[OntologyChange], t: float,
             ignore_builtins: bool) -> bool:
    terms = _strip_builtins(change.touched_terms, ignore_builtins)
    for ext in external:
        if abs((change.timestamp - ext.timestamp).total_seconds()) <= t and terms & ext.touched_terms:
            return True
    return False


def evolutionary_dependency(changes: Iterable[OntologyChange], external: Iterable[OntologyChange],
                            threshold=DEFAULT_THRESHOLD, ignore_builtins: bool = False) -> DependencyResult:
    """Ratio of externally induced to ontology-specific changes.

    A change is induced when some external change is both within
    ``threshold`` of it and touches a shared term.
    """
    t = _seconds(threshold)
    external = list(external)
    ec = sc = 0
    for c in changes:
        if _induced(c, external, t, ignore_builtins):
            ec += 1
        else:
            sc += 1
    if sc == 0:
        raise UndefinedDependency(f"no ontology-specific changes (EC={ec}, SC=0)")
    return DependencyResult(ec, sc, ec / sc)


def data_timestamp(snapshot: Iterable[Triple]) -> datetime | None:
    """Latest ``dct:modified`` value found in the data, if any parses."""
    best = None
    for t in snapshot:
        if t.predicate.value == DCT_MODIFIED and isinstance(t.object, Literal):
            try:
                ts = parse_timestamp(t.object.lexical)
            except ValueError:
                continue
            if best is None or ts > best:
                best = ts
    return best


def schema_counts(snapshot: Iterable[Triple]) -> dict[str, int]:
    """Census of classes, subclass axioms and properties.

    A class is an IRI declared as ``owl:Class``/``rdfs:Class``, an endpoint
    of ``rdfs:subClassOf``, or the type of some instance (a subject that is
    not itself a declared class or property). Properties are the distinct
    predicates plus IRIs declared with a property type.
    """
    snapshot = list(snapshot)
    declared_classes: set[str] = set()
    declared_props: set[str] = set()
    subclass = 0
    for t in snapshot:
        p = t.predicate.value
        if p == RDF_TYPE and isinstance(t.object, Iri) and isinstance(t.subject, Iri):
            if t.object.value in CLASS_TYPES:
                declared_classes.add(t.subject.value)
            elif t.object.value in PROPERTY_TYPES:
                declared_props.add(t.subject.value)
        elif p == SUBCLASS_OF:
            subclass += 1
            for term in (t.subject, t.object):
                if isinstance(term, Iri):
                    declared_classes.add(term.value)
    classes = set(declared_classes)
    for t in snapshot:
        if t.predicate.value != RDF_TYPE or not isinstance(t.object, Iri):
            continue
        subj = t.subject.value if isinstance(t.subject, Iri) else None
        if subj in declared_classes or subj in declared_props or t.object.value in META_TYPES:
            continue
        classes.add(t.object.value)
    properties = {t.predicate.value for t in snapshot} | declared_props
    return {
        "class_count": len(classes),
        "subclass_axiom_count": subclass,
        "property_count": len(properties),
    }


def schema_series(versions: Iterable[tuple[datetime, str, Iterable[Triple]]]) -> list[dict]:
    """Schema counts per version with differences relative to the first version."""
    rows = []
    first = None
    for ts, label, triples in versions:
        triples = list(triples)
        stamp = data_timestamp(triples) or parse_timestamp(ts)
        counts = schema_counts(triples)
        if first is None:
            first = counts
        rows.append({
            "timestamp": format_timestamp(stamp),
            "label": label,
            **counts,
            "class_delta": counts["class_count"] - first["class_count"],
            "subclass_delta": counts["subclass_axiom_count"] - first["subclass_axiom_count"],
        })
    return rows


def series_to_csv(rows: Sequence[dict]) -> str:
    cols = ["timestamp", "label", "class_count", "subclass_axiom_count", "property_count",
            "class_delta", "subclass_delta"]
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow(r)
    return buf.getvalue()
