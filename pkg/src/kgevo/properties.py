"""Property change-frequency ranking, relative change rates and type migrations."""

from __future__ import annotations

import csv
import io
from collections import Counter, defaultdict
from dataclasses import dataclass, replace
from typing import Iterable

from .rdf import RDF_TYPE, Iri, Triple, is_node
from .store import ChangeSet

LOW_FREQUENCY_MAX = 20


@dataclass(frozen=True)
class PropertyChangeRecord:
    property: str
    added_count: int
    removed_count: int
    occurrence_old: int = 0
    ratio: float | None = None

    @property
    def edited_count(self) -> int:
        return self.added_count + self.removed_count

    @property
    def is_new(self) -> bool:
        """No occurrence in the older snapshot, so no relative rate exists."""
        return self.occurrence_old == 0


@dataclass(frozen=True)
class TypeMigration:
    property: str
    from_class: str
    to_class: str
    object_count: int


def _occurrences(snapshot: Iterable[Triple]) -> Counter:
    return Counter(t.predicate.value for t in snapshot)


def rank_properties(cs: ChangeSet, old: Iterable[Triple] | None = None,
                    top_k: int | None = None) -> tuple[list[PropertyChangeRecord], dict[int, int]]:
    """Rank properties by number of added plus removed triples.

    Returns the ranking (descending edited count, ties by IRI) and a
    histogram of how many properties changed exactly k times for
    k = 1..20.
    """
    if top_k is not None and top_k < 1:
        raise ValueError("top_k must be >= 1")
    added = Counter(t.predicate.value for t in cs.added)
    removed = Counter(t.predicate.value for t in cs.deleted)
    occ = _occurrences(old) if old is not None else Counter()
    records = [PropertyChangeRecord(p, added[p], removed[p], occ[p])
               for p in set(added) | set(removed)]
    records.sort(key=lambda r: (-r.edited_count, r.property))
    hist = {k: 0 for k in range(1, LOW_FREQUENCY_MAX + 1)}
    for r in records:
        if r.edited_count <= LOW_FREQUENCY_MAX:
            hist[r.edited_count] += 1
    if top_k is not None:
        records = records[:top_k]
    return records, hist


def relative_rates(records: Iterable[PropertyChangeRecord],
                   old: Iterable[Triple]) -> list[PropertyChangeRecord]:
    """Fill in ``edited / occurrences in old``; new properties keep ``ratio=None``.

    Result is ordered by descending ratio with new properties last.
    """
    occ = _occurrences(old)
    out = []
    for r in records:
        n = occ[r.property]
        out.append(replace(r, occurrence_old=n, ratio=r.edited_count / n if n else None))
    out.sort(key=lambda r: (r.ratio is None, -(r.ratio or 0.0), r.property))
    return out


def records_to_csv(records: Iterable[PropertyChangeRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["property", "added", "removed", "edited", "occurrence_old", "ratio"])
    for r in records:
        ratio = "new" if r.ratio is None else repr(r.ratio)
        w.writerow([r.property, r.added_count, r.removed_count, r.edited_count, r.occurrence_old, ratio])
    return buf.getvalue()


def _types(snapshot: Iterable[Triple], type_predicate: str) -> dict:
    out = defaultdict(set)
    for t in snapshot:
        if t.predicate.value == type_predicate and isinstance(t.object, Iri):
            out[t.subject].add(t.object.value)
    return out


def type_migrations(old: Iterable[Triple], new: Iterable[Triple],
                    property_filter: Iterable[str] | None = None, min_count: int = 1,
                    type_predicate: str = RDF_TYPE) -> list[TypeMigration]:
    """Objects whose classes changed, attributed to the properties pointing at them.

    For each triple present in both versions, every (lost class, gained
    class) pair of its object counts that object once for the triple's
    property.
    """
    old, new = frozenset(old), frozenset(new)
    types_old, types_new = _types(old, type_predicate), _types(new, type_predicate)
    allow = None if property_filter is None else set(property_filter)
    objects = defaultdict(set)
    for t in old & new:
        p = t.predicate.value
        if p == type_predicate or not is_node(t.object):
            continue
        if allow is not None and p not in allow:
            continue
        o = t.object
        lost = types_old.get(o, set()) - types_new.get(o, set())
        gained = types_new.get(o, set()) - types_old.get(o, set())
        for a in lost:
            for b in gained:
                objects[(p, a, b)].add(o)
    migrations = [TypeMigration(p, a, b, len(objs)) for (p, a, b), objs in objects.items()
                  if len(objs) >= min_count]
    migrations.sort(key=lambda m: (-m.object_count, m.property, m.from_class, m.to_class))
    return migrations


def migration_graph(migrations: Iterable[TypeMigration]) -> dict:
    """Classes as nodes, properties as weighted edges."""
    migrations = list(migrations)
    totals = Counter()
    for m in migrations:
        totals[m.from_class] += m.object_count
        totals[m.to_class] += m.object_count
    return {
        "nodes": [{"class": c, "changes": n} for c, n in sorted(totals.items())],
        "edges": [
            {"source": m.from_class, "target": m.to_class, "property": m.property, "count": m.object_count}
            for m in migrations
        ],
    }
