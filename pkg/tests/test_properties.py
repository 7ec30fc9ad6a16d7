import random
from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import iri, tr
from kgevo.properties import (
    PropertyChangeRecord,
    TypeMigration,
    migration_graph,
    rank_properties,
    records_to_csv,
    relative_rates,
    type_migrations,
)
from kgevo.rdf import RDF_TYPE, Iri, Triple
from kgevo.store import ChangeSet

P = "http://ex.org/"


def typed(s, cls):
    return Triple(iri(s), Iri(RDF_TYPE), iri(cls))


def test_rank_empty():
    records, hist = rank_properties(ChangeSet())
    assert records == [] and sum(hist.values()) == 0 and sorted(hist) == list(range(1, 21))


def test_rank_simple():
    cs = ChangeSet({tr("a", "p", '"1"'), tr("b", "p", '"2"')}, {tr("c", "q", '"3"')})
    records, hist = rank_properties(cs)
    assert [(r.property, r.edited_count) for r in records] == [(P + "p", 2), (P + "q", 1)]
    assert hist[1] == 1 and hist[2] == 1


def _synthetic_changeset(seed, n_props=50):
    rng = random.Random(seed)
    added, deleted = set(), set()
    for i in range(400):
        t = tr(f"s{i}", f"p{rng.randrange(n_props)}", f'"{i}"')
        (added if rng.random() < 0.6 else deleted).add(t)
    return ChangeSet(added, deleted)


def test_rank_matches_counter():
    cs = _synthetic_changeset(1)
    records, hist = rank_properties(cs)
    counts = Counter(t.predicate.value for t in cs.added) + Counter(t.predicate.value for t in cs.deleted)
    assert {r.property: r.edited_count for r in records} == dict(counts)
    assert [r.edited_count for r in records] == sorted(counts.values(), reverse=True)
    assert sum(r.added_count for r in records) == len(cs.added)
    assert sum(r.removed_count for r in records) == len(cs.deleted)
    assert hist == {k: sum(1 for v in counts.values() if v == k) for k in range(1, 21)}


def test_top_k():
    records, _ = rank_properties(_synthetic_changeset(2), top_k=5)
    assert len(records) == 5
    with pytest.raises(ValueError):
        rank_properties(ChangeSet(), top_k=0)


def test_relative_examples():
    old = {tr(f"s{i}", "p", '"x"') for i in range(10)}
    rec = PropertyChangeRecord(P + "p", 3, 2)
    new_prop = PropertyChangeRecord(P + "q", 3, 0)
    out = relative_rates([new_prop, rec], old)
    assert out[0].ratio == 0.5 and out[0].occurrence_old == 10
    assert out[1].ratio is None and out[1].is_new


def test_relative_ten_property_fixture():
    # property k occurs 2k times in old and is edited k + 1 times
    old = {tr(f"s{k}_{j}", f"p{k}", '"v"') for k in range(1, 11) for j in range(2 * k)}
    cs = ChangeSet(set(), {tr(f"s{k}_{j}", f"p{k}", '"v"') for k in range(1, 11) for j in range(k + 1)})
    records, _ = rank_properties(cs, old)
    out = relative_rates(records, old)
    expected = {P + f"p{k}": (k + 1) / (2 * k) for k in range(1, 11)}
    assert {r.property: r.ratio for r in out} == pytest.approx(expected)
    assert [r.property for r in out] == sorted(expected, key=lambda p: -expected[p])
    csv = records_to_csv(out)
    assert csv.splitlines()[0] == "property,added,removed,edited,occurrence_old,ratio"
    assert csv.splitlines()[1] == f"{P}p1,0,2,2,2,1.0"


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000))
def test_ranking_is_permutation(seed):
    cs = _synthetic_changeset(seed, n_props=12)
    records, _ = rank_properties(cs)
    names = [r.property for r in records]
    assert sorted(names) == sorted({t.predicate.value for t in cs.updates})


# ---------------------------------------------------------------- type migrations


def test_unchanged_types():
    snap = {tr("x", "p", "o"), typed("o", "A")}
    assert type_migrations(snap, snap) == []


def test_single_migration():
    old = {tr("x", "p", "o"), typed("o", "A")}
    new = {tr("x", "p", "o"), typed("o", "B")}
    assert type_migrations(old, new) == [TypeMigration(P + "p", P + "A", P + "B", 1)]


def test_nationality_fixture():
    link = [tr(f"person{i}", "nationality", f"place{i}") for i in range(3)]
    old = set(link) | {typed(f"place{i}", "Country") for i in range(3)}
    new = set(link) | {typed(f"place{i}", "EthnicGroup") for i in range(3)}
    # unrelated object keeps its type
    old |= {tr("person9", "nationality", "place9"), typed("place9", "Country")}
    new |= {tr("person9", "nationality", "place9"), typed("place9", "Country")}
    (m,) = type_migrations(old, new)
    assert (m.from_class, m.to_class, m.object_count) == (P + "Country", P + "EthnicGroup", 3)
    assert type_migrations(old, new, min_count=4) == []
    assert type_migrations(old, new, property_filter=[P + "other"]) == []
    g = migration_graph([m])
    assert g["edges"] == [{"source": P + "Country", "target": P + "EthnicGroup",
                           "property": P + "nationality", "count": 3}]


def test_multi_type_pairs():
    old = {tr("x", "p", "o"), typed("o", "A"), typed("o", "A2")}
    new = {tr("x", "p", "o"), typed("o", "B"), typed("o", "A2")}
    assert type_migrations(old, new) == [TypeMigration(P + "p", P + "A", P + "B", 1)]


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000))
def test_migrations_antisymmetric(seed):
    rng = random.Random(seed)
    links = {tr(f"s{i}", f"p{rng.randrange(3)}", f"o{rng.randrange(8)}") for i in range(12)}
    old = links | {typed(f"o{j}", f"C{rng.randrange(4)}") for j in range(8)}
    new = links | {typed(f"o{j}", f"C{rng.randrange(4)}") for j in range(8)}
    fwd = {(m.property, m.from_class, m.to_class, m.object_count) for m in type_migrations(old, new)}
    bwd = {(m.property, m.to_class, m.from_class, m.object_count) for m in type_migrations(new, old)}
    assert fwd == bwd
