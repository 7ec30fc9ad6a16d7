import random

import pytest

from kgevo.rdf import BlankNode, Iri, Literal, Triple

EX = "http://ex.org/"

# criterion number -> (passed, detail); filled by test_acceptance
ACCEPTANCE_RESULTS = {}


def iri(name):
    return Iri(name if ":" in name else EX + name)


def tr(s, p, o):
    """Triple from short names; objects starting with a quote become literals."""
    subj = BlankNode(s[2:]) if s.startswith("_:") else iri(s)
    if isinstance(o, str) and o.startswith('"'):
        obj = Literal(o.strip('"'))
    elif isinstance(o, str):
        obj = BlankNode(o[2:]) if o.startswith("_:") else iri(o)
    else:
        obj = o
    return Triple(subj, iri(p), obj)


def random_snapshot(n, seed, n_subjects=None, n_predicates=8, literal_fraction=0.3):
    rng = random.Random(seed)
    n_subjects = n_subjects or max(2, n // 5)
    out = set()
    while len(out) < n:
        s = iri(f"s{rng.randrange(n_subjects)}")
        p = iri(f"p{rng.randrange(n_predicates)}")
        if rng.random() < literal_fraction:
            o = Literal(f"v{rng.randrange(10 * n)}")
        else:
            o = iri(f"s{rng.randrange(n_subjects)}")
        out.add(Triple(s, p, o))
    return frozenset(out)


@pytest.fixture
def ex():
    return iri


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ACCEPTANCE_RESULTS):
        ok, detail = ACCEPTANCE_RESULTS[num]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] criterion {num:2d}: {detail}")


def toy_kg():
    """20 triples in two clusters: five people each sharing a city and an employer."""
    out = []
    for c in "ab":
        for i in range(5):
            out.append(tr(f"{c}_person{i}", "livesIn", f"{c}_city"))
            out.append(tr(f"{c}_person{i}", "worksAt", f"{c}_org"))
    return out


def tail_rank_fraction(model, triple):
    """Share of corrupted tails scored worse (farther) than the true tail."""
    import numpy as np

    h = model.entities[triple.subject] + model.relations[triple.predicate.value]
    true = np.linalg.norm(h - model.entities[triple.object])
    others = [e for e in model.entities if e != triple.object]
    return sum(np.linalg.norm(h - model.entities[e]) > true for e in others) / len(others)


def pipeline_snapshot(seed=0):
    """500 triples: five typed clusters of ten people with sparse inter-cluster links."""
    from kgevo.rdf import RDF_TYPE, Iri, Literal, Triple

    rng = random.Random(seed)
    out = set()
    people = [(c, i) for c in range(5) for i in range(10)]
    for c, i in people:
        s = iri(f"c{c}_p{i}")
        out.add(Triple(s, Iri(RDF_TYPE), iri(f"Class{c}")))
        out.add(Triple(s, iri("name"), Literal(f"person {c}-{i}")))
        out.add(Triple(s, iri("age"), Literal(str(20 + rng.randrange(50)))))
    while len(out) < 450:
        c = rng.randrange(5)
        a, b = rng.sample(range(10), 2)
        out.add(Triple(iri(f"c{c}_p{a}"), iri(f"knows{rng.randrange(2)}"), iri(f"c{c}_p{b}")))
    for c in range(5):
        out.add(Triple(iri(f"c{c}_p0"), iri("knows0"), iri(f"c{(c + 1) % 5}_p1")))
    while len(out) < 500:
        c, i = rng.choice(people)
        out.add(Triple(iri(f"c{c}_p{i}"), iri("note"), Literal(f"n{rng.randrange(10_000)}")))
    return frozenset(out)
