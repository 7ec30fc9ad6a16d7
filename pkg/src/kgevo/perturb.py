"""Controlled and random evolution fixtures with exact ground truth."""

from __future__ import annotations

import math
import random
from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, Sequence

from ._validation import check_interval, check_snapshot
from .exceptions import PlannedTripleMissing, TooFewEntities
from .rdf import Iri, Triple
from .store import ChangeSet

SYNTH_NAMESPACE = "urn:kgevo:synth:"
MODES = ("add", "delete", "update", "all")


@dataclass(frozen=True)
class PerturbConfig:
    m: int
    alpha: float
    mode: str = "all"
    seed: int = 0

    def __post_init__(self):
        if isinstance(self.m, bool) or not isinstance(self.m, int) or self.m < 1:
            raise ValueError(f"m must be a positive integer, got {self.m!r}")
        check_interval(self.alpha, "alpha", 0.0, 1.0)
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")


class _FreshIris:
    def __init__(self, seed: int, taken: set):
        self.prefix = f"{SYNTH_NAMESPACE}{seed}:"
        self.taken = taken
        self.counter = 0

    def __call__(self) -> Iri:
        while True:
            iri = Iri(f"{self.prefix}{self.counter}")
            self.counter += 1
            if iri not in self.taken:
                self.taken.add(iri)
                return iri


def perturb(snapshot: Iterable[Triple], cfg: PerturbConfig) -> tuple[frozenset[Triple], ChangeSet]:
    """Apply a random add/delete/update to ``cfg.m`` sampled subjects.

    Each chosen subject has ``ceil(alpha * k)`` of its ``k`` triples affected.
    Added and updated triples keep the subject and a predicate it already
    uses, with a freshly minted object IRI. In mode ``"all"`` the chosen
    subjects are dealt round-robin to add, delete and update.
    """
    snapshot = check_snapshot(snapshot, "snapshot")
    by_subject: dict = defaultdict(list)
    for t in snapshot:
        by_subject[t.subject].append(t)
    subjects = sorted(by_subject)
    if len(subjects) < cfg.m:
        raise TooFewEntities(f"snapshot has {len(subjects)} subjects, m={cfg.m}")

    rng = random.Random(cfg.seed)
    chosen = rng.sample(subjects, cfg.m)
    taken = {t.object for t in snapshot} | set(subjects)
    fresh = _FreshIris(cfg.seed, taken)
    added: set[Triple] = set()
    deleted: set[Triple] = set()
    for i, s in enumerate(chosen):
        mode = MODES[i % 3] if cfg.mode == "all" else cfg.mode
        own = sorted(by_subject[s])
        k = math.ceil(cfg.alpha * len(own))
        if mode == "add":
            for _ in range(k):
                p = rng.choice(own).predicate
                added.add(Triple(s, p, fresh()))
        elif mode == "delete":
            deleted.update(rng.sample(own, k))
        else:
            for t in rng.sample(own, k):
                deleted.add(t)
                added.add(Triple(s, t.predicate, fresh()))
    truth = ChangeSet(added, deleted)
    return truth.apply(snapshot), truth


def controlled_series(snapshot: Iterable[Triple],
                      removal_plan: Sequence[Iterable[Triple]]) -> list[tuple[frozenset[Triple], ChangeSet]]:
    """Remove the planned triples step by step; each step's truth is its plan."""
    current = check_snapshot(snapshot, "snapshot")
    out = []
    for step, planned in enumerate(removal_plan):
        planned = frozenset(planned)
        missing = planned - current
        if missing:
            raise PlannedTripleMissing(f"step {step}: {len(missing)} planned triple(s) not present, "
                                       f"e.g. {min(missing)}")
        truth = ChangeSet(frozenset(), planned)
        current = truth.apply(current)
        out.append((current, truth))
    return out
