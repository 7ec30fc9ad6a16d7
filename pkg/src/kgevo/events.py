"""Community-level evolution events between two snapshots."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

from ._validation import check_interval
from .community import Community
from .exceptions import InvalidOmega

PERSIST, EMERGE, DISAPPEAR, MERGE, SPLIT = "persist", "emerge", "disappear", "merge", "split"
MAX_GROUP = 5


@dataclass(frozen=True)
class EventConfig:
    omega: float = 0.5
    basis: str = "triples"

    def __post_init__(self):
        check_interval(self.omega, "omega", 0.0, 1.0, high_closed=True, exc=InvalidOmega)
        if self.basis not in ("triples", "nodes"):
            raise ValueError(f"basis must be 'triples' or 'nodes', got {self.basis!r}")


@dataclass(frozen=True)
class EvolutionEvent:
    kind: str
    old: tuple[int, ...]
    new: tuple[int, ...]
    iou: float | None = None

    def as_dict(self) -> dict:
        return {"event": self.kind, "old": list(self.old), "new": list(self.new), "iou": self.iou}

    def to_json(self) -> str:
        return json.dumps(self.as_dict())


def _members(c: Community, basis: str) -> frozenset:
    return c.triples if basis == "triples" else c.nodes


def iou(c_m: Community, c_n: Community, basis: str = "triples") -> float:
    """Intersection over union of two communities; 0 when both are empty."""
    x, y = _members(c_m, basis), _members(c_n, basis)
    return _set_iou(x, y)


def _set_iou(x: frozenset, y: frozenset) -> float:
    union = len(x | y)
    return len(x & y) / union if union else 0.0


def _exceeds(score: float, omega: float) -> bool:
    # at omega = 1 nothing can be strictly larger, so identical sets pass
    return score > omega or score == omega == 1.0


def _best_group(target: frozenset, pool: dict[int, frozenset], omega: float):
    """Greedily grow a group from ``pool`` whose union best matches ``target``.

    Candidates are added in descending overlap with ``target``; among the
    prefixes of size 2..MAX_GROUP the one with the highest IoU is returned if
    it exceeds ``omega``.
    """
    ranked = sorted(
        ((len(target & s), _set_iou(target, s), k) for k, s in pool.items() if target & s),
        key=lambda r: (-r[0], -r[1], r[2]),
    )[:MAX_GROUP]
    best = None
    union: frozenset = frozenset()
    group: list[int] = []
    for _, _, k in ranked:
        group.append(k)
        union = union | pool[k]
        if len(group) >= 2:
            score = _set_iou(union, target)
            if _exceeds(score, omega) and (best is None or score > best[0]):
                best = (score, tuple(sorted(group)))
    return best


def classify_events(C_i: Sequence[Community], C_j: Sequence[Community],
                    cfg: EventConfig | None = None) -> list[EvolutionEvent]:
    """Persist, merge, split, emerge and disappear events from ``C_i`` to ``C_j``.

    Every community takes part in exactly one event. Persistence is matched
    greedily by descending IoU; merges and splits are then accepted one at a
    time, best IoU first, from the still unmatched communities.
    """
    cfg = cfg or EventConfig()
    omega = cfg.omega
    old = {c.id: _members(c, cfg.basis) for c in C_i}
    new = {c.id: _members(c, cfg.basis) for c in C_j}
    if len(old) != len(C_i) or len(new) != len(C_j):
        raise ValueError("community ids must be unique within a snapshot")

    events: list[EvolutionEvent] = []
    pairs = []
    for a, xa in old.items():
        for b, yb in new.items():
            score = _set_iou(xa, yb)
            if _exceeds(score, omega):
                pairs.append((score, a, b))
    pairs.sort(key=lambda r: (-r[0], min(r[1], r[2]), max(r[1], r[2]), r[1]))
    free_old, free_new = set(old), set(new)
    for score, a, b in pairs:
        if a in free_old and b in free_new:
            free_old.discard(a)
            free_new.discard(b)
            events.append(EvolutionEvent(PERSIST, (a,), (b,), score))

    while True:
        candidates = []
        for b in sorted(free_new):
            found = _best_group(new[b], {a: old[a] for a in free_old}, omega)
            if found:
                candidates.append((found[0], len(found[1]), b, found[1], MERGE))
        for a in sorted(free_old):
            found = _best_group(old[a], {b: new[b] for b in free_new}, omega)
            if found:
                candidates.append((found[0], len(found[1]), a, found[1], SPLIT))
        if not candidates:
            break
        score, _, single, group, kind = min(candidates, key=lambda c: (-c[0], c[1], c[2], c[3], c[4]))
        if kind == MERGE:
            events.append(EvolutionEvent(MERGE, group, (single,), score))
            free_new.discard(single)
            free_old.difference_update(group)
        else:
            events.append(EvolutionEvent(SPLIT, (single,), group, score))
            free_old.discard(single)
            free_new.difference_update(group)

    events.extend(EvolutionEvent(DISAPPEAR, (a,), ()) for a in sorted(free_old))
    events.extend(EvolutionEvent(EMERGE, (), (b,)) for b in sorted(free_new))
    order = {PERSIST: 0, MERGE: 1, SPLIT: 2, DISAPPEAR: 3, EMERGE: 4}
    events.sort(key=lambda e: (order[e.kind], e.old, e.new))
    return events
