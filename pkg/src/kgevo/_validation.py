"""Input validation shared by the estimators and functional entry points."""

from __future__ import annotations

import math
from .rdf import Triple


def check_snapshot(X, name: str = "X") -> frozenset[Triple]:
    """Coerce an iterable of triples to a frozenset, rejecting anything else."""
    if isinstance(X, frozenset) and all(isinstance(t, Triple) for t in X):
        return X
    if isinstance(X, (str, bytes)):
        raise TypeError(f"{name} must be an iterable of Triple, not {type(X).__name__}")
    out = frozenset(X)
    for t in out:
        if not isinstance(t, Triple):
            raise TypeError(f"{name} contains a non-Triple element: {t!r}")
    return out


def check_interval(value, name: str, low: float, high: float, *, low_closed=False,
                   high_closed=False, exc: type[Exception] = ValueError) -> float:
    try:
        value = float(value)
    except (TypeError, ValueError):
        raise exc(f"{name} must be a number, got {value!r}") from None
    ok_low = value >= low if low_closed else value > low
    ok_high = value <= high if high_closed else value < high
    if math.isnan(value) or not (ok_low and ok_high):
        lb = "[" if low_closed else "("
        hb = "]" if high_closed else ")"
        raise exc(f"{name} must lie in {lb}{low}, {high}{hb}, got {value}")
    return value


def check_positive_int(value, name: str, *, allow_zero: bool = False) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise TypeError(f"{name} must be an integer, got {value!r}")
    if value < 0 or (value == 0 and not allow_zero):
        raise ValueError(f"{name} must be {'>= 0' if allow_zero else '>= 1'}, got {value}")
    return value


