"""Probability-tuple helpers shared by the classifier and belief fusion."""

from __future__ import annotations

from .errors import DimensionMismatch

SUM_TOL = 1e-9


def validate(t) -> tuple[float, ...]:
    t = tuple(float(x) for x in t)
    if any(x < 0 for x in t):
        raise ValueError(f"negative probability in {t}")
    if abs(sum(t) - 1.0) > SUM_TOL:
        raise ValueError(f"probabilities sum to {sum(t)}, not 1")
    return t


def normalise(counts) -> tuple[float, ...]:
    total = float(sum(counts))
    if total <= 0:
        raise ValueError("cannot normalise all-zero counts")
    return tuple(c / total for c in counts)


def uniform(dim: int) -> tuple[float, ...]:
    return (1.0 / dim,) * dim


def mean(tuples) -> tuple[float, ...]:
    tuples = list(tuples)
    if not tuples:
        raise ValueError("mean of no tuples")
    dim = len(tuples[0])
    acc = [0.0] * dim
    for t in tuples:
        if len(t) != dim:
            raise DimensionMismatch(f"dimension {len(t)} != {dim}")
        for i, x in enumerate(t):
            acc[i] += x
    k = len(tuples)
    return tuple(x / k for x in acc)


def argmax(t) -> int:
    """Index of the largest entry; ties break to the lowest index."""
    best, best_i = t[0], 0
    for i in range(1, len(t)):
        if t[i] > best:
            best, best_i = t[i], i
    return best_i
