"""Metrics and statistics for swarm runs: accuracy/F1, Mann-Whitney U,
95%-match rates and classification error-rate curves.

All functions here are deterministic pure functions of their inputs.
"""

from __future__ import annotations

import math
from itertools import combinations

from .errors import EmptyConfusion, EmptySample, MisalignedRuns, UnknownTruth

FITNESS_RANGE = 2.0  # fitness lives in (-1, 1)
EXACT_LIMIT = 8  # exact U-test enumeration up to this many per side


def accuracy_f1(tp, tn, fp, fn):
    """One-versus-all accuracy and F1 from confusion counts.

    Counts may be floats (e.g. analytic per-class probabilities).
    """
    if min(tp, tn, fp, fn) < 0:
        raise EmptyConfusion("negative confusion counts")
    total = tp + tn + fp + fn
    if total == 0:
        raise EmptyConfusion("all confusion counts are zero")
    acc = (tp + tn) / total
    denom = 2.0 * tp + fp + fn
    f1 = (2.0 * tp / denom) if denom > 0 else 0.0
    return acc, f1


def _ranks(values):
    """Midranks of `values` (1-based)."""
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        mid = (i + j) / 2.0 + 1.0
        for k in range(i, j + 1):
            ranks[order[k]] = mid
        i = j + 1
    return ranks


def _u_statistic(a, b):
    """U of sample a: pairs where a > b, ties counting one half."""
    pooled = list(a) + list(b)
    ranks = _ranks(pooled)
    r_a = sum(ranks[: len(a)])
    return r_a - len(a) * (len(a) + 1) / 2.0


def mann_whitney_u(sample_a, sample_b):
    """Two-sided Mann-Whitney U test -> (U of sample_a, p).

    Exact enumeration over all group assignments when both samples have
    at most EXACT_LIMIT values, otherwise a normal approximation with
    tie correction.
    """
    a, b = list(sample_a), list(sample_b)
    if not a or not b:
        raise EmptySample("Mann-Whitney requires two non-empty samples")
    n1, n2 = len(a), len(b)
    u = _u_statistic(a, b)
    mu = n1 * n2 / 2.0

    if n1 <= EXACT_LIMIT and n2 <= EXACT_LIMIT:
        pooled = a + b
        ranks = _ranks(pooled)
        offset = n1 * (n1 + 1) / 2.0
        total = 0
        lo = hi = 0
        for pick in combinations(range(n1 + n2), n1):
            ua = sum(ranks[i] for i in pick) - offset
            total += 1
            if ua <= u + 1e-12:
                lo += 1
            if ua >= u - 1e-12:
                hi += 1
        p = min(1.0, 2.0 * min(lo, hi) / total)
        return u, p

    pooled = a + b
    n = n1 + n2
    tie_sum = 0
    for v in set(pooled):
        t = pooled.count(v)
        tie_sum += t * t * t - t
    var = n1 * n2 / 12.0 * ((n + 1) - tie_sum / (n * (n - 1)))
    if var <= 0:  # every value tied
        return u, 1.0
    z = (u - mu) / math.sqrt(var)
    p = min(1.0, math.erfc(abs(z) / math.sqrt(2.0)))
    return u, p


def match_rate_95(controller, reference):
    """Fraction of aligned runs where `controller` keeps >= 95% of
    `reference`'s fitness.

    For non-positive references (where a percentage is meaningless) the
    controller instead has to stay within 5% of the total fitness range.
    """
    controller, reference = list(controller), list(reference)
    if len(controller) != len(reference):
        raise MisalignedRuns(
            f"{len(controller)} controller runs vs {len(reference)} references"
        )
    if not controller:
        raise MisalignedRuns("no runs to compare")
    hits = 0
    for c, r in zip(controller, reference):
        if r > 0:
            ok = c >= 0.95 * r
        else:
            ok = c >= r - 0.05 * FITNESS_RANGE
        hits += ok
    return hits / len(controller)


def error_rate_curve(prediction_vectors, true_index):
    """Mean per-step misclassification over (agent, run) prediction vectors.

    Each vector holds one environment-index prediction per step (-1 where
    no prediction was available yet, which counts as an error).  Vectors
    are averaged as whole vectors, matching per-agent-per-run weighting.
    """
    vectors = [list(v) for v in prediction_vectors]
    if not vectors:
        raise MisalignedRuns("no prediction vectors")
    length = len(vectors[0])
    if any(len(v) != length for v in vectors):
        raise MisalignedRuns("prediction vectors differ in length")
    curve = []
    for s in range(length):
        wrong = sum(v[s] != true_index for v in vectors)
        curve.append(wrong / len(vectors))
    return curve


def truth_index(label, labels):
    """Index of an environment's true label in the classifier label list.

    Only catalogued training environments have a ground truth; holdout and
    generated layouts raise UnknownTruth.
    """
    if label is None:
        raise UnknownTruth("environment has no training label")
    try:
        return list(labels).index(label)
    except ValueError:
        raise UnknownTruth(f"label {label!r} not in {list(labels)!r}") from None


def quartiles(values):
    """(q1, median, q3) with linear interpolation."""
    if not values:
        raise EmptySample("quartiles of an empty sample")
    xs = sorted(values)

    def q(frac):
        pos = frac * (len(xs) - 1)
        lo = int(math.floor(pos))
        hi = int(math.ceil(pos))
        return xs[lo] + (xs[hi] - xs[lo]) * (pos - lo)

    return q(0.25), q(0.5), q(0.75)


def median(values):
    return quartiles(values)[1]
