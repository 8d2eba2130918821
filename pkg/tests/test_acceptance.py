"""Acceptance gate: eleven numbered criteria, one test each.

Each test prints an unmissable `[criterion N] PASS/FAIL` line (capture is
disabled for the line) and asserts the criterion.  Heavy artifacts — the
trained bundle and the desk-scale run suites — are session fixtures shared
across criteria.  The whole file takes roughly half an hour on one core.
"""

import math
import random
import time
from itertools import combinations, combinations_with_replacement
from statistics import median

import numpy as np
import pytest

from rhgn.classifier import ClassifierBundle
from rhgn.environments import DESIGNED_IDS, TRAINING_IDS, designed_env
from rhgn.harness import extract_corpus, run_experiment, suite_configs, train_bundle
from rhgn.hgn import NeuronPyramid, static_hgn_count
from rhgn.metrics import (
    accuracy_f1,
    error_rate_curve,
    mann_whitney_u,
    match_rate_95,
    truth_index,
)
from rhgn.world import WorldState, fitness

DESK = dict(packets=100, steps=10_000)
SUITE_SEEDS = range(5)


def _report(capsys, num, ok, detail):
    with capsys.disabled():
        print(f"\n[criterion {num:2d}] {'PASS' if ok else 'FAIL'} — {detail}")
    assert ok, f"criterion {num}: {detail}"


# -- session fixtures ----------------------------------------------------


@pytest.fixture(scope="session")
def trained():
    """Desk-scale corpus -> trained bundle, plus a classification sample."""
    corpus = extract_corpus(steps=10_000, stride=15, seeds=(0, 1, 2))
    bundle = train_bundle(corpus)
    sample = np.array([obs for obs, _ in corpus[:100_000]])
    return bundle, sample


@pytest.fixture(scope="session")
def mb_table():
    """Criterion 6 table: training envs x behaviours x 10 seeds."""
    start = time.time()
    configs = suite_configs(TRAINING_IDS, ("mb1", "mb2", "mb3"), range(10),
                            **DESK)
    results = run_experiment(configs)
    return results, time.time() - start


@pytest.fixture(scope="session")
def holdout_mb():
    configs = suite_configs(("3.1", "3.2"), ("mb1", "mb2", "mb3"),
                            SUITE_SEEDS, **DESK)
    return run_experiment(configs)


@pytest.fixture(scope="session")
def rhgn_suite(trained):
    bundle, _ = trained
    configs = suite_configs(DESIGNED_IDS, ("rhgn",), SUITE_SEEDS, **DESK)
    return run_experiment(configs, bundle)


@pytest.fixture(scope="session")
def rand_suite():
    configs = suite_configs(DESIGNED_IDS, ("rand",), SUITE_SEEDS, **DESK)
    return run_experiment(configs)


@pytest.fixture(scope="session")
def utility_suite(trained):
    """Criterion 8 runs: 50 packets so the slow environments (2.3, 3.1)
    are completable within the step budget by a well-chosen behaviour."""
    bundle, _ = trained
    envs = ("1.2", "1.3", "2.3", "3.1")
    small = dict(packets=50, steps=10_000)
    results = run_experiment(
        suite_configs(envs, ("mb1", "mb2", "mb3"), SUITE_SEEDS, **small)
    )
    results += run_experiment(
        suite_configs(envs, ("rhgn",), SUITE_SEEDS, **small), bundle
    )
    return results


def _fit(results, env, controller, seed):
    for r in results:
        if (r.environment, r.controller, r.seed) == (env, controller, seed):
            assert r.error is None, r.error
            return r.fitness
    raise KeyError((env, controller, seed))


def _medians(results):
    cells = {}
    for r in results:
        assert r.error is None, r.error
        cells.setdefault((r.environment, r.controller), []).append(r.fitness)
    return {k: median(v) for k, v in cells.items()}


# -- criteria ------------------------------------------------------------


def test_criterion_01_one_shot_exactness(capsys):
    rng = random.Random(0)
    seen, patterns = set(), []
    while len(patterns) < 10_000:
        p = tuple(rng.randrange(1000) for _ in range(21))
        if p not in seen:
            seen.add(p)
            patterns.append(p)
    start = time.time()
    pyramid = NeuronPyramid(21)
    ids = [pyramid.memorise(p) for p in patterns]
    exact = all(pyramid.recall(p) == i for p, i in zip(patterns, ids))
    elapsed = time.time() - start
    ok = exact and len(set(ids)) == 10_000 and elapsed < 10.0
    _report(capsys, 1, ok,
            f"10,000 patterns, exact={exact}, {elapsed:.1f}s (< 10 s)")


def test_criterion_02_scaling_anchor(capsys):
    formula_ok = all(
        static_hgn_count(n, r) == r * sum(range(1, n + 1, 2))
        for n in (1, 3, 5, 21, 49)
        for r in (1, 7, 1000, 1_000_000)
    )
    assert static_hgn_count(3, 1_000_000) == 4_000_000
    start = time.time()
    pyramid = NeuronPyramid(3)
    for i in range(2_000_000):
        pyramid.memorise((i % 1_000_000, i % 5, i % 7))
    count = pyramid.neuron_count()
    elapsed = time.time() - start
    ok = formula_ok and count <= 4_000_000 and elapsed < 120.0
    _report(capsys, 2, ok,
            f"formula exact, 2e6 patterns -> {count} neurons "
            f"(<= 4e6), {elapsed:.1f}s (< 2 min)")


def test_criterion_03_probability_discipline(capsys, trained):
    bundle, sample = trained
    violations = 0
    for table in [*bundle.lower_tables, bundle.upper_table]:
        for tup in table.values():
            if abs(sum(tup) - 1.0) > 1e-9 or min(tup) < 0.0:
                violations += 1
    n = min(100_000, len(sample))
    for i in range(n):
        tup = bundle.classify(sample[i])
        if abs(sum(tup) - 1.0) > 1e-9 or min(tup) < 0.0:
            violations += 1
    ok = violations == 0 and n == 100_000
    _report(capsys, 3, ok,
            f"{n} classifications + all trained tables, "
            f"{violations} violations")


def test_criterion_04_random_baseline_anchor(capsys):
    acc, f1 = accuracy_f1(1 / 36, 25 / 36, 5 / 36, 5 / 36)
    ok = abs(acc - 0.7222) <= 0.0001 and abs(f1 - 0.1667) <= 0.0001
    _report(capsys, 4, ok, f"Acc={acc:.4f} (0.7222), F1={f1:.4f} (0.1667)")


def test_criterion_05_fitness_property(capsys):
    rng = random.Random(1)
    checked = 0
    ok = True
    while checked < 10_000:
        p = rng.randint(1, 1000)
        t = rng.randint(1, 50_000)
        completed = rng.random() < 0.5
        if completed:
            p_s, t_s = p, rng.randint(1, t)
        else:
            p_s, t_s = rng.randint(0, p - 1), t
        f = fitness(p_s, p, t_s, t)
        reference = p_s / p - t_s / t  # independent re-evaluation
        ok &= -1.0 <= f < 1.0
        ok &= abs(f - reference) <= 1e-12
        ok &= (f < 0) if not completed and p_s < p and t_s == t else True
        if completed:
            ok &= f >= 0.0
        checked += 1
        if not ok:
            break
    _report(capsys, 5, ok, f"{checked} random evaluations within (-1,1), "
                           "signs and 1e-12 agreement hold")


def test_criterion_06_behaviour_ordering(capsys, mb_table):
    results, elapsed = mb_table
    med = _medians(results)
    checks = {
        "1.2 mb2>0": med[("1.2", "mb2")] > 0,
        "1.2 mb1<0": med[("1.2", "mb1")] < 0,
        "1.2 mb3<0": med[("1.2", "mb3")] < 0,
        "2.3 mb3 highest": med[("2.3", "mb3")] > max(
            med[("2.3", "mb1")], med[("2.3", "mb2")]
        ),
    }
    for env in ("1.1", "2.1", "2.2"):
        checks[f"{env} mb1 top"] = med[(env, "mb1")] >= max(
            med[(env, "mb2")], med[(env, "mb3")]
        )
    expected = {"1.1": 1, "1.2": 2, "1.3": 1, "2.1": 1, "2.2": 1, "2.3": 3}
    hits = sum(
        max((1, 2, 3), key=lambda b: (med[(env, f"mb{b}")], -b)) == expected[env]
        for env in TRAINING_IDS
    )
    checks["argmax >= 5/6"] = hits >= 5
    checks["runtime < 10 min"] = elapsed < 600.0
    failed = [k for k, v in checks.items() if not v]
    table = {env: {b: round(med[(env, f"mb{b}")], 3) for b in (1, 2, 3)}
             for env in TRAINING_IDS}
    _report(capsys, 6, not failed,
            f"median table {table}; argmax hits {hits}/6; "
            f"{elapsed:.0f}s; failed: {failed or 'none'}")


def test_criterion_07_error_decay(capsys, trained):
    bundle, _ = trained
    lines = []
    ok = True
    for env_id in ("1.1", "1.2", "1.3"):
        env = designed_env(env_id)
        truth = truth_index(env.label, bundle.env_labels)
        firsts, lasts = [], []
        for seed in range(10):
            # oversized packet budget: every run lasts all 10,000 steps so
            # the per-seed prediction vectors line up
            world = WorldState(env, "rhgn", seed, packets=30_000,
                               steps=10_000, bundle=bundle,
                               record_predictions=True)
            world.run()
            curve = error_rate_curve([a.preds for a in world.agents], truth)
            q = len(curve) // 4
            firsts.append(sum(curve[:q]) / q)
            lasts.append(sum(curve[-q:]) / q)
        first, last = sum(firsts) / 10, sum(lasts) / 10
        ok &= last < 0.10 and last < first
        lines.append(f"{env_id}: first {first:.3f} -> last {last:.3f}")
    _report(capsys, 7, ok, "; ".join(lines))


def test_criterion_08_rhgn_utility(capsys, utility_suite):
    med = _medians(utility_suite)
    checks = {}
    for env in ("1.2", "1.3", "2.3"):
        worst_mb = min(med[(env, f"mb{b}")] for b in (1, 2, 3))
        checks[env] = med[(env, "rhgn")] > 0 and worst_mb < 0
    checks["3.1"] = all(
        med[("3.1", "rhgn")] > med[("3.1", f"mb{b}")] for b in (1, 2, 3)
    )
    detail = {env: round(med[(env, "rhgn")], 3)
              for env in ("1.2", "1.3", "2.3", "3.1")}
    failed = [k for k, v in checks.items() if not v]
    _report(capsys, 8, not failed,
            f"rhgn medians {detail}; failed: {failed or 'none'}")


def test_criterion_09_dominance_gap(capsys, mb_table, holdout_mb,
                                    rhgn_suite, rand_suite):
    mb_results = mb_table[0] + holdout_mb
    refs, rhgn_fits, rand_fits = [], [], []
    for env in DESIGNED_IDS:
        for seed in SUITE_SEEDS:
            refs.append(max(
                _fit(mb_results, env, f"mb{b}", seed) for b in (1, 2, 3)
            ))
            rhgn_fits.append(_fit(rhgn_suite, env, "rhgn", seed))
            rand_fits.append(_fit(rand_suite, env, "rand", seed))
    rhgn_rate = match_rate_95(rhgn_fits, refs)
    rand_rate = match_rate_95(rand_fits, refs)
    ok = rhgn_rate >= rand_rate + 0.10
    _report(capsys, 9, ok,
            f"95%-match vs best MB: rhgn {100 * rhgn_rate:.0f}% vs "
            f"rand {100 * rand_rate:.0f}% (gap >= 10 pts)")


def test_criterion_10_determinism_roundtrip(capsys, trained):
    bundle, sample = trained

    def digest_of(env_id, controller, seed, steps, b=None):
        world = WorldState(designed_env(env_id), controller, seed,
                           packets=100, steps=steps, bundle=b)
        world.run()
        return world.digest()

    det = (
        digest_of("2.3", "mb3", 4, 1500) == digest_of("2.3", "mb3", 4, 1500)
        and digest_of("1.3", "mb2", 1, 1500) == digest_of("1.3", "mb2", 1, 1500)
        and digest_of("1.1", "rhgn", 0, 1200, bundle)
        == digest_of("1.1", "rhgn", 0, 1200, bundle)
    )
    clone = ClassifierBundle.from_bytes(bundle.to_bytes())
    n = min(1000, len(sample))
    roundtrip = all(
        clone.classify(sample[i]) == bundle.classify(sample[i])
        for i in range(n)
    )
    ok = det and roundtrip
    _report(capsys, 10, ok,
            f"digests identical={det}, bundle roundtrip identical on "
            f"{n} observations={roundtrip}")


def test_criterion_11_mann_whitney_oracle(capsys):
    def oracle(a, b):
        def u_of(xs, ys):
            return sum((x > y) + 0.5 * (x == y) for x in xs for y in ys)

        u = u_of(a, b)
        pooled = a + b
        lo = hi = total = 0
        for pick in combinations(range(len(pooled)), len(a)):
            rest = [pooled[i] for i in range(len(pooled)) if i not in pick]
            ua = u_of([pooled[i] for i in pick], rest)
            total += 1
            lo += ua <= u + 1e-12
            hi += ua >= u - 1e-12
        return u, min(1.0, 2.0 * min(lo, hi) / total)

    mismatches = checked = 0
    for n1 in range(1, 7):
        for n2 in range(1, 7):
            for a in combinations_with_replacement((0, 1, 2), n1):
                for b in combinations_with_replacement((0, 1, 2), n2):
                    u, p = mann_whitney_u(list(a), list(b))
                    u_ref, p_ref = oracle(list(a), list(b))
                    checked += 1
                    if u != u_ref or abs(p - p_ref) > 1e-12:
                        mismatches += 1
    ok = mismatches == 0
    _report(capsys, 11, ok,
            f"{checked} multiset pairs up to 6x6 over {{0,1,2}}, "
            f"{mismatches} mismatches")
