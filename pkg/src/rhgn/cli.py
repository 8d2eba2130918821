"""Command-line interface.

Subcommands:
  train                build a classifier bundle from simulated corpora
  run                  one run (env, controller, seed) -> fitness line
  suite                batch over designed or generated environments -> CSV
  report               metrics summary from a suite CSV
  map                  behaviour-selection map image for one run
  validate-behaviours  best-behaviour table over the training catalog
"""

from __future__ import annotations

import argparse
import sys
from collections import defaultdict

from .classifier import ClassifierBundle
from .environments import DESIGNED_IDS, TRAINING_IDS, behaviour_validation_table
from .harness import (
    CONTROLLERS,
    RunConfig,
    emit_behaviour_map,
    extract_corpus,
    resolve_env,
    results_table,
    run_experiment,
    run_single,
    suite_configs,
    train_bundle,
)
from .metrics import mann_whitney_u, match_rate_95, quartiles


def _add_scale_flags(p):
    p.add_argument("--scale-packets", type=float, default=1.0,
                   help="multiply packet totals (desk-scale runs use 0.1)")
    p.add_argument("--scale-steps", type=float, default=1.0,
                   help="multiply step budgets (desk-scale runs use 0.2)")


def build_parser():
    parser = argparse.ArgumentParser(prog="rhgn", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="extract a corpus and train a bundle")
    p.add_argument("--out", required=True, help="bundle output path")
    p.add_argument("--steps", type=int, default=10_000)
    p.add_argument("--stride", type=int, default=15)
    p.add_argument("--seeds", type=int, default=3,
                   help="corpus runs per (env, behaviour) cell")
    p.add_argument("--env", action="append", default=None,
                   help="training env id (repeatable; default full catalog)")

    p = sub.add_parser("run", help="single run")
    p.add_argument("--env", default="1.1",
                   help='designed id or "gen:<seed>"')
    p.add_argument("--controller", default="mb1", choices=CONTROLLERS)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--packets", type=int, default=1000)
    p.add_argument("--steps", type=int, default=50_000)
    p.add_argument("--bundle", default=None, help="trained bundle path")
    _add_scale_flags(p)

    p = sub.add_parser("suite", help="batch of runs -> CSV results table")
    p.add_argument("--env", action="append", default=None,
                   help="env id (repeatable; default designed catalog)")
    p.add_argument("--controller", action="append", default=None,
                   choices=CONTROLLERS, help="repeatable; default all")
    p.add_argument("--seeds", type=int, default=10)
    p.add_argument("--packets", type=int, default=1000)
    p.add_argument("--steps", type=int, default=50_000)
    p.add_argument("--bundle", default=None)
    p.add_argument("--out", default=None, help="CSV path (default stdout)")
    _add_scale_flags(p)

    p = sub.add_parser("report", help="summarise a suite CSV")
    p.add_argument("csv", help="results table from `rhgn suite`")

    p = sub.add_parser("map", help="behaviour-selection map for one run")
    p.add_argument("--env", default="1.1")
    p.add_argument("--controller", default="rhgn", choices=CONTROLLERS)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--packets", type=int, default=1000)
    p.add_argument("--steps", type=int, default=50_000)
    p.add_argument("--bundle", default=None)
    p.add_argument("--out", required=True, help="PPM image path")
    _add_scale_flags(p)

    p = sub.add_parser("validate-behaviours",
                       help="reproduce the best-behaviour table")
    p.add_argument("--runs", type=int, default=10)
    p.add_argument("--packets", type=int, default=100)
    p.add_argument("--steps", type=int, default=10_000)

    return parser


def _load_bundle(path):
    return ClassifierBundle.load(path) if path else None


def _cmd_train(args):
    env_ids = tuple(args.env) if args.env else TRAINING_IDS
    corpus = extract_corpus(steps=args.steps, stride=args.stride,
                            seeds=tuple(range(args.seeds)), env_ids=env_ids)
    bundle = train_bundle(corpus)
    bundle.save(args.out)
    print(f"trained on {len(corpus)} observations -> {args.out}")
    return 0


def _cmd_run(args):
    config = RunConfig(
        environment=args.env, controller=args.controller, seed=args.seed,
        packets=args.packets, steps=args.steps,
        scale_packets=args.scale_packets, scale_steps=args.scale_steps,
    )
    r = run_single(config, _load_bundle(args.bundle))
    print(f"{r.environment},{r.controller},{r.seed},"
          f"{r.fitness:.6f},{r.t_s},{r.p_s}")
    return 0


def _cmd_suite(args):
    envs = tuple(args.env) if args.env else DESIGNED_IDS
    controllers = tuple(args.controller) if args.controller else CONTROLLERS
    configs = suite_configs(envs, controllers, range(args.seeds),
                            packets=args.packets, steps=args.steps,
                            scale_packets=args.scale_packets,
                            scale_steps=args.scale_steps)
    results = run_experiment(configs, _load_bundle(args.bundle))
    table = results_table(results)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(table)
    else:
        sys.stdout.write(table)
    failures = [r for r in results if r.error]
    for r in failures:
        print(f"error: {r.environment}/{r.controller}/{r.seed}: {r.error}",
              file=sys.stderr)
    return 1 if failures else 0


def _cmd_report(args):
    by_cell = defaultdict(list)
    with open(args.csv) as fh:
        header = fh.readline()
        if not header.startswith("env,controller,seed"):
            print("error: not a suite results table", file=sys.stderr)
            return 1
        for line in fh:
            env, controller, _seed, fit, _ts, _ps = line.strip().split(",")
            if fit == "error":
                print(f"error row: {line.strip()}", file=sys.stderr)
                return 1
            by_cell[(env, controller)].append(float(fit))

    envs = sorted({e for e, _ in by_cell})
    print("env,controller,q1,median,q3,n")
    for env in envs:
        for controller in sorted(c for e, c in by_cell if e == env):
            fits = by_cell[(env, controller)]
            q1, q2, q3 = quartiles(fits)
            print(f"{env},{controller},{q1:.4f},{q2:.4f},{q3:.4f},{len(fits)}")
    for env in envs:
        cells = {c: by_cell[(e, c)] for e, c in by_cell if e == env}
        if "rhgn" not in cells:
            continue
        mbs = {c: v for c, v in cells.items() if c.startswith("mb")}
        if not mbs:
            continue
        best = max(mbs, key=lambda c: quartiles(mbs[c])[1])
        ref = mbs[best]
        if len(ref) == len(cells["rhgn"]):
            _u, p = mann_whitney_u(cells["rhgn"], ref)
            rate = match_rate_95(cells["rhgn"], ref)
            print(f"# {env}: rhgn vs best MB ({best}): "
                  f"95%-match {100 * rate:.0f}%, U-test p={p:.4f}")
    return 0


def _cmd_map(args):
    config = RunConfig(
        environment=args.env, controller=args.controller, seed=args.seed,
        packets=args.packets, steps=args.steps,
        scale_packets=args.scale_packets, scale_steps=args.scale_steps,
    )
    r = run_single(config, _load_bundle(args.bundle))
    emit_behaviour_map([r.trace], resolve_env(args.env), args.out)
    print(f"{args.out}: fitness {r.fitness:.4f}, "
          f"{sum(ev[0] == 'select' for ev in r.trace)} selection events")
    return 0


def _cmd_validate(args):
    table = behaviour_validation_table(runs=args.runs, packets=args.packets,
                                       steps=args.steps)
    print("env,best,mb1_median,mb2_median,mb3_median")
    for env_id, (best, medians) in table.items():
        print(f"{env_id},mb{best},{medians[1]:.4f},{medians[2]:.4f},"
              f"{medians[3]:.4f}")
    return 0


_COMMANDS = {
    "train": _cmd_train,
    "run": _cmd_run,
    "suite": _cmd_suite,
    "report": _cmd_report,
    "map": _cmd_map,
    "validate-behaviours": _cmd_validate,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return _COMMANDS[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
