"""Command line entry point: ``simulate``, ``validate`` and ``oracle``."""

import argparse
import json
import logging
import math
import os
import sys

from . import discrete
from .channels import PLACEMENTS, SystemGeometry, generate_scenario
from .exceptions import DomainError, SearchSpaceError
from .harness import (
    MODES,
    PHASE_SOLVERS,
    QOS_TOL,
    SUMMARY_FIELDS,
    ExperimentConfig,
    load_config,
    mw_to_dbm,
    read_rows,
    run_experiment,
    run_trial,
    summary_path,
)
from .half_duplex import RELAY_SOLVERS

DBM_TOL = 1e-9


def _floats(text):
    return [float(v) for v in text.replace(",", " ").split()]


def _ints(text):
    return [int(v) for v in text.replace(",", " ").split()]


def build_parser():
    parser = argparse.ArgumentParser(prog="risrelay", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run a Monte Carlo sweep")
    sim.add_argument("--config", help="JSON experiment config")
    sim.add_argument("--mode", choices=MODES)
    sim.add_argument("--solver", choices=RELAY_SOLVERS)
    sim.add_argument("--phase-solver", dest="phase_solver", choices=PHASE_SOLVERS)
    sim.add_argument("--b", type=int)
    sweep = sim.add_mutually_exclusive_group()
    sweep.add_argument("--rth", type=_floats, help="rate thresholds, e.g. 1,6")
    sweep.add_argument("--L", type=_ints, help="RIS sizes, e.g. 20,180")
    sweep.add_argument("--K", type=_ints, help="user counts")
    sim.add_argument("--trials", type=int)
    sim.add_argument("--seed", type=int)
    sim.add_argument("--placement", choices=PLACEMENTS)
    sim.add_argument("--out", help="CSV output path (summary goes next to it)")

    val = sub.add_parser("validate", help="re-check a result CSV")
    val.add_argument("--in", dest="path", required=True)
    val.add_argument("--config", help="re-solve every row with this config and compare")

    orc = sub.add_parser("oracle", help="exhaustive discrete-phase search on one scenario")
    orc.add_argument("--config", help="JSON config supplying placement and fading")
    orc.add_argument("--mode", choices=discrete.DISCRETE_MODES, default="fd")
    orc.add_argument("--solver", choices=RELAY_SOLVERS, default="duality")
    orc.add_argument("--rth", type=float, default=2.0)
    orc.add_argument("--b", type=int, default=1)
    orc.add_argument("--L", type=int, default=4)
    orc.add_argument("--K", type=int)
    orc.add_argument("--seed", type=int, default=0)
    orc.add_argument("--placement", choices=PLACEMENTS)
    orc.add_argument("--refine", action="store_true", help="also report successive refinement")
    return parser


def _simulate(args):
    config = load_config(args.config) if args.config else ExperimentConfig()
    config = config.with_overrides(
        mode=args.mode,
        solver=args.solver,
        phase_solver=args.phase_solver,
        b=args.b,
        rth=args.rth,
        L=args.L,
        K=args.K,
        trials=args.trials,
        seed=args.seed,
        placement=args.placement,
        out=args.out,
    )
    result = run_experiment(config)
    if not config.out:
        sys.stdout.write(result.to_csv())
    for row in result.summary:
        print(
            f"{config.sweep}={row['sweep_value']:g}: {row['mean_power_dbm_of_linear_mean']:.4f} dBm "
            f"({row['converged_trials']}/{row['trials']} converged)",
            file=sys.stderr,
        )
    return 0


def _close(a, b, rel=1e-9):
    if math.isnan(a) and math.isnan(b):
        return True
    return abs(a - b) <= rel * max(abs(a), abs(b), 1e-300)


def _validate(args):
    rows = read_rows(args.path)
    problems = []
    qos = {}
    side = summary_path(args.path)
    if os.path.exists(side):
        qos = {r["sweep_value"]: r["rate_threshold"] for r in read_rows(side, SUMMARY_FIELDS)}
    config = load_config(args.config) if args.config else None
    for i, r in enumerate(rows):
        tag = f"row {i + 1} (sweep_value={r['sweep_value']:g}, trial={r['trial']})"
        if not math.isnan(r["total_power_mw"]):
            if abs(r["total_power_dbm"] - mw_to_dbm(r["total_power_mw"])) > DBM_TOL * max(1.0, abs(r["total_power_dbm"])):
                problems.append(f"{tag}: dBm column disagrees with mW column")
        if r["converged"] and r["sweep_value"] in qos:
            if not r["achieved_min_rate"] >= qos[r["sweep_value"]] - QOS_TOL:
                problems.append(f"{tag}: achieved rate {r['achieved_min_rate']:.6g} below {qos[r['sweep_value']]:g}")
        if config is not None:
            if config.seed + r["trial"] != r["seed"]:
                problems.append(f"{tag}: seed does not follow base_seed + trial")
            fresh = run_trial(config, r["sweep_value"], r["trial"])
            if not _close(fresh.total_power_mw, r["total_power_mw"]) or fresh.converged != r["converged"]:
                problems.append(f"{tag}: re-solve gives {fresh.total_power_mw:.12g} mW")
    for p in problems:
        print(p)
    checked = "structure, dBm" + (", QoS" if qos else "") + (", re-solve" if config else "")
    print(f"{len(rows)} rows checked ({checked}): {'OK' if not problems else f'{len(problems)} problem(s)'}")
    return 0 if not problems else 1


def _oracle(args):
    config = load_config(args.config) if args.config else ExperimentConfig()
    geometry = SystemGeometry.preset(
        args.placement or config.placement,
        config.distance,
        M=config.M,
        N=config.N,
        K=args.K or config.K,
        L=args.L,
    )
    ch = generate_scenario(geometry, config.fading, args.seed)
    best = discrete.brute_force_oracle(ch, args.mode, args.rth, args.b, relay_solver=args.solver)
    report = dict(
        mode=args.mode,
        rth=args.rth,
        b=args.b,
        L=args.L,
        seed=args.seed,
        power_mw=best.total_power,
        power_dbm=mw_to_dbm(best.total_power),
        indices=best.indices.tolist(),
        evaluated=best.evaluations,
    )
    if args.refine:
        ref = discrete.successive_refinement(ch, args.mode, args.rth, args.b, relay_solver=args.solver)
        report["refinement_power_mw"] = ref.total_power
        report["refinement_indices"] = ref.indices.tolist()
    print(json.dumps(report))
    return 0


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    handler = {"simulate": _simulate, "validate": _validate, "oracle": _oracle}[args.command]
    try:
        return handler(args)
    except (DomainError, SearchSpaceError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
