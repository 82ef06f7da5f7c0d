"""Command-line front end.

Subcommands: run (one scheme, one seed), sweep (axis x schemes x seeds),
converge (swarm best-so-far traces), oracle (exhaustive vs swarm on the
toy), validate-rate (closed form vs Monte Carlo). Every command writes CSV
plus a manifest.json capturing the exact configuration; outputs for a
given config and seed are byte-identical across runs.
"""

import argparse
import dataclasses
import os
import sys

from . import __version__, experiments
from .config import EnergyConstants, ScenarioConfig, load_config


def _int_list(text):
    return [int(v) for v in text.split(",") if v]


def _float_list(text):
    return [float(v) for v in text.split(",") if v]


def _load(args):
    if args.config:
        return load_config(args.config)
    return ScenarioConfig(), EnergyConstants()


def _outdir(args):
    os.makedirs(args.out, exist_ok=True)
    return args.out


def _manifest(args, cfg, constants, extra):
    payload = {
        "version": __version__,
        "command": args.command,
        "config": cfg.to_dict(),
        "energy_constants": dataclasses.asdict(constants),
    }
    payload.update(extra)
    experiments.write_manifest(os.path.join(args.out, "manifest.json"),
                               payload)


def _cmd_run(args):
    cfg, constants = _load(args)
    out = _outdir(args)
    rec = experiments.run_scheme(cfg, args.scheme, args.budget_fraction,
                                 args.seed, constants=constants,
                                 bpso_patience=args.patience,
                                 sree_bandwidth_scaled=args.sree_bandwidth)
    experiments.write_run_csv(os.path.join(out, "run.csv"),
                              [("", "", rec)])
    _manifest(args, cfg, constants,
              {"scheme": args.scheme, "seed": args.seed,
               "budget_fraction": args.budget_fraction,
               "outputs": ["run.csv"]})
    print(f"{rec.scheme}: sum rate {rec.sum_rate_bits:.4f} bit/s/Hz, "
          f"energy {rec.energy_watt:.5f} W, SREE {rec.sree:.3f}, "
          f"{rec.iterations} iterations")
    return 0


def _cmd_sweep(args):
    cfg, constants = _load(args)
    out = _outdir(args)
    schemes = [s for s in args.schemes.split(",") if s]
    result = experiments.sweep(cfg, args.axis, args.values, schemes,
                               args.budget_fraction, args.seeds,
                               base_seed=args.seed, constants=constants,
                               bpso_patience=args.patience,
                               sree_bandwidth_scaled=args.sree_bandwidth)
    rows = [(result.axis, value, rec)
            for value, _, _, rec in result.rows]
    experiments.write_run_csv(os.path.join(out, "sweep.csv"), rows)
    _manifest(args, cfg, constants,
              {"axis": args.axis, "values": args.values, "schemes": schemes,
               "seeds": args.seeds, "base_seed": args.seed,
               "budget_fraction": args.budget_fraction,
               "outputs": ["sweep.csv"]})
    for (value, scheme), (mean, hw) in sorted(
            result.summary("sree").items(), key=lambda kv: str(kv[0])):
        print(f"{args.axis}={value} {scheme}: SREE {mean:.3f} +- {hw:.3f}")
    return 0


def _cmd_converge(args):
    cfg, constants = _load(args)
    out = _outdir(args)
    rows = experiments.convergence_study(cfg, args.axis, args.values,
                                         args.seed, args.budget_fraction,
                                         constants=constants,
                                         bpso_patience=args.patience)
    experiments.write_trace_csv(os.path.join(out, "converge.csv"), rows)
    _manifest(args, cfg, constants,
              {"axis": args.axis, "values": args.values, "seed": args.seed,
               "budget_fraction": args.budget_fraction,
               "outputs": ["converge.csv"]})
    for axis, value, it, obj in rows:
        print(f"{axis}={value} iter {it}: best sum rate {obj:.4f}")
    return 0


def _cmd_oracle(args):
    cfg, constants = _load(args) if args.config else (None, EnergyConstants())
    out = _outdir(args)
    rec = experiments.oracle_study(args.seed, cfg=cfg,
                                   budget_fraction=args.budget_fraction,
                                   constants=constants)
    path = os.path.join(out, "oracle.csv")
    with open(path, "w", newline="") as fh:
        import csv
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(("seed", "budget_fraction", "exhaustive_objective",
                         "bpso_objective", "ratio", "feasible_count",
                         "enumerated_count", "bpso_iterations",
                         "sca_evaluations", "iterations_to_98pct"))
        writer.writerow([rec.seed, repr(rec.budget_fraction),
                         repr(rec.exhaustive_objective),
                         repr(rec.bpso_objective), repr(rec.ratio),
                         rec.feasible_count, rec.enumerated_count,
                         rec.bpso_iterations, rec.sca_evaluations,
                         rec.iterations_to_98pct])
    manifest_cfg = cfg or experiments.oracle_toy_config(args.seed)
    _manifest(args, manifest_cfg, constants,
              {"seed": args.seed, "budget_fraction": args.budget_fraction,
               "outputs": ["oracle.csv"]})
    print(f"exhaustive optimum {rec.exhaustive_objective:.4f} over "
          f"{rec.feasible_count} feasible of {rec.enumerated_count}; "
          f"swarm reached {rec.bpso_objective:.4f} "
          f"({100 * rec.ratio:.2f}%) in {rec.bpso_iterations} iterations")
    return 0


def _cmd_validate_rate(args):
    out = _outdir(args)
    rows = experiments.rate_validation_study(args.seed, trials=args.trials)
    experiments.write_validation_csv(os.path.join(out, "validate_rate.csv"),
                                     rows)
    cfg = ScenarioConfig(num_aps=4, num_users=3, antennas_per_ap=4,
                         low_res_antennas=3, users_per_ap=2,
                         rng_seed=args.seed)
    _manifest(args, cfg, EnergyConstants(),
              {"seed": args.seed, "trials": args.trials,
               "outputs": ["validate_rate.csv"]})
    worst = 0.0
    failed = False
    for r in rows:
        status = ""
        if r["checked"]:
            ok = abs(r["z"]) <= 3.0
            failed |= not ok
            worst = max(worst, abs(r["z"]))
            status = "ok" if ok else "MISMATCH"
        print(f"{r['regime']:>10} user {r['user']} {r['term']:>6}: "
              f"closed {r['closed']:.6e}  mc {r['mc_mean']:.6e} "
              f"+- {r['mc_se']:.1e}  z {r['z']:+.2f} {status}")
    print(f"worst checked |z| = {worst:.2f} over {args.trials} draws")
    return 1 if failed else 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="ucmimo",
        description="user-centric cell-free massive MIMO uplink simulator "
                    "with mixed-resolution ADCs")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON scenario file")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", default="runs", help="output directory")
        p.add_argument("--budget-fraction", type=float, default=0.75,
                       help="energy budget as a fraction of the all-on draw")
        p.add_argument("--sree-bandwidth", action="store_true",
                       help="scale SREE by the bandwidth (bits/J instead of "
                            "bits/channel-use per W)")

    def swarm_opts(p):
        p.add_argument("--patience", type=int, default=None,
                       help="stop the swarm after this many stagnant "
                            "iterations (default: run all iterations)")

    p = sub.add_parser("run", help="run one scheme on one network")
    common(p)
    swarm_opts(p)
    p.add_argument("--scheme", required=True,
                   choices=sorted(experiments.SCHEMES))
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("sweep", help="sweep an axis over schemes and seeds")
    common(p)
    swarm_opts(p)
    p.add_argument("--axis", required=True, choices=("M", "K", "L", "kappa"))
    p.add_argument("--values", required=True, type=_float_list,
                   help="comma-separated axis values")
    p.add_argument("--schemes", required=True,
                   help="comma-separated scheme names")
    p.add_argument("--seeds", type=int, default=20,
                   help="number of seeds per point")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("converge", help="swarm convergence traces")
    common(p)
    swarm_opts(p)
    p.add_argument("--axis", default="M", choices=("M", "K", "L", "kappa"))
    p.add_argument("--values", required=True, type=_float_list)
    p.set_defaults(func=_cmd_converge)

    p = sub.add_parser("oracle", help="exhaustive search vs the swarm")
    common(p)
    p.set_defaults(func=_cmd_oracle)

    p = sub.add_parser("validate-rate",
                       help="closed-form rate terms vs Monte Carlo")
    common(p)
    p.add_argument("--trials", type=int, default=100000)
    p.set_defaults(func=_cmd_validate_rate)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.command == "sweep":
        args.values = [int(v) if float(v).is_integer() and args.axis != "kappa"
                       else v for v in args.values]
    if args.command == "converge":
        args.values = [int(v) if float(v).is_integer() and args.axis != "kappa"
                       else v for v in args.values]
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
