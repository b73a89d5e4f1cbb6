"""Command-line entry point.

    shearsep <experiment> [--config FILE] [--trials K] [--seed S]
             [--out DIR] [--trace] [--override-preconditions]

Experiments run from their built-in default configuration unless a JSON
config (mirroring ExperimentConfig) is supplied.  Outputs report.json
and table.csv into the output directory, plus trace/*.csv when tracing.
Exit code is 0 iff every verdict passes.  The SHEARSEP_THREADS
environment variable caps the worker count.
"""

import argparse
import os
import sys

from .experiments import DEFAULT_CONFIGS, ExperimentConfig
from .experiments.runners import run_experiment
from .seeding import derive_seed


def build_parser():
    parser = argparse.ArgumentParser(prog="shearsep", description=__doc__.strip().splitlines()[0])
    sub = parser.add_subparsers(dest="experiment", required=True)
    for name in DEFAULT_CONFIGS:
        p = sub.add_parser(name, help=f"run the {name} experiment")
        p.add_argument("--config", help="JSON config mirroring ExperimentConfig")
        p.add_argument("--trials", type=int, help="override trial count")
        p.add_argument("--seed", type=int, help="override both seed bases (disjoint streams)")
        p.add_argument("--out", help="output directory")
        p.add_argument("--trace", action="store_true", help="emit per-run trace CSVs")
        p.add_argument("--override-preconditions", action="store_true",
                       help="run even when theorem hypotheses fail")
    return parser


def load_config(args):
    if args.config:
        with open(args.config) as fh:
            cfg = ExperimentConfig.from_json(fh.read())
        if cfg.experiment != args.experiment:
            raise SystemExit(
                f"config is for {cfg.experiment!r} but the {args.experiment!r} subcommand was invoked"
            )
    else:
        cfg = DEFAULT_CONFIGS[args.experiment]
    overrides = {}
    if args.trials:
        overrides["trials"] = args.trials
    if args.seed is not None:
        overrides["seeds"] = {
            "field": derive_seed(args.seed, 0x1F), "noise": derive_seed(args.seed, 0x2F),
        }
    if args.out:
        overrides["output"] = args.out
    if args.trace:
        overrides["trace"] = True
    if args.override_preconditions:
        overrides["override_preconditions"] = True
    return cfg.replace(**overrides) if overrides else cfg


def _emit_traces(cfg, out_dir):
    """Write illustrative trial-0 traces: a trajectory at every block
    boundary plus the experiment's hit or separation record."""
    from . import flow, twopoint
    from .fields import BumpProfile, FieldSpec, RawShearField, ScaleSchedule
    from .noise import NoisePath, sample_brownian

    trace_dir = os.path.join(out_dir, "trace")
    os.makedirs(trace_dir, exist_ok=True)
    bump = BumpProfile(cfg.field.get("sharpness", 0.1))
    if cfg.experiment in ("single-scale", "heuristic-scaling"):
        field = RawShearField(direction=1, seed=derive_seed(cfg.seeds["field"], 0), bump=bump)
        blocks = 64
        w = sample_brownian(derive_seed(cfg.seeds["noise"], 0), 0.0, 0.25, 4 * blocks + 1)
        w = NoisePath(t0=0.0, dt=w.dt, values=float(cfg.noise.get("scale", 0.01)) * w.values)
        hits = twopoint.extract_hits(field, w, (0.0, 2.0), (0.0, -2.0), blocks)
        twopoint.hits_to_csv(hits, os.path.join(trace_dir, "hits-trial0.csv"),
                             seed=field.seed, spec_hash="raw-shear")
        traj = flow.solve(field, w, flow.ParticleState(t=0.0, x=(0.0, 2.0)), float(blocks))
        flow.trajectory_to_csv(traj, os.path.join(trace_dir, "trajectory-trial0.csv"))
    else:
        sched = ScaleSchedule(
            kind=cfg.field.get("kind", "v_alpha"),
            exponent=float(cfg.field.get("exponent", 0.0)),
            n_min=int(cfg.field.get("n_min", 8)),
            n_max=int(cfg.field.get("n_max", 10)),
        )
        spec = FieldSpec(schedule=sched, seed=derive_seed(cfg.seeds["field"], 0), bump=bump)
        wz = NoisePath.zero(t0=sched.t_start, dt=sched.t_end - sched.t_start, n=2)
        pair = twopoint.PairState(
            t=sched.t_start,
            x1=(0.0, 0.0),
            x2=(2.0 ** (-sched.n_max + 2), 2.0 ** (-sched.n_max + 2)),
        )
        _, trace = twopoint.evolve_pair(spec, wz, pair, sched.time_of(sched.n_max - 2))
        twopoint.trace_to_csv(trace, os.path.join(trace_dir, "separation-trial0.csv"),
                              seed=spec.seed, spec_hash=spec.stable_hash())
        traj = flow.solve(spec, wz, flow.ParticleState(t=sched.t_start, x=(0.0, 0.0)),
                          sched.time_of(sched.n_max - 2))
        flow.trajectory_to_csv(traj, os.path.join(trace_dir, "trajectory-trial0.csv"))


def main(argv=None):
    args = build_parser().parse_args(argv)
    cfg = load_config(args)
    report = run_experiment(cfg)
    out_dir = cfg.output or os.path.join("shearsep-out", cfg.experiment)
    os.makedirs(out_dir, exist_ok=True)
    report.to_json(os.path.join(out_dir, "report.json"))
    report.table_csv(os.path.join(out_dir, "table.csv"))
    if cfg.trace:
        _emit_traces(cfg, out_dir)
    for v in report.verdicts:
        print(f"[{'PASS' if v.passed else 'FAIL'}] {v.id}: {v.requirement}")
    print(f"report: {os.path.join(out_dir, 'report.json')}")
    return 0 if report.all_passed else 1


if __name__ == "__main__":
    sys.exit(main())
