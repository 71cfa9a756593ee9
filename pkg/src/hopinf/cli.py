"""Command line entry point: ``hopinf {simulate,learn,evaluate,all,sweep}``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .config import ConfigError, load_config
from .inference import IllConditioned, infer, intrusive_project, operator_distance
from .basis import RankDeficient, cotangent_lift
from .integrator import IntegrationError, integrate
from .models import build_model
from .pipeline import (MissingArtifact, fom_field, run_all, run_evaluate, run_learn,
                       run_simulate)
from .snapshots import SnapshotFormatError, assemble

log = logging.getLogger("hopinf")

EXIT_CODES = {ConfigError: 2, MissingArtifact: 3, SnapshotFormatError: 3,
              IntegrationError: 4, IllConditioned: 5, RankDeficient: 5}
EXIT_PARTIAL = 6


def _exit_code(exc):
    for cls, code in EXIT_CODES.items():
        if isinstance(exc, cls):
            return code
    return 1


def build_parser():
    parser = argparse.ArgumentParser(
        prog="hopinf",
        description="Learn and evaluate reduced Hamiltonian models from FOM data.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", required=True, type=Path,
                       help="experiment configuration (JSON)")
        p.add_argument("--out-dir", type=Path, default=None,
                       help="artifact directory (overrides the config's out_dir)")
        return p

    common(sub.add_parser("simulate", help="integrate the FOM and store snapshots"))
    common(sub.add_parser("learn", help="fit the basis and reduced operators"))
    for name, text in (("evaluate", "simulate ROMs and write reports"),
                       ("all", "simulate, learn and evaluate")):
        p = common(sub.add_parser(name, help=text))
        p.add_argument("--jobs", type=int, default=1,
                       help="parallel (method, 2r) evaluations")
    p = common(sub.add_parser(
        "sweep", help="operator distance to the intrusive ROM as dt shrinks"))
    p.add_argument("--dts", type=float, nargs="+", default=[1e-2, 5e-3, 1e-3],
                   help="time steps to sweep")
    p.add_argument("--r", type=int, default=4, help="basis half-size")
    return parser


def run_sweep(config, out_dir, dts, r):
    """Learn at fixed ``r`` from training data generated with each ``dt``.

    Writes ``sweep_<model>.csv`` with columns ``dt, dist_q, dist_p``.
    """
    model = build_model(config.model)
    rows = []
    for dt in dts:
        steps = int(round(config.t_train / dt))
        traj = integrate(fom_field(model), model.initial_state(), dt, steps)
        data = assemble(model, traj)
        basis = cotangent_lift(data.Q, data.P, r)
        dq, dp = operator_distance(infer(basis, data), intrusive_project(model, basis))
        log.info("dt=%g: |dDq|=%.3e |dDp|=%.3e", dt, dq, dp)
        rows.append((dt, dq, dp))
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / f"sweep_{config.name}.csv"
    np.savetxt(path, np.array(rows), fmt="%.17g", delimiter=",",
               header="dt,dist_q,dist_p", comments="")
    return path


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        config = load_config(args.config)
        out_dir = Path(args.out_dir or config.out_dir)
        if args.command == "simulate":
            result = {"snapshots": str(run_simulate(config, out_dir))}
        elif args.command == "learn":
            result = {"operators": str(run_learn(config, out_dir))}
        elif args.command == "sweep":
            result = {"sweep": str(run_sweep(config, out_dir, args.dts, args.r))}
        else:
            run = run_evaluate if args.command == "evaluate" else run_all
            experiment = run(config, out_dir, args.jobs)
            result = {"summary": str(out_dir / "summary.json"),
                      "failures": len(experiment.failures)}
            if experiment.failures:
                print(json.dumps({"error": "PartialFailure",
                                  "message": f"{len(experiment.failures)} ROM(s) failed",
                                  "manifest": str(out_dir / "failures.json")}),
                      file=sys.stderr)
                print(json.dumps(result))
                return EXIT_PARTIAL
    except Exception as exc:
        payload = {"error": type(exc).__name__, "message": str(exc)}
        if getattr(exc, "step", None) is not None:
            payload["step"] = exc.step
        print(json.dumps(payload), file=sys.stderr)
        if args.verbose:
            log.exception("command failed")
        return _exit_code(exc)
    print(json.dumps(result))
    return 0


if __name__ == "__main__":
    sys.exit(main())
