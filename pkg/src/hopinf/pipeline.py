"""End-to-end experiments: FOM data, operator learning, ROM evaluation.

The in-memory functions (:func:`simulate_fom`, :func:`learn`,
:func:`evaluate_rom`) do the work; the ``run_*`` functions wrap them with the
on-disk artifact layout used by the command line::

    <out_dir>/
        config.json
        snapshots/           Q.csv P.csv Fq.csv Fp.csv dQ.csv dP.csv meta.json
        fom_trajectory.npz   full FOM trajectory to t_test
        basis/               phi.csv sigma.csv
        operators/<method>/  Dq_hat.csv Dp_hat.csv provenance.json  (hopinf, intrusive)
        operators/opinf/     V.csv D_<2r>.csv provenance.json
        reports/             errors_*.csv energy_*.csv invariant_*.csv *.svg
        summary.json, failures.json, timings.json
"""

from __future__ import annotations

import json
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import snapshots as snap
from .basis import CotangentLiftBasis, cotangent_lift, pod_basis
from .config import ExperimentConfig
from .diagnostics import (ErrorReport, SeriesReport, fom_energy_error_series,
                          invariant_error_series, relative_state_error,
                          rom_energy_error_series)
from .inference import (Provenance, ReducedOperators, extract_subrom, infer,
                        intrusive_project, standard_opinf)
from .integrator import FieldHandle, Trajectory, integrate
from .models import build_model
from .rom import HamiltonianRom, LinearRom
from .svgplot import line_plot

log = logging.getLogger(__name__)


class MissingArtifact(FileNotFoundError):
    """An input produced by an earlier pipeline stage is absent."""


# In-memory stages ============================================================

def fom_field(model):
    if model.is_linear:
        return FieldHandle.linear(model.linear_operator())
    return FieldHandle(2 * model.n, model.rhs, model.jacobian)


def simulate_fom(config):
    """Build the model and integrate it to ``t_test``."""
    model = build_model(config.model)
    traj = integrate(fom_field(model), model.initial_state(), config.dt,
                     config.test_steps)
    return model, traj


@dataclass
class Learned:
    """Everything the evaluation stage needs besides the FOM data."""

    basis: CotangentLiftBasis
    operators: dict = field(default_factory=dict)
    pod_V: np.ndarray | None = None
    opinf: dict = field(default_factory=dict)


def learn(config, model, snapshot_set):
    """Fit the basis and all requested reduced operators once.

    Hamiltonian ROMs of every size are nested blocks of the operators at
    ``max(reduced_dims)``; standard OpInf is refit per size.
    """
    r_max = config.max_dim // 2
    basis = cotangent_lift(snapshot_set.Q, snapshot_set.P, r_max)
    out = Learned(basis)
    if "hopinf" in config.methods:
        out.operators["hopinf"] = infer(basis, snapshot_set)
    if "intrusive" in config.methods:
        out.operators["intrusive"] = intrusive_project(model, basis)
    if "opinf" in config.methods:
        Y = np.vstack([snapshot_set.Q, snapshot_set.P])
        dY = np.vstack([snapshot_set.dQ, snapshot_set.dP])
        V, _ = pod_basis(Y, config.max_dim)
        out.pod_V = V
        for dim in config.reduced_dims:
            out.opinf[dim] = standard_opinf(V[:, :dim], Y, dY)
    return out


def build_rom(model, learned, method, dim):
    if method == "opinf":
        return LinearRom(learned.opinf[dim], learned.pod_V[:, :dim])
    w = dim // 2
    return HamiltonianRom(extract_subrom(learned.operators[method], w),
                          learned.basis.truncate(w), model)


@dataclass
class RomResult:
    method: str
    dim: int
    train_error: float
    test_error: float
    fom_energy: SeriesReport
    rom_energy: SeriesReport | None
    invariants: list
    newton_iters: int


def evaluate_rom(config, model, fom_traj, learned, method, dim):
    """Simulate one ROM and compute its diagnostics."""
    rom = build_rom(model, learned, method, dim)
    y0 = fom_traj.states[:, 0]
    traj = rom.simulate(rom.reduce(y0), config.dt, config.horizon_steps(dim))
    n_test = config.test_steps + 1
    n_train = config.train_steps + 1
    Y_rom = rom.lift_states(traj.states[:, :n_test])
    train = relative_state_error(fom_traj.states[:, :n_train], Y_rom[:, :n_train],
                                 config.metric)
    test = relative_state_error(fom_traj.states[:, :n_test], Y_rom, config.metric)
    rom_energy = (rom_energy_error_series(rom, traj)
                  if isinstance(rom, HamiltonianRom) else None)
    return RomResult(method, dim, train, test,
                     fom_energy_error_series(model, rom, traj), rom_energy,
                     invariant_error_series(model, rom, traj),
                     int(traj.newton_iters.max()) if len(traj.newton_iters) else 0)


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    model: object
    fom: Trajectory
    learned: Learned
    results: dict = field(default_factory=dict)
    failures: list = field(default_factory=list)

    def error_report(self, method):
        report = ErrorReport(method)
        for dim in self.config.reduced_dims:
            res = self.results.get((method, dim))
            if res is not None:
                report.add(dim, res.train_error, res.test_error)
        return report


def run_in_memory(config, tasks=None):
    """Run all three stages without touching the disk."""
    model, fom = simulate_fom(config)
    snapshot_set = snap.assemble(model, fom, config.train_steps + 1)
    learned = learn(config, model, snapshot_set)
    out = ExperimentResult(config, model, fom, learned)
    for method, dim in tasks or _tasks(config):
        try:
            out.results[(method, dim)] = evaluate_rom(config, model, fom, learned,
                                                      method, dim)
        except Exception as exc:  # recorded, the remaining ROMs still run
            out.failures.append(_failure(method, dim, exc))
    return out


def _tasks(config):
    return [(m, d) for m in config.methods for d in config.reduced_dims]


def _failure(method, dim, exc):
    return {"method": method, "dim": dim, "error": type(exc).__name__,
            "message": str(exc)}


# Artifact layout =============================================================

def _paths(out_dir):
    out = Path(out_dir)
    return {"root": out, "snapshots": out / "snapshots",
            "trajectory": out / "fom_trajectory.npz", "basis": out / "basis",
            "operators": out / "operators", "reports": out / "reports"}


def _finite_or_none(obj):
    if isinstance(obj, float) and not np.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {k: _finite_or_none(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_finite_or_none(v) for v in obj]
    return obj


def _write_json(path, data):
    """Strict JSON; non-finite numbers (diverged ROMs) become null."""
    Path(path).write_text(json.dumps(_finite_or_none(data), indent=2, sort_keys=True,
                                     allow_nan=False) + "\n")


def run_simulate(config, out_dir=None):
    """Integrate the FOM and persist the training snapshots and trajectory.

    Skips the integration if the directory already holds the output of an
    identical configuration.
    """
    paths = _paths(out_dir or config.out_dir)
    paths["root"].mkdir(parents=True, exist_ok=True)
    fingerprint = _fom_fingerprint(config)
    stamp = paths["root"] / "fom.json"
    if (stamp.exists() and paths["trajectory"].exists()
            and json.loads(stamp.read_text()) == fingerprint):
        log.info("FOM data up to date in %s", paths["root"])
        return paths["snapshots"]
    _write_json(paths["root"] / "config.json", config.to_dict())
    model, traj = simulate_fom(config)
    snap.save(snap.assemble(model, traj, config.train_steps + 1), paths["snapshots"])
    np.savez(paths["trajectory"], times=traj.times, states=traj.states,
             newton_iters=traj.newton_iters)
    _write_json(stamp, fingerprint)
    return paths["snapshots"]


def _fom_fingerprint(config):
    return {"model": config.model.to_dict(), "dt": config.dt,
            "t_train": config.t_train, "t_test": config.t_test}


def load_fom_trajectory(out_dir):
    path = _paths(out_dir)["trajectory"]
    if not path.exists():
        raise MissingArtifact(f"{path} not found; run 'simulate' first")
    with np.load(path) as data:
        return Trajectory(data["times"], data["states"], data["newton_iters"])


def _load_snapshots(out_dir):
    directory = _paths(out_dir)["snapshots"]
    if not (directory / "meta.json").exists():
        raise MissingArtifact(f"no snapshots in {directory}; run 'simulate' first")
    return snap.load(directory)


def run_learn(config, out_dir=None):
    """Learn the basis and operators from persisted snapshots."""
    out_dir = out_dir or config.out_dir
    paths = _paths(out_dir)
    snapshot_set = _load_snapshots(out_dir)
    if snapshot_set.model_spec != config.model:
        raise ValueError("snapshots were generated for a different model")
    model = build_model(config.model)
    learned = learn(config, model, snapshot_set)
    save_learned(learned, paths)
    return paths["operators"]


def save_learned(learned, paths):
    paths["basis"].mkdir(parents=True, exist_ok=True)
    snap.write_matrix(paths["basis"] / "phi.csv", learned.basis.phi)
    snap.write_matrix(paths["basis"] / "sigma.csv", learned.basis.singular_values[None, :])
    for method, ops in learned.operators.items():
        d = paths["operators"] / method
        d.mkdir(parents=True, exist_ok=True)
        snap.write_matrix(d / "Dq_hat.csv", ops.d_q_hat)
        snap.write_matrix(d / "Dp_hat.csv", ops.d_p_hat)
        _write_json(d / "provenance.json",
                    {"provenance": ops.provenance.value, "r": ops.r})
    if learned.pod_V is not None:
        d = paths["operators"] / "opinf"
        d.mkdir(parents=True, exist_ok=True)
        snap.write_matrix(d / "V.csv", learned.pod_V)
        for dim, D in learned.opinf.items():
            snap.write_matrix(d / f"D_{dim}.csv", D)
        _write_json(d / "provenance.json",
                    {"provenance": Provenance.STANDARD_OPINF.value,
                     "dims": sorted(learned.opinf)})


def load_learned(config, out_dir):
    paths = _paths(out_dir)
    phi_path = paths["basis"] / "phi.csv"
    if not phi_path.exists():
        raise MissingArtifact(f"{phi_path} not found; run 'learn' first")
    phi = snap.read_matrix(phi_path)
    sigma = snap.read_matrix(paths["basis"] / "sigma.csv").ravel()
    learned = Learned(CotangentLiftBasis(phi, sigma))
    for method in config.methods:
        d = paths["operators"] / method
        if not (d / "provenance.json").exists():
            raise MissingArtifact(f"no '{method}' operators in {d}; run 'learn' first")
        if method == "opinf":
            learned.pod_V = snap.read_matrix(d / "V.csv")
            for dim in config.reduced_dims:
                path = d / f"D_{dim}.csv"
                if not path.exists():
                    raise MissingArtifact(f"{path} not found; run 'learn' first")
                learned.opinf[dim] = snap.read_matrix(path)
        else:
            prov = json.loads((d / "provenance.json").read_text())["provenance"]
            learned.operators[method] = ReducedOperators(
                snap.read_matrix(d / "Dq_hat.csv"), snap.read_matrix(d / "Dp_hat.csv"),
                Provenance(prov))
    if learned.basis.r * 2 < config.max_dim:
        raise MissingArtifact("stored basis is smaller than max(reduced_dims); "
                              "rerun 'learn'")
    return learned


# Evaluation with optional worker processes -----------------------------------

_WORKER = {}


def _worker_init(config_dict, out_dir):
    config = ExperimentConfig.from_dict(config_dict)
    _WORKER.update(config=config, model=build_model(config.model),
                   fom=load_fom_trajectory(out_dir),
                   learned=load_learned(config, out_dir))


def _worker_task(task):
    method, dim = task
    try:
        return task, evaluate_rom(_WORKER["config"], _WORKER["model"], _WORKER["fom"],
                                  _WORKER["learned"], method, dim), None
    except Exception as exc:
        return task, None, _failure(method, dim, exc)


def run_evaluate(config, out_dir=None, jobs=1):
    """Simulate every (method, 2r) ROM from stored artifacts and write reports.

    Never re-integrates the FOM. Failed ROMs are listed in ``failures.json``
    while the other results are still written.
    """
    out_dir = Path(out_dir or config.out_dir)
    start = time.perf_counter()
    _worker_init(config.to_dict(), out_dir)
    tasks = _tasks(config)
    results, failures = {}, []
    if jobs > 1:
        with ProcessPoolExecutor(jobs, initializer=_worker_init,
                                 initargs=(config.to_dict(), out_dir)) as pool:
            outcomes = list(pool.map(_worker_task, tasks))
    else:
        outcomes = [_worker_task(t) for t in tasks]
    for task, res, fail in outcomes:
        if fail is None:
            results[task] = res
        else:
            log.warning("ROM %s 2r=%d failed: %s", *task, fail["message"])
            failures.append(fail)
    experiment = ExperimentResult(config, _WORKER["model"], _WORKER["fom"],
                                  _WORKER["learned"], results, failures)
    write_reports(experiment, out_dir)
    _write_json(out_dir / "timings.json",
                {"evaluate_seconds": round(time.perf_counter() - start, 3)})
    return experiment


def run_all(config, out_dir=None, jobs=1):
    out_dir = out_dir or config.out_dir
    run_simulate(config, out_dir)
    run_learn(config, out_dir)
    return run_evaluate(config, out_dir, jobs)


# Reports =====================================================================

def _write_series(path, series, stride):
    idx = np.arange(0, len(series.times), stride)
    data = np.column_stack([series.times[idx], series.values[idx]])
    np.savetxt(path, data, fmt="%.17g", delimiter=",", header="t,value", comments="")


def write_reports(experiment, out_dir):
    config = experiment.config
    reports = _paths(out_dir)["reports"]
    reports.mkdir(parents=True, exist_ok=True)
    name = config.name
    stride = config.series_stride
    fom_H = [experiment.model.hamiltonian(experiment.fom.states[:, k])
             for k in range(experiment.fom.states.shape[1])]
    _write_series(reports / f"energy_fom_reference_{name}.csv",
                  SeriesReport(experiment.fom.times, np.abs(np.array(fom_H) - fom_H[0]),
                               "fom"), stride)

    summary = {"model": name, "metric": config.metric, "methods": {}}
    for method in config.methods:
        report = experiment.error_report(method)
        rows = np.column_stack([report.reduced_dims, report.train_errors,
                                report.test_errors]) if report.reduced_dims else np.zeros((0, 3))
        np.savetxt(reports / f"errors_{name}_{method}.csv", rows,
                   fmt=["%d", "%.17g", "%.17g"], delimiter=",",
                   header="2r,train_error,test_error", comments="")
        entry = {}
        for dim in report.reduced_dims:
            res = experiment.results[(method, dim)]
            tag = f"{name}_{method}_{dim}"
            _write_series(reports / f"energy_fom_{tag}.csv", res.fom_energy, stride)
            item = {"train_error": res.train_error, "test_error": res.test_error,
                    "fom_energy_error_max": float(res.fom_energy.values.max()),
                    "horizon": float(res.fom_energy.times[-1])}
            if res.rom_energy is not None:
                _write_series(reports / f"energy_rom_{tag}.csv", res.rom_energy, stride)
                item["rom_energy_error_max"] = float(res.rom_energy.values.max())
            for inv in res.invariants:
                _write_series(reports / f"invariant_{inv.label}_{tag}.csv", inv, stride)
                item[f"{inv.label}_error_max"] = float(inv.values.max())
            entry[str(dim)] = item
        summary["methods"][method] = entry
    summary["failures"] = len(experiment.failures)
    _write_json(Path(out_dir) / "summary.json", summary)
    _write_json(Path(out_dir) / "failures.json", experiment.failures)
    _plots(experiment, reports)


def _plots(experiment, reports):
    config = experiment.config
    name = config.name
    for which in ("train", "test"):
        series = []
        for method in config.methods:
            rep = experiment.error_report(method)
            errs = rep.train_errors if which == "train" else rep.test_errors
            if rep.reduced_dims:
                series.append((method, rep.reduced_dims, errs))
        if series:
            line_plot(reports / f"state_error_{which}_{name}.svg", series,
                      title=f"{name}: relative state error ({which})",
                      xlabel="2r", ylabel="relative state error", logy=True)
    for kind in ("fom", "rom"):
        series = []
        for (method, dim), res in sorted(experiment.results.items()):
            s = res.fom_energy if kind == "fom" else res.rom_energy
            if s is None or dim not in _plot_dims(config):
                continue
            stride = max(1, len(s.times) // 2000)
            series.append((f"{method} 2r={dim}", s.times[::stride], s.values[::stride]))
        if series:
            line_plot(reports / f"energy_{kind}_{name}.svg", series,
                      title=f"{name}: {kind.upper()} energy error",
                      xlabel="t", ylabel="energy error", logy=True,
                      vlines=[config.t_train])


def _plot_dims(config):
    """Sizes shown in energy plots: the long-horizon ones, else the two largest."""
    if config.long_dims:
        return set(config.long_dims)
    return set(sorted(config.reduced_dims)[-2:])
