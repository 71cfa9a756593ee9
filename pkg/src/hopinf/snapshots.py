"""Snapshot, forcing and time-derivative matrices, and their CSV storage."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .models import ModelSpec

SCHEMA_VERSION = 1
MATRIX_NAMES = ("Q", "P", "Fq", "Fp", "dQ", "dP")


class SnapshotFormatError(ValueError):
    """A snapshot directory is missing files or holds inconsistent data."""


@dataclass(frozen=True, eq=False)
class SnapshotSet:
    model_spec: ModelSpec
    dt: float
    Q: np.ndarray
    P: np.ndarray
    Fq: np.ndarray
    Fp: np.ndarray
    dQ: np.ndarray
    dP: np.ndarray

    def __post_init__(self):
        shapes = {name: getattr(self, name).shape for name in MATRIX_NAMES}
        if len(set(shapes.values())) != 1:
            raise SnapshotFormatError(f"matrix shapes disagree: {shapes}")
        if self.Q.ndim != 2 or self.Q.shape[1] < 5:
            raise SnapshotFormatError(
                f"need an n x K matrix with K >= 5, got {self.Q.shape}")

    @property
    def n(self):
        return self.Q.shape[0]

    @property
    def K(self):
        return self.Q.shape[1]


def estimate_time_derivatives(X, dt):
    """Column-wise time derivative of equally spaced samples.

    Interior columns use the fourth-order central stencil
    ``(-x[k+2] + 8 x[k+1] - 8 x[k-1] + x[k-2]) / (12 dt)``; the first two
    columns use forward Euler and the last two backward Euler.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[None, :]
    K = X.shape[1]
    if K < 5:
        raise ValueError(f"need at least 5 time samples, got {K}")
    if not dt > 0:
        raise ValueError("dt must be positive")
    dX = np.empty_like(X)
    dX[:, 2:-2] = (-X[:, 4:] + 8 * X[:, 3:-1] - 8 * X[:, 1:-3] + X[:, :-4]) / (12 * dt)
    dX[:, :2] = (X[:, 1:3] - X[:, :2]) / dt
    dX[:, -2:] = (X[:, -2:] - X[:, -3:-1]) / dt
    return dX


def assemble(model, traj, n_columns=None):
    """Build the :class:`SnapshotSet` of a full-order trajectory.

    Time derivatives are estimated over the whole trajectory; ``n_columns``
    then keeps only the leading columns (a training window). Columns near
    the end of the window thus get the central stencil whenever later
    samples exist, instead of the one-sided Euler fallback.
    """
    Y = traj.states
    if Y.shape[0] != 2 * model.n:
        raise ValueError(f"trajectory state dimension {Y.shape[0]} does not "
                         f"match 2n = {2 * model.n}")
    K = Y.shape[1] if n_columns is None else int(n_columns)
    if not 1 <= K <= Y.shape[1]:
        raise ValueError(f"n_columns={n_columns} out of range for {Y.shape[1]} columns")
    dt = traj.dt
    dY = estimate_time_derivatives(Y, dt)[:, :K]
    Q, P = Y[:model.n, :K], Y[model.n:, :K]
    Fq, Fp = model.forcing(Q, P)
    return SnapshotSet(model.spec, dt, Q.copy(), P.copy(),
                       np.ascontiguousarray(Fq), np.ascontiguousarray(Fp),
                       np.ascontiguousarray(dY[:model.n]),
                       np.ascontiguousarray(dY[model.n:]))


# Persistence =================================================================

def write_matrix(path, M):
    np.savetxt(path, np.atleast_2d(M), fmt="%.17g", delimiter=",")


def read_matrix(path):
    return np.atleast_2d(np.loadtxt(path, delimiter=",", dtype=float, ndmin=2))


def save(snapshots, directory):
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    for name in MATRIX_NAMES:
        write_matrix(directory / f"{name}.csv", getattr(snapshots, name))
    meta = {"schema_version": SCHEMA_VERSION,
            "model_spec": snapshots.model_spec.to_dict(),
            "dt": snapshots.dt, "n": snapshots.n, "K": snapshots.K}
    (directory / "meta.json").write_text(json.dumps(meta, indent=2))
    return directory


def load(directory):
    directory = Path(directory)
    meta_path = directory / "meta.json"
    if not meta_path.exists():
        raise SnapshotFormatError(f"{meta_path} not found")
    meta = json.loads(meta_path.read_text())
    if meta.get("schema_version") != SCHEMA_VERSION:
        raise SnapshotFormatError(
            f"schema version {meta.get('schema_version')} != {SCHEMA_VERSION}")
    mats = {}
    for name in MATRIX_NAMES:
        path = directory / f"{name}.csv"
        if not path.exists():
            raise SnapshotFormatError(f"missing matrix file {path}")
        mats[name] = read_matrix(path)
    expected = (meta["n"], meta["K"])
    for name, M in mats.items():
        if M.shape != expected:
            raise SnapshotFormatError(
                f"{name}.csv has shape {M.shape}, expected {expected} "
                f"(from Q.csv: {mats['Q'].shape})")
    return SnapshotSet(ModelSpec.from_dict(meta["model_spec"]), meta["dt"], **mats)
