"""State-error and conservation metrics for comparing ROMs with the FOM."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class ErrorReport:
    method: str
    reduced_dims: list = field(default_factory=list)
    train_errors: list = field(default_factory=list)
    test_errors: list = field(default_factory=list)

    def add(self, dim, train, test):
        self.reduced_dims.append(int(dim))
        self.train_errors.append(float(train))
        self.test_errors.append(float(test))

    def error_at(self, dim, which="train"):
        errors = self.train_errors if which == "train" else self.test_errors
        return errors[self.reduced_dims.index(dim)]


@dataclass
class SeriesReport:
    times: np.ndarray
    values: np.ndarray
    label: str

    def __post_init__(self):
        if len(self.times) != len(self.values):
            raise ValueError("times and values differ in length")

    def max_over(self, t_start=-np.inf, t_end=np.inf):
        mask = (self.times >= t_start) & (self.times <= t_end + 1e-9)
        return float(np.max(self.values[mask]))


def spectral_norm(M):
    """Largest singular value, via the smaller Gram matrix."""
    M = np.asarray(M, dtype=float)
    G = M @ M.T if M.shape[0] <= M.shape[1] else M.T @ M
    return float(np.sqrt(max(np.linalg.eigvalsh(G)[-1], 0.0)))


def relative_state_error(Y_fom, Y_rom, metric="frobenius"):
    """``||Y - V Y_hat|| / ||Y||`` with the Frobenius (default) or spectral norm."""
    Y_fom = np.asarray(Y_fom, dtype=float)
    Y_rom = np.asarray(Y_rom, dtype=float)
    if Y_fom.shape != Y_rom.shape:
        raise ValueError(f"shape mismatch {Y_fom.shape} vs {Y_rom.shape}")
    if metric == "spectral":
        norm = spectral_norm
    elif metric == "frobenius":
        norm = np.linalg.norm
    else:
        raise ValueError(f"unknown metric {metric!r}")
    ref = norm(Y_fom)
    if ref == 0:
        raise ValueError("reference trajectory has zero norm")
    with np.errstate(invalid="ignore", over="ignore"):
        err = norm(Y_fom - Y_rom)
    return float(err / ref) if np.isfinite(err) else np.inf


def _drift(values):
    values = np.asarray(values, dtype=float)
    with np.errstate(invalid="ignore", over="ignore"):
        drift = np.abs(values - values[0])
    return np.where(np.isfinite(drift), drift, np.inf)


def fom_energy_error_series(model, rom, traj, label="fom_energy"):
    """``|H_d(V y_hat(t)) - H_d(V y_hat(0))|`` along a reduced trajectory."""
    Y = rom.lift_states(traj.states)
    with np.errstate(invalid="ignore", over="ignore"):
        H = [model.hamiltonian(Y[:, k]) for k in range(Y.shape[1])]
    return SeriesReport(traj.times, _drift(H), label)


def rom_energy_error_series(rom, traj, label="rom_energy"):
    """``|H_hat(y_hat(t)) - H_hat(y_hat(0))|`` along a reduced trajectory."""
    H = [rom.hamiltonian(traj.states[:, k]) for k in range(traj.states.shape[1])]
    return SeriesReport(traj.times, _drift(H), label)


def invariant_error_series(model, rom, traj):
    """One drift series per invariant of the full model (empty if none)."""
    Y = rom.lift_states(traj.states)
    if not model.invariants(Y[:, 0]):
        return []
    values = np.array([[v for _, v in model.invariants(Y[:, k])]
                       for k in range(Y.shape[1])])
    names = [name for name, _ in model.invariants(Y[:, 0])]
    return [SeriesReport(traj.times, _drift(values[:, i]), name)
            for i, name in enumerate(names)]


def hamiltonian_series(model, states):
    return np.array([model.hamiltonian(states[:, k]) for k in range(states.shape[1])])
