"""Full-order canonical Hamiltonian models on periodic 1D grids.

Every model is stored in the split form

    q' = D_p p + f_q(q, p),    p' = -D_q q - f_p(q, p),

with symmetric ``D_q``, ``D_p`` and a spatially local nonlinear energy
density ``h(q_i, p_i)`` such that ``f_q = dh/dp`` and ``f_p = dh/dq``.
The vector field is therefore ``J grad G`` with

    G(q, p) = 1/2 q^T D_q q + 1/2 p^T D_p p + sum_i h(q_i, p_i),

and the displayed discrete Hamiltonian of each model satisfies
``H_d = weight * G`` (see :attr:`FomModel.weight`).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Callable

import numpy as np


class ModelKind(str, Enum):
    LINEAR_WAVE_FD = "linear_wave_fd"
    LINEAR_WAVE_PS = "linear_wave_ps"
    NLSE = "nlse"
    SINE_GORDON = "sine_gordon"


# Paper setups, keyed by kind. Used when a config omits a value.
DEFAULT_SETUPS = {
    ModelKind.LINEAR_WAVE_FD: dict(n=500, domain_length=1.0, params={"c": 0.1}),
    ModelKind.LINEAR_WAVE_PS: dict(n=500, domain_length=1.0, params={"c": 0.1}),
    ModelKind.NLSE: dict(n=64, domain_length=2 * np.sqrt(2) * np.pi,
                         params={"gamma": 2.0}),
    ModelKind.SINE_GORDON: dict(n=200, domain_length=40.0, params={}),
}

_INITIAL_CONDITIONS = {
    ModelKind.LINEAR_WAVE_FD: ("spline_bump", "zero"),
    ModelKind.LINEAR_WAVE_PS: ("spline_bump", "zero"),
    ModelKind.NLSE: ("perturbed_plane_wave", "zero"),
    ModelKind.SINE_GORDON: ("breather_kick", "zero"),
}


@dataclass(frozen=True)
class ModelSpec:
    """Parameters selecting one full-order model.

    Parameters
    ----------
    kind : ModelKind or str
    n : int
        Number of grid points.
    domain_length : float
        Length of the periodic domain.
    params : dict
        ``{"c": ...}`` for the linear wave models, ``{"gamma": ...}`` for NLSE.
    initial_condition : str
        Name of the initial condition; the default is the model's standard
        setup.
    """

    kind: ModelKind
    n: int
    domain_length: float
    params: dict = field(default_factory=dict)
    initial_condition: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", ModelKind(self.kind))
        object.__setattr__(self, "params", dict(self.params))
        if self.initial_condition is None:
            object.__setattr__(self, "initial_condition",
                               _INITIAL_CONDITIONS[self.kind][0])
        self.validate()

    def validate(self):
        if int(self.n) != self.n or self.n < 4:
            raise ValueError(f"n must be an integer >= 4, got {self.n}")
        if not np.isfinite(self.domain_length) or self.domain_length <= 0:
            raise ValueError(
                f"domain_length must be positive, got {self.domain_length}")
        if self.kind is ModelKind.LINEAR_WAVE_PS and self.n % 2:
            raise ValueError("pseudo-spectral model requires an even n")
        if self.kind in (ModelKind.LINEAR_WAVE_FD, ModelKind.LINEAR_WAVE_PS):
            c = self.params.get("c", 0.1)
            if not c > 0:
                raise ValueError(f"wave speed c must be positive, got {c}")
        if self.kind is ModelKind.NLSE:
            gamma = self.params.get("gamma", 2.0)
            if not gamma > 0:
                raise ValueError(f"gamma must be positive, got {gamma}")
        if self.initial_condition not in _INITIAL_CONDITIONS[self.kind]:
            raise ValueError(
                f"unknown initial condition {self.initial_condition!r} for "
                f"{self.kind.value}; choose from "
                f"{_INITIAL_CONDITIONS[self.kind]}")

    @classmethod
    def default(cls, kind, **overrides):
        """The standard experiment setup for ``kind``."""
        kind = ModelKind(kind)
        setup = dict(DEFAULT_SETUPS[kind])
        setup["params"] = dict(setup["params"])
        setup.update(overrides)
        return cls(kind=kind, **setup)

    def to_dict(self):
        return {"kind": self.kind.value, "n": int(self.n),
                "domain_length": float(self.domain_length),
                "params": dict(self.params),
                "initial_condition": self.initial_condition}

    @classmethod
    def from_dict(cls, data):
        return cls(**data)


@dataclass(frozen=True)
class StateSplit:
    """A canonical state ``y = [q, p]``."""

    q: np.ndarray
    p: np.ndarray

    def __post_init__(self):
        q = np.asarray(self.q, dtype=float)
        p = np.asarray(self.p, dtype=float)
        if q.shape != p.shape or q.ndim != 1:
            raise ValueError(
                f"q and p must be 1D of equal length, got {q.shape}, {p.shape}")
        if not (np.all(np.isfinite(q)) and np.all(np.isfinite(p))):
            raise ValueError("state contains non-finite entries")
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "p", p)

    @classmethod
    def from_vector(cls, y):
        y = np.asarray(y, dtype=float)
        if y.ndim != 1 or y.size % 2:
            raise ValueError(f"expected an even-length 1D state, got {y.shape}")
        half = y.size // 2
        return cls(y[:half], y[half:])

    def vector(self):
        return np.concatenate([self.q, self.p])


# Discrete operators ==========================================================

def periodic_second_difference(n, dx):
    """The periodic three-point Laplacian ``(q_{i+1} - 2 q_i + q_{i-1})/dx^2``."""
    D = -2.0 * np.eye(n)
    idx = np.arange(n)
    D[idx, (idx + 1) % n] += 1.0
    D[idx, (idx - 1) % n] += 1.0
    return D / dx**2


def fourier_second_derivative(n, length):
    """Dense real Fourier differentiation matrix for d^2/dx^2.

    The operator is diagonalized by the DFT with symbol ``-k^2``,
    ``k = 2 pi m / length`` for ``m = -n/2, ..., n/2 - 1``. The result is a
    symmetric circulant matrix.
    """
    if n % 2:
        raise ValueError("Fourier differentiation matrix needs an even n")
    k = 2 * np.pi * np.fft.fftfreq(n, d=length / n)
    # np.fft.fftfreq puts the Nyquist mode at -n/2, matching the symbol set.
    column = np.fft.ifft(-k**2).real
    idx = np.arange(n)
    D = column[(idx[:, None] - idx[None, :]) % n]
    return 0.5 * (D + D.T)


def _spline_bump(s):
    s = np.abs(s)
    return np.where(s <= 1, 1 - 1.5 * s**2 + 0.75 * s**3,
                    np.where(s <= 2, 0.25 * (2 - s)**3, 0.0))


def _forward_diff(v, dx):
    return (np.roll(v, -1) - v) / dx


# Full-order model ============================================================

# Local nonlinearity: energy density, gradient (f_q, f_p) and Hessian blocks.
LocalEnergy = Callable[[np.ndarray, np.ndarray], np.ndarray]


@dataclass(frozen=True, eq=False)
class FomModel:
    """A canonical Hamiltonian full-order model.

    Attributes
    ----------
    spec : ModelSpec
    x : (n,) ndarray
        Grid points.
    dx : float
    d_q, d_p : (n, n) ndarray
        Symmetric linear operators.
    weight : float
        Constant with ``H_d = weight * G``, see the module docstring. It is
        1 for the linear wave models, ``dx`` for sine-Gordon and ``-dx`` for
        NLSE (whose displayed Hamiltonian drives the flow with the opposite
        sign in the ``(q, p)`` labelling used here).
    """

    spec: ModelSpec
    x: np.ndarray
    dx: float
    d_q: np.ndarray
    d_p: np.ndarray
    weight: float
    _density: LocalEnergy | None = None
    _gradient: Callable | None = None
    _hessian: Callable | None = None
    _hamiltonian: Callable | None = None
    _invariants: tuple = ()

    @property
    def n(self):
        return self.spec.n

    @property
    def is_linear(self):
        return self._density is None

    # -- nonlinear terms ------------------------------------------------------
    def forcing(self, q, p):
        """Return ``(f_q, f_p)``; arrays may carry extra trailing axes."""
        if self.is_linear:
            return np.zeros_like(q), np.zeros_like(p)
        return self._gradient(q, p)

    def forcing_jacobian(self, q, p):
        """Diagonals of the four Jacobian blocks of the forcing.

        Returns ``(dfq_dq, dfq_dp, dfp_dq, dfp_dp)``, each of the shape of
        ``q``. The blocks are diagonal because the nonlinearity is local.
        """
        if self.is_linear:
            z = np.zeros_like(q)
            return z, z, z, z
        h_qq, h_qp, h_pp = self._hessian(q, p)
        return h_qp, h_pp, h_qq, h_qp

    def nonlinear_energy(self, q, p):
        """``sum_i h(q_i, p_i)`` without grid weight."""
        if self.is_linear:
            return 0.0
        return float(np.sum(self._density(q, p)))

    # -- vector field ---------------------------------------------------------
    def split(self, y):
        y = np.asarray(y, dtype=float)
        if y.shape[0] != 2 * self.n:
            raise ValueError(
                f"state has length {y.shape[0]}, model expects {2 * self.n}")
        return y[:self.n], y[self.n:]

    def rhs(self, y):
        q, p = self.split(y)
        f_q, f_p = self.forcing(q, p)
        return np.concatenate([self.d_p @ p + f_q, -(self.d_q @ q) - f_p])

    def jacobian(self, y):
        q, p = self.split(y)
        n = self.n
        J = np.zeros((2 * n, 2 * n))
        J[:n, n:] = self.d_p
        J[n:, :n] = -self.d_q
        if not self.is_linear:
            a, b, c, d = self.forcing_jacobian(q, p)
            idx = np.arange(n)
            J[idx, idx] += a
            J[idx, n + idx] += b
            J[n + idx, idx] -= c
            J[n + idx, n + idx] -= d
        return J

    def linear_operator(self):
        """The constant Jacobian ``[[0, D_p], [-D_q, 0]]`` of a linear model."""
        n = self.n
        A = np.zeros((2 * n, 2 * n))
        A[:n, n:] = self.d_p
        A[n:, :n] = -self.d_q
        return A

    # -- conserved quantities -------------------------------------------------
    def canonical_energy(self, y):
        """``G(y)``, the Hamiltonian whose canonical flow is :meth:`rhs`."""
        q, p = self.split(y)
        return (0.5 * q @ self.d_q @ q + 0.5 * p @ self.d_p @ p
                + self.nonlinear_energy(q, p))

    def hamiltonian(self, y):
        """The discrete Hamiltonian ``H_d`` as displayed for the model."""
        q, p = self.split(y)
        return float(self._hamiltonian(q, p))

    def invariants(self, y):
        q, p = self.split(y)
        return [(name, float(fn(q, p))) for name, fn in self._invariants]

    def initial_state(self):
        return _initial_state(self.spec, self.x)


def _initial_state(spec, x):
    if spec.initial_condition == "zero":
        return np.zeros(2 * spec.n)
    if spec.initial_condition == "spline_bump":
        q = _spline_bump(10 * np.abs(x - 0.5))
        return np.concatenate([q, np.zeros_like(q)])
    if spec.initial_condition == "perturbed_plane_wave":
        p = 0.5 * (1 + 0.01 * np.cos(2 * np.pi * x / spec.domain_length))
        return np.concatenate([np.zeros_like(p), p])
    if spec.initial_condition == "breather_kick":
        return np.concatenate([np.zeros_like(x), 4 / np.cosh(x)])
    raise ValueError(f"unknown initial condition {spec.initial_condition!r}")


def build_model(spec):
    """Construct the full-order model described by ``spec``."""
    spec.validate()
    n, L = spec.n, float(spec.domain_length)
    dx = L / n
    kind = spec.kind

    if kind in (ModelKind.LINEAR_WAVE_FD, ModelKind.LINEAR_WAVE_PS):
        c = float(spec.params.get("c", 0.1))
        x = dx * np.arange(n)
        if kind is ModelKind.LINEAR_WAVE_FD:
            D = periodic_second_difference(n, dx)
        else:
            D = fourier_second_derivative(n, L)
        d_q = -c**2 * D
        d_p = np.eye(n)

        if kind is ModelKind.LINEAR_WAVE_FD:
            def hamiltonian(q, p):
                fwd = np.roll(q, -1) - q
                bwd = q - np.roll(q, 1)
                return np.sum(0.5 * p**2 + c**2 * fwd**2 / (4 * dx**2)
                              + c**2 * bwd**2 / (4 * dx**2))
        else:
            def hamiltonian(q, p):
                return 0.5 * p @ p + 0.5 * q @ d_q @ q

        return FomModel(spec, x, dx, d_q, d_p, 1.0,
                        _hamiltonian=hamiltonian)

    x = -L / 2 + dx * np.arange(n)
    D = periodic_second_difference(n, dx)

    if kind is ModelKind.NLSE:
        gamma = float(spec.params.get("gamma", 2.0))

        def density(q, p):
            return 0.25 * gamma * (q**2 + p**2)**2

        def gradient(q, p):
            rho = gamma * (q**2 + p**2)
            return rho * p, rho * q

        def hessian(q, p):
            return (gamma * (3 * q**2 + p**2), 2 * gamma * q * p,
                    gamma * (q**2 + 3 * p**2))

        def hamiltonian(q, p):
            return 0.5 * np.sum(_forward_diff(q, dx)**2 + _forward_diff(p, dx)**2
                                - 0.5 * gamma * (q**2 + p**2)**2) * dx

        def mass(q, p):
            return np.sum(q**2 + p**2) * dx

        def momentum(q, p):
            return np.sum(_forward_diff(p, dx) * q - _forward_diff(q, dx) * p) * dx

        return FomModel(spec, x, dx, D.copy(), D.copy(), -dx,
                        _density=density, _gradient=gradient, _hessian=hessian,
                        _hamiltonian=hamiltonian,
                        _invariants=(("mass", mass), ("momentum", momentum)))

    if kind is ModelKind.SINE_GORDON:
        def density(q, p):
            return 1 - np.cos(q)

        def gradient(q, p):
            return np.zeros_like(p), np.sin(q)

        def hessian(q, p):
            zero = np.zeros_like(q)
            return np.cos(q), zero, zero

        def hamiltonian(q, p):
            return np.sum(0.5 * _forward_diff(q, dx)**2 + 0.5 * p**2
                          + (1 - np.cos(q))) * dx

        return FomModel(spec, x, dx, -D, np.eye(n), dx,
                        _density=density, _gradient=gradient, _hessian=hessian,
                        _hamiltonian=hamiltonian)

    raise ValueError(f"unsupported model kind {kind}")


# Spec-level wrappers operating on StateSplit ================================

def eval_rhs(model, y):
    """``(q', p')`` of ``model`` at the state ``y``."""
    if len(y.q) != model.n:
        raise ValueError(f"state has n={len(y.q)}, model has n={model.n}")
    return StateSplit.from_vector(model.rhs(y.vector()))


def eval_hamiltonian(model, y):
    if len(y.q) != model.n:
        raise ValueError(f"state has n={len(y.q)}, model has n={model.n}")
    return model.hamiltonian(y.vector())


def eval_invariants(model, y):
    if len(y.q) != model.n:
        raise ValueError(f"state has n={len(y.q)}, model has n={model.n}")
    return model.invariants(y.vector())
