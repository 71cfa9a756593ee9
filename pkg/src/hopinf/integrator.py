"""Implicit midpoint time stepping with a Newton inner solve."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.linalg as la


class IntegrationError(RuntimeError):
    """Base class for time-stepping failures; ``step`` is set by integrate."""

    step: int | None = None


class NonConvergence(IntegrationError):
    def __init__(self, residual, iters, step=None):
        self.residual = residual
        self.iters = iters
        self.step = step
        where = "" if step is None else f" at step {step}"
        super().__init__(f"Newton did not converge in {iters} iterations{where}"
                         f" (residual {residual:.3e})")


class SingularJacobian(IntegrationError):
    def __init__(self, step=None):
        self.step = step
        where = "" if step is None else f" at step {step}"
        super().__init__(f"singular Newton matrix{where}")


@dataclass(frozen=True)
class NewtonOptions:
    residual_tol: float = 1e-12
    max_iters: int = 50
    line_search: bool = False

    def __post_init__(self):
        if not self.residual_tol > 0:
            raise ValueError("residual_tol must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")


@dataclass(frozen=True, eq=False)
class FieldHandle:
    """A vector field ``y' = rhs(y)`` with its Jacobian.

    If ``linear_operator`` is given the field is ``y' = A y`` and the
    callables are ignored by the integrator.
    """

    dim: int
    rhs: Callable[[np.ndarray], np.ndarray]
    jacobian: Callable[[np.ndarray], np.ndarray]
    linear_operator: np.ndarray | None = None

    @classmethod
    def linear(cls, A):
        A = np.asarray(A, dtype=float)
        return cls(A.shape[0], lambda y: A @ y, lambda y: A, A)


@dataclass(frozen=True, eq=False)
class Trajectory:
    """States at equally spaced times; ``states[:, k]`` is the state at ``times[k]``."""

    times: np.ndarray
    states: np.ndarray
    newton_iters: np.ndarray | None = None

    def __post_init__(self):
        if self.states.ndim != 2 or self.states.shape[1] != len(self.times):
            raise ValueError(f"states {self.states.shape} do not match "
                             f"{len(self.times)} time stamps")

    @property
    def dt(self):
        return float(self.times[1] - self.times[0]) if len(self.times) > 1 else 0.0

    def window(self, t_end):
        """Columns with ``t <= t_end`` (inclusive, up to rounding)."""
        k = int(np.searchsorted(self.times, t_end + 1e-9 * max(1.0, abs(t_end)),
                                side="right"))
        return Trajectory(self.times[:k], self.states[:, :k])


_EPS = np.finfo(float).eps
_STAGNATION_ULPS = 8.0
_STAGNATION_FACTOR = 100.0


def _linear_step_factors(A, dt):
    eye = np.eye(A.shape[0])
    try:
        lu = la.lu_factor(eye - 0.5 * dt * A, check_finite=False)
    except la.LinAlgError as exc:
        raise SingularJacobian() from exc
    if np.any(np.diag(lu[0]) == 0):
        raise SingularJacobian()
    return lu, eye + 0.5 * dt * A


def midpoint_step(field, y, dt, opts=NewtonOptions()):
    """One implicit midpoint step, ``(y1 - y)/dt = rhs((y1 + y)/2)``.

    Returns the new state. For a linear field the step is the Cayley map
    ``(I - dt/2 A)^{-1} (I + dt/2 A) y``. Newton stops once the residual
    2-norm is at most ``opts.residual_tol``; it also accepts an iterate whose
    update is a few ulps of the state while the residual is within a factor
    100 of the tolerance, since no floating-point iterate can do better.
    """
    y, _ = _step(field, np.asarray(y, dtype=float), dt, opts)
    return y


def _step(field, y, dt, opts, linear_factors=None):
    if field.linear_operator is not None:
        lu, rhs_mat = linear_factors or _linear_step_factors(field.linear_operator, dt)
        return la.lu_solve(lu, rhs_mat @ y, check_finite=False), 1

    eye = np.eye(field.dim)
    y1 = y + dt * field.rhs(y)

    def residual(z):
        return z - y - dt * field.rhs(0.5 * (z + y))

    res = residual(y1)
    norm = np.linalg.norm(res)
    for it in range(1, opts.max_iters + 1):
        if norm <= opts.residual_tol:
            return y1, it - 1
        M = eye - 0.5 * dt * field.jacobian(0.5 * (y1 + y))
        try:
            lu = la.lu_factor(M, check_finite=False)
        except la.LinAlgError as exc:
            raise SingularJacobian() from exc
        if np.any(np.diag(lu[0]) == 0):
            raise SingularJacobian()
        delta = la.lu_solve(lu, res, check_finite=False)
        if np.linalg.norm(delta) <= _STAGNATION_ULPS * _EPS * np.linalg.norm(y1):
            # The update is below the rounding level of the iterate, so the
            # residual cannot shrink further in floating point.
            if norm <= _STAGNATION_FACTOR * opts.residual_tol:
                return y1 - delta, it
        step = 1.0
        while True:
            trial = y1 - step * delta
            trial_res = residual(trial)
            trial_norm = np.linalg.norm(trial_res)
            if not opts.line_search or trial_norm < norm or step < 1e-4:
                break
            step *= 0.5
        y1, res, norm = trial, trial_res, trial_norm
    if norm <= opts.residual_tol:
        return y1, opts.max_iters
    raise NonConvergence(norm, opts.max_iters)


def integrate(field, y0, dt, n_steps, opts=NewtonOptions()):
    """March ``n_steps`` midpoint steps from ``y0``.

    Linear fields factor the step matrix once. Newton iteration counts per
    step are recorded on the returned trajectory.
    """
    if n_steps < 0:
        raise ValueError("n_steps must be non-negative")
    if not dt != 0:
        raise ValueError("dt must be nonzero")
    y0 = np.asarray(y0, dtype=float)
    states = np.empty((y0.size, n_steps + 1))
    states[:, 0] = y0
    iters = np.zeros(n_steps, dtype=int)

    factors = None
    if field.linear_operator is not None:
        factors = _linear_step_factors(field.linear_operator, dt)

    y = y0
    for k in range(n_steps):
        try:
            y, iters[k] = _step(field, y, dt, opts, factors)
        except IntegrationError as exc:
            exc.step = k
            exc.args = (f"{exc.args[0]} (step {k})",)
            raise
        states[:, k + 1] = y
    return Trajectory(dt * np.arange(n_steps + 1), states, iters)
