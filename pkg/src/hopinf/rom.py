"""Reduced canonical Hamiltonian models and their simulation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .basis import lift, reduce
from .integrator import FieldHandle, NewtonOptions, Trajectory, integrate


@dataclass(frozen=True, eq=False)
class HamiltonianRom:
    """Reduced system with Hamiltonian

        H_hat = w * (1/2 q^T Dq q + 1/2 p^T Dp p + sum_i h((phi q)_i, (phi p)_i))

    where ``w`` is the full model's weight, so that for intrusive operators
    ``H_hat(y_hat) == H_d(V y_hat)``. The flow is ``J grad(H_hat) / w``.
    """

    ops: object
    basis: object
    model: object

    def __post_init__(self):
        if self.ops.r != self.basis.r:
            raise ValueError(f"operators have r={self.ops.r}, basis has r={self.basis.r}")
        if self.basis.n != self.model.n:
            raise ValueError("basis and model grid sizes differ")

    @property
    def r(self):
        return self.ops.r

    @property
    def dim(self):
        return 2 * self.r

    def _split(self, y_hat):
        y_hat = np.asarray(y_hat, dtype=float)
        if y_hat.shape[0] != self.dim:
            raise ValueError(f"reduced state has length {y_hat.shape[0]}, expected {self.dim}")
        return y_hat[:self.r], y_hat[self.r:]

    def rhs(self, y_hat):
        q_hat, p_hat = self._split(y_hat)
        dq = self.ops.d_p_hat @ p_hat
        dp = -(self.ops.d_q_hat @ q_hat)
        if not self.model.is_linear:
            phi = self.basis.phi
            f_q, f_p = self.model.forcing(phi @ q_hat, phi @ p_hat)
            dq = dq + phi.T @ f_q
            dp = dp - phi.T @ f_p
        return np.concatenate([dq, dp])

    def linear_operator(self):
        r = self.r
        A = np.zeros((2 * r, 2 * r))
        A[:r, r:] = self.ops.d_p_hat
        A[r:, :r] = -self.ops.d_q_hat
        return A

    def jacobian(self, y_hat):
        A = self.linear_operator()
        if self.model.is_linear:
            return A
        q_hat, p_hat = self._split(y_hat)
        phi = self.basis.phi
        a, b, c, d = self.model.forcing_jacobian(phi @ q_hat, phi @ p_hat)
        r = self.r

        def proj(diag):
            return phi.T @ (diag[:, None] * phi)

        A[:r, :r] += proj(a)
        A[:r, r:] += proj(b)
        A[r:, :r] -= proj(c)
        A[r:, r:] -= proj(d)
        return A

    def hamiltonian(self, y_hat):
        q_hat, p_hat = self._split(y_hat)
        value = 0.5 * q_hat @ self.ops.d_q_hat @ q_hat + 0.5 * p_hat @ self.ops.d_p_hat @ p_hat
        if not self.model.is_linear:
            phi = self.basis.phi
            value += self.model.nonlinear_energy(phi @ q_hat, phi @ p_hat)
        return float(self.model.weight * value)

    def field(self):
        if self.model.is_linear:
            return FieldHandle.linear(self.linear_operator())
        return FieldHandle(self.dim, self.rhs, self.jacobian)

    def reduce(self, y):
        return reduce(self.basis, y)

    def lift_states(self, states):
        return lift(self.basis, states)

    def simulate(self, y_hat0, dt, n_steps, opts=NewtonOptions()):
        return integrate(self.field(), y_hat0, dt, n_steps, opts)


@dataclass(frozen=True, eq=False)
class LinearRom:
    """Unstructured linear ROM ``y_hat' = D y_hat`` on an orthonormal basis V."""

    operator: np.ndarray
    V: np.ndarray

    @property
    def dim(self):
        return self.operator.shape[0]

    def rhs(self, y_hat):
        return self.operator @ y_hat

    def field(self):
        return FieldHandle.linear(self.operator)

    def reduce(self, y):
        return self.V.T @ y

    def lift_states(self, states):
        return self.V @ states

    def simulate(self, y_hat0, dt, n_steps, opts=NewtonOptions()):
        return integrate(self.field(), y_hat0, dt, n_steps, opts)


def simulate(rom, y_hat0, dt, n_steps, opts=NewtonOptions()):
    return rom.simulate(y_hat0, dt, n_steps, opts)


def lift_trajectory(rom, traj):
    """Full-space trajectory ``V y_hat(t_k)``."""
    return Trajectory(traj.times, rom.lift_states(traj.states))
