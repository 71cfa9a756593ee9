"""Cotangent-lift symplectic bases and plain POD bases."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class RankDeficient(ValueError):
    pass


def _fix_signs(U):
    """Flip columns so the largest-magnitude entry of each is positive."""
    # argmax returns the first index on ties.
    rows = np.argmax(np.abs(U), axis=0)
    signs = np.sign(U[rows, np.arange(U.shape[1])])
    signs[signs == 0] = 1.0
    return U * signs


@dataclass(frozen=True, eq=False)
class CotangentLiftBasis:
    """``V = diag(phi, phi)`` with orthonormal ``phi`` of shape ``(n, r)``."""

    phi: np.ndarray
    singular_values: np.ndarray

    @property
    def n(self):
        return self.phi.shape[0]

    @property
    def r(self):
        return self.phi.shape[1]

    def truncate(self, r):
        if not 1 <= r <= self.r:
            raise ValueError(f"cannot truncate a rank-{self.r} basis to {r}")
        return CotangentLiftBasis(self.phi[:, :r], self.singular_values)

    def matrix(self):
        """The 2n x 2r block matrix V."""
        n, r = self.phi.shape
        V = np.zeros((2 * n, 2 * r))
        V[:n, :r] = self.phi
        V[n:, r:] = self.phi
        return V


def cotangent_lift(Q, P, r):
    """Leading ``r`` left singular vectors of ``[Q P]``."""
    Q = np.atleast_2d(np.asarray(Q, dtype=float))
    P = np.atleast_2d(np.asarray(P, dtype=float))
    if Q.shape[0] != P.shape[0]:
        raise ValueError(f"Q has {Q.shape[0]} rows, P has {P.shape[0]}")
    n = Q.shape[0]
    if not 1 <= r <= min(n, Q.shape[1] + P.shape[1]):
        raise ValueError(f"r={r} out of range for {n} x {Q.shape[1] + P.shape[1]} data")
    U, s, _ = np.linalg.svd(np.hstack([Q, P]), full_matrices=False)
    if s[0] == 0 or s[r - 1] / s[0] < 1e-13:
        raise RankDeficient(
            f"requested r={r} exceeds the numerical rank of the snapshot data")
    return CotangentLiftBasis(_fix_signs(U[:, :r]), s)


def pod_basis(Y, k):
    """Leading ``k`` left singular vectors of ``Y`` (ordinary POD)."""
    U, s, _ = np.linalg.svd(np.asarray(Y, dtype=float), full_matrices=False)
    if not 1 <= k <= len(s):
        raise ValueError(f"k={k} out of range")
    if s[k - 1] / s[0] < 1e-13:
        raise RankDeficient(f"k={k} exceeds the numerical rank of Y")
    return _fix_signs(U[:, :k]), s


def project(basis, Q, P):
    """``(phi^T Q, phi^T P)``; also used for forcing and derivative data."""
    Q = np.asarray(Q, dtype=float)
    P = np.asarray(P, dtype=float)
    if Q.shape[0] != basis.n or P.shape[0] != basis.n:
        raise ValueError(f"expected {basis.n} rows, got {Q.shape[0]} and {P.shape[0]}")
    return basis.phi.T @ Q, basis.phi.T @ P


def lift(basis, y_hat):
    """``V y_hat`` for a reduced state (or a 2r x K block of states)."""
    y_hat = np.asarray(y_hat, dtype=float)
    r = basis.r
    if y_hat.shape[0] != 2 * r:
        raise ValueError(f"reduced state has length {y_hat.shape[0]}, expected {2 * r}")
    return np.concatenate([basis.phi @ y_hat[:r], basis.phi @ y_hat[r:]])


def reduce(basis, y):
    """``V^T y``, the symplectic projection of full states (vector or matrix)."""
    y = np.asarray(y, dtype=float)
    n = basis.n
    if y.shape[0] != 2 * n:
        raise ValueError(f"state has length {y.shape[0]}, expected {2 * n}")
    return np.concatenate([basis.phi.T @ y[:n], basis.phi.T @ y[n:]])


def symplecticity_residual(basis):
    """``||V^T J_2n V - J_2r||_F`` from the blocks of ``phi``.

    For ``V = diag(phi, phi)`` the product has off-diagonal blocks
    ``+-phi^T phi`` and zero diagonal blocks.
    """
    G = basis.phi.T @ basis.phi
    off = G - np.eye(basis.r)
    return float(np.sqrt(2.0) * np.linalg.norm(off))


def symplectic_inverse(basis):
    """``V^+ = J_2r^T V^T J_2n`` assembled explicitly (for checks only)."""
    V = basis.matrix()
    return _J(basis.r).T @ V.T @ _J(basis.n)


def _J(n):
    J = np.zeros((2 * n, 2 * n))
    J[:n, n:] = np.eye(n)
    J[n:, :n] = -np.eye(n)
    return J


def projection_error(basis, Y):
    """Frobenius norm ``||Y - V V^T Y||_F`` of full-state snapshots."""
    return float(np.linalg.norm(Y - lift(basis, reduce(basis, Y))))
