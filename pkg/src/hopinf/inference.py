"""Learning reduced operators: Hamiltonian operator inference and baselines."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
import scipy.linalg as la

from .basis import project


class IllConditioned(np.linalg.LinAlgError):
    """The training data do not determine the symmetric operator."""


class Provenance(str, Enum):
    HOPINF = "hopinf"
    INTRUSIVE = "intrusive"
    STANDARD_OPINF = "opinf"


@dataclass(frozen=True, eq=False)
class ReducedOperators:
    d_q_hat: np.ndarray
    d_p_hat: np.ndarray
    provenance: Provenance

    def __post_init__(self):
        if self.d_q_hat.shape != self.d_p_hat.shape or self.d_q_hat.ndim != 2:
            raise ValueError("reduced operators must be square and equal-sized")
        if not (np.all(np.isfinite(self.d_q_hat)) and np.all(np.isfinite(self.d_p_hat))):
            raise ValueError("reduced operators contain non-finite entries")

    @property
    def r(self):
        return self.d_q_hat.shape[0]


def _symmetrize(D):
    return 0.5 * (D + D.T)


def solve_symmetric_ls(A, R, rank_tol=None, rank_policy="raise"):
    """Symmetric ``D`` minimizing ``||A^T D - R^T||_F``.

    The optimality conditions reduce to the Lyapunov equation
    ``(A A^T) D + D (A A^T) = A R^T + R A^T``, solved in the eigenbasis of
    the symmetric positive semidefinite matrix ``A A^T = U diag(lam) U^T``.
    The eigenpairs come from the SVD ``A = U diag(s) W^T`` (``lam = s^2``),
    which resolves small eigenvalues far better than factoring ``A A^T``.

    Parameters
    ----------
    A, R : (r, K) ndarray
        Data and residual matrices.
    rank_tol : float, optional
        Eigenvalues ``lam <= rank_tol * max(lam)`` count as zero. By default
        the numerical rank of ``A`` decides: singular values below
        ``max(r, K) * eps * max(s)`` count as zero.
    rank_policy : {"raise", "min_norm"}
        With "raise", any zero eigenvalue is an error. With "min_norm", the
        entries of ``U^T D U`` not determined by the data (both indices in
        the null space of ``A A^T``) are set to zero, giving the
        minimum-norm minimizer.

    Raises
    ------
    IllConditioned
        If ``A A^T`` is singular under "raise", or zero under "min_norm".
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    R = np.atleast_2d(np.asarray(R, dtype=float))
    if A.shape != R.shape:
        raise ValueError(f"A {A.shape} and R {R.shape} must have equal shapes")
    if rank_policy not in ("raise", "min_norm"):
        raise ValueError(f"unknown rank_policy {rank_policy!r}")
    r, K = A.shape
    # Zero columns leave A A^T unchanged and give a full set of r left vectors.
    padded = A if K >= r else np.hstack([A, np.zeros((r, r - K))])
    U, s, _ = la.svd(padded, full_matrices=False)
    lam = s**2
    if rank_tol is None:
        null = s <= max(r, K) * np.finfo(float).eps * s[0]
    else:
        null = lam <= rank_tol * lam[0]
    if not lam[0] > 0 or (null.any() and rank_policy == "raise"):
        cond = np.inf if lam[-1] <= 0 else lam[0] / lam[-1]
        raise IllConditioned(
            f"data Gram matrix is (numerically) singular, condition {cond:.3e}")
    lam = np.where(null, 0.0, lam)
    C = A @ R.T
    C = U.T @ (C + C.T) @ U
    denom = lam[:, None] + lam[None, :]
    undetermined = null[:, None] & null[None, :]
    X = np.where(undetermined, 0.0, C / np.where(undetermined, 1.0, denom))
    return _symmetrize(U @ X @ U.T)


def lyapunov_residual(A, R, D):
    """Relative residual of the Lyapunov equation solved by ``D``."""
    G = A @ A.T
    C = A @ R.T + R @ A.T
    return np.linalg.norm(G @ D + D @ G - C) / max(np.linalg.norm(C), 1e-300)


def reduced_data(basis, snapshots, columns=None):
    """Projected states, derivatives and forcing used by :func:`infer`."""
    cols = slice(None) if columns is None else columns
    Q_hat, P_hat = project(basis, snapshots.Q[:, cols], snapshots.P[:, cols])
    dQ_hat, dP_hat = project(basis, snapshots.dQ[:, cols], snapshots.dP[:, cols])
    # V_p^T F_q and V_q^T F_p; both maps are phi^T for a cotangent lift.
    Fq_hat, Fp_hat = project(basis, snapshots.Fq[:, cols], snapshots.Fp[:, cols])
    return Q_hat, P_hat, dQ_hat, dP_hat, Fq_hat, Fp_hat


def infer(basis, snapshots, columns=None, rank_policy="min_norm"):
    """Hamiltonian operator inference.

    Solves the two symmetric least-squares problems

        min ||dQ_hat - Fq_hat - D_p P_hat||,   min ||dP_hat + Fp_hat + D_q Q_hat||

    over symmetric ``D_p``, ``D_q``. ``rank_policy`` is passed to
    :func:`solve_symmetric_ls`; the default tolerates reduced directions
    that carry no data (e.g. an exactly conserved mean) and still raises
    when a data matrix is zero.
    """
    Q_hat, P_hat, dQ_hat, dP_hat, Fq_hat, Fp_hat = reduced_data(basis, snapshots, columns)
    try:
        d_p = solve_symmetric_ls(P_hat, dQ_hat - Fq_hat, rank_policy=rank_policy)
    except IllConditioned as exc:
        raise IllConditioned(f"D_p_hat: {exc}; reduce r or add data") from exc
    try:
        d_q = solve_symmetric_ls(Q_hat, -(dP_hat + Fp_hat), rank_policy=rank_policy)
    except IllConditioned as exc:
        raise IllConditioned(f"D_q_hat: {exc}; reduce r or add data") from exc
    return ReducedOperators(d_q, d_p, Provenance.HOPINF)


def extract_subrom(ops, w):
    """Leading ``w x w`` blocks, i.e. the ROM on the first ``w`` basis vectors."""
    if not 1 <= w <= ops.r:
        raise ValueError(f"w={w} must lie in [1, {ops.r}]")
    return ReducedOperators(ops.d_q_hat[:w, :w].copy(), ops.d_p_hat[:w, :w].copy(),
                            ops.provenance)


def intrusive_project(model, basis):
    """Symplectic Galerkin operators ``phi^T D phi``."""
    if basis.n != model.n:
        raise ValueError(f"basis has n={basis.n}, model has n={model.n}")
    phi = basis.phi
    return ReducedOperators(_symmetrize(phi.T @ model.d_q @ phi),
                            _symmetrize(phi.T @ model.d_p @ phi),
                            Provenance.INTRUSIVE)


def standard_opinf(V, Y, dY):
    """Unconstrained linear operator inference ``min ||dY_hat - D Y_hat||_F``.

    ``V`` is an orthonormal (2n x 2r) basis; returns the 2r x 2r operator.
    """
    V = np.asarray(V, dtype=float)
    if Y.shape != dY.shape or Y.shape[0] != V.shape[0]:
        raise ValueError(f"incompatible shapes V {V.shape}, Y {Y.shape}, dY {dY.shape}")
    Y_hat = V.T @ Y
    dY_hat = V.T @ dY
    sol, _, rank, _ = la.lstsq(Y_hat.T, dY_hat.T)
    if rank < Y_hat.shape[0]:
        raise IllConditioned(f"reduced data has rank {rank} < {Y_hat.shape[0]}")
    return sol.T


def operator_distance(a, b):
    """Frobenius distances ``(||a.D_q - b.D_q||, ||a.D_p - b.D_p||)``."""
    if a.r != b.r:
        raise ValueError(f"operators have r={a.r} and r={b.r}")
    return (float(np.linalg.norm(a.d_q_hat - b.d_q_hat)),
            float(np.linalg.norm(a.d_p_hat - b.d_p_hat)))
