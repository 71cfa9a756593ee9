import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hopinf.basis import CotangentLiftBasis, cotangent_lift
from hopinf.inference import (IllConditioned, Provenance, ReducedOperators, extract_subrom,
                              infer, intrusive_project, lyapunov_residual, operator_distance,
                              solve_symmetric_ls, standard_opinf)
from hopinf.integrator import integrate
from hopinf.models import ModelSpec, build_model
from hopinf.pipeline import fom_field
from hopinf.snapshots import SnapshotSet, assemble

seeds = st.integers(0, 2**32 - 1)


def _sym(rng, r):
    M = rng.standard_normal((r, r))
    return M + M.T


def kkt_oracle(A, R):
    """Dense least-squares solve over the r(r+1)/2 free entries of symmetric D."""
    r = A.shape[0]
    iu = np.triu_indices(r)
    cols = []
    for i, j in zip(*iu):
        E = np.zeros((r, r))
        E[i, j] = E[j, i] = 1.0
        cols.append((A.T @ E).ravel())
    v, *_ = np.linalg.lstsq(np.column_stack(cols), R.T.ravel(), rcond=None)
    D = np.zeros((r, r))
    D[iu] = v
    return D + np.triu(D, 1).T


def objective(A, R, D):
    return np.linalg.norm(A.T @ D - R.T)


# solve_symmetric_ls -----------------------------------------------------------

def test_orthonormal_rows(rng):
    A = np.linalg.qr(rng.standard_normal((7, 3)))[0].T
    R = rng.standard_normal((3, 7))
    np.testing.assert_allclose(solve_symmetric_ls(A, R), 0.5 * (A @ R.T + R @ A.T),
                               atol=1e-13)


def test_two_by_two_kkt_value():
    A = np.array([[1.0, 0.0], [0.0, 2.0]])
    R = np.array([[1.0, 1.0], [0.0, 2.0]])
    np.testing.assert_allclose(solve_symmetric_ls(A, R), [[1.0, 0.4], [0.4, 1.0]],
                               atol=1e-14)


def test_consistent_data_recovered_exactly(rng):
    S = _sym(rng, 4)
    A = rng.standard_normal((4, 30))
    np.testing.assert_allclose(solve_symmetric_ls(A, S.T @ A), S, atol=1e-10)


@settings(max_examples=50, deadline=None)
@given(seeds, st.integers(1, 5))
def test_matches_vectorized_kkt_oracle(seed, r):
    rng = np.random.default_rng(seed)
    K = r + int(rng.integers(0, 10))
    A, R = rng.standard_normal((2, r, K))
    D = solve_symmetric_ls(A, R)
    np.testing.assert_allclose(D, kkt_oracle(A, R), atol=1e-10 * max(1, np.abs(D).max()))
    assert lyapunov_residual(A, R, D) <= 1e-10


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_stationarity_matrix_is_skew(seed):
    rng = np.random.default_rng(seed)
    A, R = rng.standard_normal((2, 4, 12))
    D = solve_symmetric_ls(A, R)
    S = A @ (A.T @ D - R.T)
    assert np.linalg.norm(S + S.T) <= 1e-8 * max(np.linalg.norm(S), 1.0)


def test_objective_dominance(rng):
    for _ in range(10):
        A, R = rng.standard_normal((2, 4, 15))
        D = solve_symmetric_ls(A, R)
        unconstrained = np.linalg.lstsq(A.T, R.T, rcond=None)[0]
        f = objective(A, R, D)
        assert f >= objective(A, R, unconstrained) - 1e-12
        for _ in range(20):
            assert f <= objective(A, R, D + 1e-3 * _sym(rng, 4))


def test_output_exactly_symmetric(rng):
    D = solve_symmetric_ls(*rng.standard_normal((2, 5, 9)))
    assert np.array_equal(D, D.T)


def test_rank_policy(rng):
    A = np.zeros((3, 8))
    A[:2] = rng.standard_normal((2, 8))
    R = rng.standard_normal((3, 8))
    with pytest.raises(IllConditioned):
        solve_symmetric_ls(A, R, rank_policy="raise")
    D = solve_symmetric_ls(A, R, rank_policy="min_norm")
    assert D[2, 2] == 0.0
    np.testing.assert_allclose(D[:2, :2], solve_symmetric_ls(A[:2], R[:2]), atol=1e-12)
    with pytest.raises(IllConditioned):
        solve_symmetric_ls(np.zeros((2, 5)), R[:2, :5], rank_policy="min_norm")
    with pytest.raises(ValueError):
        solve_symmetric_ls(A, R, rank_policy="ridge")


# infer ----------------------------------------------------------------------

def _identity_snapshots(rng, Dq, Dp, K=40):
    """Reduced linear data with exact derivatives, embedded with phi = I."""
    r = Dq.shape[0]
    Q, P = rng.standard_normal((2, r, K))
    zero = np.zeros((r, K))
    spec = ModelSpec.default("linear_wave_fd", n=max(r, 4))
    return SnapshotSet(spec, 0.1, Q, P, zero, zero, Dp @ P, -Dq @ Q)


def test_synthetic_recovery(rng):
    Dq, Dp = _sym(rng, 3), _sym(rng, 3)
    s = _identity_snapshots(rng, Dq, Dp)
    ops = infer(CotangentLiftBasis(np.eye(3), np.ones(3)), s)
    np.testing.assert_allclose(ops.d_q_hat, Dq, atol=1e-8)
    np.testing.assert_allclose(ops.d_p_hat, Dp, atol=1e-8)
    assert ops.provenance is Provenance.HOPINF


def test_equilibrium_data_is_ill_conditioned():
    n, K = 6, 10
    zero = np.zeros((n, K))
    s = SnapshotSet(ModelSpec.default("linear_wave_fd", n=n), 0.1, zero, zero, zero, zero,
                    zero, zero)
    basis = CotangentLiftBasis(np.eye(n)[:, :2], np.ones(2))
    with pytest.raises(IllConditioned, match="D_p_hat"):
        infer(basis, s)


def test_extract_subrom(rng):
    ops = ReducedOperators(_sym(rng, 4), _sym(rng, 4), Provenance.HOPINF)
    same = extract_subrom(ops, 4)
    assert np.array_equal(same.d_q_hat, ops.d_q_hat)
    one = extract_subrom(ops, 1)
    assert one.d_q_hat.shape == (1, 1) and one.d_p_hat[0, 0] == ops.d_p_hat[0, 0]
    with pytest.raises(ValueError):
        extract_subrom(ops, 5)


def test_reduced_operators_validation():
    with pytest.raises(ValueError):
        ReducedOperators(np.eye(2), np.eye(3), Provenance.HOPINF)
    with pytest.raises(ValueError):
        ReducedOperators(np.full((2, 2), np.nan), np.eye(2), Provenance.HOPINF)


# intrusive and baselines ------------------------------------------------------

def test_intrusive_identity_and_unit_basis():
    model = build_model(ModelSpec.default("linear_wave_fd", n=8))
    full = intrusive_project(model, CotangentLiftBasis(np.eye(8), np.ones(8)))
    np.testing.assert_array_equal(full.d_q_hat, model.d_q)
    unit = intrusive_project(model, CotangentLiftBasis(np.eye(8)[:, :1], np.ones(1)))
    assert unit.d_q_hat[0, 0] == model.d_q[0, 0]
    with pytest.raises(ValueError):
        intrusive_project(model, CotangentLiftBasis(np.eye(6), np.ones(6)))


def test_standard_opinf_recovers_consistent_operator(rng):
    V = np.linalg.qr(rng.standard_normal((10, 4)))[0]
    A = rng.standard_normal((4, 4))
    Y_hat = rng.standard_normal((4, 30))
    np.testing.assert_allclose(standard_opinf(V, V @ Y_hat, V @ (A @ Y_hat)), A,
                               atol=1e-10)
    with pytest.raises(IllConditioned):
        standard_opinf(V, np.zeros((10, 30)), np.zeros((10, 30)))


def test_operator_distance(rng):
    a = ReducedOperators(_sym(rng, 3), _sym(rng, 3), Provenance.HOPINF)
    assert operator_distance(a, a) == (0.0, 0.0)
    eps = 1e-3
    b = ReducedOperators(a.d_q_hat + eps * np.eye(3), a.d_p_hat + eps * np.eye(3),
                         Provenance.INTRUSIVE)
    np.testing.assert_allclose(operator_distance(a, b), [eps * np.sqrt(3)] * 2, rtol=1e-10)
    with pytest.raises(ValueError):
        operator_distance(a, extract_subrom(a, 2))


def test_learned_operators_converge_to_intrusive_with_analytic_data(rng):
    model = build_model(ModelSpec.default("nlse", n=8))
    n, K = 8, 60
    Y = 0.5 * rng.standard_normal((2 * n, K))
    dY = np.column_stack([model.rhs(Y[:, k]) for k in range(K)])
    Fq, Fp = model.forcing(Y[:n], Y[n:])
    s = SnapshotSet(model.spec, 0.1, Y[:n], Y[n:], Fq, Fp, dY[:n], dY[n:])
    basis = cotangent_lift(s.Q, s.P, n)
    dq, dp = operator_distance(infer(basis, s), intrusive_project(model, basis))
    assert max(dq, dp) <= 1e-8


def test_distance_to_intrusive_shrinks_with_dt():
    """n=64, r=4 on four-cosine-mode data, where the basis captures the dynamics."""
    model = build_model(ModelSpec.default("linear_wave_fd", n=64, params={"c": 1.0}))
    amp = np.random.default_rng(7).standard_normal((2, 4))
    modes = np.cos(2 * np.pi * np.outer(model.x, np.arange(1, 5)))
    y0 = np.concatenate([modes @ amp[0], modes @ amp[1]])
    dists = []
    for dt in (1e-2, 1e-3):
        s = assemble(model, integrate(fom_field(model), y0, dt, int(round(2.0 / dt))))
        basis = cotangent_lift(s.Q, s.P, 4)
        dists.append(operator_distance(infer(basis, s), intrusive_project(model, basis)))
    assert dists[1][0] < dists[0][0] and dists[1][1] < dists[0][1]
