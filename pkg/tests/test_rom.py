import numpy as np
import pytest

from hopinf.basis import CotangentLiftBasis, cotangent_lift
from hopinf.inference import Provenance, ReducedOperators, infer, intrusive_project
from hopinf.integrator import Trajectory, integrate
from hopinf.models import ModelSpec, build_model
from hopinf.pipeline import fom_field
from hopinf.rom import HamiltonianRom, LinearRom, lift_trajectory, simulate
from hopinf.snapshots import assemble


def _identity_rom(kind, n=8):
    model = build_model(ModelSpec.default(kind, n=n))
    basis = CotangentLiftBasis(np.eye(n), np.ones(n))
    return HamiltonianRom(intrusive_project(model, basis), basis, model)


@pytest.fixture(scope="module")
def linear_wave_learned():
    """H-OpInf and intrusive ROMs of the standard linear wave at 2r=20."""
    model = build_model(ModelSpec.default("linear_wave_fd"))
    traj = integrate(fom_field(model), model.initial_state(), 0.01, 1000)
    s = assemble(model, traj)
    basis = cotangent_lift(s.Q, s.P, 10)
    return (model, HamiltonianRom(infer(basis, s), basis, model),
            HamiltonianRom(intrusive_project(model, basis), basis, model))


def test_linear_rhs_is_block_operator(rng):
    ops = ReducedOperators(np.diag([1.0, 2.0]), np.eye(2), Provenance.HOPINF)
    model = build_model(ModelSpec.default("linear_wave_fd", n=6))
    rom = HamiltonianRom(ops, CotangentLiftBasis(np.eye(6)[:, :2], np.ones(2)), model)
    y = rng.standard_normal(4)
    A = np.block([[np.zeros((2, 2)), ops.d_p_hat], [-ops.d_q_hat, np.zeros((2, 2))]])
    np.testing.assert_allclose(rom.rhs(y), A @ y, atol=1e-15)
    np.testing.assert_array_equal(rom.jacobian(y), A)


@pytest.mark.parametrize("kind", ["linear_wave_fd", "nlse", "sine_gordon"])
def test_identity_basis_reproduces_fom(kind, rng):
    rom = _identity_rom(kind)
    for _ in range(5):
        y = rng.standard_normal(16)
        np.testing.assert_allclose(rom.rhs(y), rom.model.rhs(y), atol=1e-12)
        np.testing.assert_allclose(rom.jacobian(y), rom.model.jacobian(y), atol=1e-12)
        assert rom.hamiltonian(y) == pytest.approx(rom.model.weight
                                                   * rom.model.canonical_energy(y))


def test_rhs_at_origin_is_projected_forcing():
    rom = _identity_rom("sine_gordon")
    out = rom.rhs(np.zeros(rom.dim))
    assert not out.any()


def test_hamiltonian_at_origin_and_quadratic_form(rng):
    rom = _identity_rom("linear_wave_fd")
    assert rom.hamiltonian(np.zeros(rom.dim)) == 0.0
    y = rng.standard_normal(rom.dim)
    q, p = y[:rom.r], y[rom.r:]
    expected = 0.5 * q @ rom.ops.d_q_hat @ q + 0.5 * p @ rom.ops.d_p_hat @ p
    assert rom.hamiltonian(y) == pytest.approx(expected, rel=1e-14)


@pytest.mark.parametrize("kind", ["nlse", "sine_gordon"])
def test_rhs_is_symplectic_gradient(kind, rng):
    model = build_model(ModelSpec.default(kind, n=16))
    traj = integrate(fom_field(model), 0.3 * rng.standard_normal(32), 0.01, 40)
    s = assemble(model, traj)
    basis = cotangent_lift(s.Q, s.P, 3)
    rom = HamiltonianRom(infer(basis, s), basis, model)
    h = 1e-6
    for _ in range(20):
        y = rng.standard_normal(rom.dim)
        grad = np.array([(rom.hamiltonian(y + h * e) - rom.hamiltonian(y - h * e)) / (2 * h)
                         for e in np.eye(rom.dim)]) / model.weight
        expected = np.concatenate([grad[rom.r:], -grad[:rom.r]])
        assert np.linalg.norm(rom.rhs(y) - expected) <= 1e-6 * np.linalg.norm(expected)


def test_rom_hamiltonian_conserved_by_midpoint(linear_wave_learned):
    _, hop, _ = linear_wave_learned
    traj = simulate(hop, hop.reduce(hop.model.initial_state()), 0.01, 10_000)
    H = np.array([hop.hamiltonian(traj.states[:, k]) for k in range(0, 10_001, 10)])
    assert np.max(np.abs(H - H[0])) <= 1e-8


def test_intrusive_fom_energy_constant(linear_wave_learned):
    model, _, intr = linear_wave_learned
    traj = simulate(intr, intr.reduce(model.initial_state()), 0.01, 10_000)
    full = lift_trajectory(intr, traj).states
    H = np.array([model.hamiltonian(full[:, k]) for k in range(0, 10_001, 10)])
    assert np.max(np.abs(H - H[0])) <= 1e-10


def test_zero_steps_and_lift(rng):
    rom = _identity_rom("sine_gordon")
    y0 = rng.standard_normal(rom.dim)
    traj = rom.simulate(y0, 0.01, 0)
    np.testing.assert_array_equal(traj.states[:, 0], y0)
    zero = Trajectory(np.arange(3.0), np.zeros((rom.dim, 3)))
    assert not lift_trajectory(rom, zero).states.any()
    np.testing.assert_array_equal(lift_trajectory(rom, traj).states, traj.states)


def test_reduce_after_lift_is_identity(linear_wave_learned):
    _, hop, _ = linear_wave_learned
    states = np.random.default_rng(3).standard_normal((hop.dim, 4))
    np.testing.assert_allclose(hop.reduce(hop.lift_states(states)), states, atol=1e-13)


def test_mismatched_dimensions_rejected(rng):
    model = build_model(ModelSpec.default("linear_wave_fd", n=6))
    ops = ReducedOperators(np.eye(3), np.eye(3), Provenance.HOPINF)
    with pytest.raises(ValueError):
        HamiltonianRom(ops, CotangentLiftBasis(np.eye(6)[:, :2], np.ones(2)), model)
    with pytest.raises(ValueError):
        HamiltonianRom(ops, CotangentLiftBasis(np.eye(8)[:, :3], np.ones(3)), model)
    rom = HamiltonianRom(ops, CotangentLiftBasis(np.eye(6)[:, :3], np.ones(3)), model)
    with pytest.raises(ValueError):
        rom.rhs(np.zeros(4))


def test_linear_rom_round_trip(rng):
    V = np.linalg.qr(rng.standard_normal((8, 2)))[0]
    rom = LinearRom(np.array([[0.0, 1.0], [-1.0, 0.0]]), V)
    traj = rom.simulate(np.array([1.0, 0.0]), 0.1, 5)
    assert traj.states.shape == (2, 6)
    np.testing.assert_allclose(rom.reduce(rom.lift_states(traj.states)), traj.states,
                               atol=1e-14)
