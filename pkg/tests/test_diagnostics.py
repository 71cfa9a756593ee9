import numpy as np
import pytest

from hopinf.basis import CotangentLiftBasis, cotangent_lift
from hopinf.diagnostics import (ErrorReport, SeriesReport, fom_energy_error_series,
                                invariant_error_series, relative_state_error,
                                rom_energy_error_series, spectral_norm)
from hopinf.inference import infer, intrusive_project
from hopinf.integrator import Trajectory, integrate
from hopinf.models import ModelSpec, build_model
from hopinf.pipeline import fom_field
from hopinf.rom import HamiltonianRom
from hopinf.snapshots import assemble


@pytest.fixture(scope="module")
def small_nlse():
    """H-OpInf and intrusive ROMs of a coarse NLSE run, with their trajectories."""
    model = build_model(ModelSpec.default("nlse", n=32))
    traj = integrate(fom_field(model), model.initial_state(), 0.01, 600)
    s = assemble(model, traj, 301)
    basis = cotangent_lift(s.Q, s.P, 4)
    out = {}
    for name, ops in (("hopinf", infer(basis, s)), ("intrusive", intrusive_project(model, basis))):
        rom = HamiltonianRom(ops, basis, model)
        out[name] = (rom, rom.simulate(rom.reduce(model.initial_state()), 0.01, 600))
    return model, out


@pytest.mark.parametrize("metric", ["frobenius", "spectral"])
def test_state_error_reference_values(metric, rng):
    Y = rng.standard_normal((6, 9))
    assert relative_state_error(Y, Y, metric) == 0.0
    assert relative_state_error(Y, np.zeros_like(Y), metric) == pytest.approx(1.0)


@pytest.mark.parametrize("metric", ["frobenius", "spectral"])
def test_state_error_orthogonal_invariance(metric, rng):
    Y, Z = rng.standard_normal((2, 6, 9))
    O = np.linalg.qr(rng.standard_normal((6, 6)))[0]
    assert relative_state_error(O @ Y, O @ Z, metric) == pytest.approx(
        relative_state_error(Y, Z, metric), rel=1e-12)


def test_state_error_rejects_bad_input(rng):
    with pytest.raises(ValueError):
        relative_state_error(np.zeros((2, 3)), np.zeros((2, 3)))
    with pytest.raises(ValueError):
        relative_state_error(np.ones((2, 3)), np.ones((3, 2)))
    with pytest.raises(ValueError):
        relative_state_error(np.ones((2, 3)), np.ones((2, 3)), "max")


def test_state_error_of_diverged_rom_is_infinite():
    Y = np.ones((2, 3))
    assert relative_state_error(Y, np.full((2, 3), np.inf)) == np.inf


def test_spectral_norm_matches_numpy(rng):
    for shape in ((4, 9), (9, 4)):
        M = rng.standard_normal(shape)
        assert spectral_norm(M) == pytest.approx(np.linalg.norm(M, 2), rel=1e-12)


def test_constant_trajectory_gives_zero_series():
    model = build_model(ModelSpec.default("nlse", n=8))
    rom = HamiltonianRom(intrusive_project(model, CotangentLiftBasis(np.eye(8), np.ones(8))),
                         CotangentLiftBasis(np.eye(8), np.ones(8)), model)
    traj = Trajectory(np.arange(4.0), np.tile(np.linspace(0, 1, 16)[:, None], (1, 4)))
    assert not fom_energy_error_series(model, rom, traj).values.any()
    assert not rom_energy_error_series(rom, traj).values.any()
    zero = Trajectory(np.arange(4.0), np.zeros((16, 4)))
    for series in invariant_error_series(model, rom, zero):
        assert not series.values.any()


def test_series_nonnegative_and_start_at_zero(small_nlse):
    model, roms = small_nlse
    for rom, traj in roms.values():
        series = [fom_energy_error_series(model, rom, traj),
                  rom_energy_error_series(rom, traj)] + invariant_error_series(model, rom, traj)
        for s in series:
            assert s.values[0] == 0.0 and np.all(s.values >= 0)
            assert np.all(np.isfinite(s.values))


def test_intrusive_nlse_invariants_exact(small_nlse):
    model, roms = small_nlse
    rom, traj = roms["intrusive"]
    for series in invariant_error_series(model, rom, traj):
        assert series.values.max() <= 1e-10, series.label


def test_hopinf_nlse_momentum_exact_and_mass_bounded(small_nlse):
    model, roms = small_nlse
    rom, traj = roms["hopinf"]
    series = {s.label: s for s in invariant_error_series(model, rom, traj)}
    assert series["momentum"].values.max() <= 1e-8
    mass = series["mass"]
    assert mass.values.max() <= 10 * mass.max_over(t_end=3.0)


def test_no_invariants_outside_nlse():
    model = build_model(ModelSpec.default("sine_gordon", n=8))
    basis = CotangentLiftBasis(np.eye(8), np.ones(8))
    rom = HamiltonianRom(intrusive_project(model, basis), basis, model)
    assert invariant_error_series(model, rom, Trajectory(np.arange(2.0),
                                                         np.zeros((16, 2)))) == []


def test_reports():
    report = ErrorReport("hopinf")
    report.add(4, 0.1, 0.2)
    report.add(8, 0.01, 0.05)
    assert report.error_at(8) == 0.01 and report.error_at(4, "test") == 0.2
    s = SeriesReport(np.arange(5.0), np.array([0, 3, 1, 4, 2.0]), "x")
    assert s.max_over(t_end=2.0) == 3.0 and s.max_over(t_start=3.5) == 2.0
    with pytest.raises(ValueError):
        SeriesReport(np.arange(3.0), np.zeros(2), "bad")
