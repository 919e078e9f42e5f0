import math

import numpy as np
import pytest

from geoflow import flows as fl
from geoflow import initial_data as idat
from geoflow import pullback as pb
from geoflow import source_geometry as sg
from geoflow import target_geometry as tg
from geoflow.errors import (
    NoContractionError,
    NumericalAbortError,
    UnsupportedOperationError,
)


def test_flow_config_validation():
    with pytest.raises(ValueError):
        fl.FlowConfig(epsilon=-0.1)
    with pytest.raises(ValueError):
        fl.FlowConfig(epsilon=1.5)
    with pytest.raises(ValueError):
        fl.FlowConfig(dt=0.0)
    with pytest.raises(ValueError):
        fl.FlowConfig(scheme="leapfrog")
    with pytest.raises(ValueError):
        fl.FlowConfig(epsilon=0.0, scheme="imex_spectral")


def test_scheme_requires_flat_metric():
    cfg = fl.FlowConfig(epsilon=1e-2, scheme="imex_spectral")
    curved = sg.conformal_metric_2d((8, 8), amplitude=0.2)
    with pytest.raises(UnsupportedOperationError):
        cfg.validate_against(curved)


def test_constant_state_is_fixed_point(line64, s2):
    u0 = idat.constant_state(line64, s2)
    cfg = fl.FlowConfig(epsilon=0.0, dt=1e-3, t_final=0.01, scheme="rk4_project")
    traj = fl.evolve(u0, cfg)
    final = traj.info["final_state"]
    assert np.max(np.abs(final.points - u0.points)) < 1e-14


def test_rk4_reversibility(spin_wave_64):
    """+dt then -dt returns the state to O(dt^5) per pair."""
    dt = 1e-3
    fwd, _ = fl.step_rk4_project(spin_wave_64, dt, 0.0)
    back, _ = fl.step_rk4_project(fwd, -dt, 0.0)
    err = np.max(np.linalg.norm(back.points - spin_wave_64.points, axis=-1))
    assert err < 50 * dt ** 5


def test_spin_wave_period_return(s2):
    """The profile is an exact rotating solution of the semidiscrete system
    with the grid frequency (sin(kh)/h)^2 cos(theta); one such period
    returns the initial data up to time-integration error alone."""
    m = sg.flat_metric(128)
    theta, k = np.pi / 4, 2
    u0 = idat.spin_wave(m, s2, theta=theta, k_mode=k)
    h = m.spacings[0]
    omega_h = (math.sin(k * h) / h) ** 2 * math.cos(theta)
    period = 2 * math.pi / omega_h
    n_steps = 2000
    cfg = fl.FlowConfig(epsilon=0.0, dt=period / n_steps, t_final=period,
                        scheme="rk4_project", diagnostics_stride=n_steps)
    final = fl.evolve(u0, cfg).info["final_state"]
    err = pb.section_l2(m, final.points - u0.points)
    assert err < 1e-8


def test_energy_exact_conservation_semidiscrete(spin_wave_64):
    cfg = fl.FlowConfig(epsilon=0.0, dt=5e-4, t_final=0.05, scheme="rk4_project",
                        diagnostics_stride=10)
    traj = fl.evolve(spin_wave_64, cfg)
    E = [r.energy for r in traj.records]
    assert abs(E[-1] - E[0]) / E[0] < 1e-12


def test_evolve_abort_carries_partial_trajectory(s2):
    """A step too large to recover by halving aborts with partial data."""
    m = sg.flat_metric(16)
    u0 = idat.spin_wave(m, s2, k_mode=3)
    cfg = fl.FlowConfig(epsilon=0.0, dt=64.0, t_final=64.0, scheme="rk4_project")
    with pytest.raises(NumericalAbortError) as exc_info:
        fl.evolve(u0, cfg)
    traj = exc_info.value.trajectory
    assert traj is not None and len(traj.records) >= 1


def test_semigroup_identity_at_t0(line64):
    rng = np.random.default_rng(0)
    f = rng.standard_normal((64, 3))
    assert np.allclose(fl.heat_semigroup(line64, 1e-2, 0.0, f), f, atol=1e-12)


def test_semigroup_contracts_high_modes(line64):
    x = line64.grid_coordinates()[0]
    f = np.cos(10 * x)[:, None]
    out = fl.heat_semigroup(line64, 1e-2, 1.0, f)
    expected = math.exp(-1e-2 * 10 ** 4) * f
    assert np.max(np.abs(out - expected)) < 1e-12


def test_semigroup_negative_time_rejected(line64):
    with pytest.raises(ValueError):
        fl.heat_semigroup(line64, 1e-2, -1.0, np.zeros((64, 1)))


def test_smoothing_constant_envelope():
    """sup_t t^{3/4} n^3 exp(-t n^4) = (3/4)^{3/4} e^{-3/4}, mode-independent."""
    c = fl.smoothing_constant(1.0)
    envelope = (3 / 4) ** (3 / 4) * math.exp(-3 / 4)
    assert c <= envelope + 1e-12
    assert c >= 0.5 * envelope


def test_smoothing_constant_scales_with_epsilon():
    assert fl.smoothing_constant(0.5) > fl.smoothing_constant(1.0)


def test_imex_matches_rk4_short_time(s2):
    m = sg.flat_metric(64)
    u0 = idat.random_smooth(m, s2, seed=3, band=3)
    dt, T = 1e-4, 0.01
    a = fl.evolve(u0, fl.FlowConfig(epsilon=1e-2, dt=dt, t_final=T,
                                    scheme="rk4_project",
                                    diagnostics_stride=100)).info["final_state"]
    b = fl.evolve(u0, fl.FlowConfig(epsilon=1e-2, dt=dt, t_final=T,
                                    scheme="imex_spectral",
                                    diagnostics_stride=100)).info["final_state"]
    assert pb.section_l2(m, a.points - b.points) < 10 * dt


def test_duhamel_constant_state_one_sweep(line64, s2):
    u0 = idat.constant_state(line64, s2)
    cfg = fl.FlowConfig(epsilon=1e-2, dt=1e-3, t_final=0.01, scheme="duhamel")
    traj = fl.duhamel_solve(u0, cfg)
    assert traj.info["picard_iterations"] <= 2
    final = traj.info["final_state"]
    assert np.max(np.abs(final.points - u0.points)) < 1e-10


def test_duhamel_requires_positive_epsilon(line64, s2):
    u0 = idat.constant_state(line64, s2)
    with pytest.raises(ValueError):
        cfg = fl.FlowConfig(epsilon=0.0, dt=1e-3, t_final=0.01, scheme="duhamel")


def test_duhamel_no_contraction_on_long_horizon(s2):
    m = sg.flat_metric(32)
    u0 = idat.random_smooth(m, s2, seed=1, band=2)
    cfg = fl.FlowConfig(epsilon=1e-2, dt=0.5, t_final=25.0, scheme="duhamel")
    with pytest.raises((NoContractionError, NumericalAbortError)):
        fl.duhamel_solve(u0, cfg)


def test_epsilon_continuation_requires_decreasing(spin_wave_64):
    cfg = fl.FlowConfig(epsilon=1e-2, dt=1e-3, t_final=0.01, scheme="rk4_project")
    with pytest.raises(ValueError):
        fl.epsilon_continuation(spin_wave_64, [1e-3, 1e-2], cfg)
    with pytest.raises(ValueError):
        fl.epsilon_continuation(spin_wave_64, [1e-2, -1e-3], cfg)


def test_epsilon_continuation_gap_shrinks(s2):
    m = sg.flat_metric(32)
    u0 = idat.spin_wave(m, s2)
    cfg = fl.FlowConfig(epsilon=1e-2, dt=1e-3, t_final=0.05, scheme="rk4_project",
                        diagnostics_stride=50)
    rows = fl.epsilon_continuation(u0, [1e-2, 5e-3], cfg)
    assert rows[0]["gap"] > rows[1]["gap"] > 0


def test_gronwall_fit_reported(spin_wave_64):
    cfg = fl.FlowConfig(epsilon=0.0, dt=1e-3, t_final=0.05, scheme="rk4_project",
                        diagnostics_stride=10)
    info = fl.evolve(spin_wave_64, cfg).info
    assert "gronwall_C" in info and "horizon_log2_over_C" in info
    assert info["horizon_log2_over_C"] > 0
