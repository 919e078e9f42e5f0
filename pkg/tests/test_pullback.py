import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from geoflow import initial_data as idat
from geoflow import pullback as pb
from geoflow import source_geometry as sg
from geoflow import target_geometry as tg
from geoflow.errors import OffManifoldError


def test_map_state_validates_manifold(line64, s2):
    pts = np.ones((64, 3))
    with pytest.raises(OffManifoldError):
        pb.MapState(0.0, pts, s2, line64)


def test_map_state_validates_shape(line64, s2):
    pts = np.zeros((32, 3))
    pts[..., 2] = 1.0
    with pytest.raises(ValueError):
        pb.MapState(0.0, pts, s2, line64)


def test_section_shape_mismatch(spin_wave_64):
    with pytest.raises(ValueError):
        pb.Section(np.zeros((12, 3)), spin_wave_64)


def test_covariant_derivative_tangent(spin_wave_64):
    V = pb.Section(tg.apply_J(spin_wave_64.target, spin_wave_64.points,
                              np.broadcast_to([1.0, 0, 0], (64, 3))),
                   spin_wave_64)
    dV = pb.covariant_derivative(spin_wave_64, V, 0)
    assert dV.tangency_defect() < 1e-12


def test_tension_spin_wave_closed_form(s2):
    """tau = Pi(u_xx) for the rotating-wave profile, to O(h^2)."""
    m = sg.flat_metric(256)
    st_ = idat.spin_wave(m, s2, theta=np.pi / 4, k_mode=2)
    tau = pb.tension_extrinsic(st_).vectors
    x = m.grid_coordinates()[0]
    ct, stt = np.cos(np.pi / 4), np.sin(np.pi / 4)
    w = np.stack([stt * np.cos(2 * x), stt * np.sin(2 * x), ct * np.ones_like(x)],
                 axis=-1)
    lap = -4 * np.stack([stt * np.cos(2 * x), stt * np.sin(2 * x),
                         np.zeros_like(x)], axis=-1)
    expected = lap - np.sum(lap * w, axis=-1, keepdims=True) * w
    assert np.max(np.linalg.norm(tau - expected, axis=-1)) < 5e-3


def test_tilde_laplacian_self_adjoint(spin_wave_64):
    """<Lap V, W> = <V, Lap W> exactly (divergence form + projections)."""
    st_ = spin_wave_64
    rng = np.random.default_rng(0)
    V = pb.Section(tg.project_tangent(st_.target, st_.points,
                                      rng.standard_normal((64, 3))), st_)
    W = pb.Section(tg.project_tangent(st_.target, st_.points,
                                      rng.standard_normal((64, 3))), st_)
    lhs = pb.section_inner(st_.metric, pb.tilde_laplacian(st_, V).vectors, W.vectors)
    rhs = pb.section_inner(st_.metric, V.vectors, pb.tilde_laplacian(st_, W).vectors)
    assert abs(lhs - rhs) < 1e-10 * max(1.0, abs(lhs))


def test_tilde_laplacian_negative_semidefinite(spin_wave_64):
    st_ = spin_wave_64
    rng = np.random.default_rng(1)
    V = pb.Section(tg.project_tangent(st_.target, st_.points,
                                      rng.standard_normal((64, 3))), st_)
    quad = pb.section_inner(st_.metric, pb.tilde_laplacian(st_, V).vectors, V.vectors)
    assert quad <= 1e-10


def test_energy_spin_wave_closed_form(s2):
    """E = pi k^2 sin^2(theta) up to the discrete-symbol factor."""
    m = sg.flat_metric(256)
    theta, k = np.pi / 4, 2
    st_ = idat.spin_wave(m, s2, theta=theta, k_mode=k)
    h = m.spacings[0]
    keff = math.sin(k * h) / h
    expected = math.pi * keff ** 2 * math.sin(theta) ** 2
    assert math.isclose(pb.energy(st_), expected, rel_tol=1e-10)


def test_energy_constant_map_zero(line64, s2):
    st_ = idat.constant_state(line64, s2)
    assert pb.energy(st_) == 0.0


def test_norm_nk_positive_and_monotone_content(s2):
    m = sg.flat_metric(128)
    low = idat.spin_wave(m, s2, k_mode=1)
    high = idat.spin_wave(m, s2, k_mode=3)
    assert pb.norm_Nk(low, k=2) < pb.norm_Nk(high, k=2)


def test_norm_nk_rejects_bad_k(spin_wave_64):
    with pytest.raises(ValueError):
        pb.norm_Nk(spin_wave_64, k=0)


@settings(max_examples=10, deadline=None)
@given(seed=st.integers(0, 10 ** 6))
def test_schrodinger_rhs_energy_orthogonality(seed):
    """<J tau, tau> = 0 pointwise: the dispersive term moves no energy."""
    m = sg.flat_metric(48)
    t = tg.make_target("s2")
    st_ = idat.random_smooth(m, t, seed=seed, band=2)
    tau = pb.tension_extrinsic(st_).vectors
    jtau = tg.apply_J(t, st_.points, tau)
    assert np.max(np.abs(np.sum(jtau * tau, axis=-1))) < 1e-12


def test_commutator_same_axis_zero(spin_wave_64):
    st_ = spin_wave_64
    rng = np.random.default_rng(2)
    V = pb.Section(tg.project_tangent(st_.target, st_.points,
                                      rng.standard_normal((64, 3))), st_)
    assert pb.commutator_residual(st_, V, 0, 0) < 1e-12


def test_chart_oracle_rejects_north_pole_states(s2):
    m = sg.flat_metric(64)
    st_ = idat.constant_state(m, s2)     # sits exactly at the chart's bad point
    with pytest.raises(OffManifoldError):
        pb.tension_chart_oracle(st_)


def test_chart_oracle_matches_extrinsic(s2):
    m = sg.flat_metric(256)
    st_ = idat.random_smooth(m, s2, seed=4, band=3)
    flipped = pb.MapState(0.0, st_.points * np.array([1.0, 1.0, -1.0]), s2, m)
    a = pb.tension_extrinsic(flipped).vectors
    b = pb.tension_chart_oracle(flipped).vectors
    scale = np.max(np.linalg.norm(a, axis=-1))
    assert np.max(np.linalg.norm(a - b, axis=-1)) < 0.02 * max(scale, 1.0)
