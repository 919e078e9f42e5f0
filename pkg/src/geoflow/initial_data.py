"""Named initial-data scenarios.

Every constructor returns an on-manifold MapState; randomized scenarios
draw band-limited ambient noise and push it through the nearest-point
projection so the state is smooth at the grid scale.
"""

from __future__ import annotations

import numpy as np

from . import pullback as pb
from . import source_geometry as sg
from . import target_geometry as tg

SCENARIOS = ("constant", "spin-wave", "random-smooth", "equator-circle", "s6-hopf-like")


def constant_state(metric: sg.SourceMetric, target: tg.EmbeddedTarget) -> pb.MapState:
    p = tg.base_point(target)
    pts = np.broadcast_to(p, metric.sizes + p.shape).copy()
    return pb.MapState(0.0, pts, target, metric)


def spin_wave(metric: sg.SourceMetric, target: tg.EmbeddedTarget,
              theta: float = np.pi / 4, k_mode: int = 2) -> pb.MapState:
    """Rotating-wave profile on the two-sphere, frequency omega = k^2 cos(theta)."""
    if target.kind != "s2":
        raise ValueError("spin-wave initial data requires the s2 target")
    x = metric.grid_coordinates()[0]   # rides the first axis on a 2-D grid
    st, ct = np.sin(theta), np.cos(theta)
    pts = np.stack([st * np.cos(k_mode * x), st * np.sin(k_mode * x),
                    ct * np.ones_like(x)], axis=-1)
    return pb.MapState(0.0, pts, target, metric)


def spin_wave_exact(metric: sg.SourceMetric, target: tg.EmbeddedTarget,
                    t: float, theta: float = np.pi / 4, k_mode: int = 2) -> pb.MapState:
    """The same profile advanced in time with the exact phase k^2 cos(theta) t."""
    if target.kind != "s2":
        raise ValueError("spin-wave initial data requires the s2 target")
    x = metric.grid_coordinates()[0]
    omega = k_mode ** 2 * np.cos(theta)
    phase = k_mode * x - omega * t
    st, ct = np.sin(theta), np.cos(theta)
    pts = np.stack([st * np.cos(phase), st * np.sin(phase),
                    ct * np.ones_like(x)], axis=-1)
    return pb.MapState(t, pts, target, metric)


def random_smooth(metric: sg.SourceMetric, target: tg.EmbeddedTarget,
                  seed: int = 0, band: int = 3, amplitude: float = 0.3) -> pb.MapState:
    """Band-limited ambient noise around the base point, projected to the target.

    The offset keeps the raw field well inside the tube (centered at three
    times the base point so spheres are approached from outside the focal
    set), and the projection lands it exactly on the manifold.
    """
    rng = np.random.default_rng(seed)
    d = target.ambient_dim
    coords = metric.grid_coordinates()
    amb = np.zeros(metric.sizes + (d,))
    amb += 3.0 * tg.base_point(target)
    for a in range(d):
        for axis, x in enumerate(coords):
            L = metric.lengths[axis]
            for mode in range(1, band + 1):
                c, s = rng.standard_normal(2)
                amb[..., a] += amplitude * (
                    c * np.cos(2 * np.pi * mode * x / L)
                    + s * np.sin(2 * np.pi * mode * x / L)
                )
    pts = tg.nearest_point(target, amb, max_distance=np.inf)
    return pb.MapState(0.0, pts, target, metric)


def equator_circle(metric: sg.SourceMetric, target: tg.EmbeddedTarget,
                   winding: int = 1) -> pb.MapState:
    """Geodesic circle traversed along the first source coordinate."""
    x = metric.grid_coordinates()[0]
    L = metric.lengths[0]
    phase = 2 * np.pi * winding * x / L
    if target.kind == "s2":
        pts = np.stack([np.cos(phase), np.sin(phase), np.zeros_like(x)], axis=-1)
    elif target.kind == "s6":
        pts = np.zeros(metric.sizes + (7,))
        pts[..., 0] = np.cos(phase)
        pts[..., 1] = np.sin(phase)
    else:
        r1, r2 = target.radii
        pts = np.stack([r1 * np.cos(phase), r1 * np.sin(phase),
                        r2 * np.ones_like(x), np.zeros_like(x)], axis=-1)
    return pb.MapState(0.0, pts, target, metric)


def s6_hopf_like(metric: sg.SourceMetric, target: tg.EmbeddedTarget,
                 seed: int = 0) -> pb.MapState:
    """Great-circle motion in a random 2-plane of R^7 plus smooth transverse noise."""
    if target.kind != "s6":
        raise ValueError("this scenario requires the s6 target")
    rng = np.random.default_rng(seed)
    q, _ = np.linalg.qr(rng.standard_normal((7, 3)))
    e1, e2, e3 = q.T
    x = metric.grid_coordinates()[0]
    phase = 2 * np.pi * x / metric.lengths[0]
    amb = (np.cos(phase)[..., None] * e1 + np.sin(phase)[..., None] * e2
           + 0.3 * np.sin(2 * phase)[..., None] * e3)
    pts = amb / np.linalg.norm(amb, axis=-1, keepdims=True)
    return pb.MapState(0.0, pts, target, metric)


def build_initial_data(scenario: str, metric: sg.SourceMetric,
                       target: tg.EmbeddedTarget, seed: int = 0,
                       theta: float = np.pi / 4, k_mode: int = 2,
                       band: int = 3, winding: int = 1) -> pb.MapState:
    if scenario == "constant":
        return constant_state(metric, target)
    if scenario == "spin-wave":
        return spin_wave(metric, target, theta=theta, k_mode=k_mode)
    if scenario == "random-smooth":
        return random_smooth(metric, target, seed=seed, band=band)
    if scenario == "equator-circle":
        return equator_circle(metric, target, winding=winding)
    if scenario == "s6-hopf-like":
        return s6_hopf_like(metric, target, seed=seed)
    raise ValueError(f"unknown scenario {scenario!r} (choose from {SCENARIOS})")
