"""Calculus on sections of the pulled-back tangent bundle.

A map state is a grid of ambient points on the target; a section is a grid
of ambient vectors tangent to the target along the state.  The covariant
derivative is Pi composed with a centered difference, the tension field is
the tangent projection of the componentwise Laplace-Beltrami operator, and
the rough Laplacian is assembled in divergence form so that it is exactly
self-adjoint for the discrete inner product with weight sqrt(G) h^m.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import source_geometry as sg
from . import target_geometry as tg
from .errors import OffManifoldError

STATE_TOL = 1e-10


@dataclass
class MapState:
    time: float
    points: np.ndarray                 # grid + (d,)
    target: tg.EmbeddedTarget
    metric: sg.SourceMetric

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=float)
        self.metric.check_shape(self.points)
        if self.points.shape[-1] != self.target.ambient_dim:
            raise ValueError("ambient dimension mismatch")
        tg.check_on_manifold(self.target, self.points, tol=STATE_TOL)

    def copy_with(self, points: np.ndarray, time: float | None = None) -> "MapState":
        """Fast constructor for points produced by trusted internal steps."""
        new = object.__new__(MapState)
        new.time = self.time if time is None else time
        new.points = points
        new.target = self.target
        new.metric = self.metric
        return new


@dataclass
class Section:
    vectors: np.ndarray                # grid + (d,)
    base: MapState

    def __post_init__(self):
        self.vectors = np.asarray(self.vectors, dtype=float)
        if self.vectors.shape != self.base.points.shape:
            raise ValueError("section shape does not match base state")

    def tangency_defect(self) -> float:
        tang = tg.project_tangent(self.base.target, self.base.points, self.vectors)
        return float(np.max(np.linalg.norm(self.vectors - tang, axis=-1)))


def covariant_derivative(state: MapState, V: Section, axis: int) -> Section:
    """nabla_i V = Pi(D_i V) with centered differences."""
    dV = sg.centered_diff(state.metric, V.vectors, axis)
    return Section(tg.project_tangent(state.target, state.points, dV, check=False), state)


def tension_extrinsic(state: MapState) -> Section:
    """Tension field as the tangent projection of the ambient Laplacian."""
    lap = sg.laplace_beltrami(state.metric, state.points)
    return Section(tg.project_tangent(state.target, state.points, lap, check=False), state)


def tilde_laplacian(state: MapState, V: Section) -> Section:
    """Rough Laplacian (1/sqrt G) nabla_i (g^{ij} sqrt G nabla_j V)."""
    metric = state.metric
    w = metric.sqrt_det[..., None]
    grads = [covariant_derivative(state, V, j).vectors for j in range(metric.dim)]
    out = np.zeros_like(V.vectors)
    for i in range(metric.dim):
        flux = np.zeros_like(V.vectors)
        for j in range(metric.dim):
            flux += metric.g_inv[..., i, j, None] * w * grads[j]
        dflux = sg.centered_diff(metric, flux, i)
        out += tg.project_tangent(state.target, state.points, dflux, check=False)
    return Section(out / w, state)


def iterated_laplacian(state: MapState, l: int, k_max: int = 2) -> Section:
    """Delta-tilde^{l-1} applied to the tension field."""
    if not 1 <= l <= k_max:
        raise ValueError(f"iterate order {l} outside [1, {k_max}]")
    V = tension_extrinsic(state)
    for _ in range(l - 1):
        V = tilde_laplacian(state, V)
    return V


def section_inner(metric: sg.SourceMetric, V: np.ndarray, W: np.ndarray) -> float:
    """Discrete L^2 pairing with weight sqrt(G) h^m."""
    return sg.integrate(metric, np.sum(V * W, axis=-1))


def section_l2(metric: sg.SourceMetric, V: np.ndarray) -> float:
    return math.sqrt(max(section_inner(metric, V, V), 0.0))


def energy(state: MapState) -> float:
    """Dirichlet energy (1/2) int g^{ij} <D_i u, D_j u> dmu."""
    metric = state.metric
    grads = [sg.centered_diff(metric, state.points, i) for i in range(metric.dim)]
    density = np.zeros(metric.sizes)
    for i in range(metric.dim):
        for j in range(metric.dim):
            density += metric.g_inv[..., i, j] * np.sum(grads[i] * grads[j], axis=-1)
    return 0.5 * sg.integrate(metric, density)


def norm_Nk(state: MapState, k: int = 2, gauge=None) -> float:
    """Energy hierarchy: sqrt(sum_{l<k} |Dl^l u|^2 + |Lambda Dl^k u|^2).

    With no gauge supplied the top term uses the identity.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    total = 0.0
    for l in range(1, k):
        total += section_l2(state.metric, iterated_laplacian(state, l, k_max=k).vectors) ** 2
    top = iterated_laplacian(state, k, k_max=k)
    if gauge is not None:
        top = gauge.apply(top)
    total += section_l2(state.metric, top.vectors) ** 2
    return math.sqrt(total)


def commutator_residual(state: MapState, V: Section, i: int, j: int) -> float:
    """Grid max of |nabla_i nabla_j V - nabla_j nabla_i V - R(D_i u, D_j u) V|."""
    m = state.metric.dim
    if i != j and m < 2:
        raise ValueError("mixed commutator requires a 2-D source")
    a = covariant_derivative(state, covariant_derivative(state, V, j), i).vectors
    b = covariant_derivative(state, covariant_derivative(state, V, i), j).vectors
    du_i = tg.project_tangent(state.target, state.points,
                              sg.centered_diff(state.metric, state.points, i))
    du_j = tg.project_tangent(state.target, state.points,
                              sg.centered_diff(state.metric, state.points, j))
    curv = tg.curvature(state.target, state.points, du_i, du_j, V.vectors)
    return float(np.max(np.linalg.norm(a - b - curv, axis=-1)))


# --- stereographic-chart oracle for the two-sphere ---------------------------

CHART_MARGIN = 0.1


def _stereographic(points: np.ndarray) -> np.ndarray:
    denom = 1.0 - points[..., 2]
    if np.min(denom) < CHART_MARGIN:
        raise OffManifoldError(
            f"state too close to the chart's bad point (min denom {np.min(denom):.3f})"
        )
    return points[..., 0:2] / denom[..., None]


def tension_chart_oracle(state: MapState) -> Section:
    """Tension field computed in a stereographic chart of the two-sphere.

    Uses the closed-form Christoffel symbols of the round conformal metric
    4/(1+|z|^2)^2 delta and pushes the chart vector forward to ambient
    coordinates.  Independent cross-check of the extrinsic route.
    """
    if state.target.kind != "s2":
        raise ValueError("chart oracle only implemented for the two-sphere")
    metric = state.metric
    z = _stereographic(state.points)          # grid + (2,)
    lap_z = sg.laplace_beltrami(metric, z)
    dz = [sg.centered_diff(metric, z, i) for i in range(metric.dim)]

    s = 1.0 + np.sum(z * z, axis=-1)          # 1 + |z|^2
    phi_grad = -2.0 * z / s[..., None]        # d/dz_a of log(2/(1+|z|^2))

    # quadratic Christoffel contraction g^{ij} Gamma^a_{bc} dz^b_i dz^c_j
    quad = np.zeros_like(z)
    for i in range(metric.dim):
        for j in range(metric.dim):
            gij = metric.g_inv[..., i, j]
            b = dz[i]
            c = dz[j]
            bc = np.sum(b * c, axis=-1)
            # conformal metric: Gamma^a_{bc} = d_b phi delta_ac + d_c phi delta_ab
            #                                  - d_a phi delta_bc
            term = (
                np.sum(b * phi_grad, axis=-1)[..., None] * c
                + np.sum(c * phi_grad, axis=-1)[..., None] * b
                - bc[..., None] * phi_grad
            )
            quad += gij[..., None] * term
    tau_chart = lap_z + quad                  # components in the chart frame

    # pushforward d w / d z_a for w = inverse stereographic projection
    s2 = s * s
    z1, z2 = z[..., 0], z[..., 1]
    dw1 = np.stack([(2.0 * s - 4.0 * z1 * z1) / s2, -4.0 * z1 * z2 / s2, 4.0 * z1 / s2], axis=-1)
    dw2 = np.stack([-4.0 * z1 * z2 / s2, (2.0 * s - 4.0 * z2 * z2) / s2, 4.0 * z2 / s2], axis=-1)
    amb = tau_chart[..., 0, None] * dw1 + tau_chart[..., 1, None] * dw2
    return Section(tg.project_tangent(state.target, state.points, amb), state)
