"""Order(-1) gauge operator Lambda = I - Lambda-tilde on the flat 1-D torus.

The correction is built from the pointwise endomorphism
B = -(2k-1) g^{ij} (nabla_i J) and the constant-coefficient multipliers
d/dx and (1 - Laplacian)^{-1}:

    Lambda-tilde V = c [ J B W - B J W ],   W = Pi d/dx (1-Lap)^{-1} V.

By the anti-commutation J B = -B J the bracket equals 2 J B W up to the
finite-difference error in B.  The scale c = 1/4 is fixed by the symbol
computation: with sigma(L) = -kappa^2 J and sigma(Lambda-tilde) =
2c i kappa J B / (1 + kappa^2), using J(JB) = -B and (JB)J = B one gets
[L, Lambda-tilde] ~ 4c i kappa B, which must cancel the first-order term
P1 = (2k-1) g^{ij} (nabla_i J) nabla_j of symbol -i kappa B.

On Kaehler targets nabla J = 0, so B = 0 and Lambda is the identity.
All derivatives in this module are spectral; the metric must be flat 1-D.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import pullback as pb
from . import source_geometry as sg
from . import target_geometry as tg
from .errors import UnsupportedOperationError

GAUGE_SCALE = 0.25
NABLA_J_ETA = 1e-4


def is_kahler(target: tg.EmbeddedTarget) -> bool:
    """True when the almost complex structure is parallel (nabla J = 0)."""
    return target.kind in ("s2", "t2")


@dataclass(frozen=True)
class GaugeOperator:
    k: int
    state: pb.MapState
    B_field: np.ndarray          # grid + (d, d) endomorphism, zero on Kaehler
    helmholtz: np.ndarray        # (1 + kappa^2)^{-1} multiplier on the mode grid

    @property
    def trivial(self) -> bool:
        return not np.any(self.B_field)

    def apply(self, V: pb.Section) -> pb.Section:
        return apply_gauge(self, V)


def _require_flat_1d(metric: sg.SourceMetric) -> None:
    if metric.dim != 1 or not metric.flat:
        raise UnsupportedOperationError("gauge operator requires a flat 1-D metric")


def _matvec(A: np.ndarray, V: np.ndarray) -> np.ndarray:
    return np.einsum("...ab,...b->...a", A, V)


def build_B_field(state: pb.MapState, k: int, eta: float = NABLA_J_ETA) -> np.ndarray:
    """B = -(2k-1) (nabla_{du} J) as a grid of ambient endomorphisms."""
    target, metric = state.target, state.metric
    d = target.ambient_dim
    du = tg.project_tangent(target, state.points,
                            sg.spectral_derivative(metric, state.points, 0))
    B = np.zeros(state.points.shape + (d,))
    if is_kahler(target):
        return B
    for a in range(d):
        e = np.zeros(d)
        e[a] = 1.0
        col = tg.nabla_J(target, state.points, du,
                         np.broadcast_to(e, state.points.shape), eta=eta)
        B[..., a] = -(2 * k - 1) * col
    return B


def build_gauge(state: pb.MapState, k: int = 2) -> GaugeOperator:
    _require_flat_1d(state.metric)
    if k < 1:
        raise ValueError("Sobolev depth k must be >= 1")
    kappa = sg.physical_wavenumbers(state.metric)[0]
    helmholtz = 1.0 / (1.0 + kappa * kappa)
    return GaugeOperator(k, state, build_B_field(state, k), helmholtz)


def anticommutation_residual(op: GaugeOperator) -> float:
    """Grid-max operator norm proxy for J B + B J."""
    state = op.state
    d = state.target.ambient_dim
    JB = np.empty_like(op.B_field)
    BJ = np.empty_like(op.B_field)
    for a in range(d):
        e = np.zeros(d)
        e[a] = 1.0
        ea = np.broadcast_to(e, state.points.shape)
        JB[..., a] = tg.apply_J(state.target, state.points,
                                _matvec(op.B_field, ea), check=False)
        BJ[..., a] = _matvec(op.B_field,
                             tg.apply_J(state.target, state.points, ea, check=False))
    return float(np.max(np.linalg.norm(JB + BJ, axis=(-2, -1))))


def _helmholtz_inv(op: GaugeOperator, V: np.ndarray) -> np.ndarray:
    return sg.fourier_multiplier_apply(op.state.metric, lambda n: op.helmholtz, V)


def apply_gauge_correction(op: GaugeOperator, V: pb.Section) -> pb.Section:
    """Lambda-tilde V (the order(-1) part alone)."""
    state = op.state
    if V.base is not state and V.base.points is not state.points:
        raise ValueError("section does not live over the gauge operator's state")
    if op.trivial:
        return pb.Section(np.zeros_like(V.vectors), state)
    W = sg.spectral_derivative(state.metric, _helmholtz_inv(op, V.vectors), 0)
    W = tg.project_tangent(state.target, state.points, W, check=False)
    JBW = tg.apply_J(state.target, state.points, _matvec(op.B_field, W), check=False)
    BJW = _matvec(op.B_field,
                  tg.apply_J(state.target, state.points, W, check=False))
    out = GAUGE_SCALE * (JBW - BJW)
    out = tg.project_tangent(state.target, state.points, out, check=False)
    return pb.Section(out, state)


def apply_gauge(op: GaugeOperator, V: pb.Section) -> pb.Section:
    """Lambda V = V - Lambda-tilde V."""
    corr = apply_gauge_correction(op, V)
    return pb.Section(V.vectors - corr.vectors, op.state)


def apply_gauge_inverse_approx(op: GaugeOperator, V: pb.Section) -> pb.Section:
    """Lambda' V = V + Lambda-tilde V (parametrix: Lambda' Lambda = I - Lambda-tilde^2)."""
    corr = apply_gauge_correction(op, V)
    return pb.Section(V.vectors + corr.vectors, op.state)


# --- elimination diagnostics -------------------------------------------------

def _nabla(state: pb.MapState, V: np.ndarray) -> np.ndarray:
    dV = sg.spectral_derivative(state.metric, V, 0)
    return tg.project_tangent(state.target, state.points, dV, check=False)


def _operator_L(state: pb.MapState, V: np.ndarray) -> np.ndarray:
    """L = nabla (J nabla .), the dispersive principal part in divergence form."""
    inner = tg.apply_J(state.target, state.points, _nabla(state, V), check=False)
    return _nabla(state, inner)


def _operator_P1(op: GaugeOperator, V: np.ndarray) -> np.ndarray:
    """First-order term (2k-1)(nabla J) nabla = -B nabla."""
    return -_matvec(op.B_field, _nabla(op.state, V))


def probe_section(state: pb.MapState, seed: int = 7) -> np.ndarray:
    """A fixed smooth unit section used to carry the modulated probes."""
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(state.target.ambient_dim)
    v = np.broadcast_to(v, state.points.shape)
    v = tg.project_tangent(state.target, state.points, v, check=False)
    scale = pb.section_l2(state.metric, v)
    return v / scale


def elimination_residual(op: GaugeOperator, mode_range) -> list[dict]:
    """Mode sweep of the gauged commutator against the raw first-order growth.

    For each n the probe is cos(n x) V0 with V0 a fixed smooth section;
    reported per mode:
        r          |Lambda(L + P1) e_n - L Lambda e_n| / |e_n|
        p1_growth  |P1 e_n| / |e_n|            (linear in n when B != 0)
        corr_norm  |Lambda-tilde e_n| / |e_n|  (decays like 1/n)
        corr2_norm |Lambda-tilde^2 e_n| / |e_n|  (decays like 1/n^2)
    """
    state = op.state
    metric = state.metric
    x = metric.grid_coordinates()[0]
    V0 = probe_section(state)
    rows = []
    for n in mode_range:
        n = int(n)
        probe = np.cos(n * x)[..., None] * V0
        probe = tg.project_tangent(state.target, state.points, probe, check=False)
        base = pb.section_l2(metric, probe)
        if base == 0.0:
            continue
        sec = pb.Section(probe, state)
        LP = _operator_L(state, probe) + _operator_P1(op, probe)
        gauged = apply_gauge(op, pb.Section(LP, state)).vectors
        ungauged = _operator_L(state, apply_gauge(op, sec).vectors)
        corr = apply_gauge_correction(op, sec)
        corr2 = apply_gauge_correction(op, corr)
        rows.append({
            "n": n,
            "r": pb.section_l2(metric, gauged - ungauged) / base,
            "p1_growth": pb.section_l2(metric, _operator_P1(op, probe)) / base,
            "corr_norm": pb.section_l2(metric, corr.vectors) / base,
            "corr2_norm": pb.section_l2(metric, corr2.vectors) / base,
        })
    return rows


def norm_equivalence_report(op: GaugeOperator, states: list[pb.MapState]) -> list[dict]:
    """Gauged hierarchy against the raw Laplacian ladder, per state."""
    rows = []
    for st in states:
        gauge = build_gauge(st, op.k) if st is not op.state else op
        gauged = pb.norm_Nk(st, k=op.k, gauge=gauge)
        raw = pb.norm_Nk(st, k=op.k, gauge=None)
        ratio = raw / gauged if gauged > 0 else float("nan")
        rows.append({"gauged": gauged, "raw": raw, "ratio": ratio})
    return rows
