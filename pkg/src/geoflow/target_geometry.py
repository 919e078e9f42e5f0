"""Embedded almost Hermitian targets in Euclidean space.

Three explicit targets are supported: the unit two-sphere in R^3 (Kaehler,
J = cross product), the unit six-sphere in R^7 (nearly Kaehler, J = the
seven-dimensional cross product restricted to tangent spaces), and a flat
two-torus as a product of circles in R^4 (Kaehler, constant J).

All operations are vectorized over arbitrary leading axes; the ambient
coordinate is always the last axis.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .errors import OffManifoldError, OutsideTubeError

ON_MANIFOLD_TOL = 1e-8


def _load_cross_tensor() -> np.ndarray:
    """Structure tensor C with (x X y)_k = C[i, j, k] x_i y_j on R^7."""
    text = resources.files("geoflow.data").joinpath("octonion_table.json").read_text()
    table = json.loads(text)["table"]
    C = np.zeros((7, 7, 7))
    for i in range(7):
        for j in range(7):
            s = table[i][j]
            if s != 0:
                C[i, j, abs(s) - 1] = float(np.sign(s))
    return C

_CROSS7 = _load_cross_tensor()


def cross7(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Seven-dimensional (octonionic) cross product, batched on leading axes."""
    return np.einsum("ijk,...i,...j->...k", _CROSS7, x, y)


@dataclass(frozen=True)
class EmbeddedTarget:
    kind: str            # "s2" | "s6" | "t2"
    ambient_dim: int
    tube_radius: float
    radii: tuple[float, float] = (1.0, 1.0)  # t2 circle radii


def make_target(kind: str, radii=(1.0, 1.0)) -> EmbeddedTarget:
    if kind == "s2":
        return EmbeddedTarget("s2", 3, 0.5)
    if kind == "s6":
        return EmbeddedTarget("s6", 7, 0.5)
    if kind == "t2":
        radii = (float(radii[0]), float(radii[1]))
        return EmbeddedTarget("t2", 4, 0.5 * min(radii), radii)
    raise ValueError(f"unknown target kind {kind!r}")


def base_point(target: EmbeddedTarget) -> np.ndarray:
    """A canonical point, used by constant initial data."""
    if target.kind == "s2":
        return np.array([0.0, 0.0, 1.0])
    if target.kind == "s6":
        return np.eye(7)[0].copy()
    r1, r2 = target.radii
    return np.array([r1, 0.0, r2, 0.0])


def defining_residual(target: EmbeddedTarget, q: np.ndarray) -> np.ndarray:
    """Pointwise deviation from the target's defining equations."""
    q = np.asarray(q, dtype=float)
    if target.kind in ("s2", "s6"):
        return np.abs(np.linalg.norm(q, axis=-1) - 1.0)
    r1, r2 = target.radii
    d1 = np.abs(np.linalg.norm(q[..., 0:2], axis=-1) - r1)
    d2 = np.abs(np.linalg.norm(q[..., 2:4], axis=-1) - r2)
    return np.maximum(d1, d2)


def check_on_manifold(target: EmbeddedTarget, p: np.ndarray, tol: float = ON_MANIFOLD_TOL) -> None:
    dev = np.max(defining_residual(target, p))
    if dev > tol:
        raise OffManifoldError(f"point off target by {dev:.3e} (tol {tol:.1e})")


def _normal_frame_t2(target: EmbeddedTarget, p: np.ndarray):
    r1, r2 = target.radii
    n1 = np.zeros_like(p)
    n1[..., 0:2] = p[..., 0:2] / r1
    n2 = np.zeros_like(p)
    n2[..., 2:4] = p[..., 2:4] / r2
    return n1, n2


def project_tangent(
    target: EmbeddedTarget, p: np.ndarray, V: np.ndarray, check: bool = True
) -> np.ndarray:
    """Orthogonal projection onto the tangent space at p.

    check=False skips the on-manifold validation; used on hot paths where
    p was just produced by the nearest-point projection.
    """
    p = np.asarray(p, dtype=float)
    V = np.asarray(V, dtype=float)
    if check:
        check_on_manifold(target, p)
    if target.kind in ("s2", "s6"):
        return V - np.sum(V * p, axis=-1, keepdims=True) * p
    n1, n2 = _normal_frame_t2(target, p)
    out = V - np.sum(V * n1, axis=-1, keepdims=True) * n1
    out = out - np.sum(out * n2, axis=-1, keepdims=True) * n2
    return out


def tube_distance(target: EmbeddedTarget, q: np.ndarray) -> np.ndarray:
    """Normal distance |q - pi(q)| without the tube check."""
    q = np.asarray(q, dtype=float)
    if target.kind in ("s2", "s6"):
        return np.abs(np.linalg.norm(q, axis=-1) - 1.0)
    r1, r2 = target.radii
    d1 = np.linalg.norm(q[..., 0:2], axis=-1) - r1
    d2 = np.linalg.norm(q[..., 2:4], axis=-1) - r2
    return np.sqrt(d1 * d1 + d2 * d2)


def nearest_point(
    target: EmbeddedTarget, q: np.ndarray, max_distance: float | None = None
) -> np.ndarray:
    """Nearest-point projection, defined only inside the tube.

    max_distance overrides the tube radius (the closed-form projections
    remain valid up to the focal set); the solver keeps the default.
    """
    q = np.asarray(q, dtype=float)
    limit = target.tube_radius if max_distance is None else max_distance
    dist = np.max(tube_distance(target, q))
    if dist >= limit:
        raise OutsideTubeError(
            f"point at normal distance {dist:.3e} >= tube limit {limit}"
        )
    if target.kind in ("s2", "s6"):
        return q / np.linalg.norm(q, axis=-1, keepdims=True)
    r1, r2 = target.radii
    out = np.empty_like(q)
    out[..., 0:2] = r1 * q[..., 0:2] / np.linalg.norm(q[..., 0:2], axis=-1, keepdims=True)
    out[..., 2:4] = r2 * q[..., 2:4] / np.linalg.norm(q[..., 2:4], axis=-1, keepdims=True)
    return out


def tube_defect(target: EmbeddedTarget, q: np.ndarray) -> np.ndarray:
    """|q - pi(q)| pointwise; raises outside the tube."""
    q = np.asarray(q, dtype=float)
    pi_q = nearest_point(target, q)
    return np.linalg.norm(q - pi_q, axis=-1)


def apply_J(
    target: EmbeddedTarget, p: np.ndarray, V: np.ndarray, check: bool = True
) -> np.ndarray:
    """Almost complex structure J_p V (V tangentialized internally)."""
    p = np.asarray(p, dtype=float)
    if target.kind in ("s2", "s6"):
        # p x (Pi V) = p x V exactly: the normal part p (V.p) drops out
        if check:
            check_on_manifold(target, p)
        V = np.asarray(V, dtype=float)
        return np.cross(p, V) if target.kind == "s2" else cross7(p, V)
    Vt = project_tangent(target, p, V, check=check)
    n1, n2 = _normal_frame_t2(target, p)
    t1 = np.stack([-n1[..., 1], n1[..., 0], n1[..., 2], n1[..., 3]], axis=-1)
    t2 = np.stack([n2[..., 0], n2[..., 1], -n2[..., 3], n2[..., 2]], axis=-1)
    a = np.sum(Vt * t1, axis=-1, keepdims=True)
    b = np.sum(Vt * t2, axis=-1, keepdims=True)
    return a * t2 - b * t1


def nabla_J(
    target: EmbeddedTarget,
    p: np.ndarray,
    X: np.ndarray,
    V: np.ndarray,
    eta: float = 1e-4,
    scheme: str = "centered",
) -> np.ndarray:
    """Covariant derivative (nabla_X J) V via finite differences.

    V is extended off p by tangent projection, V_bar(q) = Pi_q V, and the
    path is the normalized chord q(s) = pi(p + s X); the result is
    tangentialized at p.  Error is O(eta^2) for both schemes.

    scheme "centered" uses the symmetric two-point quotient; its parity
    cancellation makes the J-anticommutation identity hold to rounding.
    scheme "offset" uses the one-sided 3-point second-order quotient,
    whose identity residual scales visibly as eta^2 (used by convergence
    diagnostics that need a measurable order).
    """
    p = np.asarray(p, dtype=float)
    X = project_tangent(target, p, X)
    V = project_tangent(target, p, V)

    def jv(s):
        q = p if s == 0.0 else nearest_point(target, p + s * X)
        return apply_J(target, q, V)      # J_q Pi_q V, projection inside

    def vbar(s):
        q = p if s == 0.0 else nearest_point(target, p + s * X)
        return project_tangent(target, q, V)

    if scheme == "centered":
        dJV = (jv(eta) - jv(-eta)) / (2.0 * eta)
        dV = (vbar(eta) - vbar(-eta)) / (2.0 * eta)
    elif scheme == "offset":
        dJV = (-3.0 * jv(0.0) + 4.0 * jv(eta) - jv(2.0 * eta)) / (2.0 * eta)
        dV = (-3.0 * vbar(0.0) + 4.0 * vbar(eta) - vbar(2.0 * eta)) / (2.0 * eta)
    else:
        raise ValueError(f"unknown difference scheme {scheme!r}")
    dJV = project_tangent(target, p, dJV)
    JdV = apply_J(target, p, project_tangent(target, p, dV))
    return dJV - JdV


def curvature(
    target: EmbeddedTarget,
    p: np.ndarray,
    X: np.ndarray,
    Y: np.ndarray,
    Z: np.ndarray,
) -> np.ndarray:
    """Riemann curvature R(X, Y)Z with the first-slot-first convention."""
    p = np.asarray(p, dtype=float)
    X = project_tangent(target, p, X)
    Y = project_tangent(target, p, Y)
    Z = project_tangent(target, p, Z)
    if target.kind == "t2":
        return np.zeros_like(Z)
    # unit spheres: constant sectional curvature one
    hYZ = np.sum(Y * Z, axis=-1, keepdims=True)
    hXZ = np.sum(X * Z, axis=-1, keepdims=True)
    return hYZ * X - hXZ * Y
