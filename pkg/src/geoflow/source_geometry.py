"""Periodic source torus: metric data, divergence-form Laplacian, Fourier
multipliers for the flat case, and discrete Sobolev norms.

Grid functions are plain numpy arrays whose leading axes match the metric
grid; trailing axes (if any) are treated componentwise.  All first
differences are centered, and the Laplacian is assembled in divergence
form D^T (g^{ij} sqrt(G) D) so that summation by parts holds to rounding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import UnsupportedOperationError


@dataclass(frozen=True)
class SourceMetric:
    """Riemannian metric on a 1-D or 2-D periodic grid.

    g and g_inv have shape grid + (dim, dim); sqrt_det has the grid shape.
    Fields are stored on the fundamental domain and are periodic by
    construction.
    """

    dim: int
    sizes: tuple[int, ...]
    lengths: tuple[float, ...]
    g: np.ndarray
    g_inv: np.ndarray
    sqrt_det: np.ndarray
    flat: bool

    @property
    def spacings(self) -> tuple[float, ...]:
        return tuple(L / n for L, n in zip(self.lengths, self.sizes))

    @property
    def cell_volume(self) -> float:
        return math.prod(self.spacings)

    def grid_coordinates(self) -> list[np.ndarray]:
        """Per-axis coordinate arrays, meshed with 'ij' indexing."""
        axes = [np.arange(n) * h for n, h in zip(self.sizes, self.spacings)]
        return list(np.meshgrid(*axes, indexing="ij"))

    def check_shape(self, f: np.ndarray) -> None:
        if f.shape[: self.dim] != self.sizes:
            raise ValueError(
                f"grid function shape {f.shape} does not match grid {self.sizes}"
            )


def flat_metric(sizes, lengths=None) -> SourceMetric:
    sizes = tuple(int(n) for n in np.atleast_1d(sizes))
    m = len(sizes)
    if m not in (1, 2):
        raise ValueError("source dimension must be 1 or 2")
    if lengths is None:
        lengths = (2.0 * np.pi,) * m
    lengths = tuple(float(L) for L in np.atleast_1d(lengths))
    eye = np.broadcast_to(np.eye(m), sizes + (m, m)).copy()
    ones = np.ones(sizes)
    return SourceMetric(m, sizes, lengths, eye, eye.copy(), ones, flat=True)


def conformal_metric_2d(sizes, lengths=None, amplitude: float = 0.0) -> SourceMetric:
    """Conformal metric g = exp(2 phi) delta with a smooth periodic phi."""
    sizes = tuple(int(n) for n in np.atleast_1d(sizes))
    if len(sizes) != 2:
        raise ValueError("conformal metric requires a 2-D grid")
    if lengths is None:
        lengths = (2.0 * np.pi, 2.0 * np.pi)
    lengths = tuple(float(L) for L in lengths)
    x, y = np.meshgrid(
        np.arange(sizes[0]) * lengths[0] / sizes[0],
        np.arange(sizes[1]) * lengths[1] / sizes[1],
        indexing="ij",
    )
    phi = amplitude * np.sin(2 * np.pi * x / lengths[0]) * np.sin(2 * np.pi * y / lengths[1])
    conf = np.exp(2.0 * phi)
    g = np.einsum("xy,ij->xyij", conf, np.eye(2))
    g_inv = np.einsum("xy,ij->xyij", 1.0 / conf, np.eye(2))
    sqrt_det = conf  # det = exp(4 phi)
    return SourceMetric(2, sizes, lengths, g, g_inv, sqrt_det, flat=(amplitude == 0.0))


def centered_diff(metric: SourceMetric, f: np.ndarray, axis: int) -> np.ndarray:
    """Centered first difference along a grid axis, periodic wrap."""
    if not 0 <= axis < metric.dim:
        raise ValueError(f"axis {axis} out of range for dim {metric.dim}")
    h = metric.spacings[axis]
    return (np.roll(f, -1, axis=axis) - np.roll(f, 1, axis=axis)) / (2.0 * h)


def _grid_weight(metric: SourceMetric, f: np.ndarray) -> np.ndarray:
    """sqrt(G) broadcast against possible trailing component axes of f."""
    extra = f.ndim - metric.dim
    return metric.sqrt_det.reshape(metric.sqrt_det.shape + (1,) * extra)


def integrate(metric: SourceMetric, density: np.ndarray) -> float:
    """Integral of a scalar grid function against the Riemannian measure."""
    metric.check_shape(density)
    return float(np.sum(density * metric.sqrt_det) * metric.cell_volume)


def laplace_beltrami(metric: SourceMetric, f: np.ndarray) -> np.ndarray:
    """Divergence-form Laplace-Beltrami operator, componentwise."""
    metric.check_shape(f)
    if metric.flat:
        # identity coefficients: wide-stencil second difference per axis
        out = np.zeros_like(f, dtype=float)
        for i in range(metric.dim):
            h2 = 4.0 * metric.spacings[i] ** 2
            out += (np.roll(f, -2, axis=i) - 2.0 * f + np.roll(f, 2, axis=i)) / h2
        return out
    w = _grid_weight(metric, f)
    out = np.zeros_like(f, dtype=float)
    for i in range(metric.dim):
        flux = np.zeros_like(f, dtype=float)
        for j in range(metric.dim):
            gij = metric.g_inv[..., i, j].reshape(w.shape)
            flux += gij * w * centered_diff(metric, f, j)
        out += centered_diff(metric, flux, i)
    return out / w


def wavenumbers(metric: SourceMetric) -> list[np.ndarray]:
    """Integer Fourier mode grids per axis ('ij' meshed)."""
    modes = [np.fft.fftfreq(n) * n for n in metric.sizes]
    return list(np.meshgrid(*modes, indexing="ij"))


def physical_wavenumbers(metric: SourceMetric) -> list[np.ndarray]:
    """Angular wavenumbers 2 pi n / L per axis."""
    return [
        2.0 * np.pi * n / L for n, L in zip(wavenumbers(metric), metric.lengths)
    ]


def fourier_multiplier_apply(metric: SourceMetric, symbol, f: np.ndarray) -> np.ndarray:
    """Apply a Fourier multiplier symbol(n_1, ..., n_m) on the flat torus.

    The symbol receives integer mode grids, one argument per axis, and must
    return a broadcastable factor.  Trailing component axes of f are handled
    componentwise.
    """
    if not metric.flat:
        raise UnsupportedOperationError("Fourier multipliers require a flat metric")
    metric.check_shape(f)
    modes = wavenumbers(metric)
    factor = np.asarray(symbol(*modes), dtype=complex)
    axes = tuple(range(metric.dim))
    fhat = np.fft.fftn(f, axes=axes)
    extra = f.ndim - metric.dim
    factor = factor.reshape(factor.shape + (1,) * extra)
    out = np.fft.ifftn(factor * fhat, axes=axes)
    if np.isrealobj(f) and np.allclose(factor.imag, 0.0):
        return out.real
    return out


def spectral_derivative(metric: SourceMetric, f: np.ndarray, axis: int) -> np.ndarray:
    """Exact spectral first derivative on the flat torus."""
    kappa = physical_wavenumbers(metric)[axis]
    return fourier_multiplier_apply(metric, lambda *n: 1j * kappa, f).real


def sobolev_norm(metric: SourceMetric, f: np.ndarray, s: int) -> float:
    """Full discrete Sobolev norm (sum_{l<=s} int |D^l f|^2 dmu)^{1/2}.

    Derivative slots are contracted with g^{ij}; componentwise over any
    trailing axes of f.  The l = 0 term is included.
    """
    if s < 0 or int(s) != s:
        raise ValueError("Sobolev order must be a non-negative integer")
    if s > 4:
        raise UnsupportedOperationError("Sobolev orders above 4 are not supported")
    metric.check_shape(f)
    comp_axes = tuple(range(metric.dim, f.ndim))

    total = 0.0
    level = {(): np.asarray(f, dtype=float)}
    for l in range(s + 1):
        if l > 0:
            level = {
                idx + (i,): centered_diff(metric, arr, i)
                for idx, arr in level.items()
                for i in range(metric.dim)
            }
        density = np.zeros(metric.sizes)
        for idx_i, a in level.items():
            for idx_j, b in level.items():
                weight = np.ones(metric.sizes)
                for i, j in zip(idx_i, idx_j):
                    weight = weight * metric.g_inv[..., i, j]
                density += weight * np.sum(a * b, axis=comp_axes)
        total += integrate(metric, density)
    return math.sqrt(max(total, 0.0))
