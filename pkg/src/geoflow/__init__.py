"""Numerical solvers and diagnostics for dispersive geometric flows on
periodic tori with values in embedded almost Hermitian targets."""

from .source_geometry import (
    SourceMetric,
    flat_metric,
    conformal_metric_2d,
    laplace_beltrami,
    fourier_multiplier_apply,
    sobolev_norm,
)
from .target_geometry import EmbeddedTarget, make_target
from .pullback import MapState, Section

__all__ = [
    "SourceMetric",
    "flat_metric",
    "conformal_metric_2d",
    "laplace_beltrami",
    "fourier_multiplier_apply",
    "sobolev_norm",
    "EmbeddedTarget",
    "make_target",
    "MapState",
    "Section",
]

__version__ = "0.1.0"
