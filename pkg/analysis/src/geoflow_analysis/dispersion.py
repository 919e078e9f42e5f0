"""Symbolic oracle for the rotating-wave frequency of the sphere-valued
dispersive flow u_t = u x u_xx.

The ansatz u = (sin(theta) cos(k x - w t), sin(theta) sin(k x - w t),
cos(theta)) is substituted into the equation and the unique frequency
making the residual vanish is returned: w = k^2 cos(theta)."""

from __future__ import annotations

import sympy as sp


class DegenerateAnsatzError(ValueError):
    """The ansatz has zero amplitude and carries no frequency information."""


def _ansatz(theta, k, w):
    x, t = sp.symbols("x t", real=True)
    phase = k * x - w * t
    u = sp.Matrix([sp.sin(theta) * sp.cos(phase),
                   sp.sin(theta) * sp.sin(phase),
                   sp.cos(theta)])
    return u, x, t


def spin_wave_residual(theta, k, w):
    """u_t - u x u_xx for the rotating-wave ansatz, simplified."""
    u, x, t = _ansatz(theta, k, w)
    res = u.diff(t) - u.cross(u.diff(x, 2))
    return sp.simplify(res)


def oracle_dispersion(theta=None, k=None):
    """Solve for the frequency symbolically; returns a sympy expression.

    With numeric arguments the expression is evaluated.  theta = 0 (or pi)
    is rejected: the wave has no transverse amplitude there and any w
    solves the equation.
    """
    th, kk, w = sp.symbols("theta k omega", real=True)
    res = spin_wave_residual(th, kk, w)
    sols = sp.solve(res, w, dict=True)
    x, t = sp.symbols("x t", real=True)
    # discard spurious branches that only zero the residual at isolated
    # space-time points (they depend on x or t)
    candidates = [s[w] for s in sols
                  if w in s and not {x, t} & s[w].free_symbols]
    if len(candidates) != 1:
        raise RuntimeError(f"expected a unique frequency, got {candidates}")
    omega = sp.simplify(candidates[0])     # k**2 * cos(theta)
    if theta is None:
        return omega
    if sp.sin(sp.nsimplify(theta)) == 0:
        raise DegenerateAnsatzError("zero-amplitude ansatz: theta multiple of pi")
    out = omega.subs({th: theta, kk: k})
    return sp.nsimplify(out) if out.free_symbols else out


def oracle_value(theta: float, k: int) -> float:
    return float(oracle_dispersion(theta, k))
