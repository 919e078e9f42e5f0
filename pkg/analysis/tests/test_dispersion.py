import math

import pytest
import sympy as sp

from geoflow_analysis.dispersion import (
    DegenerateAnsatzError,
    oracle_dispersion,
    oracle_value,
    spin_wave_residual,
)


def test_symbolic_frequency():
    th, k = sp.symbols("theta k", real=True)
    omega = oracle_dispersion()
    assert sp.simplify(omega - k ** 2 * sp.cos(th)) == 0


def test_residual_vanishes_at_oracle_frequency():
    res = spin_wave_residual(sp.pi / 3, 2, 4 * sp.cos(sp.pi / 3))
    assert res == sp.zeros(3, 1)


def test_reference_value():
    assert math.isclose(oracle_value(math.pi / 4, 2), 2.828427, abs_tol=1e-6)


def test_equatorial_wave_is_stationary():
    assert abs(oracle_value(math.pi / 2, 3)) < 1e-12


def test_degenerate_amplitude_flagged():
    with pytest.raises(DegenerateAnsatzError):
        oracle_value(0.0, 2)
