import math

import numpy as np
import pytest
from scipy.integrate import quad

from shortfec import bounds


def _capacity_quad(rho):
    def integrand(z):
        val = 1.0 - np.log2(1.0 + np.exp(-2 * rho + 2 * z * math.sqrt(rho)))
        return math.exp(-z * z / 2) / math.sqrt(2 * math.pi) * val

    return quad(integrand, -30, 30, limit=200)[0]


def _dispersion_quad(rho):
    c = _capacity_quad(rho)

    def integrand(z):
        val = 1.0 - np.log2(1.0 + np.exp(-2 * rho + 2 * z * math.sqrt(rho))) - c
        return math.exp(-z * z / 2) / math.sqrt(2 * math.pi) * val * val

    return quad(integrand, -30, 30, limit=200)[0]


def test_capacity_trivial_points():
    assert bounds.capacity(0.0) == 0.0
    assert bounds.capacity(100.0) >= 0.999


def test_capacity_anchor_half_rate():
    # Eb/N0 = 0.189 dB at R = 1/2 -> rho = 1.0445
    assert abs(bounds.capacity(1.0445) - 0.5) < 1e-3


def test_dispersion_trivial_points():
    assert bounds.dispersion(0.0) == 0.0
    assert bounds.dispersion(100.0) <= 1e-3


@pytest.mark.parametrize("rho", [0.1, 0.5, 1.0, 2.0, 4.0, 8.0])
def test_quadrature_matches_adaptive_oracle(rho):
    assert math.isclose(bounds.capacity(rho), _capacity_quad(rho), rel_tol=1e-6)
    assert math.isclose(bounds.dispersion(rho), _dispersion_quad(rho), rel_tol=1e-6)


def test_capacity_monotone():
    grid = np.linspace(0.0, 10.0, 100)
    vals = [bounds.capacity(r) for r in grid]
    assert all(b >= a - 1e-12 for a, b in zip(vals, vals[1:]))


def test_qfunc_identities():
    assert bounds.qfunc(0.0) == 0.5
    for x in (0.3, 1.0, 2.5, 5.0):
        assert abs(bounds.qfunc(x) + bounds.qfunc(-x) - 1.0) < 1e-12


def test_normal_approx_at_capacity_rate():
    # C = R: epsilon = Q(0.5 log2 n / sqrt(nV)), slightly below 1/2
    rho = 1.0445  # capacity 0.5 to ~1e-4
    eps = bounds.normal_approx_cer(128, 64, rho)
    assert 0.3 < eps < 0.5


def test_normal_approx_strictly_decreasing_in_rho():
    rhos = np.linspace(0.5, 4.0, 40)
    vals = [bounds.normal_approx_cer(128, 64, r) for r in rhos]
    assert all(b < a for a, b in zip(vals, vals[1:]))


def test_na_bracket_128_64():
    val = bounds.na_required_ebn0(128, 64, 1e-6)
    assert 3.45 <= val <= 3.75


def test_na_blocklength_gap_1024():
    val = bounds.na_required_ebn0(1024, 512, 1e-6)
    assert abs((val - 0.189) - 1.4) <= 0.15


def test_na_inversion_round_trip():
    for (n, k, eps) in [(128, 64, 1e-4), (512, 256, 1e-4), (128, 64, 1e-6)]:
        ebn0 = bounds.na_required_ebn0(n, k, eps)
        back = bounds.na_epsilon_at_ebn0(n, k, ebn0)
        assert math.isclose(back, eps, rel_tol=1e-8)


def test_na_blocklength_monotone_at_fixed_rate():
    a = bounds.na_required_ebn0(128, 64, 1e-4)
    b = bounds.na_required_ebn0(512, 256, 1e-4)
    assert b < a


def test_na_out_of_bracket_errors():
    # epsilon above the value at the lower bracket edge is unreachable
    with pytest.raises(ValueError) as ei:
        bounds.na_required_ebn0(128, 64, 0.999999)
    assert "bracket" in str(ei.value)


def test_na_query_validation():
    with pytest.raises(ValueError):
        bounds.NaQuery(n=128, k=128)
    with pytest.raises(ValueError):
        bounds.NaQuery(n=128, k=64, epsilon=1.5)
    q = bounds.NaQuery(n=128, k=64, epsilon=1e-4)
    assert q.n == 128
