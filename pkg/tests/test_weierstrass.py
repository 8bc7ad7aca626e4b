import mpmath as mp
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from holopack import specs as S
from holopack.errors import PoleAtLatticePoint, TruncationTooLoose
from holopack.weierstrass import direct_sum, row_count, wp, wp_jet, wp_prime

SQUARE = S.Lattice(1.0, 1j)
SKEW = S.Lattice.from_tau(0.3 + 1.2j)


def e1_theta(tau):
    """wp(1/2) for the lattice Z + tau Z from theta constants."""
    q = mp.exp(1j * mp.pi * tau)
    return complex(mp.pi**2 / 3 * (mp.jtheta(3, 0, q) ** 4 + mp.jtheta(4, 0, q) ** 4))


@pytest.mark.parametrize("lat", [SQUARE, SKEW])
def test_half_period_against_theta_constants(lat):
    assert wp(0.5, lat) == pytest.approx(e1_theta(lat.tau), rel=1e-12)


def test_square_lattice_zero():
    # e2 = wp((1 + i)/2) vanishes on the square lattice
    assert abs(wp(0.5 + 0.5j, SQUARE)) < 1e-12


@pytest.mark.parametrize("z", [0.2 + 0.1j, 0.41 - 0.3j, 1.7 + 2.2j])
def test_against_direct_sum(z):
    val, der, bound = direct_sum(z, SQUARE, 200)
    assert bound < direct_sum(z, SQUARE, 60)[2]
    assert abs(wp(z, SQUARE) - val) <= bound + 1e-12
    assert wp_prime(z, SQUARE) == pytest.approx(der, rel=1e-4)


coords = st.floats(-3, 3, allow_nan=False)


@given(coords, coords)
def test_even_and_periodic(x, y):
    z = complex(x, y)
    if min(abs(z - complex(m, n)) for m in range(-4, 5) for n in range(-4, 5)) < 0.05:
        return
    v = wp(z, SQUARE)
    scale = max(1.0, abs(v))
    assert abs(wp(-z, SQUARE) - v) < 1e-9 * scale
    assert abs(wp(z + 1, SQUARE) - v) < 1e-9 * scale
    assert abs(wp(z + 1j, SQUARE) - v) < 1e-9 * scale


def test_derivative_finite_difference_order():
    z = 0.31 + 0.22j
    exact = wp_prime(z, SKEW)
    errs = [abs((wp(z + h, SKEW) - wp(z - h, SKEW)) / (2 * h) - exact) for h in (1e-2, 5e-3)]
    assert np.log2(errs[0] / errs[1]) >= 1.9


def test_lattice_scaling():
    c = 2.0 - 0.5j
    z = 0.3 + 0.1j
    assert wp(c * z, SQUARE.scaled(c)) == pytest.approx(wp(z, SQUARE) / c**2, rel=1e-13)


def test_pole_handling():
    with pytest.raises(PoleAtLatticePoint):
        wp(1 + 1j, SQUARE)
    with pytest.raises(PoleAtLatticePoint):
        wp_jet(0j, SQUARE, chart="direct")
    lift, der = wp_jet(np.array([0j, 2 + 0j]), SQUARE)
    assert np.allclose(lift, [[0, 1], [0, 1]]) and np.allclose(der, [[0, 0], [0, 0]])


def test_charts_agree():
    z = np.array([0.3 + 0.2j, 0.45 + 0.05j])
    a = wp_jet(z, SQUARE, chart="direct")
    b = wp_jet(z, SQUARE, chart="inverted")
    # [1 : p] = [1/p : 1]
    assert np.allclose(a[0][:, 1] * b[0][:, 0], 1.0, rtol=1e-12)


def test_row_count_limit():
    assert row_count(1.0, 1e-13) < 40
    with pytest.raises(TruncationTooLoose):
        row_count(1e-3, 1e-13)
