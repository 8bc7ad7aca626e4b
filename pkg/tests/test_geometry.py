import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from holopack import specs as S
from holopack.curves import density, evaluate_jet
from holopack.errors import ChartOverflow, InvalidNormalization, NonpositiveScale, ZeroLift
from holopack.geometry import (CurveJet, Normalization, density_from_jet, fs_density, relift, rescale_curve,
                               spherical_norm)

finite = st.floats(-1e3, 1e3, allow_nan=False)
cplx = st.builds(complex, finite, finite)
nonzero = cplx.filter(lambda c: 1e-3 < abs(c) < 1e3)


def laplacian_density(fs, z, h):
    """(1/4 pi) Laplacian of log(1 + sum |f_i|^2) on a 5-point stencil."""
    def phi(w):
        return math.log(1 + sum(abs(f(w)) ** 2 for f in fs))
    lap = (phi(z + h) + phi(z - h) + phi(z + 1j * h) + phi(z - 1j * h) - 4 * phi(z)) / h**2
    return lap / (4 * math.pi)


def test_line_at_origin():
    assert fs_density(CurveJet(np.array([1, 0j]), np.array([0, 1 + 0j]))) == pytest.approx(1 / math.pi, rel=1e-15)


def test_constant_jet_has_zero_density():
    assert fs_density(CurveJet(np.array([1.0 + 2j, -3j, 0.5]), np.zeros(3, complex))) == 0.0


def test_gauge_example():
    F, dF = np.array([1 + 1j, 2 - 0.5j]), np.array([0.3j, 1.0])
    lam = 3 + 4j
    assert fs_density(CurveJet(lam * F, lam * dF)) == pytest.approx(fs_density(CurveJet(F, dF)), rel=1e-12)


@given(st.lists(cplx, min_size=6, max_size=6), nonzero, cplx)
def test_gauge_invariance(vals, lam, mu):
    F, dF = np.array(vals[:3]), np.array(vals[3:])
    if np.max(np.abs(F)) < 1e-3:
        return
    base = fs_density(CurveJet(F, dF))
    # a holomorphic gauge change lam(z) F(z) contributes lam' F to the derivative
    moved = fs_density(CurveJet(lam * F, lam * dF + mu * F))
    assert abs(moved - base) <= 1e-12 * max(base, 1e-300) + 1e-300


def test_zero_lift_raises():
    with pytest.raises(ZeroLift):
        fs_density(CurveJet(np.zeros(2, complex), np.ones(2, complex)))


def test_overflowing_lift_raises():
    with pytest.raises(ChartOverflow):
        fs_density(CurveJet(np.array([np.inf, 1.0 + 0j]), np.ones(2, complex)))


def test_relift_keeps_density():
    F = np.array([1e200 + 0j, 3e199j, 1.0])
    dF = np.array([2e199 + 0j, 1e200, 1j])
    jet = CurveJet(F, dF)
    moved = relift(jet)
    assert np.max(np.abs(moved.lift)) == pytest.approx(1.0)
    assert fs_density(moved) == pytest.approx(fs_density(jet), rel=1e-13)


@pytest.mark.parametrize("fs", [
    (lambda w: w, lambda w: w * w),
    (lambda w: np.exp(w),),
    (lambda w: np.sin(w), lambda w: w**3 - 1j),
])
def test_laplacian_oracle_order(fs):
    """The closed form agrees with the stencil Laplacian at second order."""
    z = 0.3 + 0.2j
    F = np.array([1.0 + 0j] + [complex(f(z)) for f in fs])
    h = 1e-6
    dF = np.array([0j] + [complex((f(z + h) - f(z - h)) / (2 * h)) for f in fs])
    exact = fs_density(CurveJet(F, dF))
    e1 = abs(laplacian_density(fs, z, 1e-2) - exact)
    e2 = abs(laplacian_density(fs, z, 5e-3) - exact)
    assert math.log2(e1 / e2) >= 1.9


def test_laplacian_oracle_small_h():
    fs = (lambda w: w,)
    for z in (0.0, 0.7 - 0.4j):
        exact = fs_density(CurveJet(np.array([1, z], complex), np.array([0, 1], complex)))
        for h in (1e-3, 1e-4):
            assert laplacian_density(fs, z, h) == pytest.approx(exact, rel=1e-5)


def test_rescaled_sphere_is_pi_times_fs():
    jet = CurveJet(np.array([1 + 0j, 0.4 - 0.2j]), np.array([0.1j, 2.0]))
    assert density_from_jet(jet, Normalization.RESCALED_SPHERE) == pytest.approx(math.pi * fs_density(jet))


def test_rescaled_sphere_needs_dim_one():
    jet = CurveJet(np.array([1 + 0j, 0, 0]), np.array([0j, 1, 0]))
    with pytest.raises(InvalidNormalization):
        density_from_jet(jet, Normalization.RESCALED_SPHERE)
    with pytest.raises(InvalidNormalization):
        density_from_jet(jet, Normalization.EUCLIDEAN)


def test_spherical_norm_examples():
    assert spherical_norm(1.0, 1.0) == pytest.approx(1 / (2 * math.sqrt(math.pi)), rel=1e-15)
    assert spherical_norm(0.0, 1.0, Normalization.RESCALED_SPHERE) == 1.0
    # pole: inverted chart w = 0, w' = c
    c = 2 - 1j
    assert spherical_norm(0.0, c, inverted=True) == pytest.approx(abs(c) / math.sqrt(math.pi))


@given(st.floats(0.5, 2.0), st.floats(0, 2 * math.pi), cplx)
def test_chart_consistency(mod, arg, d):
    f = mod * complex(math.cos(arg), math.sin(arg))
    if abs(d) < 1e-6:
        return
    direct = spherical_norm(f, d)
    inv = spherical_norm(1 / f, -d / f**2, inverted=True)
    assert inv == pytest.approx(direct, rel=1e-10)


def test_spherical_norm_overflow():
    with pytest.raises(ChartOverflow):
        spherical_norm(np.nan, 1.0)
    with pytest.raises(InvalidNormalization):
        spherical_norm(1.0, 1.0, Normalization.EUCLIDEAN)


def test_rescale_identity_and_law():
    spec = S.ExpLinear(((1.0, 0.2j),))
    z = np.array([0.1, 1 + 1j, -2.5j])
    same = evaluate_jet(rescale_curve(spec, 1.0), z)
    ref = evaluate_jet(spec, z)
    assert np.array_equal(same.lift, ref.lift) and np.array_equal(same.derivative, ref.derivative)
    m = 2.5
    assert density(rescale_curve(spec, m), z) == pytest.approx(density(spec, z / m) / m**2, rel=1e-14)


@pytest.mark.parametrize("m", [0.0, -1.0, float("nan")])
def test_rescale_rejects_bad_scale(m):
    with pytest.raises(NonpositiveScale):
        rescale_curve(S.ExpLinear(((1.0, 0.0),)), m)


def test_rescale_normalizes_sup():
    from holopack.curves import sup_norm_df
    from holopack.scan import Domain

    spec = S.ExpLinear(((3.0, 0.0),))
    dom = Domain.rectangle(-2, 2, -1, 1)
    m = sup_norm_df(spec, dom).value
    scaled = rescale_curve(spec, m)
    assert sup_norm_df(scaled, Domain(dom.origin * m, dom.e1 * m, dom.e2 * m)).value == pytest.approx(1.0, abs=1e-9)


def test_total_area_of_line():
    from holopack.quadrature import QuadConfig, polar_disk_integral

    spec = S.Rational.polynomial([1.0], [0.0, 1.0])
    # rotation invariant integrand: few angular nodes, many radial ones
    cfg = QuadConfig(annulus_width=0.5, radial_order=16, angular_density=0.01, min_angular=8)
    val = polar_disk_integral(lambda z: density(spec, z), 1e3, cfg)
    assert val == pytest.approx(1e6 / (1 + 1e6), abs=1e-12)
    assert abs(val - 1.0) < 1e-6
