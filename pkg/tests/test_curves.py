import math

import numpy as np
import pytest

from holopack import specs as S
from holopack.curves import (density, energy_over_fundamental_domain, evaluate_jet, periodicity_defect,
                             sup_norm_df)
from holopack.errors import InvalidCurve, InvalidNormalization, NotPeriodic
from holopack.geometry import Normalization
from holopack.scan import Domain

SQUARE = S.Lattice(1.0, 1j)
LINE = S.Rational.polynomial([1], [0, 1])
EXP = S.ExpLinear(((1.0, 0.0),))


def test_line_jet():
    jet = evaluate_jet(LINE, np.array([0j, 2 + 1j]))
    ratio = jet.lift[:, 1] / jet.lift[:, 0]
    assert np.allclose(ratio, [0, 2 + 1j])


def test_exp_jet_and_density():
    z = np.array([0.3 - 0.2j, -1.5 + 4j])
    jet = evaluate_jet(EXP, z)
    assert np.allclose(jet.lift[:, 1] / jet.lift[:, 0], np.exp(z))
    f = np.exp(z)
    exact = np.abs(f) ** 2 / (math.pi * (1 + np.abs(f) ** 2) ** 2)
    assert np.allclose(density(EXP, z), exact, rtol=1e-13)


def test_exp_far_out_is_finite():
    d = density(EXP, np.array([800.0, -800.0, 800j]))
    assert np.all(np.isfinite(d)) and d[0] < 1e-300


def test_sup_exp():
    est = sup_norm_df(EXP, Domain.rectangle(-3, 3, -3, 3))
    assert est.value == pytest.approx(1 / (2 * math.sqrt(math.pi)), abs=1e-6)
    assert est.value <= 1 / (2 * math.sqrt(math.pi)) + 1e-15


def test_euclidean_line_and_exp():
    a = 2 - 1j
    spec = S.Rational.polynomial([1], [0, a])
    z = np.linspace(-3, 3, 7) + 0.5j
    assert np.allclose(density(spec, z, Normalization.EUCLIDEAN), abs(a) ** 2)
    assert np.allclose(density(S.ExpLinear(((a, 0.3),)), z, Normalization.EUCLIDEAN), abs(a) ** 2)
    with pytest.raises(InvalidNormalization):
        density(S.WeierstrassP(SQUARE), 0.3, Normalization.EUCLIDEAN)


@pytest.mark.parametrize("spec,expected", [
    (S.ThetaEmbedding(1j, 2), 4.0),
    (S.ThetaEmbedding(0.3 + 1.2j, 3), 9.0),
    (S.WeierstrassP(SQUARE), 2.0),
])
def test_period_energy(spec, expected):
    rep = energy_over_fundamental_domain(spec)
    assert rep.energy == pytest.approx(expected, rel=1e-3)
    assert rep.gap_ratio >= 1.0


def test_constant_curve():
    const = S.Rational.polynomial([1], [2])
    rep = energy_over_fundamental_domain(const, SQUARE)
    assert rep.energy == 0.0 and math.isnan(rep.gap_ratio)


def test_not_periodic():
    with pytest.raises(NotPeriodic):
        energy_over_fundamental_domain(LINE, SQUARE)
    with pytest.raises(InvalidCurve):
        energy_over_fundamental_domain(LINE)
    # phi_l is periodic for the lattice l(Z + tau Z), not for Z + tau Z itself
    assert periodicity_defect(S.ThetaEmbedding(1j, 2), S.lattice_of(S.ThetaEmbedding(1j, 2))) < 1e-10
    assert periodicity_defect(S.ThetaEmbedding(1j, 2), SQUARE) > 0.1


@pytest.mark.parametrize("base", [0.0, 0.37 + 0.61j, -2.1 + 5j])
def test_base_shift_invariance(base):
    spec = S.ThetaEmbedding(0.3 + 1.2j, 2)
    e = energy_over_fundamental_domain(spec, base=base).energy
    assert e == pytest.approx(4.0, rel=1e-6)


def test_included_and_scaled():
    spec = S.WeierstrassP(SQUARE)
    z = np.array([0.2 + 0.3j, 0.41 + 0.12j])
    assert np.allclose(density(S.Included(spec, 4), z), density(spec, z), rtol=1e-13)
    m = 2.5
    assert np.allclose(density(S.Scaled(spec, m), m * z), density(spec, z) / m**2, rtol=1e-12)
    rep = energy_over_fundamental_domain(S.Scaled(spec, m))
    assert rep.energy == pytest.approx(2.0, rel=1e-3)


@pytest.mark.parametrize("spec", [S.Rational.polynomial([1], [0, 1, 0, 0.5]), EXP, S.WeierstrassP(SQUARE), S.ThetaEmbedding(0.3 + 1.2j, 3)])
def test_derivative_fd_order(spec):
    z0 = 0.21 + 0.33j
    jet = evaluate_jet(spec, z0)
    ref = jet.lift / jet.lift[0]
    exact = (jet.derivative - ref * jet.derivative[0]) / jet.lift[0]

    def err(h):
        p = evaluate_jet(spec, z0 + h).lift
        m = evaluate_jet(spec, z0 - h).lift
        return np.max(np.abs((p / p[0] - m / m[0]) / (2 * h) - exact))

    assert math.log2(err(1e-2) / err(5e-3)) >= 1.9
