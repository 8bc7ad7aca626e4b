import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from holopack import specs as S
from holopack.errors import InvalidCurve, NonpositiveScale

small = st.floats(-5, 5, allow_nan=False)
cplx = st.builds(complex, small, small)
upper = st.builds(complex, st.floats(-1, 1), st.floats(0.3, 3))


def test_lattice_properties():
    lat = S.Lattice.from_tau(0.3 + 1.2j, scale=2.0)
    assert lat.tau == pytest.approx(0.3 + 1.2j)
    assert lat.t == pytest.approx(1.2)
    assert lat.vol == pytest.approx(4 * 1.2)
    assert lat.diameter == pytest.approx(max(abs(2 + 2 * (0.3 + 1.2j)), abs(2 - 2 * (0.3 + 1.2j))))
    assert lat.scaled(0.5).vol == pytest.approx(1.2)


def test_lattice_orientation():
    with pytest.raises(InvalidCurve):
        S.Lattice(1.0, -1j)


@pytest.mark.parametrize("make", [
    lambda: S.Rational(()),
    lambda: S.Rational.polynomial([0.0], [0.0]),
    lambda: S.ExpLinear(()),
    lambda: S.ThetaEmbedding(1j, 1),
    lambda: S.ThetaEmbedding(-1j, 2),
    lambda: S.Included(S.ExpLinear(((1, 0),)), 1),
])
def test_invariants_rejected(make):
    with pytest.raises(InvalidCurve):
        make()


def test_scaled_rejects_nonpositive():
    with pytest.raises(NonpositiveScale):
        S.Scaled(S.ExpLinear(((1, 0),)), 0.0)


def test_dims():
    assert S.ThetaEmbedding(1j, 3).dim == 8
    assert S.Included(S.ExpLinear(((1, 0),)), 4).dim == 4
    assert S.WeierstrassP(S.Lattice(1, 1j)).dim == 1


def test_lattice_of():
    assert S.lattice_of(S.ThetaEmbedding(1j, 2)).vol == pytest.approx(4.0)
    assert S.lattice_of(S.ExpLinear(((1, 0),))) is None
    inner = S.WeierstrassP(S.Lattice(1, 1j))
    assert S.lattice_of(S.Scaled(inner, 3.0)).vol == pytest.approx(9.0)


specs = st.one_of(
    st.builds(lambda ab: S.ExpLinear(tuple(ab)), st.lists(st.tuples(cplx, cplx), min_size=1, max_size=3)),
    st.builds(lambda c, d: S.Rational.polynomial([1.0], list(c), list(d)),
              st.lists(cplx, min_size=1, max_size=3), st.lists(cplx, min_size=1, max_size=3)),
    st.builds(lambda tau, l: S.ThetaEmbedding(tau, l), upper, st.integers(2, 4)),
    st.builds(lambda tau: S.WeierstrassP(S.Lattice.from_tau(tau)), upper),
)


@given(specs, st.floats(0.1, 10))
def test_round_trip(spec, m):
    for s in (spec, S.Scaled(spec, m), S.Included(spec, spec.dim + 2)):
        assert S.spec_from_dict(S.spec_to_dict(s)) == s


def test_unknown_keys_rejected():
    with pytest.raises(InvalidCurve):
        S.spec_from_dict({"family": "exp_linear", "terms": [], "colour": 1})
    with pytest.raises(InvalidCurve):
        S.spec_from_dict({"family": "spiral"})
    with pytest.raises(InvalidCurve):
        S.spec_from_dict({"family": "theta_embedding", "tau": "i", "l": 2})


def test_nonfinite_rejected():
    with pytest.raises(InvalidCurve):
        S.ExpLinear(((math.inf, 0),))
