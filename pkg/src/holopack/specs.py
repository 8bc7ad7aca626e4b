"""Closed-world curve descriptions and lattices.

A curve spec is an immutable description; evaluation lives in
:mod:`holopack.curves`. Complex numbers serialize as ``[re, im]`` pairs and
polynomials as coefficient lists in ascending powers of ``z``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

from .errors import InvalidCurve


def _finite_complex(value, what: str) -> complex:
    c = complex(value)
    if not (math.isfinite(c.real) and math.isfinite(c.imag)):
        raise InvalidCurve(f"{what} must be finite, got {value!r}")
    return c


@dataclass(frozen=True)
class Lattice:
    """Rank-two lattice ``Z*omega1 + Z*omega2`` with ``Im(omega2/omega1) > 0``."""

    omega1: complex
    omega2: complex

    def __post_init__(self):
        w1 = _finite_complex(self.omega1, "omega1")
        w2 = _finite_complex(self.omega2, "omega2")
        object.__setattr__(self, "omega1", w1)
        object.__setattr__(self, "omega2", w2)
        if w1 == 0 or (w2 / w1).imag <= 0:
            raise InvalidCurve("lattice basis must satisfy Im(omega2/omega1) > 0")

    @classmethod
    def from_tau(cls, tau: complex, scale: complex = 1.0) -> "Lattice":
        return cls(complex(scale), complex(scale) * complex(tau))

    @property
    def tau(self) -> complex:
        return self.omega2 / self.omega1

    @property
    def t(self) -> float:
        return self.tau.imag

    @property
    def vol(self) -> float:
        return abs((self.omega1.conjugate() * self.omega2).imag)

    @property
    def diameter(self) -> float:
        """Longest diagonal of the period parallelogram."""
        return max(abs(self.omega1 + self.omega2), abs(self.omega1 - self.omega2))

    def scaled(self, m: complex) -> "Lattice":
        return Lattice(self.omega1 * m, self.omega2 * m)


@dataclass(frozen=True)
class Rational:
    """Curve ``[P_0/Q_0 : ... : P_n/Q_n]`` given per homogeneous component."""

    components: tuple  # of (numerator coeffs, denominator coeffs)

    def __post_init__(self):
        comps = tuple(
            (tuple(_finite_complex(c, "coefficient") for c in num),
             tuple(_finite_complex(c, "coefficient") for c in den))
            for num, den in self.components
        )
        if len(comps) < 2:
            raise InvalidCurve("a rational curve needs at least two homogeneous components")
        if all(not any(num) for num, _ in comps):
            raise InvalidCurve("rational components are all identically zero")
        if any(not any(den) for _, den in comps):
            raise InvalidCurve("denominator polynomial is identically zero")
        object.__setattr__(self, "components", comps)

    @property
    def dim(self) -> int:
        return len(self.components) - 1

    @classmethod
    def polynomial(cls, *coeff_lists) -> "Rational":
        """``[p_0 : p_1 : ...]`` with unit denominators."""
        return cls(tuple((tuple(c), (1.0,)) for c in coeff_lists))


@dataclass(frozen=True)
class ExpLinear:
    """Curve ``[1 : exp(a_1 z + b_1) : ... : exp(a_n z + b_n)]``."""

    terms: tuple  # of (a_i, b_i)

    def __post_init__(self):
        terms = tuple((_finite_complex(a, "a"), _finite_complex(b, "b")) for a, b in self.terms)
        if not terms:
            raise InvalidCurve("ExpLinear needs dimension >= 1")
        object.__setattr__(self, "terms", terms)

    @property
    def dim(self) -> int:
        return len(self.terms)


@dataclass(frozen=True)
class WeierstrassP:
    """Curve ``[1 : wp(z)]`` for the Weierstrass function of ``lattice``.

    ``tol`` bounds the truncation error of the row-summed lattice series.
    """

    lattice: Lattice
    tol: float = 1e-13

    def __post_init__(self):
        if not self.tol > 0:
            raise InvalidCurve("tol must be positive")

    dim = 1


@dataclass(frozen=True)
class ThetaEmbedding:
    """Theta embedding of ``C/lL`` into ``CP^{l^2-1}``, ``L = Z + Z*tau``."""

    tau: complex
    l: int
    tol: float = 1e-14

    def __post_init__(self):
        tau = _finite_complex(self.tau, "tau")
        if tau.imag <= 0:
            raise InvalidCurve("tau must lie in the upper half plane")
        if int(self.l) != self.l or self.l < 2:
            raise InvalidCurve("ThetaEmbedding needs integer l >= 2")
        object.__setattr__(self, "tau", tau)
        object.__setattr__(self, "l", int(self.l))

    @property
    def dim(self) -> int:
        return self.l * self.l - 1


@dataclass(frozen=True)
class Scaled:
    """The curve ``z -> f(z/m)``."""

    inner: "CurveSpec"
    m: float

    def __post_init__(self):
        m = float(self.m)
        if not (m > 0 and math.isfinite(m)):
            from .errors import NonpositiveScale

            raise NonpositiveScale(f"scale must be positive, got {self.m!r}")
        object.__setattr__(self, "m", m)

    @property
    def dim(self) -> int:
        return self.inner.dim


@dataclass(frozen=True)
class Included:
    """``inner`` composed with the linear inclusion into ``CP^{target_dim}``."""

    inner: "CurveSpec"
    target_dim: int

    def __post_init__(self):
        if self.target_dim <= self.inner.dim:
            raise InvalidCurve("Included target dim must exceed the inner dim")

    @property
    def dim(self) -> int:
        return self.target_dim


CurveSpec = Union[Rational, ExpLinear, WeierstrassP, ThetaEmbedding, Scaled, Included]


def lattice_of(spec: CurveSpec) -> Lattice | None:
    """Period lattice of an elliptic source, or None for non-periodic families."""
    if isinstance(spec, WeierstrassP):
        return spec.lattice
    if isinstance(spec, ThetaEmbedding):
        return Lattice.from_tau(spec.tau, scale=spec.l)
    if isinstance(spec, Scaled):
        inner = lattice_of(spec.inner)
        return None if inner is None else inner.scaled(spec.m)
    if isinstance(spec, Included):
        return lattice_of(spec.inner)
    return None


# -- serialization -----------------------------------------------------------

def _c2l(c: complex) -> list:
    return [float(c.real), float(c.imag)]


def _l2c(v, where: str) -> complex:
    if isinstance(v, (int, float)):
        return complex(v)
    if isinstance(v, (list, tuple)) and len(v) == 2:
        return complex(float(v[0]), float(v[1]))
    raise InvalidCurve(f"{where}: expected a number or [re, im] pair, got {v!r}")


def _check_keys(doc: dict, allowed: set, where: str):
    extra = set(doc) - allowed
    if extra:
        raise InvalidCurve(f"{where}: unknown keys {sorted(extra)}")


def spec_to_dict(spec: CurveSpec) -> dict:
    if isinstance(spec, Rational):
        return {"family": "rational",
                "components": [{"numerator": [_c2l(c) for c in num],
                                "denominator": [_c2l(c) for c in den]}
                               for num, den in spec.components]}
    if isinstance(spec, ExpLinear):
        return {"family": "exp_linear",
                "terms": [{"a": _c2l(a), "b": _c2l(b)} for a, b in spec.terms]}
    if isinstance(spec, WeierstrassP):
        return {"family": "weierstrass_p",
                "omega1": _c2l(spec.lattice.omega1), "omega2": _c2l(spec.lattice.omega2),
                "tol": spec.tol}
    if isinstance(spec, ThetaEmbedding):
        return {"family": "theta_embedding", "tau": _c2l(spec.tau), "l": spec.l, "tol": spec.tol}
    if isinstance(spec, Scaled):
        return {"family": "scaled", "m": spec.m, "inner": spec_to_dict(spec.inner)}
    if isinstance(spec, Included):
        return {"family": "included", "target_dim": spec.target_dim,
                "inner": spec_to_dict(spec.inner)}
    raise InvalidCurve(f"not a curve spec: {spec!r}")


def spec_from_dict(doc: dict) -> CurveSpec:
    if not isinstance(doc, dict) or "family" not in doc:
        raise InvalidCurve("curve document needs a 'family' key")
    fam = doc["family"]
    if fam == "rational":
        _check_keys(doc, {"family", "components"}, "rational")
        comps = []
        for i, comp in enumerate(doc["components"]):
            _check_keys(comp, {"numerator", "denominator"}, f"rational component {i}")
            num = [_l2c(c, "numerator") for c in comp["numerator"]]
            den = [_l2c(c, "denominator") for c in comp.get("denominator", [[1.0, 0.0]])]
            comps.append((num, den))
        return Rational(tuple(comps))
    if fam == "exp_linear":
        _check_keys(doc, {"family", "terms"}, "exp_linear")
        terms = []
        for i, term in enumerate(doc["terms"]):
            _check_keys(term, {"a", "b"}, f"exp_linear term {i}")
            terms.append((_l2c(term["a"], "a"), _l2c(term.get("b", 0.0), "b")))
        return ExpLinear(tuple(terms))
    if fam == "weierstrass_p":
        _check_keys(doc, {"family", "omega1", "omega2", "tol"}, "weierstrass_p")
        lat = Lattice(_l2c(doc["omega1"], "omega1"), _l2c(doc["omega2"], "omega2"))
        return WeierstrassP(lat, float(doc.get("tol", 1e-13)))
    if fam == "theta_embedding":
        _check_keys(doc, {"family", "tau", "l", "tol"}, "theta_embedding")
        return ThetaEmbedding(_l2c(doc["tau"], "tau"), int(doc["l"]), float(doc.get("tol", 1e-14)))
    if fam == "scaled":
        _check_keys(doc, {"family", "m", "inner"}, "scaled")
        return Scaled(spec_from_dict(doc["inner"]), float(doc["m"]))
    if fam == "included":
        _check_keys(doc, {"family", "target_dim", "inner"}, "included")
        return Included(spec_from_dict(doc["inner"]), int(doc["target_dim"]))
    raise InvalidCurve(f"unknown curve family {fam!r}")
