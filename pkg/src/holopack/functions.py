"""Entire and meromorphic scalar functions used by the growth and coefficient tools.

A function carries its value and derivative and, where the family allows it,
``log|f|`` and ``f'/f`` in closed form. The spherical derivative of an
exponential family is then evaluated as ``|f'/f| / (2 cosh log|f|)`` without
ever forming ``f``, which keeps large radii in binary64 range.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from numpy.polynomial import polynomial as P

from . import specs as S
from .errors import InvalidCurve

Fn = Callable[[np.ndarray], np.ndarray]


def _inv_cosh2(x):
    """``1/cosh(x)^2`` without overflow."""
    e = np.exp(-2.0 * np.abs(x))
    return 4.0 * e / (1.0 + e) ** 2


@dataclass(frozen=True)
class AnalyticFunction:
    """A scalar holomorphic (or meromorphic) function with analytic derivative.

    ``doc`` is the serializable description used by config files.
    """

    name: str
    f: Fn = field(repr=False)
    df: Fn = field(repr=False)
    log_abs: Fn | None = field(default=None, repr=False)
    log_deriv: Fn | None = field(default=None, repr=False)
    sph: Fn | None = field(default=None, repr=False)
    doc: dict = field(default_factory=dict, repr=False, compare=False)

    def __call__(self, z):
        return self.f(np.asarray(z, dtype=complex))

    def derivative(self, z):
        return self.df(np.asarray(z, dtype=complex))

    def log_modulus(self, z):
        z = np.asarray(z, dtype=complex)
        if self.log_abs is not None:
            return self.log_abs(z)
        with np.errstate(divide="ignore"):
            return np.log(np.abs(self.f(z)))

    def spherical(self, z):
        """Rescaled spherical derivative ``|f'| / (1 + |f|^2)``."""
        z = np.asarray(z, dtype=complex)
        if self.sph is not None:
            return self.sph(z)
        if self.log_abs is not None and self.log_deriv is not None:
            return 0.5 * np.abs(self.log_deriv(z)) * np.sqrt(_inv_cosh2(self.log_abs(z)))
        fv = self.f(z)
        dv = self.df(z)
        af = np.abs(fv)
        with np.errstate(all="ignore"):
            flip = af > 1
            safe = np.where(flip, af, 1.0)
            return np.where(flip, (np.abs(dv) / safe**2) / (1.0 + 1.0 / safe**2), np.abs(dv) / (1.0 + af**2))

    def fs_density(self, z):
        """Fubini-Study energy density ``|f'|^2 / (pi (1 + |f|^2)^2)``."""
        return self.spherical(z) ** 2 / math.pi

    def log1p_abs2(self, z):
        """``log(1 + |f|^2)`` computed from ``log|f|``."""
        return np.logaddexp(0.0, 2.0 * self.log_modulus(z))


def polynomial(coeffs) -> AnalyticFunction:
    """Polynomial with ascending complex coefficients."""
    c = np.array([complex(x) for x in coeffs])
    d = P.polyder(c) if len(c) > 1 else np.zeros(1, dtype=complex)
    return AnalyticFunction(f"poly{list(coeffs)}", lambda z: P.polyval(z, c), lambda z: P.polyval(z, d),
                            doc={"kind": "polynomial", "coeffs": [[x.real, x.imag] for x in c]})


def sine() -> AnalyticFunction:
    return AnalyticFunction("sin", np.sin, np.cos, doc={"kind": "sin"})


def exp_poly(coeffs) -> AnalyticFunction:
    """``exp(g)`` for the polynomial ``g`` with ascending coefficients."""
    c = np.array([complex(x) for x in coeffs])
    d = P.polyder(c) if len(c) > 1 else np.zeros(1, dtype=complex)
    g = lambda z: P.polyval(z, c)
    dg = lambda z: P.polyval(z, d)
    return AnalyticFunction(f"exp(poly{list(coeffs)})", lambda z: np.exp(g(z)), lambda z: dg(z) * np.exp(g(z)),
                            log_abs=lambda z: g(z).real, log_deriv=dg,
                            doc={"kind": "exp_poly", "coeffs": [[x.real, x.imag] for x in c]})


def exp_sin() -> AnalyticFunction:
    return AnalyticFunction("exp(sin)", lambda z: np.exp(np.sin(z)), lambda z: np.cos(z) * np.exp(np.sin(z)),
                            log_abs=lambda z: np.sin(z).real, log_deriv=np.cos, doc={"kind": "exp_sin"})


def from_curve(spec: S.CurveSpec) -> AnalyticFunction:
    """The meromorphic function ``F_1/F_0`` of a curve into ``CP^1``."""
    from .curves import evaluate_jet

    if spec.dim != 1:
        raise InvalidCurve("only curves into CP^1 define a scalar function")

    def parts(z):
        jet = evaluate_jet(spec, z)
        return jet.lift[..., 0], jet.lift[..., 1], jet.derivative[..., 0], jet.derivative[..., 1]

    def f(z):
        f0, f1, _, _ = parts(z)
        return f1 / f0

    def df(z):
        f0, f1, d0, d1 = parts(z)
        return (d1 * f0 - f1 * d0) / f0**2

    def log_abs(z):
        f0, f1, _, _ = parts(z)
        with np.errstate(divide="ignore"):
            return np.log(np.abs(f1)) - np.log(np.abs(f0))

    def spherical(z):
        from .geometry import fs_density

        return np.sqrt(math.pi * fs_density(evaluate_jet(spec, z)))

    return AnalyticFunction("curve", f, df, log_abs=log_abs, sph=spherical,
                            doc={"kind": "curve", "curve": S.spec_to_dict(spec)})


def from_dict(doc: dict) -> AnalyticFunction:
    kind = doc.get("kind")
    allowed = {"polynomial": {"kind", "coeffs"}, "exp_poly": {"kind", "coeffs"}, "sin": {"kind"},
               "exp_sin": {"kind"}, "curve": {"kind", "curve"}}
    if kind not in allowed:
        raise InvalidCurve(f"unknown function kind {kind!r}")
    extra = set(doc) - allowed[kind]
    if extra:
        raise InvalidCurve(f"function {kind}: unknown keys {sorted(extra)}")
    if kind in ("polynomial", "exp_poly"):
        coeffs = [complex(*c) if isinstance(c, (list, tuple)) else complex(c) for c in doc["coeffs"]]
        return (polynomial if kind == "polynomial" else exp_poly)(coeffs)
    if kind == "sin":
        return sine()
    if kind == "exp_sin":
        return exp_sin()
    return from_curve(S.spec_from_dict(doc["curve"]))
