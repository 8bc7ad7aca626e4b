"""Jacobi theta functions with characteristics and the embeddings phi_l.

Series truncation is certified: ``ThetaParams`` picks the cutoff ``N`` so that
the discarded terms sum below ``tol`` for every ``z`` with
``|Im z| <= y_max``. Characteristic thetas are summed in the combined form

    theta_{a,b}(z) = sum_n exp(pi i (n+a)^2 tau + 2 pi i (n+a)(z+b)),

which avoids the overflow-prone prefactor of the textbook definition.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidThetaParams, WindowExceeded
from .geometry import CurveJet, fs_density
from .quadrature import gauss_legendre
from .scan import Domain, grid_max


def _tail_bound(N: int, t: float, y: float) -> float:
    """Bound on ``2 * sum_{n>N} exp(-pi t n^2 + 2 pi n y)``."""
    total = 0.0
    n = N + 1
    while True:
        term = math.exp(-math.pi * t * n * n + 2 * math.pi * n * y)
        ratio = math.exp(-math.pi * t * (2 * n + 1) + 2 * math.pi * y)
        if ratio < 0.5:
            return 2.0 * (total + term / (1.0 - ratio))
        total += term
        n += 1


@dataclass(frozen=True)
class ThetaParams:
    """Modulus ``tau``, tolerance, and certified evaluation window ``|Im z| <= y_max``."""

    tau: complex
    tol: float = 1e-14
    y_max: float | None = None
    N: int = field(init=False)

    def __post_init__(self):
        tau = complex(self.tau)
        if not tau.imag > 0:
            raise InvalidThetaParams(f"Im(tau) must be positive, got tau={tau}")
        if not self.tol > 0:
            raise InvalidThetaParams("tol must be positive")
        object.__setattr__(self, "tau", tau)
        if self.y_max is None:
            # one fundamental domain plus margin
            object.__setattr__(self, "y_max", tau.imag + 2.0 * (abs(tau) + 1.0))
        if self.y_max < 0:
            raise InvalidThetaParams("y_max must be nonnegative")
        N = 1
        while _tail_bound(N, tau.imag, self.y_max) >= self.tol:
            N += 1
        object.__setattr__(self, "N", N)

    @property
    def t(self) -> float:
        return self.tau.imag

    def check_window(self, w, what: str = "z"):
        y = np.abs(np.imag(w))
        if np.any(y > self.y_max * (1 + 1e-12)):
            raise WindowExceeded(f"|Im {what}| = {float(np.max(y)):.6g} exceeds y_max = {self.y_max:.6g}")


@dataclass(frozen=True)
class Characteristic:
    a: float
    b: float


@dataclass(frozen=True)
class EmbeddingSpec:
    """The embedding ``phi_l`` with its ``l^2`` characteristics in row-major order."""

    params: ThetaParams
    l: int

    def __post_init__(self):
        if int(self.l) != self.l or self.l < 2:
            raise InvalidThetaParams("l must be an integer >= 2")

    @property
    def grid(self) -> list[Characteristic]:
        return [Characteristic(i / self.l, j / self.l) for i in range(self.l) for j in range(self.l)]

    @property
    def a(self) -> np.ndarray:
        return np.repeat(np.arange(self.l) / self.l, self.l)

    @property
    def b(self) -> np.ndarray:
        return np.tile(np.arange(self.l) / self.l, self.l)

    @classmethod
    def for_tau(cls, tau: complex, l: int, tol: float = 1e-14, y_max: float | None = None):
        return cls(ThetaParams(tau, tol, y_max), l)


SERIES_CHUNK = 2_000_000  # complex entries per temporary (points x terms x characteristics)


def _series(z, a, b, params: ThetaParams, derivative: bool):
    """Sum the combined series for broadcastable ``z`` (..., 1) and ``a``, ``b`` (C,)."""
    N = params.N
    n = np.arange(-N, N + 1, dtype=float)
    tau = params.tau
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    z = np.asarray(z, dtype=complex)
    shape = np.broadcast_shapes(z.shape[:-1] + (a.size,), z.shape[:-1] + (b.size,))
    zf = np.broadcast_to(z, shape[:-1] + (1,)).reshape(-1)
    m = n[:, None] + a[None, :]  # (T, C)
    quad = 1j * math.pi * m * m * tau + 2j * math.pi * m * b[None, :]
    step = max(1, SERIES_CHUNK // (m.size or 1))
    val = np.empty((zf.size, m.shape[1]), dtype=complex)
    der = np.empty_like(val) if derivative else None
    for lo in range(0, zf.size, step):
        zc = zf[lo:lo + step, None, None]
        terms = np.exp(quad + 2j * math.pi * m * zc)
        val[lo:lo + step] = terms.sum(axis=-2)
        if derivative:
            der[lo:lo + step] = (2j * math.pi * m * terms).sum(axis=-2)
    val = val.reshape(shape)
    return val, (der.reshape(shape) if derivative else None)


def theta(z, params: ThetaParams):
    """``theta(z; tau)`` with absolute truncation error below ``params.tol``."""
    params.check_window(z)
    val, _ = _series(np.asarray(z)[..., None], [0.0], [0.0], params, False)
    val = val[..., 0]
    return val[()] if val.ndim == 0 else val


def theta_prime(z, params: ThetaParams):
    params.check_window(z)
    _, der = _series(np.asarray(z)[..., None], [0.0], [0.0], params, True)
    der = der[..., 0]
    return der[()] if der.ndim == 0 else der


def theta_ab(z, char: Characteristic, params: ThetaParams):
    """``theta_{a,b}(z)``; the window must cover ``z + a tau + b``."""
    z = np.asarray(z, dtype=complex)
    params.check_window(z + char.a * params.tau + char.b, "(z + a tau + b)")
    val, _ = _series(z[..., None], [char.a], [char.b], params, False)
    val = val[..., 0]
    return val[()] if val.ndim == 0 else val


def phi_l_jet(z, emb: EmbeddingSpec) -> CurveJet:
    """Lift ``(theta_i(z))_i`` of ``phi_l`` and its term-wise derivative."""
    z = np.asarray(z, dtype=complex)
    p = emb.params
    a = emb.a
    if z.size:
        ymax = float(np.max(np.abs(z.imag + a.max() * p.t)))
        ymin = float(np.max(np.abs(z.imag)))
        if max(ymax, ymin) > p.y_max * (1 + 1e-12):
            raise WindowExceeded(f"phi_{emb.l} jet outside certified window y_max = {p.y_max:.6g}")
    val, der = _series(z[..., None], a, emb.b, p, True)
    return CurveJet(val, der)


@dataclass(frozen=True)
class MeanSquareReport:
    numeric: float
    closed_form: float
    abs_diff: float


def mean_square_closed_form(y: float, t: float) -> float:
    return math.sqrt(1.0 / (2.0 * t)) * math.exp(2.0 * math.pi * y * y / t)


def mean_square_characteristics(z: complex, params: ThetaParams, quad_order: int = 64) -> MeanSquareReport:
    """Double integral of ``|theta_{a,b}(z)|^2`` over ``(a, b) in [0,1]^2`` versus its closed form."""
    if quad_order < 32:
        raise ValueError("quad_order must be at least 32 per axis")
    z = complex(z)
    params.check_window(np.array([z, z + params.tau]), "(z + a tau + b)")
    x, w = gauss_legendre(quad_order, 0.0, 1.0)
    A = np.repeat(x, quad_order)
    B = np.tile(x, quad_order)
    W = np.repeat(w, quad_order) * np.tile(w, quad_order)
    vals, _ = _series(np.array([[z]]), A, B, params, False)
    integrand = np.abs(vals[0]) ** 2
    numeric = math.fsum(integrand * W)
    closed = mean_square_closed_form(z.imag, params.t)
    return MeanSquareReport(numeric, closed, abs(numeric - closed))


def parseval_row(a: float, z: complex, params: ThetaParams, quad_order: int = 64) -> tuple[float, float]:
    """``int_0^1 |theta(z + a tau + b)|^2 db`` by quadrature and by the Parseval series."""
    x, w = gauss_legendre(quad_order, 0.0, 1.0)
    pts = z + a * params.tau + x
    vals = theta(pts, params)
    numeric = math.fsum(np.abs(vals) ** 2 * w)
    n = np.arange(-params.N, params.N + 1)
    y = complex(z).imag
    series = math.fsum(np.exp(-2 * math.pi * n**2 * params.t - 4 * math.pi * n * (y + a * params.t)))
    return numeric, series


def phi_l_density(z, emb: EmbeddingSpec) -> np.ndarray:
    return fs_density(phi_l_jet(z, emb))


def density_deviation(z, tau: complex, l: int, cutoff: float = 745.0) -> np.ndarray:
    """``|dphi_l|^2(z) - 1/t`` computed without cancellation.

    The characteristic-summed ``sum_i |theta_i|^2`` equals
    ``l^2 sqrt(1/2t) exp(2 pi y^2/t) (1 + eps(z))`` where, by Poisson
    summation over the characteristic grid, ``eps`` is a lattice sum of pure
    oscillations ``exp(c_pk + lam_p x + mu_pk y)`` with Gaussian-small
    amplitudes. The deviation is ``(1/4pi) Laplacian log(1 + eps)``, evaluated
    from the analytic derivatives of ``eps``. Modes with ``Re c_pk < -cutoff``
    are dropped (``exp(-745)`` underflows binary64).
    """
    tau = complex(tau)
    s, t = tau.real, tau.imag
    # Re c_pk = -pi l^2 (p s + k)^2 / (2t) - pi t l^2 p^2 / 2
    pmax = int(math.ceil(math.sqrt(2.0 * cutoff / (math.pi * t * l * l)))) + 1
    modes = []
    for p in range(-pmax, pmax + 1):
        rest = cutoff - math.pi * t * l * l * p * p / 2.0
        if rest < 0:
            continue
        half = math.sqrt(2.0 * t * rest / (math.pi * l * l))
        for k in range(int(math.floor(-p * s - half)), int(math.ceil(-p * s + half)) + 1):
            if (p, k) != (0, 0):
                modes.append((p, k))
    p = np.array([m[0] for m in modes], dtype=float)
    k = np.array([m[1] for m in modes], dtype=float)
    w = p * tau.conjugate() + k
    const = -math.pi * l * l * w * w / (2 * t) - 1j * math.pi * tau.conjugate() * l * l * p * p
    lam = -2j * math.pi * l * p
    mu = 2j * math.pi * l * w / t - 2 * math.pi * l * p
    z = np.asarray(z, dtype=complex)
    x = z.real[..., None]
    y = z.imag[..., None]
    e = np.exp(const + lam * x + mu * y)
    eps = e.sum(axis=-1).real
    ex = (lam * e).sum(axis=-1).real
    ey = (mu * e).sum(axis=-1).real
    lap = ((lam * lam + mu * mu) * e).sum(axis=-1).real
    one = 1.0 + eps
    out = (lap / one - (ex * ex + ey * ey) / one**2) / (4 * math.pi)
    return out[()] if out.ndim == 0 else out


def fundamental_cell(tau: complex) -> Domain:
    """``K = {x + y tau : 0 <= x, y <= 1}``."""
    return Domain(0.0, 1.0, complex(tau))


@dataclass(frozen=True)
class TianReport:
    """Grid sup of ``| |dphi_l|^2 - 1/t |`` over ``K`` and the resulting capacity bound.

    ``capacity_bound = 1/(t * max |dphi_l|^2)``; both come from one grid scan
    and are estimates, not certificates.
    """

    l: int
    defect: float
    max_density: float
    capacity_bound: float
    spacing: float
    route: str


def tian_report(emb: EmbeddingSpec, resolution: int = 64, route: str = "dual") -> TianReport:
    """Scan ``|dphi_l|^2`` over the cell ``K``.

    ``route="dual"`` evaluates the deviation from ``1/t`` with the Poisson-dual
    series of :func:`density_deviation`, which keeps full relative accuracy when
    the deviation is far below binary64 resolution of ``1/t``. ``route="direct"``
    subtracts ``1/t`` from the density of the lift and bottoms out near 1e-15.
    """
    tau = emb.params.tau
    t = tau.imag
    cell = fundamental_cell(tau)
    if route == "dual":
        dev = lambda z: density_deviation(z, tau, emb.l)
    elif route == "direct":
        dev = lambda z: phi_l_density(z, emb) - 1.0 / t
    else:
        raise ValueError(f"unknown route {route!r}")
    worst = grid_max(lambda z: np.abs(dev(z)), cell, resolution)
    top = grid_max(dev, cell, resolution)
    max_density = 1.0 / t + top.value
    # 1/(t (1/t + d)) written to keep precision for tiny d
    bound = 1.0 / (1.0 + t * top.value)
    return TianReport(emb.l, worst.value, max_density, bound, worst.spacing, route)


def tian_sup_defect(emb: EmbeddingSpec, resolution: int = 64, route: str = "dual") -> float:
    return tian_report(emb, resolution, route).defect


def capacity_lower_bound(emb: EmbeddingSpec, resolution: int = 64, route: str = "dual") -> float:
    return tian_report(emb, resolution, route).capacity_bound
