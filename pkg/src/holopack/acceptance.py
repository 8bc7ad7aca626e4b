"""Acceptance experiments, one function per criterion.

Each function runs its experiment at the stated tolerance and returns a
``CriterionResult``; nothing here adjusts a threshold to make a check pass.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import specs as S
from .coeff_bounds import FINAL_CONSTANTS, ChainParams, constant_chain, mutate_final
from .curves import energy_over_fundamental_domain, evaluate_jet
from .density import RadiusSchedule, density_estimate, disk_average, sandwich_certified, tile_squares
from .errors import StepFailed
from .functions import exp_poly, polynomial
from .geometry import CurveJet, fs_density
from .nevanlinna import characteristic_T, growth_profile, proximity_m
from .theta import EmbeddingSpec, ThetaParams, mean_square_characteristics, phi_l_density, tian_report

TAUS = (1j, 0.3 + 1.2j)


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    seconds: float = 0.0
    detail: dict = field(default_factory=dict)

    def line(self) -> str:
        return f"criterion {self.number:2d} [{'PASS' if self.passed else 'FAIL'}] {self.title} ({self.seconds:.2f} s)"


def _timed(number: int, title: str, budget: float | None):
    def wrap(fn):
        def run() -> CriterionResult:
            t0 = time.perf_counter()
            passed, detail = fn()
            dt = time.perf_counter() - t0
            if budget is not None:
                detail["budget_seconds"] = budget
                passed = passed and dt < budget
            return CriterionResult(number, title, bool(passed), dt, detail)

        run.__name__ = fn.__name__
        run.__doc__ = fn.__doc__
        return run

    return wrap


def z_grid(tau: complex, n: int = 5) -> np.ndarray:
    """``n x n`` points ``x + y tau`` with ``x, y`` spread over ``[0, 1)``."""
    s = (np.arange(n) + 0.5) / n
    return (s[:, None] + s[None, :] * tau).ravel()


@_timed(1, "theta mean square closed form", 10.0)
def criterion_1():
    worst = 0.0
    for tau in TAUS:
        p = ThetaParams(tau)
        for z in z_grid(tau):
            worst = max(worst, mean_square_characteristics(z, p).abs_diff)
    return worst < 1e-7, {"max_abs_error": worst, "tolerance": 1e-7}


@_timed(2, "degree of phi_l equals l^2", 60.0)
def criterion_2():
    rows, ok = [], True
    for tau in TAUS:
        for l in (2, 3, 4):
            E = energy_over_fundamental_domain(S.ThetaEmbedding(tau, l)).energy
            rel = abs(E - l * l) / (l * l)
            ok &= rel < 1e-3
            rows.append({"tau": [tau.real, tau.imag], "l": l, "energy": E, "rel_error": rel})
    return ok, {"rows": rows}


@_timed(3, "Tian defect decreases and capacity bound exceeds 0.9", 300.0)
def criterion_3():
    defects, bounds = {}, {}
    for l in range(2, 9):
        rep = tian_report(EmbeddingSpec.for_tau(1j, l))
        defects[l], bounds[l] = rep.defect, rep.capacity_bound
    decreasing = all(defects[l + 1] < defects[l] for l in range(2, 6))
    good = [l for l in bounds if bounds[l] > 0.9]
    return decreasing and bool(good), {"defects": defects, "capacity_bounds": bounds,
                                       "first_l_above_0.9": min(good) if good else None}


@_timed(4, "equivariance of |dphi_l| under the lattice", None)
def criterion_4():
    worst = 0.0
    z = z_grid(1j, 3) + 0.05
    for l in (2, 3):
        emb = EmbeddingSpec.for_tau(1j, l)
        base = np.sqrt(phi_l_density(z, emb))
        for al in range(3):
            for be in range(3):
                shifted = np.sqrt(phi_l_density(z + al * 1j + be, emb))
                worst = max(worst, float(np.max(np.abs(shifted - base))))
    return worst < 1e-8, {"max_abs_difference": worst, "tolerance": 1e-8}


@_timed(5, "disk averages of phi_2 tend to E/vol", None)
def criterion_5():
    spec = S.ThetaEmbedding(1j, 2)
    lat = S.lattice_of(spec)
    R = 20 * lat.diameter
    avg, err = disk_average(spec, R)
    target = 4.0 / lat.vol
    rel = abs(avg - target) / target
    return rel < 0.05, {"R": R, "average": avg, "target": target, "rel_error": rel, "quad_error": err}


@_timed(6, "gap ratios at least 1, decreasing for phi_l", None)
def criterion_6():
    ratios = {}
    for l in (2, 3, 4):
        ratios[f"phi_{l}"] = energy_over_fundamental_domain(S.ThetaEmbedding(1j, l)).gap_ratio
    ratios["wp"] = energy_over_fundamental_domain(S.WeierstrassP(S.Lattice(1.0, 1j))).gap_ratio
    phi = [ratios[f"phi_{l}"] for l in (2, 3, 4)]
    ok = all(r >= 1 for r in ratios.values()) and phi[0] > phi[1] > phi[2]
    return ok, {"gap_ratios": ratios}


@_timed(7, "exact constant chain and final-comparison mutations", 1.0)
def criterion_7():
    rep = constant_chain(ChainParams())
    ok = rep.all_hold and rep.final_bound is not None and rep.square_bound < rep.final_bound
    mutations = {}
    rel = Fraction(1, 1000)
    for name in FINAL_CONSTANTS:
        params, consts = mutate_final(name, rel)
        try:
            constant_chain(params, consts)
            mutations[name] = None
        except StepFailed as err:
            mutations[name] = err.step
    ok = ok and all(v is not None for v in mutations.values())
    return ok, {"steps": len(rep.records), "final_bound": rep.final_bound, "square_bound": rep.square_bound,
                "mutation_failed_at": mutations}


@_timed(8, "Nevanlinna identities for e^z and z", None)
def criterion_8():
    e = exp_poly([0, 1])
    m_err = max(abs(proximity_m(e, r)[0] - r / math.pi) for r in (1, 5, 10, 50))
    prof = growth_profile(e, [1, 2, 3, 5, 7, 10, 15, 20, 25, 30, 35, 40, 45, 50])
    z = polynomial([0, 1])
    T_err = max(abs(characteristic_T(z, r) - 0.5 * math.log((1 + r * r) / 2)) for r in (1, 2, 5, 10, 50))
    ok = m_err < 1e-6 and prof.max_abs_defect <= 0.5 and T_err < 1e-6
    return ok, {"m_max_error": m_err, "max_abs_T_minus_m": prof.max_abs_defect, "T_max_error": T_err}


@_timed(9, "hyperplane-complement decay of [1:e^z]", None)
def criterion_9():
    spec = S.ExpLinear(((1.0, 0.0),))
    prof = density_estimate(spec, RadiusSchedule.doubling(1.0, 7))
    slope = prof.loglog_slope(8, 128)
    avg100, _ = disk_average(spec, 100.0)
    ok = -1.2 <= slope <= -0.8 and avg100 <= 1.02e-3
    return ok, {"slope_8_128": slope, "average_R100": avg100}


@_timed(10, "property spot checks", 120.0)
def criterion_10():
    rng = np.random.default_rng(0)
    # gauge invariance
    F = rng.normal(size=(64, 3)) + 1j * rng.normal(size=(64, 3))
    dF = rng.normal(size=(64, 3)) + 1j * rng.normal(size=(64, 3))
    lam = np.exp(rng.normal(size=(64, 1)) + 1j * rng.normal(size=(64, 1)))
    mu = rng.normal(size=(64, 1)) + 1j * rng.normal(size=(64, 1))
    d0 = fs_density(CurveJet(F, dF))
    d1 = fs_density(CurveJet(lam * F, lam * dF + mu * F))
    gauge = float(np.max(np.abs(d1 - d0) / d0))
    # chart consistency for [1 : wp]
    from .geometry import density_from_jet

    wp = S.WeierstrassP(S.Lattice(1.0, 1j))
    z = 0.1 + 0.37 * rng.random(32) + 1j * (0.1 + 0.37 * rng.random(32))
    da = density_from_jet(evaluate_jet(wp, z, "direct"))
    db = density_from_jet(evaluate_jet(wp, z, "inverted"))
    chart = float(np.max(np.abs(da - db) / da))
    # derivative against central differences
    spec = S.ThetaEmbedding(0.3 + 1.2j, 2)
    z0 = 0.21 + 0.33j
    jet = evaluate_jet(spec, z0)

    def fd_err(h):
        fp, fm = evaluate_jet(spec, z0 + h), evaluate_jet(spec, z0 - h)
        # bring both lifts to the gauge of the centre jet
        fp_l = fp.lift * (jet.lift[0] / fp.lift[0])
        fm_l = fm.lift * (jet.lift[0] / fm.lift[0])
        approx = (fp_l - fm_l) / (2 * h)
        exact = jet.derivative - jet.lift * (jet.derivative[0] / jet.lift[0])
        return float(np.max(np.abs(approx - exact)))

    order = math.log2(fd_err(1e-2) / fd_err(5e-3))
    # tiling sandwich
    sandwich = all(sandwich_certified(R, 1.0, len(tile_squares(R, 1.0))) for R in (3.0, 7.5, 10.0, 25.0))
    # determinism
    s1 = density_estimate(S.ExpLinear(((1.0, 0.0),)), RadiusSchedule.doubling(1.0, 3))
    s2 = density_estimate(S.ExpLinear(((1.0, 0.0),)), RadiusSchedule.doubling(1.0, 3))
    same = s1.samples == s2.samples and s1.quad_error == s2.quad_error
    ok = gauge < 1e-12 and chart < 1e-10 and order >= 1.9 and sandwich and same
    return ok, {"gauge_rel": gauge, "chart_rel": chart, "fd_order": order, "sandwich": sandwich,
                "deterministic": same}


CRITERIA = {i: globals()[f"criterion_{i}"] for i in range(1, 11)}


def run(numbers=None) -> list[CriterionResult]:
    return [CRITERIA[n]() for n in (numbers or sorted(CRITERIA))]
