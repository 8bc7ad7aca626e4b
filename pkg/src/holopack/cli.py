"""Command line runner: ``holopack <subcommand> --config <path> [--out DIR] [--svg] [--threads N]``.

Exit status: 0 on success, 1 if an acceptance run has a failing criterion,
2 on a config or usage error, 3 on a module error (its name is printed).
"""

from __future__ import annotations

import argparse
import math
import sys
import time
from contextlib import nullcontext
from pathlib import Path

import numpy as np

from . import __version__
from . import specs as S
from .config import ExperimentConfig, load
from .errors import ConfigError, HolopackError, InvalidCurve
from .report import OutputSet, csv_text, json_text, svg_loglog

SUBCOMMANDS = ("density", "theta-table", "gap", "chain", "nevanlinna", "tiling", "acceptance", "validate")


def _complex(v, where: str) -> complex:
    if isinstance(v, (list, tuple)) and len(v) == 2:
        return complex(float(v[0]), float(v[1]))
    if isinstance(v, (int, float)):
        return complex(v)
    raise InvalidCurve(f"{where}: expected a number or [re, im] pair, got {v!r}")


def _norm(name: str):
    from .geometry import Normalization

    try:
        return Normalization(name)
    except ValueError:
        raise InvalidCurve(f"unknown normalization {name!r}") from None


def _schedule(cfg: ExperimentConfig):
    from .density import RadiusSchedule

    radii = cfg.param("radii")
    if radii is not None:
        return RadiusSchedule(tuple(radii))
    return RadiusSchedule.doubling(float(cfg.param("r0")), int(cfg.param("k_max")))


def _quad(cfg: ExperimentConfig):
    from .quadrature import QuadConfig

    return QuadConfig(float(cfg.param("annulus_width")), int(cfg.param("radial_order")),
                      float(cfg.param("angular_density")))


def _chain_inputs(cfg: ExperimentConfig):
    from .coeff_bounds import ChainConstants, ChainParams, to_fraction

    params = ChainParams(*(to_fraction(str(cfg.param(k))) for k in ("epsilon", "r0", "delta")))
    consts = ChainConstants(*(to_fraction(str(cfg.param(k))) for k in ("error_cap", "sector_gap", "vol_ratio")))
    return params, consts


# -- runners: each returns (OutputSet, summary line, exit status) ---------------

def run_density(cfg: ExperimentConfig, svg: bool):
    from .density import density_estimate

    spec = S.spec_from_dict(cfg.curve)
    sched = _schedule(cfg)
    out = OutputSet()
    matrix = cfg.param("matrix")
    if matrix is not None:
        from .nevanlinna import HyperplaneArrangement, hyperplane_density

        A = np.array([[_complex(v, "matrix") for v in row] for row in matrix])
        if not isinstance(spec, S.ExpLinear):
            raise InvalidCurve("a hyperplane arrangement needs an exp_linear curve")
        rep = hyperplane_density(HyperplaneArrangement(A), spec.terms, sched, _quad(cfg))
        prof = rep.profile
        extra = {"distortion": rep.distortion, "bound_coefficient": rep.bound_coefficient,
                 "bounds": list(rep.bounds), "bound_holds": rep.holds}
    else:
        prof = density_estimate(spec, sched, int(cfg.param("window")), _quad(cfg), _norm(cfg.param("norm")))
        extra = {}
    rows = [(R, a, e) for (R, a), e in zip(prof.samples, prof.quad_error)]
    out.add("density.csv", csv_text(["R", "average", "error"], rows))
    summary = {"tail_estimate": prof.tail_estimate, "window": prof.window, **extra}
    if len(rows) >= 2 and all(a > 0 for _, a, _ in rows):
        summary["loglog_slope"] = prof.loglog_slope()
    out.add("density.json", json_text(summary))
    if svg:
        out.add("density.svg", svg_loglog(prof.radii, prof.averages, "R", "disk average"))
    return out, f"density: {len(rows)} radii, tail estimate {prof.tail_estimate:.6g}", 0


def run_theta_table(cfg: ExperimentConfig, svg: bool):
    from .curves import energy_over_fundamental_domain
    from .theta import EmbeddingSpec, tian_report

    tau = _complex(cfg.param("tau"), "tau")
    res = int(cfg.param("resolution"))
    rows, entries = [], []
    for l in cfg.param("l"):
        emb = EmbeddingSpec.for_tau(tau, int(l), float(cfg.param("tol")))
        E = energy_over_fundamental_domain(S.ThetaEmbedding(tau, int(l), float(cfg.param("tol"))),
                                           resolution=res)
        rep = tian_report(emb, res, cfg.param("route"))
        rows.append((int(l), E.energy, rep.defect, rep.capacity_bound))
        entries.append({"l": int(l), "degree": E.energy, "defect": rep.defect, "lower_bound": rep.capacity_bound,
                        "max_density": rep.max_density, "gap_ratio": E.gap_ratio, "truncation_N": emb.params.N,
                        "spacing": rep.spacing})
    out = OutputSet()
    out.add("theta_table.csv", csv_text(["l", "degree", "defect", "lower_bound"], rows))
    out.add("theta_table.json", json_text({"tau": tau, "route": cfg.param("route"), "resolution": res,
                                           "rows": entries}))
    if svg:
        keep = [(l, d) for l, _, d, _ in rows if d > 0]
        out.add("theta_table.svg", svg_loglog([l for l, _ in keep], [d for _, d in keep], "l", "sup defect"))
    return out, f"theta-table: {len(rows)} rows at tau={tau}", 0


def run_gap(cfg: ExperimentConfig, svg: bool):
    from .curves import energy_over_fundamental_domain

    rows, entries = [], []
    for i, entry in enumerate(cfg.curves):
        if set(entry) - {"name", "curve"} or "curve" not in entry:
            raise InvalidCurve(f"curves[{i}] needs 'curve' and optional 'name' only")
        name = str(entry.get("name", f"curve{i}"))
        rep = energy_over_fundamental_domain(S.spec_from_dict(entry["curve"]),
                                             resolution=int(cfg.param("resolution")))
        rows.append((name, rep.energy, rep.vol, rep.sup_df, rep.gap_ratio))
        entries.append({"name": name, "energy": rep.energy, "vol": rep.vol, "sup_df": rep.sup_df,
                        "gap_ratio": None if math.isnan(rep.gap_ratio) else rep.gap_ratio,
                        "sup_spacing": rep.sup_spacing})
    out = OutputSet()
    out.add("gap.csv", csv_text(["name", "energy", "vol", "sup_df", "gap_ratio"], rows))
    out.add("gap.json", json_text({"rows": entries}))
    return out, f"gap: {len(rows)} curves", 0


def run_chain(cfg: ExperimentConfig, svg: bool):
    from .coeff_bounds import constant_chain, fraction_str

    params, consts = _chain_inputs(cfg)
    rep = constant_chain(params, consts, stop_on_failure=bool(cfg.param("stop_on_failure")))
    doc = rep.to_dict()
    doc["params"] = {k: fraction_str(getattr(params, k)) for k in ("epsilon", "r0", "delta")}
    doc["constants"] = {k: fraction_str(getattr(consts, k)) for k in ("error_cap", "sector_gap", "vol_ratio")}
    out = OutputSet()
    out.add("chain.json", json_text(doc))
    failed = [r.name for r in rep.records if not r.holds]
    status = "all steps hold" if not failed else f"failing steps: {', '.join(failed)}"
    return out, f"chain: {len(rep.records)} steps, {status}", 0


def run_nevanlinna(cfg: ExperimentConfig, svg: bool):
    from .functions import from_dict
    from .nevanlinna import growth_profile

    fn = from_dict(cfg.function)
    prof = growth_profile(fn, cfg.param("radii"), route=cfg.param("route"))
    out = OutputSet()
    out.add("nevanlinna.csv", prof.to_csv())
    if svg:
        keep = [(r, T) for r, _, T, _ in prof.rows if T > 0]
        out.add("nevanlinna.svg", svg_loglog([r for r, _ in keep], [T for _, T in keep], "r", "T(r)"))
    return out, f"nevanlinna: {len(prof.rows)} radii, max |T - m| = {prof.max_abs_defect:.6g}", 0


def run_tiling(cfg: ExperimentConfig, svg: bool):
    from .density import tiling_report

    spec = S.spec_from_dict(cfg.curve)
    rep = tiling_report(spec, float(cfg.param("R")), float(cfg.param("side")), int(cfg.param("quad_order")),
                        _norm(cfg.param("norm")))
    out = OutputSet()
    rows = [(i, j, a) for (i, j), a in zip(rep.squares, rep.per_square_averages)]
    out.add("tiling.csv", csv_text(["i", "j", "average"], rows))
    out.add("tiling.json", json_text({"R": rep.R, "side": rep.side, "count": rep.count,
                                      "max_average": rep.max_average, "sandwich_holds": rep.sandwich_holds}))
    return out, f"tiling: {rep.count} squares, sandwich {'holds' if rep.sandwich_holds else 'fails'}", 0


def run_acceptance(cfg: ExperimentConfig, svg: bool):
    from . import acceptance

    nums = [int(n) for n in cfg.param("criteria")]
    bad = [n for n in nums if n not in acceptance.CRITERIA]
    if bad:
        raise ConfigError(f"unknown acceptance criteria {bad}")
    results = acceptance.run(nums)
    for r in results:
        print(r.line())
    out = OutputSet()
    # timings vary between runs, so they stay out of the checksummed file
    out.add("acceptance.json", json_text({str(r.number): {"title": r.title, "passed": r.passed}
                                          for r in results}))
    passed = sum(r.passed for r in results)
    return out, f"acceptance: {passed}/{len(results)} criteria pass", 0 if passed == len(results) else 1


RUNNERS = {
    "density": run_density, "theta-table": run_theta_table, "gap": run_gap, "chain": run_chain,
    "nevanlinna": run_nevanlinna, "tiling": run_tiling, "acceptance": run_acceptance,
}


# -- validation ---------------------------------------------------------------------

def validate(cfg: ExperimentConfig) -> list[str]:
    """Schema and feasibility checks without running the experiment; returns report lines."""
    from .quadrature import disk_node_count
    from .theta import ThetaParams

    lines = [f"command: {cfg.command}"]
    if cfg.curve is not None:
        spec = S.spec_from_dict(cfg.curve)
        lines.append(f"curve: {type(spec).__name__} into CP^{spec.dim}")
        if isinstance(spec, S.ThetaEmbedding):
            lines.append(f"theta truncation N = {ThetaParams(spec.tau, spec.tol).N}")
    for i, entry in enumerate(cfg.curves or []):
        spec = S.spec_from_dict(entry.get("curve", {}))
        lines.append(f"curves[{i}]: {type(spec).__name__} into CP^{spec.dim}")
    if cfg.function is not None:
        from .functions import from_dict

        lines.append(f"function: {from_dict(cfg.function).name}")
    if cfg.command == "theta-table":
        tau = _complex(cfg.param("tau"), "tau")
        p = ThetaParams(tau, float(cfg.param("tol")))
        for l in cfg.param("l"):
            if int(l) < 2:
                from .errors import InvalidThetaParams

                raise InvalidThetaParams(f"l must be an integer >= 2, got {l}")
        lines.append(f"theta truncation N = {p.N} (window |Im z| <= {p.y_max:.6g}, tol {p.tol:g})")
    if cfg.command == "chain":
        params, consts = _chain_inputs(cfg)
        lines.append("chain parameters: " + ", ".join(f"{k} in (0, 1)" for k in ("epsilon", "r0", "delta")))
    if cfg.command == "density":
        sched = _schedule(cfg)
        qc = _quad(cfg)
        levels = (qc, qc.halved(), qc.halved().halved())
        nodes = sum(disk_node_count(R, c) for R in sched.radii for c in levels)
        lines.append(f"estimated integrand evaluations: {nodes}")
        if cfg.param("norm") is not None:
            _norm(cfg.param("norm"))
    if cfg.command == "nevanlinna":
        radii = [float(r) for r in cfg.param("radii")]
        if any(r < 1 for r in radii) or any(b <= a for a, b in zip(radii, radii[1:])):
            raise ValueError("radii must be >= 1 and strictly increasing")
    lines.append("ok")
    return lines


# -- entry point ----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="holopack",
                                     description="Packing densities of holomorphic curves: deterministic experiments.")
    parser.add_argument("--version", action="version", version=f"holopack {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name in SUBCOMMANDS:
        p = sub.add_parser(name, help=f"run the {name} experiment" if name != "validate" else "dry-run a config")
        p.add_argument("--config", required=True, help="TOML experiment config")
        p.add_argument("--out", default=None, help="output directory (default: [output] dir or ./out)")
        p.add_argument("--svg", action="store_true", help="also write an SVG plot")
        p.add_argument("--threads", type=int, default=None, help="cap on BLAS/OpenMP worker threads")
    return parser


def _thread_limit(n: int | None):
    if n is None:
        return nullcontext()
    if n < 1:
        raise ConfigError("--threads must be at least 1")
    from threadpoolctl import threadpool_limits

    return threadpool_limits(limits=n)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load(args.config)
        if args.subcommand == "validate":
            with _thread_limit(args.threads):
                for line in validate(cfg):
                    print(line)
            return 0
        if cfg.command != args.subcommand:
            raise ConfigError(f"config is for command {cfg.command!r}, not {args.subcommand!r}",
                              *_command_position(args.config))
        svg = args.svg or bool(cfg.output.get("svg", False))
        out_dir = Path(args.out or cfg.output.get("dir", "out"))
        t0 = time.perf_counter()
        with _thread_limit(args.threads):
            outputs, summary, status = RUNNERS[cfg.command](cfg, svg)
        manifest = {"tool": "holopack", "version": __version__, "command": cfg.command,
                    "config_sha256": cfg.digest(), "wall_seconds": round(time.perf_counter() - t0, 3)}
        outputs.write(out_dir, manifest)
        print(summary)
        return status
    except ConfigError as err:
        print(f"error: ConfigError: {err}", file=sys.stderr)
        return 2
    except OSError as err:
        print(f"error: ConfigError: cannot read config: {err}", file=sys.stderr)
        return 2
    except HolopackError as err:
        print(f"error: {err.name}: {err}", file=sys.stderr)
        return 3
    except ValueError as err:
        print(f"error: ValueError: {err}", file=sys.stderr)
        return 3


def _command_position(path) -> tuple[int | None, int | None]:
    for i, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if line.strip().startswith("command"):
            return i, 1
    return None, None


if __name__ == "__main__":
    sys.exit(main())
