"""Command-line front end.

    fetide solve|converge|sweep|oracle-check CONFIG [--jobs N] [--out DIR]

Exit status: 0 success, 1 failed check or failed solve, 2 usage or config error.
All result files of a command are computed first and then written atomically,
so a failing run leaves no partial output behind.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, replace
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import average_bound, convergence_study, depletion_metrics, time_to_fraction
from .checks import run_suites
from .config import ConfigError, RunConfig, load_config
from .model import DimensionlessParams, nondimensionalize, time_to_physical, validate_ranges
from .solver import IntegrationError, equilibrium, solve

log = logging.getLogger("fetide")

OUT_ENV = "FETIDE_OUT"


# ------------------------------------------------------------------ formatting


def _fmt(value: float, precision: int) -> str:
    return f"{value:.{precision}e}"


def _csv(header: list[str], rows, precision: int) -> str:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(float(v), precision) for v in row))
    return "\n".join(lines) + "\n"


def _round(obj, precision: int):
    if isinstance(obj, float):
        return float(_fmt(obj, precision)) if np.isfinite(obj) else None
    if isinstance(obj, dict):
        return {k: _round(v, precision) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round(v, precision) for v in obj]
    if isinstance(obj, (np.floating,)):
        return _round(float(obj), precision)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _json(obj, precision: int) -> str:
    return json.dumps(_round(obj, precision), indent=2, sort_keys=True) + "\n"


def _table(name: str, header: list[str], rows, cfg: RunConfig) -> tuple[str, str]:
    """Render a table in the configured format; returns (filename, text)."""
    prec = cfg.output.precision
    if cfg.output.format == "csv":
        return f"{name}.csv", _csv(header, rows, prec)
    data = {"columns": header, "rows": [[float(v) for v in row] for row in rows]}
    return f"{name}.json", _json(data, prec)


def _write_all(out_dir: Path, files: dict[str, str]) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    for name, text in files.items():
        fd, tmp = tempfile.mkstemp(dir=out_dir, prefix=f".{name}.", suffix=".tmp")
        try:
            with os.fdopen(fd, "w", newline="\n") as fh:
                fh.write(text)
            os.replace(tmp, out_dir / name)
        except BaseException:
            Path(tmp).unlink(missing_ok=True)
            raise


# ------------------------------------------------------------------ commands


def _params_echo(cfg: RunConfig, p: DimensionlessParams) -> dict:
    report = validate_ranges(p)
    echo = {
        "input": {
            "dimensional": cfg.dimensional.to_dict() if cfg.dimensional else None,
            "dimensionless": cfg.dimensionless.to_dict() if cfg.dimensionless else None,
        },
        "derived": p.to_dict(),
        "equilibrium": equilibrium(p.K),
        "solver": asdict(cfg.solver),
        "range_warnings": [str(w) for w in report.warnings],
        "version": __version__,
    }
    if cfg.dimensional is not None:
        echo["time_unit_seconds"] = time_to_physical(1.0, cfg.dimensional)
    return echo


def cmd_solve(cfg: RunConfig) -> dict[str, str]:
    p = cfg.params()
    for w in validate_ranges(p).warnings:
        log.warning("%s", w)
    traj = solve(cfg.solver, p)
    n = traj.mesh.n
    header = ["t"] + [f"x_{j}" for j in range(1, n + 1)]
    rows = np.column_stack([traj.times, traj.states])
    avg = average_bound(traj)
    depth, width = depletion_metrics(traj)
    files = dict([
        _table("trajectory", header, rows, cfg),
        _table("average", ["t", "B_avg"], np.column_stack([traj.times, avg]), cfg),
        _table("depletion", ["t", "depth", "width"],
               np.column_stack([traj.times, depth, width]), cfg),
    ])
    echo = _params_echo(cfg, p)
    echo["nodes"] = traj.mesh.nodes.tolist()
    files["params.json"] = _json(echo, cfg.output.precision)
    return files


def cmd_converge(cfg: RunConfig, jobs: int = 1) -> dict[str, str]:
    if cfg.i_max is None:
        raise ConfigError("converge needs a 'convergence' block with i_max")
    p = cfg.params()
    report = convergence_study(cfg.solver, p, cfg.i_max, jobs=jobs)
    rows = [(i + 1, n, e) for i, (n, e) in enumerate(zip(report.mesh_sizes, report.errors))]
    prec = cfg.output.precision
    lines = ["i,N,error"] + [f"{i},{n},{_fmt(e, prec)}" for i, n, e in rows]
    fit = {
        "slope": report.slope,
        "intercept": report.intercept,
        "r_squared": report.r_squared,
        "reference_n": report.reference_n,
        "fit": "log10(error) = slope * log10(N) + intercept",
        "norm": "max over t of sqrt(dx * sum_j (B_ref - B_N)^2)",
        "monotone": report.monotone,
    }
    return {
        "convergence.csv": "\n".join(lines) + "\n",
        "fit.json": _json(fit, prec),
        "params.json": _json(_params_echo(cfg, p), prec),
    }


def _sweep_point(args):
    cfg, value = args
    sweep = cfg.sweep
    if sweep.axis == "K":
        p = replace(cfg.dimensionless, K=value)
        dim = None
    else:
        dim = replace(cfg.dimensional, **{sweep.axis: value})
        p = nondimensionalize(dim)
    traj = solve(cfg.solver, p)
    return p, dim, traj.times, average_bound(traj)


def cmd_sweep(cfg: RunConfig, jobs: int = 1) -> dict[str, str]:
    if cfg.sweep is None:
        raise ConfigError("sweep needs a 'sweep' block")
    sweep = cfg.sweep
    work = [(cfg, v) for v in sweep.values]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_sweep_point, work))
    else:
        results = [_sweep_point(w) for w in work]
    files = {}
    points = []
    for label, value, (p, dim, times, avg) in zip(sweep.labels, sweep.values, results):
        name, text = _table(f"average_{label}", ["t", "B_avg"], np.column_stack([times, avg]), cfg)
        files[name] = text
        eq = equilibrium(p.K)
        t90 = time_to_fraction(times, avg, 0.9 * eq)
        point = {
            "label": label,
            "value": value,
            "Da": p.Da,
            "K": p.K,
            "equilibrium": eq,
            "final_average": float(avg[-1]),
            "time_to_90pct": t90,
        }
        if dim is not None:
            point["time_to_90pct_seconds"] = None if t90 is None else time_to_physical(t90, dim)
            point["range_warnings"] = [str(w) for w in validate_ranges(p).warnings]
        points.append(point)
    summary = {"axis": sweep.axis, "points": points, "solver": asdict(cfg.solver)}
    files["sweep_summary.json"] = _json(summary, cfg.output.precision)
    return files


def cmd_oracle_check(cfg: RunConfig) -> tuple[dict[str, str], bool]:
    suites = cfg.oracle.get("suites", ["polylog", "kernel-integrals", "laplace-strip"])
    results = run_suites(suites, cfg.oracle)
    ok = all(r["passed"] for r in results.values())
    report = {"suites": results, "passed": ok}
    return {"oracle_report.json": _json(report, max(cfg.output.precision, 6))}, ok


# ------------------------------------------------------------------ entry point


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fetide",
        description="Diffusion-limited receptor binding on a FET gate: solver and checks.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, text in [
        ("solve", "integrate one configuration"),
        ("converge", "mesh-refinement study on N = 3^i"),
        ("sweep", "average bound fraction across a parameter sweep"),
        ("oracle-check", "closed forms against brute-force oracles"),
    ]:
        cmd = sub.add_parser(name, help=text)
        cmd.add_argument("config", help="YAML run configuration")
        cmd.add_argument("--jobs", type=int, default=1, help="worker processes for sweeps and studies")
        cmd.add_argument("--out", help="output directory (overrides the config and $%s)" % OUT_ENV)
    return parser


def _out_dir(args, cfg: RunConfig) -> Path:
    if args.out:
        return Path(args.out)
    if "directory" in (cfg.raw.get("output") or {}):
        return Path(cfg.output.directory)
    return Path(os.environ.get(OUT_ENV, cfg.output.directory))


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
    )
    if args.jobs < 1:
        parser.error("--jobs must be at least 1")
    try:
        cfg = load_config(args.config)
        ok = True
        if args.command == "solve":
            files = cmd_solve(cfg)
        elif args.command == "converge":
            files = cmd_converge(cfg, jobs=args.jobs)
        elif args.command == "sweep":
            files = cmd_sweep(cfg, jobs=args.jobs)
        else:
            files, ok = cmd_oracle_check(cfg)
    except ConfigError as exc:
        print(f"fetide: config error: {exc}", file=sys.stderr)
        return 2
    except (IntegrationError, np.linalg.LinAlgError) as exc:
        print(f"fetide: solver error: {exc}", file=sys.stderr)
        return 1
    out = _out_dir(args, cfg)
    _write_all(out, files)
    for name in sorted(files):
        log.info("wrote %s", out / name)
    if not ok:
        print("fetide: oracle check failed; see oracle_report.json", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
