"""Run configuration files.

A run file is YAML with one parameter block (``dimensional`` or
``dimensionless``), a ``solver`` block mirroring :class:`SolveConfig`, an
``output`` block, and the optional task blocks ``convergence``, ``sweep`` and
``oracle``::

    dimensionless: {Da: 66.42, K: 1.0, l_s: 1.0e-3, epsilon: 0.4}
    solver: {n: 81, t_end: 150, output_times: 151}
    output: {directory: out/fig4, format: csv, precision: 10}
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import yaml

from .model import DimensionalParams, DimensionlessParams, nondimensionalize
from .solver import SolveConfig

__all__ = ["ConfigError", "OutputSpec", "RunConfig", "SweepSpec", "load_config", "parse_config"]


class ConfigError(ValueError):
    """Invalid run configuration.  ``str()`` names the offending field or line."""


_SWEEP_AXES = ("assoc_rate", "inject_conc", "K")
_SUITES = ("polylog", "kernel-integrals", "laplace-strip")


@dataclass(frozen=True)
class OutputSpec:
    directory: str = "out"
    format: str = "csv"
    precision: int = 10


@dataclass(frozen=True)
class SweepSpec:
    axis: str
    values: tuple[float, ...]
    labels: tuple[str, ...]


@dataclass(frozen=True)
class RunConfig:
    solver: SolveConfig
    output: OutputSpec
    dimensional: DimensionalParams | None = None
    dimensionless: DimensionlessParams | None = None
    i_max: int | None = None
    sweep: SweepSpec | None = None
    oracle: dict[str, Any] = field(default_factory=dict)
    raw: dict[str, Any] = field(default_factory=dict, repr=False, compare=False)

    def params(self) -> DimensionlessParams:
        if self.dimensionless is not None:
            return self.dimensionless
        return nondimensionalize(self.dimensional)


def _number(value, where: str, integer: bool = False):
    if isinstance(value, bool):
        raise ConfigError(f"{where}: expected a number, got {value!r}")
    try:
        num = float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{where}: expected a number, got {value!r}") from None
    if integer:
        if num != int(num):
            raise ConfigError(f"{where}: expected an integer, got {value!r}")
        return int(num)
    return num


def _block(raw: dict, name: str, required: bool = False) -> dict | None:
    block = raw.get(name)
    if block is None:
        if required:
            raise ConfigError(f"missing required block '{name}'")
        return None
    if not isinstance(block, dict):
        raise ConfigError(f"'{name}' must be a mapping of key: value pairs")
    return block


def _typed(cls, block: dict, where: str, converters: dict):
    known = {f.name for f in dataclasses.fields(cls)}
    unknown = set(block) - known
    if unknown:
        raise ConfigError(f"{where}: unknown field(s) {', '.join(sorted(unknown))}")
    kwargs = {}
    for key, value in block.items():
        conv = converters.get(key)
        kwargs[key] = conv(value, f"{where}.{key}") if conv else value
    try:
        return cls(**kwargs)
    except TypeError as exc:
        raise ConfigError(f"{where}: {exc}") from None
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from None


def _output_times(value, where):
    if isinstance(value, list):
        return tuple(_number(v, f"{where}[{i}]") for i, v in enumerate(value))
    return _number(value, where, integer=True)


def parse_config(raw: Any) -> RunConfig:
    """Validate an already-loaded mapping into a :class:`RunConfig`."""
    if not isinstance(raw, dict):
        raise ConfigError("top level of the config must be a mapping")
    allowed = {"dimensional", "dimensionless", "solver", "output", "convergence", "sweep", "oracle"}
    unknown = set(raw) - allowed
    if unknown:
        raise ConfigError(f"unknown top-level block(s): {', '.join(sorted(unknown))}")

    dim_block = _block(raw, "dimensional")
    nondim_block = _block(raw, "dimensionless")
    if (dim_block is None) == (nondim_block is None) and "oracle" not in raw:
        raise ConfigError("exactly one of 'dimensional' or 'dimensionless' must be given")
    if dim_block is not None and nondim_block is not None:
        raise ConfigError("'dimensional' and 'dimensionless' blocks are mutually exclusive")

    num = {f.name: _number for f in dataclasses.fields(DimensionalParams)}
    dimensional = _typed(DimensionalParams, dim_block, "dimensional", num) if dim_block else None
    num = {f.name: _number for f in dataclasses.fields(DimensionlessParams)}
    dimensionless = (
        _typed(DimensionlessParams, nondim_block, "dimensionless", num) if nondim_block else None
    )

    solver_block = _block(raw, "solver") or {}
    if "oracle" not in raw or solver_block:
        if "n" not in solver_block or "t_end" not in solver_block:
            raise ConfigError("solver: fields 'n' and 't_end' are required")
        conv = {
            "n": lambda v, w: _number(v, w, integer=True),
            "t_end": _number,
            "output_times": _output_times,
            "rel_tol": _number,
            "abs_tol": _number,
            "fixed_dt": _number,
            "newton_tol": _number,
            "newton_max_iter": lambda v, w: _number(v, w, integer=True),
        }
        solver = _typed(SolveConfig, solver_block, "solver", conv)
    else:
        solver = SolveConfig(n=1, t_end=1.0)

    out_block = _block(raw, "output") or {}
    output = _typed(
        OutputSpec, out_block, "output",
        {"precision": lambda v, w: _number(v, w, integer=True), "directory": lambda v, w: str(v)},
    )
    if output.format not in ("csv", "json"):
        raise ConfigError(f"output.format: must be 'csv' or 'json', got {output.format!r}")
    if output.precision < 6:
        raise ConfigError("output.precision: must be at least 6 digits")

    i_max = None
    conv_block = _block(raw, "convergence")
    if conv_block is not None:
        if set(conv_block) - {"i_max"}:
            raise ConfigError("convergence: only 'i_max' is accepted")
        i_max = _number(conv_block.get("i_max", 7), "convergence.i_max", integer=True)
        if not 2 <= i_max <= 7:
            raise ConfigError("convergence.i_max: must lie in 2..7")

    sweep = None
    sweep_block = _block(raw, "sweep")
    if sweep_block is not None:
        if set(sweep_block) - {"axis", "values", "labels"}:
            raise ConfigError("sweep: accepted fields are axis, values, labels")
        axis = sweep_block.get("axis")
        if axis not in _SWEEP_AXES:
            raise ConfigError(f"sweep.axis: must be one of {', '.join(_SWEEP_AXES)}")
        values = sweep_block.get("values")
        if not isinstance(values, list) or not values:
            raise ConfigError("sweep.values: must be a non-empty list")
        values = tuple(_number(v, f"sweep.values[{i}]") for i, v in enumerate(values))
        labels = sweep_block.get("labels")
        if labels is None:
            labels = [f"{axis}_{v:.6g}" for v in values]
        if not isinstance(labels, list) or len(labels) != len(values):
            raise ConfigError("sweep.labels: must list one label per value")
        labels = tuple(str(s) for s in labels)
        if len(set(labels)) != len(labels):
            raise ConfigError("sweep.labels: labels must be unique")
        if axis == "K" and dimensionless is None:
            raise ConfigError("sweep.axis 'K' needs a 'dimensionless' base block")
        if axis != "K" and dimensional is None:
            raise ConfigError(f"sweep.axis '{axis}' needs a 'dimensional' base block")
        sweep = SweepSpec(axis, values, labels)

    oracle = _block(raw, "oracle") or {}
    if oracle:
        suites = oracle.get("suites", list(_SUITES))
        if not isinstance(suites, list) or not suites or set(suites) - set(_SUITES):
            raise ConfigError(f"oracle.suites: choose from {', '.join(_SUITES)}")

    return RunConfig(
        solver=solver, output=output, dimensional=dimensional, dimensionless=dimensionless,
        i_max=i_max, sweep=sweep, oracle=dict(oracle), raw=raw,
    )


def load_config(path: str | Path) -> RunConfig:
    """Read and validate a YAML run file."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f"line {mark.line + 1}, column {mark.column + 1}" if mark else "unknown position"
        raise ConfigError(f"{path}: YAML syntax error at {where}") from None
    return parse_config(raw)
