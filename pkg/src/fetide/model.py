"""Dimensional and dimensionless parameter sets for the gate binding model.

Dimensional inputs use CGS units (cm, s, mol).  Time is measured in units of
the forward reaction time ``1 / (k_a * C_u)``; the gate coordinate is scaled so
that the biochemical gate occupies ``[-1/2, 1/2]``.

>>> dim = DimensionalParams(
...     diffusivity=1e-6, assoc_rate=1e12, dissoc_rate=1e-4,
...     inject_conc=1e-16, receptor_density=1.3284e-13,
...     well_height=0.2, well_length=0.5, gate_length=5e-4)
>>> round(nondimensionalize(dim).Da, 2)
66.42
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields

__all__ = [
    "DimensionalParams",
    "DimensionlessParams",
    "RangeWarning",
    "ValidationReport",
    "TABLE1_RANGES",
    "nondimensionalize",
    "validate_ranges",
    "time_to_physical",
]


def _require_positive(obj, names) -> None:
    for name in names:
        value = getattr(obj, name)
        if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
            raise ValueError(f"{name} must be a positive finite number, got {value!r}")


@dataclass(frozen=True)
class DimensionalParams:
    """Physical constants of the instrument and the binding chemistry.

    Attributes
    ----------
    diffusivity:
        Ligand diffusivity [cm^2/s].
    assoc_rate:
        Association rate constant [cm^3/(mol s)].
    dissoc_rate:
        Dissociation rate constant [1/s].
    inject_conc:
        Ligand concentration injected at the top of the well [mol/cm^3].
    receptor_density:
        Total surface receptor density on the gate [mol/cm^2].
    well_height, well_length:
        Solution-well dimensions [cm].
    gate_length:
        Length of the biochemical gate [cm]; must be shorter than the well.
    """

    diffusivity: float
    assoc_rate: float
    dissoc_rate: float
    inject_conc: float
    receptor_density: float
    well_height: float
    well_length: float
    gate_length: float

    def __post_init__(self):
        _require_positive(self, [f.name for f in fields(self)])
        if self.gate_length >= self.well_length:
            raise ValueError(
                f"gate_length ({self.gate_length}) must be smaller than "
                f"well_length ({self.well_length})"
            )

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class DimensionlessParams:
    """Dimensionless groups that control the reduced gate problem.

    Only ``Da``, ``K``, ``l_s`` and ``epsilon`` enter the integrodifferential
    equation.  The well-scale groups ``D_w``, ``Da_w`` and the gate-scale
    diffusion ratio ``D`` are carried for range validation and reporting; when
    the set is built directly (e.g. to pin figure parameters) they may be left
    as ``None``.
    """

    Da: float
    K: float
    l_s: float
    epsilon: float
    D_w: float | None = None
    Da_w: float | None = None
    D: float | None = None

    def __post_init__(self):
        for name in ("Da", "K"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value >= 0):
                raise ValueError(f"{name} must be a nonnegative finite number, got {value!r}")
        _require_positive(self, ["l_s", "epsilon"])
        _require_positive(self, [n for n in ("D_w", "Da_w", "D") if getattr(self, n) is not None])

    @property
    def strip_height(self) -> float:
        """Height of the boundary-layer strip in gate units, ``epsilon / l_s``."""
        return self.epsilon / self.l_s

    def to_dict(self) -> dict:
        return asdict(self)


def nondimensionalize(dim: DimensionalParams) -> DimensionlessParams:
    """Map physical constants to the dimensionless groups of the model."""
    forward_rate = dim.assoc_rate * dim.inject_conc
    return DimensionlessParams(
        Da=dim.assoc_rate * dim.receptor_density * dim.gate_length / dim.diffusivity,
        K=dim.dissoc_rate / forward_rate,
        l_s=dim.gate_length / dim.well_length,
        epsilon=dim.well_height / dim.well_length,
        D_w=dim.diffusivity / (dim.well_height**2 * forward_rate),
        Da_w=dim.well_height * dim.assoc_rate * dim.receptor_density / dim.diffusivity,
        D=dim.diffusivity / (dim.gate_length**2 * forward_rate),
    )


def time_to_physical(t, dim: DimensionalParams):
    """Convert dimensionless time to seconds.  Works on scalars and arrays."""
    if hasattr(t, "__len__"):
        import numpy as np

        t = np.asarray(t, dtype=float)
        if np.any(t < 0):
            raise ValueError("dimensionless time must be nonnegative")
    elif t < 0:
        raise ValueError("dimensionless time must be nonnegative")
    return t / (dim.assoc_rate * dim.inject_conc)


# Experimental regime of the instrument.  Bounds are inclusive.
TABLE1_RANGES: dict[str, tuple[float, float]] = {
    "D_w": (2.5e-2, 2.5e2),
    "D": (4e3, 4e7),
    "Da_w": (1.33e3, 2.66e3),
    "Da": (3.32, 66.42),
    "K": (1e-2, 1e6),
}

# Relative slack on the bounds; the tabulated endpoints are themselves rounded.
_RANGE_RTOL = 5e-3


@dataclass(frozen=True)
class RangeWarning:
    name: str
    value: float
    low: float
    high: float

    def __str__(self) -> str:
        return f"{self.name}={self.value:.6g} outside experimental range [{self.low:g}, {self.high:g}]"


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of :func:`validate_ranges`.  Never raises; inspect ``warnings``."""

    checked: tuple[str, ...]
    warnings: tuple[RangeWarning, ...]

    @property
    def ok(self) -> bool:
        return not self.warnings

    def flagged(self) -> set[str]:
        return {w.name for w in self.warnings}


def validate_ranges(p: DimensionlessParams) -> ValidationReport:
    """Flag groups that fall outside the instrument's experimental regime.

    Groups that are ``None`` (not derived from physical inputs) are skipped.
    """
    checked = []
    warnings = []
    for name, (low, high) in TABLE1_RANGES.items():
        value = getattr(p, name)
        if value is None:
            continue
        checked.append(name)
        if not (low * (1 - _RANGE_RTOL) <= value <= high * (1 + _RANGE_RTOL)):
            warnings.append(RangeWarning(name, value, low, high))
    return ValidationReport(tuple(checked), tuple(warnings))
