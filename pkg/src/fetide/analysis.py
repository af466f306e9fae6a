"""Observables and the mesh-refinement study."""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .model import DimensionlessParams
from .solver import SolveConfig, Trajectory, solve

__all__ = [
    "ConvergenceReport",
    "average_bound",
    "error_norm",
    "restrict",
    "convergence_study",
    "depletion_metrics",
    "time_to_fraction",
    "fit_loglog",
]

log = logging.getLogger(__name__)


def average_bound(traj: Trajectory) -> np.ndarray:
    """Gate-averaged bound fraction, midpoint rule on the nodal values."""
    return traj.mesh.dx * traj.states.sum(axis=1)


def restrict(ref: Trajectory, n_coarse: int) -> np.ndarray:
    """Reference states sampled at the nodes of a coarser nested mesh.

    Nesting needs ``n_ref = r * n_coarse`` with ``r`` odd; then every coarse
    node is also a reference node.
    """
    n_ref = ref.mesh.n
    if n_ref % n_coarse or (n_ref // n_coarse) % 2 == 0:
        raise ValueError(
            f"mesh of {n_coarse} nodes is not nested in the {n_ref}-node reference "
            "(need an odd refinement ratio, e.g. powers of 3)"
        )
    ratio = n_ref // n_coarse
    j = np.arange(1, n_coarse + 1)
    idx = (ratio * (2 * j - 1) - 1) // 2
    return ref.states[:, idx]


def error_norm(coarse: Trajectory, ref: Trajectory, scaled: bool = True) -> float:
    """``max_t || B_ref - B_coarse ||_2`` over the coarse nodes.

    With ``scaled`` (the default) the nodal l2 sum carries the cell width,
    ``sqrt(dx * sum_j e_j^2)``, i.e. the midpoint-rule L2 norm on the gate, so
    that pointwise first-order errors show up as slope -1 against ``N``.  With
    ``scaled=False`` the plain vector 2-norm is returned, which grows like
    ``sqrt(N)`` for the same pointwise error.
    """
    if coarse.times.shape != ref.times.shape or not np.allclose(
        coarse.times, ref.times, rtol=0, atol=1e-12
    ):
        raise ValueError("trajectories must share their output times")
    diff = restrict(ref, coarse.mesh.n) - coarse.states
    sq = np.sum(diff * diff, axis=1)
    if scaled:
        sq = sq * coarse.mesh.dx
    return float(np.max(np.sqrt(sq)))


def fit_loglog(mesh_sizes, errors) -> tuple[float, float, float]:
    """Least-squares line ``log10(error) = slope * log10(N) + intercept`` and its R^2."""
    x = np.log10(np.asarray(mesh_sizes, dtype=float))
    y = np.log10(np.asarray(errors, dtype=float))
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
    return float(slope), float(intercept), r2


@dataclass(frozen=True)
class ConvergenceReport:
    mesh_sizes: tuple[int, ...]
    errors: tuple[float, ...]
    reference_n: int
    slope: float | None
    intercept: float | None
    r_squared: float | None

    def __post_init__(self):
        if any(e <= 0 for e in self.errors):
            raise ValueError("convergence errors must be strictly positive")
        if any(b <= a for a, b in zip(self.mesh_sizes, self.mesh_sizes[1:])):
            raise ValueError("mesh sizes must increase")

    @property
    def monotone(self) -> bool:
        return all(b < a for a, b in zip(self.errors, self.errors[1:]))

    def to_dict(self) -> dict:
        return {
            "mesh_sizes": list(self.mesh_sizes),
            "errors": list(self.errors),
            "reference_n": self.reference_n,
            "slope": self.slope,
            "intercept": self.intercept,
            "r_squared": self.r_squared,
        }


def _solve_job(args):
    cfg, p = args
    return solve(cfg, p)


def convergence_study(
    base_cfg: SolveConfig, p: DimensionlessParams, i_max: int, jobs: int = 1
) -> ConvergenceReport:
    """Self-convergence on meshes ``3^1 .. 3^(i_max-1)`` against ``3^i_max``."""
    if not 2 <= i_max <= 7:
        raise ValueError("i_max must lie in 2..7")
    sizes = [3**i for i in range(1, i_max + 1)]
    cfgs = [replace(base_cfg, n=n) for n in sizes]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            trajs = list(pool.map(_solve_job, [(c, p) for c in cfgs]))
    else:
        trajs = []
        for c in cfgs:
            log.info("convergence solve n=%d", c.n)
            trajs.append(solve(c, p))
    ref = trajs[-1]
    errors = [error_norm(t, ref) for t in trajs[:-1]]
    coarse = sizes[:-1]
    if len(errors) >= 2:
        slope, intercept, r2 = fit_loglog(coarse, errors)
    else:
        slope = intercept = r2 = None
    return ConvergenceReport(tuple(coarse), tuple(errors), sizes[-1], slope, intercept, r2)


def depletion_metrics(traj: Trajectory) -> tuple[np.ndarray, np.ndarray]:
    """Depth and width of the central dip in the bound profile at each output time.

    depth = max_j h_j - h_centre.  width = length of the run of nodes around
    the centre lying strictly below the midpoint ``(h_edge + h_centre) / 2``,
    where ``h_edge`` is the smaller of the two edge values.
    """
    states = traj.states
    n = traj.mesh.n
    dx = traj.mesh.dx
    centre = traj.center
    depth = states.max(axis=1) - centre
    width = np.zeros(states.shape[0])
    lo_mid, hi_mid = (n - 1) // 2, n // 2
    for k, row in enumerate(states):
        edge = min(row[0], row[-1])
        thresh = 0.5 * (edge + centre[k])
        below = row < thresh
        if not (below[lo_mid] and below[hi_mid]):
            continue
        left = lo_mid
        while left > 0 and below[left - 1]:
            left -= 1
        right = hi_mid
        while right < n - 1 and below[right + 1]:
            right += 1
        width[k] = (right - left + 1) * dx
    return depth, width


def time_to_fraction(times: np.ndarray, values: np.ndarray, target: float) -> float | None:
    """First time ``values`` reaches ``target`` (linear interpolation), else None."""
    values = np.asarray(values)
    hit = np.nonzero(values >= target)[0]
    if hit.size == 0:
        return None
    k = int(hit[0])
    if k == 0:
        return float(times[0])
    t0, t1 = times[k - 1], times[k]
    v0, v1 = values[k - 1], values[k]
    return float(t0 + (target - v0) * (t1 - t0) / (v1 - v0))


def monotone_violation(series: np.ndarray) -> float:
    """Largest decrease between consecutive samples (0 for a non-decreasing series)."""
    d = np.diff(np.asarray(series))
    return float(max(0.0, -d.min())) if d.size else 0.0

