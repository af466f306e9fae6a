"""Method-of-lines integration of the gate binding equation.

Collocating the hat expansion at the nodes gives, for every node ``j``,

    h_j' = (1 - h_j) (1 - sum_i M_ji h_i') - K h_j,

which is implicit in ``h'``.  Collecting the ``h'`` terms,

    (I + diag(1 - h) M) h' = (1 - h) - K h,

and since ``M`` is symmetric positive definite the system is similar to the
SPD matrix ``I + S M S`` with ``S = diag(sqrt(1 - h))``, which is factorised by
Cholesky at every right-hand-side evaluation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.integrate import solve_ivp
from scipy.linalg import cho_factor, cho_solve, lu_factor, lu_solve

from .kernel import KernelMatrix, Mesh, assemble_matrix
from .model import DimensionlessParams

__all__ = [
    "IntegrationError",
    "SolveConfig",
    "Trajectory",
    "rhs",
    "integrate",
    "integrate_fixed_implicit",
    "solve",
    "equilibrium",
    "well_mixed_solution",
]

ADAPTIVE = "adaptive-rk"
IMPLICIT_EULER = "implicit-euler"


class IntegrationError(RuntimeError):
    """The time integrator gave up; the message names where."""


@dataclass(frozen=True)
class SolveConfig:
    """Discretisation and integrator settings.

    ``output_times`` is either a count of uniformly spaced times on
    ``[0, t_end]`` (endpoints included) or an explicit increasing sequence
    starting at 0.
    """

    n: int
    t_end: float
    output_times: int | tuple[float, ...] = 151
    integrator: str = ADAPTIVE
    rk_method: str = "RK45"
    rel_tol: float = 1e-8
    abs_tol: float = 1e-10
    fixed_dt: float = 1e-2
    newton_tol: float = 1e-12
    newton_max_iter: int = 25

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError("n must be a positive integer")
        if not self.t_end > 0:
            raise ValueError("t_end must be positive")
        for name in ("rel_tol", "abs_tol", "fixed_dt", "newton_tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.integrator not in (ADAPTIVE, IMPLICIT_EULER):
            raise ValueError(f"unknown integrator {self.integrator!r}")
        if self.rk_method not in ("RK45", "DOP853", "RK23"):
            raise ValueError(f"unknown explicit Runge-Kutta pair {self.rk_method!r}")
        if not isinstance(self.output_times, int):
            object.__setattr__(self, "output_times", tuple(float(t) for t in self.output_times))
        self.times()  # validates

    def times(self) -> np.ndarray:
        if isinstance(self.output_times, int):
            if self.output_times < 2:
                raise ValueError("need at least two output times")
            return np.linspace(0.0, self.t_end, self.output_times)
        t = np.asarray(self.output_times, dtype=float)
        if t.size < 1 or t[0] != 0.0 or np.any(np.diff(t) <= 0) or t[-1] > self.t_end:
            raise ValueError("output times must increase from 0 and not pass t_end")
        return t


@dataclass(frozen=True)
class Trajectory:
    """Nodal bound fractions ``states[k, j] = h_j(times[k])``."""

    mesh: Mesh
    times: np.ndarray
    states: np.ndarray
    params: DimensionlessParams
    n_rhs: int = field(default=0, compare=False)

    @property
    def center(self) -> np.ndarray:
        """Value at the centre of the gate (mean of the two middle nodes for even n)."""
        n = self.mesh.n
        if n % 2:
            return self.states[:, n // 2]
        return 0.5 * (self.states[:, n // 2 - 1] + self.states[:, n // 2])


def equilibrium(K: float) -> float:
    """Uniform steady state ``1 / (1 + K)``."""
    if K < 0:
        raise ValueError("K must be nonnegative")
    return 1.0 / (1.0 + K)


def well_mixed_solution(t, K: float):
    """Exact solution for ``Da = 0``: ``(1 - exp(-(1 + K) t)) / (1 + K)``."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("t must be nonnegative")
    out = -np.expm1(-(1.0 + K) * t) / (1.0 + K)
    return float(out) if out.ndim == 0 else out


def rhs(h: np.ndarray, M, K: float) -> np.ndarray:
    """Resolve the implicit collocation system for ``h'`` at state ``h``."""
    Mv = M.values if isinstance(M, KernelMatrix) else np.asarray(M)
    h = np.asarray(h, dtype=float)
    free = 1.0 - h
    b = free - K * h
    if not np.any(Mv):
        return b
    if np.all(free > 1e-12):
        s = np.sqrt(free)
        A = s[:, None] * Mv * s[None, :]
        A[np.diag_indices_from(A)] += 1.0
        try:
            factor = cho_factor(A, lower=True, overwrite_a=True, check_finite=False)
            return s * cho_solve(factor, b / s, check_finite=False)
        except np.linalg.LinAlgError:
            pass
    A = free[:, None] * Mv
    A[np.diag_indices_from(A)] += 1.0
    lu, piv = lu_factor(A, check_finite=False)
    if np.any(np.abs(np.diag(lu)) < 1e-14 * np.abs(np.diag(lu)).max()):
        raise np.linalg.LinAlgError("collocation system is singular")
    return lu_solve((lu, piv), b, check_finite=False)


def _matrix_for(cfg: SolveConfig, p: DimensionlessParams) -> KernelMatrix:
    return assemble_matrix(Mesh(cfg.n), p.Da, p.l_s, p.epsilon)


def integrate(cfg: SolveConfig, p: DimensionlessParams, M: KernelMatrix | None = None) -> Trajectory:
    """Adaptive embedded Runge-Kutta integration from ``h = 0``."""
    M = M if M is not None else _matrix_for(cfg, p)
    times = cfg.times()
    K = p.K
    count = [0]

    def fun(_t, y):
        count[0] += 1
        return rhs(y, M, K)

    sol = solve_ivp(
        fun,
        (0.0, cfg.t_end),
        np.zeros(cfg.n),
        method=cfg.rk_method,
        t_eval=times,
        rtol=cfg.rel_tol,
        atol=cfg.abs_tol,
    )
    if sol.status != 0:
        t_fail = sol.t[-1] if sol.t.size else 0.0
        raise IntegrationError(f"adaptive integration failed near t={t_fail:.6g}: {sol.message}")
    states = np.ascontiguousarray(sol.y.T)
    states[0] = 0.0
    return Trajectory(mesh=M.mesh, times=times, states=states, params=p, n_rhs=count[0])


def integrate_fixed_implicit(
    cfg: SolveConfig, p: DimensionlessParams, M: KernelMatrix | None = None
) -> Trajectory:
    """Backward Euler with Newton iteration on the full nonlinear system.

    Each interval between output times is cut into equal substeps no longer
    than ``cfg.fixed_dt``, so output times are hit exactly.
    """
    M = M if M is not None else _matrix_for(cfg, p)
    Mv = M.values
    K = p.K
    n = cfg.n
    times = cfg.times()
    eye = np.eye(n)
    h = np.zeros(n)
    states = np.zeros((times.size, n))
    step = 0
    for k in range(1, times.size):
        span = times[k] - times[k - 1]
        n_sub = max(1, math.ceil(span / cfg.fixed_dt - 1e-9))
        dt = span / n_sub
        for _ in range(n_sub):
            step += 1
            h_old = h
            # explicit predictor keeps Newton inside its basin for large dt
            h_new = h_old + dt * rhs(h_old, M, K)
            for it in range(cfg.newton_max_iter):
                v = (h_new - h_old) / dt
                Mvel = Mv @ v
                free = 1.0 - h_new
                F = v + free * Mvel - free + K * h_new
                J = (eye + free[:, None] * Mv) / dt
                J[np.diag_indices_from(J)] += (1.0 + K) - Mvel
                delta = np.linalg.solve(J, -F)
                h_new = h_new + delta
                if np.max(np.abs(delta)) <= cfg.newton_tol * (1.0 + np.max(np.abs(h_new))):
                    break
            else:
                raise IntegrationError(
                    f"Newton iteration did not converge at implicit step {step} "
                    f"(t={times[k - 1]:.6g}..{times[k]:.6g})"
                )
            h = h_new
        states[k] = h
    return Trajectory(mesh=M.mesh, times=times, states=states, params=p)


def solve(cfg: SolveConfig, p: DimensionlessParams, M: KernelMatrix | None = None) -> Trajectory:
    """Dispatch on ``cfg.integrator``."""
    if cfg.integrator == IMPLICIT_EULER:
        return integrate_fixed_implicit(cfg, p, M)
    return integrate(cfg, p, M)


def nodes_symmetric_error(traj: Trajectory) -> float:
    """``max |h_j - h_{n+1-j}|`` over all output times."""
    return float(np.max(np.abs(traj.states - traj.states[:, ::-1])))


def residual(h: Sequence[float], hp: Sequence[float], M, K: float) -> np.ndarray:
    """Componentwise residual of the collocated equation at ``(h, h')``."""
    Mv = M.values if isinstance(M, KernelMatrix) else np.asarray(M)
    h = np.asarray(h, dtype=float)
    hp = np.asarray(hp, dtype=float)
    return hp - ((1.0 - h) * (1.0 - Mv @ hp) - K * h)
