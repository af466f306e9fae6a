"""The eight acceptance criteria, each at its stated tolerance.

Every test prints a ``criterion k PASS|FAIL`` line; the lines are repeated in
the pytest terminal summary.  The refinement study takes a few minutes and is
marked ``slow`` (deselect with ``-m "not slow"``).
"""

import time
from dataclasses import replace
from pathlib import Path

import numpy as np
import pytest

from fetide.analysis import average_bound, convergence_study
from fetide.checks import (
    KERNEL_TOL,
    POLYLOG_TOL,
    kernel_integrals_suite,
    laplace_strip_suite,
    polylog_suite,
)
from fetide.cli import cmd_solve, main
from fetide.config import load_config
from fetide.kernel import Mesh, assemble_matrix
from fetide.model import DimensionlessParams, nondimensionalize
from fetide.solver import SolveConfig, equilibrium, integrate, nodes_symmetric_error, well_mixed_solution

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


@pytest.mark.slow
def test_convergence_slope(verdict):
    cfg = load_config(CONFIGS / "fig3_convergence.yaml")
    p = cfg.params()
    assert (p.Da, p.K, p.l_s, p.epsilon) == (66.42, 1.0, 1e-3, 1.0)
    assert cfg.i_max == 7 and cfg.solver.t_end == 150.0
    t0 = time.perf_counter()
    rep = convergence_study(cfg.solver, p, cfg.i_max)
    elapsed = time.perf_counter() - t0
    ok = (-1.35 <= rep.slope <= -0.75 and rep.r_squared >= 0.99
          and rep.mesh_sizes == (3, 9, 27, 81, 243, 729) and rep.reference_n == 2187)
    verdict(1, "refinement slope", ok,
            f"slope={rep.slope:.4f} in [-1.35,-0.75], R2={rep.r_squared:.4f} >= 0.99, {elapsed:.0f}s")


def test_equilibrium_plateaus(verdict):
    t0 = time.perf_counter()
    worst = 0.0
    parts = []
    for name in ("fig5a_sweep.yaml", "fig5b_sweep.yaml"):
        cfg = load_config(CONFIGS / name)
        base = cfg.params()
        for value in cfg.sweep.values:
            if cfg.sweep.axis == "K":
                p = DimensionlessParams(Da=base.Da, K=value, l_s=base.l_s, epsilon=base.epsilon)
            else:
                p = nondimensionalize(replace(cfg.dimensional, **{cfg.sweep.axis: value}))
            final = average_bound(integrate(cfg.solver, p))[-1]
            rel = abs(final - equilibrium(p.K)) / equilibrium(p.K)
            worst = max(worst, rel)
            parts.append(f"K={p.K:.3g}:{rel:.1e}")
    elapsed = time.perf_counter() - t0
    verdict(2, "equilibrium plateaus", worst <= 0.02,
            f"max rel {worst:.2e} <= 2e-2 ({', '.join(parts)}), {elapsed:.0f}s")


def test_well_mixed_limit(verdict):
    worst = 0.0
    ok = True
    for K in (0.17, 1.0, 10.0):
        cfg = SolveConfig(n=9, t_end=20.0, output_times=201)
        traj = integrate(cfg, DimensionlessParams(Da=0.0, K=K, l_s=1e-3, epsilon=0.4))
        err = np.max(np.abs(traj.states - well_mixed_solution(traj.times, K)[:, None]))
        worst = max(worst, err)
        ok &= err <= 10 * cfg.rel_tol
    verdict(3, "well-mixed limit", ok, f"sup err {worst:.2e} <= 10*rel_tol = 1e-7")


def test_kernel_closed_form(verdict):
    rep = kernel_integrals_suite(meshes=(3, 9, 27, 81), cases=((1e-3, 0.4), (0.25, 1.0)))
    verdict(4, "kernel integrals vs quadrature", rep["max_rel_err"] <= 1e-8 and KERNEL_TOL == 1e-8,
            f"max rel {rep['max_rel_err']:.2e} <= 1e-8 over {len(rep['cases'])} mesh/parameter cases")


def test_residue_reduction(verdict):
    rep = laplace_strip_suite(a=4.0)
    rel = rep["rel_err"]
    ok = (rep["max_rel_err"] <= 0.02 and 1.75 <= rep["richardson_order"] <= 2.25
          and rel[0] > rel[1] > rel[2])
    verdict(5, "strip Laplace vs convolution", ok,
            f"centre rel errs {', '.join(f'{e:.1e}' for e in rel)} <= 2e-2, "
            f"order {rep['richardson_order']:.2f}")


def test_polylog(verdict):
    rep = polylog_suite(z_grid=tuple(k / 10 for k in range(1, 10)))
    closed = max(rep["closed_form_rel_err"].values())
    ok = closed <= 1e-12 and rep["series_max_rel_err"] <= 1e-12 and POLYLOG_TOL == 1e-12
    verdict(6, "polylogarithms", ok,
            f"closed forms {closed:.1e}, series {rep['series_max_rel_err']:.1e}, both <= 1e-12")


def test_structure(verdict):
    pd = all(assemble_matrix(Mesh(n), 66.42, 1e-3, 0.4).is_positive_definite()
             for n in (3, 9, 27, 81, 243, 729))
    toeplitz = True
    for n in (3, 9, 27, 81):
        V = assemble_matrix(Mesh(n), 66.42, 1e-3, 0.4).values
        toeplitz &= np.array_equal(V, V.T) and all(np.all(np.diagonal(V, k) == V[0, k]) for k in range(n))
    cfg = SolveConfig(n=81, t_end=5.0, output_times=[0.0, 0.01, 0.05, 0.1, 0.5, 1.0, 5.0])
    traj = integrate(cfg, DimensionlessParams(Da=66.42, K=1.0, l_s=1e-3, epsilon=0.4))
    sym = nodes_symmetric_error(traj)
    dip = bool(np.all(traj.center[1:] < traj.states[1:, 0]))
    ok = pd and toeplitz and sym <= 10 * cfg.rel_tol and dip
    verdict(7, "structure", ok,
            f"SPD Toeplitz={pd and toeplitz}, symmetry err {sym:.1e} <= 1e-7, centre<edge early={dip}")


def test_determinism(verdict, tmp_path):
    config = CONFIGS / "fig4_solve.yaml"
    cfg = load_config(config)
    in_memory = cmd_solve(cfg) == cmd_solve(cfg)
    runs = []
    for tag in ("a", "b"):
        assert main(["solve", str(config), "--out", str(tmp_path / tag)]) == 0
        runs.append({f.name: f.read_bytes() for f in sorted((tmp_path / tag).iterdir())})
    same = in_memory and runs[0] == runs[1] and len(runs[0]) == 4
    size = sum(len(b) for b in runs[0].values())
    verdict(8, "determinism", same, f"{len(runs[0])} files, {size} bytes, byte-identical={same}")
