import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fetide.analysis import (
    ConvergenceReport,
    average_bound,
    convergence_study,
    depletion_metrics,
    error_norm,
    fit_loglog,
    monotone_violation,
    restrict,
    time_to_fraction,
)
from fetide.kernel import Mesh
from fetide.model import DimensionlessParams
from fetide.solver import SolveConfig, Trajectory, integrate

P0 = DimensionlessParams(Da=0.0, K=1.0, l_s=1e-3, epsilon=1.0)


def traj_from(fn, n, times=(0.0, 1.0, 2.0)):
    """Trajectory whose state is ``fn(t, x)`` sampled on an n-node mesh."""
    mesh = Mesh(n)
    t = np.asarray(times, dtype=float)
    states = np.array([[fn(tk, x) for x in mesh.nodes] for tk in t])
    return Trajectory(mesh=mesh, times=t, states=states, params=P0)


@pytest.fixture(scope="module")
def fig4_traj():
    p = DimensionlessParams(Da=66.42, K=1.0, l_s=1e-3, epsilon=0.4)
    cfg = SolveConfig(n=27, t_end=150.0, output_times=[0.0, 0.1, 1.0, 10.0, 150.0])
    return integrate(cfg, p)


class TestAverage:
    @settings(max_examples=30, deadline=None)
    @given(c=st.floats(0.0, 1.0), n=st.integers(1, 60))
    def test_constant_profile(self, c, n):
        traj = traj_from(lambda t, x: c, n)
        np.testing.assert_allclose(average_bound(traj), c, rtol=1e-13, atol=1e-15)

    def test_linear_profile_averages_to_midpoint(self):
        traj = traj_from(lambda t, x: 0.3 + 0.2 * x, 9)
        np.testing.assert_allclose(average_bound(traj), 0.3, rtol=1e-14)


class TestErrorNorm:
    def test_identical(self):
        a = traj_from(lambda t, x: t * x * x, 27)
        assert error_norm(a, a) == 0.0

    @pytest.mark.parametrize("n", [3, 9, 27])
    def test_constant_offset(self, n):
        ref = traj_from(lambda t, x: 0.5, 81)
        c = 1e-3
        coarse = traj_from(lambda t, x: 0.5 + c, n)
        assert error_norm(coarse, ref, scaled=False) == pytest.approx(c * math.sqrt(n), rel=1e-9)
        assert error_norm(coarse, ref) == pytest.approx(c, rel=1e-9)

    def test_restrict_picks_shared_nodes(self):
        ref = traj_from(lambda t, x: x, 27)
        np.testing.assert_allclose(restrict(ref, 9)[0], Mesh(9).nodes, atol=1e-15)
        np.testing.assert_allclose(restrict(ref, 3)[0], Mesh(3).nodes, atol=1e-15)

    @pytest.mark.parametrize("n", [2, 4, 5, 6, 12])
    def test_not_nested(self, n):
        # 12 -> ratio 2 is even; the others do not divide
        ref = traj_from(lambda t, x: x, 24 if n == 12 else 27)
        with pytest.raises(ValueError, match="nested"):
            restrict(ref, n)

    def test_time_grids_must_match(self):
        a = traj_from(lambda t, x: 0.0, 3)
        b = traj_from(lambda t, x: 0.0, 9, times=(0.0, 1.0, 3.0))
        with pytest.raises(ValueError):
            error_norm(a, b)


class TestFit:
    def test_exact_power_law(self):
        sizes = [3, 9, 27, 81]
        errs = [2.0 * n**-1.25 for n in sizes]
        slope, icpt, r2 = fit_loglog(sizes, errs)
        assert slope == pytest.approx(-1.25, rel=1e-12)
        assert icpt == pytest.approx(math.log10(2.0), rel=1e-12)
        assert r2 == pytest.approx(1.0)

    def test_report_validation(self):
        with pytest.raises(ValueError):
            ConvergenceReport((3, 9), (1e-3, 0.0), 27, None, None, None)
        with pytest.raises(ValueError):
            ConvergenceReport((9, 3), (1e-3, 1e-4), 27, None, None, None)

    def test_two_levels_have_no_slope(self):
        cfg = SolveConfig(n=3, t_end=5.0, output_times=6)
        rep = convergence_study(cfg, DimensionlessParams(Da=66.42, K=1.0, l_s=1e-3, epsilon=1.0), 2)
        assert rep.mesh_sizes == (3,) and rep.reference_n == 9
        assert rep.slope is None and rep.r_squared is None
        assert rep.errors[0] > 0

    def test_small_study_decreases(self):
        cfg = SolveConfig(n=3, t_end=20.0, output_times=21)
        rep = convergence_study(cfg, DimensionlessParams(Da=66.42, K=1.0, l_s=1e-3, epsilon=1.0), 4)
        assert rep.monotone
        assert rep.slope < 0

    def test_bad_level(self):
        with pytest.raises(ValueError):
            convergence_study(SolveConfig(n=3, t_end=1.0), P0, 8)


class TestDepletion:
    def test_uniform_has_none(self):
        depth, width = depletion_metrics(traj_from(lambda t, x: 0.4, 27))
        assert not np.any(depth) and not np.any(width)

    def test_synthetic_dip(self):
        # V-shaped dip of depth 0.2: the half-depth level crosses at |x| = 0.25
        depth, width = depletion_metrics(traj_from(lambda t, x: 0.5 - 0.2 * (1 - 2 * abs(x)), 81))
        assert depth[0] == pytest.approx(0.2 * (1 - 1 / 81), rel=1e-12)
        assert width[0] == pytest.approx(0.5, abs=2 / 81)

    def test_dip_fills_in(self, fig4_traj):
        depth, width = depletion_metrics(fig4_traj)
        assert depth[1] > 0 and width[1] > 0
        assert depth[1] > depth[-1]
        assert np.all(fig4_traj.center[1:] < fig4_traj.states[1:, 0])

    def test_average_monotone(self, fig4_traj):
        assert monotone_violation(average_bound(fig4_traj)) == 0.0


def test_time_to_fraction():
    t = np.array([0.0, 1.0, 2.0])
    v = np.array([0.0, 0.5, 1.0])
    assert time_to_fraction(t, v, 0.75) == pytest.approx(1.5)
    assert time_to_fraction(t, v, 0.0) == 0.0
    assert time_to_fraction(t, v, 2.0) is None


def test_monotone_violation():
    assert monotone_violation([0.0, 0.2, 0.1, 0.3]) == pytest.approx(0.1)
    assert monotone_violation([1.0]) == 0.0
