import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fetide.checks import STRIP_ORDER_RANGE, laplace_strip_suite
from fetide.kernel import Mesh
from fetide.oracle import (
    QuadratureError,
    StripProblem,
    adaptive_gauss_kronrod,
    convolution_direct,
    hat_flux,
    hat_integral_quadrature,
    laplace_strip_solve,
    polylog_series,
)


class TestSeries:
    def test_closed_form(self):
        ref = math.pi**2 / 12 - math.log(2) ** 2 / 2
        assert polylog_series(2, 0.5, 1e-17) == pytest.approx(ref, rel=1e-15)

    @pytest.mark.parametrize("z", [-0.1, 0.9995, 1.0])
    def test_refuses_outside_cheap_range(self, z):
        with pytest.raises(ValueError):
            polylog_series(2, z)


class TestQuadrature:
    def test_sqrt(self):
        assert adaptive_gauss_kronrod(np.sqrt, [0.0, 1.0]) == pytest.approx(2 / 3, rel=1e-13)

    def test_log_endpoint_singularity(self):
        f = lambda x: np.log(x)
        assert adaptive_gauss_kronrod(f, [0.0, 0.5, 1.0]) == pytest.approx(-1.0, rel=1e-12)

    def test_subdivision_limit(self):
        with pytest.raises(QuadratureError, match="subdivision limit"):
            adaptive_gauss_kronrod(lambda x: np.log(np.abs(x - 0.3)), [0.0, 1.0], max_panels=4)

    def test_frozen_mpmath_value(self):
        m = Mesh(3)
        v = hat_integral_quadrature(m.nodes[0], m.nodes[0], m.dx, 1e-3, 0.4)
        assert v == pytest.approx(0.793732374796340529426310936118, rel=1e-12)

    def test_narrow_hat_is_a_point_mass(self):
        dx = 1e-4
        c = math.pi * 1e-3 / 0.8
        v = hat_integral_quadrature(0.5, 0.0, dx, 1e-3, 0.4)
        assert v == pytest.approx(dx / 2 * math.atanh(math.exp(-0.5 * c)), rel=1e-7)


class TestConvolution:
    def test_linear(self):
        mesh = Mesh(3)
        xs = [0.0, 0.4, 1.7]
        a = convolution_direct([1.0, 0.0, 2.0], mesh, 1e-3, 0.4, xs)
        b = convolution_direct([0.0, 3.0, -1.0], mesh, 1e-3, 0.4, xs)
        ab = convolution_direct([1.0, 3.0, 1.0], mesh, 1e-3, 0.4, xs)
        np.testing.assert_allclose(a + b, ab, rtol=1e-12)

    def test_sign_and_decay(self):
        mesh = Mesh(3)
        out = convolution_direct([1.0, 1.0, 1.0], mesh, 1e-3, 0.4, [0.0, 2.0, 20.0])
        assert np.all(out < 0)
        assert abs(out[0]) > abs(out[1]) > abs(out[2])

    def test_weight_count(self):
        with pytest.raises(ValueError):
            convolution_direct([1.0], Mesh(3), 1e-3, 0.4, [0.0])


class TestStrip:
    def _prob(self, g, nx=97, a=2.0):
        return StripProblem(a=a, x_extent=4.0, nx=nx, ny=24, flux_profile=g)

    def test_zero_flux(self):
        out = laplace_strip_solve(self._prob(lambda x: np.zeros_like(x)))
        assert not np.any(out)

    def test_even_flux_gives_even_solution(self):
        out = laplace_strip_solve(self._prob(hat_flux(0.0, 0.5)))
        np.testing.assert_allclose(out, out[::-1], atol=1e-14)
        assert np.argmin(out) == out.size // 2

    def test_linear_in_flux(self):
        a = laplace_strip_solve(self._prob(hat_flux(0.5, 0.5)))
        b = laplace_strip_solve(self._prob(hat_flux(-0.5, 0.5)))
        both = laplace_strip_solve(self._prob(lambda x: hat_flux(0.5, 0.5)(x) + 2 * hat_flux(-0.5, 0.5)(x)))
        np.testing.assert_allclose(a + 2 * b, both, rtol=1e-12, atol=1e-15)

    def test_uniform_flux_is_linear_profile(self):
        # dC/dy = 1 on the bottom, C = 0 on top: C(0) = -a exactly
        out = laplace_strip_solve(self._prob(lambda x: np.ones_like(x), a=2.0))
        np.testing.assert_allclose(out, -2.0, rtol=1e-12)

    @pytest.mark.parametrize("kwargs", [
        dict(a=0.0), dict(x_extent=0.4), dict(nx=2), dict(ny=2),
    ])
    def test_validation(self, kwargs):
        base = dict(a=1.0, x_extent=2.0, nx=9, ny=9, flux_profile=hat_flux(0.0, 1.0))
        with pytest.raises(ValueError):
            StripProblem(**(base | kwargs))

    def test_flux_shape_checked(self):
        prob = StripProblem(1.0, 2.0, 9, 9, lambda x: np.ones(3))
        with pytest.raises(ValueError, match="one value per grid column"):
            laplace_strip_solve(prob)

    def test_second_order_against_convolution(self):
        rep = laplace_strip_suite()
        assert rep["passed"]
        assert STRIP_ORDER_RANGE[0] <= rep["richardson_order"] <= STRIP_ORDER_RANGE[1]
        assert rep["wall_effect"] < min(abs(v - rep["convolution_center"]) for v in rep["fd_center"])

    @settings(max_examples=15, deadline=None)
    @given(shift=st.floats(-1.0, 1.0))
    def test_translation(self, shift):
        # whole-cell shifts of the flux shift the solution, up to wall images
        # that decay like exp(-pi d / 2a) over the distance d to the walls
        nx = 641
        prob = StripProblem(1.0, 32.0, nx, 10, hat_flux(0.0, 1.0))
        cells = int(round(shift / prob.dx))
        moved = StripProblem(1.0, 32.0, nx, 10, hat_flux(cells * prob.dx, 1.0))
        a = laplace_strip_solve(prob)
        b = laplace_strip_solve(moved)
        mid = slice(280, 361)
        np.testing.assert_allclose(np.roll(a, cells)[mid], b[mid], atol=1e-12)
