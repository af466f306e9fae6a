"""Oracle suites shared by ``fetide oracle-check`` and the acceptance tests.

Each suite returns a plain dict with the measured error, the tolerance it is
judged against and a ``passed`` flag.
"""

from __future__ import annotations

import math

import numpy as np

from .kernel import ZETA2, ZETA3, Mesh, hat_integral_lags, polylog
from .oracle import (
    StripProblem,
    hat_flux,
    hat_integral_quadrature,
    laplace_strip_solve,
    polylog_series,
)

__all__ = ["polylog_suite", "kernel_integrals_suite", "laplace_strip_suite", "run_suites"]

POLYLOG_TOL = 1e-12
KERNEL_TOL = 1e-8
STRIP_TOL = 0.02
# observed Richardson order accepted as "second order"
STRIP_ORDER_RANGE = (1.75, 2.25)


def polylog_suite(z_grid=(0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9)) -> dict:
    closed = {
        "Li2(1)": (polylog(2, 1.0), math.pi**2 / 6),
        "Li3(1)": (polylog(3, 1.0), ZETA3),
        "Li2(1/2)": (polylog(2, 0.5), math.pi**2 / 12 - math.log(2.0) ** 2 / 2),
    }
    closed_err = {k: abs(v - ref) / abs(ref) for k, (v, ref) in closed.items()}
    series_err = 0.0
    for s in (2, 3):
        for z in z_grid:
            ref = polylog_series(s, z, tol=1e-17)
            series_err = max(series_err, abs(polylog(s, z) - ref) / ref)
    worst = max(max(closed_err.values()), series_err)
    return {
        "closed_form_rel_err": closed_err,
        "series_max_rel_err": series_err,
        "max_rel_err": worst,
        "tolerance": POLYLOG_TOL,
        "passed": bool(worst <= POLYLOG_TOL),
        "zeta2_check": abs(ZETA2 - math.pi**2 / 6),
    }


def kernel_lag_errors(n: int, l_s: float, eps: float) -> np.ndarray:
    """Relative difference between closed form and quadrature for every lag of an n-node mesh."""
    mesh = Mesh(n)
    x = mesh.nodes
    closed = hat_integral_lags(n, l_s, eps)
    quad = np.array([hat_integral_quadrature(x[k], x[0], mesh.dx, l_s, eps) for k in range(n)])
    return np.abs(closed - quad) / np.abs(quad)


def kernel_integrals_suite(meshes=(3, 9, 27, 81), cases=((1e-3, 0.4), (0.25, 1.0))) -> dict:
    rows = []
    for l_s, eps in cases:
        for n in meshes:
            err = kernel_lag_errors(int(n), float(l_s), float(eps))
            rows.append({"n": int(n), "l_s": float(l_s), "epsilon": float(eps),
                         "max_rel_err": float(err.max())})
    worst = max(r["max_rel_err"] for r in rows)
    return {"cases": rows, "max_rel_err": worst, "tolerance": KERNEL_TOL,
            "passed": bool(worst <= KERNEL_TOL)}


def strip_center_value(a: float, x_extent: float, per_unit: int, hat_width: float) -> float:
    nx = int(round(2 * x_extent * per_unit)) + 1
    ny = int(round(a * per_unit))
    prob = StripProblem(a=a, x_extent=x_extent, nx=nx, ny=ny, flux_profile=hat_flux(0.0, hat_width))
    return float(laplace_strip_solve(prob)[nx // 2])


def laplace_strip_suite(a: float = 4.0, hat_width: float = 1.0 / 3.0,
                        resolutions=(24, 48, 96), x_extent: float | None = None) -> dict:
    """FD strip solution under a centred hat flux versus the convolution formula.

    ``resolutions`` are grid points per gate length; they must put grid lines on
    the hat's kinks (multiples of ``2 / hat_width``).
    """
    if x_extent is None:
        x_extent = 8.0 * max(1.0, a)
    ref = -2.0 / math.pi * hat_integral_quadrature(0.0, 0.0, hat_width, 1.0, a)
    values = [strip_center_value(a, x_extent, p, hat_width) for p in resolutions]
    rel = [abs(v - ref) / abs(ref) for v in values]
    d1 = abs(values[0] - values[1])
    d2 = abs(values[1] - values[2])
    order = math.log2(d1 / d2) if d2 > 0 else float("inf")
    wall = abs(strip_center_value(a, 2 * x_extent, resolutions[0], hat_width) - values[0])
    passed = (
        max(rel) <= STRIP_TOL
        and STRIP_ORDER_RANGE[0] <= order <= STRIP_ORDER_RANGE[1]
        and all(b < a_ for a_, b in zip(rel, rel[1:]))
        and wall < abs(values[-1] - ref)
    )
    return {
        "a": a,
        "x_extent": x_extent,
        "resolutions": list(resolutions),
        "convolution_center": ref,
        "fd_center": values,
        "rel_err": rel,
        "max_rel_err": max(rel),
        "richardson_order": order,
        "wall_effect": wall,
        "tolerance": STRIP_TOL,
        "order_range": list(STRIP_ORDER_RANGE),
        "passed": bool(passed),
    }


def run_suites(suites, options: dict | None = None) -> dict:
    options = options or {}
    out = {}
    for name in suites:
        if name == "polylog":
            out[name] = polylog_suite()
        elif name == "kernel-integrals":
            opts = options.get("kernel_integrals", {})
            out[name] = kernel_integrals_suite(
                meshes=tuple(opts.get("meshes", (3, 9, 27, 81))),
                cases=tuple(tuple(c) for c in opts.get("cases", ((1e-3, 0.4), (0.25, 1.0)))),
            )
        elif name == "laplace-strip":
            opts = options.get("laplace_strip", {})
            out[name] = laplace_strip_suite(
                a=float(opts.get("a", 4.0)),
                hat_width=float(opts.get("hat_width", 1.0 / 3.0)),
                resolutions=tuple(int(r) for r in opts.get("resolutions", (24, 48, 96))),
            )
        else:
            raise ValueError(f"unknown oracle suite {name!r}")
    return out
