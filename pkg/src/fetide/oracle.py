"""Brute-force references for the closed forms in :mod:`fetide.kernel`.

Nothing here shares code with the closed forms it checks:

* :func:`polylog_series` sums the defining series term by term;
* :func:`hat_integral_quadrature` integrates the kernel-hat product with an
  adaptive Gauss-Kronrod scheme whose panels are split at the singularity;
* :func:`laplace_strip_solve` solves the strip problem that the convolution
  kernel is the Green's function of, by second-order finite differences, so
  the kernel itself can be checked rather than assumed.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.fft import dct, idct

from .kernel import Mesh

__all__ = [
    "QuadratureError",
    "StripProblem",
    "polylog_series",
    "adaptive_gauss_kronrod",
    "hat_integral_quadrature",
    "convolution_direct",
    "laplace_strip_solve",
    "hat_flux",
]


Z_SERIES_MAX = 0.999


class QuadratureError(RuntimeError):
    pass


def polylog_series(s: int, z: float, tol: float = 1e-16) -> float:
    """Naive ``sum_k z^k / k^s`` with compensated summation.

    Stops once the geometric bound ``term * z / (1 - z)`` on the remainder
    drops below ``tol`` relative to the sum.  Refused for ``z > 0.999``: past
    that the term count runs into the tens of thousands and the oracle stops
    being cheap.
    """
    if not 0.0 <= z <= Z_SERIES_MAX:
        raise ValueError(f"naive polylog series needs 0 <= z <= {Z_SERIES_MAX}")
    total = 0.0
    comp = 0.0
    zk = z
    k = 1
    while True:
        term = zk / k**s
        y = term - comp
        t = total + y
        comp = (t - total) - y
        total = t
        if term * z / (1.0 - z) <= tol * total:
            return total
        k += 1
        zk *= z


# 7-point Gauss / 15-point Kronrod nodes and weights on [-1, 1].
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])
_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
_KWEIGHTS = np.concatenate([_WGK[:-1], _WGK[::-1]])
# Gauss nodes are the odd-indexed Kronrod nodes
_GWEIGHTS = np.zeros(15)
_GWEIGHTS[[1, 3, 5, 13, 11, 9]] = np.concatenate([_WG[:3], _WG[:3]])
_GWEIGHTS[7] = _WG[3]


def _gk15(f, a: float, b: float) -> tuple[float, float]:
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    y = f(mid + half * _NODES)
    k = half * float(_KWEIGHTS @ y)
    g = half * float(_GWEIGHTS @ y)
    return k, abs(k - g)


def adaptive_gauss_kronrod(
    f: Callable[[np.ndarray], np.ndarray],
    breakpoints: Sequence[float],
    abs_tol: float = 1e-15,
    rel_tol: float = 1e-13,
    max_panels: int = 20000,
) -> float:
    """Globally adaptive G7-K15 quadrature over consecutive breakpoint panels.

    ``f`` must accept a vector of abscissae.  Singularities must sit on
    breakpoints; the worst panel is bisected until the summed error estimate
    meets ``max(abs_tol, rel_tol * |I|)``.
    """
    pts = sorted(set(float(p) for p in breakpoints))
    heap: list[tuple[float, float, float, float]] = []
    total = 0.0
    err = 0.0
    for a, b in zip(pts[:-1], pts[1:]):
        val, e = _gk15(f, a, b)
        heapq.heappush(heap, (-e, a, b, val))
        total += val
        err += e
    panels = len(heap)
    while err > max(abs_tol, rel_tol * abs(total)):
        if panels >= max_panels:
            raise QuadratureError(
                f"subdivision limit {max_panels} reached; error estimate {err:.3e}"
            )
        neg_e, a, b, val = heapq.heappop(heap)
        mid = 0.5 * (a + b)
        if not a < mid < b:
            raise QuadratureError(f"panel [{a!r}, {b!r}] cannot be split further")
        v1, e1 = _gk15(f, a, mid)
        v2, e2 = _gk15(f, mid, b)
        heapq.heappush(heap, (-e1, a, mid, v1))
        heapq.heappush(heap, (-e2, mid, b, v2))
        total += v1 + v2 - val
        err += e1 + e2 + neg_e
        panels += 1
    # resum to shed the drift of the running updates
    return math.fsum(item[3] for item in heap)


def _kernel(dist: np.ndarray, c: float) -> np.ndarray:
    t = c * np.abs(dist)
    with np.errstate(divide="ignore"):
        return np.where(
            t < 0.5,
            0.5 * np.log1p(2.0 / np.expm1(np.maximum(t, 1e-300))),
            np.arctanh(np.exp(-t)),
        )


def hat_integral_quadrature(
    x_j: float, x_i: float, dx: float, l_s: float, eps: float, tol: float = 1e-15
) -> float:
    """Kernel-hat integral by adaptive quadrature, split at the kernel singularity."""
    c = math.pi * l_s / (2.0 * eps)
    h = 0.5 * dx
    lo, hi = x_i - h, x_i + h

    def integrand(nu):
        hat = np.clip(1.0 - np.abs(nu - x_i) / h, 0.0, None)
        return _kernel(x_j - nu, c) * hat

    breaks = [lo, x_i, hi]
    if lo < x_j < hi:
        breaks.append(x_j)
    return adaptive_gauss_kronrod(integrand, breaks, abs_tol=tol, rel_tol=1e-14)


def convolution_direct(
    weights: Sequence[float],
    mesh: Mesh,
    l_s: float,
    eps: float,
    x_eval: Sequence[float],
    tol: float = 1e-14,
) -> np.ndarray:
    """Surface depletion ``-(2/pi) int k(x - nu) g(nu) dnu`` for ``g = sum_i w_i phi_i``.

    Each point of ``x_eval`` may be anywhere on the real line.  ``Da`` is folded
    into ``weights`` by the caller.
    """
    weights = np.asarray(weights, dtype=float)
    if weights.shape != (mesh.n,):
        raise ValueError("one weight per mesh node is required")
    nodes = mesh.nodes
    out = np.zeros(len(x_eval))
    for p, x in enumerate(x_eval):
        acc = 0.0
        for w, xi in zip(weights, nodes):
            if w != 0.0:
                acc += w * hat_integral_quadrature(x, xi, mesh.dx, l_s, eps, tol)
        out[p] = -2.0 / math.pi * acc
    return out


def hat_flux(center: float, width: float) -> Callable[[np.ndarray], np.ndarray]:
    """Unit-peak hat of support ``width`` centred at ``center``, as a flux profile."""
    half = 0.5 * width

    def g(x):
        return np.clip(1.0 - np.abs(np.asarray(x) - center) / half, 0.0, None)

    return g


@dataclass(frozen=True)
class StripProblem:
    """Laplace problem on ``[-X, X] x [0, a]`` in gate units.

    ``C = 0`` on the top, ``dC/dy = g(x)`` on the bottom, no flux through the
    truncation walls.  Grid spacing is ``2X / (nx - 1)`` in x and ``a / ny``
    in y; grid lines at the kinks of ``g`` keep the scheme second order.
    """

    a: float
    x_extent: float
    nx: int
    ny: int
    flux_profile: Callable[[np.ndarray], np.ndarray]

    def __post_init__(self):
        if not self.a > 0:
            raise ValueError("strip height must be positive")
        if not self.x_extent > 0.5:
            raise ValueError("truncation half-width must exceed the gate half-width")
        if self.nx < 3 or self.ny < 3:
            raise ValueError("grid counts must be at least 3")

    @property
    def x(self) -> np.ndarray:
        return np.linspace(-self.x_extent, self.x_extent, self.nx)

    @property
    def dx(self) -> float:
        return 2.0 * self.x_extent / (self.nx - 1)

    @property
    def dy(self) -> float:
        return self.a / self.ny


def laplace_strip_solve(prob: StripProblem) -> np.ndarray:
    """Bottom-row values of the 5-point finite-difference strip solution.

    Rows ``y_m = m dy`` for ``m = 0..ny-1`` are unknown, ``y = a`` is the
    Dirichlet row.  The x-direction is diagonalised with a type-I cosine
    transform (exact for the mirrored Neumann walls), leaving one tridiagonal
    system in y per cosine mode.
    """
    nx, ny = prob.nx, prob.ny
    dx, dy = prob.dx, prob.dy
    g = np.asarray(prob.flux_profile(prob.x), dtype=float)
    if g.shape != (nx,):
        raise ValueError("flux profile must return one value per grid column")
    if not np.any(g):
        return np.zeros(nx)

    # cosine modes of the Neumann second difference in x
    k = np.arange(nx)
    lam = (2.0 - 2.0 * np.cos(np.pi * k / (nx - 1))) / dx**2
    g_hat = dct(g, type=1)

    # ghost row C_{-1} = C_1 - 2 dy g turns the bottom row into
    # (2 C_1 - 2 C_0) / dy^2 - lam C_0 = 2 g / dy
    r = dy * dy
    diag = -(2.0 + lam * r)  # shape (nx,)
    rhs = np.zeros((ny, nx))
    rhs[0] = 2.0 * dy * g_hat
    upper = np.ones(ny - 1)
    upper[0] = 2.0
    lower = np.ones(ny - 1)

    # Thomas sweep, vectorised over modes
    cp = np.zeros((ny - 1, nx))
    dp = np.zeros((ny, nx))
    cp[0] = upper[0] / diag
    dp[0] = rhs[0] / diag
    for m in range(1, ny):
        denom = diag - lower[m - 1] * cp[m - 1]
        if m < ny - 1:
            cp[m] = upper[m] / denom
        dp[m] = (rhs[m] - lower[m - 1] * dp[m - 1]) / denom
    sol0 = dp[-1]
    for m in range(ny - 2, -1, -1):
        sol0 = dp[m] - cp[m] * sol0
    if not np.all(np.isfinite(sol0)):
        raise np.linalg.LinAlgError("strip solve produced non-finite values")
    return idct(sol0, type=1)
