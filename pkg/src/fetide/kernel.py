"""Singular convolution kernel, polylogarithms and exact kernel-hat integrals.

The surface depletion term couples every gate point through the kernel

    k(u) = arctanh(exp(-c |u|)),     c = pi * l_s / (2 * epsilon),

which has a logarithmic singularity at ``u = 0``.  Integrated against the
piecewise linear hats of an equally spaced mesh it has a closed form in terms
of the odd polylogarithm series

    S_s(z) = sum_{n>=0} z^(2n+1) / (2n+1)^s = Li_s(z) - 2^-s Li_s(z^2).

With ``F(t) = S_3(exp(-t))`` one has ``F'' = k``, so the integral of the
kernel against a hat of half-width ``h`` centred a distance ``d`` from the
collocation point is a second difference of ``F`` with step ``c h``.  For the
small ``c`` of the physical regime all arguments of ``F`` sit within
``1e-2`` of ``z = 1`` and the literal polylog expression loses most of its
digits to cancellation; :func:`hat_integral` therefore differences the
log-expansion of ``F`` about ``z = 1`` term by term (near field) or the odd
series itself (far field).  :func:`hat_integral_polylog` keeps the literal
left/right decomposition for reference.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np
from scipy.linalg import toeplitz

__all__ = [
    "Mesh",
    "KernelMatrix",
    "kernel_rate",
    "kernel_value",
    "polylog",
    "odd_series",
    "hat_integral",
    "hat_integral_polylog",
    "hat_integral_lags",
    "assemble_matrix",
]

ZETA2 = math.pi**2 / 6
ZETA3 = 1.2020569031595942853997381615114
_EPS = np.finfo(float).eps


# --------------------------------------------------------------------------- mesh


@dataclass(frozen=True)
class Mesh:
    """``n`` equally spaced collocation nodes at the centres of ``n`` cells of [-1/2, 1/2]."""

    n: int

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"mesh needs a positive integer node count, got {self.n!r}")

    @property
    def dx(self) -> float:
        return 1.0 / self.n

    @property
    def nodes(self) -> np.ndarray:
        j = np.arange(1, self.n + 1)
        # written as (2j - 1 - n) / (2n) so that x_j = -x_{n+1-j} holds exactly
        return (2.0 * j - 1.0 - self.n) / (2.0 * self.n)

    def lag(self, x_j: float, x_i: float) -> int:
        """Index separation ``|j - i|`` of two nodes of this mesh."""
        for x in (x_j, x_i):
            pos = (x + 0.5) / self.dx - 0.5
            if abs(pos - round(pos)) > 1e-8 or not (0 <= round(pos) < self.n):
                raise ValueError(f"{x!r} is not a node of the {self.n}-node mesh")
        return int(round(abs(x_j - x_i) / self.dx))


# ------------------------------------------------------------------ special fns


@lru_cache(maxsize=None)
def _bernoulli(n_max: int) -> tuple[Fraction, ...]:
    """Bernoulli numbers B_0..B_n_max (B_1 = -1/2)."""
    b = [Fraction(1)]
    for m in range(1, n_max + 1):
        acc = Fraction(0)
        binom = 1
        for k in range(m):
            acc += binom * b[k]
            binom = binom * (m + 1 - k) // (k + 1)
        b.append(-acc / (m + 1))
    return tuple(b)


def _zeta_nonpositive(m: int) -> Fraction:
    """zeta(-m) for m >= 0."""
    if m == 0:
        return Fraction(-1, 2)
    return -_bernoulli(m + 1)[m + 1] / (m + 1)


_LOG_TERMS = 40


@lru_cache(maxsize=None)
def _log_series_coeffs(s: int) -> tuple[float, ...]:
    """Coefficients of mu^k (k != s-1) in the expansion of Li_s(e^mu) about mu = 0."""
    out = []
    for k in range(_LOG_TERMS):
        if k == s - 1:
            out.append(0.0)
            continue
        order = s - k
        if order == 3:
            z = ZETA3
        elif order == 2:
            z = ZETA2
        else:
            z = float(_zeta_nonpositive(-order))
        out.append(z / math.factorial(k))
    return tuple(out)


def _polylog_scalar(s: int, z: float) -> float:
    if z == 0.0:
        return 0.0
    if z == 1.0:
        if s == 1:
            raise ValueError("Li_1(1) diverges")
        return ZETA2 if s == 2 else ZETA3
    if z <= 0.5:
        total = 0.0
        term_z = z
        k = 1
        while True:
            term = term_z / k**s
            total += term
            if term <= 1e-18 * total:
                return total
            k += 1
            term_z *= z
    mu = math.log(z)
    # singular piece mu^(s-1)/(s-1)! * (H_{s-1} - ln(-mu))
    harmonic = sum(1.0 / j for j in range(1, s))
    total = mu ** (s - 1) / math.factorial(s - 1) * (harmonic - math.log(-mu))
    coeffs = _log_series_coeffs(s)
    power = 1.0
    for k, ck in enumerate(coeffs):
        if ck != 0.0:
            term = ck * power
            total += term
            if k > s and abs(term) < 1e-18 * abs(total):
                break
        power *= mu
    return total


def polylog(s: int, z):
    """Polylogarithm ``Li_s(z)`` for ``s`` in {1, 2, 3} and real ``0 <= z <= 1``.

    Direct series below ``z = 1/2``; above it the expansion in ``ln z`` about
    ``z = 1``, which has exact zeta constants at ``z = 1``.  Relative accuracy
    is a few ulps over the whole interval.
    """
    if s not in (1, 2, 3):
        raise ValueError(f"polylog order must be 1, 2 or 3, got {s}")
    arr = np.asarray(z, dtype=float)
    if np.any(~np.isfinite(arr)) or np.any(arr < 0) or np.any(arr > 1):
        raise ValueError("polylog argument must lie in [0, 1]")
    if arr.ndim == 0:
        return _polylog_scalar(s, float(arr))
    return np.vectorize(lambda v: _polylog_scalar(s, v), otypes=[float])(arr)


def odd_series(s: int, z):
    """``sum_{n>=0} z^(2n+1)/(2n+1)^s``, i.e. ``Li_s(z) - 2^-s Li_s(z^2)``.

    ``s = 1`` gives ``arctanh(z)``.
    """
    arr = np.asarray(z, dtype=float)
    if arr.ndim == 0 and s == 1 and float(arr) == 1.0:
        raise ValueError("odd series of order 1 diverges at z = 1")
    if s == 1:
        # Li_1(z) - Li_1(z^2)/2 = arctanh(z); avoid the log cancellation
        if np.any(arr < 0) or np.any(arr >= 1):
            raise ValueError("odd series of order 1 needs 0 <= z < 1")
        out = np.arctanh(arr)
        return float(out) if arr.ndim == 0 else out
    return polylog(s, arr) - polylog(s, arr * arr) / 2.0**s


def kernel_rate(l_s: float, eps: float) -> float:
    """Decay rate ``c`` of the kernel, ``pi * l_s / (2 * eps)``."""
    if not (l_s > 0 and eps > 0):
        raise ValueError("l_s and eps must be positive")
    return math.pi * l_s / (2.0 * eps)


def _arctanh_exp(t):
    """arctanh(exp(-t)) for t > 0, accurate at both ends."""
    t = np.asarray(t, dtype=float)
    with np.errstate(divide="ignore"):
        near = -0.5 * np.log(np.tanh(0.5 * t))
        far = np.arctanh(np.exp(-t))
    return np.where(t < math.log(2.0), near, far)


def kernel_value(u, l_s: float, eps: float):
    """Kernel ``arctanh(exp(-pi l_s |u| / (2 eps)))``.  Singular at ``u = 0``."""
    c = kernel_rate(l_s, eps)
    u = np.asarray(u, dtype=float)
    if np.any(u == 0):
        raise ValueError("kernel is singular at u = 0; integrate across it instead")
    out = _arctanh_exp(c * np.abs(u))
    return float(out) if out.ndim == 0 else out


# ------------------------------------------------------------ kernel-hat integrals

# F(t) = S_3(e^-t) = 7/8 zeta(3) - (pi^2/8) t + A t^2 - (t^2/4) ln t + sum_{m>=2} E_m t^(2m)
_A2 = 0.375 + 0.25 * math.log(2.0)
_SMOOTH_TERMS = 70


@lru_cache(maxsize=None)
def _smooth_coeffs() -> np.ndarray:
    """E_m = zeta(3-2m) (1 - 2^(2m-3)) / (2m)!  for m = 0.._SMOOTH_TERMS (zero below m=2)."""
    out = np.zeros(_SMOOTH_TERMS + 1)
    for m in range(2, _SMOOTH_TERMS + 1):
        val = _zeta_nonpositive(2 * m - 3) * (1 - Fraction(2) ** (2 * m - 3)) / math.factorial(2 * m)
        out[m] = float(val)
    return out


# Near field is used while the farthest argument t + delta stays below this,
# well inside the radius of convergence (pi) of the smooth series.
_NEAR_LIMIT = 2.0
_SELF_NEAR_LIMIT = 1.0


def _self_integral(c: float, h: float) -> float:
    """Integral of the kernel against the hat centred on the collocation point."""
    delta = c * h
    if delta <= _SELF_NEAR_LIMIT:
        e = _smooth_coeffs()
        d2 = delta * delta
        smooth = 0.0
        for m in range(_SMOOTH_TERMS, 1, -1):
            smooth = smooth * d2 + e[m]
        smooth *= d2
        return 2.0 * h * (_A2 - 0.25 * math.log(delta) + smooth)
    bracket = (
        odd_series(3, math.exp(-delta)) - 0.875 * ZETA3 + delta * math.pi**2 / 8.0
    )
    return 2.0 * bracket / (h * c * c)


def _near_integrals(k: np.ndarray, c: float, h: float) -> np.ndarray:
    """Off-centre hats (k >= 1) with c (d + h) < _NEAR_LIMIT."""
    delta = c * h
    t = 2.0 * k * delta
    # log part: -1/2 ln(t/2) plus its hat correction sum_p r^2p / (2p (2p+1) (2p+2))
    r2 = (1.0 / (2.0 * k)) ** 2
    corr = np.zeros_like(t)
    power = np.ones_like(t)
    for p in range(1, 60):
        power = power * r2
        term = power / (2 * p * (2 * p + 1) * (2 * p + 2))
        corr += term
        if np.all(term < 1e-18 * np.maximum(corr, 1e-300)):
            break
    # smooth part: sum_m E_m [(t+d)^2m - 2 t^2m + (t-d)^2m] / (2 d^2)
    #            = sum_q beta_q t^2q,  beta_q = sum_{m>q} E_m C(2m, 2q) d^(2m-2q-2)
    e = _smooth_coeffs()
    d2 = delta * delta
    beta = np.zeros(_SMOOTH_TERMS)
    for q in range(_SMOOTH_TERMS):
        m_lo = max(q + 1, 2)
        acc = 0.0
        for m in range(_SMOOTH_TERMS, m_lo - 1, -1):
            acc = acc * d2 + e[m] * math.comb(2 * m, 2 * q)
        beta[q] = acc * d2 ** (m_lo - q - 1)
    t2 = t * t
    smooth = np.zeros_like(t)
    for q in range(_SMOOTH_TERMS - 1, -1, -1):
        smooth = smooth * t2 + beta[q]
    return h * (-0.5 * np.log(0.5 * t) + corr + 2.0 * smooth)


def _far_integrals(k: np.ndarray, c: float, h: float) -> np.ndarray:
    """Off-centre hats whose arguments stay away from z = 1: difference the odd series termwise."""
    delta = c * h
    lo = (2.0 * k - 1.0) * delta
    total = np.zeros_like(lo)
    m = 1
    while True:
        term = np.exp(-m * lo) * np.expm1(-m * delta) ** 2 / m**3
        total += term
        if np.all(term <= 1e-18 * total) or m > 20000:
            break
        m += 2
    return total / (h * c * c)


def hat_integral_lags(n: int, l_s: float, eps: float) -> np.ndarray:
    """Kernel-hat integrals for all lags ``0..n-1`` of the ``n``-node mesh.

    Entry ``k`` is the integral over [-1/2, 1/2] of the kernel centred at a node
    against the hat of a node ``k`` cells away.
    """
    c = kernel_rate(l_s, eps)
    h = 0.5 / n
    out = np.empty(n)
    out[0] = _self_integral(c, h)
    if n > 1:
        k = np.arange(1, n, dtype=float)
        near = (2.0 * k + 1.0) * c * h < _NEAR_LIMIT
        if near.any():
            out[1:][near] = _near_integrals(k[near], c, h)
        if (~near).any():
            out[1:][~near] = _far_integrals(k[~near], c, h)
    return out


def hat_integral(x_j: float, x_i: float, dx: float, l_s: float, eps: float) -> float:
    """Integral of ``kernel(x_j - nu) * phi_i(nu)`` over the gate.

    ``x_j`` and ``x_i`` must be nodes of the equally spaced mesh with spacing
    ``dx``.  The value depends only on the lag ``|x_j - x_i| / dx`` and is
    symmetric in its first two arguments.
    """
    n = int(round(1.0 / dx))
    if abs(n * dx - 1.0) > 1e-12:
        raise ValueError(f"dx={dx!r} does not divide the unit gate")
    mesh = Mesh(n)
    lag = mesh.lag(x_j, x_i)
    c = kernel_rate(l_s, eps)
    h = 0.5 * dx
    if lag == 0:
        return _self_integral(c, h)
    k = np.array([float(lag)])
    if (2 * lag + 1) * c * h < _NEAR_LIMIT:
        return float(_near_integrals(k, c, h)[0])
    return float(_far_integrals(k, c, h)[0])


def hat_integral_polylog(x_j: float, x_i: float, dx: float, l_s: float, eps: float) -> float:
    """Literal left-hat plus right-hat polylog closed form.

    Mathematically equal to :func:`hat_integral` but evaluated as written, so
    roughly ``2 log10(1 / (c dx))`` digits are lost to cancellation.  Kept as a
    cross-check of the algebra at moderate ``c dx``.
    """
    if x_j < x_i:
        x_j, x_i = x_i, x_j
    c = kernel_rate(l_s, eps)
    d = x_j - x_i
    h = 0.5 * dx

    def s2(t):
        return odd_series(2, math.exp(-t))

    def s3(t):
        return odd_series(3, math.exp(-t))

    left = s2(c * d) / c - (s3(c * d) - s3(c * (d + h))) / (h * c * c)
    if d < 0.5 * h:
        # right half mirrors the left half when the hat sits on the collocation point
        right = left
    else:
        right = (s3(c * (d - h)) - s3(c * d)) / (h * c * c) - s2(c * d) / c
    return left + right


# ----------------------------------------------------------------- kernel matrix


@dataclass(frozen=True)
class KernelMatrix:
    """Dense symmetric Toeplitz matrix ``(2 Da / pi) * hat_integral(x_j, x_i)``."""

    mesh: Mesh
    Da: float
    l_s: float
    eps: float
    first_row: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)

    @property
    def n(self) -> int:
        return self.mesh.n

    def is_positive_definite(self) -> bool:
        try:
            np.linalg.cholesky(self.values)
        except np.linalg.LinAlgError:
            return False
        return True


def assemble_matrix(mesh: Mesh, Da: float, l_s: float, eps: float) -> KernelMatrix:
    """Assemble the kernel matrix from the ``n`` distinct Toeplitz values."""
    if Da < 0:
        raise ValueError("Da must be nonnegative")
    row = (2.0 * Da / math.pi) * hat_integral_lags(mesh.n, l_s, eps)
    row.setflags(write=False)
    values = toeplitz(row)
    values.setflags(write=False)
    return KernelMatrix(mesh=mesh, Da=float(Da), l_s=float(l_s), eps=float(eps),
                        first_row=row, values=values)
