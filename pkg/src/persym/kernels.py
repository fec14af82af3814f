"""Cell-pair kernel weight tables and the Laplace-transform quadrature.

Every double integral in the package reduces to finite sums against tables
W[d] = integral of a convolution kernel over a pair of cells at offset d.
This module builds those tables:

* wrapped Gaussian (periodic heat kernel) and line Gaussian, via erf/erfc
  antiderivatives, with a theta-series dual branch for small diffusion time;
* power kernel |z|^(-(1+sigma)) on the line (closed-form second
  antiderivative) and its periodization (explicit copies plus an
  Euler-Maclaurin tail with analytic derivatives, certified by the
  next-term bound);
* the 2D power kernel |z|^(-(2+sigma)) with x1-periodization, where the
  singular near-offsets are integrated exactly in the radial variable and
  by Gauss-Legendre in the angle;
* general nonnegative step-function kernels, whose tables are exact
  two-tap averages of the kernel values (and whose rearrangement is again
  a step kernel, so rearranged tables stay exact);
* the exp-substitution trapezoid rule turning t-integrals of
  t^(lambda-1) e^(-zt) into Gamma(lambda) z^(-lambda), validated against
  that closed form before use.

Convention: W[0] := 0 for kernels singular at the origin (step-function
energies never see the diagonal because u(x) - u(y) vanishes there).
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import special

from .errors import (
    ConfigError,
    GridMismatch,
    NonpositiveTime,
    RangeTooWide,
    SigmaOutOfRange,
    StepFunctionDivergence,
)
from .grid import Grid1D, StepFunction, refine
from .rearrange import periodic_rearrange_1d, symmetric_decreasing_1d

TWO_PI = 2.0 * math.pi
SQRT_PI = math.sqrt(math.pi)

# switch between the Gaussian-copy sum and the theta dual representation;
# both need <= ~8 terms there
T_SWITCH = 1.0 / (4.0 * math.pi**2)


@dataclass(frozen=True)
class KernelWeights:
    """Cell-pair integrals of a 1D convolution kernel, indexed by offset.

    Periodic tables store offsets 0..n-1 (modulo n); interval tables store
    offsets -(n-1)..n-1 in ``weights[d + n - 1]``.  ``exterior[i]`` is the
    kernel mass from cell i to the complement of the grid interval (filled
    for integrable line kernels); ``total_mass`` is the full line integral.
    """

    n: int
    h: float
    periodic: bool
    weights: np.ndarray = field(repr=False)
    accuracy: float = 1e-12
    singular_diagonal: bool = False
    total_mass: float | None = None
    exterior: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        w = np.ascontiguousarray(self.weights, dtype=float)
        expected = self.n if self.periodic else 2 * self.n - 1
        if w.size != expected:
            raise ConfigError(f"weight table needs {expected} entries, got {w.size}")
        w.flags.writeable = False
        object.__setattr__(self, "weights", w)

    def offset(self, d: int) -> float:
        if self.periodic:
            return float(self.weights[d % self.n])
        if abs(d) >= self.n:
            return 0.0
        return float(self.weights[d + self.n - 1])

    def matrix(self) -> np.ndarray:
        """Dense (n, n) matrix M[i, j] = W[j - i]."""
        i = np.arange(self.n)
        d = i[None, :] - i[:, None]
        if self.periodic:
            return self.weights[d % self.n]
        return self.weights[d + self.n - 1]

    def row_sum(self) -> float:
        """Kernel mass seen from one cell against the whole period."""
        if not self.periodic:
            raise GridMismatch("row_sum is a periodic-table notion")
        return float(self.weights.sum())

    def is_even(self, tol: float = 1e-12) -> bool:
        if self.periodic:
            d = np.arange(1, self.n)
            return bool(
                np.allclose(self.weights[d], self.weights[self.n - d], rtol=tol, atol=0)
            )
        return bool(np.allclose(self.weights, self.weights[::-1], rtol=tol, atol=0))


def check_kernel_monotone(w: KernelWeights) -> bool:
    """True iff W[d] strictly decreases in circle distance on (0, N/2].

    Runtime guard for equality-case analysis: the theorems' hypotheses need
    the kernel decreasing away from the origin, which this verifies on the
    table instead of assuming.
    """
    if not w.periodic:
        seq = w.weights[w.n - 1 :]
        return bool(np.all(np.diff(seq) < 0))
    half = w.n // 2
    seq = w.weights[1 : half + 1]
    return bool(np.all(np.diff(seq) < 0))


# ---------------------------------------------------------------------------
# wrapped Gaussian (periodic heat kernel)


@dataclass(frozen=True)
class HeatKernelParams:
    t: float
    tail_rtol: float = 1e-15

    def __post_init__(self):
        if not self.t > 0:
            raise NonpositiveTime(f"diffusion time must be positive, got {self.t}")


def heat_kernel_periodic(z, params: HeatKernelParams | float):
    """Wrapped Gaussian sum_k exp(-(z + 2 pi k)^2 t), dual representation.

    Direct Gaussian-copy sum for t >= 1/(4 pi^2), Fourier (theta) series
    (1 / (2 sqrt(pi t))) * (1 + 2 sum_m exp(-m^2/(4t)) cos(m z)) below it;
    both branches agree to ~1e-13 relative at the crossover.
    """
    if not isinstance(params, HeatKernelParams):
        params = HeatKernelParams(float(params))
    t, rtol = params.t, params.tail_rtol
    z = np.asarray(z, dtype=float)
    scalar = z.ndim == 0
    z = np.atleast_1d(z)
    zr = z - TWO_PI * np.floor((z + math.pi) / TWO_PI)  # reduce to [-pi, pi)
    if t >= T_SWITCH:
        kmax = int(math.ceil(math.sqrt(-math.log(rtol) / t) / TWO_PI)) + 1
        k = np.arange(-kmax, kmax + 1)
        out = np.exp(-((zr[:, None] + TWO_PI * k[None, :]) ** 2) * t).sum(axis=1)
    else:
        mmax = int(math.ceil(2.0 * math.sqrt(t * -math.log(rtol)))) + 2
        m = np.arange(1, mmax + 1)
        series = 1.0 + 2.0 * (
            np.exp(-(m**2) / (4.0 * t))[None, :] * np.cos(m[None, :] * zr[:, None])
        ).sum(axis=1)
        out = series / (2.0 * math.sqrt(math.pi * t))
    return float(out[0]) if scalar else out


def _gauss_pair_integral(c, h: float, t) -> np.ndarray:
    """Integral of exp(-(c + xi - eta)^2 t) over (xi, eta) in [0, h]^2.

    Second difference of an antiderivative E2 with E2'' = exp(-z^2 t); the
    affine-in-z part of E2 cancels in the difference, so near the origin we
    keep erf with expm1 (no large constant) and far out we switch to the
    erfc complement whose terms are all Gaussian-small.  Broadcasts over
    both the offset c and the time t.
    """
    c = np.abs(np.asarray(c, dtype=float))
    t = np.asarray(t, dtype=float)
    st = np.sqrt(t)
    pts = np.stack(np.broadcast_arrays(c + h, c + 0.0 * t, np.abs(c - h)), axis=0)
    tt = np.broadcast_to(t, pts.shape[1:])
    stt = np.broadcast_to(st, pts.shape[1:])
    near = np.broadcast_to(c < h, pts.shape)

    def e2_erf(zz):
        return zz * (SQRT_PI / (2.0 * stt)) * special.erf(zz * stt) + np.expm1(
            -(zz**2) * tt
        ) / (2.0 * tt)

    def e2_erfc(zz):
        return np.expm1(-(zz**2) * tt) / (2.0 * tt) - zz * (
            SQRT_PI / (2.0 * stt)
        ) * special.erfc(zz * stt)

    vals = np.where(near, e2_erf(pts), e2_erfc(pts))
    return vals[0] - 2.0 * vals[1] + vals[2]


def _heat_table(n: int, h: float, t: float, rtol: float = 1e-15) -> np.ndarray:
    """Raw periodic heat-kernel weight table (length n), dual branch."""
    d = np.arange(n)
    if t >= T_SWITCH:
        kmax = int(math.ceil((math.sqrt(-math.log(rtol) / t) + n * h) / TWO_PI)) + 1
        k = np.arange(-kmax, kmax + 1)
        # centered offset representative keeps |c| = h exact for adjacent
        # pairs, which the pair integral's branch split relies on
        dc = np.where(d <= n // 2, d, d - n)
        c = dc[:, None] * h - TWO_PI * k[None, :]
        return _gauss_pair_integral(c, h, t).sum(axis=1)
    lead = -math.log(max(rtol * h * h / 8.0, 1e-300))
    mmax = int(math.ceil(2.0 * math.sqrt(t * lead))) + 2
    m = np.arange(1, mmax + 1)
    coef = np.exp(-(m**2) / (4.0 * t)) * (4.0 / m**2) * np.sin(m * h / 2.0) ** 2
    series = h * h + 2.0 * (coef[None, :] * np.cos(np.outer(d * h, m))).sum(axis=1)
    return series / (2.0 * math.sqrt(math.pi * t))


def _heat_table_batch(n: int, h: float, ts: np.ndarray, rtol: float = 1e-15) -> np.ndarray:
    """Heat-kernel weight tables for many times at once, shape (len(ts), n)."""
    ts = np.asarray(ts, dtype=float)
    out = np.empty((ts.size, n))
    d = np.arange(n)
    big = ts >= T_SWITCH
    if big.any():
        tb = ts[big]
        kmax = int(
            math.ceil((math.sqrt(-math.log(rtol) / tb.min()) + n * h) / TWO_PI)
        ) + 1
        k = np.arange(-kmax, kmax + 1)
        dc = np.where(d <= n // 2, d, d - n)
        c = dc[None, :, None] * h - TWO_PI * k[None, None, :]
        out[big] = _gauss_pair_integral(c, h, tb[:, None, None]).sum(axis=2)
    small = ~big
    if small.any():
        tb = ts[small]
        lead = -math.log(max(rtol * h * h / 8.0, 1e-300))
        mmax = int(math.ceil(2.0 * math.sqrt(tb.max() * lead))) + 2
        m = np.arange(1, mmax + 1)
        coef = (
            np.exp(-(m[None, :] ** 2) / (4.0 * tb[:, None]))
            * (4.0 / m[None, :] ** 2)
            * np.sin(m[None, :] * h / 2.0) ** 2
        )
        series = h * h + 2.0 * coef @ np.cos(np.outer(m, d * h))
        out[small] = series / (2.0 * np.sqrt(math.pi * tb))[:, None]
    return out


def heat_weights_periodic(grid: Grid1D, t: float) -> KernelWeights:
    """Cell-pair integrals of the wrapped Gaussian on a periodic grid."""
    if not grid.periodic:
        raise GridMismatch("heat_weights_periodic needs a periodic grid")
    if not t > 0:
        raise NonpositiveTime(f"diffusion time must be positive, got {t}")
    return KernelWeights(
        grid.n, grid.h, True, _heat_table(grid.n, grid.h, t), accuracy=1e-12
    )


# ---------------------------------------------------------------------------
# line Gaussian


def _erfc_antideriv(u) -> np.ndarray:
    """A(u) = integral of erfc from 0 to u = u erfc(u) + (1 - exp(-u^2))/sqrt(pi)."""
    u = np.asarray(u, dtype=float)
    return u * special.erfc(u) - np.expm1(-(u**2)) / SQRT_PI


def _gauss_exterior(grid: Grid1D, t: float) -> np.ndarray:
    """Kernel mass from each cell to the complement of the grid interval."""
    st = math.sqrt(t)
    b = grid.boundaries()
    lo, hi = grid.lo, grid.hi
    upper = _erfc_antideriv((hi - b[:-1]) * st) - _erfc_antideriv((hi - b[1:]) * st)
    lower = _erfc_antideriv((b[1:] - lo) * st) - _erfc_antideriv((b[:-1] - lo) * st)
    return (SQRT_PI / (2.0 * t)) * (upper + lower)


def gaussian_weights_interval(grid: Grid1D, t: float) -> KernelWeights:
    """Cell-pair integrals of exp(-r^2 t) on an interval grid, with tails."""
    if grid.periodic:
        raise GridMismatch("gaussian_weights_interval needs an interval grid")
    if not t > 0:
        raise NonpositiveTime(f"diffusion time must be positive, got {t}")
    d = np.arange(-(grid.n - 1), grid.n)
    return KernelWeights(
        grid.n,
        grid.h,
        False,
        _gauss_pair_integral(d * grid.h, grid.h, t),
        accuracy=1e-12,
        total_mass=math.sqrt(math.pi / t),
        exterior=_gauss_exterior(grid, t),
    )


# ---------------------------------------------------------------------------
# power kernel |z|^-(1+sigma) on the line and 2 pi periodized


def _check_sigma(sigma: float) -> None:
    if sigma >= 1.0:
        raise StepFunctionDivergence(
            f"sigma={sigma}: adjacent-cell weights diverge; step functions "
            "genuinely have infinite energy for sigma >= 1"
        )
    if not 0.0 < sigma < 1.0:
        raise SigmaOutOfRange(f"sigma must lie in (0, 1), got {sigma}")


def _falling(a: float, m: int) -> float:
    out = 1.0
    for j in range(m):
        out *= a - j
    return out


def _d2_power(a: float, z, h: float):
    """Second difference P(z+h) - 2 P(z) + P(z-h) of P(r) = r^a, cancellation-safe.

    Direct evaluation loses (z/h)^2 in relative precision, so for z >= 16 h it
    switches to the even-order Taylor series 2 sum_j h^(2j)/(2j)! P^(2j)(z),
    whose omitted terms are below 1e-16 relative at that threshold.
    """
    z = np.atleast_1d(np.asarray(z, dtype=float))
    out = np.empty_like(z)
    near = z < 16.0 * h
    if near.any():
        zn = z[near]
        p = lambda r: np.where(r > 0.0, r, 1.0) ** a * (r > 0.0)
        out[near] = p(zn + h) - 2.0 * p(zn) + p(zn - h)
    far = ~near
    if far.any():
        zf = z[far]
        acc = np.zeros_like(zf)
        for j in range(1, 6):
            acc += (
                2.0
                * h ** (2 * j)
                / math.factorial(2 * j)
                * _falling(a, 2 * j)
                * zf ** (a - 2 * j)
            )
        out[far] = acc
    return out


def _riesz_line_pair(m, h: float, sigma: float) -> np.ndarray:
    """Exact pair weight at cell offset |m| >= 1 from the second antiderivative.

    K2(r) = r^(1-sigma) / (sigma (sigma - 1)) satisfies K2'' = r^(-(1+sigma));
    the weight is the second difference of K2 at the three edge gaps, with
    K2(0) = 0 for sigma < 1 (this is where sigma >= 1 diverges).
    """
    m = np.asarray(m, dtype=float)
    c = 1.0 / (sigma * (sigma - 1.0))
    return c * _d2_power(1.0 - sigma, m * h, h)


def _riesz_em_tail(a: float, n: int, h: float, sigma: float, k0: int) -> tuple[float, float]:
    """sum_{k >= k0} pair_weight((a + k n) h) by Euler-Maclaurin; (value, bound).

    Every piece is a second difference of an explicit antiderivative of the
    power kernel; the bound is the magnitude of the first omitted correction.
    """
    s = sigma
    nh = n * h
    z0 = (a + k0 * n) * h

    def d2(a_pow: float, coef: float) -> float:
        return coef * float(_d2_power(a_pow, z0, h)[0])

    c3 = 1.0 / (s * (s - 1.0) * (2.0 - s))
    c2 = 1.0 / (s * (s - 1.0))
    c1 = -1.0 / s
    cf1 = -(1.0 + s)
    cf3 = -(1.0 + s) * (2.0 + s) * (3.0 + s)
    cf5 = cf3 * (4.0 + s) * (5.0 + s)
    tail = (
        -d2(2.0 - s, c3) / nh
        + 0.5 * d2(1.0 - s, c2)
        - nh * d2(-s, c1) / 12.0
        + nh**3 * d2(-2.0 - s, cf1) / 720.0
        - nh**5 * d2(-4.0 - s, cf3) / 30240.0
    )
    bound = abs(nh**7 * d2(-6.0 - s, cf5)) / 1209600.0
    return tail, bound


def riesz_weights_1d(
    grid: Grid1D, sigma: float, periodized: bool, rtol: float = 1e-13
) -> KernelWeights:
    """Cell-pair weights of |x - y|^(-(1+sigma)), optionally 2 pi periodized.

    W[0] is 0 by the singular-diagonal convention.  Periodization sums cell
    copies at offsets d + k N explicitly and closes the k-tail with an
    Euler-Maclaurin correction certified by its next-term bound.
    """
    _check_sigma(sigma)
    n, h = grid.n, grid.h
    if not periodized:
        d = np.arange(-(n - 1), n)
        w = np.zeros(d.size)
        nz = d != 0
        w[nz] = _riesz_line_pair(np.abs(d[nz]), h, sigma)
        return KernelWeights(n, h, False, w, accuracy=1e-14, singular_diagonal=True)
    if not grid.periodic:
        raise GridMismatch("periodized Riesz weights need a periodic grid")
    k0 = 8
    while True:
        w = np.zeros(n)
        worst = 0.0
        for d in range(1, n):
            ks = np.arange(-k0 + 1, k0)
            offs = np.abs(d + ks * n)
            core = float(_riesz_line_pair(offs[offs > 0], h, sigma).sum())
            t_plus, b_plus = _riesz_em_tail(d, n, h, sigma, k0)
            t_minus, b_minus = _riesz_em_tail(-d, n, h, sigma, k0)
            w[d] = core + t_plus + t_minus
            worst = max(worst, (b_plus + b_minus) / w[d])
        if worst <= rtol:
            return KernelWeights(
                n, h, True, w, accuracy=max(worst, 1e-15), singular_diagonal=True
            )
        if k0 >= 128:
            raise RangeTooWide(
                f"Euler-Maclaurin tail would not certify rtol={rtol} at k0={k0}"
            )
        k0 *= 2


# ---------------------------------------------------------------------------
# 2D power kernel |z|^-(2+sigma), x1-periodized, for the direct ND route


@lru_cache(maxsize=16)
def _gl(n: int) -> tuple[np.ndarray, np.ndarray]:
    return np.polynomial.legendre.leggauss(n)


def _gl_on(a: float, b: float, n: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = _gl(n)
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    return mid + half * x, half * w


def _corner_rect_moment(alpha: int, beta: int, w1: float, w2: float, mu: float) -> float:
    """Integral of x^alpha y^beta (x^2 + y^2)^(-mu) over [0, w1] x [0, w2].

    Exact power integral in the radius; Gauss-Legendre in the angle over the
    two sub-sectors split where the rectangle boundary switches edges.
    Needs alpha + beta + 2 > 2 mu, guaranteed because singular overlap
    densities always carry a vanishing linear factor.
    """
    gamma = alpha + beta + 2.0 - 2.0 * mu
    if gamma <= 0:
        raise ConfigError("non-integrable corner moment")
    theta_c = math.atan2(w2, w1)
    total = 0.0
    for lo, hi, edge in ((0.0, theta_c, "cos"), (theta_c, 0.5 * math.pi, "sin")):
        if hi <= lo:
            continue
        th, wt = _gl_on(lo, hi, 40)
        r = w1 / np.cos(th) if edge == "cos" else w2 / np.sin(th)
        integ = (r**gamma / gamma) * np.cos(th) ** alpha * np.sin(th) ** beta
        total += float(integ @ wt)
    return total


def _smooth_rect(c1, c2, x0, x1, y0, y1, h1, h2, mu, order=20) -> float:
    """GL integral of tri(z1) tri(z2) |c + z|^(-2 mu) over a kink-free rectangle."""
    zx, wx = _gl_on(x0, x1, order)
    zy, wy = _gl_on(y0, y1, order)
    trix = (h1 - np.abs(zx)) * wx
    triy = (h2 - np.abs(zy)) * wy
    rho = (c1 + zx[:, None]) ** 2 + (c2 + zy[None, :]) ** 2
    return float(trix @ rho ** (-mu) @ triy)


def _affine_overlap(s: float, c: float, h: float, u0: float, tol: float):
    """Write tri(z) = h - |z| on a sign-s quadrant as a + b p, p = |c + z|.

    Only valid when the shifted quadrant has one endpoint at the kernel
    origin (|u0| < tol means the left endpoint; otherwise the right one).
    """
    if abs(u0) < tol:  # w = +p on [0, h]
        return h + s * c, -s
    return h + s * c, s  # w = -p, reflected


def _box_weight_2d(c1: float, c2: float, h1: float, h2: float, mu: float) -> float:
    """Integral of tri(z1) tri(z2) ((c1+z1)^2 + (c2+z2)^2)^(-mu) over the z-box.

    Splits at the density kinks into four rectangles; a rectangle whose
    shifted corner hits the kernel origin is expanded in bilinear monomials
    and integrated exactly in the radius (possible because the density
    vanishes linearly toward the origin there).
    """
    total = 0.0
    tol1, tol2 = 1e-9 * h1, 1e-9 * h2
    for s1 in (-1.0, 1.0):
        for s2 in (-1.0, 1.0):
            x0, x1 = (0.0, h1) if s1 > 0 else (-h1, 0.0)
            y0, y1 = (0.0, h2) if s2 > 0 else (-h2, 0.0)
            u0, u1 = c1 + x0, c1 + x1
            v0, v1 = c2 + y0, c2 + y1
            if u0 * u1 < -tol1 * h1 or v0 * v1 < -tol2 * h2:
                raise ConfigError("offset is not on the cell lattice")
            touch_x = min(abs(u0), abs(u1)) < tol1
            touch_y = min(abs(v0), abs(v1)) < tol2
            if not (touch_x and touch_y):
                total += _smooth_rect(c1, c2, x0, x1, y0, y1, h1, h2, mu)
                continue
            a1, b1 = _affine_overlap(s1, c1, h1, u0, tol1)
            a2, b2 = _affine_overlap(s2, c2, h2, v0, tol2)
            for alpha, ca in ((0, a1), (1, b1)):
                for beta, cb in ((0, a2), (1, b2)):
                    coef = ca * cb
                    if coef == 0.0 or (alpha == 0 and beta == 0):
                        if alpha == 0 and beta == 0 and abs(coef) > tol1 * tol2:
                            raise ConfigError("corner moment lost its linear factor")
                        continue
                    total += coef * _corner_rect_moment(alpha, beta, h1, h2, mu)
    return total


def _fint_over_box(c1, c2, h1, h2, mu, order=16) -> float:
    """GL integral of tri tri int_{c1+z1}^inf (t^2 + (c2+z2)^2)^(-mu) dt dz.

    The inner integral has the incomplete-beta closed form; needs c1 > h1 so
    the lower limit stays positive across the box.
    """
    bcoef = 0.5 * special.beta(mu - 0.5, 0.5)
    total = 0.0
    for sx in (-1, 1):
        for sy in (-1, 1):
            zx, wx = _gl_on(0.0 if sx > 0 else -h1, h1 if sx > 0 else 0.0, order)
            zy, wy = _gl_on(0.0 if sy > 0 else -h2, h2 if sy > 0 else 0.0, order)
            a = c1 + zx[:, None] + 0.0 * zy[None, :]
            b = np.abs(c2 + 0.0 * zx[:, None] + zy[None, :])
            x = b**2 / (a**2 + b**2)
            vals = b ** (1.0 - 2.0 * mu) * bcoef * special.betainc(mu - 0.5, 0.5, x)
            trix = (h1 - np.abs(zx)) * wx
            triy = (h2 - np.abs(zy)) * wy
            total += float(trix @ vals @ triy)
    return total


def _psi_derivs_box(c1, c2, h1, h2, mu, order=16) -> tuple[float, float, float, float]:
    """(psi, psi', psi''', psi^(5)) of the copy weight in the copy index k,
    where psi(k) = box_weight(c1 + 2 pi (k - k_ref)); evaluated at c1 itself."""
    m = mu
    out = [0.0, 0.0, 0.0, 0.0]
    for sx in (-1, 1):
        for sy in (-1, 1):
            zx, wx = _gl_on(0.0 if sx > 0 else -h1, h1 if sx > 0 else 0.0, order)
            zy, wy = _gl_on(0.0 if sy > 0 else -h2, h2 if sy > 0 else 0.0, order)
            w1 = c1 + zx[:, None] + 0.0 * zy[None, :]
            w2 = c2 + 0.0 * zx[:, None] + zy[None, :]
            rho = w1**2 + w2**2
            trix = (h1 - np.abs(zx)) * wx
            triy = (h2 - np.abs(zy)) * wy
            m2 = m * (m + 1.0)
            m3 = m2 * (m + 2.0)
            m4 = m3 * (m + 3.0)
            m5 = m4 * (m + 4.0)
            f = rho ** (-m)
            f1 = -2.0 * m * w1 * rho ** (-m - 1.0)
            f3 = 12.0 * m2 * w1 * rho ** (-m - 2.0) - 8.0 * m3 * w1**3 * rho ** (
                -m - 3.0
            )
            f5 = (
                -120.0 * m3 * w1 * rho ** (-m - 3.0)
                + 160.0 * m4 * w1**3 * rho ** (-m - 4.0)
                - 32.0 * m5 * w1**5 * rho ** (-m - 5.0)
            )
            out[0] += float(trix @ f @ triy)
            out[1] += float(trix @ f1 @ triy) * TWO_PI
            out[2] += float(trix @ f3 @ triy) * TWO_PI**3
            out[3] += float(trix @ f5 @ triy) * TWO_PI**5
    return out[0], out[1], out[2], out[3]


def _copy_tail_2d(a: float, c2: float, h1: float, h2: float, mu: float, k_next: int) -> float:
    """sum_{k >= k_next} box_weight(a + 2 pi k, c2) by Euler-Maclaurin."""
    c1 = a + TWO_PI * k_next
    psi, psi1, psi3, psi5 = _psi_derivs_box(c1, c2, h1, h2, mu)
    integral = _fint_over_box(c1, c2, h1, h2, mu) / TWO_PI
    return integral + 0.5 * psi - psi1 / 12.0 + psi3 / 720.0 - psi5 / 30240.0


@dataclass(frozen=True)
class NDKernelWeights:
    """x1-periodized 2D power-kernel weights plus analytic exterior masses.

    ``weights[d1, d2 + n2 - 1]`` is the pair weight at offset (d1 mod n1, d2);
    ``exterior[i2]`` is the kernel mass from any cell in column i2 to the
    region outside the x2 box (x1 integrated over one period of x and all
    copies of y).
    """

    n1: int
    h1: float
    n2: int
    h2: float
    sigma: float
    weights: np.ndarray = field(repr=False)
    exterior: np.ndarray = field(repr=False)
    accuracy: float = 1e-12

    def matrix(self) -> np.ndarray:
        """(n1, n2, n1, n2) tensor of pair weights."""
        i1 = np.arange(self.n1)
        i2 = np.arange(self.n2)
        d1 = (i1[None, :] - i1[:, None]) % self.n1
        d2 = i2[None, :] - i2[:, None] + self.n2 - 1
        return self.weights[d1[:, None, :, None], d2[None, :, None, :]]


def _nd_cache_path(grid1, grid2, sigma, k_copies):
    cache_dir = os.environ.get("PERSYM_CACHE_DIR")
    if not cache_dir:
        return None
    os.makedirs(cache_dir, exist_ok=True)
    tag = (
        f"riesz2d_n{grid1.n}x{grid2.n}_box{grid2.lo:.9g}_{grid2.hi:.9g}"
        f"_sigma{sigma:.9g}_k{k_copies}.npz"
    )
    return os.path.join(cache_dir, tag)


def riesz_weights_nd(
    grid1: Grid1D, grid2: Grid1D, sigma: float, k_copies: int = 16
) -> NDKernelWeights:
    """Pair weights of |x - y|^(-(2+sigma)) with periodized x1, analytic tails.

    Desk-scale builder for the direct n = 2 seminorm route; the Laplace
    representation is the supported fast path beyond that.  Offsets are
    computed for one symmetry sector and reflected (the kernel is even in
    each coordinate and the x1 copies are symmetric).  Set PERSYM_CACHE_DIR
    to persist tables across runs.
    """
    _check_sigma(sigma)
    if not grid1.periodic or grid2.periodic:
        raise GridMismatch("riesz_weights_nd needs (periodic, interval) axes")
    cache = _nd_cache_path(grid1, grid2, sigma, k_copies)
    if cache and os.path.exists(cache):
        data = np.load(cache)
        return NDKernelWeights(
            grid1.n, grid1.h, grid2.n, grid2.h, sigma, data["weights"], data["exterior"]
        )
    mu = (2.0 + sigma) / 2.0
    n1, h1 = grid1.n, grid1.h
    n2, h2 = grid2.n, grid2.h
    w = np.zeros((n1, 2 * n2 - 1))
    for d1c in range(n1 // 2 + 1):
        for d2 in range(n2):
            if d1c == 0 and d2 == 0:
                continue  # singular diagonal: convention W = 0
            total = 0.0
            for k in range(-k_copies, k_copies + 1):
                total += _box_weight_2d(d1c * h1 + TWO_PI * k, d2 * h2, h1, h2, mu)
            total += _copy_tail_2d(d1c * h1, d2 * h2, h1, h2, mu, k_copies + 1)
            total += _copy_tail_2d(-d1c * h1, d2 * h2, h1, h2, mu, k_copies + 1)
            for d1 in {d1c, (n1 - d1c) % n1}:
                w[d1, n2 - 1 + d2] = total
                w[d1, n2 - 1 - d2] = total
    kappa = SQRT_PI * special.gamma(mu - 0.5) / special.gamma(mu)
    b = grid2.boundaries()
    up = (grid2.hi - b[:-1]) ** (1.0 - sigma) - (grid2.hi - b[1:]) ** (1.0 - sigma)
    lo = (b[1:] - grid2.lo) ** (1.0 - sigma) - (b[:-1] - grid2.lo) ** (1.0 - sigma)
    ext = h1 * (kappa / (sigma * (1.0 - sigma))) * (up + lo)
    if cache:
        np.savez(cache, weights=w, exterior=ext)
    return NDKernelWeights(n1, h1, n2, h2, sigma, w, ext)


# ---------------------------------------------------------------------------
# step-function kernels: exact tables, exact rearranged tables


def step_kernel_table(kernel: StepFunction) -> KernelWeights:
    """Exact cell-pair weights of a step-function kernel on its own grid.

    The pair offset z = x - y spreads over two kernel cells with triangular
    density, so W[d] = (h^2/2) (gamma[m - d - 1] + gamma[m - d]) with
    m = n/2; an even cell count keeps z = 0 on a cell boundary.
    """
    g = kernel.grid
    if g.n % 2 != 0:
        raise ConfigError("step kernels need an even cell count")
    gam = kernel.values
    m = g.n // 2
    if g.periodic:
        idx = np.arange(g.n)
        w = 0.5 * g.h**2 * (gam[(m - idx - 1) % g.n] + gam[(m - idx) % g.n])
        return KernelWeights(g.n, g.h, True, w, accuracy=1e-15)
    d = np.arange(-(g.n - 1), g.n)

    def gam_at(j):
        j = np.asarray(j)
        inside = (j >= 0) & (j < g.n)
        return np.where(inside, gam[np.clip(j, 0, g.n - 1)], 0.0)

    w = 0.5 * g.h**2 * (gam_at(m - d - 1) + gam_at(m - d))
    return KernelWeights(
        g.n, g.h, False, w, accuracy=1e-15, total_mass=float(gam.sum()) * g.h
    )


# ---------------------------------------------------------------------------
# kernel families: tables on any compatible grid, with exact rearrangements


class CircleKernel:
    """2 pi periodic kernel able to produce weights on any periodic grid."""

    name: str = "kernel"

    def weights(self, grid: Grid1D) -> KernelWeights:
        raise NotImplementedError

    def rearranged(self) -> "CircleKernel":
        raise NotImplementedError


@dataclass(frozen=True)
class HeatKernel(CircleKernel):
    """Wrapped Gaussian at diffusion time t; already symmetric decreasing."""

    t: float

    @property
    def name(self) -> str:
        return f"heat:t={self.t:g}"

    def weights(self, grid: Grid1D) -> KernelWeights:
        return heat_weights_periodic(grid, self.t)

    def rearranged(self) -> "HeatKernel":
        return self


@dataclass(frozen=True)
class PeriodizedRieszKernel(CircleKernel):
    """Periodized power kernel with the zero-diagonal convention.

    Symmetric decreasing away from the origin (the periodization of a convex
    decreasing profile), so it is its own rearrangement; the table's W[0] = 0
    convention makes it suitable for seminorms and perimeters, where the
    diagonal never contributes, not for pair energies of distinct functions
    (those are genuinely infinite for this kernel).
    """

    sigma: float

    @property
    def name(self) -> str:
        return f"riesz:sigma={self.sigma:g}"

    def weights(self, grid: Grid1D) -> KernelWeights:
        return riesz_weights_1d(grid, self.sigma, periodized=True)

    def rearranged(self) -> "PeriodizedRieszKernel":
        return self


@dataclass(frozen=True)
class StepKernelCircle(CircleKernel):
    """Nonnegative periodic step kernel; rearranging it is exact sorting."""

    profile: StepFunction

    def __post_init__(self):
        if not self.profile.grid.periodic:
            raise GridMismatch("circle step kernel needs a periodic profile")
        if self.profile.grid.n % 2 != 0:
            raise ConfigError("circle step kernel needs an even cell count")

    @property
    def name(self) -> str:
        return f"step-circle:n={self.profile.grid.n}"

    def weights(self, grid: Grid1D) -> KernelWeights:
        if grid.n % self.profile.grid.n != 0:
            raise GridMismatch(
                f"grid n={grid.n} does not refine the kernel grid "
                f"n={self.profile.grid.n}"
            )
        return step_kernel_table(refine(self.profile, grid.n // self.profile.grid.n))

    def rearranged(self) -> "StepKernelCircle":
        return StepKernelCircle(periodic_rearrange_1d(self.profile))


class LineKernel:
    """Integrable line kernel for Euclidean energies."""

    name: str = "kernel"

    def weights(self, grid: Grid1D) -> KernelWeights:
        raise NotImplementedError

    def rearranged(self) -> "LineKernel":
        raise NotImplementedError


@dataclass(frozen=True)
class GaussianKernel(LineKernel):
    t: float

    @property
    def name(self) -> str:
        return f"gauss:t={self.t:g}"

    def weights(self, grid: Grid1D) -> KernelWeights:
        return gaussian_weights_interval(grid, self.t)

    def rearranged(self) -> "GaussianKernel":
        return self


@dataclass(frozen=True)
class StepKernelLine(LineKernel):
    """Compactly supported step kernel on a centered interval grid."""

    profile: StepFunction

    def __post_init__(self):
        g = self.profile.grid
        if g.periodic or g.n % 2 != 0 or not math.isclose(g.lo, -g.hi):
            raise ConfigError("line step kernel needs an even, centered profile grid")

    @property
    def name(self) -> str:
        return f"step-line:n={self.profile.grid.n}"

    def weights(self, grid: Grid1D) -> KernelWeights:
        ratio = self.profile.grid.h / grid.h
        k = round(ratio)
        if k < 1 or not math.isclose(ratio, k, rel_tol=1e-12):
            raise GridMismatch("kernel cell width must be an integer multiple of grid's")
        base = step_kernel_table(refine(self.profile, k))
        d = np.arange(-(grid.n - 1), grid.n)
        w = np.array([base.offset(int(dd)) for dd in d])
        interior = np.array(
            [w[np.arange(grid.n) - i + grid.n - 1].sum() for i in range(grid.n)]
        )
        ext = np.maximum(grid.h * base.total_mass - interior, 0.0)
        return KernelWeights(
            grid.n,
            grid.h,
            False,
            w,
            accuracy=1e-14,
            total_mass=base.total_mass,
            exterior=ext,
        )

    def rearranged(self) -> "StepKernelLine":
        return StepKernelLine(symmetric_decreasing_1d(self.profile))


# ---------------------------------------------------------------------------
# Laplace-transform quadrature


@dataclass(frozen=True)
class LaplaceConfig:
    """Trapezoid-in-log-t rule for integrals of t^(lambda - 1) F(t).

    ``apply(F_values)`` approximates int_0^inf t^(lambda-1) F(t) dt by
    sum_q weight_q F(node_q); the constructor validated the rule against
    the exact Laplace transform Gamma(lambda) z^(-lambda) of e^(-z t) over
    the declared z-range.
    """

    lam: float
    nodes: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)
    z_min: float
    z_max: float
    rtol: float
    achieved: float
    ds: float = 0.0

    def apply(self, fvals: np.ndarray) -> float:
        return float(self.weights @ fvals)

    def algebraic_tail(self, coef: float, beta: float) -> float:
        """Continue the trapezoid past the last node for F(t) ~ coef t^-beta.

        Geometric sum of the rule's own nodes beyond the window; exact when
        the profile has settled onto its algebraic tail there (beta > lam).
        """
        alpha = (self.lam - beta) * self.ds
        if alpha >= 0:
            raise ConfigError("algebraic tail needs beta > lam")
        s_max = math.log(self.nodes[-1])
        q = math.exp(alpha)
        return coef * self.ds * math.exp((self.lam - beta) * s_max) * q / (1.0 - q)

    def algebraic_head(self, coef: float, beta: float) -> float:
        """Continue the trapezoid before the first node for F(t) ~ coef t^-beta.

        Geometric sum of the rule's nodes below the window; exact when the
        profile is on its small-t algebraic branch there (beta < lam).
        """
        alpha = (self.lam - beta) * self.ds
        if alpha <= 0:
            raise ConfigError("algebraic head needs beta < lam")
        s_min = math.log(self.nodes[0])
        q = math.exp(-alpha)
        return coef * self.ds * math.exp((self.lam - beta) * s_min) * q / (1.0 - q)

    def gamma_identity_error(self, z) -> np.ndarray:
        z = np.atleast_1d(np.asarray(z, dtype=float))
        approx = np.exp(-np.outer(z, self.nodes)) @ self.weights
        exact = special.gamma(self.lam) * z ** (-self.lam)
        return np.abs(approx / exact - 1.0)


def laplace_quadrature(
    lam: float,
    z_min: float,
    z_max: float,
    rtol: float = 1e-9,
    left_rate: float | None = None,
    right_rate: float | None = None,
    s_right_cap: float | None = None,
    max_nodes: int = 200_000,
) -> LaplaceConfig:
    """Build and validate the exp-substitution trapezoid rule.

    The window in s = log t is sized from the declared decay rates of the
    target integrand (defaulting to the pure-exponential model on
    [z_min, z_max]); the spacing is halved until the Gamma-identity check
    passes at rtol, else RangeTooWide.  ``s_right_cap`` truncates the window
    where the caller will continue the integral analytically (and where the
    node weights stay representable: e^(lam s) must not overflow).
    """
    if lam <= 0 or z_min <= 0 or z_max < z_min:
        raise ConfigError("need lam > 0 and 0 < z_min <= z_max")
    eps = rtol * 1e-3
    lgamma = math.lgamma(lam)
    lrate = left_rate if left_rate is not None else lam
    s_left_exp = (math.log(eps * lam) + lgamma) / lam - math.log(z_max)
    s_left = min(s_left_exp, math.log(eps) / lrate - 2.0)
    s_left = max(s_left, -600.0)  # callers continue analytically below this
    big = -math.log(eps) + abs(lgamma) + 5.0
    big += lam * math.log(max(big, 2.0))
    s_right = math.log(big / z_min)
    if right_rate is not None:
        s_right = max(s_right, (-math.log(eps) + 5.0) / right_rate)
    hard_cap = 680.0 / lam  # keep e^(lam s) finite
    s_right = min(s_right, hard_cap if s_right_cap is None else min(s_right_cap, hard_cap))
    ds = 0.5
    zs = np.geomspace(z_min, z_max, 41)
    while True:
        m = int(math.ceil((s_right - s_left) / ds)) + 1
        if m > max_nodes:
            raise RangeTooWide(
                f"would need {m} nodes for rtol={rtol} on z in [{z_min}, {z_max}]"
            )
        s = s_left + ds * np.arange(m)
        cfg = LaplaceConfig(
            lam, np.exp(s), ds * np.exp(lam * s), z_min, z_max, rtol, math.nan, ds
        )
        err = float(cfg.gamma_identity_error(zs).max())
        if err <= rtol:
            return LaplaceConfig(
                lam, cfg.nodes, cfg.weights, z_min, z_max, rtol, err, ds
            )
        ds *= 0.5
