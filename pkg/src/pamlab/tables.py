"""Cell-averaged kernel tables and lattice convolutions.

The interaction functionals integrate f(x)^2 gamma_c(x-y) f(y)^2 over a
compact box.  With f^2 replaced by its piecewise-constant interpolant on the
cell-centered grid, the double integral is exactly

    (1/2) h^(2d) sum_{ij} g_i g_j K[i-j],
    K[m] = (gamma_c convolved with the hat T = cell x cell)(x_m) / h^(2d),

so building K amounts to averaging the kernel against the triangular (hat)
weight on the difference lattice.  Because this equals a genuine continuum
quadratic form, positivity of the kernel and monotonicity of the form in the
mollification scale c are inherited exactly, and no infrared regularization
is ever needed (the box is compact).

For the product kernels (white, fractional, and riesz in d=1) the hat
averages factor into one-dimensional integrals that are analytic at c=0 and
a single robust quadrature for c>0.  Riesz in d>=2 combines midpoint values
away from the origin with divergence-theorem corner integrals for the cells
touching the singularity.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import integrate
from scipy.special import erf

from .errors import QuadratureFailure
from .kernels import (
    FRACTIONAL,
    RIESZ,
    WHITE,
    KernelSpec,
    MollifiedKernelSpec,
    mollified_gamma,
)

_table_cache: dict = {}


# ---------------------------------------------------------------------------
# one-dimensional hat averages
# ---------------------------------------------------------------------------


def _hat_from_antiderivatives(P, Q, h, z):
    """(1/h^2) int (h-|s|) k(z+s) ds from antiderivatives P=int k, Q=int u k."""
    zp, zm = z + h, z - h
    first = h * (P(zp) - P(zm))
    second = z * (2.0 * P(z) - P(zm) - P(zp))
    third = Q(zp) + Q(zm) - 2.0 * Q(z)
    return (first - second - third) / h**2


def hat_power_1d(a: float, h: float, z) -> np.ndarray:
    """Hat average of |u|^(-a) at offsets z, analytic; requires 0 < a < 1."""
    z = np.asarray(z, dtype=float)

    def P(u):
        return np.sign(u) * np.abs(u) ** (1.0 - a) / (1.0 - a)

    def Q(u):
        return np.abs(u) ** (2.0 - a) / (2.0 - a)

    out = _hat_from_antiderivatives(P, Q, h, z)
    # far field: switch to the moment expansion where the exact formula cancels
    far = np.abs(z) > 1e4 * h
    if np.any(far):
        zf = np.abs(z[far])
        mu2, mu4 = h**2 / 6.0, h**4 / 15.0
        corr = 1.0 + 0.5 * mu2 * a * (a + 1) / zf**2 \
            + mu4 / 24.0 * a * (a + 1) * (a + 2) * (a + 3) / zf**4
        out[far] = zf ** (-a) * corr
    return out


def _norm_cdf(u, c):
    return 0.5 * (1.0 + erf(u / (c * math.sqrt(2.0))))


def _norm_pdf(u, c):
    return np.exp(-(u**2) / (2 * c**2)) / (c * math.sqrt(2 * math.pi))


def hat_gauss_1d(c: float, h: float, z) -> np.ndarray:
    """Hat average of the Gaussian density with sd c (white-noise factor)."""
    z = np.asarray(z, dtype=float)
    out = _hat_from_antiderivatives(
        lambda u: _norm_cdf(u, c), lambda u: -(c**2) * _norm_pdf(u, c), h, z
    )
    return np.maximum(out, 0.0)


def hat_mollified_power_1d(a: float, c: float, h: float, z, rtol: float = 1e-8) -> np.ndarray:
    """Hat average of (|.|^(-a) * p_c) at offsets z, by adaptive quadrature.

    Robust for every c > 0 including c << h (the hat resolves the smoothing).
    Raises QuadratureFailure when the requested tolerance is not met.
    """
    z = np.atleast_1d(np.asarray(z, dtype=float))
    out = np.empty_like(z)
    window = h + 9.0 * c
    mu2 = h**2 / 6.0 + c**2
    mu4 = h**4 / 15.0 + h**2 * c**2 + 3 * c**4
    zfar = max(50.0 * math.sqrt(mu2), 1.5 * window)

    def weight(u):
        return _hat_from_antiderivatives(
            lambda v: _norm_cdf(v, c), lambda v: -(c**2) * _norm_pdf(v, c), h, u
        )

    for i, zi in enumerate(z):
        if abs(zi) > zfar:
            r = abs(zi)
            out[i] = r ** (-a) * (
                1.0
                + 0.5 * mu2 * a * (a + 1) / r**2
                + mu4 / 24.0 * a * (a + 1) * (a + 2) * (a + 3) / r**4
            )
            continue
        lo, hi = zi - window, zi + window
        lo, hi = min(lo, -1e-3 * h), max(hi, 1e-3 * h)
        pts = [0.0] if lo < 0.0 < hi else None
        val, err = integrate.quad(
            lambda v: np.abs(v) ** (-a) * weight(zi - v),
            lo,
            hi,
            points=pts,
            limit=300,
            epsabs=1e-13,
            epsrel=max(rtol * 1e-2, 1e-12),
        )
        if not np.isfinite(val) or err > max(rtol * abs(val), 1e-11):
            raise QuadratureFailure(
                f"hat average of mollified power at z={zi:.4g} reached error {err:.2e}"
            )
        out[i] = val
    return out


# ---------------------------------------------------------------------------
# d >= 2 power-law cell integrals (riesz)
# ---------------------------------------------------------------------------


def _gauss_legendre(n, lo, hi):
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (hi - lo) * x + 0.5 * (hi + lo), 0.5 * (hi - lo) * w


def corner_box_power_integral(s: float, sides) -> float:
    """int over prod_i [0, a_i] of |x|^(-s) dx, 0 < s < d, via the divergence
    theorem: faces through the origin drop out, leaving smooth far faces."""
    a = np.asarray(sides, dtype=float)
    d = a.size
    if np.any(a <= 0):
        return 0.0
    total = 0.0
    order = 32 if d == 2 else 16
    for i in range(d):
        others = [j for j in range(d) if j != i]
        if d == 2:
            t, w = _gauss_legendre(order, 0.0, a[others[0]])
            vals = (a[i] ** 2 + t**2) ** (-s / 2) * a[i]
            total += float(np.dot(w, vals))
        elif d == 3:
            t, wt = _gauss_legendre(order, 0.0, a[others[0]])
            u, wu = _gauss_legendre(order, 0.0, a[others[1]])
            tt, uu = np.meshgrid(t, u, indexing="ij")
            vals = (a[i] ** 2 + tt**2 + uu**2) ** (-s / 2) * a[i]
            total += float(wt @ vals @ wu)
        else:
            raise NotImplementedError("riesz cell integrals implemented for d in {2, 3}")
    return total / (d - s)


def flat_cell_avg_power(s: float, h: float, center) -> float:
    """Average of |x|^(-s) over the cell of side h centered at ``center``."""
    y = np.asarray(center, dtype=float)
    d = y.size
    lo, hi = y - h / 2, y + h / 2
    if np.all(lo <= 0) and np.all(hi >= 0):
        # origin inside (or on the boundary of) the cell: split into corner boxes
        total = 0.0
        for signs in np.ndindex(*([2] * d)):
            sides = np.where(np.array(signs) == 0, np.maximum(-lo, 0.0), np.maximum(hi, 0.0))
            total += corner_box_power_integral(s, sides)
        return total / h**d
    # origin outside: smooth integrand, tensor Gauss quadrature
    order = 8
    grids, weights = zip(*[_gauss_legendre(order, lo[i], hi[i]) for i in range(d)])
    mesh = np.meshgrid(*grids, indexing="ij")
    r2 = sum(m**2 for m in mesh)
    vals = r2 ** (-s / 2)
    wmesh = np.meshgrid(*weights, indexing="ij")
    wprod = np.prod(np.stack(wmesh), axis=0)
    return float(np.sum(vals * wprod)) / h**d


def hat_cell_avg_power(s: float, h: float, center) -> float:
    """Hat average (double cell average) of |x|^(-s) at ``center``; d >= 2."""
    y = np.asarray(center, dtype=float)
    d = y.size
    order = 12 if d == 2 else 6
    grids, weights = zip(*[_gauss_legendre(order, -h / 2, h / 2) for i in range(d)])
    mesh = np.meshgrid(*grids, indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=-1)
    wmesh = np.meshgrid(*weights, indexing="ij")
    wprod = np.prod(np.stack(wmesh), axis=0).ravel() / h**d
    return float(sum(w * flat_cell_avg_power(s, h, y + p) for p, w in zip(pts, wprod)))


# ---------------------------------------------------------------------------
# difference-lattice kernel tables
# ---------------------------------------------------------------------------


def _axis_offsets(n: int, h: float) -> np.ndarray:
    """Offsets m*h for m = -(n-1) .. n-1."""
    return h * np.arange(-(n - 1), n)


def _white_axis_factor(c: float, h: float, n: int) -> np.ndarray:
    z = _axis_offsets(n, h)
    if c == 0.0:
        out = np.zeros_like(z)
        out[n - 1] = 1.0 / h
        return out
    return hat_gauss_1d(c, h, z)


def _power_axis_factor(a: float, c: float, h: float, n: int) -> np.ndarray:
    z = _axis_offsets(n, h)
    if c == 0.0:
        return hat_power_1d(a, h, z)
    return hat_mollified_power_1d(a, c, h, z)


def _riesz_multidim_table(kernel: KernelSpec, c: float, h: float, n: int) -> np.ndarray:
    d, omega = kernel.dimension, kernel.omega
    z = _axis_offsets(n, h)
    mesh = np.meshgrid(*([z] * d), indexing="ij")
    r = np.sqrt(sum(m**2 for m in mesh))
    if c == 0.0:
        with np.errstate(divide="ignore"):
            table = r ** (-omega)
    else:
        mk = MollifiedKernelSpec(kernel, c)
        pts = np.stack(mesh, axis=-1)
        table = np.asarray(mollified_gamma(mk, pts)) / kernel.sigma**2
    # cells touching the singularity get proper hat averages
    near_c = c if c >= h / 2 else 0.0  # sub-cell smoothing is invisible to the hat
    for idx in np.ndindex(*([3] * d)):
        m = np.array(idx) - 1
        center = m * h
        if near_c == 0.0:
            val = hat_cell_avg_power(omega, h, center)
        else:
            val = _hat_avg_smooth(lambda p: mollified_gamma(MollifiedKernelSpec(kernel, near_c), p) / kernel.sigma**2, h, center, d)
        table[tuple(m + (n - 1))] = val
    return table


def _hat_avg_smooth(func, h, center, d, order=8):
    grids, weights = zip(*[_gauss_legendre(order, -h, h) for _ in range(d)])
    mesh = np.meshgrid(*grids, indexing="ij")
    pts = np.stack(mesh, axis=-1) + np.asarray(center)
    wmesh = np.meshgrid(*weights, indexing="ij")
    hatw = np.prod(np.stack([(h - np.abs(m)) / h**2 for m in mesh]), axis=0)
    wprod = np.prod(np.stack(wmesh), axis=0) * hatw
    return float(np.sum(func(pts) * wprod))


def kernel_difference_table(kernel: KernelSpec, c: float, h: float, n: int) -> np.ndarray:
    """Hat-averaged gamma_c on the (2n-1)^d difference lattice (sigma^2 included)."""
    if c < 0:
        raise ValueError("mollification scale c must be nonnegative")
    key = (kernel, float(c), float(h), int(n))
    cached = _table_cache.get(key)
    if cached is not None:
        return cached

    d = kernel.dimension
    s2 = kernel.sigma**2
    if kernel.family == WHITE:
        factors = [_white_axis_factor(c, h, n) for _ in range(d)]
        table = s2 * _tensor(factors)
    elif kernel.family == FRACTIONAL:
        factors = [_power_axis_factor(w, c, h, n) for w in kernel.omegas]
        table = s2 * _tensor(factors)
    elif kernel.dimension == 1:
        table = s2 * _power_axis_factor(kernel.omega, c, h, n)
    else:
        table = s2 * _riesz_multidim_table(kernel, c, h, n)
    table.flags.writeable = False
    if len(_table_cache) > 64:
        _table_cache.clear()
    _table_cache[key] = table
    return table


def _tensor(factors):
    out = factors[0]
    for f in factors[1:]:
        out = np.multiply.outer(out, f)
    return out


def lattice_convolve(table: np.ndarray, g: np.ndarray) -> np.ndarray:
    """(K convolve g)[i] = sum_j K[i-j] g[j] on the n^d grid, wrap-free FFT."""
    d = g.ndim
    n = g.shape[0]
    if table.shape != (2 * n - 1,) * d:
        raise ValueError("table does not match the grid")
    m = 2 * n
    circ = np.zeros((m,) * d)
    # place K[k] at index k mod 2n; index n stays empty so no wrap-around
    idx = np.arange(-(n - 1), n) % m
    circ[np.ix_(*([idx] * d))] = table
    conv = np.fft.irfftn(np.fft.rfftn(circ) * np.fft.rfftn(g, s=(m,) * d), s=(m,) * d)
    return conv[(slice(0, n),) * d]
