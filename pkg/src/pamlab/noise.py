"""Sampling of the mollified stationary Gaussian field and exact MGFs.

Fields are drawn by spectral synthesis on a torus twice the analysis box
(cropped afterwards), with the spectral measure integrated over frequency
cells rather than sampled at lattice points.  For the heavy-tailed spectral
densities (riesz, fractional) the cell integration matters: plain midpoint
weights with a zero-mode cutoff lose an O(L^(-omega/2)) chunk of variance to
the infrared.  The zero cell's mass rides on the constant mode, which is the
long-wavelength cutoff inherent to any finite box; its effect is checked by
the covariance tests.

Randomness is counter based: every draw is keyed by (seed, stream), so
replicas are reproducible and order independent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainTooSmall, NonPositiveSpectrum
from .fields import Field, grid_centers
from .kernels import (
    FRACTIONAL,
    RIESZ,
    WHITE,
    MollifiedKernelSpec,
    mollified_gamma,
    mollifier_hat,
    riesz_ft_constant,
)
from .tables import flat_cell_avg_power


def rng_for(seed: int, stream: int = 0) -> np.random.Generator:
    """Counter-based generator keyed by (seed, stream); order independent."""
    key = np.array([seed % 2**64, stream % 2**64], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


@dataclass(frozen=True)
class RescaledNoiseParams:
    """Parameters of the peak-scale rescaling x -> alpha^2 (xi_eps(alpha x) - H/(p t))."""

    p: float
    t: float
    epsilon: float
    alpha: float
    H: float

    def __post_init__(self):
        if min(self.p, self.t, self.epsilon, self.alpha) <= 0:
            raise ValueError("p, t, epsilon, alpha must be positive")

    @classmethod
    def from_regime(cls, regime, p, t, epsilon, gamma1_at_0, omega):
        """Fill alpha and H from the scaling table evaluated at p*t."""
        from .scaling import scaling_functions

        triple = scaling_functions(regime, epsilon, p * t, gamma1_at_0, omega)
        return cls(p=p, t=t, epsilon=epsilon, alpha=triple.alpha, H=triple.H)


def _axis_cell_integrals(a: float, nu: np.ndarray, dnu: float) -> np.ndarray:
    """Integrals of |nu|^(-a) over frequency cells [nu - dnu/2, nu + dnu/2]."""

    def F(u):
        return np.sign(u) * np.abs(u) ** (1.0 - a) / (1.0 - a)

    return F(nu + dnu / 2) - F(nu - dnu / 2)


def _spectral_weights(mkernel: MollifiedKernelSpec, n_s: int, L: float) -> np.ndarray:
    """Cell-integrated spectral measure gamma_hat * phat_eps on the FFT lattice."""
    kern, eps = mkernel.base, mkernel.epsilon
    d = kern.dimension
    dnu = 1.0 / L
    nu_axis = np.fft.fftfreq(n_s, d=L / n_s)  # = k / L
    s2 = kern.sigma**2

    if kern.family == WHITE:
        mass = np.full((n_s,) * d, s2 * dnu**d)
    elif kern.family == FRACTIONAL:
        mass = np.ones((n_s,) * d)
        for i, w in enumerate(kern.omegas):
            fac = riesz_ft_constant(1, w) * _axis_cell_integrals(1.0 - w, nu_axis, dnu)
            shape = [1] * d
            shape[i] = n_s
            mass = mass * fac.reshape(shape)
        mass *= s2
    elif d == 1:
        fac = riesz_ft_constant(1, kern.omega) * _axis_cell_integrals(
            1.0 - kern.omega, nu_axis, dnu
        )
        mass = s2 * fac
    else:
        a = d - kern.omega
        cst = riesz_ft_constant(d, kern.omega)
        mesh = np.meshgrid(*([nu_axis] * d), indexing="ij")
        r = np.sqrt(sum(m**2 for m in mesh))
        with np.errstate(divide="ignore"):
            mass = cst * r ** (-a) * dnu**d
        near = np.all(np.stack([np.abs(m) <= dnu * 1.5 for m in mesh]), axis=0)
        for flat in np.flatnonzero(near):
            idx = np.unravel_index(flat, mass.shape)
            center = np.array([m[idx] for m in mesh])
            mass[idx] = cst * flat_cell_avg_power(a, dnu, center) * dnu**d
        mass *= s2

    mesh = np.meshgrid(*([nu_axis] * d), indexing="ij")
    pts = np.stack(mesh, axis=-1)
    weights = mass * mollifier_hat(eps, pts)
    if np.any(weights < 0) or not np.all(np.isfinite(weights)):
        raise NonPositiveSpectrum("discretized spectral density is not a nonnegative measure")
    return weights


def sample_noise(
    mkernel: MollifiedKernelSpec,
    box_radius: float,
    points_per_dim: int,
    seed: int,
    stream: int = 0,
    pad_factor: int = 2,
) -> Field:
    """Draw the mollified field on the cell-centered grid over Q_r.

    The draw happens on a torus ``pad_factor`` times the box (wrap-around
    bias control) and is cropped.  ``points_per_dim`` must be a power of two.
    Deterministic given (seed, stream).
    """
    n = points_per_dim
    if n & (n - 1) or n <= 0:
        raise ValueError("points_per_dim must be a power of two")
    d = mkernel.base.dimension
    n_s = pad_factor * n
    L = 2.0 * box_radius * pad_factor

    weights = _spectral_weights(mkernel, n_s, L)
    amp = np.sqrt(weights)

    rng = rng_for(seed, stream)
    zr = rng.standard_normal((n_s,) * d)
    zi = rng.standard_normal((n_s,) * d)
    coeff = amp * (zr + 1j * zi) / math.sqrt(2.0)
    full = math.sqrt(2.0) * (np.fft.ifftn(coeff) * n_s**d).real

    lo = (n_s - n) // 2
    block = full[(slice(lo, lo + n),) * d]
    return Field(box_radius, block.copy(), epsilon=mkernel.epsilon, kernel=mkernel.base)


def sample_noise_batch(
    mkernel: MollifiedKernelSpec,
    box_radius: float,
    points_per_dim: int,
    seed: int,
    n_samples: int,
    pad_factor: int = 2,
    block: int = 4096,
) -> np.ndarray:
    """Many draws at once; returns array (n_samples,) + grid shape.

    Block b reproduces streams [b*block, ...), so the result is identical to
    stacking single draws with stream = sample index ... up to the draw
    batching, which is keyed deterministically by (seed, block index).
    """
    n = points_per_dim
    if n & (n - 1) or n <= 0:
        raise ValueError("points_per_dim must be a power of two")
    d = mkernel.base.dimension
    n_s = pad_factor * n
    weights = _spectral_weights(mkernel, n_s, 2.0 * box_radius * pad_factor)
    amp = np.sqrt(weights)
    out = np.empty((n_samples,) + (n,) * d)
    lo = (n_s - n) // 2
    sl = (slice(lo, lo + n),) * d
    done = 0
    blk = 0
    while done < n_samples:
        m = min(block, n_samples - done)
        rng = rng_for(seed, 2**32 + blk)
        zr = rng.standard_normal((m,) + (n_s,) * d)
        zi = rng.standard_normal((m,) + (n_s,) * d)
        coeff = amp * (zr + 1j * zi) / math.sqrt(2.0)
        axes = tuple(range(1, d + 1))
        full = math.sqrt(2.0) * (np.fft.ifftn(coeff, axes=axes) * n_s**d).real
        out[done : done + m] = full[(slice(None),) + sl]
        done += m
        blk += 1
    return out


def rescale_noise(
    sample: Field,
    params: RescaledNoiseParams,
    box_radius: float | None = None,
    points_per_dim: int | None = None,
) -> Field:
    """The rescaled field x -> alpha^2 (xi_eps(alpha x) - H/(p t)) on Q_R.

    Off-grid values of the sample are filled by multilinear interpolation.
    The dilated target lattice must fit inside the sampled box.
    """
    alpha, shift = params.alpha, params.H / (params.p * params.t)
    r_t = box_radius if box_radius is not None else sample.box_radius / alpha
    n_t = points_per_dim if points_per_dim is not None else sample.points_per_dim
    if alpha * r_t > sample.box_radius * (1 + 1e-12):
        raise DomainTooSmall(
            f"need alpha*R = {alpha * r_t:.4g} <= sampled radius {sample.box_radius:.4g}"
        )
    c = grid_centers(r_t, n_t)
    mesh = np.meshgrid(*([c] * sample.dimension), indexing="ij")
    pts = np.stack(mesh, axis=-1) * alpha
    vals = alpha**2 * (sample.interp(pts) - shift)
    return Field(r_t, vals, epsilon=sample.epsilon, kernel=sample.kernel)


def mgf_linear_functional(mkernel: MollifiedKernelSpec, points, weights, lam: float) -> float:
    """Exact Gaussian MGF < exp(lam * (xi_eps, mu)) > for a discrete measure mu.

    Equals exp(lam^2/2 * sum_ij w_i w_j gamma_eps(x_i - x_j)); the quadratic
    form is the variance of the linear functional.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, np.newaxis]
    w = np.asarray(weights, dtype=float)
    if not np.all(np.isfinite(w)):
        raise ValueError("weights must be finite")
    diffs = pts[:, np.newaxis, :] - pts[np.newaxis, :, :]
    cov = mollified_gamma(mkernel, diffs)
    quad = float(w @ cov @ w)
    return math.exp(0.5 * lam**2 * quad)
