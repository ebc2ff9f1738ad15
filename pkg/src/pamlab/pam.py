"""Solvers for the smoothed heat equation with potential: time stepping,
spectral expansion, and Feynman-Kac Monte Carlo.

The Brownian motion has generator kappa*Laplacian, so increments carry
per-coordinate variance 2*kappa*dt (the factor of 2 is the classic trap;
stated here once and tested).  Path functionals evaluate the potential at
the containing grid cell, which makes the occupation-measure pairing and
the time Riemann sum literally the same finite sum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.sparse import identity
from scipy.sparse.linalg import splu

from .errors import StabilityViolation
from .fields import Field, grid_centers
from .noise import rng_for
from .spectral import dirichlet_eigens, dirichlet_operator, spectral_solution

PDE = "pde"
SPECTRAL = "spectral"
MC = "mc"

DIRICHLET_BOX = "dirichlet_box"
LARGE_BOX = "large_box_approx"


@dataclass(frozen=True)
class PamSolveConfig:
    method: str = PDE
    dt: float = 1e-2
    boundary: str = DIRICHLET_BOX
    n_paths: int = 10_000
    scheme: str = "crank_nicolson"  # or "explicit"
    pad_factor: int = 4  # large-box padding
    spectral_modes: int = 64

    def __post_init__(self):
        if self.method not in (PDE, SPECTRAL, MC):
            raise ValueError(f"unknown method {self.method!r}")
        if self.boundary not in (DIRICHLET_BOX, LARGE_BOX):
            raise ValueError(f"unknown boundary {self.boundary!r}")
        if self.dt <= 0:
            raise ValueError("dt must be positive")


@dataclass(frozen=True)
class BrownianPath:
    """Discrete Brownian path with generator kappa*Laplacian.

    positions has shape (n_steps + 1, d); increments are N(0, 2 kappa dt I).
    """

    times: np.ndarray
    positions: np.ndarray
    kappa: float

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0])


def sample_path(kappa: float, t: float, dt: float, d: int, seed: int, stream: int = 0,
                start=None) -> BrownianPath:
    n_steps = int(round(t / dt))
    rng = rng_for(seed, stream)
    inc = rng.standard_normal((n_steps, d)) * math.sqrt(2.0 * kappa * dt)
    pos = np.empty((n_steps + 1, d))
    pos[0] = 0.0 if start is None else np.asarray(start, dtype=float)
    np.cumsum(inc, axis=0, out=pos[1:])
    pos[1:] += pos[0]
    return BrownianPath(times=np.arange(n_steps + 1) * dt, positions=pos, kappa=kappa)


def _pad_field(V: Field, pad_factor: int) -> Field:
    """Edge-replicated extension onto a pad_factor x larger box, same spacing."""
    n = V.points_per_dim
    extra = (pad_factor - 1) * n // 2
    vals = np.pad(V.values, extra, mode="edge")
    return Field(V.box_radius * pad_factor, vals)


def solve_pde(V: Field, t: float, config: PamSolveConfig, kappa: float = 1.0) -> Field:
    """u^V(t, .) from flat initial data by Crank-Nicolson time stepping.

    DIRICHLET_BOX solves the absorbing problem on the field's own box;
    LARGE_BOX pads the potential (edge replication) by config.pad_factor and
    crops back, approximating the whole-space solution.
    """
    if config.method == SPECTRAL:
        dec = dirichlet_eigens(V, kappa, min(config.spectral_modes, V.points_per_dim ** V.dimension - 1))
        return spectral_solution(dec, t)
    work = V if config.boundary == DIRICHLET_BOX else _pad_field(V, config.pad_factor)
    A = dirichlet_operator(work, kappa)
    n_steps = max(1, int(round(t / config.dt)))
    dt = t / n_steps
    u = np.ones(A.shape[0])
    if config.scheme == "explicit":
        bound = work.h**2 / (2.0 * work.dimension * kappa)
        if dt > bound:
            raise StabilityViolation(f"explicit step {dt:.3e} exceeds {bound:.3e}")
        for _ in range(n_steps):
            u = u + dt * (A @ u)
    else:
        eye = identity(A.shape[0], format="csc")
        lhs = splu((eye - 0.5 * dt * A).tocsc())
        rhs = (eye + 0.5 * dt * A).tocsr()
        for _ in range(n_steps):
            u = lhs.solve(rhs @ u)
    out = Field(work.box_radius, u.reshape(work.values.shape))
    if config.boundary == LARGE_BOX:
        lo = (work.points_per_dim - V.points_per_dim) // 2
        sl = (slice(lo, lo + V.points_per_dim),) * V.dimension
        out = Field(V.box_radius, out.values[sl].copy())
    return out


def path_potential_sum(V: Field, path: BrownianPath) -> float:
    """Left-point Riemann sum of V along the path (nearest-cell values)."""
    return float(V.nearest_cell_values(path.positions[:-1]).sum()) * path.dt


def feynman_kac(
    V: Field,
    t: float,
    x,
    n_paths: int,
    dt: float,
    seed: int,
    kappa: float = 1.0,
    box_radius: float | None = None,
) -> tuple[float, float]:
    """Monte-Carlo estimate of E_x[exp(int_0^t V(W_s) ds) 1{stay in Q_r}].

    Paths are simulated in blocks; the integral is the left-point sum at
    resolution dt with nearest-cell V (exact for constant V).  Returns
    (estimate, standard error).
    """
    d = V.dimension
    x0 = np.atleast_1d(np.asarray(x, dtype=float))
    n_steps = int(round(t / dt))
    total, total2 = 0.0, 0.0
    block = max(1, min(n_paths, int(2e7 // max(n_steps, 1))))
    done = 0
    stream = 0
    while done < n_paths:
        m = min(block, n_paths - done)
        rng = rng_for(seed, stream)
        stream += 1
        inc = rng.standard_normal((m, n_steps, d)) * math.sqrt(2.0 * kappa * dt)
        pos = np.cumsum(inc, axis=1) + x0
        acc = V.nearest_cell_values(x0[np.newaxis, :]).item() * np.ones(m)  # left point at W_0
        acc = acc + V.nearest_cell_values(pos[:, :-1, :].reshape(-1, d)).reshape(m, n_steps - 1).sum(axis=1)
        vals = np.exp(acc * dt)
        if box_radius is not None:
            inside0 = np.max(np.abs(x0)) < box_radius
            stay = np.all(np.abs(pos).max(axis=2) < box_radius, axis=1)
            vals = vals * (stay & inside0)
        total += float(vals.sum())
        total2 += float((vals**2).sum())
        done += m
    mean = total / n_paths
    var = max(total2 / n_paths - mean**2, 0.0)
    stderr = math.sqrt(var / n_paths)
    return mean, stderr


def occupation_measure(path: BrownianPath, box_radius: float, points_per_dim: int):
    """Normalized occupation histogram of the path on the grid cells.

    Returns (points, weights): cell centers visited and the fraction of
    (left-point) time steps spent in each; weights sum to 1.  Positions
    outside the box are clamped into the boundary cells, matching the
    nearest-cell potential evaluation.
    """
    d = path.positions.shape[1]
    h = 2.0 * box_radius / points_per_dim
    pos = path.positions[:-1]
    idx = np.floor((pos + box_radius) / h).astype(int)
    idx = np.clip(idx, 0, points_per_dim - 1)
    flat = np.ravel_multi_index(tuple(idx.T), (points_per_dim,) * d)
    counts = np.bincount(flat, minlength=points_per_dim**d).astype(float)
    occupied = np.flatnonzero(counts)
    weights = counts[occupied] / len(pos)
    centers = grid_centers(box_radius, points_per_dim)
    coords = np.unravel_index(occupied, (points_per_dim,) * d)
    points = np.stack([centers[c] for c in coords], axis=-1)
    return points, weights


def exit_time(path: BrownianPath, box_radius: float) -> float | None:
    """First grid time the path leaves the open box Q_r; None if it never does."""
    outside = np.max(np.abs(path.positions), axis=1) >= box_radius
    hits = np.flatnonzero(outside)
    if hits.size == 0:
        return None
    return float(path.times[hits[0]])
