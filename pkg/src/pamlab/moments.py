"""Moment estimation over noise realizations and intermittency diagnostics.

Two independent estimators of the p-th moment are provided: direct averaging
of solver outputs over noise draws, and (for integer p) the replica route in
which the Gaussian noise is integrated out exactly, leaving an expectation
over p independent Brownian paths of the pairwise covariance functional.
The two agree up to Monte-Carlo error and box effects, which is one of the
acceptance checks.

Moment estimation is exponentially hard in the cumulant scale
eps^(-omega) (p t)^2 gamma_1(0) / 2; estimate_moment refuses to run when that
predicted scale exceeds ``hardness_guard`` (default 20).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InsufficientBudget
from .fields import Field
from .kernels import MollifiedKernelSpec, mollified_gamma, scaling_exponent
from .noise import rng_for, sample_noise
from .pam import MC, PDE, SPECTRAL, PamSolveConfig, feynman_kac, solve_pde
from .scaling import Regime, scaling_functions


@dataclass(frozen=True)
class MomentEstimate:
    p: float
    t: float
    epsilon: float
    value: float
    log_value: float
    stderr_log: float
    n_noise: int
    n_paths: int

    def __post_init__(self):
        if self.value <= 0:
            raise ValueError("moment estimates are positive")


def _jackknife_log_mean(samples: np.ndarray) -> tuple[float, float]:
    """log of the sample mean and its jackknife standard error."""
    n = len(samples)
    total = samples.sum()
    log_mean = math.log(total / n)
    if n < 2:
        return log_mean, math.inf
    leave_one = np.log((total - samples) / (n - 1))
    return log_mean, math.sqrt((n - 1) / n * float(np.sum((leave_one - leave_one.mean()) ** 2)))


def cumulant_scale(mkernel: MollifiedKernelSpec, p: float, t: float) -> float:
    """eps^(-omega) (p t)^2 gamma_1(0) / 2, the sampling-hardness scale."""
    omega = scaling_exponent(mkernel.base)
    g1 = mollified_gamma(MollifiedKernelSpec(mkernel.base, 1.0), np.zeros(mkernel.base.dimension))
    return mkernel.epsilon ** (-omega) * (p * t) ** 2 * g1 / 2.0


def _solution_samples(
    mkernel: MollifiedKernelSpec,
    t: float,
    x,
    n_noise: int,
    solver: PamSolveConfig,
    seed: int,
    kappa: float,
    box_radius: float,
    points_per_dim: int,
) -> np.ndarray:
    x0 = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.empty(n_noise)
    for i in range(n_noise):
        xi = sample_noise(mkernel, box_radius, points_per_dim, seed=seed, stream=i)
        if solver.method in (PDE, SPECTRAL):
            u = solve_pde(xi, t, solver, kappa=kappa)
            out[i] = float(u.interp(x0[np.newaxis, :])[0])
        else:
            est, _ = feynman_kac(
                xi, t, x0, solver.n_paths, solver.dt, seed=seed * 1_000_003 + i,
                kappa=kappa, box_radius=box_radius,
            )
            out[i] = est
    return out


def estimate_moment(
    mkernel: MollifiedKernelSpec,
    t: float,
    p: float,
    x,
    n_noise: int,
    solver: PamSolveConfig,
    seed: int,
    kappa: float = 1.0,
    box_radius: float = 4.0,
    points_per_dim: int = 128,
    hardness_guard: float = 20.0,
) -> MomentEstimate:
    """Mean of u_eps(t, x)^p over independent noise draws.

    Each draw is solved by the configured method; the log-mean carries a
    jackknife standard error.  Draws are keyed (seed, draw index) so worker
    order cannot change the result.
    """
    if p <= 0 or t <= 0:
        raise ValueError("p and t must be positive")
    scale = cumulant_scale(mkernel, p, t)
    if scale > hardness_guard:
        raise InsufficientBudget(
            f"predicted cumulant scale {scale:.2f} exceeds the guard {hardness_guard}"
        )
    samples = _solution_samples(
        mkernel, t, x, n_noise, solver, seed, kappa, box_radius, points_per_dim
    )
    vals = samples**p
    log_mean, se = _jackknife_log_mean(vals)
    return MomentEstimate(
        p=p,
        t=t,
        epsilon=mkernel.epsilon,
        value=float(vals.mean()),
        log_value=log_mean,
        stderr_log=se,
        n_noise=n_noise,
        n_paths=solver.n_paths if solver.method == MC else 0,
    )


def replica_integrand(mkernel: MollifiedKernelSpec, positions: np.ndarray, dt: float) -> float:
    """exp((1/2) sum over all left-point pairs of gamma_eps(X_a - X_b) dt^2).

    ``positions`` stacks the left points of all p paths; the double time
    integral over every ordered path pair is exactly this full pairwise sum.
    """
    diffs = positions[:, np.newaxis, :] - positions[np.newaxis, :, :]
    cov = mollified_gamma(mkernel, diffs)
    return math.exp(0.5 * dt**2 * float(np.sum(cov)))


def replica_moment(
    mkernel: MollifiedKernelSpec,
    t: float,
    p: int,
    n_paths: int,
    dt: float,
    seed: int,
    kappa: float = 1.0,
) -> tuple[float, float]:
    """Replica estimate of the p-th moment (integer p): noise integrated out.

    Averages, over ``n_paths`` independent replica sets of p Brownian paths,
    exp((1/2) sum_{j,k} double-int gamma_eps(W^j_u - W^k_v) du dv).
    Returns (estimate, standard error).
    """
    if not (isinstance(p, (int, np.integer)) and p >= 1):
        raise ValueError("replica_moment needs an integer p >= 1 (Gaussian integration)")
    d = mkernel.base.dimension
    n_steps = int(round(t / dt))
    total, total2 = 0.0, 0.0
    for r in range(n_paths):
        rng = rng_for(seed, r)
        inc = rng.standard_normal((p, n_steps, d)) * math.sqrt(2.0 * kappa * dt)
        pos = np.cumsum(inc, axis=1)
        left = np.concatenate([np.zeros((p, 1, d)), pos[:, :-1, :]], axis=1)
        val = replica_integrand(mkernel, left.reshape(-1, d), dt)
        total += val
        total2 += val**2
    mean = total / n_paths
    var = max(total2 / n_paths - mean**2, 0.0)
    return mean, math.sqrt(var / n_paths)


def normalized_log_moment(
    est: MomentEstimate, regime: Regime, omega: float, gamma1_at_0: float
) -> float:
    """(log <u^p> - H_eps(p t)) / beta_eps(p t), the statistic of the limit law."""
    triple = scaling_functions(regime, est.epsilon, est.p * est.t, gamma1_at_0, omega)
    return (est.log_value - triple.H) / triple.beta


def rate_function_scale(omega: float, epsilon: float) -> float:
    """A(eps): eps^(-2) at criticality, eps^(-omega) beyond, 1 below (t-scans)."""
    if omega > 2:
        return epsilon ** (-omega)
    if omega == 2:
        return epsilon**-2
    return 1.0


def intermittency_scan(
    mkernel_template,
    t: float,
    epsilons,
    ps,
    budget: int,
    solver: PamSolveConfig,
    seed: int,
    kappa: float = 1.0,
    box_radius: float = 4.0,
    points_per_dim: int = 128,
    x=None,
    n_bootstrap: int = 1000,
) -> dict:
    """Scan log-moment estimates over (eps, p) with common random numbers.

    For each eps the same ``budget`` noise draws feed every p (common random
    numbers stabilize the ratio comparisons).  Reports per-(eps, p) rows and
    whether p -> ell_hat_p / p is strictly increasing at the smallest eps,
    with bootstrap confidence.  Raises InsufficientBudget when the bootstrap
    spread of a consecutive gap exceeds the gap itself.
    """
    ps = sorted(ps)
    if len(ps) < 3:
        raise ValueError("need at least 3 p-values")
    epsilons = sorted(epsilons, reverse=True)
    base = mkernel_template.base if isinstance(mkernel_template, MollifiedKernelSpec) else mkernel_template
    omega = scaling_exponent(base)
    if x is None:
        x = np.zeros(base.dimension)

    rows = []
    per_eps_samples = {}
    for eps in epsilons:
        mk = MollifiedKernelSpec(base, eps)
        samples = _solution_samples(
            mk, t, x, budget, solver, seed, kappa, box_radius, points_per_dim
        )
        per_eps_samples[eps] = samples
        A = rate_function_scale(omega, eps)
        for p in ps:
            vals = samples**p
            log_mean, se = _jackknife_log_mean(vals)
            rows.append(
                {
                    "epsilon": eps,
                    "t": t,
                    "p": p,
                    "log_moment": log_mean,
                    "stderr": se,
                    "A": A,
                    "ell_hat": log_mean / A,
                    "ell_hat_over_p": log_mean / (A * p),
                }
            )

    eps_min = epsilons[-1]
    samples = per_eps_samples[eps_min]
    A = rate_function_scale(omega, eps_min)
    point = np.array([math.log(np.mean(samples**p)) / (A * p) for p in ps])
    rng = rng_for(seed, 10**9)
    n = len(samples)
    boot = np.empty((n_bootstrap, len(ps)))
    for b in range(n_bootstrap):
        res = samples[rng.integers(0, n, size=n)]
        boot[b] = [math.log(np.mean(res**p)) / (A * p) for p in ps]
    increasing = np.all(np.diff(boot, axis=1) > 0, axis=1)
    confidence = float(np.mean(increasing))
    gaps = np.diff(point)
    gap_se = np.std(np.diff(boot, axis=1), axis=0, ddof=1)
    flat = bool(np.all(np.abs(gaps) < 1e-12))
    if not flat and np.any(gap_se > np.abs(gaps)):
        raise InsufficientBudget(
            f"bootstrap spread {gap_se} exceeds the consecutive gaps {gaps}"
        )
    verdict = "flat" if flat else ("increasing" if np.all(gaps > 0) else "not-monotone")
    return {
        "rows": rows,
        "verdict": verdict,
        "confidence": confidence if not flat else 1.0,
        "gaps": gaps.tolist(),
        "gap_stderr": gap_se.tolist(),
        "epsilon_tested": eps_min,
    }
