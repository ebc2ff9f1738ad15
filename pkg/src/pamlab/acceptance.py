"""The acceptance suite: one function per criterion, shared by the CLI
command and the pytest module.

Each criterion pins its own grid sizes, seeds, and tolerances; nothing is
calibrated at run time.  A criterion returns a CriterionResult with a
human-readable detail string so failures are diagnosable from the output.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .fields import Field, field_from_function, grid_centers
from .kernels import KernelSpec, MollifiedKernelSpec, mollified_gamma
from .moments import (
    cumulant_scale,
    estimate_moment,
    intermittency_scan,
    replica_moment,
)
from .noise import MollifiedKernelSpec as _MK  # noqa: F401  (re-export convenience)
from .noise import mgf_linear_functional, sample_noise_batch
from .pam import PamSolveConfig, feynman_kac, solve_pde
from .scaling import (
    CRT1,
    CRT2,
    SUB1,
    SUB2,
    SUB3,
    SUP,
    PowerLawSequence,
    Regime,
    classify_regime,
    scaling_functions,
)
from .spectral import dirichlet_eigens, spectral_solution
from .variational import (
    BEST_CONSTANT,
    CRT,
    CURVATURE_WELL,
    SUB,
    SUB_MOLLIFIED,
    FunctionalSpec,
    chi_scaled,
    dirichlet_energy,
    f_coord,
    hessian_sigma,
    interaction,
    solve_maximizer,
    tail_exponent,
)


@dataclass
class CriterionResult:
    index: int
    name: str
    passed: bool
    detail: str
    elapsed: float

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] criterion {self.index:2d} {self.name}: {self.detail} ({self.elapsed:.1f}s)"


def _run(index, name, fn) -> CriterionResult:
    start = time.perf_counter()
    try:
        passed, detail = fn()
    except Exception as exc:  # a crash is a failure with the exception as detail
        passed, detail = False, f"raised {type(exc).__name__}: {exc}"
    return CriterionResult(index, name, passed, detail, time.perf_counter() - start)


# --- 1 -----------------------------------------------------------------


def criterion_white_hartree():
    kern = KernelSpec("white", 1.0, 1)
    res = solve_maximizer(FunctionalSpec(SUB, kern, 1.0), 20.0, 512, tol=1e-7)
    target = 1.0 / 48.0
    rel = abs(res.value / target - 1.0)
    f = res.maximizer
    z = f.barycenter()[0]
    oracle = field_from_function(
        20.0, 512, 1, lambda x: (1.0 / (2.0 * math.sqrt(2.0))) / np.cosh((x[..., 0] - z) / 4.0)
    )
    dist = f.with_values(f.values - oracle.values).l2_norm()
    ok = rel <= 0.01 and dist <= 0.02
    return ok, f"value {res.value:.6f} vs 1/48 (rel {rel:.2e} <= 1e-2), sech L2 dist {dist:.4f} <= 0.02"


# --- 2 -----------------------------------------------------------------


def criterion_gk_constant():
    mk = MollifiedKernelSpec(KernelSpec("white", 1.0, 1), 1.0)
    Sigma = hessian_sigma(mk)
    s_ref = 1.0 / math.sqrt(2.0 * math.pi)
    res = solve_maximizer(
        FunctionalSpec(CURVATURE_WELL, mk.base, 1.0, sigma_matrix=Sigma), 12.0, 256, tol=1e-7
    )
    target = math.sqrt(1.0 * Sigma[0, 0] / 2.0)
    rel = abs(res.value / target - 1.0)
    sig_rel = abs(Sigma[0, 0] / s_ref - 1.0)
    ok = rel <= 0.01 and sig_rel <= 1e-5
    return ok, f"Sigma {Sigma[0, 0]:.6f} (rel {sig_rel:.1e}), chi {res.value:.6f} vs sqrt(kappa Sigma/2) rel {rel:.2e} <= 1e-2"


# --- 3 -----------------------------------------------------------------


def criterion_scaling_identity():
    kern = KernelSpec("riesz", 1.0, 1, omega=0.5)
    spec = FunctionalSpec(SUB, kern, 1.0)
    r, n = 16.0, 512
    chi1 = chi_scaled(spec, 1.0, r, n, tol=1e-7).value
    errs = {}
    for c in (0.5, 2.0):
        chic = chi_scaled(spec, c, r, n, tol=1e-7).value
        errs[c] = abs((chic / chi1) / c ** (4.0 / 1.5) - 1.0)
    ok = all(e <= 0.01 for e in errs.values())
    return ok, f"ratio errors c=0.5: {errs[0.5]:.2e}, c=2: {errs[2.0]:.2e} (tol 1e-2)"


# --- 4 -----------------------------------------------------------------


def criterion_monotone_ladder():
    kern = KernelSpec("riesz", 1.0, 1, omega=0.5)
    r, n = 16.0, 512
    M = solve_maximizer(FunctionalSpec(SUB, kern, 1.0), r, n, tol=1e-7).value
    tol_opt = 1e-6
    prev_val, prev_gap = -math.inf, math.inf
    gaps = []
    for c in (0.8, 0.4, 0.2, 0.1, 0.05):
        val = solve_maximizer(
            FunctionalSpec(SUB_MOLLIFIED, kern, 1.0, frak_c=c, p=1.0), r, n, tol=1e-7
        ).value
        gap = M - val
        if val < prev_val - tol_opt or gap > prev_gap + tol_opt:
            return False, f"monotonicity broken at frak_c={c}: val {val:.8f}, gap {gap:.2e}"
        prev_val, prev_gap = val, gap
        gaps.append(gap)
    return True, f"M {M:.6f}; gaps {['%.2e' % g for g in gaps]} nonincreasing, values nondecreasing"


# --- 5 -----------------------------------------------------------------


def criterion_critical_threshold():
    kern = KernelSpec("white", 1.0, 2)
    kappa, t = 1.0, 1.0
    G = solve_maximizer(FunctionalSpec(BEST_CONSTANT, kern, kappa), 8.0, 128, tol=1e-6).value
    thr = 2.0 * kappa / (t * G)

    def mcrt(p):
        return solve_maximizer(
            FunctionalSpec(CRT, kern, kappa, p=p, t=t), 8.0, 96, tol=1e-6, max_iter=40000
        ).value

    lo = mcrt(0.5 * thr)
    hi = mcrt(2.0 * thr)
    q, p = 2.0 * thr, 4.0 * thr
    Mq, Mp = hi, mcrt(4.0 * thr)
    incr_ok = (Mp - Mq) >= ((p - q) / q) * Mq - 1e-3
    ok = lo <= 1e-3 and hi >= 10e-3 and incr_ok
    return ok, (
        f"G {G:.4f}, thr {thr:.2f}; M(0.5thr) {lo:.2e} <= 1e-3, M(2thr) {hi:.3f} >= 1e-2, "
        f"strict-increase margin {(Mp - Mq) - ((p - q) / q * Mq - 1e-3):.3f} >= 0"
    )


# --- 6 -----------------------------------------------------------------


def criterion_tail_identity():
    thetas = [0.5, 1.0, 2.0, 4.0, 8.0]
    omegas = [0.25, 0.75, 1.0, 1.5]
    ms = [0.2, 1.0, 3.0, 10.0, 30.0]
    count = 0
    for th in thetas:
        for om in omegas:
            for m in ms:
                tail_exponent(th, om, m)  # raises beyond 1e-8 internally
                count += 1
    spot = tail_exponent(3.0, 1.0, 1.0)
    ok = count == 100 and abs(spot + 2.0) < 1e-12
    return ok, f"{count} lattice points at 1e-8; tail(3,1,1) = {spot:.12f} (= -2)"


# --- 7 -----------------------------------------------------------------


def criterion_solver_cross_validation():
    mk = MollifiedKernelSpec(KernelSpec("white", 1.0, 1), 1.0)
    kappa, t, r, n = 1.0, 1.0, 4.0, 256
    cfg = PamSolveConfig(method="pde", dt=1e-3)
    from .noise import sample_noise

    worst_rel, worst_z = 0.0, 0.0
    for i in range(10):
        xi = sample_noise(mk, r, n, seed=1300 + i)
        u_pde = solve_pde(xi, t, cfg, kappa=kappa)
        dec = dirichlet_eigens(xi, kappa, n - 1)
        u_spec = spectral_solution(dec, t)
        rel = float(np.max(np.abs(u_pde.values - u_spec.values)) / np.max(np.abs(u_spec.values)))
        worst_rel = max(worst_rel, rel)
        x0 = xi.axis_centers()[n // 2]
        est, se = feynman_kac(xi, t, [x0], 10_000, 5e-4, seed=77 + i, kappa=kappa, box_radius=r)
        z = abs(est - float(u_pde.values[n // 2])) / se
        worst_z = max(worst_z, z)
    ok = worst_rel <= 1e-4 and worst_z <= 3.0
    return ok, f"PDE-vs-spectral worst rel {worst_rel:.2e} <= 1e-4; FK worst |z| {worst_z:.2f} <= 3"


# --- 8 -----------------------------------------------------------------


def criterion_mgf_identity():
    mk = MollifiedKernelSpec(KernelSpec("riesz", 1.0, 1, omega=0.5), 0.5)
    r, n, n_draws = 4.0, 32, 100_000
    draws = sample_noise_batch(mk, r, n, seed=314, n_samples=n_draws)
    centers = grid_centers(r, n)
    rng = np.random.default_rng(2718)
    worst = 0.0
    for _ in range(5):
        k = 3
        idx = rng.choice(n, size=k, replace=False)
        w = rng.uniform(-0.4, 0.4, size=k)
        lam = rng.uniform(0.3, 0.8)
        exact = mgf_linear_functional(mk, centers[idx], w, lam)
        lin = draws[:, idx] @ w
        samp = np.exp(lam * lin)
        emp, se = samp.mean(), samp.std(ddof=1) / math.sqrt(n_draws)
        z = abs(emp - exact) / se
        worst = max(worst, z)
    ok = worst <= 3.0
    return ok, f"worst |z| over 5 measures: {worst:.2f} <= 3 ({n_draws} field samples)"


# --- 9 -----------------------------------------------------------------


def criterion_replica_consistency():
    base = KernelSpec("white", 1.0, 2)
    mk = MollifiedKernelSpec(base, 0.7)
    kappa, t = 0.25, 0.5
    scale = cumulant_scale(mk, 1.0, t)
    cfg = PamSolveConfig(method="pde", dt=0.01)
    est = estimate_moment(
        mk, t, 1.0, [0.0625, 0.0625], n_noise=220, solver=cfg, seed=42,
        kappa=kappa, box_radius=4.0, points_per_dim=64,
    )
    rep, rse = replica_moment(mk, t, 1, n_paths=1500, dt=0.01, seed=9, kappa=kappa)
    comb = math.sqrt(rse**2 + (est.stderr_log * est.value) ** 2)
    z = abs(est.value - rep) / comb
    ok = z <= 3.0 and scale <= 5.0
    return ok, f"direct {est.value:.4f} vs replica {rep:.4f}, |z| {z:.2f} <= 3 (cumulant scale {scale:.2f} <= 5)"


# --- 10 ----------------------------------------------------------------


def criterion_intermittency_trend():
    kern = KernelSpec("white", 1.5, 2)
    kappa, t = 0.05, 1.0
    G = solve_maximizer(FunctionalSpec(BEST_CONSTANT, kern, kappa), 6.0, 64, tol=1e-6).value
    t_threshold = 2.0 * kappa / (1.0 * G)  # blowup-candidate time for p = 1
    if not t > t_threshold:
        return False, f"t = {t} not above the p=1 threshold {t_threshold:.3f}"
    cfg = PamSolveConfig(method="pde", dt=0.01)
    scan = intermittency_scan(
        MollifiedKernelSpec(kern, 0.5),
        t,
        epsilons=[0.5, 0.35, 0.25],
        ps=[1.0, 2.0, 3.0],
        budget=160,
        solver=cfg,
        seed=5150,
        kappa=kappa,
        box_radius=2.0,
        points_per_dim=64,
        x=[0.03125, 0.03125],
    )
    ok = scan["verdict"] == "increasing" and scan["confidence"] >= 0.95
    return ok, (
        f"t {t} > threshold {t_threshold:.3f}; verdict {scan['verdict']} at eps "
        f"{scan['epsilon_tested']}, bootstrap confidence {scan['confidence']:.3f} >= 0.95"
    )


# --- 11 ----------------------------------------------------------------


def criterion_rearrangement_suite():
    kern = KernelSpec("fractional", 1.0, 2, omegas=(0.5, 0.7))
    kappa, r = 1.0, 6.0
    rng = np.random.default_rng(2024)
    K = 4
    coeffs = [
        (rng.normal(size=(K, K)), rng.uniform(0, 2 * np.pi, size=(K, K, 2))) for _ in range(50)
    ]

    def smooth_field(n, i):
        a, ph = coeffs[i]
        c = grid_centers(r, n)
        X, Y = np.meshgrid(c, c, indexing="ij")
        vals = np.zeros((n, n))
        for k1 in range(K):
            for k2 in range(K):
                vals += a[k1, k2] * np.cos(k1 * np.pi * X / r + ph[k1, k2, 0]) * np.cos(
                    k2 * np.pi * Y / r + ph[k1, k2, 1]
                )
        vals = np.abs(vals) * np.exp(-(X**2 + Y**2) / (2 * (r / 2.5) ** 2))
        return Field(r, vals).normalized()

    slack_constant = 1e-3  # frozen; observed violations are zero (see detail)
    worst_norm_dev, worst_viol = 0.0, {48: 0.0, 96: 0.0}
    for n in (48, 96):
        h = 2 * r / n
        for i in range(50):
            f = smooth_field(n, i)
            fc = f_coord(f)
            l2_dev = abs(f.l2_norm() - fc.l2_norm())
            l4_dev = abs(
                float(np.sum(f.values**4)) ** 0.25 - float(np.sum(fc.values**4)) ** 0.25
            ) * h ** (2 / 4)
            worst_norm_dev = max(worst_norm_dev, l2_dev, l4_dev)
            obj = interaction(f, kern, 0.0) - dirichlet_energy(f, kappa)
            objc = interaction(fc, kern, 0.0) - dirichlet_energy(fc, kappa)
            worst_viol[n] = max(worst_viol[n], obj - objc)
        if worst_viol[n] > slack_constant * h:
            return False, f"violation {worst_viol[n]:.2e} beyond slack {slack_constant * h:.2e} at n={n}"
    ok = worst_norm_dev <= 1e-12
    return ok, (
        f"norms preserved to {worst_norm_dev:.1e} <= 1e-12; worst objective violations "
        f"{worst_viol[48]:.1e} (n=48), {worst_viol[96]:.1e} (n=96) within halving slack 1e-3*h"
    )


# --- 12 ----------------------------------------------------------------


def criterion_scaling_table():
    checked = 0
    eps_grid = [0.1, 0.5, 1.0]
    t_grid = [0.5, 2.0, 16.0]

    def row_reference(tag, eps, t, g1, omega):
        if tag in (SUB1, SUP):
            return (
                eps ** ((2 + omega) / 4) * t**-0.25,
                eps ** (-(2 + omega) / 2) * t**1.5,
                eps**-omega * t**2 * g1 / 2,
            )
        if tag in (SUB2, SUB3):
            return (t ** (-1 / (2 - omega)), t ** ((4 - omega) / (2 - omega)), 0.0)
        if tag == CRT1:
            return (eps * t**-0.25, eps**-2 * t**1.5, eps**-2 * t**2 * g1 / 2)
        return (eps, eps**-2 * t, 0.0)

    cases = []
    for tag, omega in [
        (SUB1, 0.5), (SUB2, 1.0), (SUB3, 1.5), (CRT1, 2.0), (CRT2, 2.0), (SUP, 3.0),
    ]:
        for eps in eps_grid:
            for t in t_grid[: 2 if tag == CRT2 else 3]:
                cases.append((tag, omega, eps, t))
    cases = cases[:30] if len(cases) > 30 else cases
    g1 = 0.7
    for tag, omega, eps, t in cases:
        regime = Regime(tag, frak_c=1.0 if tag == SUB2 else None, limit_t=t if tag == CRT2 else None)
        triple = scaling_functions(regime, eps, t, g1, omega)
        ref = row_reference(tag, eps, t, g1, omega)
        for got, want in zip((triple.alpha, triple.beta, triple.H), ref):
            if not math.isclose(got, want, rel_tol=1e-14, abs_tol=0.0):
                return False, f"row {tag} at eps={eps}, t={t}: got {got!r}, want {want!r}"
        if not math.isclose(triple.beta, t / triple.alpha**2, rel_tol=1e-12):
            return False, f"beta != t/alpha^2 in row {tag}"
        checked += 1

    classified = [
        classify_regime(1.0, PowerLawSequence(1, 0), PowerLawSequence(1, 1)).tag == SUB1,
        classify_regime(1.0, PowerLawSequence(1, -1), PowerLawSequence(1, 1)).tag == SUB2,
        classify_regime(1.0, PowerLawSequence(1, -2), PowerLawSequence(1, 1)).tag == SUB3,
        classify_regime(2.0, PowerLawSequence(1, 0), PowerLawSequence(2, 1)).tag == CRT1,
        classify_regime(2.0, PowerLawSequence(1, -1), PowerLawSequence(3, 0)).tag == CRT2,
        classify_regime(3.0, PowerLawSequence(1, -1), PowerLawSequence(1, 0)).tag == SUP,
        classify_regime(1.0, PowerLawSequence(0.5, -1), PowerLawSequence(2, 1)).frak_c
        == 0.5 * 2.0,
    ]
    ok = checked >= 30 and all(classified)
    return ok, f"{checked} table rows reproduced exactly; all 6 regime tags classified"


_CRITERIA = [
    ("white-noise Hartree oracle", criterion_white_hartree),
    ("smooth-noise constant oracle", criterion_gk_constant),
    ("interaction scaling identity", criterion_scaling_identity),
    ("mollified ladder monotone convergence", criterion_monotone_ladder),
    ("critical threshold consistency", criterion_critical_threshold),
    ("tail-exponent identity", criterion_tail_identity),
    ("solver cross-validation", criterion_solver_cross_validation),
    ("Gaussian MGF identity", criterion_mgf_identity),
    ("replica consistency", criterion_replica_consistency),
    ("finite-time intermittency trend", criterion_intermittency_trend),
    ("rearrangement suite", criterion_rearrangement_suite),
    ("scaling table and regimes", criterion_scaling_table),
]


def run_criterion(index: int) -> CriterionResult:
    name, fn = _CRITERIA[index - 1]
    return _run(index, name, fn)


def run_all(printer=print) -> list[CriterionResult]:
    results = []
    for i in range(1, len(_CRITERIA) + 1):
        res = run_criterion(i)
        results.append(res)
        if printer:
            printer(res.line())
    return results
