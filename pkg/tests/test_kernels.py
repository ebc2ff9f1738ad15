import math

import numpy as np
import pytest
from scipy import integrate, stats

from pamlab.errors import DistributionalKernel, SingularPoint
from pamlab.kernels import (
    KernelSpec,
    MollifiedKernelSpec,
    gamma_hat,
    gamma_value,
    gaussian_kernel,
    mollified_gamma,
    mollifier_hat,
    riesz_ft_constant,
    scaling_exponent,
    smoothed_power,
)

WHITE1 = KernelSpec("white", 1.0, 1)
RIESZ_HALF = KernelSpec("riesz", 1.0, 1, omega=0.5)
FRAC = KernelSpec("fractional", 1.0, 2, omegas=(0.5, 0.7))


def test_scaling_exponent_examples():
    assert scaling_exponent(WHITE1) == 1.0
    assert scaling_exponent(FRAC) == pytest.approx(1.2, abs=1e-15)
    assert scaling_exponent(RIESZ_HALF) == 0.5


def test_spec_validation():
    with pytest.raises(ValueError):
        KernelSpec("riesz", 1.0, 1, omega=1.5)  # needs omega < d
    with pytest.raises(ValueError):
        KernelSpec("fractional", 1.0, 2, omegas=(0.5,))
    with pytest.raises(ValueError):
        KernelSpec("fractional", 1.0, 2, omegas=(0.5, 1.2))
    with pytest.raises(ValueError):
        KernelSpec("madeup", 1.0, 1)


def test_gamma_value_examples():
    assert gamma_value(RIESZ_HALF, 4.0) == pytest.approx(0.5, rel=1e-15)
    assert gamma_value(FRAC, [4.0, 4.0]) == pytest.approx(0.25 * 4 ** (0.7 - 0.5), rel=1e-12)
    frac_half = KernelSpec("fractional", 1.0, 2, omegas=(0.5, 0.5))
    assert gamma_value(frac_half, [4.0, 4.0]) == pytest.approx(0.25, rel=1e-15)
    with pytest.raises(DistributionalKernel):
        gamma_value(WHITE1, 0.3)
    with pytest.raises(SingularPoint):
        gamma_value(RIESZ_HALF, 0.0)
    with pytest.raises(SingularPoint):
        gamma_value(FRAC, [0.0, 1.0])


def test_homogeneity_property():
    rng = np.random.default_rng(77)
    for _ in range(25):
        c = float(rng.uniform(0.1, 10.0))
        x = float(rng.uniform(0.2, 5.0))
        got = gamma_value(RIESZ_HALF, c * x)
        assert got == pytest.approx(c**-0.5 * gamma_value(RIESZ_HALF, x), rel=1e-13)
        pt = rng.uniform(0.2, 3.0, size=2)
        got2 = gamma_value(FRAC, c * pt)
        assert got2 == pytest.approx(c**-1.2 * gamma_value(FRAC, pt), rel=1e-12)


def test_gamma_hat_white_constant():
    k = KernelSpec("white", 2.0, 1)
    assert gamma_hat(k, 0.37) == pytest.approx(4.0, rel=1e-15)
    assert gamma_hat(k, 0.0) == 4.0


def test_riesz_ft_constant_self_dual():
    # c(1, 1/2) = 1: the kernel is Fourier self-dual; numerical oracle below
    assert riesz_ft_constant(1, 0.5) == pytest.approx(1.0, abs=1e-15)
    assert riesz_ft_constant(3, 1.0) == pytest.approx(1 / math.pi, rel=1e-14)


def test_riesz_ft_numeric_oracle_1d():
    # int |x|^{-1/2} e^{-2 pi i x xi} dx at xi=1, Gaussian-regularized
    def transform(a):
        f = lambda x: x**-0.5 * math.cos(2 * math.pi * x) * math.exp(-a * x * x)
        val, _ = integrate.quad(f, 0, np.inf, limit=400)
        return 2 * val

    seq = [transform(a) for a in (1e-2, 1e-3, 1e-4)]
    assert seq[-1] == pytest.approx(gamma_hat(RIESZ_HALF, 1.0), abs=1e-3)


def test_riesz_ft_numeric_oracle_3d_radial():
    # 3-D radial transform of |x|^{-1} at |xi|=1: (2/rho) int r f(r) sin(2 pi r rho) dr
    def transform(a):
        f = lambda r: math.sin(2 * math.pi * r) * math.exp(-a * r)
        val, _ = integrate.quad(f, 0, np.inf, limit=400)
        return 2 * val

    k3 = KernelSpec("riesz", 1.0, 3, omega=1.0)
    assert transform(1e-5) == pytest.approx(gamma_hat(k3, [1.0, 0.0, 0.0]), abs=1e-3)
    assert gamma_hat(k3, [1.0, 0.0, 0.0]) == pytest.approx(1 / math.pi, rel=1e-12)


def test_mollifier_hat_examples():
    assert mollifier_hat(0.0, [3.0]) == 1.0
    assert mollifier_hat(1.0, [0.0]) == 1.0
    val = mollifier_hat(1.0, 1.0)
    assert val == pytest.approx(math.exp(-2 * math.pi**2), rel=1e-12)
    # quadrature cross-check: transform of the Gaussian kernel itself
    quad_val, _ = integrate.quad(
        lambda x: gaussian_kernel(1.0, x) * math.cos(2 * math.pi * x), -np.inf, np.inf
    )
    assert quad_val == pytest.approx(val, abs=1e-12)


def test_mollified_gamma_white():
    mk = MollifiedKernelSpec(WHITE1, 1.0)
    assert mollified_gamma(mk, 0.0) == pytest.approx(1 / math.sqrt(2 * math.pi), rel=1e-14)


def test_mollified_gamma_riesz_quadrature_oracle():
    mk = MollifiedKernelSpec(RIESZ_HALF, 1.0)
    exact = 2**-0.25 * math.gamma(0.25) / math.sqrt(math.pi)
    assert mollified_gamma(mk, 0.0) == pytest.approx(exact, rel=1e-12)
    # independent quadrature oracle at several offsets
    for x in (0.0, 0.7, 2.3):
        val, _ = integrate.quad(
            lambda y: abs(x - y) ** -0.5 * gaussian_kernel(1.0, y),
            -np.inf,
            np.inf,
            points=[x],
            limit=300,
        )
        assert mollified_gamma(mk, x) == pytest.approx(val, rel=1e-8)


def test_mollified_gamma_ncx2_oracle_d3():
    # E |x - Z|^{-omega} via the noncentral chi-square density, d=3
    k3 = KernelSpec("riesz", 1.0, 3, omega=1.3)
    mk = MollifiedKernelSpec(k3, 1.0)
    for r in (0.0, 1.1, 3.0):
        lam = r * r
        val, _ = integrate.quad(
            lambda y: y ** (-1.3 / 2) * stats.ncx2.pdf(y, 3, lam), 0, np.inf, limit=300
        )
        assert mollified_gamma(mk, [r, 0.0, 0.0]) == pytest.approx(val, rel=1e-7)


def test_mollification_scaling_identity_all_families():
    for kern in (WHITE1, RIESZ_HALF, FRAC):
        d = kern.dimension
        g1 = mollified_gamma(MollifiedKernelSpec(kern, 1.0), np.zeros(d))
        for eps in (0.25, 4.0):
            got = mollified_gamma(MollifiedKernelSpec(kern, eps), np.zeros(d))
            omega = scaling_exponent(kern)
            assert got == pytest.approx(eps**-omega * g1, rel=1e-12)


def test_mollified_gamma_scaling_example():
    mk1 = MollifiedKernelSpec(RIESZ_HALF, 1.0)
    mk4 = MollifiedKernelSpec(RIESZ_HALF, 4.0)
    assert mollified_gamma(mk4, 0.0) == pytest.approx(0.5 * mollified_gamma(mk1, 0.0), rel=1e-12)
    assert mollified_gamma(mk4, 0.0) == pytest.approx(0.85999, abs=5e-5)


def test_fourier_positivity_and_eps_monotonicity():
    xis = np.linspace(0.05, 6.0, 40)
    for kern in (WHITE1, RIESZ_HALF):
        vals = gamma_hat(kern, xis[:, None] if kern.dimension == 1 else xis)
        assert np.all(np.asarray(vals) >= 0)
    # gamma_hat * mollifier_hat nonincreasing in eps for fixed xi
    for xi in (0.1, 1.0, 4.0):
        prev = np.inf
        for eps in (0.0, 0.3, 1.0, 3.0):
            cur = gamma_hat(RIESZ_HALF, xi) * mollifier_hat(eps, xi)
            assert cur <= prev + 1e-15
            prev = cur


def test_quadrature_fourier_consistency():
    # mollified_gamma agrees with the inverse transform of gamma_hat * phat
    mk = MollifiedKernelSpec(RIESZ_HALF, 0.8)
    for x in (0.5, 1.5, 3.0):
        val, _ = integrate.quad(
            lambda nu: gamma_hat(RIESZ_HALF, nu) * mollifier_hat(0.8, nu) * np.cos(2 * np.pi * nu * x),
            0,
            np.inf,
            limit=500,
        )
        assert 2 * val == pytest.approx(mollified_gamma(mk, x), rel=1e-5)
    mkw = MollifiedKernelSpec(WHITE1, 1.0)
    for x in (0.0, 0.9):
        val, _ = integrate.quad(
            lambda nu: mollifier_hat(1.0, nu) * np.cos(2 * np.pi * nu * x), 0, np.inf
        )
        assert 2 * val == pytest.approx(mollified_gamma(mkw, x), rel=1e-9)


def test_fractional_consistency_via_product():
    mk = MollifiedKernelSpec(FRAC, 0.7)
    x = np.array([0.8, 1.7])
    prod = 1.0
    for xi, w in zip(x, FRAC.omegas):
        val, _ = integrate.quad(
            lambda y: abs(xi - y) ** -w * gaussian_kernel(0.7, y), -np.inf, np.inf,
            points=[xi], limit=300,
        )
        prod *= val
    assert mollified_gamma(mk, x) == pytest.approx(prod, rel=1e-8)


def test_smoothed_power_seam_continuity():
    # closed form and asymptotic series meet smoothly at the switch radius
    s = np.array([19.0, 19.99, 20.01, 21.0])
    vals = smoothed_power(1, 0.5, s)
    assert np.all(np.diff(vals) < 0)
    ratio = vals / s**-0.5
    assert np.max(np.abs(np.diff(ratio))) < 1e-4


def test_config_block_roundtrip():
    for kern in (WHITE1, RIESZ_HALF, FRAC, KernelSpec("white", 2.5, 3)):
        text = kern.to_config_block()
        back = KernelSpec.from_config_block(text)
        assert back == kern


def test_gamma_eps_finite_everywhere():
    mk = MollifiedKernelSpec(FRAC, 0.3)
    pts = np.random.default_rng(3).uniform(-2, 2, size=(50, 2))
    vals = mollified_gamma(mk, pts)
    assert np.all(np.isfinite(vals)) and np.all(vals > 0)
