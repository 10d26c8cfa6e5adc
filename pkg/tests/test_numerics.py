import math

import numpy as np
import pytest
from scipy import special

from cp_entangle.numerics import (
    DEFAULT_QUADRATURE,
    IntegralResult,
    QuadratureError,
    QuadratureSpec,
    bessel_j,
    bessel_j0_j2,
    integrate_evanescent,
    integrate_finite,
)


# ---------------------------------------------------------------------------
# Bessel kernels
# ---------------------------------------------------------------------------


def _series_j0(x, terms=60):
    # independent power-series oracle (plain floats, no vectorization)
    total, term = 0.0, 1.0
    w = 0.25 * x * x
    for k in range(terms):
        total += term
        term *= -w / ((k + 1) ** 2)
    return total


def test_bessel_trivial_values():
    assert bessel_j(0, 0.0) == 1.0
    assert bessel_j(1, 0.0) == 0.0
    assert bessel_j(2, 0.0) == 0.0


def test_bessel_first_j0_root():
    # bracket the first root of the series oracle, then check bessel_j there
    lo, hi = 2.0, 3.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if _series_j0(lo) * _series_j0(mid) <= 0:
            hi = mid
        else:
            lo = mid
    root = 0.5 * (lo + hi)
    assert abs(root - 2.404825557695773) < 1e-12
    assert abs(bessel_j(0, 2.404825557695773)) < 1e-10


@pytest.mark.parametrize("order", [0, 1, 2])
def test_bessel_against_reference(order):
    # dense sweep through all three evaluation bands, incl. the seams
    xs = np.concatenate(
        [
            np.linspace(0.0, 7.98, 500),
            np.linspace(7.98, 8.02, 50),
            np.linspace(8.0, 18.98, 400),
            np.linspace(18.98, 19.02, 50),
            np.linspace(19.0, 200.0, 600),
        ]
    )
    ref = special.jv(order, xs)
    err = np.abs(bessel_j(order, xs) - ref) / np.maximum(1.0, np.abs(ref))
    assert err.max() < 1e-12


def test_bessel_fused_pair_matches_orders():
    xs = np.linspace(0.0, 60.0, 4001)
    j0, j2 = bessel_j0_j2(xs)
    assert np.array_equal(j0, bessel_j(0, xs))
    assert np.array_equal(j2, bessel_j(2, xs))


def test_bessel_recurrence():
    xs = np.linspace(1e-3, 50.0, 2000)
    lhs = bessel_j(2, xs)
    rhs = 2.0 / xs * bessel_j(1, xs) - bessel_j(0, xs)
    assert np.abs(lhs - rhs).max() < 1e-10


def test_bessel_scalar_round_trip():
    out = bessel_j(1, 3.5)
    assert np.ndim(out) == 0
    assert abs(out - special.jv(1, 3.5)) < 1e-13


def test_bessel_rejects_bad_input():
    with pytest.raises(ValueError):
        bessel_j(3, 1.0)
    with pytest.raises(ValueError):
        bessel_j(0, -0.5)
    with pytest.raises(ValueError):
        bessel_j(0, np.inf)


# ---------------------------------------------------------------------------
# finite-interval quadrature
# ---------------------------------------------------------------------------


def test_integrate_polynomial_exact():
    value, err = integrate_finite(lambda k: 3.0 * k**2, 0.0, 1.0)
    assert abs(value - 1.0) < 1e-13
    assert err < 1e-10


def test_integrate_bessel_weighted_polynomial():
    value, _ = integrate_finite(lambda k: (1 - k**2) * bessel_j(0, 0.0 * k), 0.0, 1.0)
    assert abs(value - 2.0 / 3.0) < 1e-12


def test_integrate_against_trapezoid_oracle():
    # frozen from a 10^6-point trapezoid of k^2 cos(0.4 k) on [0, 1]
    frozen = 0.3174850836625024
    k = np.linspace(0.0, 1.0, 1_000_001)
    oracle = np.trapezoid(k**2 * np.cos(0.4 * k), k)
    assert abs(oracle - frozen) < 1e-12
    value, _ = integrate_finite(lambda k: k**2 * np.cos(0.4 * k), 0.0, 1.0)
    assert abs(value - frozen) < 2e-11


def test_integrate_linearity():
    rng = np.random.default_rng(42)
    for _ in range(10):
        ca = rng.normal(size=4)
        cb = rng.normal(size=4)
        alpha, beta = rng.normal(size=2)
        fa = lambda k: np.polyval(ca, k)
        fb = lambda k: np.polyval(cb, k)
        combo = lambda k: alpha * np.polyval(ca, k) + beta * np.polyval(cb, k)
        va, ea = integrate_finite(fa, -1.0, 2.0)
        vb, eb = integrate_finite(fb, -1.0, 2.0)
        vc, ec = integrate_finite(combo, -1.0, 2.0)
        assert abs(vc - (alpha * va + beta * vb)) <= abs(alpha) * ea + abs(beta) * eb + ec + 1e-12


def test_integrate_complex_integrand():
    value, _ = integrate_finite(lambda k: np.exp(1j * k), 0.0, np.pi)
    assert abs(value - (np.sin(np.pi) + 1j * (1 - np.cos(np.pi)))) < 1e-12


def test_integrate_breakpoints_do_not_change_value():
    f = lambda k: np.cos(3.0 * k)
    plain, _ = integrate_finite(f, 0.0, 2.0)
    seeded, _ = integrate_finite(f, 0.0, 2.0, breakpoints=(0.3, 0.7, 1.1))
    assert abs(plain - seeded) < 1e-12


def test_integrate_rejects_bad_interval():
    with pytest.raises(ValueError):
        integrate_finite(lambda k: k, 1.0, 0.0)
    with pytest.raises(ValueError):
        integrate_finite(lambda k: k, 0.0, np.inf)


def test_integrate_nonconvergence_carries_estimate():
    spec = QuadratureSpec(max_subdivisions=1)
    # narrow spike needs far more than one bisection
    f = lambda k: 1.0 / ((k - 0.3) ** 2 + 1e-8)
    with pytest.raises(QuadratureError) as excinfo:
        integrate_finite(f, 0.0, 1.0, spec)
    assert excinfo.value.estimate is not None
    assert excinfo.value.error > 0


def test_quadrature_spec_validation():
    with pytest.raises(ValueError):
        QuadratureSpec(relative_tolerance=0.0)
    with pytest.raises(ValueError):
        QuadratureSpec(absolute_tolerance=-1.0)
    with pytest.raises(ValueError):
        QuadratureSpec(max_subdivisions=0)
    with pytest.raises(ValueError):
        QuadratureSpec(evanescent_cutoff_scale=0.0)


# ---------------------------------------------------------------------------
# evanescent-branch quadrature
# ---------------------------------------------------------------------------


def test_evanescent_pure_exponential():
    value, err = integrate_evanescent(lambda k: np.exp(-2.0 * k), 2.0)
    assert abs(value - 0.5) < 1e-10
    assert err < 1e-8


def test_evanescent_gamma_closed_form():
    # \int k^2 exp(-0.4 k) dk = 2 / 0.4^3
    value, _ = integrate_evanescent(lambda k: k**2 * np.exp(-0.4 * k), 0.4)
    assert abs(value - 31.25) < 1e-8


def test_evanescent_reflection_type_integrand_against_oracle():
    # evanescent branch of a dissipative-coupling integrand at x=1, z=0.2:
    # k^2 (J0 - J2)(x sqrt(1+k^2)) exp(-2 k z); frozen 10^6-point trapezoid
    frozen = -2.8370687991386037
    k = np.linspace(0.0, 100.0, 1_000_001)
    s = np.sqrt(1.0 + k**2)
    oracle = np.trapezoid(
        k**2 * (special.j0(s) - special.jv(2, s)) * np.exp(-0.4 * k), k
    )
    assert abs(oracle - frozen) < 1e-9

    def f(kap):
        sq = np.sqrt(1.0 + kap**2)
        j0, j2 = bessel_j0_j2(sq)
        return kap**2 * (j0 - j2) * np.exp(-0.4 * kap)

    value, err = integrate_evanescent(f, 0.4)
    assert abs(value - frozen) < 1e-8


def test_evanescent_cutoff_insensitive():
    def f(kap):
        sq = np.sqrt(1.0 + kap**2)
        j0, j2 = bessel_j0_j2(sq)
        return kap**2 * (j0 - j2) * np.exp(-0.4 * kap)

    base = integrate_evanescent(f, 0.4, QuadratureSpec())
    doubled = integrate_evanescent(
        f, 0.4, QuadratureSpec(evanescent_cutoff_scale=80.0, max_subdivisions=400)
    )
    assert abs(base.value - doubled.value) <= base.error + doubled.error


def test_evanescent_rejects_nonpositive_scale():
    with pytest.raises(ValueError):
        integrate_evanescent(lambda k: np.exp(-k), 0.0)
    with pytest.raises(ValueError):
        integrate_evanescent(lambda k: np.exp(-k), -1.0)


def test_result_type():
    result = integrate_finite(lambda k: k, 0.0, 1.0)
    assert isinstance(result, IntegralResult)
    assert result.error <= max(
        DEFAULT_QUADRATURE.relative_tolerance * abs(result.value),
        DEFAULT_QUADRATURE.absolute_tolerance,
    )
