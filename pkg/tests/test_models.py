"""Parameter domain, comparison amplitudes, barrier radii, model constants."""

import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from warpcomp import models

mpmath.mp.dps = 40


def sn_oracle(kappa, lam, s):
    """High-precision boundary amplitude via the closed form."""
    s = mpmath.mpf(s)
    k = mpmath.mpf(kappa)
    l = mpmath.mpf(lam)
    if kappa > 0:
        r = mpmath.sqrt(k)
        return mpmath.cos(r * s) - (l / r) * mpmath.sin(r * s)
    if kappa == 0:
        return 1 - l * s
    m = mpmath.sqrt(-k)
    return mpmath.cosh(m * s) - (l / m) * mpmath.sinh(m * s)


def sn_oracle_der(kappa, lam, s):
    s = mpmath.mpf(s)
    k = mpmath.mpf(kappa)
    l = mpmath.mpf(lam)
    if kappa > 0:
        r = mpmath.sqrt(k)
        return -r * mpmath.sin(r * s) - l * mpmath.cos(r * s)
    if kappa == 0:
        return -l
    m = mpmath.sqrt(-k)
    return m * mpmath.sinh(m * s) - l * mpmath.cosh(m * s)


# ---------------------------------------------------------------------------
# parameter domain
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("n,N,eps", [
    (2, 1.0, 0.0),
    (3, 3.0, 5.7),
    (3, math.inf, 0.99),
    (4, 5.0, 1.99),
    (3, 0.5, 0.4),
    (5, -2.0, -0.5),
])
def test_validate_accepts(n, N, eps):
    chk = models.validate_params(n, N, eps)
    assert chk.ok, chk.reason
    assert 0.0 < chk.c <= 1.0


@pytest.mark.parametrize("n,N,eps,fragment", [
    (3, 2.0, 0.0, "N in ]1,n[ forbidden"),
    (3, 2.999, 0.0, "N in ]1,n[ forbidden"),
    (3, math.nan, 0.0, "]-inf,1] or [n,+inf]"),
    (3, -math.inf, 0.0, "]-inf,1] or [n,+inf]"),
    (3, 1.0, 0.1, "eps must be 0"),
    (4, 5.0, 2.0, "open admissible interval"),
    (4, 5.0, -2.0, "open admissible interval"),
    (3, math.inf, 1.0, "open admissible interval"),
    (3, 5.0, math.nan, "eps must be finite"),
    (1, 5.0, 0.0, "n must be an integer"),
])
def test_validate_rejects(n, N, eps, fragment):
    chk = models.validate_params(n, N, eps)
    assert not chk.ok
    assert fragment in chk.reason


def test_eps_range_table():
    assert models.eps_range(3, 1.0) == 0.0
    assert models.eps_range(3, 3.0) == math.inf
    assert models.eps_range(3, math.inf) == 1.0
    assert models.eps_range(4, 5.0) == pytest.approx(2.0, abs=0)
    assert models.eps_range(3, 0.0) == pytest.approx(math.sqrt(1.0 / 3.0))


def test_structure_constant_limits():
    # N -> inf continuity
    c_inf = models.structure_constant(3, math.inf, 0.5)
    c_big = models.structure_constant(3, 1e9, 0.5)
    assert c_inf == pytest.approx(c_big, rel=1e-8)
    assert c_inf == pytest.approx((1 - 0.25) / 2)
    # N = 1 and N = n pin the constant to 1/(n-1)
    assert models.structure_constant(4, 1.0, 0.0) == pytest.approx(1 / 3)
    assert models.structure_constant(4, 4.0, 17.3) == pytest.approx(1 / 3)


@settings(max_examples=120, deadline=None)
@given(st.integers(2, 6), st.floats(-50.0, 60.0), st.floats(-0.999, 0.999))
def test_structure_constant_in_unit_interval(n, N, frac):
    if 1.0 < N < n:
        return
    emax = models.eps_range(n, N)
    eps = 0.0 if emax == 0.0 else frac * min(emax, 10.0)
    chk = models.validate_params(n, N, eps)
    assert chk.ok
    assert 0.0 < chk.c <= 1.0


# ---------------------------------------------------------------------------
# amplitudes against the high-precision closed form
# ---------------------------------------------------------------------------

KAPPAS = [2.3, 1.0, 0.0, -1.0, -2.7]
LAMS = [-1.2, 0.0, 0.4, 1.0, 2.0]


def test_sn_boundary_matches_mpmath():
    for kappa in KAPPAS:
        for lam in LAMS:
            for s in np.linspace(0.0, 2.5, 11):
                val, der = models.sn_boundary(kappa, lam, s)
                ref_v = float(sn_oracle(kappa, lam, s))
                ref_d = float(sn_oracle_der(kappa, lam, s))
                scale = max(1.0, abs(ref_v))
                assert abs(float(val) - ref_v) <= 1e-12 * scale, \
                    (kappa, lam, s)
                dscale = max(1.0, abs(ref_d))
                assert abs(float(der) - ref_d) <= 1e-12 * dscale, \
                    (kappa, lam, s)


def test_sn_boundary_initial_conditions():
    for kappa in KAPPAS:
        for lam in LAMS:
            val, der = models.sn_boundary(kappa, lam, 0.0)
            assert float(val) == pytest.approx(1.0, abs=1e-15)
            assert float(der) == pytest.approx(-lam, abs=1e-15)


def test_sn_boundary_threshold_is_pure_decay():
    # at lam = sqrt(-kappa) the amplitude is exactly exp(-m s); the
    # exponential-sum evaluation must reproduce it with no cancellation
    for kappa in (-0.5, -2.0, -9.0):
        m = math.sqrt(-kappa)
        s = np.linspace(0.0, 8.0, 33)
        val, der = models.sn_boundary(kappa, m, s)
        assert np.max(np.abs(val - np.exp(-m * s))
                      / np.exp(-m * s)) <= 1e-14
        assert np.max(np.abs(der + m * np.exp(-m * s))
                      / np.exp(-m * s)) <= 1e-13


def test_sn_point_matches_mpmath():
    for kappa in KAPPAS:
        for s in np.linspace(0.01, 2.0, 9):
            val, der = models.sn_point(kappa, s)
            if kappa > 0:
                r = mpmath.sqrt(kappa)
                ref = mpmath.sin(r * s) / r
                refd = mpmath.cos(r * s)
            elif kappa == 0:
                ref, refd = mpmath.mpf(s), mpmath.mpf(1)
            else:
                m = mpmath.sqrt(-kappa)
                ref = mpmath.sinh(m * s) / m
                refd = mpmath.cosh(m * s)
            assert abs(float(val) - float(ref)) <= 1e-12 * max(1, abs(ref))
            assert abs(float(der) - float(refd)) <= 1e-12 * max(1, abs(refd))


def test_first_zero_point():
    assert models.first_zero_point(4.0) == pytest.approx(math.pi / 2)
    assert math.isinf(models.first_zero_point(0.0))
    assert math.isinf(models.first_zero_point(-1.0))


# ---------------------------------------------------------------------------
# barrier radii
# ---------------------------------------------------------------------------

def bisect_first_zero(kappa, lam):
    """Independent bracketing bisection on the amplitude sign change."""
    hi = 0.25
    while True:
        val, _ = models.sn_boundary(kappa, lam, hi)
        if float(val) < 0.0:
            break
        hi *= 2.0
        if hi > 1e6:
            return math.inf
    lo = 0.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        val, _ = models.sn_boundary(kappa, lam, mid)
        if float(val) > 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-14 * max(1.0, hi):
            break
    return 0.5 * (lo + hi)


def test_barrier_C_closed_forms():
    assert models.barrier_C(0.0, 1.0) == pytest.approx(1.0, abs=1e-15)
    assert models.barrier_C(1.0, 0.0) == pytest.approx(math.pi / 2)
    assert models.barrier_C(1.0, 1.0) == pytest.approx(math.pi / 4)
    assert models.barrier_C(-1.0, 2.0) == pytest.approx(math.atanh(0.5))
    assert models.barrier_C(4.0, -2.0) == pytest.approx(
        math.atan2(2.0, -2.0) / 2.0)
    assert math.isinf(models.barrier_C(0.0, 0.0))
    assert math.isinf(models.barrier_C(-1.0, 1.0))
    assert math.isinf(models.barrier_C(-1.0, 0.3))


def test_barrier_C_against_bisection():
    rng = np.random.default_rng([11, 7])
    done = 0
    while done < 25:
        kappa = float(rng.uniform(-4.0, 4.0))
        lam = float(rng.uniform(-3.0, 3.0))
        if not models.is_ball_pair(kappa, lam):
            continue
        ref = bisect_first_zero(kappa, lam)
        got = models.barrier_C(kappa, lam)
        assert abs(got - ref) <= 1e-9 * max(1.0, ref), (kappa, lam)
        done += 1


def test_barrier_D_closed_forms():
    assert models.barrier_D(1.0, -1.0) == pytest.approx(math.pi / 4)
    assert models.barrier_D(-1.0, 0.5) == pytest.approx(math.atanh(0.5))
    assert math.isinf(models.barrier_D(0.0, 1.0))
    assert math.isinf(models.barrier_D(-1.0, 1.0))
    assert math.isinf(models.barrier_D(-1.0, 2.0))
    assert math.isinf(models.barrier_D(1.0, 0.5))


def test_barrier_D_is_critical_point():
    for kappa, lam in ((1.0, -0.7), (2.5, -1.3), (-1.0, 0.5), (-4.0, 1.1)):
        D = models.barrier_D(kappa, lam)
        assert math.isfinite(D)
        _, der = models.sn_boundary(kappa, lam, D)
        assert abs(float(der)) <= 1e-10
        # and it is the first one: the derivative keeps the sign of -lam
        # on the whole open interval before it
        ts = np.linspace(1e-4, D * 0.999, 50)
        _, ders = models.sn_boundary(kappa, lam, ts)
        if lam < 0.0:
            assert np.all(np.asarray(ders) > 0.0)
        else:
            assert np.all(np.asarray(ders) < 0.0)


@settings(max_examples=150, deadline=None)
@given(st.floats(-3.0, 3.0), st.floats(-3.0, 3.0))
def test_classify_pair_coherent(kappa, lam):
    cls = models.classify_pair(kappa, lam)
    assert cls.ball == math.isfinite(cls.C)
    # the flat pair is the one model with infinite critical radius
    flat = kappa == 0.0 and lam == 0.0
    assert cls.model == (math.isfinite(cls.D) or flat)
    if cls.convex_ball:
        assert cls.ball and cls.monotone
    if cls.monotone:
        assert cls.weakly_monotone
    # positive curvature with inward-bending boundary is both: the
    # amplitude peaks at D and then falls to a zero at C > D
    if cls.ball and cls.model:
        assert kappa > 0.0 and lam < 0.0 and cls.D < cls.C
    # negative-curvature threshold pairs are neither balls nor models
    if kappa < 0 and lam == math.sqrt(-kappa):
        assert not cls.ball and not cls.model and cls.monotone


# ---------------------------------------------------------------------------
# comparison mean curvature and the Riccati identity
# ---------------------------------------------------------------------------

def test_H_boundary_riccati_by_differences():
    rng = np.random.default_rng([13, 5])
    h = 1e-5
    for _ in range(50):
        c = float(rng.uniform(0.1, 1.0))
        kappa = float(rng.uniform(-3.0, 3.0))
        lam = float(rng.uniform(-2.0, 2.0))
        C = models.barrier_C(kappa, lam)
        s = float(rng.uniform(2 * h, 0.9 * min(C, 2.5) - 2 * h))
        dH = (models.H_boundary(c, kappa, lam, s + h)
              - models.H_boundary(c, kappa, lam, s - h)) / (2 * h)
        H = models.H_boundary(c, kappa, lam, s)
        rhs = kappa / c + c * H * H
        assert abs(dH - rhs) <= 1e-5 * max(1.0, abs(rhs))


def test_H_boundary_refuses_barrier_and_negative():
    with pytest.raises(ValueError):
        models.H_boundary(0.5, 0.0, 1.0, 1.0)
    with pytest.raises(ValueError):
        models.H_boundary(0.5, 0.0, 1.0, -0.1)
    # fine strictly inside
    assert math.isfinite(models.H_boundary(0.5, 0.0, 1.0, 0.5))


def test_sn_boundary_ratio_matches_quotient():
    rng = np.random.default_rng([13, 17])
    for _ in range(60):
        kappa = float(rng.uniform(-3.0, 3.0))
        lam = float(rng.uniform(-2.0, 2.0))
        C = models.barrier_C(kappa, lam)
        s = float(rng.uniform(0.0, 0.9 * min(C, 2.5)))
        val, der = models.sn_boundary(kappa, lam, s)
        q = models.sn_boundary_ratio(kappa, lam, s)
        assert abs(q - der / val) <= 1e-12 * max(1.0, abs(q))


def test_sn_boundary_ratio_no_overflow():
    # raw amplitude and derivative both overflow near m*s ~ 710, but the
    # quotient stays bounded by m and tends to +m (growing mode dominates)
    kappa = -1.0e8
    m = 1.0e4
    with np.errstate(over="raise", invalid="raise"):
        q = models.sn_boundary_ratio(kappa, 0.0, np.array([0.5, 5.0]))
        H = models.H_boundary(0.5, kappa, 0.0, 2.0)
    assert np.all(np.isfinite(q))
    assert abs(q[0] - m) <= 1e-9 * m and abs(q[1] - m) <= 1e-9 * m
    assert abs(H - (-m / 0.5)) <= 1e-9 * m
    # threshold pair: pure decay keeps the ratio at exactly -m
    qt = models.sn_boundary_ratio(-4.0, 2.0, np.array([0.0, 300.0, 900.0]))
    assert np.all(qt == -2.0)


def test_H_point_small_s_blowup_and_guard():
    val = models.H_point(0.5, 1.0, 1e-4)
    assert val < -1000.0  # ~ -(1/c)/s
    with pytest.raises(ValueError):
        models.H_point(0.5, 1.0, 0.0)
    with pytest.raises(ValueError):
        models.H_point(0.5, 4.0, math.pi / 2)


# ---------------------------------------------------------------------------
# model volume integral
# ---------------------------------------------------------------------------

def test_S_volume_flat_pair_antiderivative():
    # pair (0,1): amplitude 1 - t, integral of (1-t)^(1/c)
    c = 0.5
    for r in (0.2, 0.7, 1.0, 3.0):
        upper = min(r, 1.0)
        exact = (1.0 - (1.0 - upper) ** 3) / 3.0
        assert models.S_volume(c, 0.0, 1.0, r) == pytest.approx(
            exact, abs=1e-9)


def test_S_volume_circular_pair_antiderivative():
    # kappa = 1, lam = 0, c = 1: integral of cos from 0 to min(r, pi/2)
    for r in (0.3, 1.0, math.pi / 2, 5.0):
        exact = math.sin(min(r, math.pi / 2))
        assert models.S_volume(1.0, 1.0, 0.0, r) == pytest.approx(
            exact, abs=1e-9)


def test_S_volume_generic_against_mpmath():
    c, kappa, lam = 0.37, -1.0, 2.0
    ref = mpmath.quad(lambda x: sn_oracle(kappa, lam, x)
                      ** (1 / mpmath.mpf(c)), [0, 0.4])
    assert models.S_volume(c, kappa, lam, 0.4) == pytest.approx(
        float(ref), rel=1e-9)


def test_S_volume_monotone_and_saturating():
    vals = [models.S_volume(0.4, 1.0, 0.3, r) for r in (0.2, 0.5, 1.0, 2.0)]
    assert all(b >= a for a, b in zip(vals, vals[1:]))
    C = models.barrier_C(1.0, 0.3)
    assert models.S_volume(0.4, 1.0, 0.3, C) == pytest.approx(
        models.S_volume(0.4, 1.0, 0.3, 10.0), rel=1e-12)


def test_S_volume_extreme_growth_does_not_overflow():
    out = models.S_volume(0.08, -25.0, 0.1, 6.0)
    assert math.isfinite(out) and out > 0.0


def test_S_volume_rejects_infinite_radius():
    with pytest.raises(ValueError):
        models.S_volume(0.5, -1.0, 1.0, math.inf)


# ---------------------------------------------------------------------------
# tail-ratio constant
# ---------------------------------------------------------------------------

def test_spectrum_constant_flat_is_length():
    for c in (0.2, 0.5, 1.0):
        for D in (0.5, 1.0, 2.0):
            assert models.spectrum_constant(c, 0.0, 0.0, D) == pytest.approx(
                D, rel=1e-8)


def test_spectrum_constant_threshold_limit():
    c = 0.45
    kappa = -2.0
    lam = math.sqrt(2.0)
    assert models.spectrum_constant(c, kappa, lam, math.inf) \
        == pytest.approx(c / lam, rel=1e-15)
    # finite lengths approach the limit (numerical slack for the scan)
    finite = models.spectrum_constant(c, kappa, lam, 40.0)
    assert finite <= c / lam + 1e-9
    assert finite == pytest.approx(c / lam, rel=1e-6)


def test_spectrum_constant_infinite_needs_threshold():
    with pytest.raises(ValueError):
        models.spectrum_constant(0.5, -1.0, 1.5, math.inf)
    with pytest.raises(ValueError):
        models.spectrum_constant(0.5, 1.0, 0.5, math.inf)


def test_spectrum_constant_brute_force():
    c, kappa, lam, D = 0.6, 1.0, 0.4, 0.7
    assert D < models.barrier_C(kappa, lam)
    power = 1 / mpmath.mpf(c)

    def tail_ratio(s):
        tail = mpmath.quad(lambda x: sn_oracle(kappa, lam, x) ** power,
                           [s, D])
        return float(tail / sn_oracle(kappa, lam, s) ** power)

    brute = max(tail_ratio(s) for s in np.linspace(0.0, D * 0.999, 400))
    got = models.spectrum_constant(c, kappa, lam, D)
    assert got >= brute - 1e-9
    assert got == pytest.approx(brute, rel=1e-4)


def test_spectrum_constant_rejects_beyond_barrier():
    with pytest.raises(ValueError):
        models.spectrum_constant(0.5, 0.0, 1.0, 1.5)
