"""One-dimensional model quantities used by every comparison check.

The model geometry is controlled by a curvature parameter ``kappa`` and a
boundary-slope parameter ``lam``.  Two normalized amplitude functions carry
all of it:

* the point-based amplitude ``sn_point``: solves y'' + kappa y = 0 with
  y(0) = 0, y'(0) = 1;
* the boundary-based amplitude ``sn_boundary``: same equation with
  y(0) = 1, y'(0) = -lam.

From the boundary amplitude we derive the barrier radius (its first positive
zero), the critical radius (first positive zero of its derivative), the
comparison mean-curvature function and its Riccati derivative, the model
volume integral, and the tail-ratio constant that controls the spectral-gap
estimates.  Extended values are represented by the IEEE infinity ``math.inf``
so that ``min(r, C)`` style expressions work unchanged.

Admissible parameter triples (n, N, eps) and the structure constant ``c``
that couples dimension, generalized dimension and the interpolation exponent
live here as well, since every downstream module needs them.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

INF = math.inf


# ---------------------------------------------------------------------------
# admissible parameters and the structure constant
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ParamCheck:
    """Outcome of :func:`validate_params`.

    ``eps_max`` is the half-width of the open admissible interval for the
    interpolation exponent (0 when only eps = 0 is allowed, ``math.inf``
    when every real value is allowed).  ``c`` is the structure constant,
    meaningful only when ``ok`` is true.
    """

    ok: bool
    reason: str
    eps_max: float
    c: float


def eps_range(n, N):
    """Half-width of the admissible open interval for eps at given (n, N)."""
    if N == 1:
        return 0.0
    if N == n:
        return INF
    if math.isinf(N):
        return 1.0
    return math.sqrt((N - 1.0) / (N - n))


def structure_constant(n, N, eps):
    """The constant c in ]0, 1] coupling (n, N, eps).

    c = (1 - eps^2 (N-n)/(N-1)) / (n-1), with the quotient read as its
    N -> +inf limit 1 and as 0 when N = 1 (where eps = 0 is forced).
    """
    if N == 1:
        return 1.0 / (n - 1.0)
    if math.isinf(N):
        return (1.0 - eps * eps) / (n - 1.0)
    return (1.0 - eps * eps * (N - n) / (N - 1.0)) / (n - 1.0)


def validate_params(n, N, eps):
    """Check admissibility of (n, N, eps) and compute the structure constant.

    Requirements: integer n >= 2; N in ]-inf, 1] or [n, +inf] (the gap
    ]1, n[ is rejected); eps = 0 when N = 1, eps arbitrary when N = n, and
    |eps| strictly below eps_range(n, N) otherwise.
    """
    if not float(n).is_integer() or n < 2:
        return ParamCheck(False, "n must be an integer >= 2", 0.0, math.nan)
    n = int(n)
    if math.isnan(N) or (math.isinf(N) and N < 0):
        return ParamCheck(False, "N must lie in ]-inf,1] or [n,+inf]", 0.0, math.nan)
    if 1.0 < N < n:
        return ParamCheck(False, "N in ]1,n[ forbidden", 0.0, math.nan)
    emax = eps_range(n, N)
    if math.isnan(eps) or math.isinf(eps):
        return ParamCheck(False, "eps must be finite", emax, math.nan)
    if N == 1:
        if eps != 0.0:
            return ParamCheck(False, "eps must be 0 when N = 1", 0.0, math.nan)
    elif N != n and not abs(eps) < emax:
        return ParamCheck(False,
                          "eps outside the open admissible interval",
                          emax, math.nan)
    c = structure_constant(n, N, eps)
    return ParamCheck(True, "", emax, c)


# ---------------------------------------------------------------------------
# amplitude functions
# ---------------------------------------------------------------------------

def _branch(kappa, s, pos, zero, neg):
    """Evaluate one of three callables according to the sign of kappa."""
    s = np.asarray(s, dtype=float)
    if kappa > 0.0:
        out = pos(math.sqrt(kappa), s)
    elif kappa < 0.0:
        out = neg(math.sqrt(-kappa), s)
    else:
        out = zero(s)
    return out


def sn_point(kappa, s):
    """Point-based amplitude and derivative: y'' + kappa y = 0, y(0)=0, y'(0)=1."""
    val = _branch(kappa, s,
                  lambda r, x: np.sin(r * x) / r,
                  lambda x: x + 0.0,
                  lambda m, x: np.sinh(m * x) / m)
    der = _branch(kappa, s,
                  lambda r, x: np.cos(r * x),
                  lambda x: np.ones_like(x),
                  lambda m, x: np.cosh(m * x))
    return val, der


def sn_boundary(kappa, lam, s):
    """Boundary-based amplitude and derivative: y(0) = 1, y'(0) = -lam.

    The negative-curvature branch uses the exponential-sum form
    ((1 - lam/m) e^{ms} + (1 + lam/m) e^{-ms}) / 2 rather than
    cosh - (lam/m) sinh: the latter cancels catastrophically for
    lam near sqrt(-kappa) at large arguments, and the growing mode
    must vanish exactly when lam equals the threshold.
    """
    with np.errstate(over="ignore"):
        # the growing mode may saturate to inf; that is the honest limit,
        # and ratio-based consumers use sn_boundary_ratio instead
        val = _branch(kappa, s,
                      lambda r, x: np.cos(r * x) - (lam / r) * np.sin(r * x),
                      lambda x: 1.0 - lam * x,
                      lambda m, x: (0.5 * (1.0 - lam / m) * np.exp(m * x)
                                    + 0.5 * (1.0 + lam / m) * np.exp(-m * x)))
        der = _branch(kappa, s,
                      lambda r, x: -r * np.sin(r * x) - lam * np.cos(r * x),
                      lambda x: np.full_like(x, -lam),
                      lambda m, x: (0.5 * (m - lam) * np.exp(m * x)
                                    - 0.5 * (m + lam) * np.exp(-m * x)))
    return val, der


def sn_boundary_ratio(kappa, lam, s):
    """Logarithmic derivative S'/S of the boundary amplitude, overflow-free.

    The quotient is bounded by max(sqrt(|kappa|), |lam|) on the admissible
    range, but forming it from sn_boundary overflows once sqrt(-kappa) * s
    exceeds the exp range.  The negative branch therefore factors out the
    growing exponential and works with u = e^{-2ms} <= 1 instead.
    """
    s = np.asarray(s, dtype=float)
    if kappa > 0.0:
        val, der = sn_boundary(kappa, lam, s)
        return der / val
    if kappa == 0.0:
        return -lam / (1.0 - lam * s)
    m = math.sqrt(-kappa)
    if lam == m:
        # pure decay e^{-ms}; the generic form hits 0/0 once u underflows
        return np.full_like(s, -m)
    u = np.exp(-2.0 * m * s)
    return m * ((m - lam) - (m + lam) * u) / ((m - lam) + (m + lam) * u)


def first_zero_point(kappa):
    """First positive zero of the point-based amplitude (inf when none)."""
    if kappa > 0.0:
        return math.pi / math.sqrt(kappa)
    return INF


# ---------------------------------------------------------------------------
# barrier and critical radii
# ---------------------------------------------------------------------------

def is_ball_pair(kappa, lam):
    """True when the boundary amplitude has a positive zero."""
    return (kappa > 0.0
            or (kappa == 0.0 and lam > 0.0)
            or (kappa < 0.0 and lam > math.sqrt(-kappa)))


def barrier_C(kappa, lam):
    """First positive zero of the boundary amplitude, inf when there is none."""
    if kappa > 0.0:
        r = math.sqrt(kappa)
        return math.atan2(r, lam) / r
    if kappa == 0.0:
        return 1.0 / lam if lam > 0.0 else INF
    m = math.sqrt(-kappa)
    if lam > m:
        return math.atanh(m / lam) / m
    return INF


def barrier_D(kappa, lam):
    """First positive critical point of the boundary amplitude before its zero.

    Finite exactly for kappa > 0 with lam < 0 and for kappa < 0 with
    0 < lam < sqrt(-kappa); every other pair either has no positive
    critical point or only one at or beyond the barrier radius, and those
    report inf.
    """
    if kappa > 0.0 and lam < 0.0:
        r = math.sqrt(kappa)
        return math.atan(-lam / r) / r
    if kappa < 0.0:
        m = math.sqrt(-kappa)
        if 0.0 < lam < m:
            return math.atanh(lam / m) / m
    return INF


@dataclass(frozen=True)
class PairClass:
    """Classification flags and characteristic radii of a (kappa, lam) pair."""

    kappa: float
    lam: float
    ball: bool
    convex_ball: bool
    monotone: bool
    weakly_monotone: bool
    model: bool
    C: float
    D: float


def classify_pair(kappa, lam):
    """Classify a parameter pair into the condition flags used by the checks."""
    root = math.sqrt(-kappa) if kappa < 0.0 else 0.0
    ball = is_ball_pair(kappa, lam)
    convex = ball and lam >= 0.0
    monotone = convex or (kappa <= 0.0 and lam == root)
    weakly = kappa >= 0.0 or abs(lam) >= root
    model = ((kappa > 0.0 and lam < 0.0)
             or (kappa == 0.0 and lam == 0.0)
             or (kappa < 0.0 and 0.0 < lam < root))
    return PairClass(kappa, lam, ball, convex, monotone, weakly, model,
                     barrier_C(kappa, lam), barrier_D(kappa, lam))


# ---------------------------------------------------------------------------
# comparison mean-curvature functions
# ---------------------------------------------------------------------------

_C_GUARD = 1e-9


def _check_below_barrier(s, C, what):
    hi = np.max(np.asarray(s, dtype=float), initial=-INF)
    lo = np.min(np.asarray(s, dtype=float), initial=INF)
    if lo < 0.0:
        raise ValueError("%s needs s >= 0, got %g" % (what, lo))
    if math.isfinite(C) and hi > C - _C_GUARD * max(1.0, C):
        raise ValueError("%s undefined at s = %g (barrier at %g)" % (what, hi, C))


def H_boundary(c, kappa, lam, s):
    """Boundary comparison mean curvature -(1/c) S'/S at abscissa s.

    Defined for 0 <= s strictly below the barrier radius; evaluation within
    1e-9 * max(1, C) of the barrier is refused rather than returned as a
    huge float.
    """
    _check_below_barrier(s, barrier_C(kappa, lam), "H_boundary")
    return -sn_boundary_ratio(kappa, lam, s) / c


def H_boundary_deriv(c, kappa, lam, s):
    """Derivative of the boundary comparison mean curvature in s.

    Computed from the amplitude quotient, (1/c)(kappa + (S'/S)^2), so that
    the Riccati identity H' = kappa/c + c H^2 can be checked against it
    independently.
    """
    _check_below_barrier(s, barrier_C(kappa, lam), "H_boundary_deriv")
    q = sn_boundary_ratio(kappa, lam, s)
    return (kappa + q * q) / c


def H_point(c, kappa, s):
    """Point comparison mean curvature -(1/c) y'/y for the point amplitude.

    Domain is 0 < s strictly below the first zero of the point amplitude;
    both endpoints are refused with the same relative guard as the boundary
    version.
    """
    z = first_zero_point(kappa)
    s_arr = np.asarray(s, dtype=float)
    if np.min(s_arr, initial=INF) <= 0.0:
        raise ValueError("H_point needs s > 0")
    if math.isfinite(z) and np.max(s_arr, initial=-INF) > z - _C_GUARD * max(1.0, z):
        raise ValueError("H_point undefined at the amplitude zero %g" % z)
    val, der = sn_point(kappa, s)
    return -(der / val) / c


# ---------------------------------------------------------------------------
# model volume integral and tail-ratio constant
# ---------------------------------------------------------------------------

def S_volume(c, kappa, lam, r):
    """Model volume integral of the boundary amplitude to the power 1/c.

    Integrates S^(1/c) from 0 to min(r, C); constant in r past the barrier.
    """
    if not math.isfinite(r):
        raise ValueError("S_volume expects a finite radius")
    if r <= 0.0:
        return 0.0
    C = barrier_C(kappa, lam)
    upper = min(r, C)
    power = 1.0 / c

    def integrand(x):
        val, _ = sn_boundary(kappa, lam, x)
        val = float(val)
        if val <= 0.0:
            return 0.0
        # log-space evaluation, clamped so growing amplitudes with small c
        # cannot overflow the quadrature; the comparisons only need "huge"
        return math.exp(min(power * math.log(val), 700.0))

    out, _ = quad(integrand, 0.0, upper, epsabs=1e-10, epsrel=1e-12, limit=200)
    return out


def _golden_max(fun, lo, hi, xtol):
    """Golden-section maximization of a unimodal-enough scalar function."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    x1 = b - invphi * (b - a)
    x2 = a + invphi * (b - a)
    f1, f2 = fun(x1), fun(x2)
    while (b - a) > xtol:
        if f1 < f2:
            a, x1, f1 = x1, x2, f2
            x2 = a + invphi * (b - a)
            f2 = fun(x2)
        else:
            b, x2, f2 = x2, x1, f1
            x1 = b - invphi * (b - a)
            f1 = fun(x1)
    return max(f1, f2)


def spectrum_constant(c, kappa, lam, D, grid=1024, xtol=1e-9):
    """Tail-ratio constant sup over s in [0, D[ of (integral of S^(1/c) from s to D) / S^(1/c)(s).

    D = +inf is admitted only for kappa < 0 with lam = sqrt(-kappa), where
    the amplitude is a pure decaying exponential and the constant is c/lam.
    Finite D must not exceed the barrier radius.  The supremum is located on
    a uniform scan grid and polished by golden section to ``xtol``.
    """
    if math.isinf(D):
        if kappa < 0.0 and lam == math.sqrt(-kappa):
            return c / lam
        raise ValueError("infinite D only admissible for kappa<0, lam=sqrt(-kappa)")
    C = barrier_C(kappa, lam)
    if D > C * (1.0 + 1e-12):
        raise ValueError("D beyond the barrier radius")
    D = min(D, C)
    power = 1.0 / c

    def amp_pow(x):
        val, _ = sn_boundary(kappa, lam, x)
        return np.asarray(val, dtype=float) ** power

    def objective(s):
        tail, _ = quad(amp_pow, s, D, epsabs=1e-12, epsrel=1e-12, limit=200)
        return tail / float(amp_pow(s))

    # coarse scan on a uniform grid, cumulative Simpson for the tails
    nodes = np.linspace(0.0, D, 4 * grid + 1)
    vals = amp_pow(nodes)
    h = nodes[1] - nodes[0]
    # Composite Simpson cumulative sums over node pairs.
    mid = amp_pow(0.5 * (nodes[:-1] + nodes[1:]))
    cell = (h / 6.0) * (vals[:-1] + 4.0 * mid + vals[1:])
    cum = np.concatenate([[0.0], np.cumsum(cell)])
    tails = cum[-1] - cum
    scan = nodes[: -1: 4]
    ratio = tails[: -1: 4] / vals[: -1: 4]
    k = int(np.argmax(ratio))
    lo = scan[max(k - 1, 0)]
    hi = scan[k + 1] if k + 1 < len(scan) else min(scan[k] + 4 * h, D * (1 - 1e-12))
    best = _golden_max(objective, lo, hi, xtol)
    return max(best, float(ratio[k]))
