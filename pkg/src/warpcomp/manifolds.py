"""Warped products with radial density and their geometric evaluators.

An instance is an interval [0, T] warped over a closed (n-1)-dimensional
fiber: the metric is dt^2 + w(t)^2 g_fiber and the density is a radial
function phi(t).  Four interval topologies are supported:

* ``collar``          : boundary at t = 0, open end at t = T;
* ``two_ended``       : boundary components at t = 0 and t = T;
* ``ball_apex``       : boundary at t = 0, smooth cap at t = T (w(T) = 0);
* ``point_symmetric`` : smooth center at t = 0 (w(0) = 0), open or capped
  end at t = T, used for the point-based comparisons.

Everything the comparison checks consume is computed here from the two
profiles and the fiber descriptor: Bakry-Emery Ricci values in the radial
and fiber directions, weighted mean curvature of the boundary slices, the
distance Laplacian and its p-Laplacian generalization, the density
reparametrization s(t) and its inverse, normalized volume elements, tube
volumes, boundary measures, and the inradius in the original and in the
conformally reparametrized metric.

The builders at the bottom construct the exact-equality geometries: round
model balls, constant-density model collars, the coupled
density-reparametrization collars for finite generalized dimension, the
free-density collars for generalized dimension one, and mirror-symmetric
two-boundary models.
"""

import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np
from scipy.integrate import quad, solve_ivp

from . import models
from .profiles import CallableProfile, ExprProfile, constant_profile, \
    derivative_consistency, mirror_profile, parse_profile

TOPOLOGIES = ("collar", "two_ended", "ball_apex", "point_symmetric")

# sentinel upper limit that a terminal event can never reach
INF_STOP = 1e30


# ---------------------------------------------------------------------------
# fibers
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Fiber:
    """Closed fiber descriptor.

    ``ricci_const`` is the Einstein constant of the fiber metric
    (Ric_fiber = ricci_const * g_fiber) when known, None when unknown.
    ``cap_slope`` is the |w'| that closes a cap smoothly over this fiber
    (1/radius for round spheres, None when no smooth cap exists).
    """

    dim: int
    volume: float
    ricci_const: Optional[float]
    kind: str = "custom"
    cap_slope: Optional[float] = None


def unit_sphere_volume(d):
    """Riemannian volume of the unit round d-sphere."""
    return 2.0 * math.pi ** ((d + 1) / 2.0) / math.gamma((d + 1) / 2.0)


def sphere_fiber(d, radius=1.0):
    """Round sphere of the given radius as a fiber."""
    if d < 1:
        raise ValueError("fiber dimension must be >= 1")
    ric = (d - 1.0) / radius ** 2
    return Fiber(d, unit_sphere_volume(d) * radius ** d, ric,
                 kind="sphere", cap_slope=1.0 / radius)


def torus_fiber(d, volume=1.0):
    """Flat torus fiber (Ricci-flat, no smooth cap)."""
    return Fiber(d, volume, 0.0, kind="torus", cap_slope=None)


def einstein_fiber(d, ricci_const, volume=1.0):
    """Abstract Einstein fiber with a prescribed Ricci constant."""
    return Fiber(d, volume, float(ricci_const), kind="einstein",
                 cap_slope=None)


# ---------------------------------------------------------------------------
# the manifold record
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WarpedManifold:
    n: int
    fiber: Fiber
    w: CallableProfile
    phi: CallableProfile
    T: float
    topology: str
    label: str = ""

    def __post_init__(self):
        if self.topology not in TOPOLOGIES:
            raise ValueError("unknown topology %r" % (self.topology,))
        if self.n < 2:
            raise ValueError("dimension n must be >= 2")
        if self.fiber.dim != self.n - 1:
            raise ValueError("fiber dimension %d does not match n-1 = %d"
                             % (self.fiber.dim, self.n - 1))
        if not (self.T > 0.0 and math.isfinite(self.T)):
            raise ValueError("T must be a positive finite length")
        ts = np.linspace(0.0, self.T, 257)
        inner = ts[1:-1]
        if np.any(self.w.val(inner) <= 0.0):
            raise ValueError("warping must stay positive on the interior")
        if self.topology == "ball_apex":
            if abs(float(self.w.val(self.T))) > 1e-8 * max(1.0, self.T):
                raise ValueError("ball_apex needs w(T) = 0")
            slope = self.fiber.cap_slope
            if slope is None:
                raise ValueError("ball_apex needs a fiber that closes a cap")
            if abs(float(self.w.d1(self.T)) + slope) > 1e-6:
                raise ValueError("cap at t = T is not smooth: w'(T) = %g, "
                                 "expected %g" % (float(self.w.d1(self.T)),
                                                  -slope))
        elif self.topology == "point_symmetric":
            if abs(float(self.w.val(0.0))) > 1e-8 * max(1.0, self.T):
                raise ValueError("point_symmetric needs w(0) = 0")
            slope = self.fiber.cap_slope
            if slope is None or abs(float(self.w.d1(0.0)) - slope) > 1e-6:
                raise ValueError("center at t = 0 is not smooth")
        else:
            if float(self.w.val(0.0)) <= 0.0:
                raise ValueError("boundary warping w(0) must be positive")

    @property
    def cut_value(self):
        """Distance from the reference set to the cut locus along rays."""
        return 0.5 * self.T if self.topology == "two_ended" else self.T

    @property
    def has_boundary(self):
        return self.topology != "point_symmetric"

    def mirrored(self):
        """The same manifold traversed from the far end."""
        return replace(self, w=mirror_profile(self.w, self.T),
                       phi=mirror_profile(self.phi, self.T),
                       label=self.label + "~mirror")


def check_profile_consistency(M, tol=1e-4):
    """Derivative consistency of both profiles, as a build-time guard."""
    lo, hi = 0.02 * M.T, 0.98 * M.T
    worst = max(derivative_consistency(M.w, lo, hi),
                derivative_consistency(M.phi, lo, hi))
    if worst > tol:
        raise ValueError("profile derivatives inconsistent with differences "
                         "(gap %g)" % worst)
    return worst


# ---------------------------------------------------------------------------
# curvature evaluators
# ---------------------------------------------------------------------------

def radial_ricci(M, N, t):
    """Generalized Ricci value on radial directions at parameter t.

    For generalized dimension N this is
    -(n-1) w''/w + phi'' - (phi')^2 / (N - n), with the last term read as 0
    for N = +inf.  N = n requires a constant density (the quotient is
    otherwise undefined) and drops the term as well.
    """
    t = np.asarray(t, dtype=float)
    w, d2w = M.w.val(t), M.w.d2(t)
    out = -(M.n - 1.0) * d2w / w + M.phi.d2(t)
    if math.isinf(N):
        return out
    if N == M.n:
        dphi = M.phi.d1(np.linspace(0.0, M.T, 65))
        if np.max(np.abs(dphi)) > 1e-10:
            raise ValueError("N = n requires a constant density")
        return out
    return out - M.phi.d1(t) ** 2 / (N - M.n)


def fiber_ricci(M, t):
    """Generalized Ricci value on fiber directions, None when unknown.

    Independent of N because radial densities have no fiber gradient
    component.  Needs the fiber Einstein constant.
    """
    if M.fiber.ricci_const is None:
        return None
    t = np.asarray(t, dtype=float)
    w, dw, d2w = M.w.val(t), M.w.d1(t), M.w.d2(t)
    rho = M.fiber.ricci_const
    return (rho - w * d2w - (M.n - 2.0) * dw * dw) / (w * w) \
        + M.phi.d1(t) * dw / w


def weighted_mean_curvature(M, component=0):
    """Weighted mean curvature of a boundary component, inner normal.

    Component 0 sits at t = 0; component 1 (two_ended only) at t = T.
    """
    if not M.has_boundary:
        raise ValueError("point_symmetric instances have no boundary")
    if component == 0:
        w0, dw0 = float(M.w.val(0.0)), float(M.w.d1(0.0))
        return -(M.n - 1.0) * dw0 / w0 + float(M.phi.d1(0.0))
    if component == 1 and M.topology == "two_ended":
        wT, dwT = float(M.w.val(M.T)), float(M.w.d1(M.T))
        return (M.n - 1.0) * dwT / wT - float(M.phi.d1(M.T))
    raise ValueError("no boundary component %r" % (component,))


def laplacian_distance(M, t):
    """Weighted Laplacian (geometer's sign) of the boundary distance.

    Valid for 0 < t < cut value, measured from the component at t = 0; use
    ``M.mirrored()`` for the far component of a two-ended instance.
    """
    if not M.has_boundary:
        raise ValueError("use laplacian_distance_point for point instances")
    t = np.asarray(t, dtype=float)
    return -(M.n - 1.0) * M.w.d1(t) / M.w.val(t) + M.phi.d1(t)


def laplacian_distance_point(M, t):
    """Weighted Laplacian of the distance from the symmetric center."""
    if M.topology != "point_symmetric":
        raise ValueError("laplacian_distance_point needs a point_symmetric "
                         "instance")
    t = np.asarray(t, dtype=float)
    return -(M.n - 1.0) * M.w.d1(t) / M.w.val(t) + M.phi.d1(t)


def p_laplacian_radial(M, p, chi1, chi2, t, dens_scale=1.0):
    """Weighted p-Laplacian of a radial function with profile derivatives.

    ``chi1`` and ``chi2`` are arrays of the first and second t-derivatives
    of the radial function at ``t``.  ``dens_scale`` rescales the density
    (the spectral estimates use modified weights a * phi).  Valid where
    chi1 does not vanish; the formula is

        -(p-1)|chi'|^(p-2) chi'' - |chi'|^(p-2) chi' ((n-1) w'/w - a phi').
    """
    t = np.asarray(t, dtype=float)
    chi1 = np.asarray(chi1, dtype=float)
    chi2 = np.asarray(chi2, dtype=float)
    drift = (M.n - 1.0) * M.w.d1(t) / M.w.val(t) - dens_scale * M.phi.d1(t)
    mag = np.abs(chi1) ** (p - 2.0)
    return -(p - 1.0) * mag * chi2 - mag * chi1 * drift


# ---------------------------------------------------------------------------
# reparametrization and volume elements
# ---------------------------------------------------------------------------

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(10)


def _cumulative_gauss(fn, grid):
    """Cumulative integral of fn over a sorted grid starting at grid[0].

    Composite 10-point Gauss-Legendre per cell; effectively exact for the
    smooth integrands used here.
    """
    a = grid[:-1]
    b = grid[1:]
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    samples = mid[:, None] + half[:, None] * _GL_NODES[None, :]
    vals = fn(samples.ravel()).reshape(samples.shape)
    cells = half * (vals * _GL_WEIGHTS[None, :]).sum(axis=1)
    return np.concatenate([[0.0], np.cumsum(cells)])


def reparam_exponent(n, eps):
    """The density scaling exponent a = 2 (1 - eps) / (n - 1)."""
    return 2.0 * (1.0 - eps) / (n - 1.0)


def reparam_s(M, eps, t):
    """Reparametrized distance s(t) = integral of exp(-a phi) from 0 to t.

    Evaluated by composite Gauss-Legendre over the union of a uniform base
    grid and the requested abscissae, which keeps every integration cell
    short; for the smooth profiles used here the result is accurate far
    beyond the 1e-10 contract.
    """
    a = reparam_exponent(M.n, eps)

    def integrand(x):
        return np.exp(-a * M.phi.val(x))

    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    if t_arr.size and (np.min(t_arr) < -1e-12
                       or np.max(t_arr) > M.T * (1 + 1e-12)):
        raise ValueError("reparam_s needs 0 <= t <= T")
    base = np.linspace(0.0, M.T, 257)
    grid = np.unique(np.concatenate([base, np.clip(t_arr, 0.0, M.T)]))
    cum = _cumulative_gauss(integrand, grid)
    idx = np.searchsorted(grid, np.clip(t_arr, 0.0, M.T))
    result = cum[idx]
    return result.reshape(np.shape(t)) if np.ndim(t) else float(result[0])


def reparam_t(M, eps, s, tol=1e-12):
    """Inverse of :func:`reparam_s` by monotone bisection to ``tol`` in t.

    The bisection runs vectorized over all requested values; brackets come
    from a dense cumulative table.
    """
    s_arr = np.atleast_1d(np.asarray(s, dtype=float))
    grid = np.linspace(0.0, M.T, 1025)
    table = reparam_s(M, eps, grid)
    if s_arr.size and (np.min(s_arr) < -1e-12
                       or np.max(s_arr) > table[-1] * (1 + 1e-9) + 1e-15):
        raise ValueError("reparam_t argument outside [0, s(T)]")
    clipped = np.clip(s_arr, 0.0, table[-1])
    hi_idx = np.clip(np.searchsorted(table, clipped), 1, grid.size - 1)
    lo = grid[hi_idx - 1]
    hi = grid[hi_idx]
    while np.max(hi - lo) > tol:
        mid = 0.5 * (lo + hi)
        below = reparam_s(M, eps, mid) < clipped
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    out = 0.5 * (lo + hi)
    return out.reshape(np.shape(s)) if np.ndim(s) else float(out[0])


def theta_f(M, t):
    """Normalized weighted volume element exp(-phi) (w / w(0))^(n-1)."""
    t = np.asarray(t, dtype=float)
    w0 = float(M.w.val(0.0))
    return np.exp(-M.phi.val(t)) * (M.w.val(t) / w0) ** (M.n - 1.0)


def theta_hat(M, eps, s):
    """Volume element of :func:`theta_f` in the reparametrized variable."""
    return theta_f(M, reparam_t(M, eps, s))


def _collar_tube(M, a, t_upper):
    """Weighted measure of the collar 0 <= t <= t_upper for density a*phi."""
    def integrand(x):
        return float(np.exp(-a * M.phi.val(x)) * M.w.val(x) ** (M.n - 1.0))

    val, _ = quad(integrand, 0.0, t_upper, epsabs=1e-10, epsrel=1e-11,
                  limit=200)
    return M.fiber.volume * val


def tube_volume(M, a, radius, mode="t", eps=None):
    """Weighted volume of the tube around the boundary (or center).

    ``mode="t"`` measures the tube radius in the original distance,
    ``mode="s"`` in the reparametrized distance (then ``eps`` is required).
    The density used is a * phi.  Two-ended instances accumulate both
    collars.
    """
    if radius <= 0.0:
        return 0.0
    if mode not in ("t", "s"):
        raise ValueError("mode must be 't' or 's'")

    def one_side(Mside):
        tau = Mside.cut_value
        if mode == "t":
            upper = min(radius, tau)
        else:
            if eps is None:
                raise ValueError("mode='s' needs eps")
            s_tau = reparam_s(Mside, eps, tau)
            upper = reparam_t(Mside, eps, min(radius, s_tau))
        return _collar_tube(Mside, a, upper)

    if M.topology == "two_ended":
        return one_side(M) + one_side(M.mirrored())
    return one_side(M)


def boundary_measure(M, a=1.0, component=None):
    """Weighted boundary measure for density a * phi.

    Sums the components of a two-ended instance unless one is selected.
    """
    if not M.has_boundary:
        raise ValueError("point_symmetric instances have no boundary")

    def comp(Mside):
        w0 = float(Mside.w.val(0.0))
        return M.fiber.volume * w0 ** (M.n - 1.0) \
            * math.exp(-a * float(Mside.phi.val(0.0)))

    if M.topology == "two_ended":
        if component == 0:
            return comp(M)
        if component == 1:
            return comp(M.mirrored())
        return comp(M) + comp(M.mirrored())
    if component not in (None, 0):
        raise ValueError("no boundary component %r" % (component,))
    return comp(M)


def inradius(M):
    """Inradius of the original metric: largest boundary distance."""
    if not M.has_boundary:
        raise ValueError("inradius needs a boundary")
    return M.cut_value


def inradius_conformal(M, eps):
    """Inradius of the conformally reparametrized metric.

    On radial instances the reparametrized distance from the boundary to the
    slice at t is exactly |s(t) - s(boundary)| (radial curves minimize among
    all curves because the conformal factor is radial), so the inradius is
    the largest reparametrized boundary distance.
    """
    if not M.has_boundary:
        raise ValueError("inradius_conformal needs a boundary")
    if M.topology != "two_ended":
        return reparam_s(M, eps, M.T)
    s_total = reparam_s(M, eps, M.T)
    # the two boundary components split the reparametrized length
    return 0.5 * s_total


inradius_f = inradius_conformal


# ---------------------------------------------------------------------------
# builders: model balls and cylinders
# ---------------------------------------------------------------------------

def _sn_boundary_expr(kappa, lam):
    """Sympy expression of the boundary amplitude at curvature kappa."""
    import sympy as sp
    t = sp.Symbol("t")
    if kappa > 0:
        r = sp.sqrt(sp.Float(kappa, 17))
        return sp.cos(r * t) - (sp.Float(lam, 17) / r) * sp.sin(r * t)
    if kappa < 0:
        # Exponential-sum form: cosh - (lam/m) sinh cancels catastrophically
        # for lam near sqrt(-kappa) at large t, which pollutes the symbolic
        # second derivative and hence any curvature read off this profile.
        m = sp.sqrt(sp.Float(-kappa, 17))
        lam_s = sp.Float(lam, 17)
        grow = (1 - lam_s / m) / 2
        decay = (1 + lam_s / m) / 2
        return grow * sp.exp(m * t) + decay * sp.exp(-m * t)
    return 1 - sp.Float(lam, 17) * t


def build_model_ball(n, kappa, lam, trunc=1.0, density0=0.0):
    """Round model ball (or truncated collar) for a ball-condition pair.

    The warping is the boundary amplitude scaled by 1/sqrt(kappa + lam^2)
    over a unit-sphere fiber, which reproduces the constant-curvature ball
    with boundary mean curvature (n-1) * lam; ``trunc`` < 1 stops short of
    the apex and yields a collar.  The density is constant.
    """
    if not models.is_ball_pair(kappa, lam):
        raise ValueError("model balls need a ball-condition pair")
    C = models.barrier_C(kappa, lam)
    energy = kappa + lam * lam
    if energy <= 0.0:
        raise ValueError("degenerate pair: kappa + lam^2 must be positive")
    scale = 1.0 / math.sqrt(energy)
    import sympy as sp
    expr = sp.Float(scale, 17) * _sn_boundary_expr(kappa, lam)
    w = ExprProfile(expr)
    if trunc >= 1.0:
        topo, T = "ball_apex", C
    else:
        topo, T = "collar", trunc * C
    return WarpedManifold(n, sphere_fiber(n - 1), w,
                          constant_profile(density0), T, topo,
                          label="model-ball(%g,%g)" % (kappa, lam))


def build_cylinder(n, height=1.0, radius=1.0, density0=0.0):
    """Flat product cylinder over a torus fiber (zero curvature pair)."""
    return WarpedManifold(n, torus_fiber(n - 1, unit_sphere_volume(n - 1)
                                         * radius ** (n - 1)),
                          constant_profile(1.0), constant_profile(density0),
                          height, "two_ended", label="cylinder")


def build_point_space(n, kappa, T=None, trunc=0.95):
    """Constant-curvature space around a symmetric center point."""
    import sympy as sp
    t = sp.Symbol("t")
    if kappa > 0:
        r = sp.sqrt(sp.Float(kappa, 17))
        expr = sp.sin(r * t) / r
        T_max = math.pi / math.sqrt(kappa)
        T = trunc * T_max if T is None else T
    elif kappa < 0:
        m = sp.sqrt(sp.Float(-kappa, 17))
        expr = sp.sinh(m * t) / m
        T = 1.0 if T is None else T
    else:
        expr = t
        T = 1.0 if T is None else T
    return WarpedManifold(n, sphere_fiber(n - 1), ExprProfile(expr),
                          constant_profile(0.0), T, "point_symmetric",
                          label="point-space(%g)" % kappa)


def build_two_ended_model(n, kappa, lam, fiber=None):
    """Mirror-symmetric two-boundary model spanning twice the critical radius.

    Needs a pair whose boundary amplitude has a positive critical point.
    The warping is the amplitude itself, symmetric about its critical point,
    so both boundary components carry mean curvature (n-1) * lam.  With the
    default fibers (circle for n = 2, a sphere scaled to the amplitude
    energy for n = 3) the curvature hypotheses hold with equality.
    """
    D = models.barrier_D(kappa, lam)
    if not math.isfinite(D):
        raise ValueError("pair (%g, %g) has no positive critical point"
                         % (kappa, lam))
    if fiber is None:
        if n == 2:
            fiber = torus_fiber(1, 2 * math.pi)
        elif n == 3:
            energy = kappa + lam * lam
            if energy > 0:
                fiber = sphere_fiber(2, 1.0 / math.sqrt(energy))
            else:
                fiber = einstein_fiber(2, energy)
        else:
            fiber = torus_fiber(n - 1)
    w = ExprProfile(_sn_boundary_expr(kappa, lam))
    return WarpedManifold(n, fiber, w, constant_profile(0.0), 2.0 * D,
                          "two_ended",
                          label="mirror-model(%g,%g)" % (kappa, lam))


# ---------------------------------------------------------------------------
# builders: exact-equality collars
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EqualityModel:
    """An exact-equality collar together with its construction data."""

    manifold: WarpedManifold
    case: str
    n: int
    N: float
    eps: float
    kappa: float
    lam: float
    f0: float
    c: float
    s_profile: CallableProfile  # reparametrized distance and derivatives


def _require_valid(n, N, eps):
    chk = models.validate_params(n, N, eps)
    if not chk.ok:
        raise ValueError(chk.reason)
    return chk.c


_S_GUARD = 1e-6


def _auto_fiber(n, ts, w, phi, required):
    """Einstein fiber whose directions satisfy the curvature hypothesis.

    ``required`` is the grid of fiber Ricci values demanded by the
    hypothesis; the fiber constant is padded slightly above the demand so
    that the radial direction stays the active minimum.
    """
    wv, dw, d2w = w.val(ts), w.d1(ts), w.d2(ts)
    dphi = phi.d1(ts)
    need = (required - dphi * dw / wv) * wv * wv + wv * d2w \
        + (n - 2.0) * dw * dw
    rho = float(np.max(need))
    rho = rho + 1e-6 * (1.0 + abs(rho))
    if n == 2:
        if rho <= 0.0:
            return torus_fiber(1, 2 * math.pi)
        raise ValueError("no circle fiber satisfies the hypothesis here; "
                         "pass an explicit fiber")
    if rho > 0.0:
        return sphere_fiber(n - 1, math.sqrt((n - 2.0) / rho))
    return torus_fiber(n - 1)


def build_equality_model(n, N, eps, kappa, lam, f0=0.0, T=None,
                         s_fraction=0.75, density=None, fiber=None):
    """Collar on which every boundary comparison holds with equality.

    The construction branches on the generalized dimension:

    * N = n: constant density f0, warping equal to the rescaled boundary
      amplitude;
    * N = 1 (eps = 0): arbitrary radial density (``density`` profile,
      constant f0 when omitted) with the warping carrying a compensating
      conformal factor;
    * otherwise: the density is coupled to the reparametrized distance
      through the logarithm of the amplitude, and the reparametrization
      solves a scalar ODE integrated here to relative tolerance 1e-10.

    ``T`` fixes the collar length explicitly; when omitted, ball-condition
    pairs stop where the reparametrized distance reaches ``s_fraction``
    of the barrier radius.  The reparametrized distance is kept below the
    barrier by a hard margin of 1e-6.
    """
    c = _require_valid(n, N, eps)
    a = reparam_exponent(n, eps)
    C = models.barrier_C(kappa, lam)

    def sn(s):
        val, der = models.sn_boundary(kappa, lam, s)
        return val, der

    if N == n:
        case = "constant-density"
        kt = kappa * math.exp(-2.0 * a * f0)
        lt = lam * math.exp(-a * f0)
        Ct = models.barrier_C(kt, lt)
        if T is None:
            if not math.isfinite(Ct):
                raise ValueError("non-ball pair: pass an explicit T")
            T = s_fraction * Ct
        if T >= Ct - _S_GUARD:
            raise ValueError("T reaches the rescaled barrier radius")
        w = ExprProfile(_sn_boundary_expr(kt, lt))
        phi = constant_profile(f0)
        rate = math.exp(-a * f0)
        s_prof = CallableProfile(lambda t: rate * np.asarray(t, float),
                                 lambda t: np.full_like(np.asarray(t, float), rate),
                                 lambda t: np.zeros_like(np.asarray(t, float)),
                                 label="linear reparam")
    elif N == 1:
        case = "free-density"
        if density is None:
            phi = constant_profile(f0)
        elif isinstance(density, (str, dict)):
            phi = parse_profile(density)
        else:
            phi = density
        f0 = float(phi.val(0.0))

        def ode(t, y):
            return [math.exp(-a * float(phi.val(t)))]

        if T is None:
            if not math.isfinite(C):
                raise ValueError("non-ball pair: pass an explicit T")
            s_stop = s_fraction * C

            def hit(t, y):
                return y[0] - s_stop
            hit.terminal = True
            span = 1.0
            while True:
                sol = solve_ivp(ode, (0.0, span), [0.0], rtol=1e-10,
                                atol=1e-13, dense_output=True, events=hit,
                                max_step=span / 16.0)
                if sol.t_events[0].size:
                    T = float(sol.t_events[0][0])
                    break
                span *= 2.0
                if span > 1e8:
                    raise ValueError("reparametrized distance never reaches "
                                     "the requested fraction of the barrier")
        else:
            sol = solve_ivp(ode, (0.0, T), [0.0], rtol=1e-10, atol=1e-13,
                            dense_output=True, max_step=T / 16.0)
        s_dense = sol.sol

        def s_val(t):
            t = np.asarray(t, float)
            return s_dense(np.clip(t.ravel(), 0.0, T))[0].reshape(t.shape)

        def s_d1(t):
            return np.exp(-a * phi.val(t))

        def s_d2(t):
            return -a * phi.d1(t) * np.exp(-a * phi.val(t))

        if float(s_val(T)) >= C - _S_GUARD:
            raise ValueError("collar reaches the barrier radius; shorten T")
        s_prof = CallableProfile(s_val, s_d1, s_d2, label="quadrature reparam")
        b = 1.0 / (n - 1.0)

        def w_val(t):
            val, _ = sn(s_val(t))
            return np.exp(b * (phi.val(t) - f0)) * val

        def w_d1(t):
            val, der = sn(s_val(t))
            e = s_d1(t)
            return np.exp(b * (phi.val(t) - f0)) \
                * (b * phi.d1(t) * val + der * e)

        def w_d2(t):
            val, der = sn(s_val(t))
            e = s_d1(t)
            u = der / val
            lead = b * phi.d1(t) + u * e
            dlead = b * phi.d2(t) + (-kappa - u * u) * e * e \
                + u * (-a * phi.d1(t) * e)
            return np.exp(b * (phi.val(t) - f0)) * val \
                * (lead * lead + dlead)

        w = CallableProfile(w_val, w_d1, w_d2, label="free-density warping")
    else:
        case = "coupled-density"
        ratio = 1.0 if math.isinf(N) else (N - n) / (N - 1.0)
        beta = eps * ratio / c
        alpha = (1.0 - eps * ratio) / (c * (n - 1.0))

        def ode(t, y):
            val, _ = sn(min(y[0], C - 0.5 * _S_GUARD) if math.isfinite(C)
                        else y[0])
            return [math.exp(-a * f0) * float(val) ** (a * beta)]

        if T is None:
            if not math.isfinite(C):
                raise ValueError("non-ball pair: pass an explicit T")
            s_stop = s_fraction * C
        else:
            s_stop = (C - _S_GUARD) if math.isfinite(C) else INF_STOP

        def hit(t, y):
            return y[0] - s_stop
        hit.terminal = True

        if T is None:
            span = 1.0
            while True:
                sol = solve_ivp(ode, (0.0, span), [0.0], rtol=1e-10,
                                atol=1e-13, dense_output=True, events=hit,
                                max_step=span / 16.0)
                if sol.t_events[0].size:
                    T = float(sol.t_events[0][0])
                    break
                span *= 2.0
                if span > 1e8:
                    raise ValueError("reparametrized distance never reaches "
                                     "the requested fraction of the barrier")
        else:
            sol = solve_ivp(ode, (0.0, T), [0.0], rtol=1e-10, atol=1e-13,
                            dense_output=True, events=hit, max_step=T / 16.0)
            if sol.t_events[0].size or sol.t[-1] < T * (1 - 1e-12):
                raise ValueError("collar reaches the barrier radius; "
                                 "shorten T")
        s_dense = sol.sol

        def s_val(t):
            t = np.asarray(t, float)
            return s_dense(np.clip(t.ravel(), 0.0, T))[0].reshape(t.shape)

        def phi_val(t):
            val, _ = sn(s_val(t))
            return f0 - beta * np.log(val)

        def s_d1(t):
            val, _ = sn(s_val(t))
            return math.exp(-a * f0) * val ** (a * beta)

        def phi_d1(t):
            val, der = sn(s_val(t))
            return -beta * (der / val) * s_d1(t)

        def s_d2(t):
            return -a * phi_d1(t) * s_d1(t)

        def phi_d2(t):
            val, der = sn(s_val(t))
            u = der / val
            e = s_d1(t)
            return beta * e * e * (kappa + u * u - a * beta * u * u)

        def w_val(t):
            val, _ = sn(s_val(t))
            return val ** alpha

        def w_d1(t):
            val, der = sn(s_val(t))
            return alpha * (der / val) * s_d1(t) * w_val(t)

        def w_d2(t):
            val, der = sn(s_val(t))
            u = der / val
            e = s_d1(t)
            lead = alpha * u * e
            dlead = alpha * ((-kappa - u * u) * e * e + u * s_d2(t))
            return w_val(t) * (lead * lead + dlead)

        w = CallableProfile(w_val, w_d1, w_d2, label="coupled warping")
        phi = CallableProfile(phi_val, phi_d1, phi_d2,
                              label="coupled density")
        s_prof = CallableProfile(s_val, s_d1, s_d2, label="ode reparam")

    ts = np.linspace(1e-6 * T, T, 513)
    if fiber is None:
        bound = (kappa / c) * np.exp(-2.0 * a * np.asarray(phi.val(ts)))
        fiber = _auto_fiber(n, ts, w, phi, bound)
    M = WarpedManifold(n, fiber, w, phi, T, "collar",
                       label="equality[%s](%g,%g)" % (case, kappa, lam))
    return EqualityModel(M, case, n, N, eps, kappa, lam, f0, c, s_prof)
