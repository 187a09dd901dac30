"""Compiled inner loops for the eigenvalue shooting integrator.

The first eigenvalue solver in :mod:`warpcomp.spectrum` integrates the
first-order system obtained from the radial eigenvalue equation by the
substitution ``v = |phi'|^(p-2) phi'``:

    phi' = sign(v) |v|^(1/(p-1))
    v'   = -m * (S'(s)/S(s)) * v - nu * sign(phi) |phi|^(p-1)

where ``S`` is the boundary-normalized model amplitude for the pair
``(kappa, lam)`` and ``m`` is the radial coefficient (``n - 1`` by default).
The integration is a fixed-step RK4 recurrence, sequential in ``s``, which is
why these loops are the compilation target.  Everything here is scalar float
math so the numba and plain-Python paths produce bit-identical trajectories.
"""

import math

from ._backend import USE_NUMBA, njit


def sn_log_deriv(kappa, lam, s):
    """Logarithmic derivative S'(s)/S(s) of the boundary-normalized amplitude.

    ``S`` solves S'' + kappa S = 0 with S(0) = 1, S'(0) = -lam.  Valid for
    s strictly below the first positive zero of S.
    """
    if kappa > 0.0:
        r = math.sqrt(kappa)
        cs = math.cos(r * s)
        sn = math.sin(r * s)
        return (-r * sn - lam * cs) / (cs - (lam / r) * sn)
    elif kappa < 0.0:
        # Exponential-sum form of S; the cosh/sinh ratio cancels badly when
        # lam is close to sqrt(-kappa) and m*s is large.
        m = math.sqrt(-kappa)
        grow = 0.5 * (1.0 - lam / m)
        decay = 0.5 * (1.0 + lam / m)
        e2 = math.exp(-2.0 * m * s)
        return m * (grow - decay * e2) / (grow + decay * e2)
    else:
        return -lam / (1.0 - lam * s)


def eigen_rhs(phi, v, s, p, nu, mcoef, kappa, lam):
    """Right-hand side of the transformed first-order eigen system."""
    ei = 1.0 / (p - 1.0)
    if v >= 0.0:
        dphi = v ** ei
    else:
        dphi = -((-v) ** ei)
    if phi >= 0.0:
        fphi = phi ** (p - 1.0)
    else:
        fphi = -((-phi) ** (p - 1.0))
    dv = -mcoef * sn_log_deriv(kappa, lam, s) * v - nu * fphi
    return dphi, dv


def rk4_step(phi, v, s, h, p, nu, mcoef, kappa, lam):
    """One classical RK4 step of the eigen system from abscissa ``s``."""
    k1p, k1v = eigen_rhs(phi, v, s, p, nu, mcoef, kappa, lam)
    k2p, k2v = eigen_rhs(phi + 0.5 * h * k1p, v + 0.5 * h * k1v, s + 0.5 * h, p, nu, mcoef, kappa, lam)
    k3p, k3v = eigen_rhs(phi + 0.5 * h * k2p, v + 0.5 * h * k2v, s + 0.5 * h, p, nu, mcoef, kappa, lam)
    k4p, k4v = eigen_rhs(phi + h * k3p, v + h * k3v, s + h, p, nu, mcoef, kappa, lam)
    phi1 = phi + (h / 6.0) * (k1p + 2.0 * k2p + 2.0 * k3p + k4p)
    v1 = v + (h / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
    return phi1, v1


def shoot_end(p, nu, mcoef, kappa, lam, s_end, n_steps):
    """Integrate to ``s_end`` and report (v_end, phi_end, crossed).

    ``crossed`` is 1 when ``v`` reaches zero strictly before the final node,
    which means the trial ``nu`` lies above the first eigenvalue.  Blowing up
    past 1e12 is treated the same way.
    """
    h = s_end / n_steps
    phi = 0.0
    v = 1.0
    for i in range(n_steps):
        phi, v = rk4_step(phi, v, i * h, h, p, nu, mcoef, kappa, lam)
        if i < n_steps - 1 and v <= 0.0:
            return v, phi, 1
        if abs(v) > 1e12 or abs(phi) > 1e12:
            return v, phi, 1
    return v, phi, 0


def shoot_path(p, nu, mcoef, kappa, lam, s_end, phi_out, v_out):
    """Integrate like :func:`shoot_end` but record the whole trajectory.

    ``phi_out`` and ``v_out`` must have length ``n_steps + 1``; node ``i``
    holds the state at ``s = i * s_end / n_steps``.
    """
    n_steps = phi_out.shape[0] - 1
    h = s_end / n_steps
    phi = 0.0
    v = 1.0
    phi_out[0] = phi
    v_out[0] = v
    for i in range(n_steps):
        phi, v = rk4_step(phi, v, i * h, h, p, nu, mcoef, kappa, lam)
        phi_out[i + 1] = phi
        v_out[i + 1] = v


if USE_NUMBA:
    sn_log_deriv = njit(cache=True)(sn_log_deriv)
    eigen_rhs = njit(cache=True)(eigen_rhs)
    rk4_step = njit(cache=True)(rk4_step)
    shoot_end = njit(cache=True)(shoot_end)
    shoot_path = njit(cache=True)(shoot_path)
