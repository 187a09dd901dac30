"""Radial profile descriptors for warping and density functions.

A profile is a scalar function of the radial coordinate t together with its
first two derivatives.  Three concrete kinds cover everything the package
needs:

* :class:`ExprProfile` wraps a closed-form expression in t (grammar:
  ``t``, arithmetic, ``^`` or ``**`` powers, ``exp log sin cos sinh cosh``,
  numeric constants, ``pi``); derivatives are produced symbolically, never
  by differencing.
* :class:`SplineProfile` interpolates dense samples with a cubic spline and
  differentiates the spline.
* :class:`CallableProfile` carries explicit (value, d1, d2) callables; the
  equality-model builders use it because their profiles involve a numerically
  integrated reparametrization composed with closed forms.

All evaluation methods accept scalars or numpy arrays and return arrays of
the input shape (0-d for scalar input).
"""

import io
import tokenize

import numpy as np
import sympy as sp
from scipy.interpolate import CubicSpline
from sympy.parsing.sympy_parser import (convert_xor, parse_expr,
                                        standard_transformations)

_T = sp.Symbol("t")
_ALLOWED_FUNCS = (sp.exp, sp.log, sp.sin, sp.cos, sp.sinh, sp.cosh)
_LOCALS = {
    "t": _T,
    "exp": sp.exp,
    "log": sp.log,
    "sin": sp.sin,
    "cos": sp.cos,
    "sinh": sp.sinh,
    "cosh": sp.cosh,
    "pi": sp.pi,
}
_TRANSFORMS = standard_transformations + (convert_xor,)


class ProfileError(ValueError):
    """Raised for malformed or inconsistent profile descriptors."""


def _vectorized(fn):
    def call(t):
        t = np.asarray(t, dtype=float)
        out = np.asarray(fn(t), dtype=float)
        if out.shape != t.shape:
            out = np.broadcast_to(out, t.shape).copy()
        return out
    return call


class CallableProfile:
    """Profile given by explicit value and derivative callables."""

    def __init__(self, val, d1, d2, label="callable"):
        self._val = _vectorized(val)
        self._d1 = _vectorized(d1)
        self._d2 = _vectorized(d2)
        self.label = label

    def val(self, t):
        return self._val(t)

    def d1(self, t):
        return self._d1(t)

    def d2(self, t):
        return self._d2(t)

    def __repr__(self):
        return "CallableProfile(%s)" % self.label


def _screen_tokens(text):
    """Reject names and literals outside the grammar before sympy sees them.

    parse_expr ultimately calls eval, so unknown names must never reach it.
    """
    try:
        toks = list(tokenize.generate_tokens(io.StringIO(text).readline))
    except Exception as exc:
        raise ProfileError("cannot tokenize profile %r: %s" % (text, exc))
    for tok in toks:
        if tok.type == tokenize.NAME and tok.string not in _LOCALS:
            raise ProfileError("unknown symbols [%r] in profile %r"
                               % (tok.string, text))
        if tok.type == tokenize.STRING:
            raise ProfileError("string literals not allowed in profile %r"
                               % text)


class ExprProfile(CallableProfile):
    """Closed-form profile parsed from a restricted expression grammar."""

    def __init__(self, text):
        if isinstance(text, sp.Basic):
            expr = text
        else:
            _screen_tokens(str(text))
            try:
                expr = parse_expr(str(text), local_dict=_LOCALS,
                                  transformations=_TRANSFORMS, evaluate=True)
            except Exception as exc:
                raise ProfileError("cannot parse profile %r: %s" % (text, exc))
        bad_syms = expr.free_symbols - {_T}
        if bad_syms:
            raise ProfileError("unknown symbols %s in profile %r"
                               % (sorted(map(str, bad_syms)), str(text)))
        for node in expr.atoms(sp.Function):
            if not isinstance(node, _ALLOWED_FUNCS):
                raise ProfileError("function %r not in the profile grammar"
                                   % type(node).__name__)
        self.expr = expr
        d1 = sp.diff(expr, _T)
        d2 = sp.diff(d1, _T)
        super().__init__(
            sp.lambdify(_T, expr, modules="numpy"),
            sp.lambdify(_T, d1, modules="numpy"),
            sp.lambdify(_T, d2, modules="numpy"),
            label=str(expr),
        )

    def __repr__(self):
        return "ExprProfile(%s)" % self.label


class SplineProfile(CallableProfile):
    """Cubic-spline profile through dense (t, y) samples."""

    def __init__(self, ts, ys):
        ts = np.asarray(ts, dtype=float)
        ys = np.asarray(ys, dtype=float)
        if ts.ndim != 1 or ts.shape != ys.shape or ts.size < 8:
            raise ProfileError("spline profile needs >= 8 matching samples")
        if np.any(np.diff(ts) <= 0):
            raise ProfileError("spline sample abscissae must increase")
        spline = CubicSpline(ts, ys)
        self.ts = ts
        self.ys = ys
        super().__init__(spline, spline.derivative(1), spline.derivative(2),
                         label="spline[%g,%g]" % (ts[0], ts[-1]))

    def __repr__(self):
        return "SplineProfile(%s)" % self.label


def parse_profile(desc):
    """Build a profile from a scenario descriptor.

    Accepted forms: a bare expression string, ``{"expr": text}``,
    ``{"samples": {"t": [...], "y": [...]}}``, or both keys together, in
    which case the closed form is used and the samples are cross-checked
    against it to 1e-4 absolute.
    """
    if isinstance(desc, str):
        return ExprProfile(desc)
    if not isinstance(desc, dict):
        raise ProfileError("profile descriptor must be a string or an object")
    expr = desc.get("expr")
    samples = desc.get("samples")
    if expr is None and samples is None:
        raise ProfileError("profile descriptor needs 'expr' or 'samples'")
    prof_expr = ExprProfile(expr) if expr is not None else None
    prof_spl = None
    if samples is not None:
        try:
            prof_spl = SplineProfile(samples["t"], samples["y"])
        except (KeyError, TypeError):
            raise ProfileError("'samples' must carry arrays 't' and 'y'")
    if prof_expr is not None and prof_spl is not None:
        gap = np.max(np.abs(prof_expr.val(prof_spl.ts) - prof_spl.ys))
        if gap > 1e-4:
            raise ProfileError(
                "expression and samples disagree by %g (> 1e-4)" % gap)
        return prof_expr
    return prof_expr if prof_expr is not None else prof_spl


def constant_profile(value):
    """Profile of a constant function."""
    v = float(value)
    return CallableProfile(lambda t: np.full_like(np.asarray(t, float), v),
                           lambda t: np.zeros_like(np.asarray(t, float)),
                           lambda t: np.zeros_like(np.asarray(t, float)),
                           label="const %g" % v)


def mirror_profile(p, T):
    """The profile t -> p(T - t)."""
    return CallableProfile(lambda t: p.val(T - np.asarray(t, float)),
                           lambda t: -p.d1(T - np.asarray(t, float)),
                           lambda t: p.d2(T - np.asarray(t, float)),
                           label="mirror(%s)" % getattr(p, "label", "?"))


def derivative_consistency(profile, lo, hi, n=41, h=1e-5):
    """Worst relative gap between stored derivatives and central differences.

    Used as a structural invariant on freshly built profiles: a correctly
    wired profile keeps this below about 1e-6 for smooth data.
    """
    ts = np.linspace(lo + 2 * h, hi - 2 * h, n)
    v_p = profile.val(ts + h)
    v_m = profile.val(ts - h)
    fd1 = (v_p - v_m) / (2 * h)
    fd2 = (v_p - 2 * profile.val(ts) + v_m) / (h * h)
    scale1 = np.maximum(1.0, np.abs(profile.d1(ts)))
    scale2 = np.maximum(1.0, np.abs(profile.d2(ts)))
    gap1 = np.max(np.abs(fd1 - profile.d1(ts)) / scale1)
    gap2 = np.max(np.abs(fd2 - profile.d2(ts)) / scale2)
    return max(float(gap1), float(gap2))
