"""Configuration-driven batch runner.

Scenario files are JSON documents under the versioned schema
``verify-scenario/1``: one instance description (a builder case or explicit
profile expressions), admissible parameters, a list of check identifiers,
and optional tolerance overrides.  Suites generate seeded families of random
instances.  Both paths produce a :class:`RunReport` whose serialized form is
a pure function of (input bytes, seed, package version): wall time is kept
out of the canonical report and written to a sidecar instead.
"""

import hashlib
import json
import math
import os
import re
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import __version__
from . import models
from . import comparisons
from . import spectrum
from .manifolds import (WarpedManifold, build_cylinder, build_equality_model,
                        build_model_ball, build_point_space,
                        build_two_ended_model, einstein_fiber, sphere_fiber,
                        torus_fiber)
from .profiles import (CallableProfile, ProfileError, constant_profile,
                       parse_profile)

SCENARIO_SCHEMA = "verify-scenario/1"
REPORT_SCHEMA = "verify-report/1"

SUITE_FAMILIES = ("random-collar", "random-ball", "random-two-ended",
                  "equality-models", "eigen-suite")

_FAMILY_IDS = {name: 101 + k for k, name in enumerate(SUITE_FAMILIES)}

CSV_HEADER = "check_id,instance_id,t_or_s,lhs,rhs,margin"


class ScenarioError(ValueError):
    """Configuration problem: bad file, unknown identifier, invalid params."""


# ---------------------------------------------------------------------------
# report container
# ---------------------------------------------------------------------------

@dataclass
class RunReport:
    """Deterministic outcome of a scenario or suite run.

    ``entries`` are flat per-check dictionaries sorted by
    (check_id, instance_id); ``rows`` live inside each entry and feed the
    CSV table.  ``wall_time_s`` is informational only and excluded from
    :meth:`to_bytes`.
    """

    scenario: dict
    effective: dict
    instances: list
    entries: list
    aggregates: dict
    version: str
    input_digest: str
    wall_time_s: float = 0.0

    @property
    def passed(self):
        return not any(e["verdict"] == "violated" for e in self.entries)

    @property
    def verdict_counts(self):
        out = {}
        for e in self.entries:
            out[e["verdict"]] = out.get(e["verdict"], 0) + 1
        return out

    def to_doc(self, with_rows=False):
        entries = self.entries if with_rows else [
            {k: v for k, v in e.items() if k != "rows"} for e in self.entries
        ]
        return {
            "schema": REPORT_SCHEMA,
            "version": self.version,
            "input_digest": self.input_digest,
            "scenario": self.scenario,
            "effective": self.effective,
            "instances": self.instances,
            "aggregates": self.aggregates,
            "entries": entries,
        }

    def to_bytes(self, with_rows=False):
        doc = self.to_doc(with_rows=with_rows)
        return (json.dumps(doc, sort_keys=True, indent=1) + "\n").encode()


def _digest(data):
    return "sha256:" + hashlib.sha256(data).hexdigest()


def _thread_count():
    raw = os.environ.get("VERIFY_THREADS", "").strip()
    if not raw:
        return 1
    try:
        return max(1, int(raw))
    except ValueError:
        raise ScenarioError("VERIFY_THREADS must be an integer, got %r"
                            % raw)


def _pmap(fn, items):
    items = list(items)
    workers = min(_thread_count(), max(len(items), 1))
    if workers <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


# ---------------------------------------------------------------------------
# check registry
# ---------------------------------------------------------------------------

def _entry(result, instance_id):
    d = result.to_dict()
    rows = d.pop("rows")
    d["instance_id"] = instance_id
    d["rows"] = rows
    return d


def _relabel(results, suffix):
    return [replace(r, check_id=r.check_id + suffix) for r in results]


def _chk_riccati(M, cert, ctx):
    return [comparisons.check_riccati(M, cert, grid=ctx["grid"],
                                      tol=ctx["tol"])]


def _chk_boundary_laplacian(M, cert, ctx):
    return [comparisons.check_boundary_laplacian(M, cert, grid=ctx["grid"],
                                                 tol=ctx["tol"])]


def _chk_g_monotone(M, cert, ctx):
    return [comparisons.check_g_monotone(M, cert, grid=ctx["grid"],
                                         tol=ctx["tol"])]


def _chk_cut_bounds(M, cert, ctx):
    return comparisons.check_cut_bounds(M, cert, tol=ctx["tol"])


def _chk_bounded_density(M, cert, ctx):
    return comparisons.check_bounded_density(M, cert, grid=ctx["grid"],
                                             tol=ctx["tol"])


def _chk_p_laplacian(M, cert, ctx):
    out = []
    for p in ctx["p_list"]:
        out.extend(comparisons.check_p_laplacian(M, cert, p,
                                                 grid=ctx["grid"],
                                                 tol=ctx["tol"]))
    return out


def _chk_volume_elements(M, cert, ctx):
    return comparisons.check_volume_elements(M, cert, grid=ctx["grid"],
                                             tol=ctx["tol"])


def _chk_volume_comparisons(M, cert, ctx):
    return comparisons.check_volume_comparisons(M, cert, tol=ctx["tol"])


def _chk_inradius(M, cert, ctx):
    return comparisons.check_inradius(M, cert, tol=ctx["tol"])


def _chk_two_boundary(M, cert, ctx):
    return [comparisons.check_two_boundary_distance(M, cert, tol=ctx["tol"])]


def _chk_point_laplacian(M, cert, ctx):
    return comparisons.check_point_laplacian(M, cert, grid=ctx["grid"],
                                             tol=ctx["tol"])


def _chk_eigen(M, cert, ctx):
    out = []
    for p in ctx["p_list"]:
        rep = spectrum.check_eigen_theorems(
            M, ctx["N"], ctx["eps"], p, mesh=ctx["mesh"],
            ode_coeff=ctx["ode_coeff"], tol=ctx["ladder_tol"])
        out.extend(_relabel(rep.results, ":p=%g" % p))
    return out


def _chk_band_measure(M, cert, ctx):
    interval = ctx.get("interval")
    if interval is None:
        raise ScenarioError("check 'band_measure' needs options.interval "
                            "= [a, b]")
    return [spectrum.kasue_estimate(M, ctx["N"], ctx["eps"],
                                    tuple(interval), tol=ctx["tol"])]


_REGISTRY = {
    "riccati": _chk_riccati,
    "boundary_laplacian": _chk_boundary_laplacian,
    "g_monotone": _chk_g_monotone,
    "cut_bounds": _chk_cut_bounds,
    "bounded_density": _chk_bounded_density,
    "p_laplacian": _chk_p_laplacian,
    "volume_elements": _chk_volume_elements,
    "volume_comparisons": _chk_volume_comparisons,
    "inradius": _chk_inradius,
    "two_boundary_distance": _chk_two_boundary,
    "point_laplacian": _chk_point_laplacian,
    "eigen": _chk_eigen,
    "band_measure": _chk_band_measure,
}

_ALL_BOUNDARY = ("riccati", "boundary_laplacian", "g_monotone", "cut_bounds",
                 "bounded_density", "p_laplacian", "volume_elements",
                 "volume_comparisons", "inradius", "two_boundary_distance")

# checks that hold with equality (margins at solver tolerance) on exact
# equality collars; the strict-slack checks are left out on purpose
_EQUALITY_CHECKS = ("riccati", "boundary_laplacian", "g_monotone",
                    "bounded_density", "p_laplacian", "volume_elements",
                    "volume_comparisons")

_SOUNDNESS_CHECKS = ("riccati", "boundary_laplacian", "cut_bounds",
                     "bounded_density", "volume_elements",
                     "volume_comparisons", "p_laplacian")


def _expand_checks(names, M):
    out = []
    for name in names:
        if name == "all":
            if M.topology == "point_symmetric":
                out.extend(["riccati", "point_laplacian"])
            else:
                out.extend(_ALL_BOUNDARY)
        elif name in _REGISTRY:
            out.append(name)
        else:
            raise ScenarioError("unknown check id %r" % (name,))
    seen, uniq = set(), []
    for name in out:
        if name not in seen:
            seen.add(name)
            uniq.append(name)
    return uniq


def _run_checks(M, N, eps, check_names, ctx, instance_id):
    """Certify one instance and run the requested checks against it."""
    cert = comparisons.certify_hypotheses(M, N, eps)
    want = ctx.get("delta")
    if want is not None:
        if want < cert.delta - 1e-12:
            raise ScenarioError(
                "requested delta %g is below the certified value %g"
                % (want, cert.delta))
        cert = replace(cert, delta=float(want))
    local = dict(ctx)
    local["N"], local["eps"] = N, eps
    entries = []
    for name in check_names:
        for res in _REGISTRY[name](M, cert, local):
            entries.append(_entry(res, instance_id))
    info = {"instance_id": instance_id, "label": M.label, "n": M.n,
            "N": float(N), "eps": float(eps), "topology": M.topology,
            "certificate": cert.to_dict()}
    return info, entries


# ---------------------------------------------------------------------------
# instance construction from a scenario description
# ---------------------------------------------------------------------------

def _fiber_from_spec(spec, n):
    if spec is None:
        return torus_fiber(n - 1, 1.0)
    kind = spec.get("type")
    if kind == "torus":
        return torus_fiber(n - 1, float(spec.get("volume", 1.0)))
    if kind == "sphere":
        return sphere_fiber(n - 1, float(spec.get("radius", 1.0)))
    if kind == "einstein":
        return einstein_fiber(n - 1, float(spec.get("ricci_const", 0.0)),
                              float(spec.get("volume", 1.0)))
    raise ScenarioError("unknown fiber type %r" % (kind,))


def build_instance(spec, params):
    """Construct the manifold described by a scenario instance block."""
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ScenarioError("instance block needs a 'kind' field")
    kind = spec["kind"]
    n = spec.get("n")
    if n is None:
        raise ScenarioError("instance block needs the dimension 'n'")
    n = int(n)
    try:
        if kind == "model_ball":
            return build_model_ball(n, float(spec["kappa"]),
                                    float(spec["lam"]),
                                    trunc=float(spec.get("trunc", 1.0)),
                                    density0=float(spec.get("density0", 0.0)))
        if kind == "cylinder":
            return build_cylinder(n, height=float(spec.get("height", 1.0)),
                                  radius=float(spec.get("radius", 1.0)),
                                  density0=float(spec.get("density0", 0.0)))
        if kind == "point_space":
            return build_point_space(n, float(spec["kappa"]),
                                     T=spec.get("T"),
                                     trunc=float(spec.get("trunc", 0.95)))
        if kind == "two_ended_model":
            return build_two_ended_model(n, float(spec["kappa"]),
                                         float(spec["lam"]))
        if kind == "equality_model":
            em = build_equality_model(
                n, params["N"], params["eps"], float(spec["kappa"]),
                float(spec["lam"]), f0=float(spec.get("f0", 0.0)),
                T=spec.get("T"),
                s_fraction=float(spec.get("s_fraction", 0.75)),
                density=spec.get("density"))
            return em.manifold
        if kind == "collar":
            w = parse_profile(spec["w"])
            phi = parse_profile(spec.get("phi", "0"))
            topology = spec.get("topology", "collar")
            return WarpedManifold(n, _fiber_from_spec(spec.get("fiber"), n),
                                  w, phi, float(spec["T"]), topology,
                                  label=spec.get("label", "collar"))
    except ScenarioError:
        raise
    except KeyError as exc:
        raise ScenarioError("instance kind %r is missing field %s"
                            % (kind, exc))
    except (ProfileError, ValueError) as exc:
        raise ScenarioError("cannot build instance: %s" % exc)
    raise ScenarioError("unknown instance kind %r" % (kind,))


# ---------------------------------------------------------------------------
# scenario loading and execution
# ---------------------------------------------------------------------------

_SCENARIO_KEYS = {"schema", "label", "instance", "params", "checks",
                  "options", "seed"}
_OPTION_KEYS = {"p_list", "grid", "tol", "ladder_tol", "mesh", "ode_coeff",
                "interval", "delta"}


def load_scenario(path):
    """Read and validate a scenario file; returns (scenario dict, raw bytes).

    Parse failures carry the line/column reported by the JSON decoder;
    structural failures name the offending field.
    """
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise ScenarioError("cannot read scenario %s: %s" % (path, exc))
    try:
        doc = json.loads(raw.decode("utf-8"))
    except UnicodeDecodeError as exc:
        raise ScenarioError("scenario %s is not UTF-8: %s" % (path, exc))
    except json.JSONDecodeError as exc:
        raise ScenarioError("parse error in %s at line %d column %d: %s"
                            % (path, exc.lineno, exc.colno, exc.msg))
    if not isinstance(doc, dict):
        raise ScenarioError("scenario root must be an object")
    if doc.get("schema") != SCENARIO_SCHEMA:
        raise ScenarioError("unsupported scenario schema %r (expected %r)"
                            % (doc.get("schema"), SCENARIO_SCHEMA))
    unknown = set(doc) - _SCENARIO_KEYS
    if unknown:
        raise ScenarioError("unknown scenario keys: %s"
                            % ", ".join(sorted(unknown)))
    for key in ("instance", "params", "checks"):
        if key not in doc:
            raise ScenarioError("scenario is missing the %r block" % key)
    opt = doc.get("options", {})
    if not isinstance(opt, dict):
        raise ScenarioError("options must be an object")
    bad = set(opt) - _OPTION_KEYS
    if bad:
        raise ScenarioError("unknown option keys: %s"
                            % ", ".join(sorted(bad)))
    if not isinstance(doc["checks"], list) or not doc["checks"]:
        raise ScenarioError("checks must be a non-empty list")
    for name in doc["checks"]:
        if name != "all" and name not in _REGISTRY:
            raise ScenarioError("unknown check id %r" % (name,))
    return doc, raw


def _context(options, overrides):
    ctx = {
        "grid": comparisons.DEFAULT_GRID,
        "tol": comparisons.DEFAULT_TOL,
        "ladder_tol": spectrum.LADDER_SLACK,
        "p_list": [1.5, 2.0, 3.0],
        "mesh": None,
        "ode_coeff": "paper",
        "interval": None,
        "delta": None,
    }
    for key, val in options.items():
        if val is not None:
            ctx[key] = val
    for key, val in overrides.items():
        if val is not None:
            ctx[key] = val
    ctx["grid"] = int(ctx["grid"])
    ctx["tol"] = float(ctx["tol"])
    ctx["ladder_tol"] = float(ctx["ladder_tol"])
    ctx["p_list"] = [float(p) for p in ctx["p_list"]]
    if ctx["ode_coeff"] not in ("paper", "cinv"):
        raise ScenarioError("ode_coeff must be 'paper' or 'cinv'")
    return ctx


def _sorted_entries(entries):
    return sorted(entries, key=lambda e: (e["check_id"], e["instance_id"]))


def _aggregate(entries):
    agg = {}
    for e in entries:
        slot = agg.setdefault(e["check_id"], {
            "entries": 0, "violations": 0, "worst_margin": math.nan,
            "worst_instance": ""})
        slot["entries"] += 1
        if e["verdict"] == "violated":
            slot["violations"] += 1
        m = e["margin"]
        if not math.isnan(m) and (math.isnan(slot["worst_margin"])
                                  or m < slot["worst_margin"]):
            slot["worst_margin"] = m
            slot["worst_instance"] = e["instance_id"]
    return agg


def _effective(ctx, seed):
    out = {k: ctx[k] for k in ("grid", "tol", "ladder_tol", "p_list",
                               "mesh", "ode_coeff", "interval", "delta")}
    out["seed"] = seed
    return out


def run_scenario(path, seed=None, tol=None, grid=None, ode_coeff=None):
    """Execute one scenario file and assemble the deterministic report.

    Command-line overrides (seed, tol, grid, ode_coeff) take precedence
    over the scenario's own options and are echoed in the report.
    """
    t0 = time.perf_counter()
    doc, raw = load_scenario(path)
    params = doc["params"]
    if not isinstance(params, dict):
        raise ScenarioError("params must be an object")
    try:
        n = int(doc["instance"].get("n"))
        N = float(params["N"])
        eps = float(params["eps"])
    except (KeyError, TypeError, ValueError):
        raise ScenarioError("params needs numeric N and eps, instance "
                            "needs n")
    chk = models.validate_params(n, N, eps)
    if not chk.ok:
        raise ScenarioError(chk.reason)
    ctx = _context(doc.get("options", {}),
                   {"tol": tol, "grid": grid, "ode_coeff": ode_coeff})
    eff_seed = int(seed if seed is not None else doc.get("seed", 0))
    M = build_instance(doc["instance"], {"N": N, "eps": eps})
    label = doc.get("label") or os.path.splitext(os.path.basename(path))[0]
    names = _expand_checks(doc["checks"], M)

    try:
        info, entries = _run_checks(M, N, eps, names, ctx, label)
    except ValueError as exc:
        raise ScenarioError("check execution failed: %s" % exc)
    entries = _sorted_entries(entries)
    report = RunReport(
        scenario=doc, effective=_effective(ctx, eff_seed),
        instances=[info], entries=entries, aggregates=_aggregate(entries),
        version=__version__, input_digest=_digest(raw),
        wall_time_s=time.perf_counter() - t0)
    return report


# ---------------------------------------------------------------------------
# random families
# ---------------------------------------------------------------------------

def _poly_funcs(coeffs):
    c0 = np.asarray(coeffs, dtype=float)
    c1 = np.polynomial.polynomial.polyder(c0)
    c2 = np.polynomial.polynomial.polyder(c1)
    pv = np.polynomial.polynomial.polyval

    def v(t):
        return pv(np.asarray(t, dtype=float), c0)

    def d1(t):
        return pv(np.asarray(t, dtype=float), c1)

    def d2(t):
        return pv(np.asarray(t, dtype=float), c2)

    return v, d1, d2


def _poly_profile(coeffs, label="poly"):
    v, d1, d2 = _poly_funcs(coeffs)
    return CallableProfile(v, d1, d2, label=label)


def _exp_poly_profile(coeffs, label="exp-poly"):
    v, d1, d2 = _poly_funcs(coeffs)

    def val(t):
        return np.exp(v(t))

    def der1(t):
        return d1(t) * np.exp(v(t))

    def der2(t):
        return (d2(t) + d1(t) ** 2) * np.exp(v(t))

    return CallableProfile(val, der1, der2, label=label)


def _ball_profile(T, coeffs):
    """w(t) = (T - t) exp(q(t) - q(T)): positive inside, smooth unit cap."""
    v, d1, d2 = _poly_funcs(coeffs)
    qT = float(v(T))

    def val(t):
        t = np.asarray(t, dtype=float)
        return (T - t) * np.exp(v(t) - qT)

    def der1(t):
        t = np.asarray(t, dtype=float)
        return np.exp(v(t) - qT) * ((T - t) * d1(t) - 1.0)

    def der2(t):
        t = np.asarray(t, dtype=float)
        return np.exp(v(t) - qT) * ((T - t) * (d2(t) + d1(t) ** 2)
                                    - 2.0 * d1(t))

    return CallableProfile(val, der1, der2, label="ball-profile")


def _sym_profile(T, coeffs, exp_form):
    """q(t) + q(T - t), optionally exponentiated; mirror-symmetric exactly."""
    v, d1, d2 = _poly_funcs(coeffs)

    def sv(t):
        t = np.asarray(t, dtype=float)
        return v(t) + v(T - t)

    def sd1(t):
        t = np.asarray(t, dtype=float)
        return d1(t) - d1(T - t)

    def sd2(t):
        t = np.asarray(t, dtype=float)
        return d2(t) + d2(T - t)

    if not exp_form:
        return CallableProfile(sv, sd1, sd2, label="sym-poly")

    def val(t):
        return np.exp(sv(t))

    def der1(t):
        return sd1(t) * np.exp(sv(t))

    def der2(t):
        return (sd2(t) + sd1(t) ** 2) * np.exp(sv(t))

    return CallableProfile(val, der1, der2, label="sym-exp-poly")


def _draw_params(rng, n):
    pool = [1.0, float(n), 5.0, 0.0, math.inf]
    N = pool[int(rng.integers(len(pool)))]
    if N == 1.0:
        eps = 0.0
    elif N == float(n):
        eps = float(rng.uniform(-1.5, 1.5))
    else:
        eps = float(rng.uniform(-0.8, 0.8)) * models.eps_range(n, N)
    return N, eps


def _draw_fiber(rng, n):
    if n == 2:
        return torus_fiber(1, float(rng.uniform(0.5, 3.0)))
    k = int(rng.integers(3))
    if k == 0:
        return torus_fiber(n - 1, float(rng.uniform(0.5, 3.0)))
    if k == 1:
        return sphere_fiber(n - 1, float(rng.uniform(0.8, 1.6)))
    return einstein_fiber(n - 1, float(rng.uniform(-0.5, 1.0)))


def _density_profile(rng, N, n, coeffs):
    # N = n admits only constant densities (the N - n curvature term)
    if N == float(n):
        return constant_profile(float(coeffs[0]))
    return _poly_profile(coeffs)


def _gen_collar(rng, i):
    n = int(rng.integers(2, 5))
    N, eps = _draw_params(rng, n)
    T = float(rng.uniform(0.6, 1.4))
    w = _exp_poly_profile(rng.uniform(-0.5, 0.5, size=5))
    phi = _density_profile(rng, N, n, rng.uniform(-0.5, 0.5, size=5))
    M = WarpedManifold(n, _draw_fiber(rng, n), w, phi, T, "collar",
                       label="random-collar-%03d" % i)
    return M, N, eps


def _gen_ball(rng, i):
    n = int(rng.integers(2, 5))
    N, eps = _draw_params(rng, n)
    T = float(rng.uniform(0.8, 1.5))
    w = _ball_profile(T, rng.uniform(-0.3, 0.3, size=4))
    phi = _density_profile(rng, N, n, rng.uniform(-0.5, 0.5, size=5))
    M = WarpedManifold(n, sphere_fiber(n - 1, 1.0), w, phi, T, "ball_apex",
                       label="random-ball-%03d" % i)
    return M, N, eps


def _gen_two_ended(rng, i):
    n = int(rng.integers(2, 4))
    N, eps = _draw_params(rng, n)
    T = float(rng.uniform(1.2, 2.2))
    w = _sym_profile(T, rng.uniform(-0.4, 0.4, size=4), exp_form=True)
    coeffs = rng.uniform(-0.4, 0.4, size=4)
    if N == float(n):
        phi = constant_profile(float(coeffs[0]))
    else:
        phi = _sym_profile(T, coeffs, exp_form=False)
    M = WarpedManifold(n, torus_fiber(n - 1, 1.0), w, phi, T, "two_ended",
                       label="random-two-ended-%03d" % i)
    return M, N, eps


_EQ_PAIRS = ((0.0, 1.0), (1.0, -1.0), (-1.0, 2.0), (-1.0, 0.5),
             (-2.0, math.sqrt(2.0)))


def _gen_equality(rng, i):
    n = int(rng.integers(2, 6))
    pool = [float(n), 1.0, n + 2.0, 0.0, math.inf]
    N = pool[int(rng.integers(len(pool)))]
    if N == 1.0:
        eps = 0.0
    elif N == float(n):
        eps = float(rng.uniform(-1.0, 1.0))
    else:
        eps = float(rng.uniform(-0.7, 0.7)) * models.eps_range(n, N)
    kappa, lam = _EQ_PAIRS[int(rng.integers(len(_EQ_PAIRS)))]
    f0 = float(rng.uniform(-0.3, 0.4))
    T = None if models.is_ball_pair(kappa, lam) \
        else float(rng.uniform(0.8, 2.0))
    density = None
    if N == 1.0 and rng.random() < 0.5:
        density = _poly_profile(rng.uniform(-0.4, 0.4, size=4))
    em = build_equality_model(n, N, eps, kappa, lam, f0=f0, T=T,
                              density=density)
    M = replace(em.manifold, label="equality-%03d" % i)
    return M, N, eps


_GENERATORS = {
    "random-collar": (_gen_collar, _SOUNDNESS_CHECKS),
    "random-ball": (_gen_ball, _SOUNDNESS_CHECKS),
    "random-two-ended": (_gen_two_ended,
                         _SOUNDNESS_CHECKS + ("two_boundary_distance",)),
    "equality-models": (_gen_equality, _EQUALITY_CHECKS),
}


def _draw_monotone_pair(rng):
    """Random monotone-condition pair with a usable model length."""
    kind = int(rng.integers(4))
    if kind == 0:
        kappa = float(rng.uniform(0.2, 2.0))
        lam = float(rng.uniform(0.0, 1.5))
    elif kind == 1:
        kappa = 0.0
        lam = float(rng.uniform(0.3, 1.5))
    elif kind == 2:
        kappa = float(-rng.uniform(0.2, 2.0))
        lam = math.sqrt(-kappa)
    else:
        kappa = float(-rng.uniform(0.2, 2.0))
        lam = math.sqrt(-kappa) * float(rng.uniform(1.05, 2.0))
    C = models.barrier_C(kappa, lam)
    if math.isfinite(C):
        D = C * float(rng.uniform(0.3, 0.95))
    else:
        D = float(rng.uniform(0.5, 2.0))
    return kappa, lam, D


def _oracle_agreement_entry(p, kappa, lam, D, n, instance_id, mesh):
    shoot = spectrum.model_eigenvalue(p, n, kappa, lam, D)
    mcoef = n - 1.0

    def weight(t):
        val, _ = models.sn_boundary(kappa, lam, np.asarray(t, dtype=float))
        return np.asarray(val, dtype=float) ** mcoef

    fd = spectrum.fd_eigenvalue_oracle(p, weight, D, mesh=mesh)
    rel = abs(shoot.value - fd.value) / max(abs(fd.value), 1e-30)
    row = comparisons.CheckRow(D, shoot.value, fd.value, 1e-4 - rel)
    verdict = "holds" if rel <= 1e-4 else "violated"
    note = ("kappa=%.6g lam=%.6g D=%.6g n=%d rel_gap=%.3e"
            % (kappa, lam, D, n, rel))
    res = comparisons.CheckResult("oracle_agreement:p=%g" % p, verdict,
                                  1e-4 - rel, D, 1e-4, note, [row])
    return _entry(res, instance_id)


def _run_eigen_suite(count, seed, ctx):
    """Shooting-vs-grid agreement plus ladder checks on compact instances."""
    jobs = []
    for i in range(count):
        jobs.append(("agree", 2.0, i))
    extra = max(count // 4, 1)
    for i in range(extra):
        jobs.append(("agree", 1.5, count + i))
    for i in range(extra):
        jobs.append(("agree", 3.0, count + extra + i))
    ladder_n = min(count, 8)
    for i in range(ladder_n):
        jobs.append(("ladder", 2.0, i))

    fam = _FAMILY_IDS["eigen-suite"]

    def run_job(job):
        kind, p, i = job
        rng = np.random.default_rng([fam, int(seed), i,
                                     int(round(10 * p)),
                                     0 if kind == "agree" else 1])
        if kind == "agree":
            kappa, lam, D = _draw_monotone_pair(rng)
            n = int(rng.integers(2, 5))
            mesh = ctx["mesh"]
            if mesh is None and p != 2.0:
                mesh = 400
            entry = _oracle_agreement_entry(
                p, kappa, lam, D, n, "eigen-%s-%03d" % (_ptag(p), i), mesh)
            return None, [entry]
        if i % 2 == 0:
            M, N, eps = _gen_ball(rng, i)
        else:
            M, N, eps = _gen_two_ended(rng, i)
        M = replace(M, label="eigen-ladder-%03d" % i)
        local = dict(ctx)
        local["p_list"] = [p]
        return _run_checks(M, N, eps, ("eigen",), local,
                           "eigen-ladder-%03d" % i)

    results = _pmap(run_job, jobs)
    instances = [info for info, _ in results if info is not None]
    entries = [e for _, es in results for e in es]
    return instances, entries


def _ptag(p):
    return ("p%g" % p).replace(".", "_")


def run_suite(family, count, seed, tol=None, grid=None, ode_coeff=None):
    """Generate and check a deterministic random family.

    Instance i is drawn from ``default_rng([family_id, seed, i, ...])``, so
    the report depends only on (family, count, seed, package version).
    """
    if family not in SUITE_FAMILIES:
        raise ScenarioError("unknown suite family %r (choose from %s)"
                            % (family, ", ".join(SUITE_FAMILIES)))
    count = int(count)
    if count <= 0:
        raise ScenarioError("count must be positive")
    t0 = time.perf_counter()
    ctx = _context({}, {"tol": tol, "grid": grid, "ode_coeff": ode_coeff})
    spec = {"schema": SCENARIO_SCHEMA, "suite": family, "count": count,
            "seed": int(seed)}
    raw = json.dumps(spec, sort_keys=True).encode()

    if family == "eigen-suite":
        instances, entries = _run_eigen_suite(count, seed, ctx)
    else:
        gen, checks = _GENERATORS[family]
        fam = _FAMILY_IDS[family]

        def run_one(i):
            rng = np.random.default_rng([fam, int(seed), i])
            M, N, eps = gen(rng, i)
            return _run_checks(M, N, eps, checks, ctx, M.label)

        results = _pmap(run_one, range(count))
        instances = [info for info, _ in results]
        entries = [e for _, es in results for e in es]

    entries = _sorted_entries(entries)
    instances = sorted(instances, key=lambda d: d["instance_id"])
    report = RunReport(
        scenario=spec, effective=_effective(ctx, int(seed)),
        instances=instances, entries=entries,
        aggregates=_aggregate(entries), version=__version__,
        input_digest=_digest(raw), wall_time_s=time.perf_counter() - t0)
    return report


# ---------------------------------------------------------------------------
# emission
# ---------------------------------------------------------------------------

def _slug(text):
    out = re.sub(r"[^A-Za-z0-9._-]+", "-", text).strip("-")
    return out or "report"


def emit_tables(report, fmt, out_dir=".", basename=None):
    """Write the report artifacts; returns the list of paths written.

    ``json`` writes the canonical report (rows elided) plus a sidecar with
    the wall time; ``csv`` additionally writes every evaluation row under
    the fixed header.  An empty report still produces files with headers.
    """
    if fmt not in ("json", "csv"):
        raise ScenarioError("format must be 'json' or 'csv', got %r"
                            % (fmt,))
    if basename is None:
        label = report.scenario.get("label") or \
            report.scenario.get("suite") or "report"
        basename = _slug(str(label))
    paths = []
    try:
        os.makedirs(out_dir, exist_ok=True)
        jpath = os.path.join(out_dir, basename + ".report.json")
        with open(jpath, "wb") as fh:
            fh.write(report.to_bytes())
        paths.append(jpath)
        mpath = os.path.join(out_dir, basename + ".meta.json")
        with open(mpath, "w", encoding="utf-8") as fh:
            json.dump({"schema": "verify-report-meta/1",
                       "wall_time_s": report.wall_time_s}, fh)
            fh.write("\n")
        paths.append(mpath)
        if fmt == "csv":
            cpath = os.path.join(out_dir, basename + ".margins.csv")
            with open(cpath, "w", encoding="utf-8", newline="") as fh:
                fh.write(CSV_HEADER + "\n")
                for e in report.entries:
                    for t_or_s, lhs, rhs, margin in e["rows"]:
                        fh.write("%s,%s,%r,%r,%r,%r\n"
                                 % (e["check_id"], e["instance_id"],
                                    float(t_or_s), float(lhs), float(rhs),
                                    float(margin)))
            paths.append(cpath)
    except OSError as exc:
        raise ScenarioError("cannot write report artifact %s: %s"
                            % (getattr(exc, "filename", out_dir), exc))
    return paths
