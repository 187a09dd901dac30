"""Certification and comparison checks: soundness, equality, violations."""

import json
import math
from dataclasses import replace

import numpy as np
import pytest

from warpcomp import comparisons as cmp
from warpcomp import manifolds as mf
from warpcomp import models
from warpcomp.profiles import ExprProfile, constant_profile


def wild_collar(n=3, T=1.2):
    return mf.WarpedManifold(n, mf.torus_fiber(n - 1),
                             ExprProfile("exp(0.3*sin(2*t))"),
                             ExprProfile("0.4*cos(t)"), T, "collar",
                             label="wild")


# ---------------------------------------------------------------------------
# certification
# ---------------------------------------------------------------------------

def test_certify_euclidean_ball():
    ball = mf.build_model_ball(3, 0.0, 1.0)
    cert = cmp.certify_hypotheses(ball, 3.0, 0.0)
    assert cert.c == pytest.approx(0.5)
    assert cert.a == pytest.approx(1.0)
    assert cert.kappa == pytest.approx(0.0, abs=1e-8)
    assert cert.lam == pytest.approx(1.0, abs=1e-9)
    assert cert.delta == pytest.approx(0.0, abs=1e-12)
    assert cert.scaled_pair == pytest.approx((cert.kappa, cert.lam))


def test_certify_recovers_model_pair():
    for kappa, lam in ((1.0, 0.5), (-1.0, 1.5), (2.0, -0.4)):
        if models.is_ball_pair(kappa, lam):
            M = mf.build_model_ball(3, kappa, lam)
        else:
            M = mf.build_two_ended_model(3, kappa, lam)
        cert = cmp.certify_hypotheses(M, 3.0, 0.0)
        assert cert.kappa == pytest.approx(kappa, abs=2e-6), (kappa, lam)
        assert cert.lam == pytest.approx(lam, abs=1e-8), (kappa, lam)


def test_certify_density_bound():
    col = mf.WarpedManifold(3, mf.torus_fiber(2), constant_profile(1.0),
                            ExprProfile("0.1*t"), 1.0, "collar")
    cert = cmp.certify_hypotheses(col, math.inf, 0.0)
    assert cert.delta == pytest.approx(0.05, abs=1e-9)
    assert cert.delta_location == pytest.approx(1.0, abs=1e-6)
    # eps = 1 (admissible at N = n, constant density) removes the bound
    flat = mf.WarpedManifold(3, mf.torus_fiber(2), constant_profile(1.0),
                             constant_profile(0.7), 1.0, "collar")
    cert1 = cmp.certify_hypotheses(flat, 3.0, 1.0)
    assert cert1.delta == 0.0
    assert cert1.a == 0.0


def test_certify_fiber_direction_can_bind():
    # a negatively curved Einstein fiber under a flat product pulls the
    # fiber direction below the (zero) radial one
    M = mf.WarpedManifold(3, mf.einstein_fiber(2, -1.0),
                          constant_profile(1.0), constant_profile(0.0),
                          1.0, "collar")
    cert = cmp.certify_hypotheses(M, math.inf, 0.0)
    assert cert.kappa_direction == "fiber"
    assert cert.kappa == pytest.approx(-0.5, abs=1e-9)


def test_certify_unknown_fiber_notes():
    M = mf.WarpedManifold(3, mf.Fiber(2, 1.0, None), constant_profile(1.0),
                          constant_profile(0.0), 1.0, "collar")
    cert = cmp.certify_hypotheses(M, math.inf, 0.0)
    assert any("radial directions only" in n for n in cert.notes)


def test_certify_rejects_bad_params():
    M = wild_collar()
    with pytest.raises(ValueError, match="N in \\]1,n\\[ forbidden"):
        cmp.certify_hypotheses(M, 2.0, 0.0)
    with pytest.raises(ValueError, match="admissible"):
        cmp.certify_hypotheses(M, 5.0, 3.0)


def test_certificate_serializes():
    cert = cmp.certify_hypotheses(wild_collar(), 7.0, 0.5)
    doc = json.dumps(cert.to_dict())
    assert "kappa" in doc and "refine_gap" in doc


# ---------------------------------------------------------------------------
# hypothesis-free Riccati check
# ---------------------------------------------------------------------------

def test_riccati_holds_everywhere():
    for N, eps in ((math.inf, 0.8), (7.0, 0.5), (1.0, 0.0)):
        M = wild_collar()
        cert = cmp.certify_hypotheses(M, N, eps)
        res = cmp.check_riccati(M, cert, grid=256)
        assert res.passed, (N, eps, res.verdict, res.margin)
        assert res.margin >= -1e-7


def test_riccati_point_instance():
    pt = mf.build_point_space(3, -1.0)
    cert = cmp.certify_hypotheses(pt, 3.0, 0.0)
    res = cmp.check_riccati(pt, cert, grid=256)
    assert res.passed


# ---------------------------------------------------------------------------
# sharp boundary Laplacian and monotone defect
# ---------------------------------------------------------------------------

def test_boundary_laplacian_equality_on_models():
    for kappa, lam in ((0.0, 1.0), (1.0, 0.5), (-1.0, 1.5)):
        ball = mf.build_model_ball(3, kappa, lam)
        cert = cmp.certify_hypotheses(ball, 3.0, 0.0)
        res = cmp.check_boundary_laplacian(ball, cert, tol=1e-6)
        assert res.verdict == "equality", (kappa, lam, res.margin)


def test_boundary_laplacian_detects_false_certificate():
    ball = mf.build_model_ball(3, 0.0, 1.0)
    cert = cmp.certify_hypotheses(ball, 3.0, 0.0)
    forged = replace(cert, kappa=cert.kappa + 0.5)
    res = cmp.check_boundary_laplacian(ball, forged)
    assert res.verdict == "violated"
    assert res.margin < -1e-4
    forged2 = replace(cert, lam=cert.lam + 0.3)
    res2 = cmp.check_boundary_laplacian(ball, forged2)
    assert res2.verdict == "violated"


def test_g_monotone_on_equality_model():
    em = mf.build_equality_model(3, 5.0, 0.5, -1.0, 2.0, f0=0.2)
    M = em.manifold
    cert = cmp.certify_hypotheses(M, 5.0, 0.5)
    res = cmp.check_g_monotone(M, cert, tol=1e-6)
    assert res.passed
    assert abs(res.margin) <= 1e-6


def test_boundary_laplacian_equality_model_generic():
    em = mf.build_equality_model(3, 5.0, 0.5, -1.0, 2.0, f0=0.2)
    M = em.manifold
    cert = cmp.certify_hypotheses(M, 5.0, 0.5)
    res = cmp.check_boundary_laplacian(M, cert, tol=1e-6)
    assert res.verdict == "equality", (res.margin, res.note)


# ---------------------------------------------------------------------------
# cut and inradius barriers
# ---------------------------------------------------------------------------

def test_cut_bounds_model_ball_equality():
    ball = mf.build_model_ball(3, 0.0, 1.0)
    cert = cmp.certify_hypotheses(ball, 3.0, 0.0)
    conf, scaled = cmp.check_cut_bounds(ball, cert, tol=1e-6)
    assert conf.check_id == "cut_bound_conformal"
    assert conf.verdict == "equality"
    assert scaled.verdict == "equality"


def test_cut_bounds_truncated_slack():
    col = mf.build_model_ball(3, 0.0, 1.0, trunc=0.6)
    cert = cmp.certify_hypotheses(col, 3.0, 0.0)
    conf, scaled = cmp.check_cut_bounds(col, cert, tol=1e-7)
    assert conf.verdict == "holds"
    assert conf.margin == pytest.approx(0.4, abs=1e-6)
    assert scaled.verdict == "holds"


def test_cut_bounds_skip_without_barrier():
    cyl = mf.build_cylinder(3, height=2.0)
    cert = cmp.certify_hypotheses(cyl, 5.0, 0.3)
    out = cmp.check_cut_bounds(cyl, cert)
    assert all(r.verdict == "skip" for r in out)
    assert "no finite barrier" in out[0].note


def test_refinement_note_on_borderline():
    col = mf.build_model_ball(3, 0.0, 1.0, trunc=1.0 - 5e-7)
    cert = cmp.certify_hypotheses(col, 3.0, 0.0)
    conf, _ = cmp.check_cut_bounds(col, cert, tol=1e-7)
    assert conf.verdict == "holds"
    assert "refined grid" in conf.note


def test_inradius_equality_with_rigidity():
    ball = mf.build_model_ball(3, 1.0, 0.5)
    cert = cmp.certify_hypotheses(ball, 3.0, 0.0)
    conf, scaled = cmp.check_inradius(ball, cert)
    assert conf.verdict == "equality"
    assert "rigidity profile verified" in conf.note
    assert scaled.verdict == "equality"


def test_inradius_extremal_without_rigidity_is_violated():
    # flat collar with a forged boundary floor: the claimed barrier is
    # attained but the warping is not the forced profile
    col = mf.WarpedManifold(3, mf.torus_fiber(2), constant_profile(1.0),
                            constant_profile(0.0), 1.0, "collar")
    cert = cmp.certify_hypotheses(col, 3.0, 0.0)
    forged = replace(cert, lam=1.0)
    conf, scaled = cmp.check_inradius(col, forged)
    assert conf.verdict == "violated"
    assert "without the rigidity profile" in conf.note
    assert scaled.verdict == "violated"


def test_two_boundary_distance_paths():
    cyl = mf.build_cylinder(3, height=1.0)
    cert = cmp.certify_hypotheses(cyl, 5.0, 0.3)
    assert cmp.check_two_boundary_distance(cyl, cert).verdict == "skip"
    # forged positive floor with negative boundary floor: bound holds
    res = cmp.check_two_boundary_distance(
        cyl, replace(cert, kappa=1.0, lam=-1.0))
    assert res.verdict == "holds"   # 1.0 < 2 atan(1) = pi/2
    # forged positive floor with nonnegative boundary floor: contradiction
    res2 = cmp.check_two_boundary_distance(
        cyl, replace(cert, kappa=1.0, lam=0.5))
    assert res2.verdict == "violated"
    # forged floor too strong for the actual height
    tall = mf.build_cylinder(3, height=2.0)
    cert_t = cmp.certify_hypotheses(tall, 5.0, 0.3)
    res3 = cmp.check_two_boundary_distance(
        tall, replace(cert_t, kappa=1.0, lam=-1.0))
    assert res3.verdict == "violated"   # 2.0 > pi/2


def test_two_boundary_distance_extremal_mirror_model():
    two = mf.build_two_ended_model(3, 1.0, -1.0)
    cert = cmp.certify_hypotheses(two, 3.0, 0.0)
    res = cmp.check_two_boundary_distance(two, cert)
    assert res.verdict == "equality"
    assert "rigidity profile verified" in res.note


# ---------------------------------------------------------------------------
# density-bounded and p-Laplacian variants
# ---------------------------------------------------------------------------

def test_bounded_density_on_dense_ball():
    ball = mf.build_model_ball(3, 0.0, 1.0, density0=0.3)
    cert = cmp.certify_hypotheses(ball, math.inf, 0.0)
    assert cert.delta == pytest.approx(0.15, abs=1e-9)
    weak, strong = cmp.check_bounded_density(ball, cert)
    assert weak.passed and strong.passed
    assert weak.verdict != "skip" and strong.verdict != "skip"


def test_bounded_density_skips_non_monotone():
    two = mf.build_two_ended_model(3, 1.0, -1.0)
    cert = cmp.certify_hypotheses(two, 3.0, 0.0)
    weak, strong = cmp.check_bounded_density(two, cert)
    # pair (1, -1) is weakly monotone but not monotone
    assert weak.verdict != "skip"
    assert strong.verdict == "skip"


def test_p_laplacian_equality_on_model():
    em = mf.build_equality_model(3, 5.0, 0.5, -1.0, 2.0, f0=0.2)
    M = em.manifold
    cert = cmp.certify_hypotheses(M, 5.0, 0.5)
    for p in (1.5, 2.0, 3.0):
        radial, bounded = cmp.check_p_laplacian(M, cert, p, tol=1e-6)
        assert radial.verdict == "equality", (p, radial.margin)
        assert bounded.passed


def test_p_laplacian_detects_false_certificate():
    ball = mf.build_model_ball(3, 0.0, 1.0)
    cert = cmp.certify_hypotheses(ball, 3.0, 0.0)
    forged = replace(cert, kappa=cert.kappa + 1.0)
    radial, _ = cmp.check_p_laplacian(ball, forged, 3.0)
    assert radial.verdict == "violated"


# ---------------------------------------------------------------------------
# volume elements and tube volumes
# ---------------------------------------------------------------------------

def test_volume_elements_equality_on_model():
    ball = mf.build_model_ball(3, 1.0, 0.5)
    cert = cmp.certify_hypotheses(ball, 3.0, 0.0)
    ratio, absolute = cmp.check_volume_elements(ball, cert, tol=1e-6)
    assert ratio.verdict == "equality"
    assert absolute.verdict == "equality"


def test_volume_comparisons_equality_on_model():
    ball = mf.build_model_ball(3, 0.0, 1.0)
    cert = cmp.certify_hypotheses(ball, 3.0, 0.0)
    out = cmp.check_volume_comparisons(ball, cert, tol=1e-6)
    ids = [r.check_id for r in out]
    assert ids == ["volume_abs_conformal", "volume_abs_scaled",
                   "volume_rel_conformal", "volume_rel_scaled"]
    for r in out:
        assert r.verdict == "equality", (r.check_id, r.margin)


def test_volume_comparisons_hold_with_density():
    ball = mf.build_model_ball(3, 0.0, 1.0, trunc=0.7, density0=0.0)
    col = mf.WarpedManifold(3, ball.fiber, ball.w,
                            ExprProfile("0.05*t^2"), ball.T, "collar")
    cert = cmp.certify_hypotheses(col, math.inf, 0.0)
    out = cmp.check_volume_comparisons(col, cert)
    for r in out:
        assert r.passed, (r.check_id, r.verdict, r.margin)


# ---------------------------------------------------------------------------
# rigidity gaps and the splitting battery
# ---------------------------------------------------------------------------

def test_rigidity_gaps_vanish_on_equality_model():
    em = mf.build_equality_model(3, 5.0, 0.5, -1.0, 2.0, f0=0.2)
    M = em.manifold
    cert = cmp.certify_hypotheses(M, 5.0, 0.5)
    assert cmp.rigidity_metric_gap(M, cert) <= 1e-7
    assert cmp.rigidity_density_gap(M, cert) <= 1e-7


def test_rigidity_gaps_positive_off_model():
    M = wild_collar()
    cert = cmp.certify_hypotheses(M, 5.0, 0.5)
    assert cmp.rigidity_metric_gap(M, cert) > 1e-3
    assert cmp.rigidity_density_gap(M, cert) > 1e-3


def test_splitting_battery_all_equalities():
    # negative eps makes the reparametrization grow; keep T inside its
    # finite escape time for that case
    for N, eps, T in ((math.inf, 0.5, 4.0), (1.0, 0.0, 4.0),
                      (6.0, -0.4, 1.2)):
        out = cmp.check_splitting_model(3, N, eps, -1.0, f0=0.1, T=T)
        for r in out:
            assert r.verdict == "equality", (N, eps, r.check_id, r.margin)
        ids = [r.check_id for r in out]
        assert "splitting_laplacian" in ids
        assert "splitting_certificate" in ids


# ---------------------------------------------------------------------------
# point instances
# ---------------------------------------------------------------------------

def test_point_laplacian_equality_with_rigidity():
    pt = mf.build_point_space(3, 1.0)
    cert = cmp.certify_hypotheses(pt, math.inf, 0.0)
    sharp, bounded = cmp.check_point_laplacian(pt, cert, tol=1e-6)
    assert sharp.verdict == "equality"
    assert "rigidity profile verified" in sharp.note
    assert bounded.passed


def test_point_laplacian_skip_on_boundary_instance():
    out = cmp.check_point_laplacian(
        wild_collar(), cmp.certify_hypotheses(wild_collar(), 7.0, 0.5))
    assert all(r.verdict == "skip" for r in out)


# ---------------------------------------------------------------------------
# orchestration
# ---------------------------------------------------------------------------

EXPECTED_BOUNDARY_IDS = {
    "riccati", "boundary_laplacian", "g_monotone", "cut_bound_conformal",
    "cut_bound_scaled", "bounded_laplacian_weak", "bounded_laplacian_strong",
    "p_laplacian_radial:p=1.5", "p_laplacian_bounded:p=1.5",
    "p_laplacian_radial:p=2", "p_laplacian_bounded:p=2",
    "p_laplacian_radial:p=3", "p_laplacian_bounded:p=3",
    "volume_element_ratio", "volume_element_absolute",
    "volume_abs_conformal", "volume_abs_scaled", "volume_rel_conformal",
    "volume_rel_scaled", "inradius_conformal", "inradius_scaled",
    "two_boundary_distance",
}


def test_run_all_checks_cylinder():
    cyl = mf.build_cylinder(3, height=2.0)
    rep = cmp.run_all_checks(cyl, 5.0, 0.3, grid=128)
    assert rep.all_ok
    assert {r.check_id for r in rep.results} == EXPECTED_BOUNDARY_IDS
    assert not math.isnan(rep.worst_margin)
    assert rep.worst_margin >= -1e-7
    json.dumps(rep.to_dict())


def test_run_all_checks_point_topology():
    pt = mf.build_point_space(3, -1.0)
    rep = cmp.run_all_checks(pt, 3.0, 0.0, grid=128)
    ids = {r.check_id for r in rep.results}
    assert ids == {"riccati", "point_laplacian", "point_laplacian_bounded"}
    assert rep.all_ok


def test_run_all_checks_soundness_sweep():
    cases = [
        (mf.WarpedManifold(3, mf.torus_fiber(2),
                           ExprProfile("1 + 0.2*t^2"),
                           ExprProfile("0.3*t"), 1.0, "collar"),
         math.inf, 0.4),
        (mf.WarpedManifold(4, mf.sphere_fiber(3, 2.0),
                           ExprProfile("2 + sin(t)/4"),
                           ExprProfile("0.1*cos(2*t)"), 1.5, "collar"),
         9.0, -0.3),
        (mf.WarpedManifold(3, mf.torus_fiber(2),
                           ExprProfile("cosh(0.5*t)"),
                           constant_profile(0.2), 2.0, "two_ended"),
         1.0, 0.0),
    ]
    for M, N, eps in cases:
        rep = cmp.run_all_checks(M, N, eps, grid=128)
        assert rep.all_ok, (M.label, N, eps,
                            [(r.check_id, r.verdict, r.margin)
                             for r in rep.results if not r.passed])
        assert rep.worst_margin >= -1e-7


def test_run_all_checks_deterministic():
    M = wild_collar()
    rep1 = cmp.run_all_checks(M, 7.0, 0.5, grid=128)
    rep2 = cmp.run_all_checks(M, 7.0, 0.5, grid=128)
    assert json.dumps(rep1.to_dict(), sort_keys=True) \
        == json.dumps(rep2.to_dict(), sort_keys=True)


# ---------------------------------------------------------------------------
# row margin normalization at overflow
# ---------------------------------------------------------------------------

def test_row_margins_saturate_instead_of_nan():
    # finite value against a saturated bound: extreme normalized margin
    assert cmp._row_le(0.0, 3.0, math.inf).margin == 1.0
    assert cmp._row_le(0.0, math.inf, 5.0).margin == -1.0
    assert cmp._row_ge(0.0, math.inf, 5.0).margin == 1.0
    assert cmp._row_ge(0.0, 3.0, math.inf).margin == -1.0
    # inf against inf is genuinely undecidable at float resolution
    assert math.isnan(cmp._row_le(0.0, math.inf, math.inf).margin)
    # ordinary rows keep the scale-normalized difference
    assert cmp._row_le(0.0, 1.0, 4.0).margin == pytest.approx(0.75)
    assert cmp._row_ge(0.0, 0.2, 0.1).margin == pytest.approx(0.1)


def test_extreme_certificate_rows_stay_finite():
    # sharply decaying warp: the certified pair is strongly negative and the
    # comparison amplitude saturates; no row margin may come out non-finite
    M = mf.WarpedManifold(3, mf.torus_fiber(2),
                          ExprProfile("exp(-12*t)"),
                          constant_profile(0.0), 1.0, "collar",
                          label="steep")
    cert = cmp.certify_hypotheses(M, math.inf, 0.0)
    assert cert.kappa < -100.0
    for res in (cmp.check_boundary_laplacian(M, cert, grid=64),
                *cmp.check_volume_elements(M, cert, grid=64)):
        assert res.verdict in ("holds", "equality", "skip"), res
        for row in res.rows:
            assert math.isfinite(row.margin), (res.check_id, row)
