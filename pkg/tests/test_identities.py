import numpy as np
import pytest

from symphonic import zoo
from symphonic.identities import (
    IdentityCase,
    exponent_sweep,
    run_identity,
    verify_lemma3,
    verify_sec3_T,
    verify_thm1_unweighted,
    verify_thm1_weighted,
    verify_thm6,
)
from symphonic.sampling import manifold_samples, sample_box


def test_thm1_unweighted_dilation(quad_points):
    u = zoo.dilation_family(2.0)
    f = zoo.resolve("f_quadpair")
    rep = verify_thm1_unweighted(u, f, quad_points, tol=1e-8)
    assert rep.verdict
    assert rep.annotations["u_totally_geodesic"]
    assert rep.annotations["u_horizontally_conformal"]


def test_thm1_unweighted_isometry_exact(quad_points):
    rep = verify_thm1_unweighted(
        zoo.resolve("rotation:0.8"), zoo.resolve("f_mixed"), quad_points[:20], tol=1e-10
    )
    assert rep.verdict


def test_thm1_weighted_p3(quad_points):
    rep = verify_thm1_weighted(
        zoo.dilation_family(2.0), zoo.resolve("f_quadpair"), 3.0, quad_points, tol=1e-7
    )
    assert rep.verdict


def test_thm1_weighted_p2_reduces_to_unweighted(quad_points):
    u = zoo.dilation_family(1.5)
    f = zoo.resolve("f_trig")
    a = verify_thm1_weighted(u, f, 2.0, quad_points[:20], tol=1e-7)
    b = verify_thm1_unweighted(u, f, quad_points[:20], tol=1e-7)
    for ra, rb in zip(a.per_point, b.per_point):
        assert abs(ra.residual - rb.residual) < 1e-12
    assert abs(a.max_residual - b.max_residual) < 1e-12


def test_lemma3_totally_geodesic_reduces(quad_points):
    # term 1 vanishes for a dilation, so the three-term and two-term forms agree
    u = zoo.dilation_family(1.5)
    f = zoo.resolve("f_cube")
    a = verify_lemma3(u, f, 3.0, quad_points[:20], tol=1e-7)
    b = verify_thm1_weighted(u, f, 3.0, quad_points[:20], tol=1e-7)
    assert a.verdict
    for ra, rb in zip(a.per_point, b.per_point):
        assert abs(ra.residual - rb.residual) < 1e-10


def test_lemma3_stereographic_correction_exact():
    u = zoo.resolve("stereographic")
    f = zoo.resolve("scaled_rotation:1.3")
    pts = manifold_samples(u.source, 30, seed=2)
    rep = verify_lemma3(u, f, 2.0, pts, tol=1e-7)
    assert rep.verdict
    assert not rep.annotations["u_totally_geodesic"]
    assert rep.annotations["f_conformal"]


def test_lemma3_identity_f(quad_points):
    u = zoo.resolve("complex_square")
    f = zoo.resolve("identity:2")
    rep = verify_lemma3(u, f, 2.0, quad_points[:20], tol=1e-9)
    assert rep.verdict


def test_hypothesis_violation_detectable():
    """The two-term form fails where the three-term form closes exactly."""
    u = zoo.resolve("stereographic")
    f = zoo.resolve("scaled_rotation:1.3")
    pts = manifold_samples(u.source, 20, seed=4)
    two_term = verify_thm1_unweighted(u, f, pts, tol=1e-6)
    three_term = verify_lemma3(u, f, 2.0, pts, tol=1e-6)
    assert not two_term.verdict and two_term.max_residual > 1e-3
    assert three_term.verdict


def test_thm6_m2_equals_weighted(quad_points):
    u = zoo.dilation_family(2.0)
    f = zoo.resolve("f_quadpair")
    a = verify_thm6(u, f, 2.5, 2, quad_points[:20], tol=1e-6)
    b = verify_thm1_weighted(u, f, 2.5, quad_points[:20], tol=1e-6)
    for ra, rb in zip(a.per_point, b.per_point):
        assert abs(ra.residual - rb.residual) < 1e-10


def test_thm6_power_scaling(quad_points):
    rep = verify_thm6(
        zoo.dilation_family(2.0), zoo.resolve("f_quadpair"), 2.0, 3, quad_points[:30], tol=1e-7
    )
    assert rep.verdict


def test_thm6_rejects_bad_m(quad_points):
    with pytest.raises(ValueError):
        verify_thm6(zoo.dilation_family(1.0), zoo.resolve("f_quadpair"), 2.0, 1, quad_points)


def test_sec3_T_scaling(quad_points):
    rep = verify_sec3_T(
        zoo.dilation_family(2.0), zoo.resolve("f_quadpair"), quad_points[:30], tol=1e-7
    )
    assert rep.verdict
    assert rep.annotations["equal_dims"]
    assert rep.annotations["f_conformal"] is False  # annotated, not aborted


def test_sec3_T_conformal_f(quad_points):
    rep = verify_sec3_T(
        zoo.dilation_family(2.0), zoo.resolve("f_cube"), quad_points[:20], tol=1e-9
    )
    assert rep.verdict
    assert rep.annotations["f_conformal"]


def test_sec3_identity_f(quad_points):
    rep = verify_sec3_T(
        zoo.resolve("complex_square"),
        zoo.resolve("identity:2"),
        quad_points[:20],
        tol=1e-9,
        form="lemma",
    )
    assert rep.verdict


def test_sec3_S_dim4_matches_plain_sigma():
    box = tuple((0.1, 0.4) for _ in range(4))
    from symphonic.geometry import Box

    pts = sample_box(Box(box), 15, seed=6)
    u = zoo.dilation_family(2.0, n=4)

    def f_comp(i):
        return lambda pt: pt[i] * pt[(i + 1) % 4]

    from symphonic.maps import SmoothMap

    f = SmoothMap(zoo.euclidean(4), zoo.euclidean(4), tuple(f_comp(i) for i in range(4)), "fq4")
    s_variant = verify_sec3_T(u, f, pts, tol=1e-7, variant="S")
    plain = verify_thm1_unweighted(u, f, pts, tol=1e-7)
    assert s_variant.verdict and plain.verdict
    for ra, rb in zip(s_variant.per_point, plain.per_point):
        assert abs(ra.residual - rb.residual) < 1e-10
        assert np.max(np.abs(np.asarray(ra.lhs) - np.asarray(rb.lhs))) < 1e-10


def test_sec3_T_lemma_form():
    u = zoo.resolve("stereographic")
    f = zoo.resolve("scaled_rotation:1.2")
    pts = manifold_samples(u.source, 15, seed=8)
    rep = verify_sec3_T(u, f, pts, tol=1e-7, form="lemma")
    assert rep.verdict


def test_symphonic_field_pulls_back_through_dilations():
    """Composing a known symphonic scalar field with a dilation keeps it
    symphonic (morphism behaviour on a concrete instance, p = 2 and 3)."""
    from symphonic.analysis import is_p_symphonic
    from symphonic.geometry import Box
    from symphonic.maps import compose

    pts = sample_box(Box(tuple((0.3, 0.7) for _ in range(3))), 15, seed=12)
    for p in (2.0, 3.0):
        field = zoo.resolve(f"radial_power:{p}:3")
        pulled = compose(field, zoo.dilation_family(2.0, n=3))
        rep = is_p_symphonic(pulled, p, pts, tol=1e-7)
        assert rep.verdict, (p, rep.max_residual)


def test_exponent_sweeps(quad_points):
    f = zoo.resolve("f_quadpair")
    lams = [1.0, 1.5, 2.0, 3.0]
    e1, _ = exponent_sweep("thm1_unweighted", zoo.dilation_family, f, lams, samples=quad_points[:15])
    assert abs(e1 - 4.0) < 1e-6
    e2, _ = exponent_sweep(
        "thm1_weighted", zoo.dilation_family, f, lams, p=2.5, samples=quad_points[:15]
    )
    assert abs(e2 - 5.0) < 1e-5
    e3, _ = exponent_sweep(
        "thm6_m_version", zoo.dilation_family, f, [1.0, 1.5, 2.0], p=3.0, m=3, samples=quad_points[:10]
    )
    assert abs(e3 - 9.0) < 1e-5
    e4, _ = exponent_sweep(
        "sec3_T_theorem", zoo.dilation_family, f, lams, samples=quad_points[:15]
    )
    assert abs(e4 - 4.0) < 1e-6


def test_exponent_sweep_rejects_degenerate():
    with pytest.raises(ValueError):
        exponent_sweep(
            "thm1_unweighted", zoo.dilation_family, zoo.resolve("f_quadpair"), [2.0, 2.0]
        )
    with pytest.raises(ValueError):
        exponent_sweep(
            "lemma3", zoo.dilation_family, zoo.resolve("f_quadpair"), [1.0, 2.0]
        )


def test_verdict_stable_under_refinement(quad_box):
    u = zoo.dilation_family(2.0)
    f = zoo.resolve("f_trig")
    p50 = sample_box(quad_box, 50, seed=0)
    p100 = sample_box(quad_box, 100, seed=0)
    a = verify_thm1_weighted(u, f, 1.5, p50, tol=1e-6)
    b = verify_thm1_weighted(u, f, 1.5, p100, tol=1e-6)
    assert a.verdict == b.verdict


def test_report_records_image_points(quad_points):
    u = zoo.dilation_family(2.0)
    f = zoo.resolve("f_quadpair")
    rep = verify_thm1_unweighted(u, f, quad_points[:3], tol=1e-7)
    for rec in rep.per_point:
        assert rec.image == tuple(2.0 * np.asarray(rec.point))


def test_annotations_survive_immersion_u():
    # source dim < target dim: conformality is marked not-applicable, not an error
    u = zoo.resolve("equator")
    f = zoo.resolve("stereographic")
    pts = np.array([[0.2], [0.9]])
    rep = verify_thm1_unweighted(u, f, pts, tol=1e-2)
    assert "not applicable" in rep.annotations["u_horizontally_conformal"]


def test_identity_case_validation(quad_points):
    with pytest.raises(ValueError):
        IdentityCase("nope", zoo.dilation_family(1.0), zoo.resolve("f_quadpair"))
    with pytest.raises(ValueError):
        IdentityCase(
            "thm1_unweighted",
            zoo.resolve("scaled_projection:1"),  # lands in dim 2
            zoo.resolve("scaled_projection:1"),  # starts in dim 3
        )
    case = IdentityCase(
        "thm1_unweighted",
        zoo.dilation_family(2.0),
        zoo.resolve("f_quadpair"),
        samples=quad_points[:10],
        tol=1e-7,
    )
    assert run_identity(case).verdict
