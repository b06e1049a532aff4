"""Acceptance gate: one test per criterion, each printing a verdict line.

Run as ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
lines; every tolerance below is pinned, nothing is calibrated at runtime.
"""

import json
import time

import numpy as np
import sympy
from click.testing import CliRunner

from symphonic import zoo
from symphonic.analysis import (
    Jet2Data,
    is_p_symphonic,
    morphism_probe_test,
    prop2_constraint,
    prop2_constraint_bruteforce,
)
from symphonic.autodiff import evaluate_jet2, finite_difference_jet2
from symphonic.cli import main as cli_main
from symphonic.expr import parse
from symphonic.geometry import Box
from symphonic.identities import (
    exponent_sweep,
    verify_lemma3,
    verify_sec3_T,
    verify_thm1_unweighted,
    verify_thm1_weighted,
    verify_thm6,
)
from symphonic.maps import verify_chain_rule_main1
from symphonic.sampling import manifold_samples, sample_box
from symphonic.tensors import sigma, sigma_S, sigma_T, sigma_frame_sum, sigma_m
from tests.test_cli import CONFIG_DIR, _strip_timestamp

LAMBDAS = (1.0, 1.5, 2.0, 3.0)
F_NAMES = ("f_quadpair", "f_trig", "f_mixed", "f_embed3", "f_cube")
BOX = Box(((0.15, 0.45), (0.15, 0.45)))
POINTS = sample_box(BOX, 100, seed=0)


def _report(num, ok, text):
    print(f"[criterion {num:2d}] {'PASS' if ok else 'FAIL'}  {text}")
    assert ok, f"criterion {num}: {text}"


def test_criterion_1_thm1_unweighted():
    t0 = time.perf_counter()
    worst = 0.0
    for lam in LAMBDAS:
        u = zoo.dilation_family(lam)
        for name in F_NAMES:
            rep = verify_thm1_unweighted(u, zoo.resolve(name), POINTS, tol=1e-7)
            worst = max(worst, rep.max_residual)
    fitted, _ = exponent_sweep(
        "thm1_unweighted", zoo.dilation_family, zoo.resolve("f_quadpair"), LAMBDAS,
        samples=POINTS[:20],
    )
    elapsed = time.perf_counter() - t0
    ok = worst < 1e-7 and abs(fitted - 4.0) < 1e-5 and elapsed < 10.0
    _report(
        1,
        ok,
        f"composition scaling lambda^4: max residual {worst:.2e} over "
        f"{len(LAMBDAS) * len(F_NAMES)}x{len(POINTS)} samples, fitted exponent "
        f"{fitted:.6f}, runtime {elapsed:.1f}s",
    )


def test_criterion_2_thm1_weighted():
    ps = (1.5, 2.0, 2.5, 3.0)
    worst = 0.0
    for i, p in enumerate(ps):
        for j, lam in enumerate(LAMBDAS):
            f = zoo.resolve(F_NAMES[(i + j) % len(F_NAMES)])
            rep = verify_thm1_weighted(zoo.dilation_family(lam), f, p, POINTS, tol=1e-6)
            worst = max(worst, rep.max_residual)
    exp_errs = []
    for p in ps:
        fitted, _ = exponent_sweep(
            "thm1_weighted", zoo.dilation_family, zoo.resolve("f_quadpair"), LAMBDAS,
            p=p, samples=POINTS[:15],
        )
        exp_errs.append(abs(fitted - 2.0 * p))
    ok = worst < 1e-6 and max(exp_errs) < 1e-4
    _report(
        2,
        ok,
        f"weighted scaling lambda^(2p): max residual {worst:.2e}, "
        f"worst exponent error {max(exp_errs):.2e}",
    )


def test_criterion_3_lemma3_correction():
    u = zoo.resolve("stereographic")
    f = zoo.resolve("scaled_rotation:1.3")
    pts = manifold_samples(u.source, 100, seed=1)
    three = verify_lemma3(u, f, 2.0, pts, tol=1e-6)
    two = verify_thm1_unweighted(u, f, pts, tol=1e-6)
    generic_failures = sum(1 for r in two.per_point if r.residual > 1e-3)
    ok = (
        three.verdict
        and not two.verdict
        and generic_failures > 0.9 * len(two.per_point)
    )
    _report(
        3,
        ok,
        f"three-term identity residual {three.max_residual:.2e} while the "
        f"two-term form fails by >1e-3 at {generic_failures}/{len(two.per_point)} points",
    )


def test_criterion_4_power_order_scaling():
    u = zoo.dilation_family(2.0)
    f = zoo.resolve("f_quadpair")
    pts = POINTS[:50]
    worst = 0.0
    for m in (2, 3, 4):
        for p in (2.0, 3.0):
            rep = verify_thm6(u, f, p, m, pts, tol=1e-6)
            worst = max(worst, rep.max_residual)
    # the m=2 report must coincide with the weighted quadratic one
    coincidence = 0.0
    for p in (2.0, 3.0):
        a = verify_thm6(u, f, p, 2, pts, tol=1e-6)
        b = verify_thm1_weighted(u, f, p, pts, tol=1e-6)
        coincidence = max(
            coincidence,
            max(abs(ra.residual - rb.residual) for ra, rb in zip(a.per_point, b.per_point)),
        )
    ok = worst < 1e-6 and coincidence < 1e-10
    _report(
        4,
        ok,
        f"power-order scaling lambda^(mp): max residual {worst:.2e}, "
        f"m=2 coincidence gap {coincidence:.2e}",
    )


def test_criterion_5_trace_modified_tensors():
    u = zoo.dilation_family(2.0)
    f = zoo.resolve("f_quadpair")
    rep = verify_sec3_T(u, f, POINTS, tol=1e-7, variant="T")
    fitted, _ = exponent_sweep(
        "sec3_T_theorem", zoo.dilation_family, f, LAMBDAS, samples=POINTS[:15]
    )
    ident_zero = all(
        np.all(sigma_T(zoo.resolve(f"identity:{n}"), [0.2] * n) == 0.0)
        for n in (2, 3, 4)
    )
    u4 = zoo.dilation_family(1.7, n=4)
    x4 = [0.1, 0.2, 0.3, 0.05]
    s_correction_gone = np.array_equal(sigma_S(u4, x4), sigma(u4, x4))
    ok = rep.verdict and abs(fitted - 4.0) < 1e-6 and ident_zero and s_correction_gone
    _report(
        5,
        ok,
        f"trace-modified tensors: residual {rep.max_residual:.2e}, exponent "
        f"{fitted:.6f}, identity-map tensor exactly zero: {ident_zero}, dim-4 "
        f"correction vanishes: {s_correction_gone}",
    )


def test_criterion_6_scalar_field_equivalence():
    worst = 0.0
    for p in (2.0, 3.0):
        field = zoo.resolve(f"radial_power:{p}:3")
        pts = manifold_samples(field.source, 100, seed=2)
        rep = is_p_symphonic(field, p, pts, tol=1e-6)
        assert rep.verdict, f"radial field failed at p={p}"
        worst = max(worst, rep.max_residual)

    # the quadratic must fail with the symbolically computed residual
    x1, x2 = sympy.symbols("x1 x2")
    fq = x1**2
    grad = [sympy.diff(fq, v) for v in (x1, x2)]
    e = sum(g**2 for g in grad)
    div = sum(sympy.diff(e * g, v) for g, v in zip(grad, (x1, x2)))
    oracle = sympy.lambdify((x1, x2), div, "math")
    f = zoo.resolve("quadratic_x1")
    pts = sample_box(Box(((0.4, 1.4), (-1.0, 1.0))), 25, seed=3)
    rep = is_p_symphonic(f, 2.0, pts, tol=1e-6)
    gaps = [
        abs(rec.residual - abs(oracle(*rec.point))) for rec in rep.per_point
    ]
    ok = worst < 1e-6 and not rep.verdict and max(gaps) < 1e-9
    _report(
        6,
        ok,
        f"radial fields pass (max {worst:.2e}); quadratic fails with oracle "
        f"gap {max(gaps):.2e}",
    )


def test_criterion_7_chain_rule_zoo():
    pairs = [
        ("f_quadpair", zoo.dilation_family(1.5), POINTS),
        ("f_trig", zoo.dilation_family(2.0), POINTS),
        ("f_mixed", zoo.resolve("rotation:0.7"), POINTS),
        ("f_embed3", zoo.resolve("scaled_rotation:1.3"), POINTS),
        ("f_cube", zoo.resolve("complex_square"), POINTS),
        ("f_quadpair", zoo.resolve("poly_nonexample"), POINTS),
        ("identity:2", zoo.resolve("complex_square"), POINTS),
        ("scaled_rotation:1.2", zoo.resolve("stereographic"), None),
        ("f_quadpair", zoo.resolve("stereographic"), None),
        # keep the fibration's image clear of both polar-chart poles
        (
            "stereo_to_polar",
            zoo.resolve("hopf"),
            sample_box(Box(tuple((0.15, 0.35) for _ in range(3))), 100, seed=5),
        ),
        ("stereographic", zoo.resolve("equator"), None),
        ("polar_to_stereo", zoo.resolve("equator"), None),
    ]
    worst = 0.0
    for f_name, u, pts in pairs:
        f = zoo.resolve(f_name)
        if pts is None:
            pts = manifold_samples(u.source, 100, seed=5)
        rep = verify_chain_rule_main1(f, u, pts, tol=1e-8)
        worst = max(worst, rep.max_residual)
    ok = worst < 1e-8
    _report(
        7,
        ok,
        f"composition rule for second fundamental forms: max residual "
        f"{worst:.2e} over {len(pairs)} pairs x 100 points",
    )


EXPR_CORPUS = [
    ("x1^2 + sin(x2)", 2, (-1.5, 1.5)),
    ("x1*x2 - 3*x1 + 0.5", 2, (-2.0, 2.0)),
    ("exp(0.4*x1)*cos(x2)", 2, (-1.5, 1.5)),
    ("sqrt(x1 + 3)", 1, (-1.0, 2.0)),
    ("log(x1 + 2.5)", 1, (-1.0, 2.0)),
    ("4/(1 + x1^2 + x2^2)^2", 2, (-1.0, 1.0)),
    ("tan(x1/2)", 1, (-1.2, 1.2)),
    ("atan2(x2, x1 + 3)", 2, (-1.0, 1.0)),
    ("x1^3 - 2*x1*x2^2 + x2", 2, (-1.5, 1.5)),
    ("sin(x1)*sin(x2) + cos(x1*x2)", 2, (-1.2, 1.2)),
    ("(x1 + x2)/(x1^2 + 1)", 2, (-2.0, 2.0)),
    ("2^x1", 1, (-1.0, 1.5)),
    ("x1^2.5", 1, (0.3, 2.0)),
    ("abs(x1 - 5)", 1, (-1.0, 1.0)),
    ("1/(x1^2 + x2^2 + 1)", 2, (-1.2, 1.2)),
]


def test_criterion_8_oracle_agreement():
    rng = np.random.default_rng(17)
    draws_per_expr = 1000 // len(EXPR_CORPUS) + 1
    worst_ad_fd = 0.0
    total = 0
    for src, arity, (lo, hi) in EXPR_CORPUS:
        e = parse(src, arity)
        for _ in range(draws_per_expr):
            pt = rng.uniform(lo, hi, size=arity)
            ad = evaluate_jet2(e, pt)
            fd = finite_difference_jet2(e, pt)
            gd = np.max(np.abs(ad.grad - fd.grad) / np.maximum(1.0, np.abs(ad.grad)))
            hd = np.max(np.abs(ad.hess - fd.hess) / np.maximum(1.0, np.abs(ad.hess)))
            worst_ad_fd = max(worst_ad_fd, gd, hd)
            total += 1

    worst_frame = 0.0
    # moderate colatitudes for the projection chart: tensor entries stay
    # O(1e4), so the absolute 1e-10 bound is meaningful in doubles
    frame_cases = (
        ("stereographic", sample_box(Box(((0.7, 2.4), (-2.9, 2.9))), 25, seed=6)),
        ("hopf", None),
        ("f_quadpair", None),
        ("scaled_projection:1.3", None),
    )
    for i, (spec, pts) in enumerate(frame_cases):
        u = zoo.resolve(spec)
        if pts is None:
            pts = manifold_samples(u.source, 25, seed=6 + i)
        for j, x in enumerate(pts):
            m = 2 + (i + j) % 3
            gap = np.max(np.abs(sigma_frame_sum(u, x, m=m) - sigma_m(u, m, x)))
            worst_frame = max(worst_frame, gap)

    rng2 = np.random.default_rng(99)
    worst_prop2 = 0.0
    for _ in range(200):
        dim = int(rng2.integers(1, 5))
        C = rng2.normal(size=dim)
        M = rng2.normal(size=(dim, dim))
        jet = Jet2Data(C, 0.5 * (M + M.T))
        p = float(rng2.uniform(1.0, 4.0))
        a = prop2_constraint(jet, p)
        b = prop2_constraint_bruteforce(jet, p)
        worst_prop2 = max(worst_prop2, abs(a - b) / max(1.0, abs(b)))

    ok = worst_ad_fd < 1e-5 and worst_frame < 1e-10 and worst_prop2 < 1e-12
    _report(
        8,
        ok,
        f"oracles: autodiff vs finite differences {worst_ad_fd:.2e} over {total} "
        f"draws; frame-sum vs matrix power {worst_frame:.2e}; constraint "
        f"polynomial contracted vs brute {worst_prop2:.2e}",
    )


def test_criterion_9_morphism_probes():
    certified = ("dilation:1.5", "dilation:2", "scaled_projection:1.3", "rotation:0.7", "scaled_rotation:1.3")
    all_pass = True
    for spec in certified:
        u = zoo.resolve(spec)
        pts = manifold_samples(u.source, 12, seed=7)
        for p in (1.5, 2.0, 3.0, 4.0):
            rep = morphism_probe_test(u, p, pts, tol=1e-6)
            all_pass &= rep.verdict
    nonex = morphism_probe_test(
        zoo.resolve("poly_nonexample"), 2.0, sample_box(BOX, 12, seed=8), tol=1e-6
    )
    ok = all_pass and not nonex.verdict
    _report(
        9,
        ok,
        f"probe certificate passes for certified maps at p in {{1.5,2,3,4}} and "
        f"rejects the cubic non-example (worst adjusted residual "
        f"{nonex.annotations['per_probe']['probe_2']['adjusted']:.2e})",
    )


def test_criterion_10_cli_end_to_end(tmp_path):
    runner = CliRunner()
    t0 = time.perf_counter()
    stable = True
    for name in ("predicates", "identities", "sweeps"):
        texts = []
        for i in range(2):
            out = tmp_path / f"{name}{i}.json"
            result = runner.invoke(
                cli_main,
                ["run", "--config", str(CONFIG_DIR / f"{name}.toml"), "--json", str(out)],
            )
            assert result.exit_code == 0, (name, result.output)
            report = json.loads(out.read_text())
            assert report["overall_pass"] is True
            texts.append(_strip_timestamp(out.read_text()))
        stable &= texts[0] == texts[1]
    bad = tmp_path / "bad.toml"
    bad.write_text(
        'schema = 1\n[[tasks]]\nkind = "identity"\nname = "thm1_weighted"\n'
        'u = "uu"\nf = "zoo:f_quadpair"\n'
    )
    result = runner.invoke(cli_main, ["run", "--config", str(bad)])
    named = result.exit_code == 2 and "uu" in result.output
    elapsed = time.perf_counter() - t0
    ok = stable and named
    _report(
        10,
        ok,
        f"three example configs pass with byte-stable reports ({stable}), "
        f"malformed config exits 2 naming the object ({named}); {elapsed:.1f}s",
    )
