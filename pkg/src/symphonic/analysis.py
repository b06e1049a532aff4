"""Predicate checkers and second-order jet probes for morphism testing.

A map is declared nothing here: every checker samples, evaluates and
reports residuals with an explicit tolerance verdict, so "passes" always
means "numerically indistinguishable from the property at these samples".
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, List

import numpy as np

from .autodiff import Dual
from .errors import SingularWeightError
from .geometry import Box, ChartManifold, frame_generic, metric_jet, orthonormal_frame
from .maps import SmoothMap, compose, map_jet
from .reports import PointRecord, ResidualReport, aggregate
from .sampling import manifold_samples
from .tensors import divergence, sigma_field, weighted_divergence

__all__ = [
    "ConformalityReport",
    "Jet2Data",
    "dilation_sq",
    "horizontal_conformality",
    "is_p_symphonic",
    "is_totally_geodesic",
    "is_conformal_function",
    "prop2_constraint",
    "prop2_constraint_bruteforce",
    "probe_jets",
    "morphism_probe_test",
    "theorem7_ingredients",
    "Theorem7Ingredients",
]

_SCALAR_LINE = ChartManifold(1, Box(((float("-inf"), float("inf")),)), None, "R")


def _ensure_samples(map_, samples, n=None, seed=0):
    if samples is None:
        return manifold_samples(map_.source, n or 100, seed)
    return np.atleast_2d(np.asarray(samples, dtype=float))


def dilation_sq(map_, point):
    """Extracted squared dilation and conformality defect at one point.

    The co-metric pushforward C = du g^{-1} du^T is compared against
    lambda^2 h^{-1}, with lambda^2 = trace(C h) / target dim (exact when the
    map is horizontally conformal)."""
    jet = map_jet(map_, point)
    src = metric_jet(map_.source, point)
    tgt = metric_jet(map_.target, jet.image)
    C = jet.du @ src.g_inv @ jet.du.T
    lam_sq = float(np.trace(C @ tgt.g)) / map_.target.dim
    residual = float(np.max(np.abs(C - lam_sq * tgt.g_inv)))
    return lam_sq, residual


@dataclass
class ConformalityReport:
    """Pointwise dilation extraction for the horizontal conformality test.

    ``lambda_sq`` and ``residual`` are callables usable at fresh points;
    the aggregates summarize the sample sweep."""

    map_name: str
    lambda_sq: Callable
    residual: Callable
    samples: np.ndarray
    lambda_sq_values: List[float]
    residual_values: List[float]
    max_residual: float
    lambda_constant: bool
    tolerance: float
    verdict: bool

    def to_dict(self):
        lam = self.lambda_sq_values
        return {
            "map": self.map_name,
            "max_residual": float(self.max_residual),
            "lambda_sq_mean": float(np.mean(lam)) if lam else None,
            "lambda_sq_spread": float(np.max(lam) - np.min(lam)) if lam else None,
            "lambda_constant": bool(self.lambda_constant),
            "tolerance": float(self.tolerance),
            "verdict": bool(self.verdict),
            "n_points": len(lam),
        }


def horizontal_conformality(map_, samples=None, tol=1e-8):
    """Check du g^{-1} du^T = lambda^2 h^{-1} sample-wise and extract lambda."""
    if map_.source.dim < map_.target.dim:
        raise ValueError("horizontal conformality needs source dim >= target dim")
    pts = _ensure_samples(map_, samples)
    lam_values = []
    res_values = []
    for x in pts:
        lam, res = dilation_sq(map_, x)
        lam_values.append(lam)
        res_values.append(res)
    max_res = max(res_values) if res_values else 0.0
    lams = np.sqrt(np.maximum(lam_values, 0.0))
    lam_const = bool(len(lams) == 0 or (np.max(lams) - np.min(lams)) < tol)
    return ConformalityReport(
        map_name=map_.name,
        lambda_sq=lambda x: dilation_sq(map_, x)[0],
        residual=lambda x: dilation_sq(map_, x)[1],
        samples=pts,
        lambda_sq_values=lam_values,
        residual_values=res_values,
        max_residual=float(max_res),
        lambda_constant=lam_const,
        tolerance=tol,
        verdict=bool(max_res < tol),
    )


def is_p_symphonic(map_, p, samples=None, tol=1e-7):
    """Max norm of div(w^(p-2) sigma) over the samples; singular-weight
    points are excluded from the verdict and counted as warnings."""
    pts = _ensure_samples(map_, samples)
    tensor = sigma_field(map_)
    records = []
    singular = 0
    for x in pts:
        try:
            res = weighted_divergence(tensor, p, x)
        except SingularWeightError:
            singular += 1
            continue
        records.append(PointRecord(tuple(x), float(np.linalg.norm(res.div)), lhs=res.div))
    warnings = (
        [f"{singular} sample(s) skipped: singular weight (w=0, p<2)"] if singular else []
    )
    report = aggregate(f"p_symphonic(p={p})", records, tol, warnings=warnings)
    return report


def is_totally_geodesic(map_, samples=None, tol=1e-7):
    """Max component of the second fundamental form over the samples."""
    pts = _ensure_samples(map_, samples)
    records = [
        PointRecord(tuple(x), float(np.max(np.abs(map_jet(map_, x).second_fund))))
        for x in pts
    ]
    return aggregate("totally_geodesic", records, tol)


def is_conformal_function(f_map, samples=None, tol=1e-7):
    """Check df (x) df = lambda g for a scalar field.

    The left side has rank one, so for source dim >= 2 the condition can
    only hold where the gradient vanishes; the report states this
    obstruction rather than reinterpreting the condition."""
    if f_map.target.dim != 1:
        raise ValueError("is_conformal_function expects a scalar field")
    pts = _ensure_samples(f_map, samples)
    dim = f_map.source.dim
    records = []
    lam_values = []
    for x in pts:
        jet = map_jet(f_map, x)
        src = metric_jet(f_map.source, x)
        df = jet.du[0]
        outer = np.outer(df, df)
        lam = float(df @ src.g_inv @ df) / dim
        lam_values.append(lam)
        records.append(PointRecord(tuple(x), float(np.max(np.abs(outer - lam * src.g)))))
    annotations = {"lambda_values": lam_values}
    if dim >= 2:
        annotations["rank_obstruction"] = (
            "grad f (x) grad f has rank <= 1; proportionality to a rank-"
            f"{dim} metric is only possible where grad f = 0"
        )
    return aggregate("conformal_function", records, tol, annotations=annotations)


@dataclass
class Jet2Data:
    """Prescribed first and second derivatives (C_i, C_ij) of a probe
    function at a point."""

    C: np.ndarray
    C2: np.ndarray

    def __post_init__(self):
        self.C = np.asarray(self.C, dtype=float)
        self.C2 = np.asarray(self.C2, dtype=float)
        if self.C2.shape != (self.C.size, self.C.size):
            raise ValueError("C2 must be square with side len(C)")
        if not np.allclose(self.C2, self.C2.T, atol=1e-12):
            raise ValueError("C2 must be symmetric")


def prop2_constraint(jet, p):
    """Constraint polynomial on a 2-jet, contracted form.

    Full summation over every repeated index.  The brute-force triple loop
    (:func:`prop2_constraint_bruteforce`) is kept as the reference so the
    index convention can be swapped without touching callers."""
    C = jet.C
    C2 = jet.C2
    s3 = float(np.sum(C ** 3))
    mixed = float(C ** 2 @ C2 @ C)  # sum_ik C_i^2 C_ik C_k
    tr = float(np.trace(C2))
    return 4.0 * (p - 2.0) * s3 * mixed + s3 * s3 * tr + 2.0 * s3 * mixed


def prop2_constraint_bruteforce(jet, p):
    """Literal triple-loop evaluation of the same constraint polynomial."""
    C = jet.C
    C2 = jet.C2
    n = C.size
    total = 0.0
    for i in range(n):
        for j in range(n):
            for k in range(n):
                total += 2.0 * (p - 2.0) * C[k] * C[i] * C[j] * (
                    C[i] * C2[i, k] * C[j] ** 2 + C[i] ** 2 * C[j] * C2[j, k]
                )
                total += C[i] ** 2 * C[j] ** 2 * (
                    C2[k, k] * C[i] * C[j]
                    + C[k] * C2[i, k] * C[j]
                    + C[k] * C[i] * C2[j, k]
                )
    return total


def probe_jets(target_dim):
    """The canonical morphism probes: unit first-order jets, zero second
    order.  Each satisfies the constraint polynomial for every p."""
    if target_dim < 1:
        raise ValueError("target_dim must be >= 1")
    return [
        Jet2Data(np.eye(target_dim)[k], np.zeros((target_dim, target_dim)))
        for k in range(target_dim)
    ]


def coordinate_probe(manifold, k):
    """The k-th coordinate function of a chart, as a scalar field."""
    return SmoothMap(
        source=manifold,
        target=_SCALAR_LINE,
        components=(lambda pt, _k=k: pt[_k],),
        name=f"coord{k + 1}[{manifold.name}]",
    )


def morphism_probe_test(u, p, samples=None, tol=1e-6):
    """Pull every coordinate probe back through u and test p-symphonicity.

    This mirrors the finite probe argument: it is a necessary certificate
    only, and the report says so.  On non-flat targets each probe's own
    defect at the image points is subtracted as a baseline instead of being
    assumed zero."""
    pts = _ensure_samples(u, samples)
    flat_target = u.target.is_euclidean
    image_pts = None if flat_target else np.array([u(x) for x in pts])
    per_probe = {}
    verdict = True
    worst = 0.0
    warnings = []
    for k in range(u.target.dim):
        probe = coordinate_probe(u.target, k)
        pulled = compose(probe, u)
        rep = is_p_symphonic(pulled, p, pts, tol)
        baseline = 0.0
        if not flat_target:
            baseline = is_p_symphonic(probe, p, image_pts, tol).max_residual
        adjusted = max(0.0, rep.max_residual - baseline)
        per_probe[f"probe_{k + 1}"] = {
            "residual": rep.max_residual,
            "baseline": baseline,
            "adjusted": adjusted,
        }
        warnings.extend(rep.warnings)
        verdict &= adjusted < tol
        worst = max(worst, adjusted)
    records = [PointRecord((), worst)]
    report = ResidualReport(
        name=f"morphism_probes(p={p})",
        per_point=records,
        max_residual=worst,
        mean_residual=worst,
        tolerance=tol,
        verdict=bool(verdict),
        annotations={
            "per_probe": per_probe,
            "certificate": "necessary condition only: finitely many probe functions",
        },
        warnings=warnings,
    )
    return report


@dataclass
class Theorem7Ingredients:
    """Frame-sum aggregates entering the weighted-divergence decomposition
    of a composite, exposed term by term for audit.

    ``I`` collects the two displayed second-fundamental-form terms of the
    unweighted divergence; ``I_full`` adds the trace term so that

        div(sigma_{f o u}) = lambda^4 div(sigma_f) o u + I_full

    holds for horizontally conformal u.  ``II``/``III`` are the weight-
    gradient aggregates; the exact decomposition asserts the total

        div(w^(p-2) sigma_{f o u}) = w^(p-2) [lambda^4 D_f + I_full]
                                   + (p-2)/2 w^(p-4) lambda^8 G_f

    for constant dilation, where D_f and G_f are the unweighted divergence
    and the gradient aggregate of f evaluated at the image point.
    """

    point: tuple
    I: np.ndarray
    II: np.ndarray
    III: np.ndarray
    subterms: dict
    predicted_total: np.ndarray
    direct_total: np.ndarray
    residual: float
    lambda_sq: float


def _frame_connection(manifold, point, E):
    """Coordinate components of nabla_{E_a} E_b for the Cholesky frame."""
    n = manifold.dim
    if manifold.is_euclidean:
        return np.zeros((n, n, n))
    pt = [float(c) for c in point]
    dE = np.zeros((n, n, n))  # dE[d, g, b] = d_d E^g_b
    for d in range(n):
        coords = [Dual(pt[k], 1.0 if k == d else 0.0) for k in range(n)]
        F = frame_generic(manifold, coords)
        for g_i in range(n):
            for b in range(n):
                v = F[g_i][b]
                dE[d, g_i, b] = v.ep if isinstance(v, Dual) else 0.0
    gamma = metric_jet(manifold, pt).christoffel
    # (nabla_{E_a} E_b)^g = E^d_a (d_d E^g_b + Gamma^g_{d e} E^e_b)
    return np.einsum("da,dgb->agb", E, dE) + np.einsum("da,gde,eb->agb", E, gamma, E)


def theorem7_ingredients(f, u, p, point):
    """Evaluate the displayed composite-divergence aggregates at one point
    and check the exact decomposition against the direct weighted divergence."""
    comp = compose(f, u)
    x = np.asarray(point, dtype=float)
    ju = map_jet(u, x)
    jf = map_jet(f, ju.image)
    jc = map_jet(comp, x)
    m = u.source.dim
    E = orthonormal_frame(u.source, x)
    Ht = metric_jet(f.target, jc.image).g

    S = jc.du @ jc.P  # sigma_{f o u} components
    v = [jc.du @ E[:, b] for b in range(m)]  # d(f o u)(E_b)
    s = [S @ E[:, b] for b in range(m)]  # sigma(E_b)
    # W[a][b] = df(ddu(E_a, E_b)); ndf[a][b] = (nabla df)(du E_a, du E_b)
    sf_u = np.einsum("jgd,ga,db->jab", ju.second_fund, E, E)
    W = np.einsum("cj,jab->cab", jf.du, sf_u)
    ndf = np.einsum("cjk,jg,ga,kd,db->cab", jf.second_fund, ju.du, E, ju.du, E)
    conn = _frame_connection(u.source, x, E)
    F = np.einsum("cg,agb->cab", jc.du, conn)  # d(f o u)(nabla_{E_a} E_b)

    def ip(a, b):
        return float(a @ Ht @ b)

    q = f.target.dim
    i_trace = np.zeros(q)
    i_mixed = np.zeros(q)
    i_outer = np.zeros(q)
    for a in range(m):
        for b in range(m):
            i_trace += ip(W[:, b, b], v[a]) * v[a]
            i_mixed += ip(v[b], W[:, b, a]) * v[a]
            i_outer += ip(v[b], v[a]) * W[:, b, a]
    I_paper = i_mixed + i_outer
    I_full = i_trace + I_paper

    ii_ddu = np.zeros(q)
    ii_frame = np.zeros(q)
    for a in range(m):
        for b in range(m):
            for g_i in range(m):
                ii_ddu += ip(W[:, a, b], v[g_i]) * ip(v[g_i], v[b]) * s[a]
                ii_frame += ip(F[:, a, b], v[g_i]) * ip(v[g_i], v[b]) * s[a]
    II = 3.0 * ii_ddu + 3.0 * ii_frame

    iii_ndf = np.zeros(q)
    iii_ddu = np.zeros(q)
    iii_frame = np.zeros(q)
    for a in range(m):
        for b in range(m):
            iii_ndf += ip(s[b], ndf[:, a, b]) * s[a]
            iii_ddu += ip(s[b], W[:, a, b]) * s[a]
            iii_frame += ip(s[b], F[:, a, b]) * s[a]
    III = iii_ndf + iii_ddu + iii_frame

    lam_sq, _ = dilation_sq(u, x)
    w2 = float(np.trace(jc.P @ jc.P))
    # f-side pieces at the image point.
    f_field = sigma_field(f)
    D_f = divergence(f_field, ju.image).div
    y = [float(c) for c in ju.image]
    n_t = f.source.dim
    dwf2 = np.zeros(n_t)
    for c in range(n_t):
        coords = [Dual(y[k], 1.0 if k == c else 0.0) for k in range(n_t)]
        val = f_field.weight_squared_fn(coords)
        dwf2[c] = val.ep if isinstance(val, Dual) else 0.0
    h_inv = metric_jet(f.source, y).g_inv
    sigma_f = f_field.components(y)
    G_f = sigma_f @ (h_inv @ dwf2)

    # Composite-side gradient aggregate (audit value): sigma(grad_g w^2).
    comp_field = sigma_field(comp)
    dw2 = np.zeros(m)
    for c in range(m):
        coords = [Dual(float(x[k]), 1.0 if k == c else 0.0) for k in range(m)]
        val = comp_field.weight_squared_fn(coords)
        dw2[c] = val.ep if isinstance(val, Dual) else 0.0
    g_inv = metric_jet(u.source, x).g_inv
    G_comp = S @ (g_inv @ dw2)

    wp2 = w2 ** ((p - 2.0) / 2.0)
    predicted = wp2 * (lam_sq ** 2 * D_f + I_full)
    if p != 2.0:
        wp4 = w2 ** ((p - 4.0) / 2.0)
        predicted = predicted + 0.5 * (p - 2.0) * wp4 * (lam_sq ** 4) * G_f
    direct = weighted_divergence(comp_field, p, x).div
    return Theorem7Ingredients(
        point=tuple(float(c) for c in x),
        I=I_paper,
        II=II,
        III=III,
        subterms={
            "i_trace": i_trace,
            "i_mixed": i_mixed,
            "i_outer": i_outer,
            "i_full": I_full,
            "ii_ddu_part": ii_ddu,
            "ii_frame_part": ii_frame,
            "iii_ndf": iii_ndf,
            "iii_ddu": iii_ddu,
            "iii_frame": iii_frame,
            "grad_aggregate_composite": G_comp,
            "grad_aggregate_target": G_f,
            "div_target": D_f,
        },
        predicted_total=predicted,
        direct_total=direct,
        residual=float(np.max(np.abs(predicted - direct))),
        lambda_sq=lam_sq,
    )
