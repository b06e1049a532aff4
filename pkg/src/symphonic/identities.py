"""Two-sided numerical verification of the composition identities.

Each verifier evaluates the left and right sides of an identity through
independent pipelines (composite-map jets on the left, image-point jets
scaled by the extracted dilation on the right) and reports residuals.
Verification here always means falsifiable identity checking at finite
samples; hypothesis checks ride along as annotations so that a failing
identity with failing hypotheses is not mistaken for a counterexample.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .analysis import dilation_sq, horizontal_conformality, is_totally_geodesic
from .errors import SingularWeightError
from .maps import SmoothMap, compose, map_jet
from .reports import PointRecord, aggregate
from .sampling import manifold_samples
from .tensors import (
    divergence,
    sigma_S_field,
    sigma_T_field,
    sigma_field,
    sigma_m_field,
    weighted_divergence,
)

__all__ = [
    "IdentityCase",
    "IDENTITY_NAMES",
    "verify_thm1_unweighted",
    "verify_thm1_weighted",
    "verify_lemma3",
    "verify_thm6",
    "verify_sec3_T",
    "exponent_sweep",
    "run_identity",
]

IDENTITY_NAMES = (
    "thm1_unweighted",
    "thm1_weighted",
    "lemma3",
    "thm6_m_version",
    "sec3_T_theorem",
    "sec3_T_lemma",
    "sec3_S_variant",
)


@dataclass
class IdentityCase:
    name: str
    u: SmoothMap
    f: SmoothMap
    p: float = 2.0
    m: int = 2
    samples: Optional[Sequence] = None
    tol: float = 1e-6

    def __post_init__(self):
        if self.name not in IDENTITY_NAMES:
            raise ValueError(f"unknown identity {self.name!r}")
        if self.f.source.dim != self.u.target.dim:
            raise ValueError("f and u do not compose")


def _samples_for(u, samples, n=100, seed=0):
    if samples is None:
        return manifold_samples(u.source, n, seed)
    return np.atleast_2d(np.asarray(samples, dtype=float))


def _hypothesis_annotations(u, pts, f=None, check_f_conformal=False):
    sub = pts[: min(8, len(pts))]
    tg = is_totally_geodesic(u, sub, tol=1e-7)
    ann = {
        "u_totally_geodesic": tg.verdict,
        "u_second_fund_max": tg.max_residual,
    }
    if u.source.dim >= u.target.dim:
        conf = horizontal_conformality(u, sub, tol=1e-7)
        ann["u_horizontally_conformal"] = conf.verdict
        ann["u_conformality_residual"] = conf.max_residual
        ann["u_lambda_constant"] = conf.lambda_constant
    else:
        ann["u_horizontally_conformal"] = "not applicable (source dim < target dim)"
    if check_f_conformal and f is not None:
        images = np.array([u(x) for x in sub])
        if f.source.dim >= f.target.dim:
            fconf = horizontal_conformality(f, images, tol=1e-7)
            ann["f_conformal"] = fconf.verdict
            ann["f_conformality_residual"] = fconf.max_residual
        else:
            ann["f_conformal"] = "not applicable (source dim < target dim)"
    return ann


def _two_sided(name, u, f, pts, tol, lhs_fn, rhs_fn, scale_fn, annotations):
    """Generic two-sided sweep: residual of lhs(x) - scale(x) * rhs(u(x))."""
    records = []
    warnings = []
    for x in pts:
        try:
            lhs = lhs_fn(x)
            y = u(x)
            rhs = scale_fn(x) * rhs_fn(y)
        except SingularWeightError as e:
            warnings.append(str(e))
            continue
        res = float(np.max(np.abs(lhs - rhs)))
        records.append(PointRecord(tuple(x), res, lhs=lhs, rhs=rhs, image=tuple(y)))
    return aggregate(name, records, tol, annotations=annotations, warnings=warnings)


def verify_thm1_unweighted(u, f, samples=None, tol=1e-7):
    """div(sigma_{f o u}) against lambda^4 div(sigma_f) at the image."""
    pts = _samples_for(u, samples)
    comp_field = sigma_field(compose(f, u))
    f_field = sigma_field(f)
    return _two_sided(
        "thm1_unweighted",
        u,
        f,
        pts,
        tol,
        lambda x: divergence(comp_field, x).div,
        lambda y: divergence(f_field, y).div,
        lambda x: dilation_sq(u, x)[0] ** 2,
        _hypothesis_annotations(u, pts),
    )


def verify_thm1_weighted(u, f, p, samples=None, tol=1e-6):
    """Weighted form: the right side scales by lambda^(2p)."""
    pts = _samples_for(u, samples)
    comp_field = sigma_field(compose(f, u))
    f_field = sigma_field(f)
    return _two_sided(
        f"thm1_weighted(p={p})",
        u,
        f,
        pts,
        tol,
        lambda x: weighted_divergence(comp_field, p, x).div,
        lambda y: weighted_divergence(f_field, p, y).div,
        lambda x: dilation_sq(u, x)[0] ** p,
        _hypothesis_annotations(u, pts),
    )


def verify_lemma3(u, f, p, samples=None, tol=1e-6):
    """Three-term form with the correction lambda_f^2 df(div(w^(p-2) sigma_u)),
    which accounts exactly for u failing to be totally geodesic."""
    pts = _samples_for(u, samples)
    comp_field = sigma_field(compose(f, u))
    u_field = sigma_field(u)
    f_field = sigma_field(f)
    records = []
    warnings = []
    for x in pts:
        try:
            lhs = weighted_divergence(comp_field, p, x).div
            y = u(x)
            lam_sq = dilation_sq(u, x)[0]
            lam_f_sq = dilation_sq(f, y)[0]
            df = map_jet(f, y).du
            term1 = lam_f_sq * (df @ weighted_divergence(u_field, p, x).div)
            term2 = (lam_sq ** p) * weighted_divergence(f_field, p, y).div
        except SingularWeightError as e:
            warnings.append(str(e))
            continue
        rhs = term1 + term2
        records.append(
            PointRecord(tuple(x), float(np.max(np.abs(lhs - rhs))), lhs, rhs, tuple(y))
        )
    ann = _hypothesis_annotations(u, pts, f, check_f_conformal=True)
    return aggregate(f"lemma3(p={p})", records, tol, annotations=ann, warnings=warnings)


def verify_thm6(u, f, p, m, samples=None, tol=1e-6):
    """Power-order variant: sigma_m with the ||d_m .|| weight, scaling
    lambda^(m p)."""
    if m < 2:
        raise ValueError("m must be >= 2")
    pts = _samples_for(u, samples)
    comp_field = sigma_m_field(compose(f, u), m)
    f_field = sigma_m_field(f, m)
    return _two_sided(
        f"thm6(m={m},p={p})",
        u,
        f,
        pts,
        tol,
        lambda x: weighted_divergence(comp_field, p, x).div,
        lambda y: weighted_divergence(f_field, p, y).div,
        lambda x: dilation_sq(u, x)[0] ** (m * p / 2.0),
        _hypothesis_annotations(u, pts),
    )


def verify_sec3_T(u, f, samples=None, tol=1e-7, variant="T", form="theorem"):
    """Trace-modified composition identity, lambda^4 scaling.

    ``variant`` picks the tensor family; ``form='lemma'`` adds the
    lambda_f^2 df(div sigma_{T,u}) correction used when u is not totally
    geodesic.  The annotations record whether f is conformal, which the
    hypotheses ask for."""
    if variant not in ("T", "S"):
        raise ValueError("variant must be 'T' or 'S'")
    make = sigma_T_field if variant == "T" else sigma_S_field
    pts = _samples_for(u, samples)
    comp_field = make(compose(f, u))
    f_field = make(f)
    u_field = make(u) if form == "lemma" else None
    records = []
    for x in pts:
        lhs = divergence(comp_field, x).div
        y = u(x)
        lam_sq = dilation_sq(u, x)[0]
        rhs = (lam_sq ** 2) * divergence(f_field, y).div
        if form == "lemma":
            lam_f_sq = dilation_sq(f, y)[0]
            df = map_jet(f, y).du
            rhs = rhs + lam_f_sq * (df @ divergence(u_field, x).div)
        records.append(
            PointRecord(tuple(x), float(np.max(np.abs(lhs - rhs))), lhs, rhs, tuple(y))
        )
    ann = _hypothesis_annotations(u, pts, f, check_f_conformal=True)
    ann["equal_dims"] = u.source.dim == u.target.dim
    name = f"sec3_{variant}_{form}"
    return aggregate(name, records, tol, annotations=ann)


_SWEEPABLE = ("thm1_unweighted", "thm1_weighted", "thm6_m_version", "sec3_T_theorem", "sec3_S_variant")


def _sides_for_sweep(name, u, f, p, m):
    if name == "thm1_unweighted":
        lhs_field, rhs_field = sigma_field(compose(f, u)), sigma_field(f)
        return (
            lambda x: divergence(lhs_field, x).div,
            lambda y: divergence(rhs_field, y).div,
        )
    if name == "thm1_weighted":
        lhs_field, rhs_field = sigma_field(compose(f, u)), sigma_field(f)
        return (
            lambda x: weighted_divergence(lhs_field, p, x).div,
            lambda y: weighted_divergence(rhs_field, p, y).div,
        )
    if name == "thm6_m_version":
        lhs_field, rhs_field = sigma_m_field(compose(f, u), m), sigma_m_field(f, m)
        return (
            lambda x: weighted_divergence(lhs_field, p, x).div,
            lambda y: weighted_divergence(rhs_field, p, y).div,
        )
    make = sigma_T_field if name == "sec3_T_theorem" else sigma_S_field
    lhs_field, rhs_field = make(compose(f, u)), make(f)
    return (
        lambda x: divergence(lhs_field, x).div,
        lambda y: divergence(rhs_field, y).div,
    )


def exponent_sweep(name, u_family, f, lambdas, p=2.0, m=2, samples=None, seed=0, n_samples=25):
    """Fit the dilation exponent of a two-sided identity empirically.

    ``u_family`` maps a dilation value to a map; the fitted value is the
    least-squares slope of log ||lhs|| - log ||rhs unscaled|| against log
    lambda over the sweep.  Degenerate sweeps (fewer than two distinct
    lambdas) are rejected."""
    if name not in _SWEEPABLE:
        raise ValueError(f"identity {name!r} does not admit a two-sided sweep")
    lam_list = [float(v) for v in lambdas]
    if len(set(lam_list)) < 2:
        raise ValueError("sweep needs at least two distinct lambda values")
    logs = []
    per_lambda = []
    for lam in lam_list:
        u = u_family(lam)
        pts = _samples_for(u, samples, n_samples, seed)
        lhs_fn, rhs_fn = _sides_for_sweep(name, u, f, p, m)
        diffs = []
        for x in pts:
            lhs = lhs_fn(x)
            rhs = rhs_fn(u(x))
            na, nb = np.linalg.norm(lhs), np.linalg.norm(rhs)
            if na < 1e-13 or nb < 1e-13:
                continue
            diffs.append(np.log(na) - np.log(nb))
        if not diffs:
            raise ValueError(f"no usable samples at lambda={lam}")
        y = float(np.mean(diffs))
        logs.append((np.log(lam), y))
        per_lambda.append({"lambda": lam, "log_ratio": y, "n_used": len(diffs)})
    xs = np.array([a for a, _ in logs])
    ys = np.array([b for _, b in logs])
    slope, _intercept = np.polyfit(xs, ys, 1)
    return float(slope), per_lambda


def run_identity(case):
    """Dispatch an IdentityCase to the matching verifier."""
    if case.name == "thm1_unweighted":
        return verify_thm1_unweighted(case.u, case.f, case.samples, case.tol)
    if case.name == "thm1_weighted":
        return verify_thm1_weighted(case.u, case.f, case.p, case.samples, case.tol)
    if case.name == "lemma3":
        return verify_lemma3(case.u, case.f, case.p, case.samples, case.tol)
    if case.name == "thm6_m_version":
        return verify_thm6(case.u, case.f, case.p, case.m, case.samples, case.tol)
    if case.name == "sec3_T_theorem":
        return verify_sec3_T(case.u, case.f, case.samples, case.tol, "T", "theorem")
    if case.name == "sec3_T_lemma":
        return verify_sec3_T(case.u, case.f, case.samples, case.tol, "T", "lemma")
    return verify_sec3_T(case.u, case.f, case.samples, case.tol, "S", "theorem")
