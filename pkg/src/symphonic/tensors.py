"""Stress-energy tensors of a map and their plain and weighted divergences.

Every tensor here is a (target-vector)-valued 1-form along a map u, with
components sigma^i_alpha built from matrix powers of the pullback
endomorphism P = g^{-1} (u*h):

    sigma        = du P                    (the quadratic stress tensor)
    sigma_m      = du P^(m-1)              (higher-power variant, m >= 2)
    sigma_T      = du P - (tr P / dim) du
    sigma_S      = du P + ((dim-4)/4) (tr P) du
    sigma_T_m    = du P^(m-1) - (1/m) (tr P)^(p/2) du
    sigma_S_m    = du P^(m-1) + ((m-4)/4) (tr P)^(p/2) du

The matrix form equals the nested orthonormal-frame sums (kept here as a
brute-force oracle).  Divergences differentiate the whole construction
through forward-mode jets, so no third-order bookkeeping is hand-coded.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from .autodiff import (
    Dual,
    mat_det,
    mat_inverse,
    mat_mul,
    mat_power,
    mat_trace,
    mat_transpose,
    mat_vec,
    powc,
    real_value,
    sqrt,
)
from .errors import SingularWeightError
from .geometry import metric_jet, orthonormal_frame
from .maps import SmoothMap, du_generic, map_jet

__all__ = [
    "TensorField1FormValued",
    "DivergenceResult",
    "EnergyDensities",
    "sigma_field",
    "sigma_m_field",
    "sigma_T_field",
    "sigma_S_field",
    "sigma_T_m_field",
    "sigma_S_m_field",
    "sigma",
    "sigma_m",
    "sigma_T",
    "sigma_S",
    "sigma_T_m",
    "sigma_S_m",
    "energy_densities",
    "divergence",
    "weighted_divergence",
    "sigma_frame_sum",
    "divergence_frame_sum",
    "scalar_field_divergence",
]


def _map_du_P(map_, coords):
    """du and P = g^{-1} (du^T h(u) du) at generic coordinates."""
    du = du_generic(map_, coords)
    g = map_.source.metric_values(coords)
    image = map_.evaluate_generic(coords)
    if map_.target.is_euclidean:
        pullback = mat_mul(mat_transpose(du), du)
    else:
        h = map_.target.metric_values(image)
        pullback = mat_mul(mat_transpose(du), mat_mul(h, du))
    if map_.source.is_euclidean:
        P = pullback
    else:
        P = mat_mul(mat_inverse(g), pullback)
    return du, P


def _trace_pow(P, m):
    return mat_trace(P if m == 1 else mat_power(P, m))


def _zero_safe_pow(x, q):
    """x**q with the continuous-extension convention 0**q = 0 for q > 0."""
    if real_value(x) == 0.0:
        return 0.0
    return powc(x, q)


def _scaled_sub(A, c, B):
    """A + c*B entrywise on list-of-lists."""
    return [[a + c * b for a, b in zip(ra, rb)] for ra, rb in zip(A, B)]


@dataclass(frozen=True)
class TensorField1FormValued:
    """A (target-vector)-valued 1-form sigma^i_alpha along ``map_ref``.

    ``components_fn`` evaluates the components at generic coordinates;
    ``weight_squared_fn`` evaluates the square of the natural weight scalar
    (||u*h|| for the quadratic kinds, ||d_m u|| for power kinds).
    """

    map_ref: SmoothMap
    kind: str
    components_fn: Callable = field(compare=False)
    weight_squared_fn: Callable = field(compare=False)
    params: dict = field(default_factory=dict)

    def components(self, point):
        """Float components at a float point, as an ndarray."""
        rows = self.components_fn([float(c) for c in point])
        return np.array([[real_value(v) for v in row] for row in rows])


def sigma_field(map_):
    def components_fn(coords):
        du, P = _map_du_P(map_, coords)
        return mat_mul(du, P)

    def weight_squared_fn(coords):
        _, P = _map_du_P(map_, coords)
        return _trace_pow(P, 2)

    return TensorField1FormValued(map_, "sigma_p", components_fn, weight_squared_fn)


def sigma_m_field(map_, m):
    if m < 2:
        raise ValueError(f"power order m must be >= 2, got {m}")
    m = int(m)

    def components_fn(coords):
        du, P = _map_du_P(map_, coords)
        return mat_mul(du, mat_power(P, m - 1))

    def weight_squared_fn(coords):
        _, P = _map_du_P(map_, coords)
        return _trace_pow(P, m)

    return TensorField1FormValued(
        map_, "sigma_m", components_fn, weight_squared_fn, {"m": m}
    )


def sigma_T_field(map_):
    dim = map_.source.dim

    def components_fn(coords):
        du, P = _map_du_P(map_, coords)
        return _scaled_sub(mat_mul(du, P), -mat_trace(P) * (1.0 / dim), du)

    def weight_squared_fn(coords):
        _, P = _map_du_P(map_, coords)
        return _trace_pow(P, 2)

    return TensorField1FormValued(map_, "sigma_T", components_fn, weight_squared_fn)


def sigma_S_field(map_):
    dim = map_.source.dim
    coeff = (dim - 4.0) / 4.0

    def components_fn(coords):
        du, P = _map_du_P(map_, coords)
        return _scaled_sub(mat_mul(du, P), coeff * mat_trace(P), du)

    def weight_squared_fn(coords):
        _, P = _map_du_P(map_, coords)
        return _trace_pow(P, 2)

    return TensorField1FormValued(map_, "sigma_S", components_fn, weight_squared_fn)


def _power_trace_field(map_, m, p, coeff_sign):
    if m < 2:
        raise ValueError(f"power order m must be >= 2, got {m}")
    if p < 1:
        raise ValueError(f"exponent p must be >= 1, got {p}")
    m = int(m)
    p = float(p)
    coeff = (-1.0 / m) if coeff_sign < 0 else (m - 4.0) / 4.0

    def components_fn(coords):
        du, P = _map_du_P(map_, coords)
        energy_pow = _zero_safe_pow(mat_trace(P), p / 2.0)  # |du|^p as (|du|^2)^(p/2)
        return _scaled_sub(mat_mul(du, mat_power(P, m - 1)), coeff * energy_pow, du)

    def weight_squared_fn(coords):
        _, P = _map_du_P(map_, coords)
        return _trace_pow(P, m)

    kind = "sigma_T_m" if coeff_sign < 0 else "sigma_S_m"
    return TensorField1FormValued(
        map_, kind, components_fn, weight_squared_fn, {"m": m, "p": p}
    )


def sigma_T_m_field(map_, m, p):
    return _power_trace_field(map_, m, p, -1)


def sigma_S_m_field(map_, m, p):
    return _power_trace_field(map_, m, p, +1)


# Pointwise evaluations (float matrices), the operation-level surface.


def sigma(map_, point):
    return sigma_field(map_).components(point)


def sigma_m(map_, m, point):
    return sigma_m_field(map_, m).components(point)


def sigma_T(map_, point):
    return sigma_T_field(map_).components(point)


def sigma_S(map_, point):
    return sigma_S_field(map_).components(point)


def sigma_T_m(map_, m, p, point):
    return sigma_T_m_field(map_, m, p).components(point)


def sigma_S_m(map_, m, p, point):
    return sigma_S_m_field(map_, m, p).components(point)


@dataclass
class EnergyDensities:
    """Pointwise energy scalars: |du|^2 = tr P, ||u*h||^2 = tr P^2, and the
    m-th power density tr P^m."""

    e_du: float
    e_pullback: float
    _P: np.ndarray

    def e_m(self, m):
        if m < 1:
            raise ValueError("m must be >= 1")
        return float(np.trace(np.linalg.matrix_power(self._P, int(m))))


def energy_densities(map_, point):
    jet = map_jet(map_, point)
    return EnergyDensities(
        e_du=float(np.trace(jet.P)),
        e_pullback=float(np.trace(jet.P @ jet.P)),
        _P=jet.P,
    )


@dataclass
class DivergenceResult:
    """Divergence vector at a point, with the weight diagnostics.

    ``weight_value`` is the scalar prefactor w^(p-2) (1 for the plain
    divergence); ``weight_norm`` is the underlying tensor norm w.  For
    weighted divergences, ``div = grad_term + sigma_term`` exactly, where
    grad_term contracts the gradient of w^(p-2) with sigma and sigma_term
    is w^(p-2) times the plain divergence.
    """

    point: tuple
    div: np.ndarray
    weight_value: float = 1.0
    weight_norm: float = 1.0
    grad_term: Optional[np.ndarray] = None
    sigma_term: Optional[np.ndarray] = None


def _divergence_pieces(tensor, point):
    """Shared float data: sigma, its coordinate derivatives, metrics, du."""
    map_ = tensor.map_ref
    pt = [float(c) for c in point]
    n_s = map_.source.dim
    n_t = map_.target.dim

    sig = None
    dsig = np.zeros((n_s, n_t, n_s))
    dw2 = np.zeros(n_s)
    w2 = None
    for c in range(n_s):
        coords = [Dual(pt[k], 1.0 if k == c else 0.0) for k in range(n_s)]
        rows = tensor.components_fn(coords)
        if sig is None:
            sig = np.array([[real_value(v) for v in row] for row in rows])
        for i in range(n_t):
            for a in range(n_s):
                v = rows[i][a]
                dsig[c, i, a] = v.ep if isinstance(v, Dual) else 0.0
        wv = tensor.weight_squared_fn(coords)
        if w2 is None:
            w2 = real_value(wv)
        dw2[c] = wv.ep if isinstance(wv, Dual) else 0.0

    src = metric_jet(map_.source, pt)
    image = map_(pt)
    tgt = metric_jet(map_.target, image)
    du = np.array(
        [[real_value(v) for v in row] for row in du_generic(map_, pt)]
    )
    # div^i = g^{ab} (d_a sigma^i_b - Gamma^c_ab sigma^i_c
    #                 + tGamma^i_jk u^j_a sigma^k_b)
    covar = dsig.transpose(1, 0, 2)  # (i, a, b) = d_a sigma^i_b
    covar = covar - np.einsum("cab,ic->iab", src.christoffel, sig)
    if not map_.target.is_euclidean:
        covar = covar + np.einsum("ijk,ja,kb->iab", tgt.christoffel, du, sig)
    div_sigma = np.einsum("ab,iab->i", src.g_inv, covar)
    return pt, sig, div_sigma, w2, dw2, src


def divergence(tensor, point):
    """Plain divergence of the tensor along its map (weight = 1)."""
    pt, _sig, div_sigma, w2, _dw2, _src = _divergence_pieces(tensor, point)
    return DivergenceResult(
        tuple(pt), div_sigma, weight_norm=float(np.sqrt(max(w2, 0.0)))
    )


def override_weight(tensor, weight_rule):
    """Copy of ``tensor`` with its weight swapped: "pullback" selects
    ||u*h||, an integer m selects ||d_m u||."""
    map_ = tensor.map_ref
    if weight_rule == "pullback":
        order = 2
    else:
        order = int(weight_rule)
        if order < 2:
            raise ValueError(f"weight order must be >= 2, got {weight_rule!r}")

    def weight_squared_fn(coords):
        _, P = _map_du_P(map_, coords)
        return _trace_pow(P, order)

    return replace(tensor, weight_squared_fn=weight_squared_fn)


def weighted_divergence(tensor, p, point, weight_rule=None):
    """Divergence of w^(p-2) sigma where w is the tensor's natural weight
    (||u*h|| for the quadratic kinds, ||d_m u|| for power kinds);
    ``weight_rule`` overrides it ("pullback" or a power order m).

    Returns the total together with the gradient-of-weight term and the
    weighted plain-divergence term.  A zero weight with p < 2 is reported as
    a singular-weight error; with p >= 2 the weighted term extends by
    continuity (w^0 = 1 at p = 2, zero for p > 2).
    """
    p = float(p)
    if weight_rule is not None:
        tensor = override_weight(tensor, weight_rule)
    pt, sig, div_sigma, w2, dw2, src = _divergence_pieces(tensor, point)
    weight_norm = float(np.sqrt(max(w2, 0.0)))
    if w2 == 0.0:
        if p < 2.0:
            raise SingularWeightError(pt, p)
        wp = 1.0 if p == 2.0 else 0.0
        grad_term = np.zeros_like(div_sigma)
        sigma_term = wp * div_sigma
        return DivergenceResult(
            tuple(pt), grad_term + sigma_term, wp, weight_norm, grad_term, sigma_term
        )
    # w^(p-2) = (w^2)^((p-2)/2); differentiate through the squared weight.
    q = (p - 2.0) / 2.0
    wp = w2 ** q
    dwp = q * (w2 ** (q - 1.0)) * dw2 if q != 0.0 else np.zeros_like(dw2)
    grad_term = np.einsum("ab,a,ib->i", src.g_inv, dwp, sig)
    sigma_term = wp * div_sigma
    return DivergenceResult(
        tuple(pt), grad_term + sigma_term, float(wp), weight_norm, grad_term, sigma_term
    )


# ---------------------------------------------------------------------------
# Frame-sum oracle paths.  Slow nested loops over orthonormal frames; these
# exist to cross-check the matrix-power realizations and frame independence.
# ---------------------------------------------------------------------------


def sigma_frame_sum(map_, point, m=2, frame=None):
    """sigma_m via the literal nested frame sums of its definition."""
    jet = map_jet(map_, point)
    E = orthonormal_frame(map_.source, point) if frame is None else np.asarray(frame)
    h = metric_jet(map_.target, jet.image).g
    n_s = map_.source.dim
    vecs = [jet.du @ E[:, j] for j in range(n_s)]

    def inner(a, b):
        return float(a @ h @ b)

    out = np.zeros((map_.target.dim, n_s))
    for b in range(n_s):
        x_vec = jet.du[:, b]
        for js in itertools.product(range(n_s), repeat=m - 1):
            c = inner(x_vec, vecs[js[0]])
            for t in range(len(js) - 1):
                c *= inner(vecs[js[t]], vecs[js[t + 1]])
            out[:, b] += c * vecs[js[-1]]
    return out


def divergence_frame_sum(tensor, point, frame=None):
    """Divergence as the frame sum over (nabla_E sigma)(E) for an
    orthonormal frame E, usable with rotated frames as an invariance check."""
    map_ = tensor.map_ref
    pt = [float(c) for c in point]
    _, sig, _, _, _, src = _divergence_pieces(tensor, point)
    n_s, n_t = map_.source.dim, map_.target.dim
    dsig = np.zeros((n_s, n_t, n_s))
    for c in range(n_s):
        coords = [Dual(pt[k], 1.0 if k == c else 0.0) for k in range(n_s)]
        rows = tensor.components_fn(coords)
        for i in range(n_t):
            for a in range(n_s):
                v = rows[i][a]
                dsig[c, i, a] = v.ep if isinstance(v, Dual) else 0.0
    image = map_(pt)
    tgt = metric_jet(map_.target, image)
    du = np.array([[real_value(v) for v in row] for row in du_generic(map_, pt)])
    covar = dsig.transpose(1, 0, 2) - np.einsum("cab,ic->iab", src.christoffel, sig)
    if not map_.target.is_euclidean:
        covar = covar + np.einsum("ijk,ja,kb->iab", tgt.christoffel, du, sig)
    E = orthonormal_frame(map_.source, pt) if frame is None else np.asarray(frame)
    div = np.zeros(n_t)
    for b in range(n_s):
        e = E[:, b]
        div += np.einsum("a,iab,b->i", e, covar, e)
    return DivergenceResult(tuple(pt), div)


def scalar_field_divergence(f_map, q, point):
    """Independent scalar-field path: div_g(|grad f|^(q-2) grad f) through
    the volume-density formula, with no stress-tensor machinery involved.

    For a scalar field, the weighted stress divergence with exponent p
    coincides with this operator at q = 2p.
    """
    if f_map.target.dim != 1:
        raise ValueError("scalar_field_divergence expects a scalar field")
    pt = [float(c) for c in point]
    n = f_map.source.dim

    def flux_component(coords, a):
        g = f_map.source.metric_values(coords)
        ginv = mat_inverse(g)
        df = du_generic(f_map, coords)[0]
        grad = mat_vec(ginv, df)
        e = df[0] * grad[0]
        for t in range(1, n):
            e = e + df[t] * grad[t]
        dens = sqrt(mat_det(g))
        return dens * _zero_safe_pow(e, (q - 2.0) / 2.0) * grad[a]

    total = 0.0
    for a in range(n):
        coords = [Dual(pt[k], 1.0 if k == a else 0.0) for k in range(n)]
        v = flux_component(coords, a)
        total += v.ep if isinstance(v, Dual) else 0.0
    g0 = f_map.source.metric_values(pt)
    dens0 = float(np.sqrt(real_value(mat_det(g0))))
    return DivergenceResult(tuple(pt), np.array([total / dens0]))
