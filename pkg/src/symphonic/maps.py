"""Smooth maps between chart manifolds: jets, pullbacks and composition."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Tuple

import numpy as np

from .autodiff import Dual, evaluate_jet2, real_value
from .errors import DomainViolation
from .geometry import ChartManifold, metric_jet
from .reports import PointRecord, aggregate

__all__ = ["SmoothMap", "MapJet", "map_jet", "compose", "verify_chain_rule_main1"]


@dataclass(frozen=True)
class SmoothMap:
    """A coordinate map between charts, one scalar component per target axis.

    Components are plain callables of a coordinate sequence and must be
    generic over scalar type (floats and dual numbers alike), which is what
    makes nested-jet evaluation of composites exact.
    """

    source: ChartManifold
    target: ChartManifold
    components: Tuple[Callable, ...]
    name: str = "map"

    def __post_init__(self):
        if len(self.components) != self.target.dim:
            raise ValueError(
                f"map {self.name!r}: {len(self.components)} components for "
                f"target dimension {self.target.dim}"
            )

    def __call__(self, point):
        """Evaluate at a float point, checking both chart domains."""
        self.source.check_point(point)
        image = np.array([float(real_value(c(point))) for c in self.components])
        self.target.check_point(image)
        return image

    def evaluate_generic(self, coords):
        """Evaluate components on scalar-likes without domain checks."""
        return [c(coords) for c in self.components]


def du_generic(map_, coords):
    """Differential u^i_alpha at generic coordinates, via one dual pass per
    source direction.  Returns a target.dim x source.dim list-of-lists."""
    n_s = len(coords)
    cols = []
    for a in range(n_s):
        seeded = [Dual(c, 1.0 if k == a else 0.0) for k, c in enumerate(coords)]
        col = []
        for comp in map_.components:
            r = comp(seeded)
            col.append(r.ep if isinstance(r, Dual) else 0.0)
        cols.append(col)
    return [[cols[a][i] for a in range(n_s)] for i in range(map_.target.dim)]


@dataclass
class MapJet:
    """All pointwise geometric data of a map: differential, second
    fundamental form, pullback metric and the endomorphism P = g^{-1} u*h."""

    point: np.ndarray
    image: np.ndarray
    du: np.ndarray          # (target.dim, source.dim)
    ddu: np.ndarray         # (target.dim, source.dim, source.dim)
    pullback: np.ndarray    # (source.dim, source.dim)
    second_fund: np.ndarray  # (target.dim, source.dim, source.dim)
    P: np.ndarray           # (source.dim, source.dim)


def map_jet(map_, point):
    """Second-order jet of ``map_`` at ``point`` plus metric contractions."""
    pt = np.array([float(c) for c in point])
    map_.source.check_point(pt)
    jets = [evaluate_jet2(comp, pt) for comp in map_.components]
    image = np.array([j.value for j in jets])
    try:
        map_.target.check_point(image)
    except DomainViolation:
        raise DomainViolation(f"image of {map_.name!r}", image) from None
    du = np.array([j.grad for j in jets])
    ddu = np.array([j.hess for j in jets])
    src = metric_jet(map_.source, pt)
    tgt = metric_jet(map_.target, image)
    pullback = du.T @ tgt.g @ du
    P = src.g_inv @ pullback
    second_fund = (
        ddu
        - np.einsum("gab,ig->iab", src.christoffel, du)
        + np.einsum("ijk,ja,kb->iab", tgt.christoffel, du, du)
    )
    return MapJet(pt, image, du, ddu, pullback, second_fund, P)


def compose(outer, inner):
    """Composite map with components outer o inner, evaluated by nesting.

    Jets of the composite therefore come out of the autodiff of the nested
    evaluation, independently of the chain-rule combination of the factors.
    """
    if inner.target.dim != outer.source.dim:
        raise ValueError(
            f"cannot compose: {inner.name!r} lands in dim {inner.target.dim}, "
            f"{outer.name!r} starts in dim {outer.source.dim}"
        )

    def make(comp_outer):
        inner_comps = inner.components

        def comp(pt):
            return comp_outer([c(pt) for c in inner_comps])

        return comp

    return SmoothMap(
        source=inner.source,
        target=outer.target,
        components=tuple(make(oc) for oc in outer.components),
        name=f"({outer.name} o {inner.name})",
    )


def verify_chain_rule_main1(f, u, points, tol=1e-8):
    """Check the composition rule for second fundamental forms,

        (d2f)(du X, du Y) + df(d2u(X, Y)) = d2(f o u)(X, Y),

    with the left side assembled from the jets of f and u and the right side
    read off the jet of the nested composite."""
    comp = compose(f, u)
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    records = []
    for x in pts:
        ju = map_jet(u, x)
        jf = map_jet(f, ju.image)
        jc = map_jet(comp, x)
        lhs = np.einsum("cjk,ja,kb->cab", jf.second_fund, ju.du, ju.du)
        lhs = lhs + np.einsum("cj,jab->cab", jf.du, ju.second_fund)
        rhs = jc.second_fund
        res = float(np.max(np.abs(lhs - rhs)))
        records.append(PointRecord(tuple(x), res, lhs=lhs, rhs=rhs))
    return aggregate("chain_rule_composition", records, tol)
