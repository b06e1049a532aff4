"""Chart-described Riemannian manifolds and pointwise metric data."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

from .autodiff import Dual, as_matrix, mat_identity, real_value
from .errors import DomainViolation, GeometryError

__all__ = ["Box", "ChartManifold", "MetricJet", "metric_jet", "orthonormal_frame"]


@dataclass(frozen=True)
class Box:
    """Axis-aligned open box; bounds may be +-inf."""

    bounds: Tuple[Tuple[float, float], ...]

    def __post_init__(self):
        for lo, hi in self.bounds:
            if not lo < hi:
                raise ValueError(f"empty interval ({lo}, {hi}) in domain box")

    @property
    def dim(self):
        return len(self.bounds)

    @property
    def is_bounded(self):
        return all(math.isfinite(lo) and math.isfinite(hi) for lo, hi in self.bounds)

    def contains(self, point):
        return self.violating_axis(point) is None

    def violating_axis(self, point):
        for k, (lo, hi) in enumerate(self.bounds):
            if not (lo < real_value(point[k]) < hi):
                return k
        return None

    def shrunk(self, margin):
        """Bounds pulled in by ``margin`` (fraction of width) on each side."""
        out = []
        for lo, hi in self.bounds:
            w = hi - lo
            out.append((lo + margin * w, hi - margin * w))
        return Box(tuple(out))


def cube(half_width, dim):
    return Box(tuple((-half_width, half_width) for _ in range(dim)))


@dataclass(frozen=True)
class ChartManifold:
    """A single coordinate chart with a smooth metric-component function.

    ``metric`` maps a coordinate point (a sequence of scalar-likes) to the
    dim x dim matrix of metric components; ``None`` means Euclidean.  For
    unbounded domains, ``sample_box`` supplies the finite window used by
    samplers.
    """

    dim: int
    domain: Box
    metric: Optional[Callable[[Sequence], Sequence]] = None
    name: str = "chart"
    sample_box: Optional[Box] = None

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dim must be positive")
        if self.domain.dim != self.dim:
            raise ValueError("domain dimension mismatch")

    @property
    def is_euclidean(self):
        return self.metric is None

    def check_point(self, point):
        axis = self.domain.violating_axis(point)
        if axis is not None:
            raise DomainViolation(self.name, [real_value(c) for c in point], axis)

    def metric_values(self, point):
        """Metric components at ``point``, generic over scalar type."""
        if self.metric is None:
            return mat_identity(self.dim)
        return as_matrix(self.metric(point), self.dim)

    def sampling_box(self):
        if self.sample_box is not None:
            return self.sample_box
        if not self.domain.is_bounded:
            raise GeometryError(
                f"manifold {self.name!r} has an unbounded domain and no sample_box"
            )
        return self.domain


@dataclass
class MetricJet:
    """Metric, inverse, first derivatives and Christoffel symbols at a point.

    Index conventions: ``dg[c, a, b]`` is the derivative of g_ab along
    coordinate c; ``christoffel[c, a, b]`` has the upper index first.
    """

    g: np.ndarray
    g_inv: np.ndarray
    dg: np.ndarray
    christoffel: np.ndarray


_EUCLIDEAN_JETS = {}


def _euclidean_jet(n):
    jet = _EUCLIDEAN_JETS.get(n)
    if jet is None:
        jet = MetricJet(np.eye(n), np.eye(n), np.zeros((n, n, n)), np.zeros((n, n, n)))
        _EUCLIDEAN_JETS[n] = jet
    return jet


def metric_jet(manifold, point):
    """Levi-Civita data of ``manifold`` at ``point``.

    Raises GeometryError when the metric is not positive definite there.
    """
    manifold.check_point(point)
    n = manifold.dim
    if manifold.is_euclidean:
        return _euclidean_jet(n)
    pt = [float(c) for c in point]
    g = np.zeros((n, n))
    dg = np.zeros((n, n, n))
    for c in range(n):
        coords = [Dual(pt[k], 1.0 if k == c else 0.0) for k in range(n)]
        rows = manifold.metric_values(coords)
        for a in range(n):
            for b in range(n):
                entry = rows[a][b]
                if isinstance(entry, Dual):
                    if c == 0:
                        g[a, b] = real_value(entry.re)
                    dg[c, a, b] = real_value(entry.ep)
                elif c == 0:
                    g[a, b] = float(entry)
    if not np.allclose(g, g.T, atol=1e-12):
        raise GeometryError(f"metric of {manifold.name!r} is not symmetric", pt)
    try:
        np.linalg.cholesky(g)
    except np.linalg.LinAlgError:
        raise GeometryError(
            f"metric of {manifold.name!r} is not positive definite", pt
        ) from None
    g_inv = np.linalg.inv(g)
    # Gamma^c_ab = 1/2 g^{cd} (d_a g_db + d_b g_ad - d_d g_ab)
    combo = dg.transpose(1, 0, 2) + dg.transpose(2, 1, 0) - dg
    christoffel = 0.5 * np.einsum("cd,dab->cab", g_inv, combo)
    return MetricJet(g, g_inv, dg, christoffel)


def frame_generic(manifold, coords):
    """Orthonormal frame columns at generic coordinates (same Cholesky
    convention as :func:`orthonormal_frame`), for differentiating frame
    fields through jets."""
    from .autodiff import mat_cholesky, mat_inverse, mat_transpose

    if manifold.is_euclidean:
        return mat_identity(manifold.dim)
    g = manifold.metric_values(coords)
    return mat_transpose(mat_inverse(mat_cholesky(g)))


def orthonormal_frame(manifold, point, rotation=None):
    """Columns form a g-orthonormal frame at ``point`` (Cholesky convention).

    ``rotation`` post-multiplies by an orthogonal matrix; downstream
    frame-summed quantities must not change under it (test hook).
    """
    jet = metric_jet(manifold, point)
    L = np.linalg.cholesky(jet.g)
    frame = np.linalg.inv(L).T
    if rotation is not None:
        frame = frame @ np.asarray(rotation, dtype=float)
    return frame
