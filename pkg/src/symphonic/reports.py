"""Result records shared by the predicate checkers and identity verifiers."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np


def _listify(x):
    if x is None:
        return None
    if isinstance(x, np.ndarray):
        return [float(v) for v in np.ravel(x)]
    if isinstance(x, (list, tuple)):
        return [float(v) for v in x]
    return float(x)


@dataclass
class PointRecord:
    point: tuple
    residual: float
    lhs: Optional[object] = None
    rhs: Optional[object] = None
    image: Optional[tuple] = None  # target point, when the rhs lives there

    def to_dict(self):
        out = {
            "point": [float(c) for c in self.point],
            "residual": float(self.residual),
            "lhs": _listify(self.lhs),
            "rhs": _listify(self.rhs),
        }
        if self.image is not None:
            out["image"] = [float(c) for c in self.image]
        return out


@dataclass
class ResidualReport:
    """Per-point residuals of a named check plus the aggregate verdict.

    ``rhs`` values already include any scaling factor the identity puts on
    them, so residual is plainly |lhs - rhs| (max norm over components).
    ``annotations`` carries hypothesis-check results so a failed identity
    with failed hypotheses can be told apart from a counterexample candidate.
    """

    name: str
    per_point: List[PointRecord]
    max_residual: float
    mean_residual: float
    tolerance: float
    verdict: bool
    fitted_exponent: Optional[float] = None
    annotations: dict = field(default_factory=dict)
    warnings: List[str] = field(default_factory=list)

    def to_dict(self, include_points=False):
        out = {
            "name": self.name,
            "max_residual": float(self.max_residual),
            "mean_residual": float(self.mean_residual),
            "tolerance": float(self.tolerance),
            "verdict": bool(self.verdict),
            "n_points": len(self.per_point),
            "annotations": _plain(self.annotations),
            "warnings": list(self.warnings),
        }
        if self.fitted_exponent is not None:
            out["fitted_exponent"] = float(self.fitted_exponent)
        if include_points:
            out["per_point"] = [r.to_dict() for r in self.per_point]
        return out


def _plain(obj):
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    return obj


def aggregate(name, records, tol, fitted_exponent=None, annotations=None, warnings=None):
    """Build a ResidualReport from per-point records at tolerance ``tol``."""
    residuals = [r.residual for r in records]
    max_r = max(residuals) if residuals else 0.0
    mean_r = float(np.mean(residuals)) if residuals else 0.0
    return ResidualReport(
        name=name,
        per_point=records,
        max_residual=float(max_r),
        mean_residual=mean_r,
        tolerance=float(tol),
        verdict=bool(max_r < tol),
        fitted_exponent=fitted_exponent,
        annotations=annotations or {},
        warnings=warnings or [],
    )
