"""Built-in manifolds, maps and scalar fields with certified properties.

Every tag carried here is re-verified by the matching predicate in the
test suite; none is asserted on trust.  Parameterized entries are
addressed as ``name:arg`` (for example ``dilation:2`` or
``scaled_rotation:1.3``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Dict, Tuple

from .autodiff import cos, sin
from .errors import ConfigError
from .geometry import Box, ChartManifold, cube
from .maps import SmoothMap

__all__ = ["ZooEntry", "catalog", "resolve", "euclidean", "dilation_family"]

_INF = float("inf")


@dataclass(frozen=True)
class ZooEntry:
    id: str
    kind: str  # "manifold" | "map" | "field"
    obj: object
    tags: Dict[str, object] = field(default_factory=dict)
    note: str = ""


_EUCLIDEAN_CACHE = {}


def euclidean(n, half_width=2.0):
    key = (n, half_width)
    chart = _EUCLIDEAN_CACHE.get(key)
    if chart is None:
        chart = ChartManifold(
            dim=n,
            domain=Box(tuple((-_INF, _INF) for _ in range(n))),
            metric=None,
            name=f"R{n}",
            sample_box=cube(half_width, n),
        )
        _EUCLIDEAN_CACHE[key] = chart
    return chart


def _sphere2_polar(name="sphere2_polar", south=False):
    # Colatitude-longitude chart of the unit sphere; the south chart uses
    # colatitude measured from the opposite pole.
    def metric(pt):
        s = sin(pt[0])
        return [[1.0, 0.0], [0.0, s * s]]

    return ChartManifold(
        dim=2,
        domain=Box(((0.15, 2.99), (-2.99, 2.99))),
        metric=metric,
        name=name + ("_south" if south else ""),
    )


def _conformal_round_chart(dim, name, sample_half_width):
    # Stereographic chart of the unit sphere: 4 / (1 + |x|^2)^2 times flat.
    def metric(pt):
        t = pt[0] * pt[0]
        for k in range(1, dim):
            t = t + pt[k] * pt[k]
        c = 4.0 / ((1.0 + t) * (1.0 + t))
        return [[c if i == j else 0.0 for j in range(dim)] for i in range(dim)]

    return ChartManifold(
        dim=dim,
        domain=Box(tuple((-_INF, _INF) for _ in range(dim))),
        metric=metric,
        name=name,
        sample_box=cube(sample_half_width, dim),
    )


def _sphere3_chart():
    chart = _conformal_round_chart(3, "sphere3_stereo", 0.35)
    # Restrict to a box clear of the chart's bad circle for the fibration map.
    return ChartManifold(
        dim=3,
        domain=cube(0.45, 3),
        metric=chart.metric,
        name=chart.name,
        sample_box=cube(0.35, 3),
    )


def _poincare_disk():
    def metric(pt):
        t = pt[0] * pt[0] + pt[1] * pt[1]
        c = 4.0 / ((1.0 - t) * (1.0 - t))
        return [[c, 0.0], [0.0, c]]

    return ChartManifold(2, cube(0.55, 2), metric, "poincare_disk")


def _circle():
    return ChartManifold(1, Box(((-2.9, 2.9),)), None, "circle")


SPHERE2_POLAR = _sphere2_polar()
SPHERE2_POLAR_SOUTH = _sphere2_polar(south=True)
SPHERE2_STEREO = _conformal_round_chart(2, "sphere2_stereo", 1.5)
SPHERE3_STEREO = _sphere3_chart()
POINCARE_DISK = _poincare_disk()
CIRCLE = _circle()
SCALAR_LINE = euclidean(1)


def dilation_family(lam, n=2):
    n = int(n)
    comps = tuple((lambda pt, _i=i: lam * pt[_i]) for i in range(n))
    return SmoothMap(euclidean(n), euclidean(n), comps, f"dilation({lam})")


def _scaled_projection(c):
    return SmoothMap(
        euclidean(3),
        euclidean(2),
        (lambda pt: c * pt[0], lambda pt: c * pt[1]),
        f"scaled_projection({c})",
    )


def _rotation(angle, c=1.0):
    ca, sa = c * math.cos(angle), c * math.sin(angle)
    return SmoothMap(
        euclidean(2),
        euclidean(2),
        (lambda pt: ca * pt[0] - sa * pt[1], lambda pt: sa * pt[0] + ca * pt[1]),
        f"rotation({angle})" if c == 1.0 else f"scaled_rotation({c},{angle})",
    )


def _identity_map(n):
    comps = tuple((lambda pt, _i=i: pt[_i]) for i in range(n))
    return SmoothMap(euclidean(n), euclidean(n), comps, f"identity({n})")


def _hopf():
    # The fibration S^3 -> S^2 written through the stereographic charts of
    # both round spheres; constant dilation 2 between unit spheres.
    def X(pt):
        p, q, r = pt[0], pt[1], pt[2]
        s = p * p + q * q + r * r
        D = 2.0 * s * s + 2.0 - 4.0 * (p * p + q * q) + 4.0 * r * r
        return (8.0 * p * r + 4.0 * q * (s - 1.0)) / D

    def Y(pt):
        p, q, r = pt[0], pt[1], pt[2]
        s = p * p + q * q + r * r
        D = 2.0 * s * s + 2.0 - 4.0 * (p * p + q * q) + 4.0 * r * r
        return (8.0 * q * r - 4.0 * p * (s - 1.0)) / D

    return SmoothMap(SPHERE3_STEREO, SPHERE2_STEREO, (X, Y), "hopf")


def _stereographic():
    # Chart-level stereographic projection of the unit sphere to the plane.
    def X(pt):
        return (cos(0.5 * pt[0]) / sin(0.5 * pt[0])) * cos(pt[1])

    def Y(pt):
        return (cos(0.5 * pt[0]) / sin(0.5 * pt[0])) * sin(pt[1])

    return SmoothMap(SPHERE2_POLAR, euclidean(2), (X, Y), "stereographic")


def _polar_to_stereo():
    st = _stereographic()
    return SmoothMap(SPHERE2_POLAR, SPHERE2_STEREO, st.components, "polar_to_stereo")


def _stereo_to_polar():
    from .autodiff import atan2, sqrt

    def theta(pt):
        rho = sqrt(pt[0] * pt[0] + pt[1] * pt[1])
        return 2.0 * atan2(1.0, rho)

    def phi(pt):
        return atan2(pt[1], pt[0])

    return SmoothMap(SPHERE2_STEREO, SPHERE2_POLAR, (theta, phi), "stereo_to_polar")


def _polar_north_to_south():
    return SmoothMap(
        SPHERE2_POLAR,
        SPHERE2_POLAR_SOUTH,
        (lambda pt: math.pi - pt[0], lambda pt: pt[1]),
        "polar_north_to_south",
    )


def _equator():
    return SmoothMap(
        CIRCLE,
        SPHERE2_POLAR,
        (lambda pt: 0.5 * math.pi, lambda pt: pt[0]),
        "equator",
    )


def _poly_nonexample():
    return SmoothMap(
        euclidean(2),
        euclidean(2),
        (lambda pt: pt[0], lambda pt: pt[1] ** 3),
        "poly_nonexample",
    )


def _complex_square():
    return SmoothMap(
        euclidean(2),
        euclidean(2),
        (
            lambda pt: pt[0] * pt[0] - pt[1] * pt[1],
            lambda pt: 2.0 * pt[0] * pt[1],
        ),
        "complex_square",
    )


def _linear_form(c, n=2):
    return SmoothMap(euclidean(int(n)), SCALAR_LINE, (lambda pt: c * pt[0],), f"linear_form({c})")


def _coordinate_field(k, n=2):
    k = int(k)
    n = int(n)
    if not 1 <= k <= n:
        raise ConfigError(f"coordinate index {k} out of range for dimension {n}")
    return SmoothMap(euclidean(n), SCALAR_LINE, (lambda pt: pt[k - 1],), f"coordinate({k})")


def radial_exponent(p, n):
    """The radial power that is p-symphonic on R^n minus the origin."""
    return (2.0 * p - n) / (2.0 * p - 1.0)


def _radial_power(p, n=3):
    n = int(n)
    a = radial_exponent(p, n)
    source = ChartManifold(
        dim=n,
        domain=Box(tuple((0.3, 1.5) for _ in range(n))),
        metric=None,
        name=f"R{n}_offorigin",
    )

    def comp(pt):
        s = pt[0] * pt[0]
        for k in range(1, n):
            s = s + pt[k] * pt[k]
        return s ** (a / 2.0)

    return SmoothMap(source, SCALAR_LINE, (comp,), f"radial_power(p={p},n={n})")


def _quadratic_x1():
    return SmoothMap(euclidean(2), SCALAR_LINE, (lambda pt: pt[0] * pt[0],), "quadratic_x1")


def _f_quadpair():
    return SmoothMap(
        euclidean(2),
        euclidean(2),
        (lambda pt: pt[0] * pt[0], lambda pt: pt[0] * pt[1]),
        "f_quadpair",
    )


def _f_trig():
    return SmoothMap(
        euclidean(2),
        euclidean(2),
        (lambda pt: sin(pt[0]), lambda pt: cos(pt[1])),
        "f_trig",
    )


def _f_mixed():
    from .autodiff import exp

    return SmoothMap(
        euclidean(2),
        euclidean(2),
        (lambda pt: exp(0.3 * pt[0]), lambda pt: pt[1] ** 3 + pt[0]),
        "f_mixed",
    )


def _f_embed3():
    return SmoothMap(
        euclidean(2),
        euclidean(3, half_width=6.0),
        (
            lambda pt: pt[0] + pt[1],
            lambda pt: pt[0] * pt[1],
            lambda pt: pt[0] * pt[0] - pt[1] * pt[1],
        ),
        "f_embed3",
    )


def _f_cube():
    # z -> z^3 componentwise: conformal wherever the derivative is nonzero.
    return SmoothMap(
        euclidean(2),
        euclidean(2),
        (
            lambda pt: pt[0] ** 3 - 3.0 * pt[0] * pt[1] ** 2,
            lambda pt: 3.0 * pt[0] ** 2 * pt[1] - pt[1] ** 3,
        ),
        "f_cube",
    )


def _entry(id_, kind, obj, tags=None, note=""):
    return ZooEntry(id_, kind, obj, tags or {}, note)


_FAMILIES: Dict[str, Tuple[Callable, str]] = {
    "dilation": (lambda args: dilation_family(*(args or [2.0])), "map"),
    "scaled_projection": (lambda args: _scaled_projection(*(args or [1.0])), "map"),
    "rotation": (lambda args: _rotation(*(args or [0.7])), "map"),
    "scaled_rotation": (
        lambda args: _rotation(
            args[1] if args and len(args) > 1 else 0.7,
            args[0] if args else 1.3,
        ),
        "map",
    ),
    "identity": (lambda args: _identity_map(int(args[0]) if args else 2), "map"),
    "linear_form": (lambda args: _linear_form(*(args or [1.0])), "field"),
    "coordinate": (lambda args: _coordinate_field(*(args or [1.0])), "field"),
    "radial_power": (lambda args: _radial_power(*(args or [2.0])), "field"),
}

_FIXED: Dict[str, Tuple[Callable, str]] = {
    "euclidean1": (lambda: euclidean(1), "manifold"),
    "euclidean2": (lambda: euclidean(2), "manifold"),
    "euclidean3": (lambda: euclidean(3), "manifold"),
    "euclidean4": (lambda: euclidean(4), "manifold"),
    "sphere2_polar": (lambda: SPHERE2_POLAR, "manifold"),
    "sphere2_polar_south": (lambda: SPHERE2_POLAR_SOUTH, "manifold"),
    "sphere2_stereo": (lambda: SPHERE2_STEREO, "manifold"),
    "sphere3_stereo": (lambda: SPHERE3_STEREO, "manifold"),
    "poincare_disk": (lambda: POINCARE_DISK, "manifold"),
    "circle": (lambda: CIRCLE, "manifold"),
    "hopf": (_hopf, "map"),
    "stereographic": (_stereographic, "map"),
    "polar_to_stereo": (_polar_to_stereo, "map"),
    "stereo_to_polar": (_stereo_to_polar, "map"),
    "polar_north_to_south": (_polar_north_to_south, "map"),
    "equator": (_equator, "map"),
    "poly_nonexample": (_poly_nonexample, "map"),
    "complex_square": (_complex_square, "map"),
    "f_quadpair": (_f_quadpair, "map"),
    "f_trig": (_f_trig, "map"),
    "f_mixed": (_f_mixed, "map"),
    "f_embed3": (_f_embed3, "map"),
    "f_cube": (_f_cube, "map"),
    "quadratic_x1": (_quadratic_x1, "field"),
}


def catalog():
    """All built-in entries (families instantiated at default parameters)."""
    entries = []
    for id_, (build, kind) in _FIXED.items():
        entries.append(_entry(id_, kind, build(), _TAGS.get(id_, {}), _NOTES.get(id_, "")))
    for name, (build, kind) in _FAMILIES.items():
        obj = build(None)
        id_ = f"{name}:default"
        entries.append(_entry(id_, kind, obj, _TAGS.get(name, {}), _NOTES.get(name, "")))
    return entries


def resolve(spec):
    """Build the zoo object addressed by ``spec`` ("name" or "name:arg:...")."""
    parts = str(spec).split(":")
    name, args = parts[0], parts[1:]
    if name in _FIXED:
        if args:
            raise ConfigError(f"zoo entry {name!r} takes no parameters")
        return _FIXED[name][0]()
    if name in _FAMILIES:
        try:
            values = [float(a) for a in args]
        except ValueError:
            raise ConfigError(f"bad parameter in zoo spec {spec!r}") from None
        return _FAMILIES[name][0](values or None)
    raise ConfigError(f"unknown zoo object {name!r}")


_TAGS = {
    "dilation": {
        "totally_geodesic": True,
        "horizontally_conformal": "lambda (the family parameter)",
        "conformal": "lambda",
        "p_symphonic": "all p",
    },
    "scaled_projection": {
        "totally_geodesic": True,
        "horizontally_conformal": "the scale factor",
        "p_symphonic": "all p",
    },
    "rotation": {
        "isometry": True,
        "totally_geodesic": True,
        "horizontally_conformal": 1.0,
        "p_symphonic": "all p",
    },
    "scaled_rotation": {
        "conformal": "the scale factor",
        "totally_geodesic": True,
        "horizontally_conformal": "the scale factor",
    },
    "identity": {"isometry": True, "totally_geodesic": True, "horizontally_conformal": 1.0},
    "hopf": {"horizontally_conformal": 2.0, "not_totally_geodesic": True},
    "stereographic": {
        "conformal": "pointwise dilation",
        "horizontally_conformal": "pointwise dilation",
        "not_totally_geodesic": True,
    },
    "complex_square": {
        "conformal": "pointwise dilation",
        "horizontally_conformal": "pointwise dilation",
        "not_totally_geodesic": True,
    },
    "equator": {"totally_geodesic": True, "isometric_immersion": True},
    "poly_nonexample": {
        "not_horizontally_conformal": True,
        "not_symphonic_morphism": True,
    },
    "radial_power": {"p_symphonic": "the family parameter p"},
    "linear_form": {"p_symphonic": "all p"},
    "coordinate": {"p_symphonic": "all p"},
    "quadratic_x1": {"not_p_symphonic": 2.0, "convex": True},
}

_NOTES = {
    "hopf": "fibration of the round 3-sphere over the round 2-sphere in "
    "stereographic charts; dilation 2 checked numerically",
    "stereographic": "conformal chart projection; dilation varies with colatitude",
    "radial_power": "exponent (2p-n)/(2p-1) makes the field p-symphonic away "
    "from the origin (radial oracle)",
    "equator": "great-circle embedding at colatitude pi/2",
    "poly_nonexample": "second component x2^3 breaks conformality and the "
    "morphism property",
}
