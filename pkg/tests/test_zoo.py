"""Re-verification of every certified zoo tag; this is the zoo's whole
test surface: no tag survives without a passing predicate run."""

import numpy as np
import pytest

from symphonic import zoo
from symphonic.analysis import (
    horizontal_conformality,
    is_p_symphonic,
    is_totally_geodesic,
)
from symphonic.maps import SmoothMap, map_jet
from symphonic.sampling import manifold_samples

TOL = 1e-7


def _samples(obj, n=8, seed=14):
    return manifold_samples(obj.source, n, seed)


def _map_entries():
    return [e for e in zoo.catalog() if isinstance(e.obj, SmoothMap) and e.tags]


@pytest.mark.parametrize("entry", _map_entries(), ids=lambda e: e.id)
def test_certified_tags(entry):
    obj = entry.obj
    pts = _samples(obj)
    tags = entry.tags
    if tags.get("totally_geodesic"):
        assert is_totally_geodesic(obj, pts, TOL).verdict, entry.id
    if tags.get("not_totally_geodesic"):
        assert not is_totally_geodesic(obj, pts, TOL).verdict, entry.id
    if "horizontally_conformal" in tags:
        rep = horizontal_conformality(obj, pts, TOL)
        assert rep.verdict, entry.id
        value = tags["horizontally_conformal"]
        if isinstance(value, (int, float)):
            assert np.allclose(rep.lambda_sq_values, float(value) ** 2, atol=1e-8)
    if tags.get("not_horizontally_conformal"):
        assert not horizontal_conformality(obj, pts, TOL).verdict, entry.id
    if tags.get("isometry"):
        for x in pts:
            jet = map_jet(obj, x)
            assert np.max(np.abs(jet.pullback - np.eye(obj.source.dim))) < TOL
    if tags.get("isometric_immersion"):
        for x in pts:
            jet = map_jet(obj, x)
            assert np.max(np.abs(jet.pullback - np.eye(obj.source.dim))) < TOL
    if "p_symphonic" in tags:
        value = tags["p_symphonic"]
        ps = (1.5, 2.0, 3.0) if isinstance(value, str) and "all" in value else (2.0,)
        for p in ps:
            assert is_p_symphonic(obj, p, pts, TOL).verdict, (entry.id, p)
    if "not_p_symphonic" in tags:
        p = float(tags["not_p_symphonic"])
        assert not is_p_symphonic(obj, p, pts, TOL).verdict, entry.id
    if tags.get("not_symphonic_morphism"):
        from symphonic.analysis import morphism_probe_test

        assert not morphism_probe_test(obj, 2.0, pts, tol=1e-6).verdict, entry.id


def test_radial_power_certified_for_its_parameter():
    for p in (2.0, 3.0):
        f = zoo.resolve(f"radial_power:{p}")
        rep = is_p_symphonic(f, p, _samples(f, 10), tol=TOL)
        assert rep.verdict, p


def test_hopf_dilation_two():
    rep = horizontal_conformality(zoo.resolve("hopf"), _samples(zoo.resolve("hopf"), 12), TOL)
    assert rep.lambda_constant
    assert np.allclose(rep.lambda_sq_values, 4.0, atol=1e-9)


def test_dilation_family_parameterized():
    for lam in (1.0, 1.5, 3.0):
        u = zoo.dilation_family(lam)
        rep = horizontal_conformality(u, _samples(u, 4), TOL)
        assert np.allclose(rep.lambda_sq_values, lam**2, atol=1e-12)


def test_catalog_minimum_contents():
    ids = {e.id for e in zoo.catalog()}
    required_fixed = {
        "euclidean2",
        "euclidean3",
        "euclidean4",
        "sphere2_polar",
        "sphere2_polar_south",
        "sphere2_stereo",
        "sphere3_stereo",
        "poincare_disk",
        "hopf",
        "stereographic",
        "equator",
        "poly_nonexample",
        "quadratic_x1",
    }
    assert required_fixed <= ids
    for family in ("dilation", "scaled_projection", "rotation", "linear_form", "coordinate", "radial_power"):
        assert f"{family}:default" in ids


def test_resolve_errors():
    from symphonic.errors import ConfigError

    with pytest.raises(ConfigError):
        zoo.resolve("does_not_exist")
    with pytest.raises(ConfigError):
        zoo.resolve("hopf:3")  # fixed entries take no parameters
    with pytest.raises(ConfigError):
        zoo.resolve("dilation:abc")


def test_resolve_parameter_syntax():
    u = zoo.resolve("dilation:2.5:3")
    assert u.source.dim == 3
    r = zoo.resolve("scaled_rotation:1.3")
    assert "1.3" in r.name
