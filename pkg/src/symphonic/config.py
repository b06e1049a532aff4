"""Run configuration: TOML loading, object building and task execution.

A config names manifolds/maps/fields (expression strings over x1..xn, or
zoo references like ``"zoo:dilation:2"``) and lists tasks of three kinds:
``predicate``, ``identity`` and ``sweep``.  Reports are a single
schema-versioned JSON document; byte-stable for a fixed seed apart from
the ``generated_at`` field.
"""

from __future__ import annotations

import json
import sys
import time
from dataclasses import dataclass, field
from typing import Dict, List, Optional

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from . import zoo
from .analysis import (
    horizontal_conformality,
    is_conformal_function,
    is_p_symphonic,
    is_totally_geodesic,
)
from .errors import ConfigError, SymphonicError
from .expr import parse as parse_expr
from .geometry import Box, ChartManifold
from .identities import IDENTITY_NAMES, IdentityCase, exponent_sweep, run_identity
from .maps import SmoothMap
from .reports import _plain
from .sampling import manifold_samples

SCHEMA_VERSION = 1

PREDICATES = ("p_symphonic", "horizontally_conformal", "totally_geodesic", "conformal_function")


@dataclass
class RunConfig:
    raw: dict
    seed: int = 0
    sample_count: int = 50
    margin: float = 0.1
    manifolds: Dict[str, ChartManifold] = field(default_factory=dict)
    maps: Dict[str, SmoothMap] = field(default_factory=dict)
    tasks: List[dict] = field(default_factory=list)
    output_path: Optional[str] = None
    source_path: Optional[str] = None


def _expr_matrix(table, name, dim):
    if "metric" in table and "metric_diag" in table:
        raise ConfigError(f"manifold {name!r}: give metric or metric_diag, not both")
    if "metric" in table:
        entries = table["metric"]
        if len(entries) != dim * dim:
            raise ConfigError(
                f"manifold {name!r}: metric needs {dim * dim} entries (row-major)"
            )
        exprs = [parse_expr(src, dim) for src in entries]

        def metric(pt):
            vals = [e(pt) for e in exprs]
            return [vals[i * dim : (i + 1) * dim] for i in range(dim)]

        return metric
    if "metric_diag" in table:
        entries = table["metric_diag"]
        if len(entries) != dim:
            raise ConfigError(f"manifold {name!r}: metric_diag needs {dim} entries")
        exprs = [parse_expr(src, dim) for src in entries]

        def metric(pt):
            vals = [e(pt) for e in exprs]
            return [
                [vals[i] if i == j else 0.0 for j in range(dim)] for i in range(dim)
            ]

        return metric
    return None


def _build_manifold(name, table):
    try:
        dim = int(table["dim"])
        bounds = tuple((float(lo), float(hi)) for lo, hi in table["domain"])
    except (KeyError, TypeError, ValueError) as e:
        raise ConfigError(f"manifold {name!r}: bad or missing dim/domain ({e})") from None
    sample_box = None
    if "sample_box" in table:
        sample_box = Box(tuple((float(lo), float(hi)) for lo, hi in table["sample_box"]))
    try:
        metric = _expr_matrix(table, name, dim)
    except SymphonicError:
        raise
    except Exception as e:
        raise ConfigError(f"manifold {name!r}: bad metric expression ({e})") from None
    return ChartManifold(dim, Box(bounds), metric, name, sample_box)


def _resolve_manifold(cfg, ref, where):
    if isinstance(ref, str) and ref.startswith("zoo:"):
        obj = zoo.resolve(ref[4:])
        if not isinstance(obj, ChartManifold):
            raise ConfigError(f"{where}: {ref!r} is not a manifold")
        return obj
    if ref in cfg.manifolds:
        return cfg.manifolds[ref]
    if isinstance(ref, str):
        try:
            obj = zoo.resolve(ref)
        except ConfigError:
            raise ConfigError(f"{where}: unknown manifold {ref!r}") from None
        if isinstance(obj, ChartManifold):
            return obj
    raise ConfigError(f"{where}: unknown manifold {ref!r}")


def _build_map(cfg, name, table, scalar=False):
    src = _resolve_manifold(cfg, table.get("source"), f"map {name!r}")
    if scalar:
        tgt = zoo.SCALAR_LINE
        sources = [table["expression"]] if "expression" in table else None
    else:
        tgt = _resolve_manifold(cfg, table.get("target"), f"map {name!r}")
        sources = table.get("components")
    if not sources:
        raise ConfigError(f"map {name!r}: missing components")
    if len(sources) != tgt.dim:
        raise ConfigError(
            f"map {name!r}: {len(sources)} component(s) for target dim {tgt.dim}"
        )
    try:
        comps = tuple(parse_expr(s, src.dim) for s in sources)
    except SymphonicError as e:
        raise ConfigError(f"map {name!r}: {e}") from None
    return SmoothMap(src, tgt, comps, name)


def load_config(path):
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except OSError as e:
        raise ConfigError(f"cannot read config {path!r}: {e}") from None
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"config {path!r} is not valid TOML: {e}") from None
    cfg = RunConfig(raw=raw, source_path=str(path))
    cfg.seed = int(raw.get("seed", 0))
    sampling = raw.get("sampling", {})
    cfg.sample_count = int(sampling.get("count", 50))
    cfg.margin = float(sampling.get("margin", 0.1))
    if cfg.sample_count <= 0:
        raise ConfigError("sampling.count must be positive")
    for name, table in raw.get("manifolds", {}).items():
        cfg.manifolds[name] = _build_manifold(name, table)
    for name, table in raw.get("maps", {}).items():
        cfg.maps[name] = _build_map(cfg, name, table)
    for name, table in raw.get("fields", {}).items():
        cfg.maps[name] = _build_map(cfg, name, table, scalar=True)
    cfg.tasks = list(raw.get("tasks", []))
    out = raw.get("output", {})
    cfg.output_path = out.get("path")
    for idx, task in enumerate(cfg.tasks):
        _validate_task(cfg, idx, task)
    return cfg


def resolve_map(cfg, ref, where="task"):
    """A map/field reference: config name or zoo spec (with/without prefix)."""
    if cfg is not None and ref in cfg.maps:
        return cfg.maps[ref]
    spec = ref[4:] if isinstance(ref, str) and ref.startswith("zoo:") else ref
    try:
        obj = zoo.resolve(spec)
    except ConfigError:
        raise ConfigError(f"{where}: unknown object {ref!r}") from None
    if not isinstance(obj, SmoothMap):
        raise ConfigError(f"{where}: {ref!r} is not a map")
    return obj


def _validate_task(cfg, idx, task):
    where = f"tasks[{idx}]"
    kind = task.get("kind")
    if kind not in ("predicate", "identity", "sweep"):
        raise ConfigError(f"{where}: unknown kind {kind!r}")
    p = float(task.get("p", 2.0))
    if p < 1.0:
        raise ConfigError(f"{where}: p must be >= 1, got {p}")
    m = int(task.get("m", 2))
    if m < 2:
        raise ConfigError(f"{where}: m must be >= 2, got {m}")
    n = int(task.get("samples", cfg.sample_count))
    if n <= 0:
        raise ConfigError(f"{where}: samples must be positive")
    if kind == "predicate":
        name = task.get("name", "all")
        if name not in PREDICATES + ("all",):
            raise ConfigError(f"{where}: unknown predicate {name!r}")
        resolve_map(cfg, task.get("map"), where)
    elif kind == "identity":
        name = task.get("name")
        if name not in IDENTITY_NAMES:
            raise ConfigError(f"{where}: unknown identity {name!r}")
        u = resolve_map(cfg, task.get("u"), where)
        f = resolve_map(cfg, task.get("f"), where)
        if f.source.dim != u.target.dim:
            raise ConfigError(f"{where}: f and u do not compose")
    else:
        name = task.get("name")
        if name is None:
            raise ConfigError(f"{where}: sweep needs an identity name")
        lambdas = task.get("lambdas", [])
        if len(set(map(float, lambdas))) < 2:
            raise ConfigError(f"{where}: sweep needs at least two distinct lambdas")
        resolve_map(cfg, task.get("f"), where)
        family = task.get("family", "dilation")
        if family not in ("dilation", "scaled_projection"):
            raise ConfigError(f"{where}: unknown sweep family {family!r}")


def _task_samples(cfg, task, manifold):
    n = int(task.get("samples", cfg.sample_count))
    seed = int(task.get("seed", cfg.seed))
    return manifold_samples(manifold, n, seed, cfg.margin)


def _run_predicate(cfg, task):
    map_ = resolve_map(cfg, task["map"])
    p = float(task.get("p", 2.0))
    tol = float(task.get("tol", 1e-6))
    pts = _task_samples(cfg, task, map_.source)
    names = PREDICATES if task.get("name", "all") == "all" else (task["name"],)
    results = {}
    ok = True
    for name in names:
        if name == "p_symphonic":
            rep = is_p_symphonic(map_, p, pts, tol)
            results[name] = rep.to_dict()
            ok &= rep.verdict
        elif name == "horizontally_conformal":
            if map_.source.dim < map_.target.dim:
                results[name] = {"skipped": "source dim < target dim"}
                continue
            rep = horizontal_conformality(map_, pts, tol)
            results[name] = rep.to_dict()
            ok &= rep.verdict
        elif name == "totally_geodesic":
            rep = is_totally_geodesic(map_, pts, tol)
            results[name] = rep.to_dict()
            ok &= rep.verdict
        elif name == "conformal_function":
            if map_.target.dim != 1:
                results[name] = {"skipped": "not a scalar field"}
                continue
            rep = is_conformal_function(map_, pts, tol)
            results[name] = rep.to_dict()
            ok &= rep.verdict
    return ok, {"map": map_.name, "predicates": results}


def _run_identity_task(cfg, task):
    u = resolve_map(cfg, task["u"])
    f = resolve_map(cfg, task["f"])
    case = IdentityCase(
        name=task["name"],
        u=u,
        f=f,
        p=float(task.get("p", 2.0)),
        m=int(task.get("m", 2)),
        samples=_task_samples(cfg, task, u.source),
        tol=float(task.get("tol", 1e-6)),
    )
    rep = run_identity(case)
    return rep.verdict, rep.to_dict()


def _run_sweep_task(cfg, task):
    f = resolve_map(cfg, task["f"])
    family_name = task.get("family", "dilation")
    if family_name == "dilation":
        dim = int(task.get("dim", f.source.dim))
        family = lambda lam: zoo.dilation_family(lam, dim)  # noqa: E731
    else:
        family = lambda lam: zoo.resolve(f"scaled_projection:{lam}")  # noqa: E731
    lambdas = [float(v) for v in task["lambdas"]]
    fitted, per_lambda = exponent_sweep(
        task["name"],
        family,
        f,
        lambdas,
        p=float(task.get("p", 2.0)),
        m=int(task.get("m", 2)),
        seed=int(task.get("seed", cfg.seed)),
        n_samples=int(task.get("samples", 25)),
    )
    result = {
        "identity": task["name"],
        "fitted_exponent": fitted,
        "per_lambda": per_lambda,
    }
    ok = True
    if "expected_exponent" in task:
        expected = float(task["expected_exponent"])
        etol = float(task.get("exponent_tol", 1e-5))
        ok = abs(fitted - expected) < etol
        result["expected_exponent"] = expected
        result["exponent_tol"] = etol
        result["verdict"] = ok
    return ok, result


_RUNNERS = {
    "predicate": _run_predicate,
    "identity": _run_identity_task,
    "sweep": _run_sweep_task,
}


def run_config(cfg):
    """Execute every task; returns (exit_status, report dict)."""
    entries = []
    all_ok = True
    had_error = False
    for idx, task in enumerate(cfg.tasks):
        entry = {
            "index": idx,
            "kind": task.get("kind"),
            "name": task.get("name", "all"),
            "params": _plain({k: v for k, v in task.items() if k not in ("kind",)}),
        }
        try:
            ok, result = _RUNNERS[task["kind"]](cfg, task)
            entry["status"] = "ok"
            entry["result"] = _plain(result)
            all_ok &= ok
        except SymphonicError as e:
            entry["status"] = "error"
            entry["error"] = str(e)
            had_error = True
        entries.append(entry)
    report = {
        "schema_version": SCHEMA_VERSION,
        "generated_at": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
        "seed": cfg.seed,
        "config": _plain(cfg.raw),
        "tasks": entries,
        "overall_pass": bool(all_ok and not had_error),
    }
    status = 0 if report["overall_pass"] else 1
    return status, report


def write_report(report, path):
    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    if path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)
