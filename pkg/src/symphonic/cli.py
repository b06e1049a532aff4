"""Command-line front end.

Exit statuses: 0 all verdicts pass, 1 numerical failure or evaluation
error, 2 usage/config error.
"""

from __future__ import annotations

import json
import sys
import time

import click

from . import config as cfgmod
from . import zoo
from .analysis import (
    horizontal_conformality,
    is_p_symphonic,
    is_totally_geodesic,
)
from .errors import ExprError, SymphonicError
from .expr import parse as parse_expr
from .identities import IDENTITY_NAMES, IdentityCase, exponent_sweep, run_identity
from .reports import _plain
from .sampling import manifold_samples


def _mark(ok):
    return "pass" if ok else "FAIL"


def _emit_json(payload, path, seed):
    report = {
        "schema_version": cfgmod.SCHEMA_VERSION,
        "generated_at": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
        "seed": seed,
        "tasks": _plain(payload),
        "overall_pass": bool(all(t.get("verdict", True) for t in payload)),
    }
    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    if path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _load_cfg(path):
    if path is None:
        return None
    return cfgmod.load_config(path)


@click.group()
def main():
    """Numerical tensor calculus for stress tensors of maps between charts."""


@main.command("zoo")
def zoo_cmd():
    """List the built-in catalog."""
    for entry in zoo.catalog():
        tags = ", ".join(sorted(entry.tags)) or "-"
        click.echo(f"{entry.id:28s} {entry.kind:9s} [{tags}]")


@main.command("parse")
@click.argument("expression")
@click.option("--arity", type=int, default=2, show_default=True, help="number of variables x1..xn")
def parse_cmd(expression, arity):
    """Syntax-check an expression; prints the canonical form."""
    try:
        e = parse_expr(expression, arity)
    except ExprError as err:
        click.echo(f"parse error: {err}", err=True)
        sys.exit(1)
    click.echo(e.pretty())


@main.command("check-map")
@click.option("--zoo", "zoo_spec", help="zoo map spec, e.g. dilation:2")
@click.option("--map", "map_name", help="map name from --config")
@click.option("--config", "config_path", type=click.Path(exists=True))
@click.option("--p", type=float, default=2.0, show_default=True)
@click.option("--samples", type=int, default=50, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--tol", type=float, default=1e-6, show_default=True)
@click.option("--json", "json_path", help="write a JSON report here ('-' for stdout)")
def check_map(zoo_spec, map_name, config_path, p, samples, seed, tol, json_path):
    """Run the predicate battery on one map."""
    try:
        cfg = _load_cfg(config_path)
        ref = zoo_spec if zoo_spec else map_name
        if ref is None:
            raise click.UsageError("give --zoo SPEC or --config FILE with --map NAME")
        map_ = cfgmod.resolve_map(cfg, ref, "check-map")
        pts = manifold_samples(map_.source, samples, seed)
        rows = []
        sym = is_p_symphonic(map_, p, pts, tol)
        rows.append((f"p-symphonic (p={p})", sym.verdict, sym.max_residual, sym.to_dict()))
        if map_.source.dim >= map_.target.dim:
            hc = horizontal_conformality(map_, pts, tol)
            lam = hc.to_dict()["lambda_sq_mean"]
            rows.append(
                (
                    f"horizontally conformal (lambda^2~{lam:.6g}, "
                    f"{'constant' if hc.lambda_constant else 'varying'})",
                    hc.verdict,
                    hc.max_residual,
                    hc.to_dict(),
                )
            )
        tg = is_totally_geodesic(map_, pts, tol)
        rows.append(("totally geodesic", tg.verdict, tg.max_residual, tg.to_dict()))
    except SymphonicError as e:
        click.echo(f"error: {e}", err=True)
        sys.exit(2)
    click.echo(f"map: {map_.name}   samples: {len(pts)}   tol: {tol:g}")
    for label, ok, res, _ in rows:
        click.echo(f"  {_mark(ok):4s}  {label}  (max residual {res:.3e})")
    if json_path:
        payload = [
            {"name": label, "verdict": bool(ok), "detail": detail}
            for label, ok, _res, detail in rows
        ]
        _emit_json(payload, json_path, seed)
    sys.exit(0 if all(ok for _, ok, _r, _d in rows) else 1)


@main.command("verify")
@click.option("--identity", "identity", required=True, type=click.Choice(IDENTITY_NAMES))
@click.option("--u", "u_ref", required=True, help="zoo spec or config map name")
@click.option("--f", "f_ref", required=True, help="zoo spec or config map name")
@click.option("--config", "config_path", type=click.Path(exists=True))
@click.option("--p", type=float, default=2.0, show_default=True)
@click.option("--m", type=int, default=2, show_default=True)
@click.option("--samples", type=int, default=50, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--tol", type=float, default=1e-6, show_default=True)
@click.option("--json", "json_path", help="write a JSON report here ('-' for stdout)")
def verify_cmd(identity, u_ref, f_ref, config_path, p, m, samples, seed, tol, json_path):
    """Verify one composition identity at sampled points."""
    try:
        cfg = _load_cfg(config_path)
        u = cfgmod.resolve_map(cfg, u_ref, "verify")
        f = cfgmod.resolve_map(cfg, f_ref, "verify")
        case = IdentityCase(
            name=identity,
            u=u,
            f=f,
            p=p,
            m=m,
            samples=manifold_samples(u.source, samples, seed),
            tol=tol,
        )
        rep = run_identity(case)
    except SymphonicError as e:
        click.echo(f"error: {e}", err=True)
        sys.exit(2)
    click.echo(
        f"{_mark(rep.verdict):4s}  {rep.name}  u={u.name}  f={f.name}  "
        f"max residual {rep.max_residual:.3e} (tol {tol:g})"
    )
    for key, val in sorted(rep.annotations.items()):
        click.echo(f"      {key}: {val}")
    if json_path:
        _emit_json([rep.to_dict()], json_path, seed)
    sys.exit(0 if rep.verdict else 1)


@main.command("sweep")
@click.option("--identity", required=True, type=click.Choice(IDENTITY_NAMES))
@click.option("--lambdas", required=True, help="comma-separated dilation values")
@click.option("--f", "f_ref", default="f_quadpair", show_default=True)
@click.option("--family", type=click.Choice(["dilation", "scaled_projection"]), default="dilation", show_default=True)
@click.option("--config", "config_path", type=click.Path(exists=True))
@click.option("--p", type=float, default=2.0, show_default=True)
@click.option("--m", type=int, default=2, show_default=True)
@click.option("--samples", type=int, default=25, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--expected", type=float, default=None, help="assert the fitted exponent")
@click.option("--exp-tol", type=float, default=1e-5, show_default=True)
@click.option("--json", "json_path", help="write a JSON report here ('-' for stdout)")
def sweep_cmd(identity, lambdas, f_ref, family, config_path, p, m, samples, seed, expected, exp_tol, json_path):
    """Fit the dilation exponent of an identity over a lambda sweep."""
    try:
        lam_list = [float(v) for v in lambdas.split(",") if v.strip()]
        cfg = _load_cfg(config_path)
        f = cfgmod.resolve_map(cfg, f_ref, "sweep")
        if family == "dilation":
            fam = lambda lam: zoo.dilation_family(lam, f.source.dim)  # noqa: E731
        else:
            fam = lambda lam: zoo.resolve(f"scaled_projection:{lam}")  # noqa: E731
        fitted, per_lambda = exponent_sweep(
            identity, fam, f, lam_list, p=p, m=m, seed=seed, n_samples=samples
        )
    except (SymphonicError, ValueError) as e:
        click.echo(f"error: {e}", err=True)
        sys.exit(2)
    ok = True
    line = f"{identity}: fitted exponent {fitted:.6f}"
    if expected is not None:
        ok = abs(fitted - expected) < exp_tol
        line += f"  (expected {expected:g} +- {exp_tol:g}: {_mark(ok)})"
    click.echo(line)
    if json_path:
        payload = [
            {
                "name": f"sweep:{identity}",
                "fitted_exponent": fitted,
                "per_lambda": per_lambda,
                "verdict": bool(ok),
            }
        ]
        _emit_json(payload, json_path, seed)
    sys.exit(0 if ok else 1)


@main.command("run")
@click.option("--config", "config_path", required=True, type=click.Path())
@click.option("--json", "json_path", help="override the report path from the config")
def run_cmd(config_path, json_path):
    """Execute every task in a config file and write the report."""
    try:
        cfg = cfgmod.load_config(config_path)
    except SymphonicError as e:
        click.echo(f"config error: {e}", err=True)
        sys.exit(2)
    status, report = cfgmod.run_config(cfg)
    out = json_path or cfg.output_path
    if out:
        cfgmod.write_report(report, out)
    for entry in report["tasks"]:
        if entry["status"] == "error":
            click.echo(f"task {entry['index']} {entry['name']}: ERROR {entry['error']}")
        else:
            click.echo(f"task {entry['index']} {entry['name']}: ok")
    click.echo(f"overall: {_mark(report['overall_pass'])}")
    sys.exit(status)


if __name__ == "__main__":
    main()
