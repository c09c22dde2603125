"""Command-line front end.

Subcommands map one-to-one onto the library probes:

    siphkit gallery list
    siphkit check si | decomposable        <function flags>
    siphkit decompose                      <function flags>
    siphkit verify euler | general-euler | levelset-grad <function flags>
    siphkit levelset radii | bounds | compact | negligible <function flags>
    siphkit cert positive-region           <function flags>
    siphkit solve paired-level --r <value>

Functions come either from the gallery (--gallery NAME, with --param key=value
for parametrized entries) or from an expression (--expr "x_1^2 + x_2^2" with
--n).  Every run emits a JSON (default) or CSV report with a fixed key order;
reruns with the same configuration and seed are byte-identical except for the
wall-time line.  Exit codes: 0 = pass, 1 = property violated (the report
carries witnesses), 2 = usage or configuration error.  The SIPH_SEED
environment variable, when set, overrides --seed.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time

import numpy as np

from .decomposition import (DecompositionError, build_decomposition,
                            uniqueness_check, verify_decomposition)
from .euler import (euler_residual, general_euler_residual,
                    levelset_gradient_constancy, paired_level_solver,
                    positive_gradient_region)
from .exprlang import ExprError, bind
from .field import GradientSpec
from .gallery import make_builtin, random_si, registry_json
from .levelsets import (check_ph_sandwich, check_si_sandwich, compactness_probe,
                        negligibility_probe, ray_level_radius, sphere_extrema)
from .rays import (SamplingPlan, check_decomposability,
                   check_scaling_invariance, default_directions)
from .reporting import Report, emit


class UsageError(Exception):
    """Configuration problem: reported on stderr, exit code 2."""


# -----------------------------------------------------------------------------
# argument plumbing


def _parse_vector(text: str) -> np.ndarray:
    try:
        return np.array([float(part) for part in text.split(",")], dtype=float)
    except ValueError as exc:
        raise UsageError(f"expected a comma-separated vector, got {text!r}") from exc


def _parse_param_value(text: str):
    if ";" in text:
        return [[float(v) for v in row.split(",")] for row in text.split(";")]
    if "," in text:
        return [float(v) for v in text.split(",")]
    try:
        return float(text)
    except ValueError:
        return text


def _parse_params(items) -> dict:
    params = {}
    for item in items or []:
        if "=" not in item:
            raise UsageError(f"--param expects key=value, got {item!r}")
        key, _, value = item.partition("=")
        try:
            params[key.strip()] = _parse_param_value(value)
        except ValueError as exc:
            raise UsageError(f"bad value for parameter {key!r}: {value!r}") from exc
    return params


def _resolve_seed(args) -> tuple:
    env = os.environ.get("SIPH_SEED")
    if env is not None and env != "":
        try:
            return int(env), "env"
        except ValueError as exc:
            raise UsageError(f"SIPH_SEED must be an integer, got {env!r}") from exc
    return int(args.seed), "flag"


def _resolve_field(args, seed: int) -> tuple:
    """Build the target function; returns (field, function-config-echo)."""
    has_gallery = getattr(args, "gallery", None) is not None
    has_expr = getattr(args, "expr", None) is not None
    if has_gallery == has_expr:
        raise UsageError("choose exactly one function source: --gallery NAME "
                         "or --expr SOURCE")
    n = int(args.n)
    if has_expr:
        x_star = _parse_vector(args.x_star) if args.x_star else None
        field = bind(args.expr, n, x_star=x_star)
        echo = {"expr": args.expr, "n": n,
                "x_star": None if x_star is None else x_star.tolist()}
        return field, echo
    if args.x_star:
        raise UsageError("--x-star applies to --expr functions only; gallery "
                         "entries are anchored at the origin")
    params = _parse_params(args.param)
    if args.gallery == "random_si":
        eps = float(params.pop("eps", 0.3))
        modes = int(params.pop("modes", 4))
        rseed = int(params.pop("seed", seed))
        if params:
            raise UsageError(f"unknown random_si parameters: {sorted(params)}")
        field = random_si(rseed, n, eps=eps, modes=modes)
        echo = {"gallery": "random_si", "n": n,
                "params": {"eps": eps, "modes": modes, "seed": rseed}}
        return field, echo
    try:
        field = make_builtin(args.gallery, n, **params)
    except KeyError as exc:
        raise UsageError(str(exc).strip("'\"")) from exc
    except (ValueError, TypeError) as exc:
        raise UsageError(str(exc)) from exc
    return field, {"gallery": args.gallery, "n": n, "params": params}


def _plan_from(args, seed: int) -> SamplingPlan:
    try:
        return SamplingPlan(seed=seed, n_samples=int(args.samples),
                            box_radius=float(args.box_radius),
                            rho_min=float(args.rho_min),
                            rho_max=float(args.rho_max),
                            t_max=float(args.t_max),
                            grid_points=int(args.grid_points))
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _plan_echo(plan: SamplingPlan) -> dict:
    return {"samples": plan.n_samples, "box_radius": plan.box_radius,
            "rho_min": plan.rho_min, "rho_max": plan.rho_max,
            "t_max": plan.t_max, "grid_points": plan.grid_points}


def _grad_spec(args) -> GradientSpec:
    return GradientSpec(h=float(args.h),
                        force_numerical=bool(getattr(args, "numerical", False)))


def _direction_angles(d: np.ndarray) -> list:
    """Hyperspherical angles of a unit direction (n-1 values; the last one is
    signed via atan2 of the final two coordinates)."""
    n = d.shape[0]
    if n == 1:
        return [0.0 if d[0] >= 0 else float(np.pi)]
    angles = []
    for i in range(n - 2):
        tail = np.linalg.norm(d[i + 1:])
        angles.append(float(np.arctan2(tail, d[i])))
    angles.append(float(np.arctan2(d[-1], d[-2])))
    return angles


# -----------------------------------------------------------------------------
# command handlers: each returns (verdict, metrics, witnesses, extra_config)


def _cmd_check_si(args, field, plan):
    rep = check_scaling_invariance(field, plan, atol=args.atol)
    metrics = {"trials": rep.trials, "violations": rep.violations}
    verdict = "pass" if rep.passed else "fail"
    return verdict, metrics, rep.witnesses, {"atol": args.atol}


def _cmd_check_decomposable(args, field, plan):
    rep = check_decomposability(field, plan=plan)
    metrics = {"domain_verdict": rep.verdict, "scale": rep.scale,
               "ray_kinds": rep.ray_kinds}
    witnesses = list(rep.witnesses)
    if rep.verdict == "decomposable":
        return "pass", metrics, witnesses, {}
    if rep.verdict == "inconclusive" and not witnesses:
        witnesses.append({"kind": "inconclusive"})
    return "fail", metrics, witnesses, {}


def _cmd_decompose(args, field, plan):
    config = {"alpha": args.alpha, "comp_tol": args.comp_tol,
              "ph_tol": args.ph_tol}
    refs = {key: (_parse_vector(getattr(args, key)) if getattr(args, key) else None)
            for key in ("x0", "x1", "xm1")}
    try:
        d = build_decomposition(field, alpha=args.alpha, plan=plan, **refs)
    except DecompositionError as exc:
        return ("fail", {}, [{"kind": "build_failed", "reason": str(exc)}],
                config)
    check = verify_decomposition(field, d, plan)
    metrics = {"decomposition": d.summary(),
               "max_composition_residual": check.max_composition_residual,
               "max_ph_residual": check.max_ph_residual,
               "n_samples": check.n_samples}
    witnesses = list(check.witnesses)
    ok = (np.isfinite(check.max_composition_residual)
          and check.max_composition_residual <= args.comp_tol
          and np.isfinite(check.max_ph_residual)
          and check.max_ph_residual <= args.ph_tol)
    if not ok:
        witnesses.append({"kind": "residual_exceeded",
                          "max_composition_residual": check.max_composition_residual,
                          "max_ph_residual": check.max_ph_residual,
                          "comp_tol": args.comp_tol, "ph_tol": args.ph_tol})
    alt = {key: getattr(args, f"{key}_alt") for key in ("x0", "x1", "xm1")}
    if any(v is not None for v in alt.values()):
        alt_refs = {key: (_parse_vector(val) if val else None)
                    for key, val in alt.items()}
        try:
            d2 = build_decomposition(field, alpha=args.alpha, plan=plan,
                                     x0=alt_refs["x0"], x1=alt_refs["x1"],
                                     xm1=alt_refs["xm1"])
        except DecompositionError as exc:
            witnesses.append({"kind": "build_failed", "reason": str(exc),
                              "which": "alternate"})
            return "fail", metrics, witnesses, config
        uq = uniqueness_check(field, d, d2, plan)
        metrics["uniqueness"] = uq.to_dict()
        if not uq.passed:
            witnesses.append({"kind": "uniqueness_violation",
                              "classes": uq.classes})
    verdict = "pass" if not witnesses else "fail"
    return verdict, metrics, witnesses, config


def _cmd_verify_euler(args, field, plan):
    alpha = args.alpha if args.alpha is not None else field.meta.ph_degree
    if alpha is None:
        raise UsageError("the field carries no homogeneity degree; pass --alpha")
    rep = euler_residual(field, alpha, plan, _grad_spec(args),
                         coord_floor=args.coord_floor)
    metrics = rep.to_dict()
    witnesses = []
    if not (np.isfinite(rep.max_residual) and rep.max_residual <= args.tol):
        witnesses.append({"kind": "euler_residual",
                          "max_residual": rep.max_residual, "tol": args.tol})
    verdict = "pass" if not witnesses else "fail"
    return verdict, metrics, witnesses, {"alpha": alpha, "tol": args.tol,
                                         "h": args.h,
                                         "coord_floor": args.coord_floor}


def _cmd_verify_general_euler(args, field, plan):
    config = {"alpha": args.alpha, "tol": args.tol, "h": args.h}
    try:
        d = build_decomposition(field, alpha=args.alpha, plan=plan)
    except DecompositionError as exc:
        return ("fail", {}, [{"kind": "build_failed", "reason": str(exc)}],
                config)
    rep = general_euler_residual(field, d, plan, _grad_spec(args))
    metrics = {**rep.to_dict(), "case": d.case}
    witnesses = []
    if not (np.isfinite(rep.max_residual) and rep.max_residual <= args.tol):
        witnesses.append({"kind": "general_euler_residual",
                          "max_residual": rep.max_residual, "tol": args.tol})
    verdict = "pass" if not witnesses else "fail"
    return verdict, metrics, witnesses, config


def _cmd_verify_levelset_grad(args, field, plan):
    rep = levelset_gradient_constancy(field, args.level, n_points=args.points,
                                      grad_spec=_grad_spec(args),
                                      seed=plan.seed, tol=args.tol)
    metrics = rep.to_dict()
    witnesses = []
    if not rep.passed:
        kind = "no_level_points" if rep.values.size == 0 else "spread_exceeded"
        witnesses.append({"kind": kind, "spread": rep.spread, "tol": args.tol})
    verdict = "pass" if not witnesses else "fail"
    return verdict, metrics, witnesses, {"level": args.level, "tol": args.tol,
                                         "points": args.points, "h": args.h}


def _cmd_levelset_radii(args, field, plan):
    if args.directions is not None:
        dirs = plan.sphere_points(field.n, int(args.directions))
    else:
        dirs = default_directions(field.n, seed=plan.seed)
    records = []
    witnesses = []
    for dvec in dirs:
        try:
            hit = ray_level_radius(field, dvec, args.level, grid=plan.t_grid())
        except ValueError:
            witnesses.append({"kind": "non_monotone_ray",
                              "direction": dvec.tolist()})
            continue
        records.append(hit.to_dict())
        if hit.status not in ("ok", "outside-range"):
            witnesses.append({"kind": f"{hit.status}_ray",
                              "direction": dvec.tolist()})
    metrics = {"level": args.level, "n_directions": int(len(dirs)),
               "radii": records}
    if args.sweep_csv:
        with open(args.sweep_csv, "w", encoding="utf-8", newline="") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            n_angles = max(field.n - 1, 1)
            writer.writerow([f"angle_{i + 1}" for i in range(n_angles)]
                            + ["radius"])
            for rec in records:
                d = np.asarray(rec["direction"])
                writer.writerow(_direction_angles(d) + [rec["radius"]])
    verdict = "pass" if not witnesses else "fail"
    return verdict, metrics, witnesses, {"level": args.level,
                                         "sweep_csv": args.sweep_csv}


def _cmd_levelset_bounds(args, field, plan):
    alpha = args.alpha if args.alpha is not None else (field.meta.ph_degree or 1.0)
    config = {"alpha": alpha, "slack": args.slack, "rtol": args.rtol}
    metrics = {}
    witnesses = []
    try:
        d = build_decomposition(field, alpha=alpha, plan=plan)
    except DecompositionError as exc:
        return ("fail", metrics, [{"kind": "build_failed", "reason": str(exc)}],
                config)
    si_rep = check_si_sandwich(field, d, plan, slack=args.slack)
    metrics["si_sandwich"] = {"verdict": si_rep.verdict, "m": si_rep.m,
                              "M": si_rep.M, "notes": si_rep.notes}
    witnesses.extend(si_rep.witnesses)
    if si_rep.verdict == "precondition-failed":
        witnesses.append({"kind": "precondition_failed",
                          "check": "si_sandwich",
                          "reason": si_rep.notes.get("reason", "")})
    if field.meta.ph_degree is not None:
        ext = sphere_extrema(field, seed=plan.seed)
        ph_rep = check_ph_sandwich(field, field.meta.ph_degree, ext.m, ext.M,
                                   plan, rtol=args.rtol)
        metrics["ph_sandwich"] = {"verdict": ph_rep.verdict, "m": ph_rep.m,
                                  "M": ph_rep.M}
        witnesses.extend(ph_rep.witnesses)
    verdict = "pass" if not witnesses else "fail"
    return verdict, metrics, witnesses, config


def _cmd_levelset_compact(args, field, plan):
    rep = compactness_probe(field, args.level, plan=plan)
    metrics = {"domain_verdict": rep.verdict, "level": rep.level,
               "max_radius": rep.max_radius, "ray_kinds": rep.ray_kinds,
               "n_directions": rep.n_directions}
    verdict = "pass" if rep.bounded else "fail"
    return verdict, metrics, rep.witnesses, {"level": args.level}


def _cmd_levelset_negligible(args, field, plan):
    eps_list = [float(v) for v in args.eps.split(",")]
    try:
        rep = negligibility_probe(field, args.level, eps_list,
                                  n_samples=plan.n_samples,
                                  box_radius=plan.box_radius, seed=plan.seed,
                                  rate_bound=args.rate_bound)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    metrics = rep.to_dict()
    witnesses = []
    if not rep.passed:
        witnesses.append({"kind": "excess_fraction", "eps": rep.eps_list,
                          "fractions": rep.fractions,
                          "rate_bound": rep.rate_bound})
    verdict = "pass" if not witnesses else "fail"
    return verdict, metrics, witnesses, {"level": args.level, "eps": eps_list,
                                         "rate_bound": args.rate_bound}


def _cmd_cert_positive_region(args, field, plan):
    cert = positive_gradient_region(field, plan, _grad_spec(args))
    metrics = cert.to_dict()
    witnesses = []
    if not cert.ok:
        witnesses.append({"kind": "certificate_failed", "scan": cert.scan})
    verdict = "pass" if not witnesses else "fail"
    return verdict, metrics, witnesses, {"h": args.h}


def _cmd_solve_paired_level(args):
    try:
        res = paired_level_solver(args.r, tol=args.tol)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    return "pass", res.to_dict(), [], {"r": args.r, "tol": args.tol}


def _cmd_gallery_list(args):
    data = json.loads(registry_json(int(args.n)))
    return "pass", {"entries": data["entries"], "n": data["n"]}, [], {}


# -----------------------------------------------------------------------------
# parser


def _add_field_flags(parser):
    group = parser.add_argument_group("function selection")
    group.add_argument("--gallery", help="gallery entry name (see `gallery list`)")
    group.add_argument("--param", action="append", metavar="KEY=VALUE",
                       help="gallery entry parameter; repeatable "
                            "(lists comma-separated, matrices semicolon-rowed)")
    group.add_argument("--expr", help="expression source, e.g. 'x_1^2 + x_2^2'")
    group.add_argument("--n", type=int, default=2, help="dimension (default 2)")
    group.add_argument("--x-star", dest="x_star", default=None,
                       help="reference point for --expr functions "
                            "(comma-separated; default origin)")


def _add_run_flags(parser, samples_default=1000):
    group = parser.add_argument_group("run settings")
    group.add_argument("--seed", type=int, default=0,
                       help="RNG seed (SIPH_SEED overrides)")
    group.add_argument("--N", dest="samples", type=int, default=samples_default,
                       help=f"sample count (default {samples_default})")
    group.add_argument("--box-radius", type=float, default=2.0)
    group.add_argument("--rho-min", type=float, default=0.1)
    group.add_argument("--rho-max", type=float, default=10.0)
    group.add_argument("--t-max", type=float, default=10.0,
                       help="ray grid scale T")
    group.add_argument("--grid-points", type=int, default=24)
    group.add_argument("--threads", type=int, default=0,
                       help="worker hint; results are thread-count independent")
    group.add_argument("--out", default=None, help="report path (default stdout)")
    group.add_argument("--format", choices=("json", "csv"), default="json")


def _add_grad_flags(parser):
    parser.add_argument("--h", type=float, default=1e-5,
                        help="central-difference step scale")
    parser.add_argument("--numerical", action="store_true",
                        help="ignore analytic gradients")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="siphkit",
        description="Construct, decompose, and empirically certify "
                    "scaling-invariant and positively homogeneous functions.")
    sub = parser.add_subparsers(dest="group", required=True)

    gal = sub.add_parser("gallery", help="built-in function catalog")
    gal_sub = gal.add_subparsers(dest="action", required=True)
    gal_list = gal_sub.add_parser("list", help="list entries with tags")
    gal_list.add_argument("--n", type=int, default=2)
    gal_list.add_argument("--seed", type=int, default=0)
    gal_list.add_argument("--threads", type=int, default=0)
    gal_list.add_argument("--out", default=None)
    gal_list.add_argument("--format", choices=("json", "csv"), default="json")

    chk = sub.add_parser("check", help="order-based property checks")
    chk_sub = chk.add_subparsers(dest="action", required=True)
    chk_si = chk_sub.add_parser("si", help="scaling invariance on sampled triples")
    _add_field_flags(chk_si)
    _add_run_flags(chk_si)
    chk_si.add_argument("--atol", type=float, default=1e-12,
                        help="order-comparison tie band")
    chk_dec = chk_sub.add_parser("decomposable",
                                 help="monotone rays + shared ray images")
    _add_field_flags(chk_dec)
    _add_run_flags(chk_dec)

    dec = sub.add_parser("decompose",
                         help="build f = phi o p and verify residuals")
    _add_field_flags(dec)
    _add_run_flags(dec)
    dec.add_argument("--alpha", type=float, default=1.0)
    dec.add_argument("--x0", default=None, help="one-sided reference point")
    dec.add_argument("--x1", default=None, help="positive reference point")
    dec.add_argument("--xm1", default=None, help="negative reference point")
    dec.add_argument("--x0-alt", dest="x0_alt", default=None,
                     help="second reference: triggers the uniqueness check")
    dec.add_argument("--x1-alt", dest="x1_alt", default=None)
    dec.add_argument("--xm1-alt", dest="xm1_alt", default=None)
    dec.add_argument("--comp-tol", type=float, default=1e-7)
    dec.add_argument("--ph-tol", type=float, default=1e-7)

    ver = sub.add_parser("verify", help="differential identities")
    ver_sub = ver.add_subparsers(dest="action", required=True)
    ver_euler = ver_sub.add_parser("euler", help="alpha p = grad p . x")
    _add_field_flags(ver_euler)
    _add_run_flags(ver_euler)
    _add_grad_flags(ver_euler)
    ver_euler.add_argument("--alpha", type=float, default=None,
                           help="degree (default: the field's tag)")
    ver_euler.add_argument("--tol", type=float, default=1e-6)
    ver_euler.add_argument("--coord-floor", type=float, default=0.1)
    ver_gen = ver_sub.add_parser("general-euler",
                                 help="grad f . x = alpha phi'(p) p")
    _add_field_flags(ver_gen)
    _add_run_flags(ver_gen)
    _add_grad_flags(ver_gen)
    ver_gen.add_argument("--alpha", type=float, default=1.0)
    ver_gen.add_argument("--tol", type=float, default=1e-4)
    ver_lsg = ver_sub.add_parser("levelset-grad",
                                 help="constancy of grad f . z on a level set")
    _add_field_flags(ver_lsg)
    _add_run_flags(ver_lsg)
    _add_grad_flags(ver_lsg)
    ver_lsg.add_argument("--level", type=float, required=True)
    ver_lsg.add_argument("--points", type=int, default=64)
    ver_lsg.add_argument("--tol", type=float, default=1e-6)

    lvl = sub.add_parser("levelset", help="level-set geometry probes")
    lvl_sub = lvl.add_subparsers(dest="action", required=True)
    lvl_radii = lvl_sub.add_parser("radii", help="per-direction level radii")
    _add_field_flags(lvl_radii)
    _add_run_flags(lvl_radii)
    lvl_radii.add_argument("--level", type=float, required=True)
    lvl_radii.add_argument("--directions", type=int, default=None,
                           help="sample this many sphere directions instead "
                                "of the default axis set")
    lvl_radii.add_argument("--sweep-csv", default=None,
                           help="also write (angles, radius) rows here")
    lvl_bounds = lvl_sub.add_parser("bounds", help="ball sandwich bounds")
    _add_field_flags(lvl_bounds)
    _add_run_flags(lvl_bounds)
    lvl_bounds.add_argument("--alpha", type=float, default=None)
    lvl_bounds.add_argument("--slack", type=float, default=1e-4)
    lvl_bounds.add_argument("--rtol", type=float, default=1e-9)
    lvl_compact = lvl_sub.add_parser("compact",
                                     help="sublevel compactness evidence")
    _add_field_flags(lvl_compact)
    _add_run_flags(lvl_compact)
    lvl_compact.add_argument("--level", type=float, required=True)
    lvl_neg = lvl_sub.add_parser("negligible",
                                 help="Monte Carlo level-shell fractions")
    _add_field_flags(lvl_neg)
    _add_run_flags(lvl_neg, samples_default=100000)
    lvl_neg.add_argument("--level", type=float, required=True)
    lvl_neg.add_argument("--eps", default="0.1,0.05,0.025",
                         help="strictly decreasing shell half-widths")
    lvl_neg.add_argument("--rate-bound", type=float, default=1.0)

    cert = sub.add_parser("cert", help="certificates")
    cert_sub = cert.add_subparsers(dest="action", required=True)
    cert_pos = cert_sub.add_parser("positive-region",
                                   help="positive gradient product near a "
                                        "level set")
    _add_field_flags(cert_pos)
    _add_run_flags(cert_pos)
    _add_grad_flags(cert_pos)

    slv = sub.add_parser("solve", help="scalar solvers")
    slv_sub = slv.add_subparsers(dest="action", required=True)
    slv_pair = slv_sub.add_parser("paired-level",
                                  help="s > 1 with r^2 e^{-r^2} = s^2 e^{-s^2}")
    slv_pair.add_argument("--r", type=float, required=True)
    slv_pair.add_argument("--tol", type=float, default=1e-10)
    slv_pair.add_argument("--seed", type=int, default=0)
    slv_pair.add_argument("--threads", type=int, default=0)
    slv_pair.add_argument("--out", default=None)
    slv_pair.add_argument("--format", choices=("json", "csv"), default="json")

    return parser


_FIELD_HANDLERS = {
    ("check", "si"): _cmd_check_si,
    ("check", "decomposable"): _cmd_check_decomposable,
    ("decompose", None): _cmd_decompose,
    ("verify", "euler"): _cmd_verify_euler,
    ("verify", "general-euler"): _cmd_verify_general_euler,
    ("verify", "levelset-grad"): _cmd_verify_levelset_grad,
    ("levelset", "radii"): _cmd_levelset_radii,
    ("levelset", "bounds"): _cmd_levelset_bounds,
    ("levelset", "compact"): _cmd_levelset_compact,
    ("levelset", "negligible"): _cmd_levelset_negligible,
    ("cert", "positive-region"): _cmd_cert_positive_region,
}


def _dispatch(args) -> Report:
    action = getattr(args, "action", None)
    command = args.group if action is None else f"{args.group} {action}"
    seed, seed_source = _resolve_seed(args) if hasattr(args, "seed") else (0, "flag")

    if (args.group, action) == ("gallery", "list"):
        verdict, metrics, witnesses, extra = _cmd_gallery_list(args)
        config = {"n": int(args.n), "seed": seed, "threads": args.threads,
                  "format": args.format, **extra}
        return Report(command=command, verdict=verdict, config=config,
                      metrics=metrics, witnesses=witnesses)
    if (args.group, action) == ("solve", "paired-level"):
        verdict, metrics, witnesses, extra = _cmd_solve_paired_level(args)
        config = {"seed": seed, "threads": args.threads,
                  "format": args.format, **extra}
        return Report(command=command, verdict=verdict, config=config,
                      metrics=metrics, witnesses=witnesses)

    handler = _FIELD_HANDLERS[(args.group, action)]
    field, fn_echo = _resolve_field(args, seed)
    plan = _plan_from(args, seed)
    verdict, metrics, witnesses, extra = handler(args, field, plan)
    config = {"function": fn_echo, "seed": seed, "seed_source": seed_source,
              **_plan_echo(plan), "threads": args.threads,
              "format": args.format, **extra}
    return Report(command=command, verdict=verdict, config=config,
                  metrics=metrics, witnesses=witnesses)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        code = exc.code
        return code if isinstance(code, int) else 2
    start = time.perf_counter()
    try:
        report = _dispatch(args)
    except UsageError as exc:
        print(f"siphkit: error: {exc}", file=sys.stderr)
        return 2
    except ExprError as exc:
        print(f"siphkit: expression error at offset {exc.offset}: {exc}",
              file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"siphkit: error: {exc}", file=sys.stderr)
        return 2
    report.wall_time_ms = round((time.perf_counter() - start) * 1000.0, 3)
    try:
        emit(report, args.out, args.format)
    except OSError as exc:
        print(f"siphkit: cannot write report: {exc}", file=sys.stderr)
        return 2
    return 0 if report.verdict == "pass" else 1


if __name__ == "__main__":
    sys.exit(main())
