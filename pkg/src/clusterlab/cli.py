"""Command line front end: solve, verify, probe, oracle and render.

Exit codes: 0 everything passed, 1 a hard predicate failed, 2 usage or
configuration error, 3 solver fault.
"""

from __future__ import annotations

import argparse
import contextlib
import json
import math
import os
import sys
import time
from pathlib import Path

import jsonschema
import numpy as np

from . import __version__
from .cluster_net import ClusterNet, load, save, validate
from .density import DensityField, make_density
from .errors import (
    ClusterLabError, DegenerateTriangle, DomainError, InvalidSpec, MissingCertificate, NoEligibleArc, ParseError,
    SchemaVersionError,
)
from .functionals import weighted_area, weighted_perimeter
from .optimizer import SolveConfig, solve
from .probes import (
    EpsBetaCertificate, GrowthCertificate, ModulusSamples, analytic_certificates, dini_test,
    eps_beta_probe, growth_probe,
)
from .render import render_svg
from .scenarios import SCENARIOS, Scenario, initial_net
from .steiner import fermat_point, l_theta
from .verifier import (
    PredicateLog, ball_length_check, circle_crossing_check, island_check, isoperimetric_check,
    junction_report, local_optimality_probe, mean_spacing, regularity_report,
)

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_FAULT = 0, 1, 2, 3

CHECKS = ("valence", "junction_angles", "ball_length", "circle_crossing", "no_island",
          "isoperimetric", "local_optimality", "regularity")

CONFIG_KEYS = {"scenario", "areas", "density", "seed", "out", "max_iters", "grad_tol", "spacing",
               "angle_tol", "path"}

_num = {"type": "number"}
_num_or_null = {"type": ["number", "null"]}
_log_schema = {
    "type": "object",
    "required": ["name", "seed", "pass", "samples", "failures", "notices"],
    "properties": {
        "name": {"type": "string"}, "seed": {"type": "integer"}, "pass": {"type": "boolean"},
        "samples": {"type": "integer", "minimum": 0}, "max_measured": _num_or_null,
        "failures": {"type": "array"}, "notices": {"type": "array", "items": {"type": "string"}},
    },
}

REPORT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "clusterlab run report",
    "type": "object",
    "required": ["kind", "version", "status", "config", "functionals", "solve", "junctions",
                 "regularity", "predicates", "certificates", "notices", "timings"],
    "properties": {
        "kind": {"enum": ["solve", "verify"]},
        "version": {"type": "string"},
        "status": {"enum": ["pass", "fail", "fault"]},
        "config": {
            "type": "object",
            "required": ["seed", "density", "checks"],
            "properties": {"seed": {"type": "integer"}, "density": {"type": "object"},
                           "checks": {"type": "array", "items": {"enum": list(CHECKS)}}},
        },
        "functionals": {
            "type": "object",
            "required": ["areas", "targets", "perimeter", "area_method"],
            "properties": {"areas": {"type": "array", "items": _num}, "targets": {"type": "array", "items": _num},
                           "perimeter": _num, "area_method": {"type": "string"}},
        },
        "solve": {
            "type": ["object", "null"],
            "required": ["status", "iterations", "seed", "final_perimeter"],
            "properties": {"status": {"enum": ["converged", "max_iters", "topology_fault"]},
                           "iterations": {"type": "integer", "minimum": 0}},
        },
        "junctions": {"type": "object", "required": ["count", "all_valence_3", "max_deviation_deg", "junctions"]},
        "regularity": {"type": ["object", "null"]},
        "predicates": {"type": "object", "additionalProperties": _log_schema},
        "certificates": {
            "type": "object",
            "properties": {
                "growth": {"type": ["object", "null"], "required": ["eta", "c_vol", "r_eta"]},
                "eps_beta": {"type": ["object", "null"], "required": ["beta"]},
                "eps_beta_witness": {"type": ["object", "null"], "required": ["beta", "cper_curve"]},
            },
        },
        "notices": {"type": "array", "items": {"type": "string"}},
        "timings": {"type": "object"},
    },
}


class UsageError(Exception):
    """Bad flags or config; maps to exit code 2."""


# ---------------------------------------------------------------------------
# serialization


def plain(obj):
    """Convert numpy scalars and arrays (recursively) into JSON-ready Python objects."""
    if isinstance(obj, dict):
        return {str(k): plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return plain(obj.tolist())
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    return obj


def dumps(obj) -> str:
    return json.dumps(plain(obj), indent=2, sort_keys=True, allow_nan=False) + "\n"


def validate_report(report: dict) -> None:
    jsonschema.validate(plain(report), REPORT_SCHEMA)


# ---------------------------------------------------------------------------
# parsing helpers


def parse_number(text: str) -> float:
    t = text.strip().lower()
    if t in ("pi", "π"):
        return math.pi
    try:
        return float(t)
    except ValueError:
        raise UsageError(f"not a number: {text!r}") from None


def parse_areas(text: str | list) -> tuple[float, ...]:
    items = text if isinstance(text, list) else [s for s in str(text).split(",") if s.strip()]
    vals = tuple(parse_number(str(v)) for v in items)
    if not vals:
        raise UsageError("empty area list")
    return vals


def parse_point(text: str) -> tuple[float, float]:
    parts = text.split(",")
    if len(parts) != 2:
        raise UsageError(f"expected x,y but got {text!r}")
    return parse_number(parts[0]), parse_number(parts[1])


def parse_density(spec) -> dict:
    if spec is None:
        return {}
    if isinstance(spec, dict):
        return spec
    text = str(spec).strip()
    if not text.startswith("{"):
        return {"kind": text}
    try:
        out = json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"--density is not valid JSON: {exc.msg}") from None
    if not isinstance(out, dict):
        raise UsageError("--density must be a JSON object")
    return out


def load_config(path: str | None) -> dict:
    if not path:
        return {}
    try:
        obj = json.loads(Path(path).read_text())
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"config {path} is not valid JSON: {exc.msg} (line {exc.lineno})") from None
    if not isinstance(obj, dict):
        raise UsageError("config must be a JSON object")
    unknown = set(obj) - CONFIG_KEYS
    if unknown:
        raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
    return obj


def merged(args, config: dict, key: str, default=None):
    """Flag value if given on the command line, else config value, else default."""
    val = getattr(args, key, None)
    if val is not None:
        return val
    return config.get(key, default)


def read_net(path: str) -> ClusterNet:
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    return load(data)


# ---------------------------------------------------------------------------
# certificates and verification


def certificates_from_report(path: str) -> tuple[GrowthCertificate | None, EpsBetaCertificate | None]:
    """Certificates from a JSON file shaped like a report's ``certificates`` block (or a whole report)."""
    try:
        obj = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read certificates from {path}: {exc}") from None
    block = obj.get("certificates", obj) if isinstance(obj, dict) else {}
    growth = eps = None
    try:
        g = block.get("growth")
        if g:
            # reports write an unbounded radius as null
            r_eta = math.inf if g["r_eta"] is None else g["r_eta"]
            growth = GrowthCertificate(g["eta"], g["c_vol"], r_eta, g.get("fit_residual") or 0.0, g.get("source", "file"))
        e = block.get("eps_beta")
        if e:
            eps = EpsBetaCertificate(e["beta"], e.get("c_per"), source=e.get("source", "file"))
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"malformed certificate in {path}: {exc}") from None
    return growth, eps


def known_certificates(field: DensityField):
    try:
        return analytic_certificates(field)
    except MissingCertificate:
        return None, None


def _valence_log(jr, seed: int) -> PredicateLog:
    log = PredicateLog("valence", seed)
    for j in jr.junctions:
        log.add(f"junction {j.node_id}", j.valence, 3, j.valence == 3)
    return log


def _angle_log(jr, tol: float, seed: int) -> PredicateLog:
    log = PredicateLog("junction_angles", seed)
    for j in jr.junctions:
        if j.valence == 3:
            log.add(f"junction {j.node_id}", j.max_deviation_deg, tol, j.max_deviation_deg <= tol)
    return log


def verify_net(net: ClusterNet, field: DensityField, growth, eps, checks, seed: int = 0,
               angle_tol: float = 2.0, explicit: bool = False) -> dict:
    """Run the requested checks.  Missing certificates raise when ``explicit``,
    otherwise the check is skipped with a notice."""
    notices = []
    preds = {}
    jr = junction_report(net)
    reg = None
    for name in checks:
        if name == "valence":
            preds[name] = _valence_log(jr, seed)
        elif name == "junction_angles":
            preds[name] = _angle_log(jr, angle_tol, seed)
        elif name == "ball_length":
            preds[name] = ball_length_check(net, seed=seed)
        elif name == "circle_crossing":
            preds[name] = circle_crossing_check(net, seed=seed)
        elif name == "no_island":
            preds[name] = island_check(net, seed=seed)
        elif name == "isoperimetric":
            if growth is None:
                if explicit:
                    raise MissingCertificate("isoperimetric check needs a growth certificate (--certs)")
                notices.append("isoperimetric check skipped: no growth certificate")
                continue
            preds[name] = isoperimetric_check(net, field, growth, seed=seed)
        elif name == "local_optimality":
            preds[name] = local_optimality_probe(net, field, seed=seed)
        elif name == "regularity":
            if growth is None or eps is None:
                if explicit:
                    raise MissingCertificate("regularity report needs growth and eps-beta certificates (--certs)")
                notices.append("regularity report skipped: certificates missing")
                continue
            reg = regularity_report(net, field, (growth, eps))
    for log in preds.values():
        notices.extend(f"{log.name}: {n}" for n in log.notices)
    return {"junctions": jr, "regularity": reg, "predicates": preds, "notices": notices}


def _protected_ball(net: ClusterNet):
    js = net.junction_ids()
    node = net.node(js[0]) if js else net.nodes[0]
    return node.position, 4 * mean_spacing(net)


def _functionals(net: ClusterNet, field: DensityField) -> dict:
    fr = weighted_perimeter(net, field)
    out = fr.to_dict()
    out["targets"] = list(net.target_areas)
    out["area_errors"] = [a - t for a, t in zip(fr.areas, net.target_areas)]
    return out


def _status(preds: dict, fault: bool) -> str:
    if fault:
        return "fault"
    return "pass" if all(p.passed for p in preds.values()) else "fail"


def _assemble(kind, config, functionals, trace, verified, certs, notices, timings, fault=False) -> dict:
    preds = verified["predicates"] if verified else {}
    jr = verified["junctions"].to_dict() if verified else {"count": 0, "all_valence_3": True,
                                                            "max_deviation_deg": 0.0, "junctions": []}
    reg = verified["regularity"].to_dict() if verified and verified["regularity"] else None
    report = {
        "kind": kind,
        "version": __version__,
        "status": _status(preds, fault),
        "config": config,
        "functionals": functionals,
        "solve": trace,
        "junctions": jr,
        "regularity": reg,
        "predicates": {k: v.to_dict() for k, v in preds.items()},
        "certificates": {k: (v.to_dict() if v is not None else None) for k, v in certs.items()},
        "notices": notices,
        "timings": timings,
    }
    report = plain(report)
    validate_report(report)
    return report


# ---------------------------------------------------------------------------
# pipelines


def run_scenario(scenario: Scenario, cfg: SolveConfig, angle_tol: float = 2.0, spacing: float | None = None):
    """Solve, verify and probe one scenario.

    Returns ``(net_bytes, report, svg)``.  Wall-clock times are not part of the
    report so that identical runs produce identical bytes; ``timings`` counts work.
    """
    net0, field = initial_net(scenario, spacing=spacing)
    net, trace = solve(net0, field, cfg)
    fault = trace.status == "topology_fault"
    notices = []
    conv = PredicateLog("converged", cfg.seed)
    conv.add(f"solver status {trace.status}", float(trace.status == "converged"), 1.0, trace.status == "converged")

    growth, eps = known_certificates(field)
    witness = None
    verified = None
    if not fault:
        if growth is None:
            growth = growth_probe(field, net.window, seed=cfg.seed)
        center, r_beta = _protected_ball(net)
        try:
            witness = eps_beta_probe(net, field, center, r_beta, seed=cfg.seed)
        except (NoEligibleArc, ArithmeticError, ValueError) as exc:
            notices.append(f"eps-beta probe skipped: {exc}")
        if eps is None:
            eps = witness
        verified = verify_net(net, field, growth, eps, CHECKS, seed=cfg.seed, angle_tol=angle_tol)
        verified["predicates"] = {"converged": conv, **verified["predicates"]}
        notices = verified["notices"] + notices
    config = {
        "scenario": scenario.to_dict(), "solve": cfg.to_dict(), "seed": cfg.seed, "density": scenario.density,
        "checks": list(CHECKS), "angle_tol": angle_tol, "spacing": spacing,
    }
    timings = {"iterations": trace.iterations, "events": len(trace.events)}
    report = _assemble("solve", config, _functionals(net, field), plain(trace.summary()), verified,
                       {"growth": growth, "eps_beta": eps, "eps_beta_witness": witness}, notices, timings, fault)
    if fault:
        report["notices"].append(f"solver fault: {trace.message}")
    return save(net), report, render_svg(net)


def verify_cmd(net: ClusterNet, field: DensityField, certs=(None, None), checks=None, seed: int = 0,
               angle_tol: float = 2.0, density_spec: dict | None = None) -> dict:
    """Verification-only report for an existing net."""
    explicit = checks is not None
    checks = tuple(checks) if checks else CHECKS
    res = validate(net)
    if not res.ok:
        raise InvalidSpec("net fails validation: " + ", ".join(sorted(res.kinds)))
    growth, eps = certs
    if growth is None and eps is None:
        growth, eps = known_certificates(field)
    verified = verify_net(net, field, growth, eps, checks, seed=seed, angle_tol=angle_tol, explicit=explicit)
    config = {"seed": seed, "density": density_spec or {"kind": field.name}, "checks": list(checks),
              "angle_tol": angle_tol}
    return _assemble("verify", config, _functionals(net, field), None, verified,
                     {"growth": growth, "eps_beta": eps, "eps_beta_witness": None}, verified["notices"], {})


# ---------------------------------------------------------------------------
# argument parsing


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="clusterlab", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"clusterlab {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="minimize a scenario, verify it and write net/report/SVG")
    s.add_argument("--config", help="JSON config; flags win on conflict")
    s.add_argument("--scenario", choices=SCENARIOS)
    s.add_argument("--areas", "--area", dest="areas", help="comma separated target areas ('pi' allowed)")
    s.add_argument("--density", help="density JSON, e.g. '{\"kind\": \"grushin\", \"alpha\": 1}'")
    s.add_argument("--path", help="cluster file for --scenario custom")
    s.add_argument("--seed", type=int)
    s.add_argument("--out", help="output directory (default clusterlab_out)")
    s.add_argument("--max-iters", dest="max_iters", type=int)
    s.add_argument("--grad-tol", dest="grad_tol", type=float)
    s.add_argument("--spacing", type=float)
    s.add_argument("--angle-tol", dest="angle_tol", type=float, help="junction angle tolerance in degrees")

    v = sub.add_parser("verify", help="run verifier predicates on a cluster file")
    v.add_argument("net")
    v.add_argument("--density")
    v.add_argument("--certs", help="JSON with growth/eps_beta certificates (a run report works)")
    v.add_argument("--check", action="append", choices=CHECKS, help="repeatable; default is every check")
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--angle-tol", dest="angle_tol", type=float, default=2.0)

    pr = sub.add_parser("probe", help="hypothesis probes")
    psub = pr.add_subparsers(dest="probe", required=True)
    g = psub.add_parser("growth", help="fit the volume growth exponent of a density")
    g.add_argument("--density", required=True)
    g.add_argument("--window", default="-2,-2,2,2", help="x0,y0,x1,y1")
    g.add_argument("--centers", type=int, default=16)
    g.add_argument("--seed", type=int, default=0)
    e = psub.add_parser("epsbeta", help="perimeter price of small volume changes on a net")
    e.add_argument("net")
    e.add_argument("--density")
    e.add_argument("--center", help="protected ball center x,y (default: first junction)")
    e.add_argument("--r-beta", dest="r_beta", type=float, help="protected ball radius (default 4 spacings)")
    e.add_argument("--seed", type=int, default=0)
    d = psub.add_parser("dini", help="classify a modulus of continuity")
    d.add_argument("--modulus", required=True, help="power:A for t^A, or invlog for 1/log(1/t)")
    d.add_argument("--variant", choices=("dini", "half_dini"), default="dini")
    d.add_argument("--ratio", type=float, default=2.0)
    d.add_argument("--samples", type=int, default=64)

    o = sub.add_parser("oracle", help="Steiner oracles")
    osub = o.add_subparsers(dest="oracle", required=True)
    f = osub.add_parser("fermat", help="Fermat point of three terminals")
    f.add_argument("points", nargs=3, metavar="X,Y")
    lt = osub.add_parser("ltheta", help="tripod length ratio for an isoceles apex angle")
    lt.add_argument("theta", help="apex angle in radians")

    r = sub.add_parser("render", help="draw a cluster file as SVG")
    r.add_argument("net")
    r.add_argument("--out", help="SVG path (default stdout)")
    return p


def _modulus(text: str):
    kind, _, arg = text.partition(":")
    if kind == "power":
        a = parse_number(arg or "1")
        if a <= 0:
            raise UsageError("power modulus needs a positive exponent")
        return (lambda t: t ** a), 1.0
    if kind == "invlog":
        # 1/log(1/t) is only a modulus below t = 1
        return (lambda t: 1.0 / math.log(1.0 / t)), 0.5
    raise UsageError(f"unknown modulus {text!r}; use power:A or invlog")


def _field(spec_text, default: dict | None = None) -> tuple[DensityField, dict]:
    spec = parse_density(spec_text) or dict(default or {"kind": "constant", "c": 1.0})
    return make_density(spec), spec


def _cmd_solve(args, out) -> int:
    config = load_config(args.config)
    name = merged(args, config, "scenario")
    if name is None:
        raise UsageError("solve needs --scenario (or a config with 'scenario')")
    areas = merged(args, config, "areas")
    scenario = Scenario(
        name,
        areas=parse_areas(areas) if areas is not None else (),
        density=parse_density(merged(args, config, "density")),
        seed=int(merged(args, config, "seed", 0)),
        path=merged(args, config, "path"),
    )
    kw = {"seed": scenario.seed}
    for key in ("max_iters", "grad_tol"):
        val = merged(args, config, key)
        if val is not None:
            kw[key] = val
    spacing = merged(args, config, "spacing")
    if spacing is not None:
        kw["target_spacing"] = float(spacing)
    try:
        cfg = SolveConfig(**kw)
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc)) from None
    angle_tol = float(merged(args, config, "angle_tol", 2.0))
    out_dir = Path(merged(args, config, "out", "clusterlab_out"))
    t0 = time.perf_counter()
    net_bytes, report, svg = run_scenario(scenario, cfg, angle_tol=angle_tol, spacing=spacing)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "net.json").write_bytes(net_bytes)
    (out_dir / "report.json").write_text(dumps(report))
    (out_dir / "net.svg").write_text(svg)
    fr = report["functionals"]
    print(f"{scenario.name}: {report['solve']['status']} after {report['solve']['iterations']} iterations, "
          f"P = {fr['perimeter']:.10g}, status {report['status']} ({time.perf_counter() - t0:.1f} s)", file=out)
    for k, v in report["predicates"].items():
        print(f"  {k:17s} {'pass' if v['pass'] else 'FAIL'}", file=out)
    print(f"wrote {out_dir}/net.json, report.json, net.svg", file=out)
    return {"pass": EXIT_OK, "fail": EXIT_FAIL, "fault": EXIT_FAULT}[report["status"]]


def _cmd_verify(args, out) -> int:
    net = read_net(args.net)
    field, spec = _field(args.density)
    certs = certificates_from_report(args.certs) if args.certs else (None, None)
    report = verify_cmd(net, field, certs, args.check, seed=args.seed, angle_tol=args.angle_tol, density_spec=spec)
    out.write(dumps(report))
    return EXIT_OK if report["status"] == "pass" else EXIT_FAIL


def _cmd_probe(args, out) -> int:
    if args.probe == "growth":
        field, _ = _field(args.density)
        window = tuple(parse_number(v) for v in args.window.split(","))
        if len(window) != 4 or window[2] <= window[0] or window[3] <= window[1]:
            raise UsageError("--window must be x0,y0,x1,y1 with x1 > x0 and y1 > y0")
        cert = growth_probe(field, window, n_centers=args.centers, seed=args.seed)
        out.write(dumps(cert.to_dict() | {"slopes": list(cert.slopes)}))
    elif args.probe == "epsbeta":
        net = read_net(args.net)
        field, _ = _field(args.density)
        center, r_beta = _protected_ball(net)
        if args.center:
            center = np.array(parse_point(args.center))
        cert = eps_beta_probe(net, field, center, args.r_beta or r_beta, seed=args.seed)
        out.write(dumps(cert.to_dict()))
    else:
        phi, t0 = _modulus(args.modulus)
        if args.ratio <= 1:
            raise UsageError("--ratio must exceed 1")
        samples = ModulusSamples.from_function(phi, t0=t0, ratio=args.ratio, n=args.samples)
        out.write(dumps(dini_test(samples, args.variant).to_dict() | {"modulus": args.modulus}))
    return EXIT_OK


def _cmd_oracle(args, out) -> int:
    if args.oracle == "fermat":
        pts = [parse_point(p) for p in args.points]
        tri = fermat_point(*pts)
        out.write(dumps({"fermat_point": tri.fermat_point, "terminals": list(tri.terminals),
                         "total_euclidean_length": tri.total_euclidean_length}))
    else:
        theta = parse_number(args.theta)
        out.write(dumps({"theta": theta, "L": l_theta(theta)}))
    return EXIT_OK


def _cmd_render(args, out) -> int:
    svg = render_svg(read_net(args.net))
    if args.out:
        Path(args.out).write_text(svg)
    else:
        out.write(svg)
    return EXIT_OK


def _thread_limit():
    raw = os.environ.get("CLUSTERLAB_THREADS")
    if raw is None or raw == "":
        return contextlib.nullcontext()
    try:
        n = int(raw)
    except ValueError:
        raise UsageError(f"CLUSTERLAB_THREADS must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise UsageError(f"CLUSTERLAB_THREADS must be a positive integer, got {raw!r}")
    from threadpoolctl import threadpool_limits

    return threadpool_limits(limits=n)


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    handlers = {"solve": _cmd_solve, "verify": _cmd_verify, "probe": _cmd_probe,
                "oracle": _cmd_oracle, "render": _cmd_render}
    try:
        with _thread_limit():
            return handlers[args.command](args, out)
    except (UsageError, InvalidSpec, ParseError, SchemaVersionError, MissingCertificate, DomainError,
            DegenerateTriangle) as exc:
        print(f"clusterlab: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ClusterLabError as exc:
        print(f"clusterlab: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAULT
    except jsonschema.ValidationError as exc:
        print(f"clusterlab: report failed schema validation: {exc.message}", file=sys.stderr)
        return EXIT_FAULT


if __name__ == "__main__":
    sys.exit(main())
