"""Command line front end.

Every subcommand prints (or writes to ``--out``) a JSON report that embeds
the tolerances, budgets and seed used.  ``sweep`` writes a CSV table.
Exit codes: 0 success, 2 when an input violates a standing hypothesis,
1 for any other failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from datetime import datetime, timezone

import numpy as np

from . import fixed_points as fp
from . import geodesics as geo
from . import linearization as lin
from . import metrics as met
from .domains import NormBall, parse_domain
from .errors import HoloError, HypothesisViolation, ParseError
from .expr import parse_expression, parse_map, _Env


def _to_json(obj):
    if isinstance(obj, dict):
        return {str(k): _to_json(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_to_json(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _to_json(obj.tolist())
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if hasattr(obj, "to_dict"):
        return _to_json(obj.to_dict())
    if isinstance(obj, float) and not np.isfinite(obj):
        return str(obj)
    return obj if isinstance(obj, (str, int, float, bool, type(None))) else repr(obj)


def parse_point(text: str, dim: int | None = None) -> np.ndarray:
    """``"0.3, 0.4*i"`` -> complex vector; entries are constant expressions."""
    vals = [complex(parse_expression(t, 0).evaluate(_Env([]))) for t in text.split(",")]
    v = np.array(vals, dtype=complex)
    if dim is not None and len(v) != dim:
        raise ParseError(f"expected {dim} coordinates, got {len(v)}")
    return v


def _grid(text):
    start, stop, count = text.split(":")
    return np.linspace(float(start), float(stop), int(count))


# ------------------------------------------------------------------ commands


def cmd_distance(args, d):
    z, w = parse_point(args.from_, d.dim), parse_point(args.to, d.dim)
    est = met.distance_bracket(d, z, w, tol=args.tol, budget=args.budget, degree=args.degree, seed=args.seed)
    return est.to_dict()


def cmd_metric(args, d):
    z, v = parse_point(args.point, d.dim), parse_point(args.vector, d.dim)
    lo = met.caratheodory_inf_metric(d, z, v, budget=args.budget)
    hi = met.kobayashi_inf_metric(d, z, v, degree=args.degree, budget=args.budget, seed=args.seed)
    return {"lower": lo, "upper": hi, "gap": hi - lo}


def _start(args, d):
    if args.point:
        return parse_point(args.point, d.dim)
    z = np.zeros(d.dim, dtype=complex)
    return z if d.contains(z) else d.sample(1, seed=args.seed)[0]


def cmd_fixpoint(args, d, f):
    res = fp.earle_hamilton(f, d, _start(args, d), tol=args.tol, max_iter=args.budget, seed=args.seed)
    return res.to_dict()


def cmd_retract(args, d, f):
    a = parse_point(args.point, d.dim)
    if args.method == "iterate":
        anchor = parse_point(args.anchor, d.dim) if args.anchor else a
        R = fp.iterate_limit_retraction(f, d, anchor, budget=args.budget, tol=args.tol, seed=args.seed)
        out = {"stabilized": R.stabilized, "diagnostics": R.diagnostics}
        if R.stabilized:
            out["point"] = R(a)
        return out
    trace = []
    p = fp.retract_to_fix(f, d, a, tol=args.tol, trace=trace, extrapolate=args.extrapolate)
    return {"point": p, "residual": float(np.linalg.norm(f(p) - p)), "schedule": [[lam, q] for lam, q in trace]}


def cmd_scan(args, d, f):
    scan = fp.fix_scan(f, d, grid_count=args.count, seed=args.seed)
    comps = fp.fix_components(scan, f, d)
    return {
        "fixed_points": [{"point": p, "dim": r.dim, "eigenvalues": r.eigenvalues, "defective": r.defective} for p, r in scan],
        "components": [{"dim": c["dim"], "size": len(c["points"]), "points": c["points"]} for c in comps],
    }


def cmd_linearize(args, d, f):
    base = parse_point(args.point, f.arity) if args.point else np.zeros(f.arity, dtype=complex)
    if args.kind == "cartan":
        return lin.cartan_chart(f, base, seed=args.seed).to_dict()
    if args.kind == "average":
        return lin.iterate_average_chart(f, base, args.n, seed=args.seed, guard=d).to_dict()
    return lin.circled_linear_part(f, d, seed=args.seed).to_dict()


def cmd_geodesic(args, d):
    if args.vector:
        if not isinstance(d, NormBall):
            raise ParseError("--vector needs a norm ball domain")
        return geo.geodesic_ball_origin(d, parse_point(args.vector, d.dim)).to_dict()
    a, b = parse_point(args.from_, d.dim), parse_point(args.to, d.dim)
    return geo.geodesic_search(d, a, b, degree=args.degree, budget=args.budget, seed=args.seed).to_dict()


def cmd_extreme(args, d):
    if not isinstance(d, NormBall):
        raise ParseError("extreme needs a norm ball domain")
    return geo.complex_extreme_test(d, parse_point(args.point, d.dim), seed=args.seed).to_dict()


def cmd_sweep(args, d, f):
    """Rows of a one-parameter table; failures land in the error column."""
    rows, header = [], []
    grid = _grid(args.grid)
    for t in grid:
        row, err = {}, ""
        try:
            if args.kind == "lambda":
                a = parse_point(args.point, d.dim)
                p = fp.lambda_fixed_point(f, d, a, float(t))
                row = {"lambda": t, **{f"z{j}_re": p[j].real for j in range(d.dim)}, **{f"z{j}_im": p[j].imag for j in range(d.dim)}}
            elif args.kind == "radius":
                v = parse_point(args.vector, d.dim) if args.vector else np.eye(d.dim, dtype=complex)[0]
                w = t * v
                est = met.distance_bracket(d, np.zeros(d.dim), w, tol=args.tol, budget=args.budget, seed=args.seed)
                row = {"radius": t, "lower": est.lower, "upper": est.upper}
            else:
                a = parse_point(args.point, f.arity)
                ch = lin.iterate_average_chart(f, a, int(round(t)), seed=args.seed)
                row = {"n": int(round(t)), "defect": ch.conjugacy_defect}
        except HoloError as exc:
            err = f"{exc.name}: {exc}"
            row = {args.kind: t}
        row["error"] = err
        rows.append(row)
        header += [k for k in row if k not in header]
    header = [h for h in header if h != "error"] + ["error"]
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=header, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: (repr(float(v)) if isinstance(v, (float, np.floating)) else v) for k, v in row.items()})
    return buf.getvalue()


# ------------------------------------------------------------------ entry point


def build_parser():
    ap = argparse.ArgumentParser(prog="holokit", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, needs_map=False, domain_default=None):
        p.add_argument("--domain", default=domain_default, required=domain_default is None)
        p.add_argument("--map", required=needs_map)
        p.add_argument("--from", dest="from_")
        p.add_argument("--to")
        p.add_argument("--point")
        p.add_argument("--vector")
        p.add_argument("--tol", type=float, default=1e-8)
        p.add_argument("--budget", type=int, default=20000)
        p.add_argument("--degree", type=int, default=6)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out")
        p.add_argument("--no-timestamp", action="store_true")
        return p

    common(sub.add_parser("distance", help="bracket the invariant distance of two points"))
    common(sub.add_parser("metric", help="bracket the infinitesimal metric"))
    common(sub.add_parser("fixpoint", help="fixed point by contraction iteration"), needs_map=True)
    p = common(sub.add_parser("retract", help="retraction onto the fixed set"), needs_map=True)
    p.add_argument("--method", choices=["lambda", "iterate"], default="lambda")
    p.add_argument("--anchor")
    p.add_argument("--extrapolate", action="store_true")
    p = common(sub.add_parser("scan", help="locate fixed points from sampled starts"), needs_map=True)
    p.add_argument("--count", type=int, default=200)
    p = common(sub.add_parser("linearize", help="linearizing chart at a point"), needs_map=True, domain_default="")
    p.add_argument("--kind", choices=["cartan", "average", "circled"], default="cartan")
    p.add_argument("--n", type=int, default=32)
    common(sub.add_parser("geodesic", help="search or verify a complex geodesic"))
    common(sub.add_parser("extreme", help="complex extreme point test on a norm ball"))
    p = common(sub.add_parser("sweep", help="one-parameter CSV table"), domain_default="disc")
    p.add_argument("--kind", choices=["lambda", "radius", "n"], required=True)
    p.add_argument("--grid", required=True, help="start:stop:count")
    return ap


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    header = {
        "command": args.command,
        "domain": args.domain,
        "map": args.map,
        "tolerance": args.tol,
        "budget": args.budget,
        "degree": args.degree,
        "seed": args.seed,
    }
    if not args.no_timestamp:
        header["timestamp"] = datetime.now(timezone.utc).isoformat()
    try:
        d = parse_domain(args.domain) if args.domain else None
        f = None
        if args.map:
            if args.point:
                arity = len(parse_point(args.point))
            else:
                arity = d.dim if d is not None else 1
            f = parse_map(args.map, arity)
        handlers = {
            "distance": lambda: cmd_distance(args, d),
            "metric": lambda: cmd_metric(args, d),
            "fixpoint": lambda: cmd_fixpoint(args, d, f),
            "retract": lambda: cmd_retract(args, d, f),
            "scan": lambda: cmd_scan(args, d, f),
            "linearize": lambda: cmd_linearize(args, d, f),
            "geodesic": lambda: cmd_geodesic(args, d),
            "extreme": lambda: cmd_extreme(args, d),
            "sweep": lambda: cmd_sweep(args, d, f),
        }
        result = handlers[args.command]()
    except HypothesisViolation as exc:
        print(json.dumps({**header, "error": exc.name, "message": str(exc)}), file=sys.stderr)
        return 2
    except (HoloError, ValueError, np.linalg.LinAlgError) as exc:
        name = exc.name if isinstance(exc, HoloError) else type(exc).__name__
        print(json.dumps({**header, "error": name, "message": str(exc)}), file=sys.stderr)
        return 1
    if isinstance(result, str):
        text = result
    else:
        text = json.dumps(_to_json({**header, "result": result}), indent=2) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
