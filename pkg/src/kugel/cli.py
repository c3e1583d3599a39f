"""Command-line front end.

    kugel specfun-table --start 0 --stop 20 --step 0.05 --m 3
    kugel verify-ball --equation yukawa --mu 1 --radius 1
    kugel scan domain.json --equation helmholtz --lambda 1 --branch both
    kugel defect domain.json --equation yukawa --mu 1
    kugel recover domain.json --equation yukawa --mu 1 --out trace.json

Exit codes: 0 success, 1 verification or convergence failure, 2 invalid input.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import sys
import warnings
from typing import List, Optional

import numpy as np

from .errors import KugelError
from .geometry import Ball, StarDomain, equal_volume_radius, size_condition, star_volume
from .identities import (
    DEFAULT_PROBES,
    ProbeSet,
    mv_check,
    proof_defect,
    residual_scan,
    scalar_defect,
)
from .kernels import EquationSpec, PointSource, plane_solution
from .quadrature import QuadratureSpec
from .recover import RecoveryConfig, recover_shape
from .specfun import T_MAX, coeff, radial_profile

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


class UsageError(Exception):
    pass


def fmt_real(x: float) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    x = float(x)
    if not math.isfinite(x):
        raise UsageError(f"cannot serialize non-finite value {x!r}")
    if x == int(x) and abs(x) < 1e16:
        return str(int(x))
    return "%.17g" % x


def dumps(obj, indent: int = 0) -> str:
    """Deterministic JSON: insertion-ordered keys, reals with 17 significant digits."""
    pad = "  " * (indent + 1)
    end = "  " * indent
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return fmt_real(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(isinstance(v, (int, float, np.number)) and not isinstance(v, bool) for v in obj):
            return "[" + ", ".join(dumps(v) for v in obj) + "]"
        return "[\n" + ",\n".join(pad + dumps(v, indent + 1) for v in obj) + "\n" + end + "]"
    raise UsageError(f"cannot serialize {type(obj).__name__}")


def _write(text: str, out: Optional[str]) -> None:
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _positive(kind):
    def parse(text):
        try:
            value = kind(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"invalid value {text!r}")
        if not value > 0:
            raise argparse.ArgumentTypeError(f"value must be positive, got {text!r}")
        return value
    return parse


def _add_shared(p: argparse.ArgumentParser, with_branch: bool = True) -> None:
    p.add_argument("--equation", choices=["laplace", "yukawa", "helmholtz"], default="yukawa")
    p.add_argument("--mu", type=_positive(float), default=1.0)
    p.add_argument("--lambda", dest="lam", type=_positive(float), default=1.0)
    if with_branch:
        p.add_argument("--branch", choices=["plus", "minus", "both"], default="both")
    p.add_argument("--probes", type=_positive(int), default=None,
                   help="probe count (default 50, or 20 for recover)")
    p.add_argument("--probe-factor", type=float, default=2.0)
    p.add_argument("--n-radial", type=int, default=48)
    p.add_argument("--n-polar", type=int, default=48)
    p.add_argument("--n-azimuth", type=int, default=None)
    p.add_argument("--threshold", type=_positive(float), default=1e-7)
    p.add_argument("--out", default=None)
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.add_argument("--config", default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kugel", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("specfun-table", help="tabulate mean-value coefficients")
    p.add_argument("--start", type=float, default=0.0)
    p.add_argument("--stop", type=float, default=10.0)
    p.add_argument("--step", type=float, default=0.1)
    p.add_argument("--m", type=int, choices=[2, 3], default=3)
    p.add_argument("--kind", choices=["plus", "minus", "both"], default="both")
    p.add_argument("--out", default=None)
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--config", default=None)

    p = sub.add_parser("verify-ball", help="forward identities on a ball")
    _add_shared(p)
    p.add_argument("--radius", type=_positive(float), default=1.0)
    p.add_argument("--m", type=int, choices=[2, 3], default=3)

    for name, helptext in (("scan", "residual scan over exterior probes"),
                           ("defect", "scalar and split defect integrals"),
                           ("recover", "recover the ball by residual minimization")):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("domain", help="domain JSON file")
        _add_shared(p, with_branch=name != "defect")
        if name == "scan":
            p.add_argument("--probe-point", action="append", default=None,
                           help="explicit probe 'x,y,z' (repeatable); replaces Fibonacci probes")
        if name == "recover":
            p.add_argument("--max-iterations", type=_positive(int), default=2000)
            p.add_argument("--initial-step", type=_positive(float), default=0.05)
            p.add_argument("--objective", choices=["rms", "sup"], default="rms")
            p.add_argument("--volume-target", type=_positive(float), default=None)
    return parser


def parse_args(argv: Optional[List[str]]) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "config", None):
        try:
            with open(args.config, encoding="utf-8") as fh:
                cfg = json.load(fh)
        except (OSError, ValueError) as exc:
            parser.error(f"cannot read config file {args.config!r}: {exc}")
        if not isinstance(cfg, dict):
            parser.error("config file must hold a JSON object")
        sub = parser._subparsers._group_actions[0].choices[args.command]
        known = {a.dest for a in sub._actions}
        unknown = set(k.replace("-", "_") for k in cfg) - known
        if unknown:
            parser.error(f"unknown config keys: {sorted(unknown)}")
        sub.set_defaults(**{k.replace("-", "_"): v for k, v in cfg.items()})
        args = parser.parse_args(argv)
    return args


def _quadrature(args) -> QuadratureSpec:
    return QuadratureSpec(n_radial=args.n_radial, n_polar=args.n_polar, n_azimuth=args.n_azimuth)


def _equations(args) -> List[EquationSpec]:
    if args.equation == "laplace":
        return [EquationSpec("laplace")]
    param = args.mu if args.equation == "yukawa" else args.lam
    branch = getattr(args, "branch", "both")
    branches = ["minus", "plus"] if branch == "both" else [branch]
    return [EquationSpec(args.equation, param, b) for b in branches]


def _load_domain(path: str) -> StarDomain:
    try:
        with open(path, encoding="utf-8") as fh:
            obj = json.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read domain file {path!r}: {exc}")
    except ValueError as exc:
        raise UsageError(f"domain file {path!r} is not valid JSON: {exc}")
    return StarDomain.from_json(obj)


def cmd_specfun_table(args) -> int:
    if not (0 <= args.start < args.stop <= T_MAX):
        raise UsageError(f"need 0 <= start < stop <= {T_MAX}")
    if not args.step > 0:
        raise UsageError("step must be positive")
    n = int(math.floor((args.stop - args.start) / args.step + 1e-9))
    ts = [args.start + i * args.step for i in range(n + 1)]
    rows = []
    for t in ts:
        a_plus = coeff("plus", args.m, t) if args.kind in ("plus", "both") else float("nan")
        a_minus = coeff("minus", args.m, t) if args.kind in ("minus", "both") else float("nan")
        rows.append((t, a_plus, a_minus, radial_profile("plus", t), radial_profile("minus", t)))
    if args.format == "csv":
        buf = io.StringIO()
        buf.write("t,a_plus,a_minus,u_plus,u_minus\n")
        for row in rows:
            buf.write(",".join("" if v != v else fmt_real(v) for v in row) + "\n")
        _write(buf.getvalue(), args.out)
    else:
        keys = ("t", "a_plus", "a_minus", "u_plus", "u_minus")
        _write(dumps({"m": args.m, "rows": [dict(zip(keys, (None if v != v else v for v in r)))
                                            for r in rows]}) + "\n", args.out)
    return EXIT_OK


def cmd_verify_ball(args) -> int:
    q = QuadratureSpec(n_radial=args.n_radial, n_polar=args.n_polar, n_azimuth=args.n_azimuth,
                       self_check=True)
    m, r = args.m, args.radius
    center = (0.0,) * m
    ball = Ball(center, r)
    checks = []
    worst = 0.0
    specs = _equations(args)
    if args.equation != "laplace":
        for i, d in enumerate(np.eye(m)):
            spec = specs[0]
            u = lambda y, d=d, spec=spec: plane_solution(spec, d, y)
            res = mv_check(spec, u, ball, q)
            err = abs(mv_check(spec, u, ball, q.doubled(m)) - res)
            checks.append({"check": f"mv_plane_e{i + 1}", "re": res.real, "im": res.imag,
                           "quad_err": err})
            worst = max(worst, abs(res) + err)
    scans = []
    if m == 3:
        for spec in specs:
            pole = (3.0 * r, 0.0, 0.0)
            res = mv_check(spec, PointSource(spec, pole), ball, q)
            err = abs(mv_check(spec, PointSource(spec, pole), ball, q.doubled(3)) - res)
            checks.append({"check": f"mv_point_source_{spec.branch}", "re": res.real,
                           "im": res.imag, "quad_err": err})
            worst = max(worst, abs(res) + err)
            domain = ball.as_domain()
            probes = ProbeSet.fibonacci(domain, args.probes or DEFAULT_PROBES, args.probe_factor)
            report = residual_scan(spec, domain, probes, q)
            scans.append(report.to_json())
            worst = max(worst, report.sup_norm + report.quadrature_error)
    passed = worst < args.threshold
    size = None
    if args.equation == "helmholtz" and m == 3:
        size = size_condition(ball.as_domain(), args.lam).to_json()
    report = {"equation": args.equation, "radius": r, "m": m, "threshold": args.threshold,
              "checks": checks, "scans": scans, "size_check": size, "worst": worst,
              "passed": passed}
    _write(dumps(report) + "\n", args.out)
    if args.out:
        print(f"worst={fmt_real(worst)} passed={'true' if passed else 'false'}")
    return EXIT_OK if passed else EXIT_FAIL


def cmd_scan(args) -> int:
    domain = _load_domain(args.domain)
    if domain.dim != 3:
        raise UsageError("domain field 'dim' must be 3 for residual scans")
    q = QuadratureSpec(n_radial=args.n_radial, n_polar=args.n_polar, n_azimuth=args.n_azimuth,
                       self_check=True)
    if args.probe_point:
        try:
            pts = [[float(c) for c in p.split(",")] for p in args.probe_point]
        except ValueError:
            raise UsageError("--probe-point must be 'x,y,z'")
        if any(len(p) != 3 for p in pts):
            raise UsageError("--probe-point must have three coordinates")
        probes = ProbeSet.explicit(pts)
    else:
        probes = ProbeSet.fibonacci(domain, args.probes or DEFAULT_PROBES, args.probe_factor)
    reports = [residual_scan(spec, domain, probes, q) for spec in _equations(args)]
    if args.format == "csv":
        buf = io.StringIO()
        buf.write("branch,x,y,z,re,im\n")
        for rep in reports:
            for p, v in rep.per_probe:
                buf.write(",".join([rep.equation.branch] + [fmt_real(c) for c in p]
                                   + [fmt_real(v.real), fmt_real(v.imag)]) + "\n")
        text = buf.getvalue()
    else:
        data = reports[0].to_json() if len(reports) == 1 else {"reports": [r.to_json() for r in reports]}
        text = dumps(data) + "\n"
    if args.out:
        _write(text, args.out)
    for rep in reports:
        print(f"branch={rep.equation.branch} sup={fmt_real(rep.sup_norm)} rms={fmt_real(rep.rms)} "
              f"quad_err={fmt_real(rep.quadrature_error)}")
    if not args.out:
        _write(text, None)
    return EXIT_OK


def cmd_defect(args) -> int:
    if args.equation == "laplace":
        raise UsageError("defect needs --equation yukawa or helmholtz")
    domain = _load_domain(args.domain)
    if domain.dim != 3:
        raise UsageError("domain field 'dim' must be 3 for defect integrals")
    q = _quadrature(args)
    spec = _equations(args)[0]
    scalar = scalar_defect(spec, domain, q)
    gi, ge, diff = proof_defect(spec, domain, q)
    size = size_condition(domain, spec.kappa) if spec.kind == "helmholtz" else None
    is_ball = not domain.coeffs
    if spec.kind == "yukawa":
        expected = "positive"
        consistent = is_ball or scalar > 0
        verdict = "consistent with Theorem 2" if consistent else "inconsistent with Theorem 2"
    else:
        expected = "negative"
        if size is not None and not size.satisfied:
            consistent = True
            verdict = "size condition violated; Theorem 4 makes no prediction"
        else:
            consistent = is_ball or scalar < 0
            verdict = "consistent with Theorem 4" if consistent else "inconsistent with Theorem 4"
    report = {
        "equation": spec.to_json(),
        "r": equal_volume_radius(domain, q),
        "volume": star_volume(domain, q),
        "scalar_defect": scalar,
        "inner_excess": gi,
        "outer_deficiency": ge,
        "split_difference": diff,
        "expected_sign": expected,
        "verdict": verdict,
        "size_check": size.to_json() if size else None,
    }
    _write(dumps(report) + "\n", args.out)
    if args.out:
        print(f"scalar_defect={fmt_real(scalar)} split=({fmt_real(gi)}, {fmt_real(ge)}, "
              f"{fmt_real(diff)}) {verdict}")
    return EXIT_OK if consistent else EXIT_FAIL


def cmd_recover(args) -> int:
    domain = _load_domain(args.domain)
    if domain.dim != 3:
        raise UsageError("domain field 'dim' must be 3 for shape recovery")
    spec = _equations(args)[0]
    target = args.volume_target or star_volume(domain)
    config = RecoveryConfig(
        equation=EquationSpec(spec.kind, spec.parameter),
        volume_target=target,
        objective=args.objective,
        max_iterations=args.max_iterations,
        initial_step=args.initial_step,
        n_probes=args.probes or RecoveryConfig.n_probes,
        probe_factor=args.probe_factor,
    )
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        trace = recover_shape(domain, config)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    _write(dumps(trace.to_json()) + "\n", args.out)
    max_coeff = float(np.abs(trace.final_domain.vector()).max())
    print(f"final_obj={fmt_real(trace.final_objective)} max_coeff={fmt_real(max_coeff)} "
          f"iters={len(trace.iterations) - 1}")
    return EXIT_OK if trace.converged else EXIT_FAIL


COMMANDS = {
    "specfun-table": cmd_specfun_table,
    "verify-ball": cmd_verify_ball,
    "scan": cmd_scan,
    "defect": cmd_defect,
    "recover": cmd_recover,
}


def main(argv: Optional[List[str]] = None) -> int:
    try:
        args = parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        return COMMANDS[args.command](args)
    except (UsageError, KugelError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
