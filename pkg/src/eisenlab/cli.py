"""Command line entry point.

Exit codes: 0 when the run passes, 2 on a numerical failure, 1 on usage
errors such as bad flags or an invalid config.
"""

from __future__ import annotations

import argparse
import dataclasses
import math
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from .eisenstein import InfeasibleError, SpectralParam, eval_E, eval_mode, theta_nodes
from .experiments import (
    ExperimentConfig,
    lhs_grid_points,
    run_measure_xval,
    run_theorem1,
    run_theorem2,
    write_report,
)
from .hyperbolic import HPoint, frame_at, frame_flow
from .modgroup import TruncationError, enumerate_bottom_box, reduce_to_F

EXIT_PASS, EXIT_USAGE, EXIT_FAIL = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def parse_number(text: str) -> float:
    return float(Fraction(text.strip())) if "/" in text else float(text)


def parse_complex(text: str) -> complex:
    return complex(text.strip().replace(" ", "").replace("i", "j"))


def parse_list(text: str, conv=parse_number):
    return tuple(conv(v) for v in text.split(",") if v.strip())


# config keys per namespace, with value parsers
_COMMON = {"out": str, "threads": int, "tol": parse_number}
CONFIG_KEYS = {
    "pair": {"nu": parse_number, "h_list": parse_list, "center": parse_complex, "radius": parse_number,
             "amplitude": parse_number, "tol": parse_number, "grid_factor": int, "pushforward_grid": int,
             "threshold": parse_number},
    "scatter": {"nu": parse_number, "re_lambda_list": parse_list, "dual_tol": parse_number},
    "measure": {"nu": parse_number, "t": parse_number, "r_grid": int, "theta_grid": int, "atom_eps": parse_number,
                "atom_grid": int, "decay_s": parse_list, "decay_nu": parse_list, "suite": str,
                "center": parse_complex, "radius": parse_number, "pushforward_grid": int},
    "run": _COMMON,
}


def read_config(path) -> dict:
    """Parse a key=value file into {namespace: {field: value}}."""
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"config file {path} not found")
    out = {}
    for n, raw in enumerate(p.read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        ns, dot, name = key.strip().partition(".")
        if not sep or not dot:
            raise UsageError(f"{path}:{n}: expected namespace.key = value")
        if ns not in CONFIG_KEYS or name not in CONFIG_KEYS[ns]:
            raise UsageError(f"{path}:{n}: unknown key {key.strip()!r}")
        try:
            out.setdefault(ns, {})[name] = CONFIG_KEYS[ns][name](value.strip())
        except ValueError as exc:
            raise UsageError(f"{path}:{n}: bad value for {key.strip()}: {exc}") from exc
    return out


def build_config(experiment: str, file_cfg: dict, overrides: dict) -> ExperimentConfig:
    fields = dict(file_cfg.get(experiment, {}))
    fields.update({k: v for k, v in overrides.items() if v is not None})
    run = file_cfg.get("run", {})
    prop_keys = {"t", "r_grid", "theta_grid"}
    prop = {k: fields.pop(k) for k in list(fields) if k in prop_keys}
    kw = {"experiment": experiment}
    if prop:
        kw["prop"] = dataclasses.replace(ExperimentConfig().prop, **prop)
    for k in ("out", "threads"):
        if k in run:
            kw[k] = run[k]
    if "tol" in run:
        kw["dual_tol" if experiment == "scatter" else "tol"] = run["tol"]
    kw.update(fields)
    try:
        return ExperimentConfig(**kw)
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc)) from exc


# ----------------------------------------------------------------- estimates


def estimate_pair(cfg: ExperimentConfig) -> float:
    """Number of series terms summed by the |E|^2 quadrature."""
    box = cfg.bump.box
    total = 0.0
    for h in cfg.h_list:
        p = SpectralParam(h, cfg.nu)
        c, _, _ = enumerate_bottom_box(*box, p.sigma, cfg.tol / abs(p.prefactor))
        # only the points inside the disc are evaluated
        total += lhs_grid_points(h, box, cfg.grid_factor) * math.pi / 4 * len(c)
    return total


def estimate_measure(cfg: ExperimentConfig) -> float:
    prop = cfg.prop.r_grid * cfg.prop.theta_grid
    n_prop = 3 + 1 + len(cfg.decay_nu) * (1 + 2 * len(cfg.decay_s))
    return float(prop * n_prop)


# ------------------------------------------------------------------ commands


def _finish(rep, cfg, args) -> int:
    out = args.out or cfg.out
    csv_path, man_path = write_report(rep, out, args.id or rep.experiment)
    status = "PASS" if rep.passed else "FAIL"
    print(f"{rep.experiment}: {status} ({len(rep.rows)} rows, {rep.wall_time:.1f} s) -> {csv_path}")
    for r in rep.rows:
        print(f"  {r.kind:12s} {r.params:40s} lhs={r.lhs:.10g} rhs={r.rhs:.10g} rel_err={r.rel_err:.3g}")
    return EXIT_PASS if rep.passed else EXIT_FAIL


def _guard(estimate: float, args, what: str) -> bool:
    print(f"estimated cost: {estimate:.3g} {what}", file=sys.stderr)
    if args.dry_run:
        return False
    if estimate > args.max_cost and not args.force:
        raise UsageError(f"estimate {estimate:.3g} exceeds --max-cost {args.max_cost:.3g}; pass --force")
    return True


def cmd_pair(args, file_cfg):
    cfg = build_config("pair", file_cfg, {
        "nu": args.nu, "h_list": args.h_list, "center": args.center, "radius": args.radius,
        "threads": args.threads, "tol": args.tol,
    })
    if not _guard(estimate_pair(cfg), args, "series terms"):
        return EXIT_PASS
    return _finish(run_theorem1(cfg), cfg, args)


def cmd_scatter(args, file_cfg):
    cfg = build_config("scatter", file_cfg, {
        "nu": args.nu, "re_lambda_list": args.re_lambda, "threads": args.threads, "dual_tol": args.tol,
    })
    if not _guard(float(len(cfg.re_lambda_list)), args, "zeta evaluations"):
        return EXIT_PASS
    return _finish(run_theorem2(cfg), cfg, args)


def cmd_measure(args, file_cfg):
    cfg = build_config("measure", file_cfg, {"nu": args.nu, "threads": args.threads, "suite": args.suite})
    if not _guard(estimate_measure(cfg), args, "frame evaluations"):
        return EXIT_PASS
    return _finish(run_measure_xval(cfg), cfg, args)


def _out_stream(args, name):
    if args.out:
        Path(args.out).mkdir(parents=True, exist_ok=True)
        return open(Path(args.out) / name, "w")
    return sys.stdout


def cmd_eval(args, file_cfg):
    if args.z is None:
        raise UsageError("eval needs --z")
    p = SpectralParam.from_lambda(args.lam)
    tol = args.tol or 1e-8
    if args.dry_run:
        return EXIT_PASS
    out = _out_stream(args, "eval.csv")
    print("x,y,re_E,im_E,tail_bound", file=out)
    for z in args.z:
        v = eval_E(p, HPoint(z.real, z.imag), tol)
        print(f"{z.real!r},{z.imag!r},{v.value.real!r},{v.value.imag!r},{v.tail_bound!r}", file=out)
    return EXIT_PASS


def cmd_modes(args, file_cfg):
    p = SpectralParam.from_lambda(args.lam)
    tol = args.tol or 1e-6
    radii = args.r or (math.log(4 * math.pi),)
    print(f"estimated cost: {sum(theta_nodes(p, k, r) for k in args.k for r in radii)} theta nodes",
          file=sys.stderr)
    if args.dry_run:
        return EXIT_PASS
    out = _out_stream(args, "modes.csv")
    print("k,r,re_u,im_u,abs_u", file=out)
    for r in radii:
        for k in args.k:
            u = eval_mode(p, int(k), r, tol)
            print(f"{int(k)},{r!r},{u.real!r},{u.imag!r},{abs(u)!r}", file=out)
    return EXIT_PASS


def cmd_flow(args, file_cfg):
    if args.z is None:
        raise UsageError("flow needs --z")
    if args.dry_run:
        return EXIT_PASS
    z = args.z[0]
    F0 = frame_at(HPoint(z.real, z.imag), args.angle)
    out = _out_stream(args, "flow.csv")
    print("t,x,y,angle,x_F,y_F", file=out)
    for t in np.linspace(0.0, args.t_max, args.steps + 1).tolist():
        F = frame_flow(F0, t)
        b = F.base
        zr, _ = reduce_to_F(b)
        print(f"{t!r},{b.x!r},{b.y!r},{F.angle!r},{zr.x!r},{zr.y!r}", file=out)
    return EXIT_PASS


def make_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="eisenlab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    def common(sp):
        sp.add_argument("--config", help="key=value config file")
        sp.add_argument("--out", help="output directory")
        sp.add_argument("--threads", type=int)
        sp.add_argument("--tol", type=parse_number)
        sp.add_argument("--dry-run", action="store_true", help="print the cost estimate only")
        sp.add_argument("--id", help="experiment id used for output file names")
        sp.add_argument("--max-cost", type=float, default=1e12)
        sp.add_argument("--force", action="store_true", help="run even above --max-cost")
        return sp

    sp = common(sub.add_parser("eval", help="Eisenstein function at points"))
    sp.add_argument("--lambda", dest="lam", type=parse_complex, required=True)
    sp.add_argument("--z", type=lambda s: parse_list(s, parse_complex))
    sp.set_defaults(func=cmd_eval)

    sp = common(sub.add_parser("modes", help="Fourier coefficients in the cusp"))
    sp.add_argument("--lambda", dest="lam", type=parse_complex, required=True)
    sp.add_argument("--k", type=lambda s: parse_list(s, int), default=(0, 1, 2))
    sp.add_argument("--r", type=parse_list)
    sp.set_defaults(func=cmd_modes)

    sp = common(sub.add_parser("scatter", help="scattering coefficient table"))
    sp.add_argument("--nu", type=parse_number)
    sp.add_argument("--re-lambda", type=parse_list)
    sp.set_defaults(func=cmd_scatter)

    sp = common(sub.add_parser("pair", help="|E|^2 pairing against the limit measure"))
    sp.add_argument("--nu", type=parse_number)
    sp.add_argument("--h-list", type=parse_list)
    sp.add_argument("--center", type=parse_complex)
    sp.add_argument("--radius", type=parse_number)
    sp.set_defaults(func=cmd_pair)

    sp = common(sub.add_parser("measure", help="cross-check of the two measure constructions"))
    sp.add_argument("--nu", type=parse_number)
    sp.add_argument("--suite", choices=("default", "empty"))
    sp.set_defaults(func=cmd_measure)

    sp = common(sub.add_parser("flow", help="geodesic trajectory dump"))
    sp.add_argument("--z", type=lambda s: parse_list(s, parse_complex))
    sp.add_argument("--angle", type=parse_number, default=1.5 * math.pi)
    sp.add_argument("--t-max", type=parse_number, default=5.0)
    sp.add_argument("--steps", type=int, default=50)
    sp.set_defaults(func=cmd_flow)
    return parser


def main(argv=None) -> int:
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("missing subcommand")
        file_cfg = read_config(args.config) if args.config else {}
        return args.func(args, file_cfg)
    except UsageError as exc:
        print(parser.format_usage().rstrip(), file=sys.stderr)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (InfeasibleError, TruncationError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
