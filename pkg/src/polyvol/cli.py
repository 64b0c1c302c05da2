"""``polyvol`` command line: generate instances, estimate volumes, verify bounds.

Results go to stdout as JSON (or CSV for tables); logs and structured errors
go to stderr. Exit codes: 0 success, 1 usage error, 2 computation error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from typing import Optional

import numpy as np

from . import generators
from .center import CenterResult, SolverConfig, analytic_center
from .estimator import VolumeEstimate, alpha0, compute_alpha0, estimate_full
from .exceptions import ParseError, PolyvolError
from .model import PolytopeInstance, dumps_instance, load_instance
from .reference import Method, ReferenceVolume, reference_volume

SCHEMA = "polyvol/1"
MC_SIGMAS = 3.0

log = logging.getLogger("polyvol")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _floats(text: str) -> list:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def sandwich_ok(est: VolumeEstimate, ref: ReferenceVolume) -> bool:
    slack = MC_SIGMAS * ref.std_error_ln if ref.method is Method.MONTE_CARLO else 0.0
    return est.contains(ref.ln_volume, slack)


def build_report(
    inst: PolytopeInstance,
    est: VolumeEstimate,
    center: CenterResult,
    reference: Optional[ReferenceVolume] = None,
) -> dict:
    z = np.asarray(center.z)
    report = {
        "schema": SCHEMA,
        "instance_label": inst.label,
        "n": inst.n,
        "m": inst.m,
        "dim": inst.dim,
        "ln_estimate": est.ln_estimate,
        "ln_gaussian": est.ln_gaussian,
        "ln_upper": est.ln_upper,
        "ln_lower": est.ln_lower,
        "ln_lower_asymptotic_reference": est.ln_lower_asymptotic_reference,
        "estimate": est.estimate,
        "center_summary": {
            "min": float(z.min()),
            "max": float(z.max()),
            "geometric_mean": float(np.exp(np.mean(np.log(z)))),
        },
        "solver": {
            "iterations": center.iterations,
            "primal_residual": center.primal_residual,
            "stationarity_residual": center.stationarity_residual,
        },
    }
    if reference is not None:
        report["reference"] = reference.to_dict()
        report["sandwich_ok"] = sandwich_ok(est, reference)
    return report


def _solver_config(args) -> SolverConfig:
    return SolverConfig(
        feas_tol=args.feas_tol, stat_tol=args.stat_tol, max_iterations=args.max_iter
    )


def _read_instance(path: str) -> PolytopeInstance:
    if path == "-":
        return load_instance(sys.stdin)
    with open(path, "rb") as fh:
        return load_instance(fh)


def _emit(obj) -> None:
    sys.stdout.write(json.dumps(obj, indent=2) + "\n")


def _run_with_reference(args, method: Optional[str]) -> dict:
    inst = _read_instance(args.input)
    est, center = estimate_full(inst, _solver_config(args))
    ref = None
    if method:
        log.info("computing %s reference volume", method)
        ref = reference_volume(inst, method, samples=args.samples, seed=args.seed, threads=args.threads)
    return build_report(inst, est, center, ref)


def cmd_estimate(args) -> int:
    _emit(_run_with_reference(args, args.verify))
    return 0


def cmd_verify(args) -> int:
    _emit(_run_with_reference(args, args.method))
    return 0


def cmd_gen(args) -> int:
    fam = args.family
    if fam == "simplex":
        inst = generators.gen_simplex(args.alphas, args.beta)
    elif fam == "transport":
        inst = generators.gen_transport(generators.Margins2Way(args.rows, args.cols))
    elif fam == "birkhoff":
        inst = generators.gen_birkhoff(args.k)
    elif fam == "planar3":
        inst = generators.gen_planar3(args.r)
    elif fam == "random":
        inst = generators.gen_random(args.m, args.n, args.seed)
    else:
        plus, minus = generators.gen_phase_transition(args.k, args.eps)
        inst = plus if args.sign == "plus" else minus
    sys.stdout.write(dumps_instance(inst) + "\n")
    return 0


def cmd_alpha0(args) -> int:
    a0 = compute_alpha0(args.tol) if args.tol is not None else alpha0()
    _emit({"schema": SCHEMA, "alpha0": a0, "upper_factor": 1.0 / math.sqrt(a0)})
    return 0


def phase_rows(k: int, eps: float, cfg: Optional[SolverConfig] = None) -> list:
    plus, minus = generators.gen_phase_transition(k, eps)
    rows = []
    for sign, inst in (("plus", plus), ("minus", minus)):
        z = analytic_center(inst, cfg).z
        rows.append(
            {
                "sign": sign,
                "last_margin": float(inst.b_vector[k - 1]),
                "zeta_kk": float(z[-1]),
                "max_zeta": float(z.max()),
                "k_times_max_zeta": float(k * z.max()),
            }
        )
    return rows


def cmd_demo_phase(args) -> int:
    rows = phase_rows(args.k, args.eps, _solver_config(args))
    ratio = rows[0]["zeta_kk"] / rows[1]["zeta_kk"]
    _emit({"schema": SCHEMA, "k": args.k, "eps": args.eps, "rows": rows, "zeta_kk_ratio": ratio})
    return 0


def planar3_rows(r_min: int, r_max: int, cfg: Optional[SolverConfig] = None) -> list:
    rows = []
    for r in range(r_min, r_max + 1):
        inst = generators.gen_planar3(r)
        est, _ = estimate_full(inst, cfg)
        main = r**3 - (r - 1) ** 3 * math.log(r)
        rows.append(
            {
                "r": r,
                "n": inst.n,
                "m": inst.m,
                "dim": inst.dim,
                "ln_estimate": est.ln_estimate,
                "main_term": main,
                "difference": est.ln_estimate - main,
                "ln_lower": est.ln_lower,
                "ln_upper": est.ln_upper,
            }
        )
    return rows


PLANAR3_COLUMNS = ["r", "n", "m", "dim", "ln_estimate", "main_term", "difference", "ln_lower", "ln_upper"]


def cmd_planar3_table(args) -> int:
    rows = planar3_rows(args.r_min, args.r_max, _solver_config(args))
    if args.format == "csv":
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=PLANAR3_COLUMNS, lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
        sys.stdout.write(buf.getvalue())
    else:
        _emit({"schema": SCHEMA, "rows": rows})
    return 0


def _add_solver_flags(p) -> None:
    p.add_argument("--feas-tol", type=float, default=SolverConfig.feas_tol)
    p.add_argument("--stat-tol", type=float, default=SolverConfig.stat_tol)
    p.add_argument("--max-iter", type=int, default=SolverConfig.max_iterations)


def _add_mc_flags(p) -> None:
    p.add_argument("--samples", type=int, default=1_000_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="polyvol", description=__doc__.splitlines()[0])
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument("--quiet", action="store_true")
    verbosity.add_argument("--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("estimate", help="estimate ln vol P with certified bounds")
    p.add_argument("--input", required=True, help="instance JSON file, or - for stdin")
    p.add_argument("--verify", choices=["exact", "mc", "simplex"])
    _add_solver_flags(p)
    _add_mc_flags(p)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("verify", help="estimate and compare against a reference volume")
    p.add_argument("--input", required=True)
    p.add_argument("--method", choices=["exact", "mc", "simplex"], default="exact")
    _add_solver_flags(p)
    _add_mc_flags(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("gen", help="write an instance JSON to stdout")
    fams = p.add_subparsers(dest="family", required=True, parser_class=_Parser)
    q = fams.add_parser("simplex")
    q.add_argument("--alphas", type=_floats, required=True)
    q.add_argument("--beta", type=float, required=True)
    q = fams.add_parser("transport")
    q.add_argument("--rows", type=_floats, required=True)
    q.add_argument("--cols", type=_floats, required=True)
    q = fams.add_parser("birkhoff")
    q.add_argument("--k", type=int, required=True)
    q = fams.add_parser("planar3")
    q.add_argument("--r", type=int, required=True)
    q = fams.add_parser("random")
    q.add_argument("--m", type=int, required=True)
    q.add_argument("--n", type=int, required=True)
    q.add_argument("--seed", type=int, required=True)
    q = fams.add_parser("phase")
    q.add_argument("--k", type=int, required=True)
    q.add_argument("--eps", type=float, required=True)
    q.add_argument("--sign", choices=["plus", "minus"], required=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("alpha0", help="print the upper-bound constant")
    p.add_argument("--tol", type=float)
    p.set_defaults(func=cmd_alpha0)

    p = sub.add_parser("demo-phase", help="analytic centers across the margin phase transition")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--eps", type=float, required=True)
    _add_solver_flags(p)
    p.set_defaults(func=cmd_demo_phase)

    p = sub.add_parser("planar3-table", help="estimate vs main term for planar 3-way polytopes")
    p.add_argument("--r-min", type=int, default=2)
    p.add_argument("--r-max", type=int, default=5)
    p.add_argument("--format", choices=["json", "csv"], default="json")
    _add_solver_flags(p)
    p.set_defaults(func=cmd_planar3_table)
    return parser


def _error(kind: str, message: str) -> None:
    sys.stderr.write(json.dumps({"schema": SCHEMA, "error": kind, "message": message}) + "\n")


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        _error("usage", str(exc))
        return 1
    level = logging.WARNING if args.quiet else logging.DEBUG if args.verbose else logging.INFO
    logging.basicConfig(level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ParseError as exc:
        # a bad input file is the caller's mistake, not a failed computation
        _error(exc.code, str(exc))
        return 1
    except PolyvolError as exc:
        _error(exc.code, str(exc))
        return 2
    except ValueError as exc:
        _error("invalid-argument", str(exc))
        return 1
    except OSError as exc:
        _error("io-error", str(exc))
        return 1


if __name__ == "__main__":
    sys.exit(main())
