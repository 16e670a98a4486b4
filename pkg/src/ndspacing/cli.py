"""Command-line front end.

Every subcommand writes one record per line (jsonl, or csv with
``--format csv``) to ``--output``, to ``$NDSPACING_OUTPUT_DIR/<cmd>.<fmt>``
when that variable is set, or to stdout.  Exit status is 0 on success,
1 on a domain error and 2 on a usage error.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from dataclasses import replace
from fractions import Fraction
from pathlib import Path

from .analysis import (
    DivergenceConfig,
    ExperimentRecord,
    T2Config,
    classify_alpha,
    default_thresholds,
    divergence_lower_bound,
    schedule_Nj,
    t2_experiment,
)
from .correlations import (
    CorrelationRequest,
    Region,
    consecutive_gaps,
    correlation,
    correlation_brute,
    correlation_sandwich,
    fourier_identity_check,
    star_sum_identity,
)
from .diophantine import ApproximantLadder, ContinuedFraction, LadderSource, RationalSource, build_ladder, cf_convergents
from .errors import DomainError
from .ffcurves import CurveSpec, nu, nu_brute
from .suites import SUITES, run_suite

ENV_OUTPUT_DIR = "NDSPACING_OUTPUT_DIR"


def _ints(text: str) -> list[int]:
    return [int(t) for t in text.split(",") if t.strip()]


def _frac(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


class Sink:
    """Append-only record writer; flushes after every record."""

    def __init__(self, path: Path | None, fmt: str):
        self.fmt = fmt
        self.path = path
        self._fh = None
        self._csv = None
        self._header = None

    def __enter__(self):
        if self.path is None:
            self._fh = sys.stdout
        else:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            fresh = not self.path.exists() or self.path.stat().st_size == 0
            self._fh = open(self.path, "a", newline="")
            self._header = None if fresh else "existing"
        return self

    def __exit__(self, *exc):
        if self._fh is not sys.stdout:
            self._fh.close()

    def write(self, row: dict) -> None:
        if self.fmt == "jsonl":
            self._fh.write(json.dumps(row) + "\n")
        else:
            flat = {k: json.dumps(v) if isinstance(v, (list, dict)) else v for k, v in row.items()}
            if self._csv is None:
                self._csv = csv.DictWriter(self._fh, fieldnames=list(flat), lineterminator="\n")
                if self._header is None:
                    self._csv.writeheader()
            self._csv.writerow(flat)
        self._fh.flush()


# ------------------------------------------------------------- handlers

def cmd_count(args, sink: Sink) -> int:
    a = tuple(_ints(args.a)) if args.a else ()
    spec = CurveSpec(args.m, args.d, args.q, args.b, a)
    res = nu(spec)
    row = {
        "kind": "count",
        "q": spec.q,
        "d": spec.d,
        "m": spec.m,
        "b": spec.b,
        "a": list(spec.a),
        "nu": res.nu,
        "defect": res.defect,
        "crt": {f"{p}^{e}": n for p, e, n, _ in res.crt_factors},
    }
    if args.brute:
        row["nu_brute"] = nu_brute(spec)
    sink.write(row)
    return 0


def _load_ladder(path: str) -> ApproximantLadder:
    return ApproximantLadder.from_text(Path(path).read_text())


def cmd_correlate(args, sink: Sink) -> int:
    region = Region.parse(args.region, args.m - 1)
    if args.ladder:
        source = LadderSource(_load_ladder(args.ladder), args.j)
    else:
        source = RationalSource(args.b, args.q)
    req = CorrelationRequest(args.m, args.d, source, args.N, region)
    if args.method == "sandwich":
        req.check_wrap()
        lo, hi = correlation_sandwich(req)
        sink.write(
            {"m": req.m, "d": req.d, "source": source.label(), "N": req.N, "region": region.to_json(),
             "lower": _frac(lo), "upper": _frac(hi), "method": "sandwich"}
        )
        return 0
    res = correlation_brute(req) if args.method == "brute" else correlation(req)
    sink.write(json.loads(res.to_json()))
    return 0


def cmd_gaps(args, sink: Sink) -> int:
    if args.cf:
        cf = ContinuedFraction.golden(args.terms) if args.cf == "golden" else ContinuedFraction.sqrt2(args.terms)
        b, q = cf_convergents(cf)[-1]
    else:
        b, q = args.b, args.q
    res = consecutive_gaps(args.d, RationalSource(b, q), args.N)
    sink.write(
        {"kind": "gaps", "d": args.d, "source": f"{b}/{q}", "N": args.N,
         "gaps": {_frac(g): c for g, c in sorted(res.gaps.items())}, "distinct_count": res.distinct_count}
    )
    return 0


def cmd_identity(args, sink: Sink) -> int:
    region = Region.parse(args.region, args.m - 1)
    row = {"kind": args.kind, "m": args.m, "d": args.d, "b": args.b, "q": args.q, "N": args.N,
           "region": region.to_json()}
    if args.kind == "star":
        lhs, rhs = star_sum_identity(args.m, args.d, args.b, args.q, args.N, region)
        row.update(lhs=lhs, rhs=rhs, equal=lhs == rhs)
    else:
        lhs, rhs, err = fourier_identity_check(args.m, args.d, args.b, args.q, args.N, region)
        row.update(lhs=_frac(lhs), rhs_re=rhs.real, rhs_im=rhs.imag, abs_diff=err)
    sink.write(row)
    return 0


def _square_parts(items: list[str] | None) -> dict[int, tuple[int, int]]:
    out = {}
    for it in items or []:
        j, u, v = (int(t) for t in it.split(":"))
        out[j] = (u, v)
    return out


def cmd_ladder(args, sink: Sink) -> int:
    if args.action == "build":
        ladder = build_ladder(args.q0, args.b0, _ints(args.k), args.mode, _square_parts(args.square_part))
        if args.save:
            Path(args.save).write_text(ladder.to_text())
        for j, e in enumerate(ladder.entries):
            sink.write({"kind": "ladder", "mode": ladder.mode, "j": j, "b": e.b, "q": e.q, "k": e.k,
                        "tail": _frac(e.tail)})
        return 0
    ladder = _load_ladder(args.ladder)
    v = classify_alpha(ladder, _ints(args.d_list), args.budget)
    row = json.loads(v.to_json())
    row.update(kind="verdict", d_list=_ints(args.d_list), budget=args.budget)
    sink.write(row)
    return 0


def cmd_experiment(args, sink: Sink) -> int:
    if args.kind == "t2":
        region = Region.parse(args.region, args.m - 1)
        cfg = T2Config(args.m, args.d, tuple(_ints(args.q)), Fraction(args.theta), Fraction(args.delta0),
                       region, args.samples, args.seed)
        for q in cfg.qs:  # one modulus at a time so interrupted sweeps keep finished records
            for rec in t2_experiment(replace(cfg, qs=(q,)), workers=args.threads):
                sink.write(rec.as_row())
        return 0
    if args.kind == "divergence":
        region = Region.parse(args.region, args.m - 1)
        cfg = DivergenceConfig(args.u, args.v, args.d, args.m, args.N, args.b, region)
        res = divergence_lower_bound(cfg)
        rec = ExperimentRecord("divergence", cfg.m, cfg.d, cfg.q, cfg.b, cfg.N, region, res.R, res.bound,
                               res.R - res.bound, args.seed)
        sink.write(rec.as_row())
        return 0 if res.passed else 1
    ladder = _load_ladder(args.ladder)
    thresholds = _thresholds(args.threshold) or default_thresholds(ladder)
    for s in schedule_Nj(ladder, thresholds):
        sink.write({"kind": "schedule", "j": s.j, "k": s.k, "q": s.q, "N": s.N})
    return 0


def _thresholds(items: list[str] | None) -> dict[int, int]:
    out = {}
    for it in items or []:
        k, j = (int(t) for t in it.split(":"))
        out[k] = j
    return out


def cmd_verify(args, sink: Sink) -> int:
    checks = run_suite(args.suite, args.cmax)
    for c in checks:
        sink.write({"kind": "check", "suite": args.suite, "name": c.name, "passed": c.passed, "detail": c.detail})
    return 0 if all(c.passed for c in checks) else 1


# --------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="64-bit seed for sampled quantities")
    common.add_argument("--output", help="append records to this file")
    common.add_argument("--format", choices=("jsonl", "csv"), default="jsonl")
    common.add_argument("--threads", type=int, default=1, help="worker processes for experiment sweeps")

    p = argparse.ArgumentParser(prog="ndspacing", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="cmd", required=True)

    c = sub.add_parser("count", parents=[common], help="points on a chain curve mod q")
    c.add_argument("--q", type=int, required=True)
    c.add_argument("--d", type=int, required=True)
    c.add_argument("--m", type=int, required=True)
    c.add_argument("--b", type=int, default=1)
    c.add_argument("--a", default="", help="comma-separated a_1..a_{m-1}")
    c.add_argument("--brute", action="store_true", help="also run the enumeration oracle")
    c.set_defaults(func=cmd_count)

    c = sub.add_parser("correlate", parents=[common], help="m-level correlation R^(m)")
    c.add_argument("--q", type=int)
    c.add_argument("--b", type=int, default=1)
    c.add_argument("--ladder", help="ladder text file; use with --j")
    c.add_argument("--j", type=int, default=0)
    c.add_argument("--d", type=int, required=True)
    c.add_argument("--m", type=int, required=True)
    c.add_argument("--N", type=int, required=True)
    c.add_argument("--region", required=True, help="lo,hi[,lo,hi...][;next box]")
    c.add_argument("--method", choices=("fast", "brute", "sandwich"), default="fast")
    c.set_defaults(func=cmd_correlate)

    c = sub.add_parser("gaps", parents=[common], help="consecutive gaps of n^d b/q mod 1")
    c.add_argument("--q", type=int)
    c.add_argument("--b", type=int, default=1)
    c.add_argument("--cf", choices=("golden", "sqrt2"), help="use a continued-fraction convergent instead")
    c.add_argument("--terms", type=int, default=20)
    c.add_argument("--d", type=int, default=1)
    c.add_argument("--N", type=int, required=True)
    c.set_defaults(func=cmd_gaps)

    c = sub.add_parser("identity", parents=[common], help="star-sum or character-sum identity")
    c.add_argument("kind", choices=("star", "fourier"))
    for name in ("m", "d", "q", "N"):
        c.add_argument(f"--{name}", type=int, required=True)
    c.add_argument("--b", type=int, default=1)
    c.add_argument("--region", default="-1,1")
    c.set_defaults(func=cmd_identity)

    c = sub.add_parser("ladder", parents=[common], help="build or classify an approximant ladder")
    c.add_argument("action", choices=("build", "classify"))
    c.add_argument("--mode", choices=("raw", "prime_denominator", "square_rich"), default="raw")
    c.add_argument("--q0", type=int, default=2)
    c.add_argument("--b0", type=int, default=1)
    c.add_argument("--k", default="3,4,5", help="comma-separated orders k_j")
    c.add_argument("--square-part", action="append", metavar="J:U:V")
    c.add_argument("--save", help="write the ladder text here")
    c.add_argument("--ladder", help="ladder file to classify")
    c.add_argument("--d-list", default="2")
    c.add_argument("--budget", type=int, default=10**12)
    c.set_defaults(func=cmd_ladder)

    c = sub.add_parser("experiment", parents=[common], help="t2 sweep, divergence bound or N_j schedule")
    c.add_argument("kind", choices=("t2", "divergence", "schedule"))
    c.add_argument("--m", type=int, default=2)
    c.add_argument("--d", type=int, default=2)
    c.add_argument("--q", default="104729", help="comma-separated moduli")
    c.add_argument("--theta", default="0.85")
    c.add_argument("--delta0", default="0.05")
    c.add_argument("--samples", type=int, default=5)
    c.add_argument("--region", default="-1,1")
    c.add_argument("--u", type=int)
    c.add_argument("--v", type=int)
    c.add_argument("--b", type=int, default=1)
    c.add_argument("--N", type=int)
    c.add_argument("--ladder")
    c.add_argument("--threshold", action="append", metavar="K:J", help="j_k for order k")
    c.set_defaults(func=cmd_experiment)

    c = sub.add_parser("verify", parents=[common], help="run an invariant suite")
    c.add_argument("--suite", choices=tuple(SUITES) + ("all",), default="all")
    c.add_argument("--cmax", type=int, default=60)
    c.set_defaults(func=cmd_verify)
    return p


def _output_path(args) -> Path | None:
    if args.output:
        return Path(args.output)
    env = os.environ.get(ENV_OUTPUT_DIR)
    if env:
        return Path(env) / f"{args.cmd}.{args.format}"
    return None


def _glue_values(argv: list[str]) -> list[str]:
    """``--region -1,1`` -> ``--region=-1,1`` so argparse does not read a flag."""
    out, i = [], 0
    while i < len(argv):
        tok = argv[i]
        if tok in ("--region", "--a") and i + 1 < len(argv) and argv[i + 1].startswith("-"):
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
            continue
        out.append(tok)
        i += 1
    return out


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(_glue_values(sys.argv[1:] if argv is None else list(argv)))
    if args.cmd == "correlate" and args.q is None and not args.ladder:
        parser.error("correlate needs --q or --ladder")
    if args.cmd == "gaps" and args.q is None and not args.cf:
        parser.error("gaps needs --q or --cf")
    if args.cmd == "ladder" and args.action == "classify" and not args.ladder:
        parser.error("ladder classify needs --ladder")
    if args.cmd == "experiment":
        if args.kind == "divergence" and None in (args.u, args.v, args.N):
            parser.error("divergence needs --u, --v and --N")
        if args.kind == "schedule" and not args.ladder:
            parser.error("schedule needs --ladder")
    try:
        with Sink(_output_path(args), args.format) as sink:
            return args.func(args, sink)
    except (DomainError, ValueError, ZeroDivisionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
