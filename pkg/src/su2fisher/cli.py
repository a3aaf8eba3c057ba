"""Command-line entry point: ``su2fisher <command> [options]``."""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys

from . import cfi, qfi, sweeps, verify
from .errors import Su2FisherError
from .fock import parse_state_spec
from .su2 import parse_unitary_spec

EXIT_OK, EXIT_INPUT, EXIT_VERIFY = 0, 1, 2
CSV_HEADER = ["lambda_or_angle", "tr_inv", "flag", "cond_number", "basis_breakdown_trF_HV", "trF_DA", "trF_RL"]


class _Parser(argparse.ArgumentParser):
    # exit code 2 is reserved for verification failures
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _num(x) -> str:
    if x is None:
        return ""
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return repr(x)


def _json_safe(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return None if math.isnan(obj) else ("inf" if obj > 0 else "-inf")
    if isinstance(obj, dict):
        return {k: _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    return obj


def _dump_json(obj) -> str:
    return json.dumps(_json_safe(obj), sort_keys=True, indent=2) + "\n"


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _sweep_csv(records) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in records:
        w.writerow(
            [_num(r.lambda_or_angle), _num(r.tr_inv), r.flag or "", _num(r.cond_number), _num(r.trF_HV), _num(r.trF_DA), _num(r.trF_RL)]
        )
    return buf.getvalue()


def cmd_path_scan(args) -> int:
    state = parse_state_spec(args.state)
    records = sweeps.path_scan(state, args.path, sweeps.lambda_grid(args.grid_step))
    if args.format == "csv":
        _emit(_sweep_csv(records), args.out)
    else:
        payload = {
            "state": args.state,
            "path": args.path,
            "grid_step": args.grid_step,
            "ill_conditioned_path": sweeps.path_is_ill_conditioned(records),
            "divergences": sweeps.divergence_lambdas(records),
            "records": [sweeps.record_dict(r) for r in records],
        }
        _emit(_dump_json(payload), args.out)
    return EXIT_OK


def cmd_haar_search(args) -> int:
    state = parse_state_spec(args.state)
    rec = sweeps.haar_search(state, args.trials, args.seed, label=args.state)
    _emit(_dump_json(sweeps.record_dict(rec)), args.out)
    return EXIT_OK


def cmd_classify(args) -> int:
    state = parse_state_spec(args.state)
    rec = qfi.classification_record(state, args.state)
    if args.unitary:
        e = parse_unitary_spec(args.unitary)
        res = cfi.tr_inv_precision(state, e)
        rec["unitary"] = args.unitary
        rec["tr_inv_cfi"] = res.tr_inv
        rec["cfi_flag"] = res.flag
    _emit(_dump_json(rec), args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    report = verify.run(args.scope, args.seed, args.trials)
    _emit(_dump_json(report), args.out)
    return EXIT_OK if all(v["passed"] for v in report.values()) else EXIT_VERIFY


def cmd_bounds(args) -> int:
    n = parse_state_spec(args.state).n if args.state else args.n
    if n is None or n < 1:
        raise Su2FisherError("bounds needs --n >= 1 or --state")
    rows = [qfi.optimal_bound(p, n) for p in qfi.PROTOCOLS]
    if args.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["protocol", "n", "exact", "value"])
        for r in rows:
            w.writerow([r.protocol, r.n, str(r.value), repr(float(r.value))])
        _emit(buf.getvalue(), args.out)
    else:
        _emit(_dump_json([{"protocol": r.protocol, "n": r.n, "exact": str(r.value), "value": float(r.value)} for r in rows]), args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="su2fisher", description="Fisher-information tools for two-mode SU(2) estimation.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("path-scan", help="precision along one of the five paths through u_min")
    p.add_argument("--state", required=True, help="noon:N | hb:N | fock:M,N | yurke:N | custom:c0,...")
    p.add_argument("--path", type=int, required=True, choices=range(1, 6))
    p.add_argument("--grid-step", type=float, default=0.005)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out")
    p.set_defaults(func=cmd_path_scan)

    p = sub.add_parser("haar-search", help="minimum precision over Haar-random unitaries")
    p.add_argument("--state", required=True)
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=("json",), default="json")
    p.add_argument("--out")
    p.set_defaults(func=cmd_haar_search)

    p = sub.add_parser("classify", help="saturation/optimality, QFI precision and bounds for a state")
    p.add_argument("--state", required=True)
    p.add_argument("--unitary", help="euler:p1,p2,p3 | abcd:a,b,c,d; adds photon-counting precision there")
    p.add_argument("--format", choices=("json",), default="json")
    p.add_argument("--out")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("verify", help="run self-check suites")
    p.add_argument("--scope", choices=("all",) + verify.SCOPES, default="all")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int, default=100_000, help="samples per uniqueness search")
    p.add_argument("--format", choices=("json",), default="json")
    p.add_argument("--out")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("bounds", help="optimal tr(I^-1) for each protocol")
    p.add_argument("--n", type=int)
    p.add_argument("--state")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out")
    p.set_defaults(func=cmd_bounds)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (Su2FisherError, ValueError) as exc:
        print(f"su2fisher: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"su2fisher: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
