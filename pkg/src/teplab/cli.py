"""Command line front end.

    teplab analyze --spec prior.json
    teplab analyze --family broome --index 6
    teplab sweep --family log_grid_uniform --from 4 --to 64 --out sweep.csv
    teplab cover --x 3 --y 7 --probe uniform:0:10 --n 1000000 --seed 1
    teplab broome --K 40 --n 1000000 --seed 1

Exit codes: 0 on success, 2 for bad input, 3 if a theorem check fails.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction
from pathlib import Path
from typing import Any, Sequence

from .asymptotics import SWEEP_COLUMNS, FAMILY_KINDS, PriorFamily, family_member, sweep_row
from .dist import (
    DiscreteDist,
    Dist,
    DistributionError,
    StepDensityDist,
    as_fraction,
    dist_from_json,
    fmt_decimal,
    fmt_exact,
)
from .model import build, conditional_table, philosopher_decomposition
from .order import TheoremViolation, certify, check_nonindependence, monotone_gap
from .strategies import SeededSampler, broome_truncation_experiment, cover_experiment

EXIT_OK, EXIT_INPUT, EXIT_THEOREM = 0, 2, 3


class InputError(ValueError):
    pass


def _log(msg: str) -> None:
    print(msg, file=sys.stderr)


def _parse_params(items: Sequence[str]) -> dict[str, Any]:
    out: dict[str, Any] = {}
    for item in items:
        key, sep, value = item.partition("=")
        if not sep or not key:
            raise InputError(f"--param expects KEY=VALUE, got {item!r}")
        out[key] = value
    return out


def load_spec(obj: Any) -> Dist:
    """A distribution JSON object, or ``{"kind": "family", "family", "index", "params"}``."""
    if isinstance(obj, dict) and obj.get("kind") == "family":
        try:
            fam = PriorFamily(obj["family"], dict(obj.get("params", {})))
            return family_member(fam, int(obj["index"]))
        except (KeyError, TypeError) as exc:
            raise InputError(f"bad family spec: {exc}") from exc
    return dist_from_json(obj)


def parse_probe(text: str) -> Dist:
    """``uniform:LO:HI``, ``point:T`` or a path to a distribution JSON file."""
    kind, _, rest = text.partition(":")
    if kind == "uniform":
        lo, _, hi = rest.partition(":")
        return StepDensityDist.uniform(as_fraction(lo), as_fraction(hi))
    if kind == "point":
        return DiscreteDist.point(as_fraction(rest))
    return load_spec(_read_json(text))


def _read_json(path: str) -> Any:
    try:
        return json.loads(Path(path).read_text())
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path} is not valid JSON: {exc}") from exc


def _write(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _json_text(obj: Any) -> str:
    return json.dumps(obj, indent=2) + "\n"


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def cmd_analyze(args: argparse.Namespace) -> str:
    if args.spec:
        prior = load_spec(_read_json(args.spec))
    elif args.family:
        if args.index is None:
            raise InputError("--family needs --index")
        prior = family_member(PriorFamily(args.family, _parse_params(args.param)), args.index)
    else:
        raise InputError("analyze needs --spec or --family")
    j = build(prior)
    digits = args.decimal_digits
    rows = []
    for r in conditional_table(j, [as_fraction(a) for a in args.at]):
        rows.append(
            {
                "a": fmt_exact(r.a),
                "p_delta1": fmt_exact(r.p_delta1),
                "p_a_less_b": fmt_exact(r.p_a_less_b),
                "e_b_given_a": fmt_exact(r.e_b_given_a),
                "e_b_given_a_dec": fmt_decimal(r.e_b_given_a, digits),
                "classification": r.classification.value,
            }
        )
    larger, smaller, total = philosopher_decomposition(j)
    cert = certify(j)
    low, mid, high = monotone_gap(j)
    report = {
        "kind": j.kind,
        "rows": rows,
        "philosopher": {
            "e_given_larger": fmt_exact(larger),
            "e_given_smaller": fmt_exact(smaller),
            "total": fmt_exact(total),
        },
        "certificates": {
            "nonindependence_tv": fmt_exact(check_nonindependence(j)),
            "stochastic_order_ok": cert.stochastic_order_ok,
            "strict_witness_a": fmt_exact(cert.strict_witness_a),
            "orthant_ok": cert.orthant_ok,
            "orthant_strict_witness": [
                fmt_exact(cert.orthant_strict_witness[0]),
                cert.orthant_strict_witness[1],
            ],
            "avg_ordering_violations": [fmt_exact(a) for a in cert.avg_ordering_violations],
            "identity_gap": [fmt_exact(low), fmt_exact(mid), fmt_exact(high)],
        },
    }
    return _json_text(report)


def _cell(x: Fraction | float | int) -> str:
    if isinstance(x, float):
        return fmt_decimal(x)
    return fmt_exact(x)


def cmd_sweep(args: argparse.Namespace) -> str:
    if not args.family:
        raise InputError("sweep needs --family")
    fam = PriorFamily(args.family, _parse_params(args.param))
    decimal_cols = [c for c in SWEEP_COLUMNS if c not in ("family", "index")]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(list(SWEEP_COLUMNS) + [f"{c}_dec" for c in decimal_cols])
    for index in range(args.from_, args.to + 1):
        _log(f"sweep {fam.kind} index {index}")
        row = sweep_row(
            fam,
            index,
            eps=args.eps,
            delta=args.delta,
            alpha1=args.alpha1,
            alpha2=args.alpha2,
            m_max=args.m_max,
        )
        exact = [row.family, str(row.index)] + [_cell(getattr(row, c)) for c in decimal_cols]
        dec = [fmt_decimal(getattr(row, c), args.decimal_digits) for c in decimal_cols]
        writer.writerow(exact + dec)
    return buf.getvalue()


def cmd_cover(args: argparse.Namespace) -> str:
    if args.n < 1:
        raise InputError("--n must be >= 1")
    probe = parse_probe(args.probe)
    report = cover_experiment(
        as_fraction(args.x), as_fraction(args.y), probe, args.n, SeededSampler(args.seed), args.workers
    )
    report["params"]["probe"] = args.probe
    return _json_text(report)


def cmd_broome(args: argparse.Namespace) -> str:
    if args.K < 10:
        raise InputError("--K must be >= 10")
    if args.n < 1000:
        raise InputError("--n must be >= 1000")
    report = broome_truncation_experiment(
        args.K, args.n, args.delta, SeededSampler(args.seed), workers=args.workers
    )
    return _json_text(report)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="teplab", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--out", help="output file (default stdout)")
        p.add_argument("--decimal-digits", type=int, default=15)

    def fraction(text: str) -> Fraction:
        try:
            return as_fraction(text)
        except (DistributionError, ZeroDivisionError) as exc:
            raise argparse.ArgumentTypeError(str(exc)) from exc

    p = sub.add_parser("analyze", help="conditional table and order certificates for one prior")
    p.add_argument("--spec", help="distribution JSON file")
    p.add_argument("--family", choices=FAMILY_KINDS)
    p.add_argument("--index", type=int)
    p.add_argument("--param", action="append", default=[], metavar="KEY=VALUE")
    p.add_argument("--at", action="append", default=[], type=fraction, help="extra query point")
    common(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("sweep", help="CSV of asymptotic statistics over a family")
    p.add_argument("--family", choices=FAMILY_KINDS)
    p.add_argument("--param", action="append", default=[], metavar="KEY=VALUE")
    p.add_argument("--from", dest="from_", type=int, default=4)
    p.add_argument("--to", type=int, default=64)
    p.add_argument("--eps", type=fraction, default=Fraction(1, 8))
    p.add_argument("--delta", type=fraction, default=Fraction(1, 100))
    p.add_argument("--alpha1", type=fraction, default=Fraction(1, 2))
    p.add_argument("--alpha2", type=fraction, default=Fraction(1, 4))
    p.add_argument("--m-max", type=int, default=8)
    common(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("cover", help="randomized probe in the two-number guessing game")
    p.add_argument("--x", type=fraction, required=True)
    p.add_argument("--y", type=fraction, required=True)
    p.add_argument("--probe", default="uniform:0:10")
    p.add_argument("--n", type=int, default=10**6)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--workers", type=int, default=1)
    common(p)
    p.set_defaults(func=cmd_cover)

    p = sub.add_parser("broome", help="truncated heavy-tail prior: sample mean vs expectation")
    p.add_argument("--K", type=int, default=40)
    p.add_argument("--n", type=int, default=10**6)
    p.add_argument("--delta", type=fraction, default=Fraction(1, 100))
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--workers", type=int, default=1)
    common(p)
    p.set_defaults(func=cmd_broome)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        text = args.func(args)
    except TheoremViolation as exc:
        _log(f"theorem check failed: {exc}")
        return EXIT_THEOREM
    except (ValueError, TypeError, ZeroDivisionError) as exc:
        _log(f"error: {exc}")
        return EXIT_INPUT
    _write(text, args.out)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
