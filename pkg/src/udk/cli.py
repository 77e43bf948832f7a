"""Command-line front end: ``udk {gen,disc,refine,khodak,fractal,qmc,experiment}``.

Exit codes: 0 success, 1 other library error, 2 invalid input,
3 budget exceeded, 4 experiment failed.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import re
import sys
from fractions import Fraction
from typing import Sequence

from . import discrepancy, fractal, khodak, qmc, refine, sequences
from .errors import BudgetExceeded, ParseError, TooLarge, UdkError, ValidationError
from .experiments import EXPERIMENTS, SCHEMA, run_experiment

_FRACTION = re.compile(r"\s*([+-]?\d+)(?:/(\d+))?\s*$")
_DECIMAL = re.compile(r"\s*[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?\s*$")


def _split_tokens(text: str, offset: int = 0):
    """(token, start position) pairs of a comma-separated list."""
    position = offset
    for token in text.split(","):
        yield token, position
        position += len(token) + 1


def parse_fraction(token: str, text: str | None = None, position: int = 0) -> Fraction:
    match = _FRACTION.match(token)
    if not match:
        raise ParseError(text if text is not None else token, position, f"expected p/q, got {token!r}")
    numerator, denominator = int(match.group(1)), int(match.group(2) or 1)
    if denominator == 0:
        raise ParseError(text if text is not None else token, position, "zero denominator")
    return Fraction(numerator, denominator)


def parse_int_list(text: str, offset: int = 0, full: str | None = None) -> list[int]:
    out = []
    for token, position in _split_tokens(text, offset):
        if not re.fullmatch(r"\s*\d+\s*", token):
            raise ParseError(full or text, position, f"expected a positive integer, got {token!r}")
        out.append(int(token))
    return out


def parse_fraction_list(text: str, offset: int = 0, full: str | None = None) -> list[Fraction]:
    return [parse_fraction(token, full or text, position) for token, position in _split_tokens(text, offset)]


def parse_rho(spec: str) -> refine.RefinementRule:
    """``p1,p2,...`` (exact fractions summing to 1), ``ls:L,S`` or ``pisot:a1,a2,...``."""
    text = spec.strip()
    if text.startswith("ls:"):
        values = parse_int_list(text[3:], 3, text)
        if len(values) != 2:
            raise ParseError(text, 3, "ls needs exactly two integers L,S")
        return refine.ls_rule(*values)
    if text.startswith("pisot:"):
        return refine.pisot_rule(parse_int_list(text[6:], 6, text))
    if not text:
        raise ParseError(spec, 0, "empty rule")
    return refine.RefinementRule.rational(parse_fraction_list(text))


def parse_real(token: str):
    """Exact Fraction for p/q or integers; float for decimal notation."""
    if _FRACTION.match(token):
        return parse_fraction(token)
    if _DECIMAL.match(token):
        return float(token)
    raise ParseError(token, 0, f"expected a number, got {token!r}")


def format_value(value, fmt: str) -> str:
    if fmt == "frac":
        if isinstance(value, (Fraction, int)):
            value = Fraction(value)
            return str(value.numerator) if value.denominator == 1 else f"{value.numerator}/{value.denominator}"
        return repr(float(value))
    return format(float(value), ".17g")


def parse_cell(cell: str):
    cell = cell.strip()
    if "/" in cell or _FRACTION.match(cell):
        return parse_fraction(cell)
    try:
        return float(cell)
    except ValueError:
        raise ParseError(cell, 0, "not a number") from None


def read_points(stream, dim: int | None = None) -> sequences.PointSet:
    rows = []
    for line_number, row in enumerate(csv.reader(stream), start=1):
        if not row or row[0].lstrip().startswith("#"):
            continue
        try:
            rows.append(tuple(parse_cell(c) for c in row))
        except ParseError:
            raise ParseError(",".join(row), line_number, "bad number on line") from None
    if not rows:
        raise ValidationError("no points in input")
    if dim is not None and any(len(r) != dim for r in rows):
        raise ValidationError(f"every row must have {dim} columns")
    return sequences.PointSet.from_points(rows)


def _emit_json(payload: dict, out) -> None:
    out.write(json.dumps({"schema": SCHEMA, **payload}, allow_nan=False) + "\n")


def _json_number(value):
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return float(value)


def _exact_text(value):
    if isinstance(value, Fraction):
        return format_value(value, "frac")
    return None


def _write_points(ps: sequences.PointSet, fmt: str, out) -> None:
    if fmt == "json":
        _emit_json({"dim": ps.dim, "points": [[float(c) for c in p] for p in ps]}, out)
        return
    writer = csv.writer(out, lineterminator="\n")
    for p in ps:
        writer.writerow([format_value(c, fmt) for c in p])


def _rule_from_args(args) -> refine.RefinementRule:
    chosen = [x for x in (args.rho, args.ls, args.pisot, getattr(args, "alpha", None)) if x is not None]
    if len(chosen) != 1:
        raise ValidationError("give exactly one of --rho, --ls, --pisot" + (", --alpha" if hasattr(args, "alpha") else ""))
    if args.rho is not None:
        return parse_rho(args.rho)
    if args.ls is not None:
        return parse_rho("ls:" + args.ls)
    if args.pisot is not None:
        return parse_rho("pisot:" + args.pisot)
    return refine.alpha_rule(parse_real(args.alpha))


def _add_rule_flags(parser, alpha: bool = False) -> None:
    parser.add_argument("--rho", help="exact fractions, e.g. 1/4,1/4,1/2, or ls:L,S / pisot:a1,...")
    parser.add_argument("--ls", help="L,S")
    parser.add_argument("--pisot", help="a1,a2,...")
    if alpha:
        parser.add_argument("--alpha", help="p/q for exact splitting, a decimal for floating point")


def cmd_gen(args, out) -> int:
    if args.kind == "vdc":
        count = args.count + (1 if args.skip_zero else 0)
        ps = sequences.van_der_corput(count, args.base)
        if args.skip_zero:
            ps = sequences.PointSet(1, ps.points[1:])
    elif args.kind in ("halton", "hammersley"):
        bases = parse_int_list(args.bases) if args.bases else [2, 3]
        builder = sequences.halton if args.kind == "halton" else sequences.hammersley
        ps = builder(args.count, bases)
    else:
        if not args.theta:
            raise ValidationError("kronecker needs --theta")
        ps = sequences.kronecker(args.count, [float(t) for t in args.theta.split(",")])
    _write_points(ps, args.format, out)
    return 0


def cmd_disc(args, out) -> int:
    if args.input == "-":
        stream = sys.stdin
        ps = read_points(stream, args.dim)
    else:
        with open(args.input, encoding="utf-8") as stream:
            ps = read_points(stream, args.dim)
    if args.kind == "partition":
        value = discrepancy.partition_discrepancy([p[0] for p in ps], exact=ps.is_exact())
    elif args.kind == "extreme":
        value = discrepancy.extreme_discrepancy_1d(ps, exact=ps.is_exact())
    elif ps.dim == 1:
        value = discrepancy.star_discrepancy_1d(ps, exact=ps.is_exact())
    else:
        value = discrepancy.star_discrepancy_dd(ps, max_n=args.max_n, exact=ps.is_exact())
    payload = {"n": len(ps), "value": float(value)}
    if _exact_text(value):
        payload["exact"] = _exact_text(value)
    _emit_json(payload, out)
    return 0


def _step_record(part) -> dict:
    return {
        "n": part.step,
        "k": part.k,
        "A_n": float(part.max_length),
        "a_n": float(part.min_length),
        "D_n": float(part.discrepancy()),
    }


def cmd_refine(args, out) -> int:
    rule = _rule_from_args(args)
    if args.emit == "breaks":
        part = refine.rho_refine_n(rule, args.steps)
        writer = csv.writer(out, lineterminator="\n")
        if rule.structure == refine.RATIONAL:
            values = part.breaks()
        else:
            values = part.breaks_float().tolist()
        for b in values:
            writer.writerow([format_value(b, args.format)])
        return 0
    steps = []
    for part in refine.rho_refine_steps(rule, args.steps):
        steps.append({"n": part.step, "k": part.k} if args.emit == "counts" else _step_record(part))
    _emit_json({"rule": rule.label or [str(p) for p in rule.probs], "steps": steps}, out)
    return 0


def cmd_khodak(args, out) -> int:
    if args.action == "zeros":
        p = parse_real(args.p)
        zeros = khodak.dirichlet_zeros(p, args.boxes)
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["k", "Re", "Im"])
        for z in zeros:
            writer.writerow([z.box, format(z.s.real, ".17g"), format(z.s.imag, ".17g")])
        return 0
    rule = _rule_from_args(args)
    if args.action == "analyze":
        _emit_json(khodak.spectral_analysis(rule).as_dict(), out)
        return 0
    r = parse_real(args.r)
    m_r = khodak.m_of_r(rule, r)
    payload = {"r": float(r), "M_r": m_r, "prediction": None, "rel_error": None}
    if khodak.detect_rational_relation(rule) is not None:
        sd = khodak.spectral_analysis(rule)
        prediction = khodak.predicted_mr_rational(sd, rule.m, r)
        payload["prediction"] = prediction
        payload["rel_error"] = abs(m_r - prediction) / m_r
    _emit_json(payload, out)
    return 0


def _system_from_args(args) -> fractal.IFSSystem:
    if getattr(args, "ratios", None):
        return fractal.line_system(parse_fraction_list(args.ratios))
    return fractal.preset(args.preset)


def cmd_fractal(args, out) -> int:
    if args.action == "partition":
        if not args.ratios and not args.preset:
            raise ValidationError("give --ratios or --preset")
        system = _system_from_args(args)
        fp = fractal.khodak_fractal_partition(system, args.steps)
        depth = args.depth or fractal.default_partition_depth(fp.letter_probs, len(fp))
        value = fractal.elementary_discrepancy_partition(fp, depth)
        _emit_json(
            {
                "k": len(fp),
                "dimension": fractal.moran_dimension(system.ratios),
                "depth": depth,
                "discrepancy": value,
                "sets": [{"address": str(w), "probability": p} for w, p in zip(fp.words, fp.probabilities)],
            },
            out,
        )
        return 0
    system = fractal.preset(args.preset)
    fp = fractal.vdc_fractal_points(system, args.points)
    if args.action == "gen":
        writer = csv.writer(out, lineterminator="\n")
        for point, word in zip(fp.points, fp.words):
            row = [str(word)]
            if args.coords:
                row = [format_value(c, args.format) for c in point] + row
            writer.writerow(row)
        return 0
    depth = args.depth or fractal.default_point_depth(system.m, args.points)
    value = fractal.elementary_discrepancy_points(fp, args.points, depth, exact=True)
    _emit_json(
        {"n": args.points, "depth": depth, "value": float(value), "n_times_value": float(value * args.points)},
        out,
    )
    return 0


def _reordered_kakutani(count: int, seed: int) -> sequences.PointSet:
    blocks, total, step = [], 0, 1
    rule = refine.alpha_rule(Fraction(1, 2))
    while total < count:
        blocks.append(refine.rho_refine_n(rule, step).breaks())
        total += len(blocks[-1])
        step += 1
    return qmc.sequential_random_reordering(blocks, seed).take(count)


def cmd_qmc(args, out) -> int:
    integrand = qmc.INTEGRANDS[args.integrand]
    if args.sequence == "vdc":
        ps = sequences.van_der_corput(args.count)
    elif args.sequence == "halton":
        bases = parse_int_list(args.bases) if args.bases else [2, 3, 5][: integrand.dim]
        ps = sequences.halton(args.count, bases)
    else:
        ps = _reordered_kakutani(args.count, args.seed)
    report = qmc.koksma_hlawka_check(ps, integrand)
    _emit_json({"sequence": args.sequence, "integrand": integrand.name, "count": args.count, **report.as_dict()}, out)
    return 0


def cmd_experiment(args, out) -> int:
    report = run_experiment(args.name, args.out)
    _emit_json({"experiment": args.name, "passed": report["passed"], "out": str(args.out)}, out)
    return 0 if report["passed"] else 4


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="udk", description="Uniformly distributed sequences, partitions and their discrepancy.")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate low-discrepancy points")
    gen.add_argument("kind", choices=["vdc", "halton", "hammersley", "kronecker"])
    gen.add_argument("--count", type=int, required=True)
    gen.add_argument("--base", type=int, default=2)
    gen.add_argument("--bases")
    gen.add_argument("--theta")
    gen.add_argument("--skip-zero", action="store_true", help="drop the leading 0 of the vdc sequence")
    gen.add_argument("--format", choices=["csv", "json", "frac"], default="csv")
    gen.set_defaults(handler=cmd_gen)

    disc = sub.add_parser("disc", help="discrepancy of points read from CSV")
    disc.add_argument("kind", choices=["star", "extreme", "partition"])
    disc.add_argument("--input", default="-")
    disc.add_argument("--dim", type=int)
    disc.add_argument("--max-n", type=int, help="raise the size cap of the multi-dimensional routine")
    disc.set_defaults(handler=cmd_disc)

    ref = sub.add_parser("refine", help="iterate a splitting rule")
    _add_rule_flags(ref, alpha=True)
    ref.add_argument("--steps", type=int, required=True)
    ref.add_argument("--emit", choices=["breaks", "counts", "disc"], default="disc")
    ref.add_argument("--format", choices=["csv", "frac"], default="csv")
    ref.set_defaults(handler=cmd_refine)

    kh = sub.add_parser("khodak", help="Khodak tree counts, spectral data and zeros")
    kh_sub = kh.add_subparsers(dest="action", required=True)
    analyze = kh_sub.add_parser("analyze")
    _add_rule_flags(analyze)
    count = kh_sub.add_parser("count")
    _add_rule_flags(count, alpha=True)
    count.add_argument("--r", required=True)
    zeros = kh_sub.add_parser("zeros")
    zeros.add_argument("--p", required=True)
    zeros.add_argument("--boxes", type=int, default=50)
    kh.set_defaults(handler=cmd_khodak)

    fr = sub.add_parser("fractal", help="IFS point sequences and partitions")
    fr_sub = fr.add_subparsers(dest="action", required=True)
    fgen = fr_sub.add_parser("gen")
    fgen.add_argument("--preset", required=True)
    fgen.add_argument("--points", type=int, required=True)
    fgen.add_argument("--coords", action="store_true")
    fgen.add_argument("--format", choices=["csv", "frac"], default="csv")
    fdisc = fr_sub.add_parser("disc")
    fdisc.add_argument("--preset", required=True)
    fdisc.add_argument("--points", type=int, required=True)
    fdisc.add_argument("--depth", type=int)
    fpart = fr_sub.add_parser("partition")
    fpart.add_argument("--ratios")
    fpart.add_argument("--preset")
    fpart.add_argument("--steps", type=int, required=True)
    fpart.add_argument("--depth", type=int)
    fr.set_defaults(handler=cmd_fractal)

    qm = sub.add_parser("qmc", help="integrate a test function and check Koksma-Hlawka")
    qm.add_argument("--sequence", choices=["vdc", "halton", "reorder"], required=True)
    qm.add_argument("--integrand", choices=sorted(qmc.INTEGRANDS), required=True)
    qm.add_argument("--count", type=int, required=True)
    qm.add_argument("--seed", type=int, default=0)
    qm.add_argument("--bases")
    qm.set_defaults(handler=cmd_qmc)

    ex = sub.add_parser("experiment", help="regenerate a reference table")
    ex.add_argument("name", help="one of: " + ", ".join(EXPERIMENTS))
    ex.add_argument("--out", default="results")
    ex.set_defaults(handler=cmd_experiment)
    return parser


def main(argv: Sequence[str] | None = None, out=None) -> int:
    out = sys.stdout if out is None else out
    args = build_parser().parse_args(argv)
    try:
        return args.handler(args, out)
    except ValidationError as exc:
        print(f"udk: {exc}", file=sys.stderr)
        return 2
    except (BudgetExceeded, TooLarge) as exc:
        print(f"udk: {exc}", file=sys.stderr)
        return 3
    except UdkError as exc:
        print(f"udk: {exc}", file=sys.stderr)
        return 1


def run(argv: Sequence[str]) -> tuple[int, str]:
    """Run the CLI in-process and capture standard output."""
    buffer = io.StringIO()
    code = main(argv, buffer)
    return code, buffer.getvalue()


if __name__ == "__main__":
    sys.exit(main())
