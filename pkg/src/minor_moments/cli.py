"""Command line interface.

Each subcommand is a thin shell over exactly one library operation.  Scalars
print with 17 significant digits; structured results print as JSON; matrix
results print as CSV.  Exit codes: 0 success, 1 usage error (bad flags, bad
CSV, dimension mismatch), 2 numerical failure (singular or non-positive
definite input).
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from .constraints import sample_cm_cov
from .errors import NumericalError
from .general_moments import (
    cov_compound_general,
    cross_moment_general,
    e_minor_general,
    variance_breakdown,
)
from .indexing import as_index_seq
from .linalg import compound, format_matrix_csv, load_matrix_csv
from .minor_test import SampleInput, standardized_minor_test
from .oracle import DEFAULT_CHUNK_SIZE, mc_minor_moments
from .sampling import RngStream, WishartSpec
from .standard_moments import cov_compound_std, cross_moment_std, e_minor_std


class UsageError(Exception):
    """Bad command line input; reported on stderr with exit code 1."""


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:
        raise UsageError(f"{self.prog}: {message}")


def _scalar(value: float) -> str:
    return "%.17g" % float(value)


def _ints(text: str, flag: str) -> tuple[int, ...]:
    try:
        return tuple(int(part) for part in text.split(","))
    except ValueError:
        raise UsageError(f"{flag} expects comma-separated integers, got {text!r}")


def _load_csv(path: str, flag: str) -> np.ndarray:
    try:
        return load_matrix_csv(path)
    except OSError as exc:
        raise UsageError(f"{flag}: cannot read {path}: {exc.strerror or exc}")
    except ValueError as exc:
        raise UsageError(f"{flag}: {exc}")


def _scale_arg(args: argparse.Namespace) -> tuple[np.ndarray, bool]:
    """The scale matrix plus whether it is the --identity shorthand."""
    if args.identity is not None:
        if args.identity < 1:
            raise UsageError("--identity expects a positive dimension")
        return np.eye(args.identity), True
    return _load_csv(args.matrix, "--matrix"), False


def _sigma_arg(text: str) -> np.ndarray:
    if text.startswith("identity:"):
        try:
            r = int(text.split(":", 1)[1])
        except ValueError:
            raise UsageError(f"--sigma: bad identity size in {text!r}")
        if r < 1:
            raise UsageError("--sigma: identity size must be positive")
        return np.eye(r)
    return _load_csv(text, "--sigma")


def _parse_minor(text: str, flag: str) -> tuple[tuple[int, ...], tuple[int, ...]]:
    parts = text.split("|")
    if len(parts) != 2:
        raise UsageError(f"{flag}: a minor is 'rows|cols', got {text!r}")
    return _ints(parts[0], flag), _ints(parts[1], flag)


def _parse_targets(specs: list[str]) -> list[tuple]:
    """Targets: 'I|J' for a first moment, 'I|J;K|L' for a product moment,
    several targets separated by whitespace or repeated --pairs flags."""
    targets: list[tuple] = []
    for spec in specs:
        for word in spec.split():
            minors = [_parse_minor(part, "--pairs") for part in word.split(";")]
            if len(minors) == 1:
                targets.append(minors[0])
            elif len(minors) == 2:
                targets.append(minors[0] + minors[1])
            else:
                raise UsageError(
                    f"--pairs: a target has one or two minors, got {word!r}"
                )
    if not targets:
        raise UsageError("--pairs: no targets given")
    return targets


def _add_scale_flags(sub: argparse.ArgumentParser) -> None:
    group = sub.add_mutually_exclusive_group(required=True)
    group.add_argument("--identity", type=int, metavar="R",
                       help="use the R x R identity scale")
    group.add_argument("--matrix", metavar="PATH",
                       help="CSV file with the scale matrix")


def _cmd_moment(args: argparse.Namespace) -> None:
    rows, cols = _ints(args.rows, "--rows"), _ints(args.cols, "--cols")
    sigma, is_identity = _scale_arg(args)
    r = sigma.shape[0]
    if is_identity:
        value = e_minor_std(args.df, as_index_seq(rows, r), as_index_seq(cols, r))
    else:
        value = e_minor_general(args.df, sigma, rows, cols)
    print(_scalar(value))


def _cmd_cross_moment(args: argparse.Namespace) -> None:
    seqs = [
        _ints(getattr(args, name), "--" + name)
        for name in ("rows1", "cols1", "rows2", "cols2")
    ]
    sigma, is_identity = _scale_arg(args)
    r = sigma.shape[0]
    if is_identity:
        coerced = [as_index_seq(s, r) for s in seqs]
        value = cross_moment_std(args.df, *coerced)
    else:
        value = cross_moment_general(args.df, sigma, *seqs)
    print(_scalar(value))


def _cmd_cov_compound(args: argparse.Namespace) -> None:
    sigma, is_identity = _scale_arg(args)
    if is_identity:
        cov = cov_compound_std(args.df, sigma.shape[0], args.order)
        table = cov.pair_table()
    else:
        cov = cov_compound_general(args.df, sigma, args.order)
        table = cov.table
    labels = cov.pair_labels()
    if args.format == "json":
        print(json.dumps({"labels": labels, "values": table.tolist()}))
    else:
        quoted = [f'"{label}"' for label in labels]
        print(format_matrix_csv(table, row_labels=quoted, col_labels=quoted), end="")


def _cmd_var(args: argparse.Namespace) -> None:
    rows, cols = _ints(args.rows, "--rows"), _ints(args.cols, "--cols")
    sigma, _ = _scale_arg(args)
    breakdown = variance_breakdown(args.df, sigma, rows, cols)
    print(
        json.dumps(
            {
                "total": breakdown.total,
                "conditional_mean_part": breakdown.conditional_mean_part,
                "conditional_var_part": breakdown.conditional_var_part,
                "formula": breakdown.formula,
            }
        )
    )


def _cmd_test(args: argparse.Namespace) -> None:
    rows, cols = _ints(args.rows, "--rows"), _ints(args.cols, "--cols")
    matrix = _load_csv(args.data, "--data")
    sample = SampleInput(
        matrix=matrix,
        sample_size=args.n,
        df=args.df,
        is_correlation=args.correlation,
    )
    report = standardized_minor_test(
        sample,
        rows,
        cols,
        drop_null_term=not args.keep_null_term,
        allow_overlap=args.allow_overlap,
    )
    print(json.dumps(report.to_dict()))


def _cmd_simulate(args: argparse.Namespace) -> None:
    out = Path(args.out)
    if out.suffix == ".json":
        raise UsageError("--out: use a non-.json path; the sidecar takes .json")
    rng = RngStream(args.seed, args.stream)
    draw = sample_cm_cov(
        args.order, rng, lambda_spread=args.lambda_spread,
        omega_spread=args.omega_spread,
    )
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(format_matrix_csv(draw.sigma.values), encoding="utf-8")
    sidecar = {
        "model": args.model,
        "order": args.order,
        "dim": 2 * args.order,
        "seed": args.seed,
        "stream": args.stream,
        "lambda_spread": args.lambda_spread,
        "omega_spread": args.omega_spread,
        "vanishing_rows": list(draw.vanishing_rows),
        "vanishing_cols": list(draw.vanishing_cols),
        "matrix_csv": str(out),
    }
    out.with_suffix(".json").write_text(
        json.dumps(sidecar, indent=2) + "\n", encoding="utf-8"
    )
    print(json.dumps(sidecar))


def _cmd_oracle(args: argparse.Namespace) -> None:
    sigma = _sigma_arg(args.sigma)
    spec = WishartSpec(args.df, sigma)
    targets = _parse_targets(args.pairs)
    estimates = mc_minor_moments(
        spec,
        targets,
        args.reps,
        RngStream(args.seed, args.stream),
        chunk_size=args.chunk_size,
        threads=args.threads,
    )
    print(json.dumps([asdict(e) for e in estimates]))


def _cmd_compound(args: argparse.Namespace) -> None:
    matrix = _load_csv(args.matrix, "--matrix")
    result = compound(matrix, args.order)
    if args.format == "json":
        print(json.dumps(result.values.tolist()))
    else:
        print(format_matrix_csv(result.values), end="")


def build_parser() -> _Parser:
    parser = _Parser(
        prog="minor-moments",
        description="Moments of minors of Wishart matrices: formulas, "
        "hypothesis tests, simulation, and a Monte Carlo oracle.",
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("moment", help="expected value of one minor")
    p.add_argument("--df", type=int, required=True, help="degrees of freedom")
    _add_scale_flags(p)
    p.add_argument("--rows", required=True, help="row indices, e.g. 1,2")
    p.add_argument("--cols", required=True, help="column indices, e.g. 1,2")
    p.set_defaults(handler=_cmd_moment)

    p = sub.add_parser("cross-moment", help="expected product of two minors")
    p.add_argument("--df", type=int, required=True)
    _add_scale_flags(p)
    for name in ("rows1", "cols1", "rows2", "cols2"):
        p.add_argument(f"--{name}", required=True)
    p.set_defaults(handler=_cmd_cross_moment)

    p = sub.add_parser("cov-compound", help="covariance table of all m x m minors")
    p.add_argument("--df", type=int, required=True)
    _add_scale_flags(p)
    p.add_argument("--order", type=int, required=True, help="minor size m")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(handler=_cmd_cov_compound)

    p = sub.add_parser("var", help="variance of one minor, with breakdown")
    p.add_argument("--df", type=int, required=True)
    _add_scale_flags(p)
    p.add_argument("--rows", required=True)
    p.add_argument("--cols", required=True)
    p.set_defaults(handler=_cmd_var)

    p = sub.add_parser("test", help="standardized-minor test on a sample matrix")
    p.add_argument("--data", required=True, metavar="PATH",
                   help="CSV file with the sample covariance or correlation")
    p.add_argument("--n", type=int, required=True, help="sample size")
    p.add_argument("--df", type=int, default=None,
                   help="degrees of freedom (default: n - 1)")
    p.add_argument("--rows", required=True)
    p.add_argument("--cols", required=True)
    p.add_argument("--correlation", action="store_true",
                   help="input is a correlation matrix")
    p.add_argument("--keep-null-term", action="store_true",
                   help="keep the variance term that vanishes under the null")
    p.add_argument("--allow-overlap", action="store_true",
                   help="permit overlapping row and column sets")
    p.set_defaults(handler=_cmd_test)

    p = sub.add_parser("simulate", help="draw a hidden-factor covariance matrix")
    p.add_argument("--model", choices=("gm", "hidden-factor"), default="gm",
                   help="covariance family; both names select the hidden-factor family")
    p.add_argument("--m", "--order", dest="order", type=int, required=True,
                   help="minor size m; the matrix is 2m x 2m")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--stream", type=int, default=0)
    p.add_argument("--lambda-spread", type=float, default=1.0)
    p.add_argument("--omega-spread", type=float, default=1.0)
    p.add_argument("--out", required=True, metavar="PATH",
                   help="CSV output path; a .json sidecar is written next to it")
    p.set_defaults(handler=_cmd_simulate)

    p = sub.add_parser("oracle", help="Monte Carlo estimates of minor moments")
    p.add_argument("--sigma", required=True, metavar="CSV|identity:R")
    p.add_argument("--df", type=int, required=True)
    p.add_argument("--pairs", required=True, action="append",
                   help="targets like '1,2|1,3' (mean) or '1,2|1,3;2,4|3,4' "
                   "(product); separate several with spaces")
    p.add_argument("--reps", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--stream", type=int, default=0)
    p.add_argument("--chunk-size", type=int, default=DEFAULT_CHUNK_SIZE)
    p.add_argument("--threads", type=int, default=None)
    p.set_defaults(handler=_cmd_oracle)

    p = sub.add_parser("compound", help="compound matrix of all m x m minors")
    p.add_argument("--matrix", required=True, metavar="PATH")
    p.add_argument("--order", type=int, required=True)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(handler=_cmd_compound)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        args.handler(args)
        return 0
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 2
    except np.linalg.LinAlgError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
