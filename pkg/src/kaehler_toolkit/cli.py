from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .config import DEFAULT_TOL, SuiteConfig
from .errors import INPUT_ERRORS, KaehlerToolkitError
from .formfile import load_form
from .reports import Report, export_report
from .suites import check_flat, diagonalize_form, run_example_suite, run_horosphere_suite, run_random_suite

logger = logging.getLogger(__name__)


def _floats(text: str) -> list[float]:
    try:
        return [float(part) for part in text.split(",") if part.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def _dims(text: str) -> tuple[int, int]:
    try:
        n, p = (int(part) for part in text.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected 'n,p', got {text!r}") from exc
    return n, p


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="Flat bilinear forms of Kaehler submanifolds of hyperbolic space")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, default=DEFAULT_TOL)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", help="Directory for exported files")
    common.add_argument("--verbose", action="store_true", help="Log debug output to stderr")

    p_flat = sub.add_parser("check-flat", parents=[common], help="Flatness defect of a stored form")
    p_flat.add_argument("path")

    p_diag = sub.add_parser("diagonalize", parents=[common], help="Diagonalizing basis of a stored α with J")
    p_diag.add_argument("path")

    p_example = sub.add_parser("example-suite", parents=[common], help="Product of umbilical surfaces battery")
    p_example.add_argument("--radii", type=_floats, default=[2.0, 1.0, 2.0**0.5])
    p_example.add_argument("--points", type=_positive, default=10)

    p_horo = sub.add_parser("horosphere-suite", parents=[common], help="Horosphere composition battery")
    p_horo.add_argument("--n", type=int, default=4)
    p_horo.add_argument("--points", type=_positive, default=10)

    p_random = sub.add_parser("random-suite", parents=[common], help="Seeded algebraic identity sweep")
    p_random.add_argument("--trials", type=_positive, default=100)
    p_random.add_argument("--dims", type=_dims, default=(3, 3), help="n,p")
    p_random.add_argument("--corrupt", action="store_true", help="Perturb one β entry (negative control)")

    return parser


def parse_args(argv: list[str] | None = None) -> argparse.Namespace:
    return build_parser().parse_args(argv)


def cmd_check_flat(path: str, tol: float) -> Report:
    return check_flat(load_form(path), tol)


def cmd_diagonalize(path: str, tol: float, seed: int, out: str | None) -> Report:
    return diagonalize_form(load_form(path), seed, tol, out)


def cmd_example_suite(radii: list[float], points: int, tol: float, seed: int, out: str | None) -> Report:
    return run_example_suite(radii, SuiteConfig(tol=tol, seed=seed, points=points), out)


def cmd_horosphere_suite(n: int, points: int, tol: float, seed: int, out: str | None) -> Report:
    return run_horosphere_suite(n, SuiteConfig(tol=tol, seed=seed, points=points), out)


def cmd_random_suite(
    trials: int, seed: int, dims: tuple[int, int], tol: float, corrupt: bool, out: str | None
) -> Report:
    return run_random_suite(dims, SuiteConfig(tol=tol, seed=seed, trials=trials), corrupt, out)


def _dispatch(args: argparse.Namespace) -> Report:
    if args.command == "check-flat":
        return cmd_check_flat(args.path, args.tol)
    if args.command == "diagonalize":
        return cmd_diagonalize(args.path, args.tol, args.seed, args.out)
    if args.command == "example-suite":
        return cmd_example_suite(args.radii, args.points, args.tol, args.seed, args.out)
    if args.command == "horosphere-suite":
        return cmd_horosphere_suite(args.n, args.points, args.tol, args.seed, args.out)
    if args.command == "random-suite":
        return cmd_random_suite(args.trials, args.seed, args.dims, args.tol, args.corrupt, args.out)
    raise ValueError(f"Unknown command: {args.command}")


def main(argv: list[str] | None = None) -> int:
    args = parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        stream=sys.stderr,
        format="%(levelname)s %(name)s: %(message)s",
    )

    try:
        report = _dispatch(args)
    except INPUT_ERRORS as exc:
        logger.warning("input error in %s: %s", args.command, exc)
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except KaehlerToolkitError as exc:
        logger.warning("%s failed: %s", args.command, exc)
        print(f"{args.command}: FAIL")
        print(f"  reason: {type(exc).__name__}: {exc}")
        return 1

    print(report.render())
    if args.out and args.command in ("check-flat", "diagonalize"):
        for key, path in export_report(report, Path(args.out)).items():
            print(f"  {key}: {path}")
    return 0 if report.passed else 1


if __name__ == "__main__":
    raise SystemExit(main())
