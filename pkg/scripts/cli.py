"""Command-line entry point: python -m scripts.cli <command> [flags].

Exit codes: 0 success, 1 verification failure, 2 usage or domain error,
3 resource or search-cap error.
"""

import argparse
import json
import logging
import sys
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, Literal, Optional, Sequence

from pydantic import BaseModel, Field, ValidationError, field_validator

from construction.base import TruncatedSet
from construction.removals import RemovalConstruction
from construction.wd_example import WdConstruction
from core.config import get_settings
from core.exceptions import (
    CapExceededError,
    DensityCertError,
    NeedsFinerEpsilonError,
    RangeExhaustedError,
    ResourceLimitError,
    VerificationError,
)
from core.intervals import Interval, IntervalSet
from core.logging_config import setup_logging
from core.output import atomic_write_text, csv_text
from core.rationals import format_rational, parse_rational, power_of_two, to_decimal_string
from schemas.certificates import RationalField, TruncatedSetModel
from services.certificate_verifier import verify_certificate_file, verify_payload
from services.density import (
    Mode,
    Side,
    density_profile,
    inf_density_over_range,
    max_one_sided_density,
    measure_in,
    one_sided_density,
)
from services.figure import figure_csv
from services.sudt import certify_finite_union, find_non_sudt_witness
from services.verify_suites import SuiteOrchestrator, parse_suite_names, suite_options
from services.witness import SequenceSpec, find_non_udt_witness

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VERIFICATION_FAILED = 1
EXIT_USAGE = 2
EXIT_RESOURCE = 3

CONSTRUCTIONS = {"removal": RemovalConstruction, "wd": WdConstruction}


class CommandConfig(BaseModel):
    """Validated flags shared by every command."""

    epsilon: Optional[RationalField] = None
    output_format: Literal["json", "csv"] = "json"
    out: Optional[Path] = None
    depth: Optional[int] = Field(default=None, ge=0)
    index_cap: Optional[int] = Field(default=None, ge=1)

    @field_validator("epsilon")
    @classmethod
    def positive_epsilon(cls, v: Optional[Fraction]) -> Optional[Fraction]:
        if v is not None and v <= 0:
            raise ValueError("epsilon must be positive")
        return v


class UsageError(DensityCertError):
    """Flags are missing or inconsistent."""

    pass


# ============== HELPERS ==============


def _config(args: argparse.Namespace) -> CommandConfig:
    return CommandConfig(
        epsilon=getattr(args, "epsilon", None),
        output_format=getattr(args, "format", "json"),
        out=getattr(args, "out", None),
        depth=getattr(args, "depth", None),
        index_cap=getattr(args, "index_cap", None),
    )


def _require(args: argparse.Namespace, *names: str) -> None:
    missing = [f"--{n.replace('_', '-')}" for n in names if getattr(args, n, None) is None]
    if missing:
        raise UsageError(f"Missing required flags: {', '.join(missing)}")


def _rational_pair(text: str) -> Interval:
    try:
        lo, hi = text.split(",")
    except ValueError:
        raise UsageError(f"Expected 'lo,hi', got {text!r}")
    return Interval.closed(parse_rational(lo), parse_rational(hi))


def _parse_components(text: str) -> IntervalSet:
    """"lo:hi,lo:hi" into a union of closed intervals."""
    parts = []
    for item in text.split(","):
        try:
            lo, hi = item.split(":")
        except ValueError:
            raise UsageError(f"Expected 'lo:hi' components, got {item!r}")
        parts.append((parse_rational(lo), parse_rational(hi)))
    return IntervalSet.closed(*parts)


def _bound_dict(lo: Fraction, hi: Fraction) -> Dict[str, str]:
    digits = get_settings().DECIMAL_DIGITS
    return {
        "lo": format_rational(lo),
        "hi": format_rational(hi),
        "lo_decimal": to_decimal_string(lo, digits),
        "hi_decimal": to_decimal_string(hi, digits),
    }


def _emit(text: str, out: Optional[Path]) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        atomic_write_text(out, text)
        logger.info("Output written", extra={"path": str(out)})


def _json_text(data: Any) -> str:
    return json.dumps(data, indent=2, sort_keys=True) + "\n"


def _load_set(path: Path) -> TruncatedSet:
    if not path.exists():
        raise FileNotFoundError(f"Set file not found: {path}")
    with open(path, "r", encoding="utf-8") as f:
        data = json.load(f)
    model = TruncatedSetModel.model_validate(data)
    return TruncatedSet.from_dict(model.model_dump(exclude_none=True))


# ============== COMMANDS ==============


def cmd_build(args: argparse.Namespace) -> int:
    config = _config(args)
    settings = get_settings()
    eps = config.epsilon or parse_rational(settings.DEFAULT_EPSILON)
    window = _rational_pair(args.window) if args.window else None
    if (
        args.construction == "removal"
        and window is None
        and eps < power_of_two(-settings.VERIFY_MIN_EPSILON_EXP)
    ):
        raise ResourceLimitError(f"epsilon {eps} below 2^-{settings.VERIFY_MIN_EPSILON_EXP} for a global build")

    if args.construction == "wd":
        construction = WdConstruction(components=args.components)
    else:
        construction = RemovalConstruction()
    t = construction.truncate(eps, window)

    if config.out is not None:
        atomic_write_text(config.out, _json_text(t.to_dict()))
    summary = {
        "construction": construction.describe(),
        "epsilon": format_rational(t.epsilon),
        "measure_upper": format_rational(t.upper.measure()),
        "omitted_mass": format_rational(t.omitted_mass),
        "removal_count": t.removal_count,
    }
    sys.stdout.write(_json_text(summary))
    return EXIT_OK


def cmd_measure(args: argparse.Namespace) -> int:
    _require(args, "set_file", "lo", "hi")
    t = _load_set(Path(args.set_file))
    m = measure_in(t, Interval.closed(parse_rational(args.lo), parse_rational(args.hi)))
    _emit(_json_text(_bound_dict(m.lo, m.hi)), _config(args).out)
    return EXIT_OK


def cmd_density(args: argparse.Namespace) -> int:
    _require(args, "set_file", "x", "r")
    t = _load_set(Path(args.set_file))
    x, r = parse_rational(args.x), parse_rational(args.r)
    if args.r_hi is not None:
        bound = inf_density_over_range(t, x, r, parse_rational(args.r_hi), Mode(args.mode))
    elif args.mode == "max":
        bound = max_one_sided_density(t, x, r)
    else:
        bound = one_sided_density(t, x, r, Side(args.mode))
    report = {"x": format_rational(x), "r": format_rational(r), "mode": args.mode}
    report.update(_bound_dict(bound.lo, bound.hi))
    _emit(_json_text(report), _config(args).out)
    return EXIT_OK


def cmd_profile(args: argparse.Namespace) -> int:
    _require(args, "set_file", "x", "radii")
    config = _config(args)
    t = _load_set(Path(args.set_file))
    radii = [parse_rational(r) for r in args.radii.split(",")]
    rows = density_profile(t, parse_rational(args.x), radii)
    records = []
    for row in rows:
        record = {"x": format_rational(row.x), "r": format_rational(row.r), "side": row.side}
        record.update(_bound_dict(row.bound.lo, row.bound.hi))
        records.append(record)
    if config.output_format == "csv":
        header = ("x", "r", "side", "lo", "hi", "lo_decimal", "hi_decimal")
        text = csv_text(header, [[rec[h] for h in header] for rec in records])
    else:
        text = _json_text(records)
    _emit(text, config.out)
    return EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    config = _config(args)
    if args.certificate:
        report = verify_certificate_file(Path(args.certificate))
        payload = {
            "kind": report.kind,
            "passed": report.passed,
            "checks": [c.to_dict() for c in report.checks],
        }
        _emit(_json_text(payload), config.out)
        return EXIT_OK if report.passed else EXIT_VERIFICATION_FAILED

    names = parse_suite_names(args.suite)
    opts = suite_options(
        max_depth=config.depth,
        max_index=config.index_cap,
        epsilon=config.epsilon,
        seed=args.seed,
    )
    orchestrator = SuiteOrchestrator(parallel=args.parallel)
    reports = orchestrator.run(names, opts)
    payload = {
        "passed": all(r.passed for r in reports),
        "suites": [r.to_model().model_dump(mode="json") for r in reports],
    }
    _emit(_json_text(payload), config.out)
    return EXIT_OK if payload["passed"] else EXIT_VERIFICATION_FAILED


def cmd_witness(args: argparse.Namespace) -> int:
    config = _config(args)
    settings = get_settings()
    if args.kind == "non-udt":
        _require(args, "gamma", "delta")
        seq = SequenceSpec.parse(args.gamma, args.delta)
        eps = config.epsilon or power_of_two(-settings.VERIFY_MIN_EPSILON_EXP)
        cert = find_non_udt_witness(seq, args.levels, eps, coarsen=args.coarsen, cap=args.cap)
    elif args.kind == "non-sudt":
        _require(args, "gamma", "delta")
        seq = SequenceSpec.parse(args.gamma, args.delta)
        cert = find_non_sudt_witness(seq, args.j_max, cap=args.cap)
    else:
        _require(args, "set")
        gammas = SequenceSpec.parse(args.gamma or "geom:1:1/2", "table:1")
        cert = certify_finite_union(_parse_components(args.set), gammas, args.levels)

    text = _json_text(cert.to_model().model_dump(mode="json"))

    # re-verify from the serialized form; nothing is written unless it passes
    report = verify_payload(json.loads(text))
    logger.info(
        "Certificate re-verified",
        extra={"kind": report.kind, "passed": report.passed, "checks": len(report.checks)},
    )
    report.raise_for_failures()
    _emit(text, config.out)
    return EXIT_OK


def cmd_figure(args: argparse.Namespace) -> int:
    config = _config(args)
    depth = 1 if config.depth is None else config.depth
    index_cap = config.index_cap or 4
    _emit(figure_csv(depth, index_cap), config.out)
    return EXIT_OK


# ============== PARSER ==============


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="densitycert", description="Certified density bounds for counterexample sets"
    )
    parser.add_argument("--log-level", default=None, help="Override LOG_LEVEL")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--out", type=Path, default=None, help="Write output here instead of stdout")

    p = sub.add_parser("build", help="Truncate a construction and save it")
    common(p)
    p.add_argument("--epsilon", default=None, help="Enumeration threshold as p/q")
    p.add_argument("--construction", choices=sorted(CONSTRUCTIONS), default="removal")
    p.add_argument("--components", type=int, default=8, help="Components kept by the wd example")
    p.add_argument("--window", default=None, help="Local window 'lo,hi'")
    p.set_defaults(handler=cmd_build)

    p = sub.add_parser("measure", help="Bound |E ∩ [lo, hi]|")
    common(p)
    p.add_argument("--set-file", default=None)
    p.add_argument("--lo", default=None)
    p.add_argument("--hi", default=None)
    p.set_defaults(handler=cmd_measure)

    p = sub.add_parser("density", help="Certified one-sided density bounds")
    common(p)
    p.add_argument("--set-file", default=None)
    p.add_argument("--x", default=None)
    p.add_argument("--r", default=None)
    p.add_argument("--r-hi", default=None, help="Infimum over [r, r-hi] instead of a single radius")
    p.add_argument("--mode", choices=[m.value for m in Mode], default="max")
    p.set_defaults(handler=cmd_density)

    p = sub.add_parser("profile", help="Density bounds over several radii")
    common(p)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--set-file", default=None)
    p.add_argument("--x", default=None)
    p.add_argument("--radii", default=None, help="Comma-separated radii")
    p.set_defaults(handler=cmd_profile)

    p = sub.add_parser("verify", help="Run verification suites or re-check a certificate")
    common(p)
    p.add_argument("--suite", default="all", help="Comma-separated suite names or 'all'")
    p.add_argument("--certificate", default=None, help="Certificate JSON to re-verify")
    p.add_argument("--depth", type=int, default=None)
    p.add_argument("--index-cap", type=int, default=None)
    p.add_argument("--epsilon", default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--parallel", action="store_true")
    p.set_defaults(handler=cmd_verify)

    p = sub.add_parser("witness", help="Search for a witness and write its certificate")
    common(p)
    p.add_argument("--kind", choices=("non-udt", "non-sudt", "sudt-finite"), required=True)
    p.add_argument("--gamma", default=None, help="e.g. geom:1/10:1/10 or table:1/2,3/4")
    p.add_argument("--delta", default=None, help="e.g. geom:1:1/4")
    p.add_argument("--levels", type=int, default=3)
    p.add_argument("--j-max", type=int, default=1)
    p.add_argument("--epsilon", default=None)
    p.add_argument("--coarsen", action="store_true")
    p.add_argument("--cap", type=int, default=None)
    p.add_argument("--set", default=None, help="Finite union as 'lo:hi,lo:hi'")
    p.set_defaults(handler=cmd_witness)

    p = sub.add_parser("figure", help="CSV of labeled I, J and K intervals")
    common(p)
    p.add_argument("--depth", type=int, default=None)
    p.add_argument("--index-cap", type=int, default=None)
    p.set_defaults(handler=cmd_figure)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Run one command and return its exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_OK

    setup_logging(args.log_level)
    try:
        return args.handler(args)
    except VerificationError as e:
        logger.error(f"Verification failed: {e}", extra={"failures": e.failures[:20]})
        return EXIT_VERIFICATION_FAILED
    except (ResourceLimitError, CapExceededError, RangeExhaustedError, NeedsFinerEpsilonError) as e:
        logger.error(f"Resource limit reached: {e}")
        return EXIT_RESOURCE
    except (DensityCertError, ValidationError, ValueError, OSError) as e:
        logger.error(f"{type(e).__name__}: {e}")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
