"""Batch runner: ``ternstab --config run.toml --out results --format json,csv``.

Exit status: 0 pass, 1 fail, 2 inadmissible input, >2 operational error
(3 unreadable config, 4 schema violation, 5 unwritable output, 6 failed
precondition or divergence). Errors are printed to stderr as
``error[CODE]: message``.
"""

from __future__ import annotations

import argparse
import os
import sys

from .algebra import AlgebraInstance, check_algebra_axioms
from .config import RunConfig, build_experiment, build_grid, build_handle, load_config
from .errors import (
    ConfigError,
    InadmissibleError,
    OutputError,
    SchemaError,
    TernstabError,
)
from .fixedpoint import ControlFunction, extract_on_grid
from .funceq import parse_scalar, residual_sup
from .reporting import emit_report
from .stability import (
    PASS,
    corollary_bound,
    inadmissible_report,
    run_theorem_2_5,
    run_theorem_2_6,
)

EXIT_PASS, EXIT_FAIL, EXIT_INADMISSIBLE = 0, 1, 2
EXIT_CODES = {
    ConfigError.code: 3,
    SchemaError.code: 4,
    OutputError.code: 5,
}
EXIT_OTHER = 6


class _Outcome:
    """Wraps a report with a pass flag for commands without a verdict field."""

    def __init__(self, report, passed):
        self.report = report
        self.passed = passed

    def to_dict(self):
        d = self.report.to_dict()
        d["pass"] = self.passed
        return d

    def csv_rows(self):
        return self.report.csv_rows()


class _CorollaryReport:
    def __init__(self, bound, spec):
        self.bound = bound
        self.spec = spec

    def to_dict(self):
        d = self.bound.to_dict()
        d.update(s=self.spec["s"], r=self.spec["r"], j=self.spec["j"], verdict=PASS)
        return d

    def csv_rows(self):
        return ["s", "r", "j", "k", "constant"], [
            [float(self.spec["s"]), float(self.spec["r"]), self.spec["j"], self.bound.k, self.bound.constant]
        ]


def _execute(config: RunConfig):
    """Run the command; return (report, passed)."""
    spec = config.spec
    cmd = config.command
    if cmd == "corollary":
        return _CorollaryReport(corollary_bound(spec["s"], spec["r"], spec["j"]), spec), True

    algebra = AlgebraInstance.parse(spec["algebra"])
    grid = build_grid(spec.get("grid"))
    if cmd == "axioms":
        rep = check_algebra_axioms(algebra, grid, spec.get("tol", 1e-9))
        return rep, rep.passed
    if cmd == "residual":
        f = build_handle(spec["handle"], algebra)
        control = None
        if "control" in spec:
            control = ControlFunction.from_dict(spec["control"], "delta")
        rep = residual_sup(f, spec["j"], parse_scalar(spec.get("rho", 2)), grid, control)
        tol = spec.get("tol", 1e-9)
        if control is not None:
            ok = rep.max_ratio is None or rep.max_ratio <= 1 + tol
        else:
            ok = rep.max_defect <= tol
        rep.tol = tol
        return _Outcome(rep, ok), ok
    if cmd == "extract":
        f = build_handle(spec["handle"], algebra)
        rep = extract_on_grid(f, spec["j"], grid, spec.get("n_max", 200), spec.get("tol", 1e-12))
        return rep, rep.passed

    exp = build_experiment(spec)
    if cmd == "theorem25":
        rep = run_theorem_2_5(exp)
    else:
        sigma = ControlFunction.power(spec["sigma"]["s"], spec["sigma"]["r"], "sigma")
        der_pert = None
        if "perturbation_der" in spec:
            der_pert = ControlFunction.power(spec["perturbation_der"]["s"], spec["perturbation_der"]["r"])
        rep = run_theorem_2_6(
            exp,
            build_handle(spec["base_hom"], algebra),
            build_handle(spec["base_der"], algebra),
            sigma,
            der_pert,
        )
    return rep, rep.verdict == PASS


def _inadmissible(config: RunConfig, exc):
    spec = config.spec
    algebra = spec.get("algebra", "")
    return inadmissible_report(config.command, algebra, spec.get("j", 0), str(exc))


def run(config: RunConfig) -> int:
    """Execute ``config`` and write its report files; return the exit status."""
    try:
        try:
            report, passed = _execute(config)
            status = EXIT_PASS if passed else EXIT_FAIL
        except InadmissibleError as exc:
            print(f"error[{exc.code}]: {exc}", file=sys.stderr)
            report, status = _inadmissible(config, exc), EXIT_INADMISSIBLE
        except ValueError as exc:
            if isinstance(exc, TernstabError):
                raise
            raise SchemaError(str(exc)) from exc
        try:
            os.makedirs(config.output_dir, exist_ok=True)
        except OSError as exc:
            raise OutputError(f"cannot create output directory {config.output_dir}: {exc}") from exc
        for fmt in config.formats:
            emit_report(report, fmt, os.path.join(config.output_dir, f"report.{fmt}"))
        return status
    except TernstabError as exc:
        print(f"error[{exc.code}]: {exc}", file=sys.stderr)
        return EXIT_CODES.get(exc.code, EXIT_OTHER)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ternstab", description=__doc__.splitlines()[0])
    p.add_argument("--config", required=True, help="JSON or TOML run configuration")
    p.add_argument("--out", help="output directory (overrides output_dir)")
    p.add_argument("--format", help="comma-separated subset of json,csv (overrides formats)")
    p.add_argument("--seed", type=int, help="overrides the experiment seed and the grid seed")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args.config)
        if args.out:
            config.output_dir = args.out
        if args.format:
            formats = [f.strip() for f in args.format.split(",") if f.strip()]
            if not formats or any(f not in ("json", "csv") for f in formats):
                raise SchemaError(f"--format must be a subset of json,csv, got {args.format!r}")
            config.formats = formats
        if args.seed is not None:
            if not 0 <= args.seed < 2**64:
                raise SchemaError("--seed must be a 64-bit unsigned integer")
            if config.command in ("theorem25", "theorem26"):
                config.spec["seed"] = args.seed
            if config.command != "corollary":
                config.spec.setdefault("grid", {})["seed"] = args.seed
    except TernstabError as exc:
        print(f"error[{exc.code}]: {exc}", file=sys.stderr)
        return EXIT_CODES.get(exc.code, EXIT_OTHER)
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
