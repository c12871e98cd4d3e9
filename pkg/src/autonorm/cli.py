"""Command-line entry point.

Exit codes: 0 pass, 1 verification failure, 2 usage or config error,
3 construction error.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import platform
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numba
import numpy as np

from . import words
from .calabi import NotInCalabiKernel, balance_calabi, calabi_of_plan
from .expr import HamiltonianExpr, ParseError, parse
from .factorization import ConstructionError, plan_factorization, verify_factorization, verify_plan_displacement
from .geometry import DiffeoWord, IntegratorConfig, trace_word

log = logging.getLogger("autonorm")

EXIT_PASS, EXIT_FAIL, EXIT_USAGE, EXIT_CONSTRUCTION = 0, 1, 2, 3


class ConfigError(ValueError):
    pass


@dataclass
class DisplacementOverrides:
    L: float | None = None
    L_over_r: float | None = None
    eps: float = 1.0
    allow_L_leq_2r: bool = False


@dataclass
class IntegratorSettings:
    scheme: str = "rk4"
    step: float = 1e-3


@dataclass
class VerificationSettings:
    samples: int = 200
    seed: int = 0
    tolerance: float = 1e-3


@dataclass
class CalabiSettings:
    grid_spacing: float | None = None
    balance: bool = False


@dataclass
class ScenarioConfig:
    n: int
    factors: list[str]
    displacement: DisplacementOverrides = field(default_factory=DisplacementOverrides)
    integrator: IntegratorSettings = field(default_factory=IntegratorSettings)
    verification: VerificationSettings = field(default_factory=VerificationSettings)
    calabi: CalabiSettings = field(default_factory=CalabiSettings)

    @classmethod
    def from_dict(cls, raw: dict) -> ScenarioConfig:
        if not isinstance(raw, dict):
            raise ConfigError("config must be a JSON object")
        sections = {
            "displacement": DisplacementOverrides,
            "integrator": IntegratorSettings,
            "verification": VerificationSettings,
            "calabi": CalabiSettings,
        }
        unknown = set(raw) - {"n", "factors", *sections}
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        kwargs = {}
        for key, kind in sections.items():
            try:
                kwargs[key] = kind(**raw.get(key, {}))
            except TypeError as exc:
                raise ConfigError(f"bad '{key}' section: {exc}") from None
        try:
            cfg = cls(n=raw["n"], factors=raw["factors"], **kwargs)
        except KeyError as exc:
            raise ConfigError(f"missing config key {exc}") from None
        cfg.validate()
        return cfg

    @classmethod
    def load(cls, path: str | Path) -> ScenarioConfig:
        try:
            raw = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        return cls.from_dict(raw)

    def validate(self) -> None:
        if not isinstance(self.n, int) or self.n < 1:
            raise ConfigError("n must be a positive integer")
        if not isinstance(self.factors, list) or not all(isinstance(f, str) for f in self.factors):
            raise ConfigError("factors must be a list of expression strings")
        if not self.factors:
            raise ConfigError("factors is empty: need at least one autonomous factor")
        if self.verification.samples < 1:
            raise ConfigError("verification.samples must be at least 1")
        if self.displacement.L is not None and self.displacement.L_over_r is not None:
            raise ConfigError("give at most one of displacement.L and displacement.L_over_r")

    def hamiltonians(self) -> list[HamiltonianExpr]:
        out = []
        for i, text in enumerate(self.factors, 1):
            try:
                out.append(parse(text, self.n))
            except ParseError as exc:
                raise ConfigError(f"factor {i}: {exc}") from None
        return out

    def integrator_config(self) -> IntegratorConfig:
        try:
            return IntegratorConfig(scheme=self.integrator.scheme, step=self.integrator.step)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None


def build_plan(cfg: ScenarioConfig):
    d = cfg.displacement
    factors = cfg.hamiltonians()
    L = d.L
    if d.L_over_r is not None:
        # r is only known once supports are measured
        probe = plan_factorization(factors, allow_short=True, L=1.0)
        L = d.L_over_r * probe.spec.r
    return plan_factorization(factors, L=L, eps=d.eps, allow_short=d.allow_L_leq_2r)


def environment() -> dict:
    return {
        "python": platform.python_version(),
        "numpy": np.__version__,
        "numba": numba.__version__,
    }


def _report(plan=None, displacement=None, composition=None, calabi=None, passed=None) -> dict:
    return {
        "passed": passed,
        "plan": plan.summary() if plan is not None else None,
        "displacement": displacement,
        "composition": composition,
        "calabi": calabi,
        "environment": environment(),
    }


def write_json(obj: dict, path: str | None) -> None:
    text = json.dumps(obj, indent=2, sort_keys=True, allow_nan=True) + "\n"
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


# ---------------------------------------------------------------- commands


def cmd_identity(args) -> int:
    m = args.m
    ok, trace = words.verify_identity(m)
    split = words.verify_commutator_split(m)
    for label, line in words.cancellation_summary(m).items():
        print(f"label {label:>4}: {line}")
    print(f"f = [g,h] b : {'holds' if ok else 'FAILS'} ({len(trace)} rewrites)")
    print(f"[g,h] = (g h g^-1) h^-1 : {'holds' if split else 'FAILS'}")
    if args.trace:
        Path(args.trace).write_text(trace.dumps())
    return EXIT_PASS if ok and split else EXIT_FAIL


def cmd_factorize(args) -> int:
    cfg = ScenarioConfig.load(args.config)
    plan = build_plan(cfg)
    write_json(_report(plan=plan), args.out)
    return EXIT_PASS


def cmd_verify(args) -> int:
    cfg = ScenarioConfig.load(args.config)
    plan = build_plan(cfg)
    icfg = cfg.integrator_config()
    v = cfg.verification
    disp = verify_plan_displacement(plan, v.samples, icfg, v.seed)
    comp = verify_factorization(plan, v.samples, v.tolerance, icfg, v.seed)
    passed = disp.passed and comp.passed
    for rep in (disp, comp):
        log.info(rep.line())
    write_json(_report(plan, disp.to_dict(), comp.to_dict(), passed=passed), args.out)
    return EXIT_PASS if passed else EXIT_FAIL


def cmd_calabi(args) -> int:
    cfg = ScenarioConfig.load(args.config)
    plan = build_plan(cfg)
    icfg = cfg.integrator_config()
    spacing = cfg.calabi.grid_spacing
    section: dict = {}
    if cfg.calabi.balance:
        plan, info = balance_calabi(plan, spacing)
        section["balancing"] = info
    rep = calabi_of_plan(plan, spacing, cfg=icfg)
    section.update(rep)
    passed = rep["glued_ok"] and rep["conjugate_ok"]
    composition = None
    if cfg.calabi.balance:
        v = cfg.verification
        comp = verify_factorization(plan, v.samples, v.tolerance, icfg, v.seed)
        trivial = all(abs(c) <= 1e-5 for c in rep["factors"].values())
        section["factors_trivial"] = trivial
        passed = passed and trivial and comp.passed
        composition = comp.to_dict()
    write_json(_report(plan, composition=composition, calabi=section, passed=passed), args.out)
    return EXIT_PASS if passed else EXIT_FAIL


def cmd_trace(args) -> int:
    cfg = ScenarioConfig.load(args.config)
    plan = build_plan(cfg)
    try:
        point = [float(v) for v in args.point.split(",")]
    except ValueError:
        raise ConfigError(f"bad point {args.point!r}") from None
    if len(point) != 2 * cfg.n:
        raise ConfigError(f"point needs {2 * cfg.n} coordinates, got {len(point)}")
    word: DiffeoWord = {"f": plan.f, "A1": plan.A1, "A2": plan.A2, "A3": plan.A3, "h": plan.h}[args.which]
    times, rows = trace_word(word, point, cfg.integrator_config())
    header = ["t"] + [f"{c}{i}" for i in range(1, cfg.n + 1) for c in "xy"]
    with open(args.out, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(header)
        for t, row in zip(times, rows):
            out.writerow([repr(float(t))] + [repr(float(v)) for v in row])
    return EXIT_PASS


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not an integer") from None
    if v < 1:
        raise argparse.ArgumentTypeError("m must be at least 1")
    return v


def make_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="autonorm", description="Factor Hamiltonian diffeomorphisms into three autonomous ones.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("identity", help="symbolic check of f = [g,h] b")
    s.add_argument("--m", type=_positive_int, required=True)
    s.add_argument("--trace", help="write the rewrite trace here")
    s.set_defaults(func=cmd_identity)

    for name, func, helptext in (
        ("factorize", cmd_factorize, "build the plan and write its summary"),
        ("verify", cmd_verify, "numerically verify the factorization"),
        ("calabi", cmd_calabi, "Calabi invariants (optionally balanced)"),
    ):
        s = sub.add_parser(name, help=helptext)
        s.add_argument("--config", required=True)
        s.add_argument("--out")
        s.set_defaults(func=func)

    s = sub.add_parser("trace", help="CSV orbit of a point through a word's substeps")
    s.add_argument("--config", required=True)
    s.add_argument("--point", required=True)
    s.add_argument("--which", choices=["f", "A1", "A2", "A3", "h"], required=True)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_trace)
    return p


def main(argv: list[str] | None = None) -> int:
    args = make_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ConstructionError, NotInCalabiKernel) as exc:
        print(f"construction error: {exc}", file=sys.stderr)
        return EXIT_CONSTRUCTION


if __name__ == "__main__":
    sys.exit(main())
