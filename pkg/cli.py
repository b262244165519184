"""
Command line front door.

    python main.py <command> [options]

Each command runs one registered verification suite (all-checks runs every
one of them in registration order) and writes report.json plus one CSV per
table under --out. Exit code 0 when every enabled assertion passes, 1 when
one fails or a computation breaks down, 2 on a configuration error.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from config import TruncationPolicy, configure_logging, default_jobs, get_logger
from errors import ConfigError, NumericsError
from suites import RunContext, SuiteResult, get_suite, get_suites

logger = get_logger(__name__)

ALL_CHECKS = "all-checks"
TOP_LEVEL_KEYS = {"seed", "jobs", "out", "policy"}


@dataclass
class RunConfig:
    """Everything a run depends on; echoed into report.json."""

    command: str
    params: dict[str, dict] = field(default_factory=dict)
    policy: TruncationPolicy = field(default_factory=TruncationPolicy)
    seed: int = 0
    jobs: int = 1
    out: str = "results"

    def to_dict(self) -> dict:
        return {"command": self.command, "params": self.params, "policy": self.policy.to_dict(),
                "seed": self.seed, "jobs": self.jobs, "out": self.out}


def _shift_pairs(count: int, offset: float) -> list[list[float]]:
    return [[0.01 * (j + offset), 0.0] for j in range(1, count + 1)]


def _json_pairs(text: str) -> list:
    try:
        value = json.loads(text)
    except json.JSONDecodeError as e:
        raise argparse.ArgumentTypeError(f"expected a JSON list of [re, im] pairs: {e}") from e
    if not isinstance(value, list):
        raise argparse.ArgumentTypeError("expected a JSON list of [re, im] pairs")
    return value


def _common_options() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with parameter blocks; flags override it")
    common.add_argument("--out", help="output directory (default: results)")
    common.add_argument("--jobs", type=int, help="worker processes (default: $DM_JOBS or 1)")
    common.add_argument("--seed", type=int, help="random seed (default: 0)")
    common.add_argument("--prime-cutoff", type=int, dest="prime_cutoff")
    common.add_argument("--contour-height", type=float, dest="contour_height")
    common.add_argument("--target-tol", type=float, dest="target_tol")
    common.add_argument("-v", "--verbose", action="count", default=0)
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_options()
    parser = argparse.ArgumentParser(prog="main.py", description="Shifted divisor moment experiments")
    parser.add_argument("--list", action="store_true", help="list the registered suites and exit")
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("polys", parents=[common], help="w_{k,l} coefficients and exact identities")
    p.add_argument("--k", type=int)
    p.add_argument("--l", type=int)

    p = sub.add_parser("sym-verify", parents=[common], help="symmetric polynomial identity")
    p.add_argument("--a-max", type=int, dest="a_max")
    p.add_argument("--m-max", type=int, dest="m_max")
    p.add_argument("--trials", type=int)

    for name, help_text in (("euler-check", "Z, B and G consistency"), ("h-check", "H series against H product")):
        p = sub.add_parser(name, parents=[common], help=help_text)
        p.add_argument("--k", type=int, help="use k default shifts for I")
        p.add_argument("--l", type=int, help="use l default shifts for J")
        p.add_argument("--I", type=_json_pairs)
        p.add_argument("--J", type=_json_pairs)
        p.add_argument("--s")
        if name == "euler-check":
            p.add_argument("--N", type=float)
        else:
            p.add_argument("--R", type=float)
            p.add_argument("--Q", type=float)

    p = sub.add_parser("adc", parents=[common], help="additive divisor sums against the main term")
    p.add_argument("--k", type=int)
    p.add_argument("--l", type=int)
    p.add_argument("--I", type=_json_pairs)
    p.add_argument("--J", type=_json_pairs)
    p.add_argument("--X", help="comma separated box sizes")
    p.add_argument("--r", help="shift range such as 1..10")
    p.add_argument("--method", choices=("euler", "series"))
    p.add_argument("--theta", type=float)

    p = sub.add_parser("moment", parents=[common], help="direct moment against M0 + M1")
    p.add_argument("--k", type=int)
    p.add_argument("--l", type=int)
    p.add_argument("--T", help="comma separated heights")
    p.add_argument("--eta", type=float)
    p.add_argument("--b", type=float)
    p.add_argument("--rho", type=float)

    p = sub.add_parser("weights-probe", parents=[common], help="weight transforms")
    p.add_argument("--T", type=float)
    p.add_argument("--b", type=float)
    p.add_argument("--rho", type=float)
    p.add_argument("--samples", type=int)
    p.add_argument("--x-max", dest="x_max", type=float)

    sub.add_parser(ALL_CHECKS, parents=[common], help="every registered suite")
    return parser


def _load_config_file(path: str | None) -> dict:
    if not path:
        return {}
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise ConfigError(f"config {path} is not valid JSON: {e}") from e
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    names = {s.name for s in get_suites()}
    for key, value in data.items():
        if key not in TOP_LEVEL_KEYS and key not in names:
            raise ConfigError(f"unknown config key {key!r}")
        if key in names and not isinstance(value, dict):
            raise ConfigError(f"config block {key!r} must be an object")
    return data


def _flag_params(command: str, args: argparse.Namespace) -> dict:
    skip = {"config", "out", "jobs", "seed", "prime_cutoff", "contour_height", "target_tol", "verbose",
            "list", "command", "k", "l"}
    flags = {k: v for k, v in vars(args).items() if k not in skip and v is not None}
    k, l = getattr(args, "k", None), getattr(args, "l", None)
    if command in ("polys", "moment"):
        flags.update({name: v for name, v in (("k", k), ("l", l)) if v is not None})
    else:
        if k is not None and "I" not in flags:
            flags["I"] = _shift_pairs(k, 0.0)
        if l is not None and "J" not in flags:
            flags["J"] = _shift_pairs(l, 0.5)
    return flags


def resolve(args: argparse.Namespace) -> RunConfig:
    """
    Suite defaults, then the config file, then flags.

    Raises:
    - ConfigError for unknown keys, bad values or an unknown command
    """
    data = _load_config_file(args.config)
    try:
        overrides = dict(data.get("policy", {}))
        overrides.update({k: getattr(args, k) for k in ("prime_cutoff", "contour_height", "target_tol")
                          if getattr(args, k) is not None})
        policy = TruncationPolicy(**overrides)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"bad truncation policy: {e}") from e
    jobs = args.jobs if args.jobs is not None else data.get("jobs", default_jobs())
    seed = args.seed if args.seed is not None else data.get("seed", 0)
    out = args.out or data.get("out", "results")
    if not isinstance(jobs, int) or jobs < 1:
        raise ConfigError("jobs must be a positive integer")
    if not isinstance(seed, int):
        raise ConfigError("seed must be an integer")
    names = [s.name for s in get_suites()] if args.command == ALL_CHECKS else [args.command]
    params = {}
    for name in names:
        suite = get_suite(name)
        flags = _flag_params(name, args) if name == args.command else {}
        params[name] = suite.params(data.get(name), flags)
    return RunConfig(args.command, params, policy, seed, jobs, out)


def _jsonable(value):
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else str(value)
    if isinstance(value, (complex, np.complexfloating)):
        return [_jsonable(value.real), _jsonable(value.imag)]
    if isinstance(value, Fraction):
        return str(value)
    return value


def _flatten(row: dict) -> dict:
    flat = {}
    for key, value in row.items():
        if isinstance(value, list) and len(value) == 2 and all(isinstance(v, float) for v in value):
            flat[f"{key}_re"], flat[f"{key}_im"] = value
        elif isinstance(value, (list, dict)):
            flat[key] = json.dumps(_jsonable(value), sort_keys=True)
        else:
            flat[key] = _jsonable(value)
    return flat


def write_tables(out: Path, result: SuiteResult) -> list[Path]:
    written = []
    for name, rows in result.tables.items():
        if not rows:
            continue
        path = out / "tables" / f"{result.name}_{name}.csv"
        path.parent.mkdir(parents=True, exist_ok=True)
        flat = [_flatten(row) for row in rows]
        columns = list(flat[0])
        for row in flat[1:]:
            columns += [c for c in row if c not in columns]
        with path.open("w", encoding="utf-8", newline="") as f:
            writer = csv.DictWriter(f, fieldnames=columns, lineterminator="\n")
            writer.writeheader()
            writer.writerows(flat)
        written.append(path)
    return written


def write_report(out: Path, cfg: RunConfig, results: list[SuiteResult], errors: dict[str, str]) -> Path:
    out.mkdir(parents=True, exist_ok=True)
    report = {
        "config": cfg.to_dict(),
        "passed": not errors and all(r.passed for r in results),
        "suites": {r.name: {"passed": r.passed, "payload": r.payload} for r in results},
        "errors": errors,
    }
    path = out / "report.json"
    path.write_text(json.dumps(_jsonable(report), sort_keys=True, indent=2) + "\n", encoding="utf-8")
    return path


def _headline(result: SuiteResult) -> str:
    verdict = "ok" if result.passed else "FAILED"
    if result.name == "polys":
        coefficients = " ".join(result.payload["w_coefficients"])
        return (f"polys: w_{result.payload['k']},{result.payload['l']} = [{coefficients}]; "
                f"identities {verdict}")
    return f"{result.name}: {verdict}"


def _describe_failure(name: str, error: NumericsError) -> str:
    parts = [f"{name}: {type(error).__name__}: {error}"]
    for attr in ("point", "where", "estimate", "tail", "failed"):
        value = getattr(error, attr, None)
        if value is not None:
            parts.append(f"{attr}={value}")
    return " ".join(parts)


def run(argv: list[str]) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    if args.list:
        for suite in get_suites():
            print(f"{suite.index} {suite.name}: {suite.description}")
        return 0
    if not args.command:
        parser.print_usage(sys.stderr)
        return 2
    configure_logging(args.verbose)
    try:
        cfg = resolve(args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    ctx = RunContext(cfg.policy, cfg.seed, cfg.jobs)
    out = Path(cfg.out)
    results, errors = [], {}
    for name, params in cfg.params.items():
        logger.info("running %s", name)
        try:
            result = get_suite(name).run(params, ctx)
        except ConfigError as e:
            print(f"config error: {e}", file=sys.stderr)
            return 2
        except NumericsError as e:
            errors[name] = _describe_failure(name, e)
            print(errors[name], file=sys.stderr)
            continue
        results.append(result)
        write_tables(out, result)
        print(_headline(result))
    path = write_report(out, cfg, results, errors)
    print(f"report: {path}")
    return 0 if not errors and all(r.passed for r in results) else 1
