"""
Verification suite registry.

A suite is a function (params, ctx) -> SuiteResult registered under the
name the command line uses for it. Registration order is run order for
all-checks.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

from config import TruncationPolicy
from errors import ConfigError


@dataclass
class RunContext:
    policy: TruncationPolicy = field(default_factory=TruncationPolicy)
    seed: int = 0
    jobs: int = 1


@dataclass
class SuiteResult:
    """
    passed: every enabled assertion of the suite held
    payload: JSON-ready diagnostics; each value sits next to its tail or tolerance
    tables: CSV tables by name, one dict per row
    """

    name: str
    passed: bool
    payload: dict
    tables: dict[str, list[dict]] = field(default_factory=dict)


@dataclass
class Suite:

    index: int
    run: Callable[[dict, RunContext], SuiteResult]
    name: str
    defaults: dict
    description: str = ""

    def __post_init__(self):
        if not self.description and self.run.__doc__:
            self.description = self.run.__doc__.strip().splitlines()[0]

    def params(self, *layers: dict | None) -> dict:
        """Defaults overridden by each layer in turn; unknown keys are a config error."""
        merged = dict(self.defaults)
        for layer in layers:
            for key, value in (layer or {}).items():
                if key not in merged:
                    raise ConfigError(f"unknown parameter {key!r} for {self.name}")
                if value is not None:
                    merged[key] = value
        return merged


SUITES: list[Suite] = []


def register_suite(name: str, **defaults):
    """
    Usage:  @register_suite("polys", k=3, l=3)
            def polys(params, ctx):

    The module holding the suite has to be imported for the registration
    to happen; get_suites does that for the built-in checks.
    """

    def wrap(func):
        if any(s.name == name for s in SUITES):
            raise ValueError(f"suite {name!r} registered twice")
        SUITES.append(Suite(len(SUITES), func, name, defaults))
        return func

    return wrap


def get_suites() -> list[Suite]:
    import checks  # noqa: F401 registers the built-in suites
    return list(SUITES)


def get_suite(name: str) -> Suite:
    for suite in get_suites():
        if suite.name == name:
            return suite
    raise ConfigError(f"no suite named {name!r}")
