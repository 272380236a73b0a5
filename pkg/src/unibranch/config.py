"""Flat ``key = value`` run configuration with strict validation.

Example::

    # mcbvp defaults, both sides
    problem = mcbvp
    mu = 12
    q = 2
    delta = 0.1
    m = 200
    side = both
    lambda_min = -5
    lambda_max = 5

Lines starting with ``#`` or ``;`` are comments. Unknown keys are errors.
"""

from __future__ import annotations

import configparser
import dataclasses
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import mcbvp, systems
from .continuation import StepControl
from .errors import ConfigError
from .problem_model import DomainSpec, ParameterizedSystem, Point


@dataclass(frozen=True)
class RunConfig:
    problem: str = "mcbvp"
    mu: float = 12.0
    q: float = 2.0
    delta: float = 0.1
    m: int = 200
    base_lambda: float | None = None
    side: str = "both"
    h_init: float | None = None
    h_min: float = 1e-7
    h_max: float | None = None
    newton_tol: float = 1e-10
    newton_max_iter: int = 12
    grow: float = 1.5
    shrink: float = 0.5
    max_steps: int = 20_000
    lambda_min: float | None = None
    lambda_max: float | None = None
    norm_cap: float | None = None
    boundary_threshold: float = 1e-3
    output_dir: str = "out"
    verify: bool = False

    def __post_init__(self):
        if self.side not in ("plus", "minus", "both"):
            raise ConfigError(f"side must be plus, minus or both (got {self.side!r})")
        if self.problem != "mcbvp":
            name = self.problem.split(":", 1)[-1]
            if not self.problem.startswith("builtin:") or name not in systems.BUILTINS:
                raise ConfigError(f"unknown problem {self.problem!r}; expected mcbvp or "
                                  f"builtin:<{'|'.join(systems.BUILTINS)}>")
        try:
            self.step_control()
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        if self.problem == "mcbvp":
            self.mesh()
        if (self.lambda_min is not None and self.lambda_max is not None
                and not self.lambda_min < self.lambda_max):
            raise ConfigError("lambda_min must be below lambda_max")
        if self.norm_cap is not None and self.norm_cap <= 0:
            raise ConfigError("norm_cap must be positive")

    @property
    def sides(self) -> list[str]:
        return ["plus", "minus"] if self.side == "both" else [self.side]

    def step_control(self) -> StepControl:
        # arclength in (lambda, u) grows with the mesh size, hence larger mcbvp steps
        h_init, h_max = (0.05, 1.0) if self.problem == "mcbvp" else (0.02, 0.1)
        if self.h_init is not None:
            h_init = self.h_init
        if self.h_max is not None:
            h_max = self.h_max
        return StepControl(h_init=h_init, h_min=self.h_min, h_max=h_max,
                           newton_tol=self.newton_tol, newton_max_iter=self.newton_max_iter,
                           grow=self.grow, shrink=self.shrink, max_steps=self.max_steps)

    def mesh(self) -> mcbvp.MeshProblem:
        return mcbvp.MeshProblem(m=self.m, mu=self.mu, q_exp=self.q, delta=self.delta)

    def build(self) -> tuple[ParameterizedSystem, Point, mcbvp.MeshProblem | None]:
        """Problem system (with domain) and its regular start on the base slice."""
        if self.problem == "mcbvp":
            if self.base_lambda not in (None, 0.0):
                raise ConfigError("mcbvp continues from the lambda = 0 base state")
            mesh = self.mesh()
            window = (-5.0 if self.lambda_min is None else self.lambda_min,
                      5.0 if self.lambda_max is None else self.lambda_max)
            system = mcbvp.make_system(mesh, window,
                                       grad_threshold=self.norm_cap or mcbvp.GRAD_BLOWUP_THRESHOLD,
                                       boundary_threshold=self.boundary_threshold)
            u0 = mcbvp.base_solution(mesh)
            return system, Point(0.0, u0), mesh
        factory = systems.BUILTINS[self.problem.split(":", 1)[1]]
        default = factory().system.domain
        lam0 = default.base_lambda if self.base_lambda is None else self.base_lambda
        lo = default.lambda_window[0] if self.lambda_min is None else self.lambda_min
        hi = default.lambda_window[1] if self.lambda_max is None else self.lambda_max
        try:
            domain = DomainSpec(margin=default.margin,
                                norm_cap=default.norm_cap if self.norm_cap is None else self.norm_cap,
                                base_lambda=lam0, lambda_window=(lo, hi),
                                boundary_threshold=self.boundary_threshold, size=default.size)
            problem = factory(domain)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        return problem.system, problem.start, None


_FIELDS = {f.name: f for f in dataclasses.fields(RunConfig)}


def _convert(name, raw):
    kind = _FIELDS[name].type
    text = raw.strip()
    if "None" in kind and text.lower() in ("", "none"):
        return None
    try:
        if kind.startswith("float"):
            val = float(text)
            if not np.isfinite(val):
                raise ValueError
            return val
        if kind == "int":
            return int(text)
        if kind == "bool":
            low = text.lower()
            if low not in ("true", "false", "yes", "no", "1", "0"):
                raise ValueError
            return low in ("true", "yes", "1")
        return text
    except ValueError:
        raise ConfigError(f"bad value for {name}: {raw!r}") from None


def parse_config(text: str) -> RunConfig:
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    parser.optionxform = str
    try:
        parser.read_string("[run]\n" + text)
    except configparser.Error as exc:
        raise ConfigError(f"unreadable config: {exc}") from exc
    values = {}
    for key, raw in parser["run"].items():
        if key not in _FIELDS:
            raise ConfigError(f"unknown key {key!r}")
        values[key] = _convert(key, raw)
    return RunConfig(**values)


def load_config(path) -> RunConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text)
