"""Run configuration: flat ``key = value`` text with dotted keys.

Lines starting with ``#`` and blank lines are ignored.  Every key must be in
:data:`SCHEMA`; missing keys take their defaults, and the resolved mapping is
echoed in every report.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .grid import VelocityGrid, build_grid
from .solver import SolverConfig, default_alpha
from .state import DistributionState, maxwellian, mixture


class ConfigError(ValueError):
    pass


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _optional(conv):
    def parse(text: str):
        return None if text.strip().lower() in ("none", "") else conv(text)

    return parse


def _vector(text: str) -> tuple[float, float, float]:
    parts = [float(p) for p in text.replace(",", " ").split()]
    if len(parts) != 3:
        raise ValueError("expected three components")
    return tuple(parts)


def _names(text: str) -> tuple[str, ...]:
    return tuple(p.strip() for p in text.split(",") if p.strip())


# key -> (parser, default)
SCHEMA: dict[str, tuple] = {
    "gamma": (float, -1.0),
    "alpha": (_optional(float), None),
    "seed": (int, 0),
    "checks": (_names, ("auto",)),
    "grid.n": (int, 32),
    "grid.L": (float, 6.0),
    "initial.kind": (str, "maxwellian"),
    "initial.mass": (float, 1.0),
    "initial.temperature": (float, 1.0),
    "initial.u": (_vector, (0.0, 0.0, 0.0)),
    "initial.separation": (float, 1.0),
    "initial.path": (_optional(str), None),
    "solver.t_end": (float, 1.0),
    "solver.dt": (_optional(float), None),
    "solver.cfl_safety": (float, 0.4),
    "solver.max_steps": (_optional(int), None),
    "solver.output_stride": (int, 1),
    "solver.projection": (_bool, True),
    "solver.clamp_negative": (_bool, True),
    "solver.stencil_order": (int, 4),
    "gronwall.mode": (str, "traced"),
    "trap.epsilon": (float, 1.0),
    "trap.delta": (_optional(float), None),
    "trap.coer_source": (str, "empirical"),
    "trap.lambda_mode": (str, "explicit"),
    "local.epsilon": (float, 0.1),
    "ledger.c_pitt": (float, 1.0),
    "ledger.c_hardy": (float, 0.25),
    "ledger.c_parseval": (float, 1.0),
    "coercivity.m0": (_optional(float), None),
    "coercivity.e0": (_optional(float), None),
    "coercivity.H0": (_optional(float), None),
    "bench.count": (int, 100),
    "bench.n": (int, 32),
    "bench.L": (float, 8.0),
    "output.csv": (str, "timeseries.csv"),
    "output.json": (str, "report.json"),
}

INITIAL_KINDS = ("maxwellian", "two_maxwellians", "file")

# check -> (theorem part or estimate, predicate on gamma, range text)
CHECK_REGIMES = {
    "coercivity": ("the coercivity estimate", lambda g: -3.0 <= g < 0.0, "[-3, 0)"),
    "gronwall": ("Theorem part 1", lambda g: -2.0 <= g < 0.0, "[-2, 0)"),
    "trap": ("Theorem part 2", lambda g: -3.0 <= g <= -2.0, "[-3, -2]"),
    "h1": ("Theorem part 3", lambda g: -3.0 <= g < 0.0, "[-3, 0)"),
    "local": ("the local estimate", lambda g: -3.0 < g < -2.0, "(-3, -2)"),
    "growth": ("the growth bound", lambda g: -2.0 < g < 0.0, "(-2, 0)"),
}


def auto_checks(gamma: float) -> tuple[str, ...]:
    return tuple(name for name, (_, ok, _) in CHECK_REGIMES.items() if ok(gamma))


@dataclass(frozen=True)
class RunConfig:
    values: dict = field(default_factory=dict)

    def __getitem__(self, key: str):
        return self.values[key]

    @property
    def gamma(self) -> float:
        return self.values["gamma"]

    @property
    def alpha(self) -> float:
        a = self.values["alpha"]
        return default_alpha(self.gamma) if a is None else a

    @property
    def checks(self) -> tuple[str, ...]:
        return self.values["checks"]

    def grid(self) -> VelocityGrid:
        return build_grid(self.values["grid.n"], self.values["grid.L"])

    def solver_config(self) -> SolverConfig:
        v = self.values
        return SolverConfig(
            t_end=v["solver.t_end"],
            dt=v["solver.dt"],
            cfl_safety=v["solver.cfl_safety"],
            max_steps=v["solver.max_steps"],
            output_stride=v["solver.output_stride"],
            conservative_projection=v["solver.projection"],
            clamp_negative=v["solver.clamp_negative"],
        )

    def initial_state(self) -> DistributionState:
        v = self.values
        g = self.grid()
        kind = v["initial.kind"]
        m, T = v["initial.mass"], v["initial.temperature"]
        if kind == "maxwellian":
            return maxwellian(g, m, T, v["initial.u"])
        if kind == "two_maxwellians":
            s = v["initial.separation"]
            return mixture(g, [(0.5 * m, T, (s, 0.0, 0.0)), (0.5 * m, T, (-s, 0.0, 0.0))])
        vals = np.load(v["initial.path"])
        if vals.shape != g.shape:
            raise ConfigError(f"initial.path holds shape {vals.shape}, grid needs {g.shape}")
        return DistributionState(g, np.asarray(vals, dtype=float))

    def to_dict(self) -> dict:
        out = {}
        for k, val in sorted(self.values.items()):
            out[k] = list(val) if isinstance(val, tuple) else val
        out["alpha_resolved"] = self.alpha
        return out


def parse_config(text: str, overrides: dict[str, str] | None = None) -> RunConfig:
    raw: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, val = (s.strip() for s in line.split("=", 1))
        if key in raw:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        raw[key] = val
    raw.update(overrides or {})
    unknown = sorted(set(raw) - set(SCHEMA))
    if unknown:
        raise ConfigError(f"unknown configuration keys: {', '.join(unknown)}")
    values = {}
    for key, (conv, default) in SCHEMA.items():
        if key in raw:
            try:
                values[key] = conv(raw[key])
            except ValueError as exc:
                raise ConfigError(f"bad value for {key}: {raw[key]!r} ({exc})") from None
        else:
            values[key] = default
    _validate(values)
    return RunConfig(values)


def _validate(v: dict) -> None:
    gam = v["gamma"]
    if not (-3.0 <= gam < 0.0) or not math.isfinite(gam):
        raise ConfigError(f"gamma must lie in [-3, 0), got {gam}")
    if v["initial.kind"] not in INITIAL_KINDS:
        raise ConfigError(f"initial.kind must be one of {', '.join(INITIAL_KINDS)}")
    if v["initial.kind"] == "file" and not v["initial.path"]:
        raise ConfigError("initial.kind = file needs initial.path")
    if v["alpha"] is not None and v["alpha"] < default_alpha(gam) - 1e-12 and gam <= -2.0:
        raise ConfigError(f"alpha must satisfy alpha >= -1 - 3/2 gamma = {default_alpha(gam):g}")
    if v["gronwall.mode"] not in ("traced", "fitted"):
        raise ConfigError("gronwall.mode must be 'traced' or 'fitted'")
    if v["trap.coer_source"] not in ("empirical", "certified"):
        raise ConfigError("trap.coer_source must be 'empirical' or 'certified'")
    if v["trap.lambda_mode"] not in ("explicit", "fitted"):
        raise ConfigError("trap.lambda_mode must be 'explicit' or 'fitted'")
    checks = v["checks"]
    if checks == ("auto",):
        v["checks"] = auto_checks(gam)
        return
    for name in checks:
        if name not in CHECK_REGIMES:
            raise ConfigError(f"unknown check {name!r}; choose from {', '.join(CHECK_REGIMES)}")
        part, ok, rng = CHECK_REGIMES[name]
        if not ok(gam):
            raise ConfigError(f"check {name!r} is outside its regime: {part} covers gamma in {rng}, got gamma={gam}")
