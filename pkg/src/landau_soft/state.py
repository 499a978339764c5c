"""Distribution states, conserved quantities, entropy and weighted norms."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.special import erf

from .grid import VelocityGrid, gradient, integrate

NEGATIVITY_TOL = 1e-12
ENTROPY_FLOOR = 1e-300


class StateError(ValueError):
    pass


@dataclass(frozen=True)
class DistributionState:
    grid: VelocityGrid
    values: np.ndarray
    time: float = 0.0
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.values.shape != self.grid.shape:
            raise StateError(f"values shape {self.values.shape} != grid shape {self.grid.shape}")
        if self.time < 0:
            raise StateError("time must be nonnegative")

    def with_values(self, values: np.ndarray, time: float | None = None, **meta) -> "DistributionState":
        return replace(self, values=values, time=self.time if time is None else time, meta={**self.meta, **meta})

    def scaled(self, factor: float) -> "DistributionState":
        return self.with_values(factor * self.values)

    def min_negative(self) -> float:
        return float(min(self.values.min(), 0.0))

    def check_nonnegative(self, tol: float = NEGATIVITY_TOL) -> None:
        vmax = float(np.abs(self.values).max())
        if self.values.min() < -tol * vmax:
            raise StateError(
                f"state has negative values down to {self.values.min():.3e} "
                f"(tolerance {tol:g} x max {vmax:.3e})"
            )

    def clamped(self) -> "DistributionState":
        """Clamp negative undershoots to zero; the removed mass is recorded in meta."""
        neg = np.minimum(self.values, 0.0)
        added = -integrate(self.grid, neg)
        return self.with_values(np.maximum(self.values, 0.0), clamped_mass=added)


@dataclass(frozen=True)
class ConservedQuantities:
    mass: float
    momentum: tuple[float, float, float]
    energy: float
    entropy: float


def maxwellian(grid: VelocityGrid, mass: float, temperature: float, u=(0.0, 0.0, 0.0)) -> DistributionState:
    if not mass > 0 or not temperature > 0:
        raise StateError("mass and temperature must be positive")
    u = np.asarray(u, dtype=float)
    d2 = sum((grid.v[i] - u[i]) ** 2 for i in range(3))
    vals = mass * (2.0 * math.pi * temperature) ** -1.5 * np.exp(-d2 / (2.0 * temperature))
    fits = float(np.linalg.norm(u)) + 3.0 * math.sqrt(temperature) <= grid.L / 2.0
    outside = mass_outside_box(grid, mass, temperature, u)
    return DistributionState(grid, vals, 0.0, {"support_fits": fits, "mass_outside_box": outside})


def mass_outside_box(grid: VelocityGrid, mass: float, temperature: float, u) -> float:
    """Closed-form mass of a Maxwellian lying outside [-L, L]^3."""
    s = math.sqrt(2.0 * temperature)
    inside = 1.0
    for ui in u:
        inside *= 0.5 * (erf((grid.L - ui) / s) + erf((grid.L + ui) / s))
    return mass * (1.0 - inside)


def mixture(grid: VelocityGrid, components) -> DistributionState:
    """Sum of Maxwellians given as (mass, temperature, u) triples."""
    vals = np.zeros(grid.shape)
    outside = 0.0
    for m, T, u in components:
        st = maxwellian(grid, m, T, u)
        vals += st.values
        outside += st.meta["mass_outside_box"]
    return DistributionState(grid, vals, 0.0, {"mass_outside_box": outside, "components": len(components)})


def _entropy_density(f: np.ndarray) -> np.ndarray:
    out = np.zeros_like(f)
    pos = f > ENTROPY_FLOOR
    out[pos] = f[pos] * np.log(f[pos])
    return out


def moments(state: DistributionState, tol: float = NEGATIVITY_TOL) -> ConservedQuantities:
    state.check_nonnegative(tol)
    g, f = state.grid, state.values
    m = integrate(g, f)
    p = tuple(integrate(g, g.v[i] * f) for i in range(3))
    e = 0.5 * integrate(g, g.speed2 * f)
    H = integrate(g, _entropy_density(f))
    return ConservedQuantities(m, p, e, H)


def entropy_abs(state: DistributionState) -> float:
    """Integral of f |log f| (0 log 0 = 0)."""
    return integrate(state.grid, np.abs(_entropy_density(state.values)))


def weighted_L1(state: DistributionState, s: float) -> float:
    g = state.grid
    return integrate(g, np.abs(state.values) * g.bracket**s)


def weighted_L2(state: DistributionState, s: float) -> float:
    g = state.grid
    return math.sqrt(integrate(g, state.values**2 * g.bracket ** (2.0 * s)))


def weighted_H1_seminorm(state: DistributionState, beta: float) -> float:
    """Integral of |grad(<v>^beta f)|^2 with central differences."""
    g = state.grid
    grad = gradient(g, g.bracket**beta * state.values)
    return integrate(g, grad[0] ** 2 + grad[1] ** 2 + grad[2] ** 2)


def weighted_state(state: DistributionState, alpha: float) -> DistributionState:
    """The state g = <v>^alpha f viewed as a distribution on the same grid."""
    return state.with_values(state.grid.bracket**alpha * state.values)
