"""Divergence-form Landau operator and an explicit midpoint integrator.

The operator is Q(f) = div(F) with node flux

    F_k = sum_m a(v_k - v_m) [f_m grad f_k - f_k grad f_m] h^3
        = abar_k grad f_k - bbar_k f_k,

where ``abar = a * f`` and ``bbar = a * grad f`` (the discrete form of
``b * f`` after moving the derivative onto f).  Gradient and divergence share
one antisymmetric central stencil (fourth order by default, second order on
request).  The flux is set to zero on the outer layers reached by the stencil,
and both convolutions run over the same interior nodes, so the double sum is
antisymmetric in (k, m): mass and momentum are conserved to round-off and,
because the stencil differentiates |v|^2 exactly and a(z) z = 0 at every
sampled offset, so is energy.  For a Maxwellian the bracket vanishes up to the
stencil truncation error.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .grid import SYM_INDEX, Convolver, VelocityGrid, divergence, gradient, integrate, sym_to_full
from .kernel import COULOMB_DELTA_WEIGHT, KernelSpec, TabulatedKernels, tabulate_kernels
from .state import (
    DistributionState,
    entropy_abs,
    moments,
    weighted_H1_seminorm,
    weighted_L1,
)

log = logging.getLogger(__name__)

# Largest |symbol| * h of each central stencil.  With dt = h^2 / (6 lambda_max)
# the linearised stiffness is at most 3 rho^2 / 6 <= 0.95, inside the RK2
# stability interval [-2, 0], for both orders.
STENCIL_RADIUS = {2: 1.0, 4: 1.3722219798033597}


class SolverError(RuntimeError):
    pass


class CFLViolation(SolverError):
    pass


class ProjectionError(SolverError):
    pass


@dataclass
class CollisionCoefficients:
    a_bar: np.ndarray  # (6, n, n, n)
    b_bar: np.ndarray  # (3, n, n, n), a * grad f
    c_bar: np.ndarray | None = None
    b_direct: np.ndarray | None = None  # b * f with the sampled b kernel, diagnostics only

    def __add__(self, other: "CollisionCoefficients") -> "CollisionCoefficients":
        return CollisionCoefficients(self.a_bar + other.a_bar, self.b_bar + other.b_bar)

    def eigenvalues(self) -> np.ndarray:
        """Eigenvalues of abar at each node, shape (n, n, n, 3), ascending."""
        return np.linalg.eigvalsh(sym_to_full(self.a_bar))


@dataclass(frozen=True)
class SolverConfig:
    t_end: float = 1.0
    dt: float | None = None  # None: CFL-driven
    cfl_safety: float = 0.4
    max_steps: int | None = None
    output_stride: int = 1
    conservative_projection: bool = True
    clamp_negative: bool = True
    blowup_factor: float = 1e6

    def __post_init__(self):
        if not (0.0 < self.cfl_safety <= 1.0):
            raise ValueError("cfl_safety must lie in (0, 1]")
        if self.dt is not None and not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.output_stride < 1:
            raise ValueError("output_stride must be >= 1")
        if not self.t_end > 0:
            raise ValueError("t_end must be positive")


class LandauOperator:
    """Tabulated kernels plus cached spectra for one (grid, gamma) pair."""

    def __init__(self, grid: VelocityGrid, spec: KernelSpec | float, stencil_order: int = 4):
        if not isinstance(spec, KernelSpec):
            spec = KernelSpec.for_grid(spec, grid)
        if stencil_order not in STENCIL_RADIUS:
            raise SolverError(f"stencil_order must be one of {sorted(STENCIL_RADIUS)}")
        self.grid = grid
        self.spec = spec
        self.order = stencil_order
        self.mask = grid.interior_mask(stencil_order // 2)
        self.kernels: TabulatedKernels = tabulate_kernels(grid, spec)
        self.conv = Convolver(grid)
        self._a_hat = self.conv.kernel_spectrum(self.kernels.a)
        self._b_hat = None
        self._c_hat = None

    @property
    def gamma(self) -> float:
        return self.spec.gamma

    def _b_spectrum(self):
        if self._b_hat is None:
            self._b_hat = self.conv.kernel_spectrum(self.kernels.b)
        return self._b_hat

    def _c_spectrum(self):
        if self._c_hat is None and self.kernels.c is not None:
            self._c_hat = self.conv.kernel_spectrum(self.kernels.c)
        return self._c_hat

    def compute_coefficients(self, state: DistributionState, diagnostics: bool = False) -> CollisionCoefficients:
        if state.grid != self.grid:
            raise SolverError("state grid does not match operator grid")
        g = self.grid
        f = state.values
        mask = self.mask
        f_hat = self.conv.field_spectrum(mask * f)
        grad_hat = self.conv.field_spectrum(mask * gradient(g, f, self.order))
        a_bar = self.conv.inverse(self._a_hat * f_hat)
        drift_hat = np.empty((3,) + grad_hat.shape[1:], dtype=complex)
        for i in range(3):
            drift_hat[i] = sum(self._a_hat[_sym(i, j)] * grad_hat[j] for j in range(3))
        b_bar = self.conv.inverse(drift_hat)
        coeffs = CollisionCoefficients(a_bar, b_bar)
        if diagnostics:
            coeffs.c_bar = self.c_bar(state, f_hat)
            coeffs.b_direct = self.conv.inverse(self._b_spectrum() * f_hat)
        return coeffs

    def c_bar(self, state: DistributionState, f_hat=None) -> np.ndarray:
        if self.kernels.delta_at_origin:
            return COULOMB_DELTA_WEIGHT * state.values
        if f_hat is None:
            f_hat = self.conv.field_spectrum(self.mask * state.values)
        return self.conv.inverse(self._c_spectrum() * f_hat)

    def flux(self, state: DistributionState, coeffs: CollisionCoefficients) -> np.ndarray:
        g = self.grid
        f = state.values
        grad = gradient(g, f, self.order)
        F = np.empty_like(grad)
        A = coeffs.a_bar
        for i in range(3):
            F[i] = sum(A[_sym(i, j)] * grad[j] for j in range(3)) - coeffs.b_bar[i] * f
        return F * self.mask

    def apply_Q(self, state: DistributionState, coeffs: CollisionCoefficients) -> np.ndarray:
        if state.grid != self.grid or coeffs.a_bar.shape[1:] != self.grid.shape:
            raise SolverError("grid mismatch between state, coefficients and operator")
        return divergence(self.grid, self.flux(state, coeffs), self.order)

    def Q(self, state: DistributionState) -> np.ndarray:
        return self.apply_Q(state, self.compute_coefficients(state))

    def max_stable_dt(self, coeffs: CollisionCoefficients, safety: float = 1.0) -> float:
        lam = float(coeffs.eigenvalues()[..., 2].max())
        if lam <= 0:
            return math.inf
        return safety * self.grid.h**2 / (6.0 * lam)

    def step(
        self,
        state: DistributionState,
        coeffs: CollisionCoefficients,
        dt: float,
        targets: np.ndarray | None = None,
        projection: bool = True,
        check_cfl: bool = True,
        clamp: bool = False,
    ) -> DistributionState:
        """One explicit midpoint step; optional projection onto ``targets``
        (mass, momentum, energy), defaulting to the moments of ``state``.

        With ``clamp`` the negative undershoots are removed before the
        projection, so the projected moments stay exact; the removed negative
        mass is recorded as ``clamped_mass`` in the state metadata.
        """
        if check_cfl:
            limit = self.max_stable_dt(coeffs)
            if dt > limit:
                raise CFLViolation(f"dt={dt:.4e} exceeds stability limit {limit:.4e}")
        f0 = state.values
        k1 = self.apply_Q(state, coeffs)
        mid = state.with_values(f0 + 0.5 * dt * k1)
        k2 = self.Q(mid)
        new = state.with_values(f0 + dt * k2, time=state.time + dt, clamped_mass=0.0)
        new.meta["mass_before_projection"] = integrate(self.grid, new.values)
        if clamp:
            new = new.clamped()
        if projection:
            if targets is None:
                targets = moment_vector(state)
            new = project_moments(new, targets)
        return new

    def simulate(
        self,
        initial: DistributionState,
        config: SolverConfig,
        alpha: float | None = None,
    ) -> "Trajectory":
        if alpha is None:
            alpha = default_alpha(self.gamma)
        targets = moment_vector(initial)
        state = initial
        coeffs = self.compute_coefficients(state)
        rows = [diagnose(self, state, coeffs, alpha)]
        states = [state]
        l2_0 = rows[0]["l2"]
        steps = 0
        blowup = False
        while state.time < config.t_end * (1.0 - 1e-12):
            if config.max_steps is not None and steps >= config.max_steps:
                break
            limit = self.max_stable_dt(coeffs)
            if config.dt is None:
                dt = config.cfl_safety * limit
            else:
                dt = config.dt
                if dt > limit:
                    raise CFLViolation(f"dt={dt:.4e} exceeds stability limit {limit:.4e}")
            dt = min(dt, config.t_end - state.time)
            state = self.step(
                state, coeffs, dt, targets, config.conservative_projection, check_cfl=False, clamp=config.clamp_negative
            )
            steps += 1
            coeffs = self.compute_coefficients(state)
            last = config.t_end - state.time <= 1e-12 * config.t_end or (
                config.max_steps is not None and steps >= config.max_steps
            )
            l2 = math.sqrt(integrate(self.grid, state.values**2))
            if not math.isfinite(l2) or l2 > config.blowup_factor * l2_0:
                log.warning("blow-up detected at t=%.4g (|f|_2=%.3e)", state.time, l2)
                blowup = True
                rows.append({"t": state.time, "l2": l2, "blowup": True})
                states.append(state)
                break
            if steps % config.output_stride == 0 or last:
                rows.append(diagnose(self, state, coeffs, alpha, dt=dt))
                states.append(state)
        return Trajectory(self.gamma, alpha, states, rows, blowup, steps, config)


def _sym(i: int, j: int) -> int:
    return SYM_INDEX.index((min(i, j), max(i, j)))


def default_alpha(gamma: float) -> float:
    return max(0.0, -1.0 - 1.5 * gamma)


def moment_vector(state: DistributionState) -> np.ndarray:
    g, f = state.grid, state.values
    basis = _moment_basis(g)
    return np.array([integrate(g, phi * f) for phi in basis])


def _moment_basis(g: VelocityGrid):
    return (np.ones(g.shape), g.v[0], g.v[1], g.v[2], 0.5 * g.speed2)


def project_moments(state: DistributionState, targets: np.ndarray) -> DistributionState:
    """Add the weighted least-squares minimal correction f * sum(lam_i phi_i)
    that restores (mass, momentum, energy) to ``targets``."""
    g, f = state.grid, state.values
    basis = _moment_basis(g)
    current = np.array([integrate(g, phi * f) for phi in basis])
    # the Gram matrix only scales the correction, plain pairwise sums suffice
    B = np.stack([np.ravel(phi) for phi in basis])
    gram = g.cell_volume * (B * np.ravel(f)) @ B.T
    try:
        lam = np.linalg.solve(gram, targets - current)
    except np.linalg.LinAlgError as exc:
        raise ProjectionError("degenerate moment Gram matrix") from exc
    if not np.all(np.isfinite(lam)):
        raise ProjectionError("degenerate moment Gram matrix")
    w = f * sum(l * p for l, p in zip(lam, basis))
    return state.with_values(f + w)


def coercivity_ratio(op: LandauOperator, coeffs: CollisionCoefficients) -> float:
    """min over nodes of lambda_min(abar(v)) / <v>^gamma."""
    lam_min = coeffs.eigenvalues()[..., 0]
    return float((lam_min / op.grid.bracket**op.gamma).min())


def diagnose(op: LandauOperator, state: DistributionState, coeffs: CollisionCoefficients, alpha: float, dt=None) -> dict:
    g, gam = op.grid, op.gamma
    f = state.values
    mom = moments(state)
    w = g.bracket
    weighted = w**alpha * f
    row = {
        "t": state.time,
        "mass": mom.mass,
        "px": mom.momentum[0],
        "py": mom.momentum[1],
        "pz": mom.momentum[2],
        "energy": mom.energy,
        "entropy": mom.entropy,
        "entropy_abs": entropy_abs(state),
        "l2": math.sqrt(integrate(g, f**2)),
        "l2_alpha": math.sqrt(integrate(g, weighted**2)),
        "h1_gamma_half": weighted_H1_seminorm(state, gam / 2.0),
        "h1_weighted": weighted_H1_seminorm(state, alpha + gam / 2.0),
        "h1_alpha": weighted_H1_seminorm(state, alpha),
        "M2": weighted_L1(state, 2.0),
        "M_neg_gamma": weighted_L1(state, -gam),
        "M_neg3gamma": weighted_L1(state, -3.0 * gam),
        "cubic_weighted": integrate(g, w ** (2.0 * alpha) * f**3),
        "hardy_weighted": integrate(g, w**gam * weighted**2 / g.speed2),
        "coer_min_ratio": coercivity_ratio(op, coeffs),
        "min_value": float(f.min()),
        "mass_before_projection": state.meta.get("mass_before_projection", mom.mass),
        "clamped_mass": state.meta.get("clamped_mass", 0.0),
        "dt": dt,
        "blowup": False,
    }
    row["X"] = row["l2_alpha"] ** 2
    if -2.0 < gam < 0.0:
        row["M_mu"] = weighted_L1(state, growth_moment_order(gam))
    return row


def growth_moment_order(gamma: float) -> float:
    """mu = -4 gamma (3 - gamma) / (3 (2 + gamma)), defined for gamma in (-2, 0)."""
    if not (-2.0 < gamma < 0.0):
        raise ValueError(f"moment order mu requires gamma in (-2, 0), got {gamma}")
    return -4.0 * gamma * (3.0 - gamma) / (3.0 * (2.0 + gamma))


@dataclass
class Trajectory:
    gamma: float
    alpha: float
    states: list
    rows: list
    blowup: bool
    steps: int
    config: SolverConfig | None = None
    extra: dict = field(default_factory=dict)

    def column(self, name: str) -> np.ndarray:
        return np.array([r.get(name, np.nan) for r in self.rows], dtype=float)

    @property
    def times(self) -> np.ndarray:
        return self.column("t")
