"""Landau kernel a_ij(z) = |z|^(gamma+2) Pi_ij(z), its divergence b and c = div b."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .grid import SYM_INDEX, VelocityGrid

COULOMB_GAMMA = -3.0
COULOMB_DELTA_WEIGHT = -8.0 * math.pi


class KernelError(ValueError):
    pass


@dataclass(frozen=True)
class KernelSpec:
    gamma: float
    regularization_radius: float

    def __post_init__(self):
        if not (-3.0 <= self.gamma < 0.0):
            raise KernelError(f"gamma must lie in [-3, 0), got {self.gamma}")
        if not self.regularization_radius > 0:
            raise KernelError("regularization_radius must be positive")

    @classmethod
    def for_grid(cls, gamma: float, grid: VelocityGrid) -> "KernelSpec":
        return cls(float(gamma), 0.5 * grid.h)

    @property
    def coulomb(self) -> bool:
        return self.gamma == COULOMB_GAMMA


def _as_nonzero(z) -> tuple[np.ndarray, float]:
    z = np.asarray(z, dtype=float)
    r = float(np.linalg.norm(z))
    if r == 0.0:
        raise KernelError("kernel singular at origin; use tabulate_kernels")
    return z, r


def eval_a(z, gamma: float) -> np.ndarray:
    z, r = _as_nonzero(z)
    proj = np.eye(3) - np.outer(z, z) / r**2
    return r ** (gamma + 2.0) * proj


def eval_b(z, gamma: float) -> np.ndarray:
    z, r = _as_nonzero(z)
    return -2.0 * r**gamma * z


@dataclass(frozen=True)
class CValue:
    value: float
    delta_at_origin: bool = False
    delta_weight: float = 0.0


def eval_c(z, gamma: float) -> CValue:
    _, r = _as_nonzero(z)
    if gamma == COULOMB_GAMMA:
        return CValue(0.0, True, COULOMB_DELTA_WEIGHT)
    return CValue(-2.0 * (gamma + 3.0) * r**gamma)


def ball_average_power(p: float, radius: float) -> float:
    """Mean of |z|^p over the ball of given radius: 3 r^p / (p + 3)."""
    if p <= -3.0:
        raise KernelError(f"|z|^{p} is not integrable at the origin")
    return 3.0 / (p + 3.0) * radius**p


@dataclass
class TabulatedKernels:
    """Kernels sampled on the (2n-1)^3 difference lattice of a grid.

    ``a`` has shape (6, 2n-1, 2n-1, 2n-1) in upper-triangle storage, ``b`` is
    (3, ...), ``c`` is (...) or None in the Coulomb case where c = -8 pi delta_0.
    """

    grid: VelocityGrid
    spec: KernelSpec
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray | None
    delta_at_origin: bool = False
    delta_weight: float = 0.0
    origin_averages: dict = field(default_factory=dict)


def tabulate_kernels(grid: VelocityGrid, spec: KernelSpec) -> TabulatedKernels:
    g = spec.gamma
    z = grid.offsets
    r2 = z[0] ** 2 + z[1] ** 2 + z[2] ** 2
    centre = (grid.n - 1,) * 3
    r2[centre] = 1.0  # placeholder, overwritten below
    r = np.sqrt(r2)

    radial_a = r ** (g + 2.0)
    a = np.empty((6,) + grid.offset_shape)
    for s, (i, j) in enumerate(SYM_INDEX):
        proj = (1.0 if i == j else 0.0) - z[i] * z[j] / r2
        a[s] = radial_a * proj
    b = -2.0 * r**g * z

    rad = spec.regularization_radius
    avg_a = ball_average_power(g + 2.0, rad)
    # angular mean of Pi over the sphere is (2/3) I
    for s, (i, j) in enumerate(SYM_INDEX):
        a[(s,) + centre] = (2.0 / 3.0) * avg_a if i == j else 0.0
    # b is odd, its ball average vanishes
    b[(slice(None),) + centre] = 0.0
    averages = {"a_radial": avg_a, "b_vector": 0.0}

    if spec.coulomb:
        c = None
        delta, weight = True, COULOMB_DELTA_WEIGHT
    else:
        c = -2.0 * (g + 3.0) * r**g
        avg_c = ball_average_power(g, rad)
        c[centre] = -2.0 * (g + 3.0) * avg_c
        averages["c_radial"] = avg_c
        delta, weight = False, 0.0
    return TabulatedKernels(grid, spec, a, b, c, delta, weight, averages)
