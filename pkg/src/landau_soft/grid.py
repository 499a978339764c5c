"""Cell-centred velocity grid, midpoint quadrature, stencils and linear convolution.

Fields are plain numpy arrays laid out ``(..., n, n, n)`` with axis order
``(i, j, k)`` matching ``(v1, v2, v3)``:

* scalar field: shape ``(n, n, n)``
* vector field: shape ``(3, n, n, n)``
* symmetric matrix field: shape ``(6, n, n, n)``, upper triangle in the order
  ``SYM_INDEX`` (xx, xy, xz, yy, yz, zz).
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.fft as sfft

SYM_INDEX = ((0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2))
# position of (i, j) inside the 6-component upper-triangle storage
SYM_POS = np.array([[0, 1, 2], [1, 3, 4], [2, 4, 5]])

MIN_POINTS = 8


class GridError(ValueError):
    pass


def fft_workers() -> int:
    """Thread count for transforms, from ``LANDAU_SOFT_THREADS`` (default 1).

    Every transform line is computed independently, so results do not depend
    on the worker count.
    """
    try:
        return max(1, int(os.environ.get("LANDAU_SOFT_THREADS", "1")))
    except ValueError:
        return 1


@dataclass(frozen=True)
class VelocityGrid:
    n: int
    L: float

    @property
    def h(self) -> float:
        return 2.0 * self.L / self.n

    @property
    def shape(self) -> tuple[int, int, int]:
        return (self.n, self.n, self.n)

    @property
    def cell_volume(self) -> float:
        return self.h**3

    @cached_property
    def axis(self) -> np.ndarray:
        # (2k - n + 1) is an odd integer, so the node set is exactly symmetric
        # under v -> -v in floating point.
        k = np.arange(self.n, dtype=float)
        return (2.0 * k - self.n + 1.0) * (0.5 * self.h)

    @cached_property
    def v(self) -> np.ndarray:
        """Node coordinates as a vector field, shape (3, n, n, n)."""
        ax = self.axis
        return np.stack(np.meshgrid(ax, ax, ax, indexing="ij"))

    @cached_property
    def speed2(self) -> np.ndarray:
        v = self.v
        return v[0] ** 2 + v[1] ** 2 + v[2] ** 2

    @cached_property
    def speed(self) -> np.ndarray:
        return np.sqrt(self.speed2)

    @cached_property
    def bracket(self) -> np.ndarray:
        """Japanese bracket <v> = (1 + |v|^2)^(1/2) at the nodes."""
        return np.sqrt(1.0 + self.speed2)

    @cached_property
    def interior(self) -> np.ndarray:
        """1.0 on nodes not touching the box boundary, 0.0 on the outer layer."""
        return self.interior_mask(1)

    def interior_mask(self, width: int) -> np.ndarray:
        """1.0 away from the boundary, 0.0 on the outer ``width`` layers."""
        m = np.zeros(self.shape)
        s = slice(width, self.n - width)
        m[s, s, s] = 1.0
        return m

    @cached_property
    def offset_axis(self) -> np.ndarray:
        """Axis of the difference lattice z = v_i - v_j, 2n - 1 nodes, centred on 0."""
        return np.arange(-(self.n - 1), self.n, dtype=float) * self.h

    @cached_property
    def offsets(self) -> np.ndarray:
        ax = self.offset_axis
        return np.stack(np.meshgrid(ax, ax, ax, indexing="ij"))

    @property
    def offset_shape(self) -> tuple[int, int, int]:
        m = 2 * self.n - 1
        return (m, m, m)


def build_grid(n: int, L: float, *, check_min_size: bool = True) -> VelocityGrid:
    if int(n) != n or n <= 0 or n % 2:
        raise GridError(f"n must be a positive even integer, got {n!r}")
    if check_min_size and n < MIN_POINTS:
        raise GridError(f"grid too coarse for stencils: n={n} < {MIN_POINTS}")
    if not L > 0 or not math.isfinite(L):
        raise GridError(f"extent L must be positive, got {L!r}")
    return VelocityGrid(int(n), float(L))


def _check_finite(field: np.ndarray) -> None:
    if not np.all(np.isfinite(field)):
        raise GridError("field contains non-finite values")


def integrate(grid: VelocityGrid, field: np.ndarray) -> float:
    """Midpoint quadrature h^3 * sum(field).

    The sum is exactly rounded (``math.fsum``), hence independent of any
    ordering and exactly zero for odd fields on the symmetric node set.
    """
    _check_finite(field)
    if field.shape[-3:] != grid.shape:
        raise GridError(f"field shape {field.shape} does not match grid {grid.shape}")
    return grid.cell_volume * math.fsum(np.ravel(field).tolist())


def central_difference(u: np.ndarray, axis: int, h: float) -> np.ndarray:
    """(u[k+1] - u[k-1]) / 2h along ``axis`` with zero ghost values."""
    out = np.zeros_like(u)
    n = u.shape[axis]
    hi = [slice(None)] * u.ndim
    lo = [slice(None)] * u.ndim
    mid = [slice(None)] * u.ndim
    hi[axis] = slice(2, n)
    lo[axis] = slice(0, n - 2)
    mid[axis] = slice(1, n - 1)
    out[tuple(mid)] = u[tuple(hi)] - u[tuple(lo)]
    first = [slice(None)] * u.ndim
    last = [slice(None)] * u.ndim
    first[axis] = 0
    last[axis] = n - 1
    nxt = [slice(None)] * u.ndim
    prv = [slice(None)] * u.ndim
    nxt[axis] = 1
    prv[axis] = n - 2
    out[tuple(first)] = u[tuple(nxt)]
    out[tuple(last)] = -u[tuple(prv)]
    return out / (2.0 * h)


def central_difference4(u: np.ndarray, axis: int, h: float) -> np.ndarray:
    """Fourth-order antisymmetric stencil (-u[k+2] + 8u[k+1] - 8u[k-1] + u[k-2]) / 12h,
    zero ghost values."""
    pad = [(0, 0)] * u.ndim
    pad[axis] = (2, 2)
    w = np.pad(u, pad)
    n = u.shape[axis]

    def sl(lo):
        s = [slice(None)] * u.ndim
        s[axis] = slice(lo, lo + n)
        return w[tuple(s)]

    return (-sl(4) + 8.0 * sl(3) - 8.0 * sl(1) + sl(0)) / (12.0 * h)


def _difference(order: int):
    if order == 2:
        return central_difference
    if order == 4:
        return central_difference4
    raise GridError(f"unsupported stencil order {order}")


def gradient(grid: VelocityGrid, field: np.ndarray, order: int = 2) -> np.ndarray:
    _check_finite(field)
    d = _difference(order)
    return np.stack([d(field, ax, grid.h) for ax in range(3)])


def divergence(grid: VelocityGrid, vf: np.ndarray, order: int = 2) -> np.ndarray:
    _check_finite(vf)
    d = _difference(order)
    return sum(d(vf[ax], ax, grid.h) for ax in range(3))


def sym_to_full(sym: np.ndarray) -> np.ndarray:
    """(6, ...) upper-triangle storage -> (..., 3, 3) dense matrices."""
    full = sym[SYM_POS]  # (3, 3, ...)
    return np.moveaxis(full, (0, 1), (-2, -1))


def full_to_sym(full: np.ndarray) -> np.ndarray:
    return np.stack([full[..., i, j] for i, j in SYM_INDEX])


class Convolver:
    """Non-periodic convolution with kernels sampled on the difference lattice.

    ``result_k = h^3 * sum_m kernel(v_k - v_m) field_m``.  Both operands are
    embedded in a periodic box of 2n points per axis; the kernel offsets span
    -(n-1)..(n-1) so no wrap-around reaches the n output nodes.
    """

    def __init__(self, grid: VelocityGrid):
        self.grid = grid
        self.pad = 2 * grid.n

    def kernel_spectrum(self, kernel: np.ndarray) -> np.ndarray:
        g = self.grid
        if kernel.shape[-3:] != g.offset_shape:
            raise GridError(
                f"kernel shape {kernel.shape[-3:]} does not match difference lattice {g.offset_shape}"
            )
        _check_finite(kernel)
        n, P = g.n, self.pad
        lead = kernel.shape[:-3]
        wrapped = np.zeros(lead + (P, P, P))
        # offset index d in [-(n-1), n-1] goes to position d mod P
        pos = np.concatenate([np.arange(n - 1, 2 * n - 1), np.arange(0, n - 1)])
        dst = np.concatenate([np.arange(0, n), np.arange(P - n + 1, P)])
        idx = np.ix_(dst, dst, dst)
        src = np.ix_(pos, pos, pos)
        wrapped[(...,) + idx] = kernel[(...,) + src]
        return sfft.rfftn(wrapped, axes=(-3, -2, -1), workers=fft_workers())

    def field_spectrum(self, field: np.ndarray) -> np.ndarray:
        g = self.grid
        if field.shape[-3:] != g.shape:
            raise GridError(f"field shape {field.shape} does not match grid {g.shape}")
        _check_finite(field)
        P, w = self.pad, fft_workers()
        # axis by axis, so the zero padding is only transformed where needed
        out = sfft.rfft(field, n=P, axis=-1, workers=w)
        out = sfft.fft(out, n=P, axis=-2, workers=w)
        return sfft.fft(out, n=P, axis=-3, workers=w)

    def inverse(self, spectrum: np.ndarray) -> np.ndarray:
        g, P, w = self.grid, self.pad, fft_workers()
        n = g.n
        # only the first n outputs per axis are kept, so prune after each pass
        out = sfft.ifft(spectrum, axis=-3, workers=w)[..., :n, :, :]
        out = sfft.ifft(out, axis=-2, workers=w)[..., :n, :]
        out = sfft.irfft(out, n=P, axis=-1, workers=w)[..., :n]
        return g.cell_volume * out

    def __call__(self, field: np.ndarray, kernel: np.ndarray) -> np.ndarray:
        return self.inverse(self.kernel_spectrum(kernel) * self.field_spectrum(field))


def convolve(grid: VelocityGrid, field: np.ndarray, kernel_samples: np.ndarray) -> np.ndarray:
    return Convolver(grid)(field, kernel_samples)


def convolve_direct(grid: VelocityGrid, field: np.ndarray, kernel_samples: np.ndarray) -> np.ndarray:
    """O(N^2) reference double sum; only meant for small grids."""
    n = grid.n
    idx = np.arange(n)
    out = np.empty(grid.shape)
    fl = field.ravel()
    I, J, K = np.meshgrid(idx, idx, idx, indexing="ij")
    I, J, K = I.ravel(), J.ravel(), K.ravel()
    for p in range(fl.size):
        kvals = kernel_samples[I[p] - I + n - 1, J[p] - J + n - 1, K[p] - K + n - 1]
        out.flat[p] = np.dot(kvals, fl)
    return grid.cell_volume * out
