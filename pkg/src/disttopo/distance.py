"""Gaussian distance maps: per-obstacle kernels combined by pointwise max.

Every obstacle pixel contributes ``G(d) = exp(-d^2 / (2 sigma^2))`` (peak 1.0)
out to a circular truncation radius; the map keeps the maximum response.  All
values come from one lookup table indexed by the integer squared distance, so
the kernel-stamping path and the nearest-obstacle (EDT) path produce bitwise
identical rasters.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy import ndimage

from .grid import PixelCoord

TILE = 64


class Rect(NamedTuple):
    """Axis-aligned pixel rectangle, ``[col0, col0+width) x [row0, row0+height)``."""

    col0: int
    row0: int
    width: int
    height: int

    @property
    def col1(self) -> int:
        return self.col0 + self.width

    @property
    def row1(self) -> int:
        return self.row0 + self.height

    @property
    def empty(self) -> bool:
        return self.width <= 0 or self.height <= 0

    @property
    def shape(self) -> tuple[int, int]:
        return (self.height, self.width)

    @classmethod
    def from_corners(cls, col0: int, row0: int, col1: int, row1: int) -> "Rect":
        return cls(col0, row0, max(0, col1 - col0), max(0, row1 - row0))

    def union(self, other: "Rect") -> "Rect":
        if self.empty:
            return other
        if other.empty:
            return self
        return Rect.from_corners(
            min(self.col0, other.col0),
            min(self.row0, other.row0),
            max(self.col1, other.col1),
            max(self.row1, other.row1),
        )

    def intersect(self, other: "Rect") -> "Rect":
        return Rect.from_corners(
            max(self.col0, other.col0),
            max(self.row0, other.row0),
            min(self.col1, other.col1),
            min(self.row1, other.row1),
        )

    def expand(self, margin: int) -> "Rect":
        return Rect(self.col0 - margin, self.row0 - margin, self.width + 2 * margin, self.height + 2 * margin)

    def contains(self, other: "Rect") -> bool:
        return (
            other.col0 >= self.col0
            and other.row0 >= self.row0
            and other.col1 <= self.col1
            and other.row1 <= self.row1
        )

    def slices(self, inner: "Rect") -> tuple[slice, slice]:
        """Array slices addressing ``inner`` in a raster whose [0, 0] is this rect's corner."""
        return (
            slice(inner.row0 - self.row0, inner.row1 - self.row0),
            slice(inner.col0 - self.col0, inner.col1 - self.col0),
        )

    def snapped(self, tile: int = TILE) -> "Rect":
        """Smallest tile-aligned rectangle covering this one."""
        return Rect.from_corners(
            (self.col0 // tile) * tile,
            (self.row0 // tile) * tile,
            -((-self.col1) // tile) * tile,
            -((-self.row1) // tile) * tile,
        )


EMPTY_RECT = Rect(0, 0, 0, 0)


def pixels_bounds(pixels: np.ndarray) -> Rect:
    if len(pixels) == 0:
        return EMPTY_RECT
    cmin, rmin = pixels.min(axis=0)
    cmax, rmax = pixels.max(axis=0)
    return Rect.from_corners(int(cmin), int(rmin), int(cmax) + 1, int(rmax) + 1)


def mask_bounds(mask: np.ndarray, origin: PixelCoord) -> Rect:
    rows = np.flatnonzero(mask.any(axis=1))
    if len(rows) == 0:
        return EMPTY_RECT
    cols = np.flatnonzero(mask.any(axis=0))
    return Rect.from_corners(
        origin.col + int(cols[0]), origin.row + int(rows[0]),
        origin.col + int(cols[-1]) + 1, origin.row + int(rows[-1]) + 1,
    )


def reframe(data: np.ndarray, old: Rect, new: Rect, fill=0) -> np.ndarray:
    """Copy ``data`` (covering ``old``) onto a raster covering ``new``."""
    out = np.full(new.shape, fill, dtype=data.dtype)
    common = old.intersect(new)
    if not common.empty:
        out[new.slices(common)] = data[old.slices(common)]
    return out


class GaussianKernel:
    """Truncated, peak-normalized Gaussian sampled at integer offsets."""

    def __init__(self, sigma: float, radius: int | None = None):
        if not sigma > 0:
            raise ValueError("sigma must be positive")
        if radius is None:
            radius = math.ceil(3.5 * sigma)
        if radius < math.ceil(3 * sigma):
            raise ValueError(f"radius {radius} below ceil(3*sigma) = {math.ceil(3 * sigma)}")
        self.sigma = float(sigma)
        self.radius = int(radius)
        self.max_d2 = self.radius * self.radius
        d2 = np.arange(self.max_d2 + 2, dtype=np.float64)
        self.table = np.exp(-d2 / (2.0 * self.sigma * self.sigma))
        # index max_d2 + 1 stands for "beyond the truncation radius"
        self.table[-1] = 0.0
        off = np.arange(-self.radius, self.radius + 1)
        self.samples = self.from_d2(off[:, None] ** 2 + off[None, :] ** 2)

    @property
    def size(self) -> int:
        return 2 * self.radius + 1

    @property
    def peak(self) -> float:
        return float(self.table[0])

    def from_d2(self, d2: np.ndarray) -> np.ndarray:
        """Kernel values for integer squared distances (0 past the radius)."""
        idx = np.minimum(np.asarray(d2, dtype=np.int64), self.max_d2 + 1)
        return self.table[idx]

    def __call__(self, d: float) -> float:
        """Continuous, untruncated G(d); handy in tests and docs."""
        return math.exp(-d * d / (2.0 * self.sigma * self.sigma))

    def __repr__(self) -> str:
        return f"GaussianKernel(sigma={self.sigma}, radius={self.radius})"


@dataclass
class DistanceMap:
    values: np.ndarray
    origin: PixelCoord
    sigma: float

    @classmethod
    def empty(cls, sigma: float) -> "DistanceMap":
        return cls(np.zeros((0, 0)), PixelCoord(0, 0), sigma)

    @property
    def bounds(self) -> Rect:
        return Rect(self.origin.col, self.origin.row, self.values.shape[1], self.values.shape[0])

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def height(self) -> int:
        return self.values.shape[0]

    def at(self, col: int, row: int) -> float:
        """Value at a global pixel; 0 outside the canvas."""
        r, c = row - self.origin.row, col - self.origin.col
        if 0 <= r < self.height and 0 <= c < self.width:
            return float(self.values[r, c])
        return 0.0

    def crop(self, rect: Rect) -> np.ndarray:
        return reframe(self.values, self.bounds, rect, 0.0)

    def reframed(self, rect: Rect) -> "DistanceMap":
        return DistanceMap(self.crop(rect), PixelCoord(rect.col0, rect.row0), self.sigma)

    def copy(self) -> "DistanceMap":
        return DistanceMap(self.values.copy(), self.origin, self.sigma)


@dataclass
class DirtyMask:
    flags: np.ndarray
    origin: PixelCoord

    @property
    def bounds(self) -> Rect:
        return Rect(self.origin.col, self.origin.row, self.flags.shape[1], self.flags.shape[0])

    def any(self) -> bool:
        return bool(self.flags.any())


def _stamp(values: np.ndarray, bounds: Rect, pixels: np.ndarray, kernel: GaussianKernel) -> None:
    r = kernel.radius
    h, w = values.shape
    for col, row in pixels:
        c0, r0 = col - r - bounds.col0, row - r - bounds.row0
        c1, r1 = c0 + kernel.size, r0 + kernel.size
        cc0, rr0, cc1, rr1 = max(c0, 0), max(r0, 0), min(c1, w), min(r1, h)
        if cc0 >= cc1 or rr0 >= rr1:
            continue
        win = values[rr0:rr1, cc0:cc1]
        np.maximum(win, kernel.samples[rr0 - r0:rr1 - r0, cc0 - c0:cc1 - c0], out=win)


def _nearest(values: np.ndarray, bounds: Rect, pixels: np.ndarray, kernel: GaussianKernel) -> None:
    # the max over kernels equals the kernel at the nearest obstacle, since
    # the table is monotone in d^2; the EDT supplies the nearest obstacle
    ext = bounds.expand(kernel.radius)
    inside = (
        (pixels[:, 0] >= ext.col0) & (pixels[:, 0] < ext.col1)
        & (pixels[:, 1] >= ext.row0) & (pixels[:, 1] < ext.row1)
    )
    pixels = pixels[inside]
    if len(pixels) == 0:
        return
    background = np.ones(ext.shape, dtype=bool)
    background[pixels[:, 1] - ext.row0, pixels[:, 0] - ext.col0] = False
    idx = ndimage.distance_transform_edt(background, return_distances=False, return_indices=True)
    sl = ext.slices(bounds)
    rows = np.arange(ext.row0, ext.row1)[sl[0], None]
    cols = np.arange(ext.col0, ext.col1)[None, sl[1]]
    dr = idx[0][sl] + ext.row0 - rows
    dc = idx[1][sl] + ext.col0 - cols
    np.maximum(values, kernel.from_d2(dr * dr + dc * dc), out=values)


def build_distance_map(
    obstacles: np.ndarray,
    bounds: Rect,
    kernel: GaussianKernel,
    method: str = "auto",
) -> DistanceMap:
    """Max-of-Gaussians map of ``obstacles`` ((N, 2) col,row) over ``bounds``.

    ``method`` is ``"stamp"`` (one kernel per obstacle), ``"edt"`` (nearest
    obstacle via a Euclidean distance transform) or ``"auto"``, which picks
    the cheaper one.  Both give identical values.
    """
    if bounds.empty:
        raise ValueError("distance map bounds must be non-empty")
    pixels = np.asarray(obstacles, dtype=np.int64).reshape(-1, 2)
    values = np.zeros(bounds.shape, dtype=np.float64)
    if len(pixels):
        if method == "auto":
            ext_area = (bounds.width + 2 * kernel.radius) * (bounds.height + 2 * kernel.radius)
            method = "stamp" if len(pixels) * kernel.size**2 < 4 * ext_area else "edt"
        if method == "stamp":
            _stamp(values, bounds, pixels, kernel)
        elif method == "edt":
            _nearest(values, bounds, pixels, kernel)
        else:
            raise ValueError(f"unknown method {method!r}")
    return DistanceMap(values, PixelCoord(bounds.col0, bounds.row0), kernel.sigma)


def local_distance_map(obstacles: np.ndarray, kernel: GaussianKernel, method: str = "auto") -> DistanceMap | None:
    """Distance map over the obstacles' footprint (bounding box + radius)."""
    if len(obstacles) == 0:
        return None
    return build_distance_map(obstacles, pixels_bounds(obstacles).expand(kernel.radius), kernel, method)


def grown_bounds(current: Rect, needed: Rect, tile: int = TILE) -> Rect:
    """Canvas covering ``current`` and ``needed``, grown in whole tiles."""
    if current.empty:
        return needed.snapped(tile)
    if current.contains(needed):
        return current
    return current.union(needed.snapped(tile))


def merge_into(global_dm: DistanceMap, local: DistanceMap, tile: int = TILE) -> tuple[DistanceMap, Rect, np.ndarray]:
    """Max-merge ``local`` into ``global_dm`` in place, growing it if needed.

    Returns the (possibly reallocated) map, the local footprint and a boolean
    raster over that footprint flagging strictly increased pixels.
    """
    footprint = local.bounds
    canvas = grown_bounds(global_dm.bounds, footprint, tile)
    if canvas != global_dm.bounds:
        global_dm = global_dm.reframed(canvas)
    window = global_dm.values[canvas.slices(footprint)]
    increased = local.values > window
    np.maximum(window, local.values, out=window)
    return global_dm, footprint, increased


def merge_distance_maps(global_dm: DistanceMap, local: DistanceMap, tile: int = TILE) -> tuple[DistanceMap, DirtyMask]:
    """Pure form of :func:`merge_into`: ``out(x) = max(global(x), local(x))``.

    The local map is placed by its own canvas origin (the frame offset).  The
    mask lives on the output canvas and flags exactly the increased pixels.
    """
    merged, footprint, increased = merge_into(global_dm.copy(), local, tile)
    flags = np.zeros(merged.values.shape, dtype=bool)
    flags[merged.bounds.slices(footprint)] = increased
    return merged, DirtyMask(flags, merged.origin)
