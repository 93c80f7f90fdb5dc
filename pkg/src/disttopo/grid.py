"""Occupancy grids, poses, scan frames and the world/pixel mapping.

Pixel ``(col, row)`` covers the world square
``[origin_x + col*res, origin_x + (col+1)*res) x [origin_y + row*res, ...)``,
so rows grow with world ``y``.  Image files are read without flipping: image
row ``r`` is grid row ``r``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import IntEnum
from pathlib import Path
from typing import Iterable, NamedTuple

import numpy as np
from PIL import Image


class Cell(IntEnum):
    FREE = 0
    OCCUPIED = 1
    UNKNOWN = 2


class PixelCoord(NamedTuple):
    col: int
    row: int


def normalize_angle(theta: float) -> float:
    """Wrap an angle into [-pi, pi)."""
    wrapped = (theta + math.pi) % (2.0 * math.pi) - math.pi
    # float modulo can land exactly on +pi for inputs just below -pi
    return -math.pi if wrapped >= math.pi else wrapped


@dataclass(frozen=True)
class Pose2D:
    x: float
    y: float
    theta: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "theta", normalize_angle(self.theta))


@dataclass(frozen=True)
class ScanFrame:
    frame_id: int
    pose: Pose2D
    angle_min: float
    angle_increment: float
    range_max: float
    ranges: tuple[float, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "ranges", tuple(float(r) for r in self.ranges))
        if not self.ranges:
            raise ValueError("scan frame needs at least one range")
        for r in self.ranges:
            if math.isnan(r) or r < 0:
                raise ValueError(f"invalid range value {r!r}")

    def beam_angles(self) -> np.ndarray:
        return self.angle_min + self.angle_increment * np.arange(len(self.ranges))


@dataclass(frozen=True)
class OccupancyGrid:
    """Ternary raster; ``cells[row, col]`` holds :class:`Cell` codes."""

    cells: np.ndarray
    resolution: float = 1.0
    origin: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self) -> None:
        cells = np.asarray(self.cells, dtype=np.uint8)
        if cells.ndim != 2 or cells.shape[0] == 0 or cells.shape[1] == 0:
            raise ValueError(f"grid must be a non-empty 2D raster, got shape {cells.shape}")
        if not self.resolution > 0:
            raise ValueError(f"resolution must be positive, got {self.resolution}")
        if cells.max(initial=0) > Cell.UNKNOWN:
            raise ValueError("grid cells must be Free/Occupied/Unknown codes")
        cells = cells.copy()
        cells.setflags(write=False)
        object.__setattr__(self, "cells", cells)
        object.__setattr__(self, "origin", (float(self.origin[0]), float(self.origin[1])))

    @property
    def width(self) -> int:
        return self.cells.shape[1]

    @property
    def height(self) -> int:
        return self.cells.shape[0]

    @property
    def occupied(self) -> np.ndarray:
        return self.cells == Cell.OCCUPIED

    def obstacles(self) -> np.ndarray:
        """Occupied cells as an (N, 2) int array of (col, row)."""
        rows, cols = np.nonzero(self.occupied)
        return np.stack([cols, rows], axis=1).astype(np.int64)

    def world_to_pixel(self, x: float, y: float) -> PixelCoord:
        return world_to_pixel(x, y, self.resolution, self.origin)

    def pixel_center(self, col: int, row: int) -> tuple[float, float]:
        return (
            self.origin[0] + (col + 0.5) * self.resolution,
            self.origin[1] + (row + 0.5) * self.resolution,
        )

    def cell_at(self, x: float, y: float) -> Cell | None:
        """Cell code under a world point, or None outside the raster."""
        col, row = self.world_to_pixel(x, y)
        if 0 <= row < self.height and 0 <= col < self.width:
            return Cell(int(self.cells[row, col]))
        return None

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, OccupancyGrid):
            return NotImplemented
        return (
            self.resolution == other.resolution
            and self.origin == other.origin
            and np.array_equal(self.cells, other.cells)
        )

    __hash__ = None  # type: ignore[assignment]


def world_to_pixel(x: float, y: float, resolution: float, origin: tuple[float, float]) -> PixelCoord:
    return PixelCoord(
        int(math.floor((x - origin[0]) / resolution)),
        int(math.floor((y - origin[1]) / resolution)),
    )


# ---------------------------------------------------------------------------
# file I/O


@dataclass
class MapMetadata:
    resolution: float = 1.0
    origin_x: float = 0.0
    origin_y: float = 0.0
    extra: dict[str, str] = field(default_factory=dict)


def sidecar_path(path: str | Path) -> Path:
    return Path(path).with_suffix(".meta")


def read_metadata(path: str | Path) -> MapMetadata:
    """Parse a ``key: value`` / ``key = value`` sidecar file."""
    meta = MapMetadata()
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        for sep in ("=", ":"):
            if sep in line:
                key, value = (s.strip() for s in line.split(sep, 1))
                break
        else:
            raise ValueError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        if key in ("resolution", "origin_x", "origin_y"):
            try:
                setattr(meta, key, float(value))
            except ValueError:
                raise ValueError(f"{path}:{lineno}: {key} must be a number, got {value!r}") from None
        else:
            meta.extra[key] = value
    if not meta.resolution > 0:
        raise ValueError(f"{path}: resolution must be positive")
    return meta


def write_metadata(path: str | Path, resolution: float, origin: tuple[float, float]) -> None:
    Path(path).write_text(
        f"resolution = {resolution!r}\norigin_x = {origin[0]!r}\norigin_y = {origin[1]!r}\n"
    )


def load_grid(path: str | Path, occupied_below: int = 100, free_above: int = 200) -> OccupancyGrid:
    """Read a grayscale PGM/PNG into a ternary grid.

    Gray < ``occupied_below`` is Occupied, gray > ``free_above`` is Free and
    anything in between is Unknown.  Resolution and origin come from the
    ``.meta`` sidecar when present.
    """
    if not occupied_below < free_above:
        raise ValueError("occupied_below must be smaller than free_above")
    path = Path(path)
    try:
        with Image.open(path) as img:
            img.load()
            mode = img.mode
            gray = np.asarray(img)
    except (OSError, SyntaxError) as exc:
        raise ValueError(f"cannot read map image {path}: {exc}") from exc
    if mode != "L" or gray.ndim != 2:
        raise ValueError(f"{path}: expected an 8-bit grayscale image, got mode {mode!r}")

    cells = np.full(gray.shape, Cell.UNKNOWN, dtype=np.uint8)
    cells[gray < occupied_below] = Cell.OCCUPIED
    cells[gray > free_above] = Cell.FREE

    meta = read_metadata(sidecar_path(path)) if sidecar_path(path).exists() else MapMetadata()
    return OccupancyGrid(cells, meta.resolution, (meta.origin_x, meta.origin_y))


GRAY_LEVELS = {Cell.OCCUPIED: 0, Cell.UNKNOWN: 150, Cell.FREE: 255}


def grid_to_gray(grid: OccupancyGrid) -> np.ndarray:
    gray = np.empty(grid.cells.shape, dtype=np.uint8)
    for cell, level in GRAY_LEVELS.items():
        gray[grid.cells == cell] = level
    return gray


def save_grid(grid: OccupancyGrid, path: str | Path) -> None:
    """Write the grid as PGM or PNG (by suffix) plus its ``.meta`` sidecar."""
    path = Path(path)
    Image.fromarray(grid_to_gray(grid), mode="L").save(path)
    write_metadata(sidecar_path(path), grid.resolution, grid.origin)


# ---------------------------------------------------------------------------
# scan projection


def scan_endpoints(frame: ScanFrame) -> np.ndarray:
    """World (x, y) of every beam that returned, as an (M, 2) float array."""
    ranges = np.asarray(frame.ranges, dtype=np.float64)
    hit = np.isfinite(ranges) & (ranges <= frame.range_max)
    angles = frame.pose.theta + frame.beam_angles()[hit]
    r = ranges[hit]
    return np.stack([frame.pose.x + r * np.cos(angles), frame.pose.y + r * np.sin(angles)], axis=1)


def scan_to_obstacles(frame: ScanFrame, resolution: float, origin: tuple[float, float] = (0.0, 0.0)) -> np.ndarray:
    """Project the returning beams of a frame to unique obstacle pixels.

    Returns an (N, 2) int64 array of (col, row), sorted row-major.
    """
    if not resolution > 0:
        raise ValueError("resolution must be positive")
    pts = scan_endpoints(frame)
    if len(pts) == 0:
        return np.empty((0, 2), dtype=np.int64)
    cols = np.floor((pts[:, 0] - origin[0]) / resolution).astype(np.int64)
    rows = np.floor((pts[:, 1] - origin[1]) / resolution).astype(np.int64)
    return unique_pixels(np.stack([cols, rows], axis=1))


def unique_pixels(pixels: np.ndarray | Iterable[tuple[int, int]]) -> np.ndarray:
    arr = np.asarray(pixels, dtype=np.int64).reshape(-1, 2)
    if len(arr) == 0:
        return arr
    arr = np.unique(arr[:, ::-1], axis=0)[:, ::-1]
    return np.ascontiguousarray(arr)
