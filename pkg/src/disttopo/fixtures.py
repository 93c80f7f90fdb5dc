"""Synthetic maps and trajectories used by the tests and the ``fixture`` command."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .grid import Cell, OccupancyGrid, Pose2D
from .metrics import Region
from .sim import Trajectory


def corridor_grid(width: int, length: int = 60, wall: int = 2, margin: int = 0) -> OccupancyGrid:
    """Horizontal corridor with ``width`` free rows between two walls.

    The corridor is open at both ends; the centerline row is
    ``margin + wall + (width - 1) / 2``.
    """
    h = 2 * (margin + wall) + width
    cells = np.full((h, length), Cell.FREE, dtype=np.uint8)
    top = margin
    bottom = margin + wall + width
    cells[top:top + wall, :] = Cell.OCCUPIED
    cells[bottom:bottom + wall, :] = Cell.OCCUPIED
    return OccupancyGrid(cells, 1.0)


class _Canvas:
    """Axis-aligned wall drawing in meters."""

    def __init__(self, width_m: float, height_m: float, resolution: float):
        self.res = resolution
        self.cells = np.full((int(round(height_m / resolution)), int(round(width_m / resolution))),
                             Cell.FREE, dtype=np.uint8)

    def _px(self, v: float) -> int:
        return int(round(v / self.res))

    def fill(self, x0: float, y0: float, x1: float, y1: float, value: int = Cell.OCCUPIED) -> None:
        self.cells[self._px(y0):self._px(y1), self._px(x0):self._px(x1)] = value

    def clear(self, x0: float, y0: float, x1: float, y1: float) -> None:
        self.fill(x0, y0, x1, y1, Cell.FREE)


@dataclass(frozen=True)
class HouseFixture:
    grid: OccupancyGrid
    trajectory: Trajectory
    interior: Region  # house interior in pixels

    @property
    def resolution(self) -> float:
        return self.grid.resolution


# layout constants in meters
WALL = 0.3
DOOR = 1.0
CORRIDOR = 2.0
ROOM_DEPTH = 3.6
X0, X1 = 2.0, 38.0


def house(resolution: float = 0.1, step: float = 0.08) -> HouseFixture:
    """Four rows of rooms along two long corridors joined at both ends.

    The corridors and end passages form a loop; the trajectory drives it
    once.  Rooms open onto the corridors through one-meter doors.
    """
    c = _Canvas(40.0, 24.5, resolution)
    # row bands bottom to top: room row, corridor, two room rows, corridor, room row
    y = 2.0
    c.fill(X0, y, X1, y + WALL)
    y += WALL
    rows = []
    for kind in ("room", "corridor", "room", "room", "corridor", "room"):
        span = ROOM_DEPTH if kind == "room" else CORRIDOR
        rows.append((kind, y, y + span))
        y += span
        c.fill(X0, y, X1, y + WALL)
        y += WALL
    top = y
    c.fill(X0, 2.0, X0 + WALL, top)
    c.fill(X1 - WALL, 2.0, X1, top)
    inner0, inner1 = X0 + WALL, X1 - WALL
    (_, c1_lo, c1_hi), (_, c2_lo, c2_hi) = [r for r in rows if r[0] == "corridor"]
    # end passages between the corridors with walls on their inner side
    px0, px1 = inner0, inner0 + CORRIDOR
    qx0, qx1 = inner1 - CORRIDOR, inner1
    c.clear(px0, c1_hi, px1, c2_lo)
    c.clear(qx0, c1_hi, qx1, c2_lo)
    c.fill(px1, c1_hi, px1 + WALL, c2_lo)
    c.fill(qx0 - WALL, c1_hi, qx0, c2_lo)

    def partition(lo: float, hi: float, x_lo: float, x_hi: float, n: int, door_y: tuple[float, float]) -> None:
        width = (x_hi - x_lo - WALL * (n - 1)) / n
        for k in range(n):
            left = x_lo + k * (width + WALL)
            if k:
                c.fill(left - WALL, lo, left, hi)
            mid = left + width / 2
            c.clear(mid - DOOR / 2, door_y[0], mid + DOOR / 2, door_y[1])

    for idx, (kind, lo, hi) in enumerate(rows):
        if kind != "room":
            continue
        # the door goes in the wall shared with the adjacent corridor
        if idx + 1 < len(rows) and rows[idx + 1][0] == "corridor":
            door = (hi, hi + WALL)
        else:
            door = (lo - WALL, lo)
        if idx in (0, len(rows) - 1):
            partition(lo, hi, inner0, inner1, 10, door)
        else:
            partition(lo, hi, px1 + WALL, qx0 - WALL, 9, door)
    grid = OccupancyGrid(c.cells, resolution)
    ya, yb = (c1_lo + c1_hi) / 2, (c2_lo + c2_hi) / 2
    xa, xb = (px0 + px1) / 2, (qx0 + qx1) / 2
    loop = (Pose2D(xa, ya), Pose2D(xb, ya), Pose2D(xb, yb), Pose2D(xa, yb), Pose2D(xa, ya))
    px = lambda v: int(round(v / resolution))  # noqa: E731
    interior = Region(px(inner0), px(2.0 + WALL), px(inner1) - 1, px(top - WALL) - 1)
    return HouseFixture(grid, Trajectory(loop, step), interior)


def house_block(resolution: float = 0.1, tiles: tuple[int, int] = (2, 3)) -> HouseFixture:
    """Several houses side by side on one large grid (about 800 x 735 px by default).

    The trajectory snakes along the streets between the houses.
    """
    h = house(resolution)
    th, tw = h.grid.cells.shape
    nx, ny = tiles
    cells = np.full((th * ny, tw * nx), Cell.FREE, dtype=np.uint8)
    for j in range(ny):
        for i in range(nx):
            cells[j * th:(j + 1) * th, i * tw:(i + 1) * tw] = h.grid.cells
    grid = OccupancyGrid(cells, resolution)
    w_m, h_m = tw * resolution, th * resolution
    # streets run one meter from every tile edge, in the 4 m gaps between houses
    waypoints = []
    for j in range(ny + 1):
        yy = j * h_m + (1.0 if j < ny else -1.0)
        xs = (1.0, nx * w_m - 1.0) if j % 2 == 0 else (nx * w_m - 1.0, 1.0)
        waypoints += [Pose2D(xs[0], yy), Pose2D(xs[1], yy)]
    return HouseFixture(grid, Trajectory(tuple(waypoints), 0.1), Region(0, 0, cells.shape[1] - 1, cells.shape[0] - 1))


def random_blob(rng: np.random.Generator, size: int = 64, n_disks: int = 6) -> np.ndarray:
    """Union of random disks and rectangles, for thinning properties."""
    img = np.zeros((size, size), dtype=bool)
    rr, cc = np.mgrid[:size, :size]
    for _ in range(n_disks):
        if rng.random() < 0.5:
            r0, c0 = rng.integers(0, size, 2)
            rad = rng.integers(2, max(3, size // 5))
            img |= (rr - r0) ** 2 + (cc - c0) ** 2 <= rad * rad
        else:
            r0, c0 = rng.integers(0, size - 2, 2)
            hgt, wid = rng.integers(2, max(3, size // 3), 2)
            img[r0:r0 + hgt, c0:c0 + wid] = True
    return img


def heading(a: Pose2D, b: Pose2D) -> float:
    return math.atan2(b.y - a.y, b.x - a.x)
