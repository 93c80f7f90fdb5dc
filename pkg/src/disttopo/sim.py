"""Simulated range sensor, trajectories and the frame-log text format.

Log lines are::

    frame_id x y theta angle_min angle_increment range_max n r_1 ... r_n

with six fractional digits and ``inf`` for beams without a return.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, Sequence

import numpy as np

from .grid import Cell, OccupancyGrid, Pose2D, ScanFrame


@dataclass(frozen=True)
class SensorSpec:
    beam_count: int = 360
    fov: float = 2.0 * math.pi
    range_max: float = 8.0
    noise_std: float = 0.05
    noise_mean: float = 0.0

    def __post_init__(self) -> None:
        if self.beam_count < 1:
            raise ValueError("beam_count must be >= 1")
        if not self.range_max > 0:
            raise ValueError("range_max must be positive")
        if self.noise_std < 0:
            raise ValueError("noise_std must be >= 0")
        if not 0 < self.fov <= 2.0 * math.pi:
            raise ValueError("fov must be in (0, 2pi]")

    @property
    def angle_increment(self) -> float:
        # a full circle must not repeat its first beam
        if math.isclose(self.fov, 2.0 * math.pi) or self.beam_count == 1:
            return self.fov / self.beam_count
        return self.fov / (self.beam_count - 1)

    @property
    def angle_min(self) -> float:
        return -self.fov / 2.0

    def angles(self) -> np.ndarray:
        return self.angle_min + self.angle_increment * np.arange(self.beam_count)


@dataclass(frozen=True)
class Trajectory:
    waypoints: tuple[Pose2D, ...]
    step: float = 0.1

    def __post_init__(self) -> None:
        object.__setattr__(self, "waypoints", tuple(self.waypoints))
        if not self.waypoints:
            raise ValueError("trajectory needs at least one waypoint")
        if not self.step > 0:
            raise ValueError("step must be positive")

    def poses(self) -> list[Pose2D]:
        """Poses every ``step`` meters along the polyline, heading along motion.

        The final waypoint is appended when the length is not a whole number
        of steps.
        """
        pts = [(w.x, w.y) for w in self.waypoints]
        segs = [(a, b) for a, b in zip(pts, pts[1:]) if math.dist(a, b) > 0]
        if not segs:
            w = self.waypoints[0]
            return [Pose2D(w.x, w.y, w.theta)]
        lengths = [math.dist(a, b) for a, b in segs]
        total = sum(lengths)
        n = int(math.floor(total / self.step + 1e-9))
        out = []
        seg, seg_start = 0, 0.0
        for k in range(n + 1):
            s = min(k * self.step, total)
            while seg < len(segs) - 1 and s > seg_start + lengths[seg] + 1e-12:
                seg_start += lengths[seg]
                seg += 1
            out.append(_on_segment(segs[seg], (s - seg_start) / lengths[seg]))
        if total - n * self.step > 1e-9:
            out.append(_on_segment(segs[-1], 1.0))
        return out


def _on_segment(seg: tuple[tuple[float, float], tuple[float, float]], u: float) -> Pose2D:
    (x0, y0), (x1, y1) = seg
    u = min(max(u, 0.0), 1.0)
    return Pose2D(x0 + u * (x1 - x0), y0 + u * (y1 - y0), math.atan2(y1 - y0, x1 - x0))


def read_trajectory(path: str | Path) -> Trajectory:
    """Waypoint file: ``x y [theta]`` per line, an optional ``step v`` line, ``#`` comments."""
    waypoints, step = [], 0.1
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].split()
        if not line:
            continue
        try:
            if line[0] == "step":
                step = float(line[1])
            elif len(line) in (2, 3):
                waypoints.append(Pose2D(*(float(v) for v in line)))
            else:
                raise ValueError("expected 'x y [theta]'")
        except (ValueError, IndexError) as exc:
            raise ValueError(f"{path}:{lineno}: {exc}") from None
    return Trajectory(tuple(waypoints), step)


def write_trajectory(path: str | Path, traj: Trajectory) -> None:
    lines = [f"step {traj.step!r}"] + [f"{w.x!r} {w.y!r} {w.theta!r}" for w in traj.waypoints]
    Path(path).write_text("\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# raycasting


def _border_crossings(start: float, d: np.ndarray, org: float, res: float, n: int) -> np.ndarray:
    # ray parameters at which each beam crosses the next n cell borders on one axis
    cell = np.floor((start - org) / res)
    k = np.arange(n)
    pos = org + (cell + 1 + k[None, :]) * res
    neg = org + (cell - k[None, :]) * res
    border = np.where(d[:, None] > 0, pos, neg)
    with np.errstate(divide="ignore", invalid="ignore"):
        t = (border - start) / d[:, None]
    return np.where(d[:, None] != 0, t, np.inf)


def raycast(grid: OccupancyGrid, pose: Pose2D, spec: SensorSpec, rng_seed: int | Sequence[int] = 0,
            frame_id: int = 0) -> ScanFrame:
    """Cast every beam until the first Occupied cell or ``range_max``.

    Each beam visits every cell it passes through, however briefly: the
    ray is cut at all of its column and row border crossings and the cell
    of each piece is tested in order.  The range is the entry point of the
    first Occupied cell.  Noise is added to hits only and clamped to
    ``[0, range_max]``.
    """
    if grid.cell_at(pose.x, pose.y) == Cell.OCCUPIED:
        raise ValueError(f"pose ({pose.x}, {pose.y}) lies inside an occupied cell")
    res, (ox, oy) = grid.resolution, grid.origin
    angles = pose.theta + spec.angles()
    dx, dy = np.cos(angles), np.sin(angles)
    nb = len(angles)
    n = int(math.ceil(spec.range_max / res)) + 2
    cuts = np.concatenate([np.zeros((nb, 1)), _border_crossings(pose.x, dx, ox, res, n),
                           _border_crossings(pose.y, dy, oy, res, n)], axis=1)
    cuts = np.sort(np.minimum(cuts, spec.range_max), axis=1)
    a, b = cuts[:, :-1], cuts[:, 1:]
    mid = 0.5 * (a + b)
    cols = np.floor((pose.x + mid * dx[:, None] - ox) / res).astype(np.int64)
    rows = np.floor((pose.y + mid * dy[:, None] - oy) / res).astype(np.int64)
    inside = (b > a) & (cols >= 0) & (cols < grid.width) & (rows >= 0) & (rows < grid.height)
    occ = np.zeros(cols.shape, dtype=bool)
    occ[inside] = grid.occupied[rows[inside], cols[inside]]
    hit = occ.any(axis=1)
    first = occ.argmax(axis=1)
    ranges = np.full(nb, np.inf)
    ranges[hit] = a[hit, first[hit]]
    returned = np.isfinite(ranges)
    if spec.noise_std > 0 or spec.noise_mean != 0:
        rng = np.random.default_rng(rng_seed)
        noise = rng.normal(spec.noise_mean, spec.noise_std, size=nb) if spec.noise_std > 0 \
            else np.full(nb, spec.noise_mean)
        ranges[returned] = np.clip(ranges[returned] + noise[returned], 0.0, spec.range_max)
    return ScanFrame(frame_id, pose, spec.angle_min, spec.angle_increment, spec.range_max, tuple(ranges))


# ---------------------------------------------------------------------------
# frame log


class LogFormatError(ValueError):
    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


def _fmt(v: float) -> str:
    return "inf" if math.isinf(v) else f"{v:.6f}"


def format_frame(frame: ScanFrame) -> str:
    head = [str(frame.frame_id)] + [_fmt(v) for v in (frame.pose.x, frame.pose.y, frame.pose.theta,
                                                      frame.angle_min, frame.angle_increment, frame.range_max)]
    return " ".join(head + [str(len(frame.ranges))] + [_fmt(r) for r in frame.ranges])


def parse_frame(line: str, lineno: int = 0) -> ScanFrame:
    parts = line.split()
    try:
        if len(parts) < 9:
            raise ValueError("too few fields")
        n = int(parts[7])
        if len(parts) != 8 + n:
            raise ValueError(f"expected {n} ranges, found {len(parts) - 8}")
        x, y, theta, amin, ainc, rmax = (float(v) for v in parts[1:7])
        return ScanFrame(int(parts[0]), Pose2D(x, y, theta), amin, ainc, rmax, tuple(float(v) for v in parts[8:]))
    except ValueError as exc:
        raise LogFormatError(lineno, str(exc)) from None


def iter_log(path: str | Path) -> Iterator[ScanFrame]:
    """Frames of a log file; frame ids must strictly increase."""
    last = None
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            frame = parse_frame(line, lineno)
            if last is not None and frame.frame_id <= last:
                raise LogFormatError(lineno, f"frame id {frame.frame_id} does not increase")
            last = frame.frame_id
            yield frame


def read_log(path: str | Path) -> list[ScanFrame]:
    return list(iter_log(path))


def write_log(path: str | Path, frames: Iterable[ScanFrame]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for frame in frames:
            fh.write(format_frame(frame) + "\n")


def simulate_frames(grid: OccupancyGrid, traj: Trajectory, spec: SensorSpec, seed: int = 0) -> list[ScanFrame]:
    """One frame per trajectory pose, already rounded as the log stores it."""
    frames = []
    for i, pose in enumerate(traj.poses()):
        if grid.cell_at(pose.x, pose.y) == Cell.OCCUPIED:
            raise ValueError(f"trajectory pose {i} at ({pose.x:.3f}, {pose.y:.3f}) is inside an obstacle")
        frame = raycast(grid, pose, spec, rng_seed=(seed, i), frame_id=i)
        frames.append(parse_frame(format_frame(frame)))
    return frames


def generate_log(grid: OccupancyGrid, traj: Trajectory, spec: SensorSpec, seed: int, path: str | Path) -> list[ScanFrame]:
    frames = simulate_frames(grid, traj, spec, seed)
    write_log(path, frames)
    return frames
