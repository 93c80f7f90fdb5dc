"""Incremental maintenance of the distance map, skeleton and topology graph.

Three loops run at their own frame periods:

* the distance loop max-merges every frame's local map into the global map
  and accumulates the pixels that increased (``dm_dirty``);
* the skeleton loop re-skeletonizes the dirty area, protected by a ring of
  the existing skeleton just outside it, and accumulates the replaced area
  (``sk_dirty``);
* the graph loop rebuilds the graph inside ``sk_dirty`` and stitches it to
  the trimmed outside graph.

Every raster lives on the shared global pixel lattice with its own canvas
origin.  Each loop consumes a snapshot of its upstream product plus dirty
mask taken when the update triggers, so the pipelined mode (downstream loops
on a worker thread) produces exactly the reference results.
"""

from __future__ import annotations

import json
import time
from concurrent.futures import Future, ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import ndimage

from .config import RunConfig, UpdateSchedule
from .distance import (
    EMPTY_RECT, DistanceMap, GaussianKernel, Rect, build_distance_map, grown_bounds,
    local_distance_map, mask_bounds, merge_into, reframe,
)
from .graph import (
    Edge, TopoGraph, bresenham, contract_degree2, diagonal_allowed, dissolve_vertex,
    pixels_to_graph, rowmajor,
)
from .grid import PixelCoord, ScanFrame, scan_to_obstacles
from .rasterio import read_dmap, read_pbm, write_dmap, write_pbm
from .skeleton import binarize, ridge_filter, suppress_t_cross
from .thinning import NEIGHBOR_OFFSETS, thin

_BOX = np.ones((3, 3), dtype=bool)


def _origin(rect: Rect) -> PixelCoord:
    return PixelCoord(rect.col0, rect.row0)


def _dilate(mask: np.ndarray, steps: int) -> np.ndarray:
    if steps <= 0 or not mask.any():
        return mask.copy()
    return ndimage.binary_dilation(mask, _BOX, iterations=steps)


# ---------------------------------------------------------------------------
# distance loop


@dataclass
class SkeletonJob:
    """Snapshot handed from the distance loop to the skeleton loop."""

    canvas: Rect
    dirty: np.ndarray  # over canvas
    region: Rect  # where the distance values below are valid
    dm_region: np.ndarray


class DistanceLoop:
    def __init__(self, kernel: GaussianKernel):
        self.kernel = kernel
        self.dm = DistanceMap.empty(kernel.sigma)
        self.dirty = np.zeros((0, 0), dtype=bool)
        self.obstacles = np.zeros((0, 0), dtype=bool)

    @property
    def canvas(self) -> Rect:
        return self.dm.bounds

    def merge(self, pixels: np.ndarray) -> int:
        """Merge the local map of ``pixels``; returns the number of increased pixels."""
        local = local_distance_map(pixels, self.kernel)
        if local is None:
            return 0
        old = self.canvas
        self.dm, footprint, increased = merge_into(self.dm, local)
        if self.canvas != old:
            self.dirty = reframe(self.dirty, old, self.canvas, False)
            self.obstacles = reframe(self.obstacles, old, self.canvas, False)
        self.dirty[self.canvas.slices(footprint)] |= increased
        self.obstacles[pixels[:, 1] - self.canvas.row0, pixels[:, 0] - self.canvas.col0] = True
        return int(increased.sum())

    def obstacle_pixels(self) -> np.ndarray:
        rows, cols = np.nonzero(self.obstacles)
        return np.stack([cols + self.canvas.col0, rows + self.canvas.row0], axis=1).astype(np.int64)

    def take_job(self, reach: int, margin: int) -> SkeletonJob:
        """Snapshot the dirty mask and the distance values it needs; clear the mask."""
        canvas = self.canvas
        dirty = self.dirty.copy()
        box = mask_bounds(dirty, _origin(canvas)) if dirty.size else EMPTY_RECT
        region = box.expand(reach + margin).intersect(canvas) if not box.empty else EMPTY_RECT
        dm_region = self.dm.values[canvas.slices(region)].copy() if not region.empty else np.zeros((0, 0))
        self.dirty[:] = False
        return SkeletonJob(canvas, dirty, region, dm_region)


# ---------------------------------------------------------------------------
# skeleton loop


@dataclass
class SkeletonUpdateReport:
    region: Rect
    updated_pixels: int
    changed_pixels: int


@dataclass
class GraphJob:
    canvas: Rect
    mask: np.ndarray  # sk_dirty over canvas
    region: Rect
    skeleton_region: np.ndarray
    mask_region: np.ndarray


class SkeletonLoop:
    def __init__(self, scale: float = 255.0, threshold: float = 10.0, stencil: int = 4,
                 layer: int = 3, margin: int = 14, reach: int = 1):
        self.scale, self.threshold, self.stencil = scale, threshold, stencil
        self.layer = layer
        # the region must hold the ring and the Laplacian's one-pixel reach
        self.margin = max(margin, layer + 1)
        self.reach = reach
        self.canvas = EMPTY_RECT
        self.skeleton = np.zeros((0, 0), dtype=bool)
        self.dirty = np.zeros((0, 0), dtype=bool)

    def _grow(self, canvas: Rect) -> None:
        if canvas != self.canvas:
            self.skeleton = reframe(self.skeleton, self.canvas, canvas, False)
            self.dirty = reframe(self.dirty, self.canvas, canvas, False)
            self.canvas = canvas

    def update_zone(self, dirty: np.ndarray) -> np.ndarray:
        """Pixels whose skeleton value is recomputed: the dirty mask plus the
        stencil reach, since the Laplacian there also saw changed values."""
        return _dilate(dirty, self.reach)

    def apply(self, job: SkeletonJob) -> SkeletonUpdateReport:
        self._grow(grown_bounds(self.canvas, job.canvas) if not job.canvas.empty else self.canvas)
        if job.region.empty:
            return SkeletonUpdateReport(EMPTY_RECT, 0, 0)
        dirty = reframe(job.dirty, job.canvas, self.canvas, False)
        region = job.region
        rs = self.canvas.slices(region)
        zone = self.update_zone(dirty[rs])
        ring = _dilate(zone, self.layer) & ~zone
        current = self.skeleton[rs]
        protected = current & ring
        binary = binarize(ridge_filter(job.dm_region, self.scale, self.stencil), self.threshold)
        result = suppress_t_cross(thin((binary & zone) | protected, protected))
        changed = int((current[zone] != result[zone]).sum())
        current[zone] = result[zone]
        self.dirty[rs] |= zone
        return SkeletonUpdateReport(region, int(zone.sum()), changed)

    def take_job(self, margin: int) -> GraphJob:
        canvas = self.canvas
        mask = self.dirty.copy()
        box = mask_bounds(mask, _origin(canvas)) if mask.size else EMPTY_RECT
        region = box.expand(margin).intersect(canvas) if not box.empty else EMPTY_RECT
        self.dirty[:] = False
        if region.empty:
            return GraphJob(canvas, mask, region, np.zeros((0, 0), bool), np.zeros((0, 0), bool))
        rs = canvas.slices(region)
        return GraphJob(canvas, mask, region, self.skeleton[rs].copy(), mask[rs].copy())


# ---------------------------------------------------------------------------
# graph loop


@dataclass
class GraphUpdateReport:
    local_vertices: int = 0
    local_edges: int = 0
    trimmed_edges: int = 0
    removed_vertices: int = 0
    exact_links: int = 0
    radius_links: int = 0
    dissolved: int = 0
    dangling: list[PixelCoord] = field(default_factory=list)


class _Raster:
    """Boolean raster lookups by global pixel; outside reads as False."""

    def __init__(self, data: np.ndarray, region: Rect):
        self.data, self.region = data, region

    def __call__(self, pos) -> bool:
        r, c = pos[1] - self.region.row0, pos[0] - self.region.col0
        h, w = self.data.shape
        return 0 <= r < h and 0 <= c < w and bool(self.data[r, c])


def update_graph(graph: TopoGraph, skeleton: np.ndarray, mask: np.ndarray, region: Rect,
                 connect_radius: float = 3.0) -> GraphUpdateReport:
    """Rebuild ``graph`` in place inside ``mask``.

    ``skeleton`` and ``mask`` cover ``region``, which must extend at least
    ``connect_radius + 1`` pixels past the mask (or reach the canvas edge).
    """
    report = GraphUpdateReport()
    if not mask.any():
        return report
    inmask = _Raster(mask, region)
    onskel = _Raster(skeleton, region)
    origin = _origin(region)

    # 1. local graph of the skeleton inside the mask; pixels touching the
    # outside are kept as vertices so the stitching below can reach them
    local_px = skeleton & mask
    inner = ndimage.binary_erosion(mask, _BOX, border_value=1)
    border_px = local_px & ~inner
    keep = [PixelCoord(origin.col + int(c), origin.row + int(r)) for r, c in np.argwhere(border_px)]
    local = contract_degree2(pixels_to_graph(local_px, origin, context=skeleton), keep=keep)
    report.local_vertices, report.local_edges = len(local.vertices), len(local.edges)

    # 2. trim the global graph against the mask
    seam: set[int] = set()
    trimmed_ends: set[int] = set()

    def vertex_for(pos: PixelCoord) -> int:
        vid = graph.vertex_at(pos)
        return graph.add_vertex(pos).id if vid is None else vid

    for eid in sorted(graph.edges):
        e = graph.edges[eid]
        flags = [inmask(p) for p in e.path]
        if not any(flags):
            continue
        graph.remove_edge(eid)
        report.trimmed_edges += 1
        n = len(e.path)
        i = 0
        while i < n:
            if flags[i]:
                i += 1
                continue
            j = i
            while j + 1 < n and not flags[j + 1]:
                j += 1
            a = e.v1 if i == 0 else vertex_for(e.path[i])
            b = e.v2 if j == n - 1 else vertex_for(e.path[j])
            if i > 0:
                trimmed_ends.add(a)
            if j < n - 1:
                trimmed_ends.add(b)
            if j > i:
                graph.add_edge(a, b, e.path[i:j + 1])
            i = j + 1
    for vid in sorted(graph.vertices):
        if inmask(graph.vertices[vid].pos):
            graph.remove_vertex(vid)
            report.removed_vertices += 1
    trimmed_ends &= set(graph.vertices)
    seam |= trimmed_ends
    # untouched vertices next to the mask may still gain links
    for vid, v in graph.vertices.items():
        c, r = v.pos
        if any(inmask((c + dc, r + dr)) for dr, dc in NEIGHBOR_OFFSETS):
            seam.add(vid)

    # interior path pixels of outside edges, for splitting at link targets
    owner: dict[PixelCoord, int] = {}
    reach = region

    def index_edge(e: Edge) -> None:
        for p in e.path[1:-1]:
            if reach.col0 <= p[0] < reach.col1 and reach.row0 <= p[1] < reach.row1:
                owner[p] = e.id

    for e in graph.edges.values():
        index_edge(e)

    # 3. insert the local graph and connect it across the seam
    lmap = {}
    for vid in sorted(local.vertices, key=lambda v: rowmajor(local.vertices[v].pos)):
        lmap[vid] = graph.add_vertex(local.vertices[vid].pos).id
    for eid in sorted(local.edges):
        e = local.edges[eid]
        graph.add_edge(lmap[e.v1], lmap[e.v2], e.path)
    border_ids = sorted((lmap[local.vertex_at(p)] for p in keep), key=lambda v: rowmajor(graph.vertices[v].pos))
    seam |= set(border_ids)

    def split_at(pos: PixelCoord) -> int:
        eid = owner.pop(pos)
        e = graph.remove_edge(eid)
        k = e.path.index(pos)
        vid = graph.add_vertex(pos).id
        index_edge(graph.add_edge(e.v1, vid, e.path[:k + 1]))
        index_edge(graph.add_edge(vid, e.v2, e.path[k:]))
        return vid

    linked: set[int] = set()
    for vid in border_ids:
        c, r = graph.vertices[vid].pos
        for dr, dc in NEIGHBOR_OFFSETS:
            q = PixelCoord(c + dc, r + dr)
            if inmask(q) or not onskel(q):
                continue
            lr, lc = r - region.row0, c - region.col0
            if dr and dc and not diagonal_allowed(skeleton, lr, lc, lr + dr, lc + dc):
                continue
            target = graph.vertex_at(q)
            if target is None:
                target = split_at(q) if q in owner else graph.add_vertex(q).id
            graph.add_edge(vid, target, [graph.vertices[vid].pos, q])
            linked.update((vid, target))
            seam.add(target)
            report.exact_links += 1

    # links within the connect radius for the ends that found no exact partner
    def dangling(vids) -> list[int]:
        return [v for v in vids if v in graph.vertices and v not in linked and graph.degree(v) <= 1]

    loose_local = dangling(border_ids)
    loose_outer = dangling(sorted(trimmed_ends, key=lambda v: rowmajor(graph.vertices[v].pos)))
    pairs = []
    for a in loose_local:
        pa = graph.vertices[a].pos
        for b in loose_outer:
            pb = graph.vertices[b].pos
            d = float(np.hypot(pa[0] - pb[0], pa[1] - pb[1]))
            if d <= connect_radius:
                pairs.append((d, rowmajor(pa), rowmajor(pb), a, b))
    used: set[int] = set()
    for _, _, _, a, b in sorted(pairs):
        if a in used or b in used:
            continue
        used.update((a, b))
        graph.add_edge(a, b, bresenham(graph.vertices[a].pos, graph.vertices[b].pos))
        report.radius_links += 1
    report.dangling = [graph.vertices[a].pos for a in loose_local if a not in used]

    # 4. the union is graph itself now; 5. dissolve degree-2 seam vertices
    loops: set[int] = set()
    for vid in sorted((v for v in seam if v in graph.vertices), key=lambda v: rowmajor(graph.vertices[v].pos)):
        if vid in graph.vertices and graph.degree(vid) == 2:
            eid = dissolve_vertex(graph, vid)
            if eid is not None:
                report.dissolved += 1
                if graph.edges[eid].is_loop:
                    loops.add(graph.edges[eid].v1)
    # a cycle closed by dissolving keeps its anchor at the smallest pixel
    for vid in sorted(v for v in (seam | loops) if v in graph.vertices):
        _reanchor_cycle(graph, vid)
    return report


def _reanchor_cycle(graph: TopoGraph, vid: int) -> None:
    """Move the vertex of a pure cycle to the cycle's smallest (row, col) pixel."""
    inc = graph.incident(vid)
    if len(inc) != 1 or not graph.edges[inc[0]].is_loop:
        return
    e = graph.edges[inc[0]]
    body = list(e.path[:-1])
    k = min(range(len(body)), key=lambda i: rowmajor(body[i]))
    if k == 0:
        return
    if graph.vertex_at(body[k]) is not None:
        return
    rotated = body[k:] + body[:k]
    graph.remove_vertex(vid)
    new = graph.add_vertex(rotated[0]).id
    graph.add_edge(new, new, rotated + [rotated[0]], length=e.length)


class GraphLoop:
    def __init__(self, connect_radius: float = 3.0):
        self.connect_radius = connect_radius
        self.graph = TopoGraph()

    @property
    def margin(self) -> int:
        return int(np.ceil(self.connect_radius)) + 2

    def apply(self, job: GraphJob) -> GraphUpdateReport:
        if job.region.empty:
            return GraphUpdateReport()
        return update_graph(self.graph, job.skeleton_region, job.mask_region, job.region, self.connect_radius)


# ---------------------------------------------------------------------------
# engine


@dataclass
class LoopTimes:
    samples: list[float] = field(default_factory=list)

    def add(self, seconds: float) -> None:
        self.samples.append(seconds * 1000.0)

    def stats(self) -> dict:
        if not self.samples:
            return {"count": 0, "min_ms": None, "mean_ms": None, "max_ms": None}
        s = np.asarray(self.samples)
        return {"count": len(s), "min_ms": float(s.min()), "mean_ms": float(s.mean()), "max_ms": float(s.max())}


class IncrementalEngine:
    """Owner of the global products; feed it frames with :meth:`ingest`.

    With ``pipelined=True`` the skeleton and graph loops run on a worker
    thread.  Call :meth:`sync` before reading the skeleton or graph.
    """

    def __init__(self, config: RunConfig | None = None, pipelined: bool = False):
        self.config = config or RunConfig()
        cfg = self.config
        self.schedule: UpdateSchedule = cfg.schedule
        self.kernel = GaussianKernel(cfg.sigma, cfg.kernel_radius)
        self.distance = DistanceLoop(self.kernel)
        self.skeleton_loop = SkeletonLoop(cfg.laplacian_scale, cfg.binarize_threshold, cfg.stencil,
                                          cfg.protected_layer_width, self.kernel.radius)
        self.graph_loop = GraphLoop(cfg.connect_radius)
        self.frame_count = 0
        self.last_frame_id: int | None = None
        self.times = {name: LoopTimes() for name in ("distmap", "skeleton", "graph")}
        self.skeleton_reports: list[SkeletonUpdateReport] = []
        self.graph_reports: list[GraphUpdateReport] = []
        self._pending: list[np.ndarray] = []
        self._executor = ThreadPoolExecutor(max_workers=1) if pipelined else None
        self._futures: list[Future] = []
        # optional observers called as hook(engine, loop_name, before, job)
        self.hooks: list = []

    # -- products ---------------------------------------------------------
    @property
    def global_dm(self) -> DistanceMap:
        return self.distance.dm

    @property
    def dm_dirty(self) -> np.ndarray:
        return self.distance.dirty

    @property
    def global_skeleton(self) -> np.ndarray:
        return self.skeleton_loop.skeleton

    @property
    def skeleton_canvas(self) -> Rect:
        return self.skeleton_loop.canvas

    @property
    def sk_dirty(self) -> np.ndarray:
        return self.skeleton_loop.dirty

    @property
    def global_graph(self) -> TopoGraph:
        return self.graph_loop.graph

    # -- driving ----------------------------------------------------------
    def ingest(self, frame: ScanFrame) -> None:
        if self.last_frame_id is not None and frame.frame_id <= self.last_frame_id:
            raise ValueError(f"frame id {frame.frame_id} does not follow {self.last_frame_id}")
        self.last_frame_id = frame.frame_id
        t0 = time.perf_counter()
        pixels = scan_to_obstacles(frame, self.config.resolution, self.config.origin)
        self.ingest_pixels(pixels, t0)

    def ingest_pixels(self, pixels: np.ndarray, t0: float | None = None) -> None:
        """Ingest one frame given directly as obstacle pixels."""
        t0 = time.perf_counter() if t0 is None else t0
        if len(pixels):
            self._pending.append(np.asarray(pixels, dtype=np.int64).reshape(-1, 2))
        self.frame_count += 1
        sch = self.schedule
        if self.frame_count % sch.distmap_every == 0:
            self._flush_pending()
        self.times["distmap"].add(time.perf_counter() - t0)
        if self.frame_count % sch.skeleton_every == 0:
            self.update_skeleton()
        if self.frame_count % sch.graph_every == 0:
            self.update_graph()

    def _flush_pending(self) -> None:
        if self._pending:
            pixels = np.unique(np.concatenate(self._pending), axis=0)
            self._pending.clear()
            self.distance.merge(pixels)

    def update_skeleton(self) -> None:
        self._flush_pending()
        job = self.distance.take_job(self.skeleton_loop.reach, self.skeleton_loop.margin)
        self._submit(self._run_skeleton, job)

    def update_graph(self) -> None:
        self._submit(self._run_graph)

    def finish(self) -> None:
        """Flush buffered frames and run any outstanding skeleton/graph work."""
        self._flush_pending()
        if self.distance.dirty.any():
            self.update_skeleton()
        self.sync()
        if self.skeleton_loop.dirty.any():
            self.update_graph()
        self.sync()

    def sync(self) -> None:
        for fut in self._futures:
            fut.result()
        self._futures.clear()

    def close(self) -> None:
        self.sync()
        if self._executor is not None:
            self._executor.shutdown()
            self._executor = None

    def __enter__(self) -> "IncrementalEngine":
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    def _submit(self, fn, *args) -> None:
        if self._executor is None:
            fn(*args)
        else:
            self._futures.append(self._executor.submit(fn, *args))

    def _run_skeleton(self, job: SkeletonJob) -> None:
        before = self._snapshot("skeleton") if self.hooks else None
        t0 = time.perf_counter()
        self.skeleton_reports.append(self.skeleton_loop.apply(job))
        self.times["skeleton"].add(time.perf_counter() - t0)
        for hook in self.hooks:
            hook(self, "skeleton", before, job)

    def _run_graph(self) -> None:
        job = self.skeleton_loop.take_job(self.graph_loop.margin)
        before = self._snapshot("graph") if self.hooks else None
        t0 = time.perf_counter()
        self.graph_reports.append(self.graph_loop.apply(job))
        self.times["graph"].add(time.perf_counter() - t0)
        for hook in self.hooks:
            hook(self, "graph", before, job)

    def _snapshot(self, loop: str):
        if loop == "skeleton":
            return self.skeleton_loop.canvas, self.skeleton_loop.skeleton.copy()
        return self.graph_loop.graph.copy()

    def timing_stats(self) -> dict:
        return {name: t.stats() for name, t in self.times.items()}

    # -- batch references ---------------------------------------------------
    def batch_distance_map(self) -> DistanceMap:
        """Distance map rebuilt from every obstacle ingested so far, on the same canvas."""
        if self.global_dm.bounds.empty:
            return self.global_dm.copy()
        return build_distance_map(self.distance.obstacle_pixels(), self.global_dm.bounds, self.kernel)

    # -- checkpoints --------------------------------------------------------
    def save_checkpoint(self, out_dir: str | Path) -> Path:
        self.sync()
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        dist_origin = _origin(self.distance.canvas)
        sk_origin = _origin(self.skeleton_loop.canvas)
        write_dmap(out / "distance.dmap", self.global_dm)
        write_pbm(out / "skeleton.pbm", self.global_skeleton, sk_origin)
        write_pbm(out / "dm_dirty.pbm", self.dm_dirty, dist_origin)
        write_pbm(out / "sk_dirty.pbm", self.sk_dirty, sk_origin)
        write_pbm(out / "obstacles.pbm", self.distance.obstacles, dist_origin)
        self.global_graph.save(out / "graph.json")
        manifest = {
            "frame_count": self.frame_count,
            "last_frame_id": self.last_frame_id,
            "schedule": str(self.schedule),
            "sigma": self.kernel.sigma,
            "kernel_radius": self.kernel.radius,
            "resolution": self.config.resolution,
            "origin": list(self.config.origin),
        }
        (out / "manifest.txt").write_text("".join(f"{k} = {json.dumps(v)}\n" for k, v in manifest.items()))
        return out


@dataclass
class Checkpoint:
    manifest: dict
    distance: DistanceMap
    skeleton: np.ndarray
    skeleton_origin: PixelCoord
    dm_dirty: np.ndarray
    sk_dirty: np.ndarray
    obstacles: np.ndarray
    graph: TopoGraph


def load_checkpoint(path: str | Path) -> Checkpoint:
    p = Path(path)
    manifest = {}
    for line in (p / "manifest.txt").read_text().splitlines():
        if "=" in line:
            k, v = line.split("=", 1)
            manifest[k.strip()] = json.loads(v)
    skel, sk_origin = read_pbm(p / "skeleton.pbm")
    return Checkpoint(
        manifest=manifest,
        distance=read_dmap(p / "distance.dmap"),
        skeleton=skel,
        skeleton_origin=sk_origin,
        dm_dirty=read_pbm(p / "dm_dirty.pbm")[0],
        sk_dirty=read_pbm(p / "sk_dirty.pbm")[0],
        obstacles=read_pbm(p / "obstacles.pbm")[0],
        graph=TopoGraph.load(p / "graph.json"),
    )


# ---------------------------------------------------------------------------
# stability checks


def changed_outside(before: np.ndarray, before_canvas: Rect, after: np.ndarray, after_canvas: Rect,
                    zone: np.ndarray, zone_canvas: Rect) -> int:
    """Number of pixels outside ``zone`` whose value differs between two rasters."""
    canvas = before_canvas.union(after_canvas).union(zone_canvas) if not before_canvas.empty else after_canvas
    a = reframe(before, before_canvas, canvas, False)
    b = reframe(after, after_canvas, canvas, False)
    z = reframe(zone, zone_canvas, canvas, False)
    return int(((a != b) & ~z).sum())


def graph_changes_outside(before: TopoGraph, after: TopoGraph, mask: np.ndarray, canvas: Rect,
                          guard: int = 1) -> list[str]:
    """Elements lying wholly outside the mask (grown by ``guard``) that did not survive intact.

    Vertices must keep id and position; edges must keep id, endpoints and path.
    """
    near = _Raster(_dilate(mask, guard), canvas)
    problems = []
    for vid, v in before.vertices.items():
        if near(v.pos):
            continue
        w = after.vertices.get(vid)
        if w is None or w.pos != v.pos:
            problems.append(f"vertex {vid} at {tuple(v.pos)}")
    for eid, e in before.edges.items():
        if any(near(p) for p in e.path):
            continue
        f = after.edges.get(eid)
        if f is None or (f.v1, f.v2, f.path) != (e.v1, e.v2, e.path):
            problems.append(f"edge {eid}")
    return problems
