"""Topology graphs built from skeleton rasters.

Every skeleton pixel first becomes a vertex linked to its 8-neighbors, except
diagonal links across an "L" (two diagonal pixels that already share a set
orthogonal neighbor).  Chains of degree-2 vertices are then collapsed into
single edges that keep the full pixel path.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .grid import PixelCoord

SQRT2 = math.sqrt(2.0)


def step_length(a: PixelCoord, b: PixelCoord) -> float:
    return SQRT2 if a[0] != b[0] and a[1] != b[1] else 1.0


def path_length(path: Sequence[PixelCoord]) -> float:
    return sum(step_length(a, b) for a, b in zip(path, path[1:]))


def bresenham(a: PixelCoord, b: PixelCoord) -> list[PixelCoord]:
    """8-connected pixel segment from ``a`` to ``b``, both ends included."""
    (c0, r0), (c1, r1) = a, b
    dc, dr = abs(c1 - c0), -abs(r1 - r0)
    sc, sr = (1 if c1 > c0 else -1), (1 if r1 > r0 else -1)
    err = dc + dr
    out = [PixelCoord(c0, r0)]
    while (c0, r0) != (c1, r1):
        e2 = 2 * err
        if e2 >= dr:
            err += dr
            c0 += sc
        if e2 <= dc:
            err += dc
            r0 += sr
        out.append(PixelCoord(c0, r0))
    return out


def rowmajor(pos: PixelCoord) -> tuple[int, int]:
    return (pos[1], pos[0])


@dataclass(frozen=True)
class Vertex:
    id: int
    pos: PixelCoord


@dataclass(frozen=True)
class Edge:
    id: int
    v1: int
    v2: int
    path: tuple[PixelCoord, ...]
    length: float

    def other(self, vid: int) -> int:
        return self.v2 if vid == self.v1 else self.v1

    def path_from(self, vid: int) -> tuple[PixelCoord, ...]:
        return self.path if vid == self.v1 else self.path[::-1]

    @property
    def is_loop(self) -> bool:
        return self.v1 == self.v2


class TopoGraph:
    """Multigraph of pixel-positioned vertices and path-annotated edges."""

    def __init__(self) -> None:
        self.vertices: dict[int, Vertex] = {}
        self.edges: dict[int, Edge] = {}
        self._incident: dict[int, list[int]] = {}
        self._by_pos: dict[PixelCoord, int] = {}
        self.next_vertex_id = 0
        self.next_edge_id = 0

    # -- construction -----------------------------------------------------
    def add_vertex(self, pos: Iterable[int], vid: int | None = None) -> Vertex:
        pos = PixelCoord(*(int(v) for v in pos))
        if pos in self._by_pos:
            raise ValueError(f"a vertex already sits at {pos}")
        if vid is None:
            vid = self.next_vertex_id
        if vid in self.vertices:
            raise ValueError(f"duplicate vertex id {vid}")
        self.next_vertex_id = max(self.next_vertex_id, vid + 1)
        v = Vertex(vid, pos)
        self.vertices[vid] = v
        self._incident[vid] = []
        self._by_pos[pos] = vid
        return v

    def add_edge(self, v1: int, v2: int, path: Sequence[Iterable[int]], eid: int | None = None,
                 length: float | None = None) -> Edge:
        path = tuple(PixelCoord(*(int(v) for v in p)) for p in path)
        if path[0] != self.vertices[v1].pos or path[-1] != self.vertices[v2].pos:
            raise ValueError("edge path must run from v1's pixel to v2's pixel")
        if eid is None:
            eid = self.next_edge_id
        if eid in self.edges:
            raise ValueError(f"duplicate edge id {eid}")
        self.next_edge_id = max(self.next_edge_id, eid + 1)
        e = Edge(eid, v1, v2, path, path_length(path) if length is None else float(length))
        self.edges[eid] = e
        self._incident[v1].append(eid)
        if v2 != v1:
            self._incident[v2].append(eid)
        return e

    def remove_edge(self, eid: int) -> Edge:
        e = self.edges.pop(eid)
        self._incident[e.v1].remove(eid)
        if e.v2 != e.v1:
            self._incident[e.v2].remove(eid)
        return e

    def remove_vertex(self, vid: int) -> None:
        for eid in list(self._incident[vid]):
            self.remove_edge(eid)
        v = self.vertices.pop(vid)
        del self._incident[vid]
        del self._by_pos[v.pos]

    # -- queries ----------------------------------------------------------
    def incident(self, vid: int) -> list[int]:
        return sorted(self._incident[vid])

    def degree(self, vid: int) -> int:
        return sum(2 if self.edges[e].is_loop else 1 for e in self._incident[vid])

    def vertex_at(self, pos: Iterable[int]) -> int | None:
        return self._by_pos.get(PixelCoord(*pos))

    def positions(self) -> np.ndarray:
        """(N, 2) float array of vertex (col, row), in vertex-id order."""
        if not self.vertices:
            return np.empty((0, 2))
        return np.array([self.vertices[v].pos for v in sorted(self.vertices)], dtype=np.float64)

    def total_length(self) -> float:
        return sum(e.length for e in self.edges.values())

    def copy(self) -> "TopoGraph":
        g = TopoGraph()
        for vid in sorted(self.vertices):
            g.add_vertex(self.vertices[vid].pos, vid)
        for eid in sorted(self.edges):
            e = self.edges[eid]
            g.add_edge(e.v1, e.v2, e.path, eid, e.length)
        g.next_vertex_id = self.next_vertex_id
        g.next_edge_id = self.next_edge_id
        return g

    def __len__(self) -> int:
        return len(self.vertices)

    def __repr__(self) -> str:
        return f"TopoGraph({len(self.vertices)} vertices, {len(self.edges)} edges)"

    # -- serialization ----------------------------------------------------
    def to_dict(self) -> dict:
        return {
            "vertices": [
                {"id": v.id, "col": v.pos.col, "row": v.pos.row}
                for v in (self.vertices[i] for i in sorted(self.vertices))
            ],
            "edges": [
                {"id": e.id, "v1": e.v1, "v2": e.v2, "length": round(e.length, 9),
                 "path": [[p.col, p.row] for p in e.path]}
                for e in (self.edges[i] for i in sorted(self.edges))
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "TopoGraph":
        g = cls()
        try:
            for v in data["vertices"]:
                g.add_vertex((v["col"], v["row"]), int(v["id"]))
            for e in data["edges"]:
                g.add_edge(int(e["v1"]), int(e["v2"]), e["path"], int(e["id"]), e.get("length"))
        except (KeyError, TypeError, IndexError) as exc:
            raise ValueError(f"malformed graph data: {exc!r}") from exc
        return g

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), separators=(",", ":")) + "\n"

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json())

    @classmethod
    def load(cls, path: str | Path) -> "TopoGraph":
        try:
            data = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise ValueError(f"{path}: not valid JSON: {exc}") from exc
        return cls.from_dict(data)

    def to_dot(self) -> str:
        lines = ["graph topology {"]
        for vid in sorted(self.vertices):
            v = self.vertices[vid]
            lines.append(f'  v{vid} [pos="{v.pos.col},{-v.pos.row}!", col={v.pos.col}, row={v.pos.row}];')
        for eid in sorted(self.edges):
            e = self.edges[eid]
            lines.append(f'  v{e.v1} -- v{e.v2} [id={eid}, length="{e.length:.3f}", pixels={len(e.path)}];')
        lines.append("}")
        return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# pixel graph


def diagonal_allowed(context: np.ndarray, r: int, c: int, r2: int, c2: int) -> bool:
    """L rule: a diagonal link is kept only without a set shared orthogonal neighbor."""
    h, w = context.shape

    def on(rr: int, cc: int) -> bool:
        return 0 <= rr < h and 0 <= cc < w and bool(context[rr, cc])

    return not (on(r, c2) or on(r2, c))


# forward neighbors in discovery order: E, SW, S, SE
_FORWARD = ((0, 1), (1, -1), (1, 0), (1, 1))


def pixel_links(pixels: np.ndarray, context: np.ndarray) -> list[tuple[int, int, int, int]]:
    """Links (r, c, r2, c2) between set pixels of ``pixels``, L rule judged on ``context``."""
    h, w = pixels.shape
    links = []
    for r, c in np.argwhere(pixels):
        for dr, dc in _FORWARD:
            r2, c2 = r + dr, c + dc
            if not (0 <= r2 < h and 0 <= c2 < w and pixels[r2, c2]):
                continue
            if dr and dc and not diagonal_allowed(context, r, c, r2, c2):
                continue
            links.append((int(r), int(c), int(r2), int(c2)))
    return links


def pixels_to_graph(skel: np.ndarray, origin: Iterable[int] = (0, 0), context: np.ndarray | None = None) -> TopoGraph:
    """One vertex per set pixel (ids row-major) and one edge per kept link.

    ``origin`` is the global (col, row) of ``skel[0, 0]``.  ``context``, when
    given, is the raster the L rule looks at (defaults to ``skel``); it lets a
    partial skeleton be linked exactly as it would be inside the whole map.
    """
    skel = np.asarray(skel, dtype=bool)
    context = skel if context is None else np.asarray(context, dtype=bool)
    oc, orow = (int(v) for v in origin)
    g = TopoGraph()
    ids = {}
    for r, c in np.argwhere(skel):
        ids[(int(r), int(c))] = g.add_vertex((oc + c, orow + r)).id
    for r, c, r2, c2 in pixel_links(skel, context):
        g.add_edge(ids[(r, c)], ids[(r2, c2)], [(oc + c, orow + r), (oc + c2, orow + r2)])
    return g


# ---------------------------------------------------------------------------
# degree-2 contraction


def _walk(g: TopoGraph, start: int, eid: int, removable: set[int], visited: set[int]) -> tuple[int, list[PixelCoord]]:
    path = list(g.edges[eid].path_from(start))
    visited.add(eid)
    cur = g.edges[eid].other(start)
    prev = eid
    while cur in removable:
        nxt = next(e for e in g._incident[cur] if e != prev)
        visited.add(nxt)
        path.extend(g.edges[nxt].path_from(cur)[1:])
        cur, prev = g.edges[nxt].other(cur), nxt
    return cur, path


def contract_degree2(g: TopoGraph, keep: Iterable[PixelCoord] = (), relabel: bool = True) -> TopoGraph:
    """Collapse every maximal chain of degree-2 vertices into one edge.

    Vertices whose pixel is in ``keep`` survive regardless of degree.  A pure
    cycle keeps a single anchor at its smallest (row, col) pixel.  With
    ``relabel`` the output ids restart at 0 (vertices row-major, edges in
    discovery order); otherwise surviving vertices keep their ids and new
    edges continue from ``g.next_edge_id``.
    """
    keep = {PixelCoord(*p) for p in keep}
    removable = {
        vid for vid, v in g.vertices.items()
        if v.pos not in keep and g.degree(vid) == 2 and not any(g.edges[e].is_loop for e in g._incident[vid])
    }
    survivors = sorted((vid for vid in g.vertices if vid not in removable), key=lambda v: rowmajor(g.vertices[v].pos))
    visited: set[int] = set()
    chains: list[tuple[int, int, list[PixelCoord]]] = []

    def walk_from(vid: int) -> None:
        for eid in g.incident(vid):
            if eid in visited:
                continue
            end, path = _walk(g, vid, eid, removable, visited)
            chains.append((vid, end, path))

    for vid in survivors:
        walk_from(vid)
    anchors = []
    for eid in sorted(g.edges):
        if eid in visited:
            continue
        # untouched edges here lie on cycles made only of removable vertices
        cycle, stack = set(), [g.edges[eid].v1]
        while stack:
            v = stack.pop()
            if v in cycle:
                continue
            cycle.add(v)
            stack.extend(g.edges[e].other(v) for e in g._incident[v])
        anchor = min(cycle, key=lambda v: rowmajor(g.vertices[v].pos))
        removable.discard(anchor)
        anchors.append(anchor)
        walk_from(anchor)

    out = TopoGraph()
    kept = sorted(survivors + anchors, key=lambda v: rowmajor(g.vertices[v].pos))
    if relabel:
        new_id = {vid: i for i, vid in enumerate(kept)}
    else:
        new_id = {vid: vid for vid in kept}
        out.next_edge_id = g.next_edge_id
    for vid in kept:
        out.add_vertex(g.vertices[vid].pos, new_id[vid])
    if not relabel:
        out.next_vertex_id = g.next_vertex_id
    for a, b, path in chains:
        out.add_edge(new_id[a], new_id[b], path)
    return out


def dissolve_vertex(g: TopoGraph, vid: int) -> int | None:
    """Merge the two edges of a degree-2 vertex in place; returns the new edge id.

    Vertices carrying a self-loop (cycle anchors) are left alone.
    """
    inc = g.incident(vid)
    if len(inc) != 2 or any(g.edges[e].is_loop for e in inc):
        return None
    e1, e2 = g.edges[inc[0]], g.edges[inc[1]]
    a, b = e1.other(vid), e2.other(vid)
    path = list(e1.path_from(a)) + list(e2.path_from(vid)[1:])
    length = e1.length + e2.length
    g.remove_vertex(vid)
    return g.add_edge(a, b, path, length=length).id


def skeleton_graph(skel: np.ndarray, origin: Iterable[int] = (0, 0)) -> TopoGraph:
    """Batch graph of a skeleton raster."""
    return contract_degree2(pixels_to_graph(skel, origin))


def canonical_form(g: TopoGraph) -> tuple:
    """Id-free description for comparing graphs built along different routes."""
    verts = tuple(sorted(rowmajor(v.pos) for v in g.vertices.values()))
    edges = []
    for e in g.edges.values():
        p = [rowmajor(q) for q in e.path]
        if e.is_loop:
            cands = []
            body = p[:-1]
            for seq in (body, body[::-1]):
                for i in range(len(seq)):
                    rot = seq[i:] + seq[:i]
                    cands.append(tuple(rot + [rot[0]]))
            edges.append(min(cands))
        else:
            edges.append(min(tuple(p), tuple(p[::-1])))
    return verts, tuple(sorted(edges))
