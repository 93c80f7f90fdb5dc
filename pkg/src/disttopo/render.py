"""PNG renders for inspection: heat maps, skeleton and graph overlays.

Images are flipped vertically so world ``+y`` points up.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image

from .distance import DistanceMap, Rect, reframe
from .graph import TopoGraph

SKELETON_RGB = (220, 20, 20)
EDGE_RGB = (30, 90, 230)
VERTEX_RGB = (230, 30, 30)
DIRTY_RGB = (0, 110, 40)


def heat(values: np.ndarray) -> np.ndarray:
    """Black-red-yellow-white ramp of values in [0, 1]."""
    v = np.clip(values, 0.0, 1.0)
    rgb = np.stack([np.clip(3 * v, 0, 1), np.clip(3 * v - 1, 0, 1), np.clip(3 * v - 2, 0, 1)], axis=-1)
    return (rgb * 255).astype(np.uint8)


def gray(values: np.ndarray) -> np.ndarray:
    g = (np.clip(values, 0.0, 1.0) * 255).astype(np.uint8)
    return np.stack([g, g, g], axis=-1)


def base_image(dm: DistanceMap, canvas: Rect | None = None) -> np.ndarray:
    """Light background with obstacle proximity shaded darker."""
    values = dm.values if canvas is None else reframe(dm.values, dm.bounds, canvas, 0.0)
    return gray(1.0 - 0.6 * values)


def overlay_mask(img: np.ndarray, mask: np.ndarray, rgb=SKELETON_RGB, alpha: float = 1.0) -> np.ndarray:
    out = img.copy()
    col = np.asarray(rgb, dtype=np.float64)
    out[mask] = (alpha * col + (1 - alpha) * out[mask]).astype(np.uint8)
    return out


def draw_graph(img: np.ndarray, graph: TopoGraph, canvas: Rect, vertex_radius: int = 1) -> np.ndarray:
    out = img.copy()
    h, w = out.shape[:2]

    def put(col: int, row: int, rgb) -> None:
        r, c = row - canvas.row0, col - canvas.col0
        if 0 <= r < h and 0 <= c < w:
            out[r, c] = rgb

    for e in graph.edges.values():
        for p in e.path:
            put(p[0], p[1], EDGE_RGB)
    for v in graph.vertices.values():
        for dr in range(-vertex_radius, vertex_radius + 1):
            for dc in range(-vertex_radius, vertex_radius + 1):
                put(v.pos[0] + dc, v.pos[1] + dr, VERTEX_RGB)
    return out


def save_png(path: str | Path, img: np.ndarray, scale: int = 1) -> None:
    im = Image.fromarray(np.ascontiguousarray(img[::-1]))
    if scale > 1:
        im = im.resize((im.width * scale, im.height * scale), Image.NEAREST)
    im.save(path)


def render_distance(path: str | Path, dm: DistanceMap) -> None:
    save_png(path, heat(dm.values))


def render_skeleton(path: str | Path, dm: DistanceMap, skeleton: np.ndarray, canvas: Rect) -> None:
    save_png(path, overlay_mask(base_image(dm, canvas), skeleton))


def render_graph(path: str | Path, dm: DistanceMap, graph: TopoGraph) -> None:
    save_png(path, draw_graph(base_image(dm), graph, dm.bounds))


def render_snapshot(path: str | Path, dm: DistanceMap, skeleton: np.ndarray, skeleton_canvas: Rect,
                    graph: TopoGraph, dirty: np.ndarray, dirty_canvas: Rect) -> None:
    """Map, skeleton and graph with the pending dirty mask shaded green."""
    canvas = dm.bounds
    img = base_image(dm)
    img = overlay_mask(img, reframe(dirty, dirty_canvas, canvas, False), DIRTY_RGB, alpha=0.45)
    img = overlay_mask(img, reframe(skeleton, skeleton_canvas, canvas, False), (250, 150, 150))
    save_png(path, draw_graph(img, graph, canvas))
