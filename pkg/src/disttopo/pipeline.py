"""Batch route: occupancy grid or obstacle set to distance map, skeleton and graph."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import RunConfig
from .distance import DistanceMap, GaussianKernel, Rect, build_distance_map
from .graph import TopoGraph, skeleton_graph
from .grid import OccupancyGrid
from .skeleton import SkeletonLayers, skeletonize


@dataclass
class BatchResult:
    dm: DistanceMap
    layers: SkeletonLayers
    graph: TopoGraph

    @property
    def skeleton(self) -> np.ndarray:
        return self.layers.skeleton


def skeleton_from_dm(dm: DistanceMap, config: RunConfig | None = None) -> BatchResult:
    cfg = config or RunConfig()
    layers = skeletonize(dm, cfg.laplacian_scale, cfg.binarize_threshold, cfg.stencil)
    return BatchResult(dm, layers, skeleton_graph(layers.skeleton, dm.origin))


def batch_from_obstacles(obstacles: np.ndarray, bounds: Rect, config: RunConfig | None = None) -> BatchResult:
    cfg = config or RunConfig()
    kernel = GaussianKernel(cfg.sigma, cfg.kernel_radius)
    return skeleton_from_dm(build_distance_map(obstacles, bounds, kernel), cfg)


def batch_from_grid(grid: OccupancyGrid, config: RunConfig | None = None) -> BatchResult:
    """Occupied cells are the obstacles; the canvas is the grid itself."""
    return batch_from_obstacles(grid.obstacles(), Rect(0, 0, grid.width, grid.height), config)
