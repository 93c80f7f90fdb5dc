"""Topology graphs from occupancy grids via Gaussian distance maps, batch and incremental."""

from .config import RunConfig, UpdateSchedule, load_config
from .distance import DirtyMask, DistanceMap, GaussianKernel, Rect, build_distance_map, merge_distance_maps
from .engine import IncrementalEngine, load_checkpoint, update_graph
from .graph import Edge, TopoGraph, Vertex, contract_degree2, pixels_to_graph, skeleton_graph
from .grid import Cell, OccupancyGrid, PixelCoord, Pose2D, ScanFrame, load_grid, save_grid, scan_to_obstacles
from .metrics import Region, VertexErrorReport, vertex_error
from .pipeline import BatchResult, batch_from_grid, batch_from_obstacles, skeleton_from_dm
from .sim import SensorSpec, Trajectory, generate_log, raycast, read_log, write_log
from .skeleton import binarize, ridge_filter, skeletonize, suppress_t_cross
from .thinning import thin

__all__ = [
    "BatchResult", "Cell", "DirtyMask", "DistanceMap", "Edge", "GaussianKernel", "IncrementalEngine",
    "OccupancyGrid", "PixelCoord", "Pose2D", "Rect", "Region", "RunConfig", "ScanFrame", "SensorSpec",
    "TopoGraph", "Trajectory", "UpdateSchedule", "Vertex", "VertexErrorReport", "batch_from_grid",
    "batch_from_obstacles", "binarize", "build_distance_map", "contract_degree2", "generate_log",
    "load_checkpoint", "load_config", "load_grid", "merge_distance_maps", "pixels_to_graph", "raycast",
    "read_log", "ridge_filter", "save_grid", "scan_to_obstacles", "skeleton_from_dm", "skeleton_graph",
    "skeletonize", "suppress_t_cross", "thin", "update_graph", "vertex_error", "write_log",
]
