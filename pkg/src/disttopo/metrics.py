"""Nearest-vertex error between two topology graphs."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.spatial import cKDTree

from .graph import TopoGraph


class Region(NamedTuple):
    """Inclusive pixel box ``x0 <= col <= x1``, ``y0 <= row <= y1``."""

    x0: float
    y0: float
    x1: float
    y1: float

    @classmethod
    def parse(cls, text: str) -> "Region":
        parts = [float(p) for p in text.replace(" ", "").split(",")]
        if len(parts) != 4:
            raise ValueError(f"region needs x0,y0,x1,y1, got {text!r}")
        return cls(*parts)

    def contains(self, pts: np.ndarray) -> np.ndarray:
        return (pts[:, 0] >= self.x0) & (pts[:, 0] <= self.x1) & (pts[:, 1] >= self.y0) & (pts[:, 1] <= self.y1)


@dataclass
class VertexErrorReport:
    avg_dist: float | None
    outliers: int
    total: int
    pct_within_1: float | None
    outlier_threshold: float
    per_vertex: list[tuple[int, float]] = field(default_factory=list)

    @property
    def defined(self) -> bool:
        return self.total > 0

    def to_dict(self) -> dict:
        d = asdict(self)
        d["per_vertex"] = [[vid, round(dist, 9)] for vid, dist in self.per_vertex]
        if self.avg_dist is not None:
            d["avg_dist"] = round(self.avg_dist, 9)
        if self.pct_within_1 is not None:
            d["pct_within_1"] = round(self.pct_within_1, 9)
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1) + "\n"

    def table(self) -> str:
        avg = "undefined" if self.avg_dist is None else f"{self.avg_dist:.2f}"
        pct = "undefined" if self.pct_within_1 is None else f"{self.pct_within_1:.1f}%"
        rows = [("Ave Dist", avg), ("Outlier / Total", f"{self.outliers} / {self.total}"), ("% (<=1)", pct)]
        width = max(len(k) for k, _ in rows)
        return "\n".join(f"{k:<{width}}  {v}" for k, v in rows) + "\n"


def nearest_distances(candidates: np.ndarray, reference: np.ndarray, method: str = "brute") -> np.ndarray:
    """Distance from each candidate point to its nearest reference point."""
    if len(reference) == 0:
        raise ValueError("reference point set is empty")
    if len(candidates) == 0:
        return np.empty(0)
    if method == "kdtree":
        return cKDTree(reference).query(candidates)[0]
    if method != "brute":
        raise ValueError(f"unknown method {method!r}")
    out = np.empty(len(candidates))
    step = max(1, 2_000_000 // max(len(reference), 1))
    for i in range(0, len(candidates), step):
        chunk = candidates[i:i + step]
        d2 = ((chunk[:, None, :] - reference[None, :, :]) ** 2).sum(axis=2)
        out[i:i + step] = np.sqrt(d2.min(axis=1))
    return out


def vertex_error(
    candidate: TopoGraph,
    reference: TopoGraph,
    outlier_threshold: float = 20.0,
    region: Region | None = None,
    method: str = "brute",
) -> VertexErrorReport:
    """Match each candidate vertex to its nearest reference vertex.

    Distances above ``outlier_threshold`` count as outliers: they stay in
    ``total`` but not in the average.  ``pct_within_1`` is the share of the
    non-outlier vertices at distance <= 1; both are undefined (None) when
    every vertex is an outlier.
    """
    if not reference.vertices:
        raise ValueError("reference graph has no vertices")
    ids = sorted(candidate.vertices)
    pts = candidate.positions()
    if region is not None and len(pts):
        inside = region.contains(pts)
        ids = [vid for vid, ok in zip(ids, inside) if ok]
        pts = pts[inside]
    dist = nearest_distances(pts, reference.positions(), method)
    total = len(dist)
    if total == 0:
        return VertexErrorReport(None, 0, 0, None, outlier_threshold)
    outlier = dist > outlier_threshold
    inliers = dist[~outlier]
    avg = float(inliers.mean()) if len(inliers) else None
    within = float((inliers <= 1.0).sum()) * 100.0 / len(inliers) if len(inliers) else None
    return VertexErrorReport(
        avg_dist=avg,
        outliers=int(outlier.sum()),
        total=total,
        pct_within_1=within,
        outlier_threshold=outlier_threshold,
        per_vertex=[(vid, float(d)) for vid, d in zip(ids, dist)],
    )
