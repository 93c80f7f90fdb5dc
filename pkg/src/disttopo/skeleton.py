"""From a distance map to a one-pixel-wide skeleton.

The paths we want are the creases where two obstacle "valleys" of the
distance map meet.  There the map is locally minimal across the path, so
the discrete Laplacian is strongly positive; around obstacle peaks it is
negative.  The pipeline is: scale, Laplacian (positive part), threshold,
thin, and suppress T crossings.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .distance import DistanceMap
from .thinning import NEIGHBOR_OFFSETS, neighbor_codes, thin

STENCILS = {
    4: np.array([[0, 1, 0], [1, -4, 1], [0, 1, 0]], dtype=np.float64),
    8: np.array([[1, 1, 1], [1, -8, 1], [1, 1, 1]], dtype=np.float64),
}


def ridge_filter(dm: DistanceMap | np.ndarray, scale: float = 255.0, stencil: int = 4) -> np.ndarray:
    """Positive part of the Laplacian of ``scale * dm``.

    Borders replicate the edge value, so a map that is constant along the
    border direction has no response there.
    """
    if not scale > 0:
        raise ValueError("scale must be positive")
    try:
        kernel = STENCILS[stencil]
    except KeyError:
        raise ValueError(f"stencil must be 4 or 8, got {stencil!r}") from None
    values = dm.values if isinstance(dm, DistanceMap) else np.asarray(dm, dtype=np.float64)
    if values.size == 0:
        return np.zeros(values.shape)
    p = np.pad(values * scale, 1, mode="edge")
    h, w = values.shape
    out = np.zeros((h, w))
    for dr in range(3):
        for dc in range(3):
            if kernel[dr, dc]:
                out += kernel[dr, dc] * p[dr:dr + h, dc:dc + w]
    return np.maximum(out, 0.0)


def binarize(ridge: np.ndarray, threshold: float = 10.0) -> np.ndarray:
    return np.asarray(ridge) > threshold


def _t_cross_removable(code: int) -> bool:
    # exactly three 4-neighbors (E, N, W, S are bits 0, 2, 4, 6) and the
    # remaining ring pixels form one 4-connected run without the center
    if sum(code >> b & 1 for b in (0, 2, 4, 6)) != 3:
        return False
    ring = [code >> b & 1 for b in range(8)]
    # consecutive ring positions are 4-adjacent; count maximal runs of set pixels
    runs = sum(1 for i in range(8) if ring[i] and not ring[i - 1])
    return runs == 1


T_CROSS_LUT = np.array([_t_cross_removable(code) for code in range(256)], dtype=bool)


def suppress_t_cross(skel: np.ndarray) -> np.ndarray:
    """Clear T-crossing centers in a single row-major pass.

    A set pixel is a T crossing when exactly three of its four orthogonal
    neighbors are set; its center is cleared when the remaining neighbors
    stay 4-connected within the 3x3 window.  Earlier clears are visible to
    later pixels in the scan.
    """
    out = np.asarray(skel, dtype=bool).copy()
    candidates = np.argwhere(T_CROSS_LUT[neighbor_codes(out)] & out)
    h, w = out.shape
    for r, c in candidates:
        code = 0
        for bit, (dr, dc) in enumerate(NEIGHBOR_OFFSETS):
            rr, cc = r + dr, c + dc
            if 0 <= rr < h and 0 <= cc < w and out[rr, cc]:
                code |= 1 << bit
        if T_CROSS_LUT[code]:
            out[r, c] = False
    return out


@dataclass
class SkeletonLayers:
    ridge: np.ndarray
    binary: np.ndarray
    skeleton: np.ndarray


def skeletonize(
    dm: DistanceMap | np.ndarray,
    scale: float = 255.0,
    threshold: float = 10.0,
    stencil: int = 4,
    protected: np.ndarray | None = None,
) -> SkeletonLayers:
    """Run the whole raster pipeline and keep the intermediate layers."""
    ridge = ridge_filter(dm, scale, stencil)
    binary = binarize(ridge, threshold)
    skel = suppress_t_cross(thin(binary, protected))
    if protected is not None:
        skel |= protected
    return SkeletonLayers(ridge, binary, skel)


def has_square(skel: np.ndarray) -> bool:
    """True when some 2x2 window is fully set."""
    s = np.asarray(skel, dtype=bool)
    return bool((s[:-1, :-1] & s[1:, :-1] & s[:-1, 1:] & s[1:, 1:]).any())
