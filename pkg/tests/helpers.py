"""Small shared helpers for the test modules."""

import numpy as np
from scipy import ndimage


def components(mask: np.ndarray) -> int:
    return ndimage.label(np.asarray(mask, bool), np.ones((3, 3), bool))[1]


def brute_force_dm(obstacles, shape, origin, sigma, radius):
    """Max over obstacles of the truncated Gaussian, pixel by pixel."""
    h, w = shape
    rows = np.arange(h)[:, None] + origin[1]
    cols = np.arange(w)[None, :] + origin[0]
    out = np.zeros(shape)
    for c, r in obstacles:
        d2 = (cols - c) ** 2 + (rows - r) ** 2
        val = np.where(d2 <= radius * radius, np.exp(-d2 / (2 * sigma * sigma)), 0.0)
        out = np.maximum(out, val)
    return out
