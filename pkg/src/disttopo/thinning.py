"""Two-subiteration parallel thinning (Guo & Hall 1989, algorithm A1).

Neighbors are numbered counter-clockwise from east::

    x4 x3 x2
    x5  p x1
    x6 x7 x8

and packed into an 8-bit code with ``x1`` as bit 0.  A pixel is deleted in a
subiteration when exactly one 8-connected run of neighbors touches it
(``C(p) == 1``), ``2 <= N(p) <= 3``, and the subiteration's directional
condition holds.
"""

from __future__ import annotations

import numpy as np
from scipy import ndimage

# (drow, dcol) of x1..x8
NEIGHBOR_OFFSETS = ((0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1), (1, 0), (1, 1))


def _bits(code: int) -> list[bool]:
    # x[1]..x[8], with x[9] == x[1] for the cyclic sums
    x = [False] + [bool(code >> i & 1) for i in range(8)]
    return x + [x[1]]


def _deletable(code: int, second: bool) -> bool:
    x = _bits(code)
    crossing = sum(1 for i in (1, 3, 5, 7) if not x[i] and (x[i + 1] or x[i + 2]))
    n1 = sum(1 for k in (1, 3, 5, 7) if x[k] or x[k + 1])
    n2 = sum(1 for k in (2, 4, 6, 8) if x[k] or x[k + 1])
    if crossing != 1 or min(n1, n2) not in (2, 3):
        return False
    if second:
        return not ((x[6] or x[7] or not x[4]) and x[5])
    return not ((x[2] or x[3] or not x[8]) and x[1])


SUBITERATION_LUTS = tuple(
    np.array([_deletable(code, second) for code in range(256)], dtype=bool) for second in (False, True)
)


def _window(code: int) -> np.ndarray:
    win = np.zeros((3, 3), dtype=bool)
    for bit, (dr, dc) in enumerate(NEIGHBOR_OFFSETS):
        win[1 + dr, 1 + dc] = bool(code >> bit & 1)
    return win


def _single_component(code: int, connectivity: int) -> bool:
    structure = ndimage.generate_binary_structure(2, 1 if connectivity == 4 else 2)
    return ndimage.label(_window(code), structure)[1] == 1


# neighbors of the center stay one 8-connected group once the center is gone
SIMPLE_LUT = np.array([_single_component(code, 8) for code in range(256)], dtype=bool)


def neighbor_codes(img: np.ndarray) -> np.ndarray:
    """8-bit neighborhood code of every pixel (outside the raster counts as 0)."""
    p = np.pad(img.astype(np.uint8), 1)
    h, w = img.shape
    codes = np.zeros((h, w), dtype=np.uint8)
    for bit, (dr, dc) in enumerate(NEIGHBOR_OFFSETS):
        codes |= p[1 + dr:1 + dr + h, 1 + dc:1 + dc + w] << bit
    return codes


def _code_at(img: np.ndarray, r: int, c: int) -> int:
    h, w = img.shape
    code = 0
    for bit, (dr, dc) in enumerate(NEIGHBOR_OFFSETS):
        rr, cc = r + dr, c + dc
        if 0 <= rr < h and 0 <= cc < w and img[rr, cc]:
            code |= 1 << bit
    return code


def break_squares(skel: np.ndarray, protected: np.ndarray | None = None) -> np.ndarray:
    """Delete one pixel from each fully set 2x2 block where connectivity allows.

    Guo-Hall keeps some 2x2 blocks at junctions.  Blocks where every pixel
    carries its own branch (an "X" core) cannot be broken without
    disconnecting a branch and are left as they are.
    """
    skel = skel.copy()
    while True:
        blocks = skel[:-1, :-1] & skel[1:, :-1] & skel[:-1, 1:] & skel[1:, 1:]
        changed = False
        for r, c in np.argwhere(blocks):
            if not (skel[r, c] and skel[r + 1, c] and skel[r, c + 1] and skel[r + 1, c + 1]):
                continue
            for rr, cc in ((r, c), (r, c + 1), (r + 1, c), (r + 1, c + 1)):
                if protected is not None and protected[rr, cc]:
                    continue
                if SIMPLE_LUT[_code_at(skel, rr, cc)]:
                    skel[rr, cc] = False
                    changed = True
                    break
        if not changed:
            return skel


def guo_hall(img: np.ndarray, protected: np.ndarray | None = None, max_iter: int | None = None) -> np.ndarray:
    """Plain Guo-Hall thinning to a fixpoint; ``protected`` pixels are never deleted."""
    skel = np.asarray(img, dtype=bool).copy()
    keep = None if protected is None else np.asarray(protected, dtype=bool)
    if keep is not None:
        if keep.shape != skel.shape:
            raise ValueError("protected layer must match the binary map shape")
        skel |= keep
    n_iter = 0
    while max_iter is None or n_iter < max_iter:
        before = int(skel.sum())
        for lut in SUBITERATION_LUTS:
            delete = lut[neighbor_codes(skel)] & skel
            if keep is not None:
                delete &= ~keep
            skel[delete] = False
        n_iter += 1
        if int(skel.sum()) == before:
            break
    return skel


def thin(img: np.ndarray, protected: np.ndarray | None = None) -> np.ndarray:
    """Guo-Hall thinning followed by 2x2 block breaking.

    The result is a subset of ``img | protected``, keeps the number of
    8-connected components, and keeps every endpoint of the input.
    """
    skel = guo_hall(img, protected)
    return break_squares(skel, protected)
