"""Binary raster files: 1-bit PBM masks and float32 distance-map rasters.

Both formats carry the canvas origin (global pixel of element [0, 0]) so a
raster can be placed back on the shared pixel lattice.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .distance import DistanceMap
from .grid import PixelCoord

DMAP_MAGIC = "DMAP1"


def write_pbm(path: str | Path, mask: np.ndarray, origin: PixelCoord = PixelCoord(0, 0)) -> None:
    """Binary PBM (P4); set pixels are 1 (black).  The origin goes in a comment."""
    mask = np.asarray(mask, dtype=bool)
    h, w = mask.shape
    header = f"P4\n# origin {origin[0]} {origin[1]}\n{w} {h}\n".encode("ascii")
    packed = np.packbits(mask, axis=1) if w else np.zeros((h, 0), dtype=np.uint8)
    Path(path).write_bytes(header + packed.tobytes())


def _header_tokens(data: bytes, count: int) -> tuple[list[str], list[str], int]:
    # returns header tokens, comment lines and the offset of the raster bytes
    tokens, comments, pos = [], [], 0
    while len(tokens) < count:
        while pos < len(data) and data[pos:pos + 1].isspace():
            pos += 1
        if pos >= len(data):
            raise ValueError("truncated header")
        if data[pos:pos + 1] == b"#":
            end = data.find(b"\n", pos)
            end = len(data) if end < 0 else end
            comments.append(data[pos + 1:end].decode("ascii", "replace").strip())
            pos = end
            continue
        start = pos
        while pos < len(data) and not data[pos:pos + 1].isspace():
            pos += 1
        tokens.append(data[start:pos].decode("ascii"))
    return tokens, comments, pos + 1  # a single whitespace byte ends the header


def read_pbm(path: str | Path) -> tuple[np.ndarray, PixelCoord]:
    data = Path(path).read_bytes()
    tokens, comments, pos = _header_tokens(data, 3)
    if tokens[0] != "P4":
        raise ValueError(f"{path}: not a binary PBM")
    w, h = int(tokens[1]), int(tokens[2])
    stride = (w + 7) // 8
    body = np.frombuffer(data, dtype=np.uint8, count=stride * h, offset=pos)
    mask = np.unpackbits(body.reshape(h, stride), axis=1)[:, :w].astype(bool) if h and w else np.zeros((h, w), bool)
    origin = PixelCoord(0, 0)
    for line in comments:
        parts = line.split()
        if len(parts) == 3 and parts[0] == "origin":
            origin = PixelCoord(int(parts[1]), int(parts[2]))
    return mask, origin


def write_dmap(path: str | Path, dm: DistanceMap) -> None:
    """Little-endian float32 raster after a short text header."""
    header = (
        f"{DMAP_MAGIC}\nwidth {dm.width}\nheight {dm.height}\n"
        f"origin_col {dm.origin.col}\norigin_row {dm.origin.row}\nsigma {dm.sigma!r}\nend\n"
    )
    Path(path).write_bytes(header.encode("ascii") + dm.values.astype("<f4").tobytes())


def read_dmap(path: str | Path) -> DistanceMap:
    data = Path(path).read_bytes()
    end = data.find(b"\nend\n")
    if not data.startswith(DMAP_MAGIC.encode()) or end < 0:
        raise ValueError(f"{path}: not a distance-map raster")
    fields = dict(line.split(None, 1) for line in data[:end].decode("ascii").splitlines()[1:])
    w, h = int(fields["width"]), int(fields["height"])
    values = np.frombuffer(data, dtype="<f4", count=w * h, offset=end + 5).reshape(h, w).astype(np.float64)
    origin = PixelCoord(int(fields["origin_col"]), int(fields["origin_row"]))
    return DistanceMap(values, origin, float(fields["sigma"]))
