"""Binary masks: polygon rasterization, border following and topology.

Pixel ``(px, py)`` covers ``[px, px+1) x [py, py+1)`` and is sampled at its
center ``(px + 0.5, py + 0.5)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import List, Tuple

import numpy as np
from scipy import ndimage

from .geometry import RingPolygon

_FG_8 = np.ones((3, 3), dtype=bool)
_BG_4 = ndimage.generate_binary_structure(2, 1)


@dataclass(frozen=True, eq=False)
class BinaryMask:
    """Immutable ``height x width`` boolean grid, row-major."""

    bits: np.ndarray

    def __post_init__(self):
        arr = np.array(self.bits, dtype=bool)
        if arr.ndim != 2:
            raise ValueError(f"mask must be 2-D, got shape {arr.shape}")
        arr.setflags(write=False)
        object.__setattr__(self, "bits", arr)

    @classmethod
    def zeros(cls, width: int, height: int) -> "BinaryMask":
        return cls(np.zeros((height, width), dtype=bool))

    @classmethod
    def from_flat(cls, width: int, height: int, flat) -> "BinaryMask":
        flat = np.asarray(flat, dtype=bool)
        if flat.size != width * height:
            raise ValueError(f"expected {width * height} bits, got {flat.size}")
        return cls(flat.reshape(height, width))

    @property
    def width(self) -> int:
        return self.bits.shape[1]

    @property
    def height(self) -> int:
        return self.bits.shape[0]

    def count(self) -> int:
        return int(self.bits.sum())

    def __eq__(self, other):
        if not isinstance(other, BinaryMask):
            return NotImplemented
        return self.bits.shape == other.bits.shape and bool(np.array_equal(self.bits, other.bits))

    __hash__ = None


@dataclass(frozen=True)
class BoundaryChain:
    """Ordered border pixels ``(x, y)``; consecutive points are 8-neighbours."""

    points: Tuple[Tuple[int, int], ...]
    is_hole: bool = False

    def __len__(self):
        return len(self.points)

    def as_array(self) -> np.ndarray:
        return np.array(self.points, dtype=np.int64).reshape(-1, 2)

    def centers(self) -> np.ndarray:
        return self.as_array().astype(np.float64) + 0.5


def _loop_edges(poly: RingPolygon) -> np.ndarray:
    segs = []
    for loop in poly.loops():
        if len(loop) < 2:
            continue
        segs.append(np.hstack([loop, np.roll(loop, -1, axis=0)]))
    if not segs:
        return np.zeros((0, 4))
    return np.vstack(segs)


def rasterize(poly: RingPolygon, width: int, height: int) -> BinaryMask:
    """Fill ``poly`` with the even-odd rule at pixel centers.

    A ring is filled as the even-odd union of its outer and inner loops, so
    the result is the outer region minus the hole whatever the windings.
    Scanline crossings use the half-open rule ``y0 <= yc < y1`` and count a
    crossing at ``xc <= center``, which gives the usual top-left tie
    breaking (left/top edges in, right/bottom edges out).
    """
    if width < 1 or height < 1:
        raise ValueError("width and height must be >= 1")
    out = np.zeros((height, width), dtype=bool)
    edges = _loop_edges(poly)
    if len(edges) == 0:
        return BinaryMask(out)
    x0, y0, x1, y1 = edges.T
    ylo = np.minimum(y0, y1)
    yhi = np.maximum(y0, y1)
    r0 = max(0, int(np.floor(ylo.min() - 0.5)))
    r1 = min(height, int(np.ceil(yhi.max() - 0.5)) + 1)
    if r0 >= r1:
        return BinaryMask(out)

    yc = (np.arange(r0, r1, dtype=np.float64) + 0.5)[:, None]
    hit = (ylo <= yc) & (yc < yhi)
    rows, cols = np.nonzero(hit)
    if rows.size == 0:
        return BinaryMask(out)
    # one division last: exact whenever the crossing is representable
    xc = x0[cols] + (yc[rows, 0] - y0[cols]) * (x1 - x0)[cols] / (y1 - y0)[cols]
    first = np.clip(np.ceil(xc - 0.5), 0, width).astype(np.int64)
    # toggles outside [c0, c1) cancel in pairs along each row
    c0 = int(first.min())
    c1 = int(first.max())
    if c0 == c1:
        return BinaryMask(out)
    toggles = np.zeros((r1 - r0, c1 - c0 + 1), dtype=np.uint8)
    np.add.at(toggles, (rows, first - c0), 1)
    out[r0:r1, c0:c1] = (np.cumsum(toggles, axis=1, dtype=np.uint8)[:, : c1 - c0] & 1).astype(bool)
    return BinaryMask(out)


def border_pixels(mask: BinaryMask) -> np.ndarray:
    """``(k, 2)`` array of ``(x, y)`` set pixels with a 4-neighbour outside the region.

    The frame counts as background.
    """
    b = mask.bits
    rows = np.flatnonzero(b.any(axis=1))
    if rows.size == 0:
        return np.zeros((0, 2), dtype=np.int64)
    cols = np.flatnonzero(b.any(axis=0))
    y0, x0 = rows[0], cols[0]
    p = np.pad(b[y0 : rows[-1] + 1, x0 : cols[-1] + 1], 1)
    inner = p[1:-1, 1:-1]
    interior = inner & p[:-2, 1:-1] & p[2:, 1:-1] & p[1:-1, :-2] & p[1:-1, 2:]
    ys, xs = np.nonzero(inner & ~interior)
    return np.column_stack([xs + x0, ys + y0]).astype(np.int64)


# Neighbour offsets (drow, dcol), counter-clockwise on screen starting east.
_DIRS = ((0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1), (1, 0), (1, 1))


def extract_boundary(mask: BinaryMask) -> List[BoundaryChain]:
    """Trace every border of the 8-connected foreground (Suzuki-Abe).

    Returns one chain per outer border and per hole border, in raster
    order of their starting pixels.  A pixel that separates two different
    background regions (e.g. a 1-px wall between the hole and the outside)
    lies on both of their chains.
    """
    b = mask.bits
    if not b.any():
        return []
    ys, xs = np.nonzero(b)
    y_lo, y_hi, x_lo, x_hi = ys.min(), ys.max() + 1, xs.min(), xs.max() + 1
    sub = np.pad(b[y_lo:y_hi, x_lo:x_hi], 1).astype(np.int32)
    H2, W2 = sub.shape
    f = sub.ravel().tolist()
    offs = [di * W2 + dj for di, dj in _DIRS]
    east = offs[0]

    left_zero = np.zeros_like(sub, dtype=bool)
    left_zero[:, 1:] = sub[:, :-1] == 0
    right_zero = np.zeros_like(sub, dtype=bool)
    right_zero[:, :-1] = sub[:, 1:] == 0
    cand = np.flatnonzero(((sub == 1) & (left_zero | right_zero)).ravel()).tolist()

    chains: List[BoundaryChain] = []
    nbd = 1
    for p in cand:
        if f[p] == 1 and f[p - 1] == 0:
            start_dir = 4  # west neighbour
            is_hole = False
        elif f[p] >= 1 and f[p + 1] == 0:
            start_dir = 0  # east neighbour
            is_hole = True
        else:
            continue
        nbd += 1

        # 3.1: clockwise search from the start neighbour for a non-zero pixel.
        d1 = -1
        for k in range(8):
            d = (start_dir - k) % 8
            if f[p + offs[d]] != 0:
                d1 = d
                break
        if d1 < 0:
            f[p] = -nbd
            chains.append(_chain([p], W2, x_lo, y_lo, is_hole))
            continue

        p1 = p + offs[d1]
        prev = p1
        cur = p
        pts = []
        while True:
            pts.append(cur)
            # 3.3: counter-clockwise search around cur, starting after prev.
            dprev = _dir_of(prev - cur, offs)
            east_zero = False
            nxt = -1
            for k in range(1, 9):
                d = (dprev + k) % 8
                q = cur + offs[d]
                if f[q] != 0:
                    nxt = q
                    break
                if d == 0:
                    east_zero = True
            # 3.4
            if east_zero:
                f[cur] = -nbd
            elif f[cur] == 1:
                f[cur] = nbd
            # 3.5
            if nxt == p and cur == p1:
                break
            prev, cur = cur, nxt
        chains.append(_chain(pts, W2, x_lo, y_lo, is_hole))
    return chains


def _dir_of(delta: int, offs: list) -> int:
    return offs.index(delta)


def _chain(flat_pts, W2, x_lo, y_lo, is_hole) -> BoundaryChain:
    pts = tuple((int(q % W2) - 1 + int(x_lo), int(q // W2) - 1 + int(y_lo)) for q in flat_pts)
    return BoundaryChain(pts, is_hole)


def topology(mask: BinaryMask) -> tuple[int, int]:
    """``(components, holes)``: 8-connected foreground regions and
    4-connected background regions that do not touch the frame."""
    b = mask.bits
    if not b.any():
        return 0, 0
    _, components = ndimage.label(b, structure=_FG_8)
    bg = np.pad(~b, 1, constant_values=True)
    _, bg_regions = ndimage.label(bg, structure=_BG_4)
    return int(components), int(bg_regions - 1)


def write_pgm(mask: BinaryMask, path) -> Path:
    """Dump a mask as a binary (P5) PGM, set pixels white."""
    path = Path(path)
    header = f"P5\n{mask.width} {mask.height}\n255\n".encode("ascii")
    path.write_bytes(header + (mask.bits.astype(np.uint8) * 255).tobytes())
    return path


def read_pgm(path) -> BinaryMask:
    data = Path(path).read_bytes()
    parts = data.split(maxsplit=4)
    if parts[0] != b"P5":
        raise ValueError("not a binary PGM file")
    w, h = int(parts[1]), int(parts[2])
    raw = np.frombuffer(parts[4][: w * h], dtype=np.uint8)
    return BinaryMask.from_flat(w, h, raw > 127)
