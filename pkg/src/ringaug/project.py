"""Projection of original vertices onto an augmented mask, and clip vertices."""
from __future__ import annotations

import bisect
from dataclasses import dataclass
from typing import List, NamedTuple, Sequence, Tuple

import numpy as np

from .geometry import Point2, RingPolygon, successor
from .raster import BinaryMask
from .transform import AffinePlan, apply_points

DEFAULT_TOL = 3.0
DUPLICATE_TOL = 0.5


class IndexedVertex(NamedTuple):
    original_index: int
    x: float
    y: float

    @property
    def position(self) -> Point2:
        return self.x, self.y


@dataclass(frozen=True)
class SurvivorSequence:
    """Surviving vertices in original index order (``J = (k_1..k_m)``)."""

    survivors: Tuple[IndexedVertex, ...]
    n: int
    partition: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "survivors", tuple(self.survivors))
        prev = 0
        for v in self.survivors:
            if not 1 <= v.original_index <= self.n:
                raise ValueError(f"index {v.original_index} outside 1..{self.n}")
            if v.original_index <= prev:
                raise ValueError("survivor indices must be strictly increasing")
            prev = v.original_index

    @property
    def m(self) -> int:
        return len(self.survivors)

    def indices(self) -> List[int]:
        return [v.original_index for v in self.survivors]

    def positions(self) -> np.ndarray:
        return np.array([(v.x, v.y) for v in self.survivors], dtype=np.float64).reshape(-1, 2)

    def __len__(self):
        return self.m


class ClipVertex(NamedTuple):
    """New vertex where the transformed source edge ``edge -> succ(edge)``
    crosses the clip rectangle.

    ``between`` starts out as the source edge's endpoints and is rewritten
    by :func:`assign_gaps` to the survivor pair whose gap the vertex fills.
    """

    x: float
    y: float
    between: Tuple[int, int]
    edge_param: float
    edge: int

    @property
    def position(self) -> Point2:
        return self.x, self.y


def project_vertices(
    poly: RingPolygon,
    plan: AffinePlan,
    warped: BinaryMask,
    tol: float = DEFAULT_TOL,
) -> SurvivorSequence:
    """Snap each transformed vertex to the nearest border pixel of ``warped``.

    A vertex survives when its transformed position lies in the output frame
    and some border pixel center (a set pixel with a 4-neighbour outside the
    region) is within ``tol``; its position becomes that pixel center.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if poly.n == 0 or not warped.bits.any():
        return SurvivorSequence((), poly.n, poly.partition)
    q = apply_points(plan, poly.vertices)
    padded = np.pad(warped.bits, 1)
    w, h = warped.width, warped.height
    survivors = []
    for i, (qx, qy) in enumerate(q):
        if not (0 <= qx <= w and 0 <= qy <= h):
            continue
        hit = nearest_border_point(padded, qx, qy, tol)
        if hit is not None:
            survivors.append(IndexedVertex(i + 1, hit[0], hit[1]))
    return SurvivorSequence(tuple(survivors), poly.n, poly.partition)


def nearest_border_point(padded: np.ndarray, qx: float, qy: float, tol: float):
    """Center of the border pixel nearest to ``(qx, qy)`` if within ``tol``.

    ``padded`` is the mask with one background pixel of padding.  Only the
    window of pixels whose centers can lie within ``tol`` is inspected; ties
    go to the first pixel in raster order.
    """
    h, w = padded.shape[0] - 2, padded.shape[1] - 2
    x0 = max(0, int(np.floor(qx - tol - 0.5)))
    x1 = min(w, int(np.floor(qx + tol - 0.5)) + 1)
    y0 = max(0, int(np.floor(qy - tol - 0.5)))
    y1 = min(h, int(np.floor(qy + tol - 0.5)) + 1)
    if x0 >= x1 or y0 >= y1:
        return None
    win = padded[y0 : y1 + 2, x0 : x1 + 2]
    core = win[1:-1, 1:-1]
    border = core & ~(win[:-2, 1:-1] & win[2:, 1:-1] & win[1:-1, :-2] & win[1:-1, 2:])
    ys, xs = np.nonzero(border)
    if ys.size == 0:
        return None
    cx = xs + (x0 + 0.5)
    cy = ys + (y0 + 0.5)
    d = np.hypot(cx - qx, cy - qy)
    k = int(np.argmin(d))
    if d[k] > tol:
        return None
    return float(cx[k]), float(cy[k])


def clip_segment(a, b, rect) -> Tuple[float, float] | None:
    """Liang-Barsky: parameter interval of segment ``a->b`` inside ``rect``.

    ``rect = (xmin, ymin, xmax, ymax)``.  Returns ``None`` when the segment
    misses the rectangle.
    """
    (ax, ay), (bx, by) = a, b
    xmin, ymin, xmax, ymax = rect
    dx, dy = bx - ax, by - ay
    t0, t1 = 0.0, 1.0
    for p, q in ((-dx, ax - xmin), (dx, xmax - ax), (-dy, ay - ymin), (dy, ymax - ay)):
        if p == 0:
            if q < 0:
                return None
            continue
        r = q / p
        if p < 0:
            if r > t1:
                return None
            t0 = max(t0, r)
        else:
            if r < t0:
                return None
            t1 = min(t1, r)
    return t0, t1


def clip_intersections(poly: RingPolygon, plan: AffinePlan, clip_rect=None) -> List[ClipVertex]:
    """Crossings of every transformed chain edge with the clip rectangle.

    ``clip_rect`` defaults to the output frame.  Crossings are ordered by
    source edge, then by parameter along the edge.
    """
    if clip_rect is None:
        clip_rect = (0.0, 0.0, float(plan.out_width), float(plan.out_height))
    n = poly.n
    if n < 2:
        return []
    q = apply_points(plan, poly.vertices)
    out: List[ClipVertex] = []
    for i in range(1, n + 1):
        j = successor(i, n)
        a, b = q[i - 1], q[j - 1]
        span = clip_segment(a, b, clip_rect)
        if span is None:
            continue
        t0, t1 = span
        ts = []
        if t0 > 0.0:
            ts.append(t0)
        if t1 < 1.0 and t1 != t0:
            ts.append(t1)
        for t in ts:
            x = float(a[0] + t * (b[0] - a[0]))
            y = float(a[1] + t * (b[1] - a[1]))
            out.append(ClipVertex(x, y, (i, j), float(t), i))
    return out


def assign_gaps(
    clips: Sequence[ClipVertex],
    survivors: SurvivorSequence,
    dedupe_tol: float = DUPLICATE_TOL,
) -> List[ClipVertex]:
    """Attach each clip vertex to the survivor gap containing its source edge.

    Clips within ``dedupe_tol`` of a surviving vertex are dropped, as are
    clips on edges between consecutive survivors (no gap to fill).  The
    result is ordered by chain position.
    """
    ks = survivors.indices()
    m = len(ks)
    if m == 0:
        return []
    n = survivors.n
    pos = survivors.positions()
    placed = []
    for c in clips:
        # gap t covers edges k_t .. k_{t+1}-1 (cyclically)
        t = bisect.bisect_right(ks, c.edge) - 1
        if t < 0:
            t = m - 1
        a, b = ks[t], ks[(t + 1) % m]
        if b == successor(a, n) and m > 1:
            continue
        if dedupe_tol > 0 and np.min(np.hypot(pos[:, 0] - c.x, pos[:, 1] - c.y)) <= dedupe_tol:
            continue
        offset = (c.edge - a) % n
        placed.append(((t, offset, c.edge_param), c._replace(between=(a, b))))
    placed.sort(key=lambda item: item[0])
    return [c for _, c in placed]
