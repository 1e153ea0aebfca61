"""Synthetic ring corpora and the failure-prone reference pipelines.

``naive_vertex_transform`` moves vertices and drops the ones that leave the
frame, without reconnecting anything: every gap breaks the chain into a
separate fragment.  ``mask_contour_reextract`` goes through mask space and
re-traces the border pixels, which yields dense, unindexed contours.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from .exceptions import ConfigurationError
from .geometry import RingPolygon, signed_area, validate
from .raster import extract_boundary, rasterize
from .transform import AffinePlan, apply_points, derive_rng, warp_mask

SHAPES = ("rectangle", "l-shape", "orthogonal", "mixed")


@dataclass(frozen=True)
class SyntheticRingSpec:
    count: int = 200
    width: int = 512
    height: int = 512
    shape: str = "rectangle"
    hole_ratio: Tuple[float, float] = (0.3, 0.6)
    size_ratio: Tuple[float, float] = (0.5, 0.85)
    bridge: str = "top-midpoint"
    min_wall: int = 16
    seed: int = 0
    label: str = "ring"

    def __post_init__(self):
        if self.count < 0:
            raise ConfigurationError("count must be non-negative")
        if self.shape not in SHAPES:
            raise ConfigurationError(f"unknown shape family {self.shape!r}")
        if self.bridge != "top-midpoint":
            raise ConfigurationError(f"unknown bridge rule {self.bridge!r}")
        lo, hi = self.hole_ratio
        if not 0 < lo <= hi < 1:
            raise ConfigurationError("hole_ratio must satisfy 0 < min <= max < 1")
        lo, hi = self.size_ratio
        if not 0 < lo <= hi <= 1:
            raise ConfigurationError("size_ratio must satisfy 0 < min <= max <= 1")
        if self.width < 64 or self.height < 64:
            raise ConfigurationError("frame too small for a ring with walls")


def _rect(x0, y0, x1, y1):
    return [(x0, y0), (x0, y1), (x1, y1), (x1, y0)]


def _outer_rectangle(rng, spec):
    W, H = spec.width, spec.height
    w = int(rng.uniform(*spec.size_ratio) * W)
    h = int(rng.uniform(*spec.size_ratio) * H)
    x0 = int(rng.integers(8, W - w - 8 + 1))
    y0 = int(rng.integers(8, H - h - 8 + 1))
    return _rect(x0, y0, x0 + w, y0 + h), (x0, y0, x0 + w, y0 + h)


def _outer_l_shape(rng, spec):
    _, (x0, y0, x1, y1) = _outer_rectangle(rng, spec)
    w, h = x1 - x0, y1 - y0
    cw = int(rng.uniform(0.3, 0.45) * w)
    ch = int(rng.uniform(0.3, 0.45) * h)
    # bottom-right corner removed; the top edge stays whole
    loop = [(x0, y0), (x0, y1), (x1 - cw, y1), (x1 - cw, y1 - ch), (x1, y1 - ch), (x1, y0)]
    return loop, (x0, y0, x1 - cw, y1)


def _outer_orthogonal(rng, spec):
    _, (x0, y0, x1, y1) = _outer_rectangle(rng, spec)
    w, h = x1 - x0, y1 - y0
    nw = max(spec.min_wall, int(0.15 * w))
    nh = max(spec.min_wall, int(0.15 * h))
    cut = rng.random(4) < 0.5
    pts = []
    # corners visited TL, BL, BR, TR
    if cut[0]:
        pts += [(x0 + nw, y0), (x0 + nw, y0 + nh), (x0, y0 + nh)]
    else:
        pts.append((x0, y0))
    if cut[1]:
        pts += [(x0, y1 - nh), (x0 + nw, y1 - nh), (x0 + nw, y1)]
    else:
        pts.append((x0, y1))
    if cut[2]:
        pts += [(x1 - nw, y1), (x1 - nw, y1 - nh), (x1, y1 - nh)]
    else:
        pts.append((x1, y1))
    if cut[3]:
        pts += [(x1, y0 + nh), (x1 - nw, y0 + nh), (x1 - nw, y0)]
    else:
        pts.append((x1, y0))
    return pts, (x0 + nw, y0 + nh, x1 - nw, y1 - nh)


_BUILDERS = {"rectangle": _outer_rectangle, "l-shape": _outer_l_shape, "orthogonal": _outer_orthogonal}


def _hole(rng, spec, box):
    bx0, by0, bx1, by1 = box
    wall = spec.min_wall
    room_w, room_h = bx1 - bx0 - 2 * wall, by1 - by0 - 2 * wall
    hw = max(wall, int(rng.uniform(*spec.hole_ratio) * room_w))
    hh = max(wall, int(rng.uniform(*spec.hole_ratio) * room_h))
    hx = int(rng.integers(bx0 + wall, bx1 - wall - hw + 1))
    hy = int(rng.integers(by0 + wall, by1 - wall - hh + 1))
    return _rect(hx, hy, hx + hw, hy + hh)


def _assemble(outer, inner, label) -> RingPolygon:
    """Chain the loops with the bridge leaving the midpoint of the top edge.

    The outer loop gets positive signed area and the inner loop negative.
    """
    if signed_area(outer) < 0:
        outer = outer[::-1]
    if signed_area(inner) > 0:
        inner = inner[::-1]
    k = len(outer)
    top = min(
        (i for i in range(k) if outer[i][1] == outer[(i + 1) % k][1]),
        key=lambda i: (outer[i][1], -abs(outer[(i + 1) % k][0] - outer[i][0])),
    )
    a, b = outer[top], outer[(top + 1) % k]
    mid = ((a[0] + b[0]) // 2, a[1])
    # outer chain: starts after the midpoint, ends on it
    outer_chain = [outer[(top + 1 + s) % k] for s in range(k)] + [mid]
    j = min(range(len(inner)), key=lambda i: (inner[i][0] - mid[0]) ** 2 + (inner[i][1] - mid[1]) ** 2)
    inner_chain = inner[j:] + inner[:j]
    verts = np.array(outer_chain + inner_chain, dtype=np.float64)
    return RingPolygon(verts, len(outer_chain), label)


def generate_corpus(spec: SyntheticRingSpec) -> List[RingPolygon]:
    """Deterministic list of valid rings drawn from ``spec``."""
    out = []
    families = ("rectangle", "l-shape", "orthogonal")
    for i in range(spec.count):
        rng = derive_rng(spec.seed, i)
        family = families[int(rng.integers(3))] if spec.shape == "mixed" else spec.shape
        outer, box = _BUILDERS[family](rng, spec)
        inner = _hole(rng, spec, box)
        poly = _assemble(outer, inner, spec.label)
        report = validate(poly)
        if not report.ok:  # pragma: no cover - generator bug guard
            raise AssertionError(f"generated invalid ring {i}: {report.violations}")
        out.append(poly)
    return out


def _runs(idx: np.ndarray, n: int) -> List[np.ndarray]:
    if len(idx) == 0:
        return []
    breaks = np.flatnonzero(np.diff(idx) != 1) + 1
    runs = np.split(idx, breaks)
    if len(runs) > 1 and runs[0][0] == 1 and runs[-1][-1] == n:
        runs = [np.concatenate([runs[-1], runs[0]])] + runs[1:-1]
    return runs


def naive_fragments(poly: RingPolygon, plan: AffinePlan) -> List[np.ndarray]:
    """1-based original indices of each fragment left by :func:`naive_vertex_transform`."""
    q = apply_points(plan, poly.vertices)
    w, h = plan.out_width, plan.out_height
    inside = (q[:, 0] >= 0) & (q[:, 0] <= w) & (q[:, 1] >= 0) & (q[:, 1] <= h)
    return _runs(np.flatnonzero(inside) + 1, poly.n)


def naive_vertex_transform(poly: RingPolygon, plan: AffinePlan) -> List[np.ndarray]:
    """Transform vertices, drop those outside the frame, no repair, no clips.

    Each maximal run of originally-adjacent survivors is returned as its own
    vertex array; a chain with one gap (or none) stays a single piece.
    """
    q = apply_points(plan, poly.vertices)
    return [q[run - 1] for run in naive_fragments(poly, plan)]


def mask_contour_reextract(poly: RingPolygon, plan: AffinePlan) -> List[np.ndarray]:
    """Rasterize, warp, and re-trace: one dense pixel-center sequence per border."""
    mask = rasterize(poly, plan.in_width, plan.in_height)
    warped = warp_mask(mask, plan)
    return [chain.centers() for chain in extract_boundary(warped)]


def orientation(loop) -> int:
    """+1 for positive signed area, -1 for negative, 0 if degenerate."""
    a = signed_area(loop)
    return (a > 0) - (a < 0)
