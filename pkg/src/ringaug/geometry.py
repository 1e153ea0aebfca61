"""Single-chain ring encoding: vertices, partition index and validation.

A ring-type region (outer loop minus one hole) is stored as one ordered
chain ``p_1 .. p_n``.  The first ``L`` vertices trace the outer boundary and
the remaining ``n - L`` trace the inner one.  Two connector edges keep the
chain cyclic: the bridge ``(L, L+1)`` and the closure ``(n, 1)``.

Indices in the public API are 1-based.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence, Tuple

import numpy as np

from .exceptions import GeometryError, NotARingError

Point2 = Tuple[float, float]


def _as_vertex_array(vertices) -> np.ndarray:
    arr = np.array(vertices, dtype=np.float64)
    if arr.size == 0:
        arr = arr.reshape(0, 2)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise GeometryError(f"vertices must have shape (n, 2), got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise GeometryError("vertices must be finite (no NaN/Inf)")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class RingPolygon:
    """Ordered vertex chain with an optional outer/inner partition.

    The constructor only checks representability (finite coordinates, integer
    partition).  Structural invariants are reported by :func:`validate`, so
    degenerate intermediate results can still be carried around.
    """

    vertices: np.ndarray
    partition: int | None = None
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "vertices", _as_vertex_array(self.vertices))
        if self.partition is not None:
            if isinstance(self.partition, bool) or int(self.partition) != self.partition:
                raise GeometryError(f"partition must be an integer, got {self.partition!r}")
            object.__setattr__(self, "partition", int(self.partition))
        object.__setattr__(self, "label", str(self.label))

    @property
    def n(self) -> int:
        return len(self.vertices)

    @property
    def is_ring(self) -> bool:
        return self.partition is not None

    def __len__(self):
        return self.n

    def __eq__(self, other):
        if not isinstance(other, RingPolygon):
            return NotImplemented
        return (
            self.partition == other.partition
            and self.label == other.label
            and self.vertices.shape == other.vertices.shape
            and bool(np.array_equal(self.vertices, other.vertices))
        )

    __hash__ = None

    def __repr__(self):
        return f"RingPolygon(n={self.n}, partition={self.partition}, label={self.label!r})"

    def vertex(self, i: int) -> Point2:
        """Vertex ``p_i`` (1-based)."""
        if not 1 <= i <= self.n:
            raise GeometryError(f"vertex index {i} out of range 1..{self.n}")
        x, y = self.vertices[i - 1]
        return float(x), float(y)

    def loops(self) -> list[np.ndarray]:
        """Closed loops whose even-odd union is the region.

        A ring contributes its outer and inner boundaries; a simple polygon
        contributes the whole chain.
        """
        if self.partition is None:
            return [self.vertices]
        return [self.vertices[: self.partition], self.vertices[self.partition :]]

    def with_vertices(self, vertices, partition="keep") -> "RingPolygon":
        part = self.partition if partition == "keep" else partition
        return RingPolygon(vertices, part, self.label)


class RingEdges(NamedTuple):
    bridge: Tuple[int, int]
    closure: Tuple[int, int]


def successor(i: int, n: int) -> int:
    """Cyclic successor ``(i mod n) + 1`` on the index set ``1..n``."""
    if n < 1:
        raise GeometryError(f"n must be >= 1, got {n}")
    if not 1 <= i <= n:
        raise GeometryError(f"index {i} out of range 1..{n}")
    return (i % n) + 1


def ring_edges(poly: RingPolygon) -> RingEdges:
    if poly.partition is None:
        raise NotARingError("polygon has no partition; it is not a ring")
    L = poly.partition
    return RingEdges(bridge=(L, L + 1), closure=(poly.n, 1))


def split_boundaries(poly: RingPolygon) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(outer, inner)`` vertex arrays of a ring."""
    if poly.partition is None:
        raise NotARingError("polygon has no partition; it is not a ring")
    L = poly.partition
    if not 1 <= L < poly.n:
        raise GeometryError(f"partition {L} out of range for n={poly.n}")
    return poly.vertices[:L], poly.vertices[L:]


def signed_area(loop) -> float:
    pts = np.asarray(loop, dtype=np.float64)
    if len(pts) < 3:
        return 0.0
    x, y = pts[:, 0], pts[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def _on_segment(px, py, ax, ay, bx, by, eps=1e-9) -> bool:
    cross = (bx - ax) * (py - ay) - (by - ay) * (px - ax)
    scale = max(1.0, abs(bx - ax) + abs(by - ay))
    if abs(cross) > eps * scale:
        return False
    return min(ax, bx) - eps <= px <= max(ax, bx) + eps and min(ay, by) - eps <= py <= max(ay, by) + eps


def point_in_polygon(point: Point2, loop, on_edge: bool = True) -> bool:
    """Ray-casting containment test against a closed loop.

    Points on an edge return ``on_edge``.
    """
    px, py = float(point[0]), float(point[1])
    pts = np.asarray(loop, dtype=np.float64)
    k = len(pts)
    inside = False
    for a in range(k):
        ax, ay = pts[a]
        bx, by = pts[(a + 1) % k]
        if _on_segment(px, py, ax, ay, bx, by):
            return on_edge
        if (ay > py) != (by > py):
            xc = ax + (py - ay) * (bx - ax) / (by - ay)
            if px < xc:
                inside = not inside
    return inside


class Violation(NamedTuple):
    code: str
    message: str
    index: int | None = None


@dataclass(frozen=True)
class ValidationReport:
    violations: Tuple[Violation, ...] = field(default_factory=tuple)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self):
        return self.ok

    def codes(self) -> set[str]:
        return {v.code for v in self.violations}

    def __iter__(self):
        return iter(self.violations)

    def __len__(self):
        return len(self.violations)


def validate(poly: RingPolygon) -> ValidationReport:
    """Check the ring-encoding invariants and list every violation.

    Codes: ``too-few-vertices``, ``degenerate-edge``, ``partition-bounds``,
    ``containment``.
    """
    out: list[Violation] = []
    n = poly.n
    if n < 3:
        out.append(Violation("too-few-vertices", f"need at least 3 vertices, got {n}"))
    v = poly.vertices
    for i in range(n):
        j = (i + 1) % n
        if n > 1 and v[i, 0] == v[j, 0] and v[i, 1] == v[j, 1]:
            out.append(Violation("degenerate-edge", f"zero-length edge ({i + 1}, {j + 1})", i + 1))

    L = poly.partition
    if L is not None:
        if not 3 <= L <= n - 3:
            out.append(
                Violation("partition-bounds", f"partition {L} violates 3 <= L <= n-3 (n={n})", L)
            )
        else:
            outer = v[:L]
            for i in range(L, n):
                if not point_in_polygon(v[i], outer, on_edge=True):
                    out.append(
                        Violation("containment", f"inner vertex {i + 1} lies outside the outer loop", i + 1)
                    )
    return ValidationReport(tuple(out))


def polygon_from_points(points: Iterable[Sequence[float]], partition=None, label="") -> RingPolygon:
    return RingPolygon(np.asarray(list(points), dtype=np.float64), partition, label)
