"""Order-preserving reconnection of surviving vertices into one closed chain."""
from __future__ import annotations

from dataclasses import dataclass
from typing import List, NamedTuple, Sequence, Tuple

import numpy as np

from .exceptions import DegeneratePolygonError, EmptyPolygonError, InconsistencyError
from .geometry import RingPolygon
from .project import ClipVertex, SurvivorSequence


class ChainEntry(NamedTuple):
    """A vertex of the repaired chain: an original survivor or a clip vertex."""

    x: float
    y: float
    index: int | None = None
    edge: int | None = None
    param: float | None = None

    @property
    def is_clip(self) -> bool:
        return self.index is None


@dataclass(frozen=True, eq=False)
class RepairedPolygon:
    """Closed chain; the edge from the last vertex back to the first is implied.

    Stored column-wise: ``xy`` positions, ``index`` (original 1-based index,
    0 for a clip vertex), ``edge`` and ``param`` (source edge and parameter
    of a clip vertex, 0 and NaN for survivors).  ``links`` are the directed
    survivor-to-survivor edges ``(k_t, k_{t+1})``, gap-bridging ones included;
    clip vertices sit inside those links.
    """

    xy: np.ndarray
    index: np.ndarray
    edge: np.ndarray
    param: np.ndarray
    source_n: int
    links: np.ndarray
    partition: int | None = None

    closed = True

    def __post_init__(self):
        for name in ("xy", "index", "edge", "param", "links"):
            getattr(self, name).setflags(write=False)

    def __len__(self):
        return len(self.index)

    @property
    def m(self) -> int:
        return len(self.links)

    @property
    def n_clips(self) -> int:
        return int(np.count_nonzero(self.index == 0))

    @property
    def entries(self) -> Tuple[ChainEntry, ...]:
        out = []
        for (x, y), i, e, t in zip(self.xy.tolist(), self.index.tolist(), self.edge.tolist(), self.param.tolist()):
            out.append(ChainEntry(x, y, i, None, None) if i else ChainEntry(x, y, None, e, t))
        return tuple(out)

    def original_indices(self) -> List[int]:
        return self.index[self.index > 0].tolist()

    def positions(self) -> np.ndarray:
        return self.xy.copy()

    def edges(self) -> List[Tuple[int, int]]:
        """Chain edges as 0-based entry positions."""
        k = len(self.index)
        return [(a, (a + 1) % k) for a in range(k)]

    def to_polygon(self, label: str = "") -> RingPolygon:
        return RingPolygon(self.xy, self.partition, label)


def repair(survivors: SurvivorSequence) -> RepairedPolygon:
    """Reconnect survivors in original order (one directed edge per survivor).

    Raises :class:`EmptyPolygonError` for ``m == 0`` and
    :class:`DegeneratePolygonError` for ``m <= 2``.
    """
    ks, xy, links = _link(survivors)
    m = len(ks)
    edge = np.zeros(m, dtype=np.int64)
    param = np.full(m, np.nan)
    return RepairedPolygon(xy, ks, edge, param, survivors.n, links, _partition(ks, edge, survivors))


def _link(survivors: SurvivorSequence):
    sv = survivors.survivors
    m = len(sv)
    if m == 0:
        raise EmptyPolygonError("no vertices survived augmentation")
    if m <= 2:
        raise DegeneratePolygonError(f"only {m} vertices survived; a polygon needs 3", survivors)
    ks = np.fromiter((v[0] for v in sv), dtype=np.int64, count=m)
    xy = np.fromiter((c for v in sv for c in (v[1], v[2])), dtype=np.float64, count=2 * m).reshape(m, 2)
    # one edge per survivor: k_t -> k_{t+1}, and k_m -> k_1 closes the cycle
    links = np.empty((m, 2), dtype=np.int64)
    links[:, 0] = ks
    links[:-1, 1] = ks[1:]
    links[-1, 1] = ks[0]
    return ks, xy, links


def repair_with_clips(survivors: SurvivorSequence, clips: Sequence[ClipVertex]) -> RepairedPolygon:
    """:func:`repair`, then insert each clip vertex inside its survivor gap.

    Clips in one gap are ordered by source edge (cyclically from the gap
    start) and then by edge parameter.
    """
    if not clips:
        return repair(survivors)
    ks, xy, links = _link(survivors)
    n = survivors.n
    m = len(ks)
    gap_of = {int(k): t for t, k in enumerate(ks)}
    per_gap: List[list] = [[] for _ in range(m)]
    for c in clips:
        a, b = c.between
        t = gap_of.get(a)
        if t is None or ks[(t + 1) % m] != b:
            raise InconsistencyError(f"clip vertex between {c.between} does not fill a survivor gap")
        per_gap[t].append(((c.edge - a) % n, c.edge_param, c))

    rows = []
    for t in range(m):
        rows.append((xy[t, 0], xy[t, 1], int(ks[t]), 0, np.nan))
        for _, _, c in sorted(per_gap[t], key=lambda g: (g[0], g[1])):
            rows.append((c.x, c.y, 0, c.edge, c.edge_param))
    cx, cy, index, edge, param = (np.array(col) for col in zip(*rows))
    index, edge = index.astype(np.int64), edge.astype(np.int64)
    pts = np.column_stack([cx, cy]).astype(np.float64)
    param = param.astype(np.float64)
    shift = _outer_first_shift(index, edge, survivors.partition)
    if shift:
        pts, index, edge, param = (np.roll(a, shift, axis=0) for a in (pts, index, edge, param))
    return RepairedPolygon(pts, index, edge, param, n, links, _partition(index, edge, survivors))


def _sides(index: np.ndarray, edge: np.ndarray, L: int) -> np.ndarray:
    """0 for the outer boundary, 1 for the inner one.

    Clips on the bridge edge are counted with the outer boundary and clips
    on the closure edge with the inner one, so each side stays contiguous.
    """
    return np.where(index > 0, index > L, edge > L).astype(np.int8)


def _outer_first_shift(index, edge, L) -> int:
    """Roll that brings trailing outer clips (from the wrap-around gap) to the front."""
    if L is None or len(index) == 0:
        return 0
    sides = _sides(index, edge, L)
    k = len(sides)
    cut = k
    while cut > 0 and sides[cut - 1] == 0 and index[cut - 1] == 0:
        cut -= 1
    if cut == k or cut == 0:
        return 0
    return k - cut


def _partition(index, edge, survivors: SurvivorSequence) -> int | None:
    L = survivors.partition
    if L is None:
        return None
    sides = _sides(index, edge, L)
    n_outer = int(np.count_nonzero(sides == 0))
    if np.any(sides[:n_outer]) or not np.all(sides[n_outer:]):
        return None
    if n_outer < 3 or len(sides) - n_outer < 3:
        return None
    return n_outer
