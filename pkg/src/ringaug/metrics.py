"""Cyclic Adjacency Preservation (CAP) and index matching for scoring.

Two variants are computed for every instance:

* ``cap_strict`` counts consecutive pairs ``(k_t, k_{t+1})`` (cyclically)
  for which ``k_{t+1}`` is the original successor ``(k_t mod n) + 1``.
* ``cap_order`` replaces the original successor by the next *surviving*
  index, so dropping vertices costs nothing while reordering does.

An output made of several disconnected parts is scored part by part: each
part closes on itself, and the next surviving index is looked up over the
union of all parts.  A fragmented chain therefore loses one pair per break.
"""
from __future__ import annotations

import bisect
import csv
import io
import json
from dataclasses import asdict, dataclass
from typing import Iterable, List, Sequence, Tuple

import numpy as np

from .exceptions import InvalidSequenceError, UndefinedMetricError
from .geometry import RingPolygon
from .transform import AffinePlan, apply_points

DEFAULT_MATCH_TOL = 3.0


@dataclass(frozen=True)
class CapReport:
    cap_strict: float
    cap_order: float
    n: int
    m: int
    unmatched_new_vertices: int = 0
    parts: int = 1
    label: str = ""
    source: str = ""

    def to_dict(self):
        return asdict(self)


def _check(n: int, parts: Sequence[Sequence[int]]) -> List[List[int]]:
    if n < 1:
        raise InvalidSequenceError(f"n must be >= 1, got {n}")
    clean = [list(map(int, p)) for p in parts if len(p)]
    if not clean:
        raise UndefinedMetricError("CAP is undefined for an empty sequence")
    for p in clean:
        for k in p:
            if not 1 <= k <= n:
                raise InvalidSequenceError(f"index {k} outside 1..{n}")
    return clean


def _strict(n: int, parts: List[List[int]]) -> float:
    hits = total = 0
    for p in parts:
        m = len(p)
        for t in range(m):
            hits += p[(t + 1) % m] == (p[t] % n) + 1
        total += m
    return hits / total


def _order(n: int, parts: List[List[int]]) -> float:
    flat = [k for p in parts for k in p]
    if len(set(flat)) != len(flat):
        raise InvalidSequenceError("cap_order needs distinct indices")
    alive = sorted(flat)
    hits = 0
    for p in parts:
        m = len(p)
        for t in range(m):
            pos = bisect.bisect_right(alive, p[t])
            nxt = alive[pos] if pos < len(alive) else alive[0]
            hits += p[(t + 1) % m] == nxt
    return hits / len(flat)


def cap_strict(n: int, seq: Sequence[int]) -> float:
    """Fraction of cyclic pairs that keep the original successor relation."""
    return _strict(n, _check(n, [seq]))


def cap_order(n: int, seq: Sequence[int]) -> float:
    """Fraction of cyclic pairs whose second index is the next surviving one."""
    return _order(n, _check(n, [seq]))


def cap_report(
    n: int,
    parts: Sequence[Sequence[int]],
    unmatched: int = 0,
    label: str = "",
    source: str = "",
) -> CapReport:
    """Both CAP variants for a possibly multi-part output."""
    clean = _check(n, parts)
    return CapReport(
        cap_strict=_strict(n, clean),
        cap_order=_order(n, clean),
        n=n,
        m=sum(len(p) for p in clean),
        unmatched_new_vertices=int(unmatched),
        parts=len(clean),
        label=label,
        source=source,
    )


def mean_cap(reports: Iterable, field: str = "cap_order") -> float:
    """Arithmetic mean of ``field`` (reports or plain numbers)."""
    vals = [float(r) if isinstance(r, (int, float)) else float(getattr(r, field)) for r in reports]
    if not vals:
        raise UndefinedMetricError("mean CAP of an empty list is undefined")
    return float(np.mean(vals))


def match_parts(
    original: RingPolygon,
    plan: AffinePlan,
    parts: Sequence,
    tol: float = DEFAULT_MATCH_TOL,
) -> Tuple[List[List[int]], int]:
    """Recover original indices for unindexed output vertices.

    Greedy one-to-one nearest-neighbour matching between every output vertex
    (over all parts) and the transformed originals, shortest distance first,
    accepting pairs within ``tol``.  Returns the matched original indices per
    part in traversal order, and the number of unmatched output vertices.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    arrays = [np.asarray(p, dtype=np.float64).reshape(-1, 2) for p in parts]
    sizes = [len(a) for a in arrays]
    total = sum(sizes)
    if total == 0 or original.n == 0:
        return [[] for _ in arrays], total
    aug = np.vstack(arrays)
    target = apply_points(plan, original.vertices)
    d = np.hypot(aug[:, None, 0] - target[None, :, 0], aug[:, None, 1] - target[None, :, 1])
    ai, oi = np.nonzero(d <= tol)
    order = np.lexsort((oi, ai, d[ai, oi]))
    taken_a = np.zeros(total, dtype=bool)
    taken_o = np.zeros(original.n, dtype=bool)
    assigned = np.zeros(total, dtype=np.int64)
    for k in order:
        a, o = ai[k], oi[k]
        if taken_a[a] or taken_o[o]:
            continue
        taken_a[a] = taken_o[o] = True
        assigned[a] = o + 1
    out, start = [], 0
    for size in sizes:
        seg = assigned[start : start + size]
        out.append([int(v) for v in seg if v > 0])
        start += size
    return out, int(total - taken_a.sum())


def match_indices(
    original: RingPolygon,
    plan: AffinePlan,
    augmented,
    tol: float = DEFAULT_MATCH_TOL,
) -> Tuple[List[int], int]:
    """Single-sequence form of :func:`match_parts`."""
    seqs, unmatched = match_parts(original, plan, [augmented], tol)
    return seqs[0], unmatched


def score_parts(
    original: RingPolygon,
    plan: AffinePlan,
    parts: Sequence,
    tol: float = DEFAULT_MATCH_TOL,
    source: str = "",
) -> CapReport | None:
    """Match and score an unindexed output; ``None`` when nothing matched."""
    seqs, unmatched = match_parts(original, plan, parts, tol)
    if not any(seqs):
        return None
    return cap_report(original.n, seqs, unmatched, label=original.label, source=source)


REPORT_FIELDS = ("source", "label", "n", "m", "parts", "cap_strict", "cap_order", "unmatched_new_vertices")


def reports_to_csv(reports: Sequence[CapReport]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(REPORT_FIELDS)
    for r in reports:
        w.writerow([getattr(r, f) for f in REPORT_FIELDS])
    return buf.getvalue()


def summarize(reports: Sequence[CapReport]) -> dict:
    """Overall and per-label means of both CAP variants."""
    out = {"count": len(reports), "overall": None, "per_class": {}}
    if not reports:
        return out
    out["overall"] = {
        "cap_strict": mean_cap(reports, "cap_strict"),
        "cap_order": mean_cap(reports, "cap_order"),
    }
    for label in sorted({r.label for r in reports}):
        grp = [r for r in reports if r.label == label]
        out["per_class"][label] = {
            "count": len(grp),
            "cap_strict": mean_cap(grp, "cap_strict"),
            "cap_order": mean_cap(grp, "cap_order"),
        }
    return out


def reports_to_json(reports: Sequence[CapReport]) -> str:
    return json.dumps(
        {"summary": summarize(reports), "instances": [r.to_dict() for r in reports]},
        indent=2,
        sort_keys=True,
    )
