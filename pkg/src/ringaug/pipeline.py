"""Rasterize -> warp -> project -> clip -> repair, for one polygon and plan."""
from __future__ import annotations

from dataclasses import dataclass
from typing import List

from .exceptions import DegeneratePolygonError, EmptyPolygonError
from .geometry import RingPolygon
from .project import (
    DEFAULT_TOL,
    ClipVertex,
    SurvivorSequence,
    assign_gaps,
    clip_intersections,
    project_vertices,
)
from .raster import BinaryMask, rasterize
from .repair import RepairedPolygon, repair_with_clips
from .transform import AffinePlan, warp_mask

OK, EMPTY, DEGENERATE = "ok", "empty", "degenerate"


@dataclass(frozen=True, eq=False)
class AugmentResult:
    plan: AffinePlan
    survivors: SurvivorSequence
    clips: tuple
    repaired: RepairedPolygon | None
    status: str
    warped: BinaryMask | None = None
    label: str = ""

    @property
    def ok(self) -> bool:
        return self.status == OK

    def polygon(self) -> RingPolygon | None:
        """Repaired chain as a polygon carrying the source label."""
        if self.repaired is None:
            return None
        return self.repaired.to_polygon(self.label)


def augment_polygon(
    poly: RingPolygon,
    plan: AffinePlan,
    tol: float = DEFAULT_TOL,
    clips: bool = True,
    keep_mask: bool = False,
) -> AugmentResult:
    """Run the order-preserving augmentation on one polygon.

    ``status`` is ``"ok"``, ``"empty"`` (nothing survived) or
    ``"degenerate"`` (one or two survivors); only ``ok`` carries a chain.
    """
    mask = rasterize(poly, plan.in_width, plan.in_height)
    warped = warp_mask(mask, plan)
    survivors = project_vertices(poly, plan, warped, tol)
    placed: List[ClipVertex] = []
    if clips:
        placed = assign_gaps(clip_intersections(poly, plan), survivors)
    repaired, status = None, OK
    try:
        repaired = repair_with_clips(survivors, placed)
    except EmptyPolygonError:
        status = EMPTY
    except DegeneratePolygonError:
        status = DEGENERATE
    return AugmentResult(
        plan, survivors, tuple(placed), repaired, status, warped if keep_mask else None, poly.label
    )
