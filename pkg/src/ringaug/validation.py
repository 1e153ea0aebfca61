"""Input checking helpers in the spirit of ``sklearn.utils.validation``."""
from __future__ import annotations

import numbers

import numpy as np

from .exceptions import GeometryError
from .geometry import RingPolygon, validate


def check_polygon(poly, strict: bool = False) -> RingPolygon:
    """Coerce ``poly`` to a :class:`RingPolygon`.

    Accepts a polygon or an ``(n, 2)`` array-like (read as a simple
    polygon).  With ``strict=True`` any invariant violation raises.
    """
    if not isinstance(poly, RingPolygon):
        poly = RingPolygon(np.asarray(poly, dtype=np.float64))
    if strict:
        report = validate(poly)
        if not report.ok:
            msgs = "; ".join(v.message for v in report.violations)
            raise GeometryError(f"invalid polygon: {msgs}")
    return poly


def check_polygons(X, strict: bool = False) -> list[RingPolygon]:
    if isinstance(X, RingPolygon):
        raise TypeError("expected a sequence of polygons, got a single RingPolygon")
    try:
        items = list(X)
    except TypeError:
        raise TypeError(f"expected a sequence of polygons, got {type(X).__name__}") from None
    return [check_polygon(p, strict=strict) for p in items]


def check_frame_size(width, height) -> tuple[int, int]:
    for name, v in (("width", width), ("height", height)):
        if not isinstance(v, numbers.Integral) or isinstance(v, bool) or v < 1:
            raise ValueError(f"{name} must be a positive integer, got {v!r}")
    return int(width), int(height)


def check_tolerance(tol, name: str = "tol") -> float:
    if not isinstance(tol, numbers.Real) or isinstance(tol, bool) or not np.isfinite(tol) or tol <= 0:
        raise ValueError(f"{name} must be a positive finite number, got {tol!r}")
    return float(tol)


def check_seed(seed) -> int:
    if seed is None:
        return 0
    if not isinstance(seed, numbers.Integral) or isinstance(seed, bool) or not 0 <= seed < 2**64:
        raise ValueError(f"random_state must be an unsigned 64-bit integer, got {seed!r}")
    return int(seed)
