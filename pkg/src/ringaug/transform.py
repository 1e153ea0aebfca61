"""Affine augmentation plans: sampling, point mapping, inversion, mask warping.

Coordinates are continuous image coordinates (x right, y down) in which
pixel ``(px, py)`` has its center at ``(px + 0.5, py + 0.5)``.  Rotation and
scaling pivot on the frame center ``(w/2, h/2)``.
"""
from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field, fields
from typing import Any, Dict, Tuple

import numpy as np

from .exceptions import ConfigurationError, DegenerateTransformError
from .raster import BinaryMask

PLAN_KINDS = (
    "identity",
    "rotation",
    "scale",
    "crop",
    "rotation+crop",
    "translation",
    "hflip",
    "vflip",
    "composite",
)
# ``flip`` samples each axis with ``flip_p``; it resolves to one of the plan kinds.
SPEC_KINDS = PLAN_KINDS + ("flip",)

# The six augmentations evaluated by the reference experiments.
TABLE_KINDS = ("rotation", "scale", "crop", "rotation+crop", "translation", "flip")

RNG_VERSION = "pcg64-seedseq-v1"


def _range(value, name) -> Tuple[float, float]:
    try:
        lo, hi = (float(v) for v in value)
    except (TypeError, ValueError):
        raise ConfigurationError(f"{name} must be a (min, max) pair, got {value!r}") from None
    if not (math.isfinite(lo) and math.isfinite(hi)):
        raise ConfigurationError(f"{name} bounds must be finite")
    if lo > hi:
        raise ConfigurationError(f"{name}: min {lo} > max {hi}")
    return lo, hi


@dataclass(frozen=True)
class AugmentationSpec:
    """One augmentation kind and its parameter ranges (defaults: evaluation ranges)."""

    kind: str = "rotation"
    angle: Tuple[float, float] = (-30.0, 30.0)
    scale: Tuple[float, float] = (0.7, 1.3)
    crop_scale: Tuple[float, float] = (0.6, 1.0)
    shift: Tuple[float, float] = (-0.1, 0.1)
    flip_p: float = 0.5

    def __post_init__(self):
        if self.kind not in SPEC_KINDS:
            raise ConfigurationError(f"unknown augmentation kind {self.kind!r}")
        for name in ("angle", "scale", "crop_scale", "shift"):
            object.__setattr__(self, name, _range(getattr(self, name), name))
        if self.scale[0] <= 0:
            raise ConfigurationError("scale factors must be positive")
        if not (0 < self.crop_scale[0] and self.crop_scale[1] <= 1):
            raise ConfigurationError("crop_scale must lie in (0, 1]")
        if not 0.0 <= float(self.flip_p) <= 1.0:
            raise ConfigurationError("flip_p must be a probability")
        object.__setattr__(self, "flip_p", float(self.flip_p))

    @classmethod
    def from_dict(cls, d: Dict[str, Any]) -> "AugmentationSpec":
        known = {f.name for f in fields(cls)}
        extra = set(d) - known
        if extra:
            raise ConfigurationError(f"unknown augmentation keys: {sorted(extra)}")
        return cls(**d)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": self.kind,
            "angle": list(self.angle),
            "scale": list(self.scale),
            "crop_scale": list(self.crop_scale),
            "shift": list(self.shift),
            "flip_p": self.flip_p,
        }


@dataclass(frozen=True, eq=False)
class AffinePlan:
    """Sampled transform from a source frame to an output frame.

    ``matrix`` (2x3) maps source coordinates into the pre-crop frame.  When
    ``crop_window = (x, y, w, h)`` is set, that window of the pre-crop frame
    is then translated to the origin and resized to the output frame.
    """

    matrix: np.ndarray
    out_width: int
    out_height: int
    kind: str = "identity"
    crop_window: Tuple[float, float, float, float] | None = None
    in_width: int | None = None
    in_height: int | None = None
    params: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        m = np.array(self.matrix, dtype=np.float64)
        if m.shape != (2, 3):
            raise ValueError(f"matrix must be 2x3, got {m.shape}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        if self.kind not in PLAN_KINDS:
            raise ValueError(f"unknown plan kind {self.kind!r}")
        if self.in_width is None:
            object.__setattr__(self, "in_width", self.out_width)
        if self.in_height is None:
            object.__setattr__(self, "in_height", self.out_height)
        if self.crop_window is not None:
            x, y, w, h = (float(v) for v in self.crop_window)
            if w <= 0 or h <= 0:
                raise ValueError("crop window must have positive size")
            eps = 1e-9
            if x < -eps or y < -eps or x + w > self.in_width + eps or y + h > self.in_height + eps:
                raise ValueError("crop window must lie within the frame")
            object.__setattr__(self, "crop_window", (x, y, w, h))

    @property
    def determinant(self) -> float:
        return float(np.linalg.det(self.full_matrix()[:2, :2]))

    def full_matrix(self) -> np.ndarray:
        """3x3 homogeneous matrix of the whole mapping, crop included."""
        a = np.vstack([self.matrix, [0.0, 0.0, 1.0]])
        if self.crop_window is None:
            return a
        x, y, w, h = self.crop_window
        sx, sy = self.out_width / w, self.out_height / h
        crop = np.array([[sx, 0.0, -x * sx], [0.0, sy, -y * sy], [0.0, 0.0, 1.0]])
        return crop @ a

    def __eq__(self, other):
        if not isinstance(other, AffinePlan):
            return NotImplemented
        return (
            np.array_equal(self.matrix, other.matrix)
            and (self.out_width, self.out_height, self.kind, self.crop_window)
            == (other.out_width, other.out_height, other.kind, other.crop_window)
            and (self.in_width, self.in_height) == (other.in_width, other.in_height)
            and self.params == other.params
        )

    __hash__ = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": self.kind,
            "matrix": [[float(v) for v in row] for row in self.matrix],
            "crop_window": list(self.crop_window) if self.crop_window else None,
            "in_size": [self.in_width, self.in_height],
            "out_size": [self.out_width, self.out_height],
            "params": self.params,
        }

    @classmethod
    def from_dict(cls, d: Dict[str, Any]) -> "AffinePlan":
        cw = d.get("crop_window")
        return cls(
            matrix=np.asarray(d["matrix"], dtype=np.float64),
            out_width=int(d["out_size"][0]),
            out_height=int(d["out_size"][1]),
            kind=d.get("kind", "composite"),
            crop_window=tuple(cw) if cw else None,
            in_width=int(d["in_size"][0]),
            in_height=int(d["in_size"][1]),
            params=dict(d.get("params", {})),
        )


def identity_plan(width: int, height: int) -> AffinePlan:
    return AffinePlan(np.eye(2, 3), width, height, "identity")


def _about_center(linear: np.ndarray, width: int, height: int) -> np.ndarray:
    c = np.array([width / 2.0, height / 2.0])
    return np.hstack([linear, (c - linear @ c)[:, None]])


def rotation_matrix(angle_deg: float, width: int, height: int) -> np.ndarray:
    """Rotate by ``angle_deg`` about the frame center; positive angles turn
    +x towards +y (clockwise on screen)."""
    t = math.radians(angle_deg)
    c, s = math.cos(t), math.sin(t)
    return _about_center(np.array([[c, -s], [s, c]]), width, height)


def scale_matrix(factor: float, width: int, height: int) -> np.ndarray:
    return _about_center(np.eye(2) * factor, width, height)


def flip_matrix(horizontal: bool, vertical: bool, width: int, height: int) -> np.ndarray:
    return _about_center(np.diag([-1.0 if horizontal else 1.0, -1.0 if vertical else 1.0]), width, height)


def translation_matrix(dx: float, dy: float) -> np.ndarray:
    return np.array([[1.0, 0.0, dx], [0.0, 1.0, dy]])


def _compose(*mats: np.ndarray) -> np.ndarray:
    """``_compose(A, B)`` applies A first, then B."""
    out = np.eye(3)
    for m in mats:
        out = np.vstack([m, [0.0, 0.0, 1.0]]) @ out
    return out[:2]


def stable_key(text: str) -> int:
    """64-bit key derived from a string, stable across processes."""
    return int.from_bytes(hashlib.blake2b(text.encode("utf-8"), digest_size=8).digest(), "little")


def derive_rng(master_seed: int, *keys: int) -> np.random.Generator:
    """Independent PCG64 stream for ``(master_seed, *keys)``.

    Streams come from ``SeedSequence(master_seed, spawn_key=keys)``, so the
    same key path always yields the same stream regardless of scheduling.
    """
    master_seed = int(master_seed)
    if master_seed < 0:
        raise ConfigurationError("seed must be non-negative")
    ss = np.random.SeedSequence(master_seed, spawn_key=tuple(int(k) for k in keys))
    return np.random.Generator(np.random.PCG64(ss))


def _as_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return derive_rng(seed)


def _sample_crop(rng, spec, width, height):
    s = float(rng.uniform(*spec.crop_scale))
    w, h = s * width, s * height
    x = float(rng.uniform(0.0, width - w))
    y = float(rng.uniform(0.0, height - h))
    return (x, y, w, h), s


def sample(spec: AugmentationSpec, seed, width: int, height: int) -> AffinePlan:
    """Draw a plan for a ``width x height`` frame from ``spec``.

    ``seed`` is a non-negative integer or a ``numpy.random.Generator``;
    equal seeds give identical plans.
    """
    if width < 1 or height < 1:
        raise ConfigurationError("frame size must be positive")
    rng = _as_rng(seed)
    kind = spec.kind
    crop = None
    params: Dict[str, Any] = {}

    if kind == "identity":
        m = np.eye(2, 3)
    elif kind == "rotation":
        a = float(rng.uniform(*spec.angle))
        m, params = rotation_matrix(a, width, height), {"angle": a}
    elif kind == "scale":
        f = float(rng.uniform(*spec.scale))
        m, params = scale_matrix(f, width, height), {"scale": f}
    elif kind == "crop":
        crop, s = _sample_crop(rng, spec, width, height)
        m, params = np.eye(2, 3), {"crop_scale": s}
    elif kind == "rotation+crop":
        a = float(rng.uniform(*spec.angle))
        crop, s = _sample_crop(rng, spec, width, height)
        m, params = rotation_matrix(a, width, height), {"angle": a, "crop_scale": s}
    elif kind == "translation":
        rx, ry = (float(v) for v in rng.uniform(*spec.shift, size=2))
        m, params = translation_matrix(rx * width, ry * height), {"shift": [rx, ry]}
    elif kind in ("flip", "hflip", "vflip"):
        if kind == "flip":
            h_flip, v_flip = (bool(v) for v in rng.random(2) < spec.flip_p)
        else:
            h_flip, v_flip = kind == "hflip", kind == "vflip"
        m = flip_matrix(h_flip, v_flip, width, height)
        params = {"hflip": h_flip, "vflip": v_flip}
        kind = {(False, False): "identity", (True, False): "hflip", (False, True): "vflip"}.get(
            (h_flip, v_flip), "composite"
        )
    else:  # composite
        a = float(rng.uniform(*spec.angle))
        f = float(rng.uniform(*spec.scale))
        rx, ry = (float(v) for v in rng.uniform(*spec.shift, size=2))
        h_flip, v_flip = (bool(v) for v in rng.random(2) < spec.flip_p)
        crop, s = _sample_crop(rng, spec, width, height)
        m = _compose(
            flip_matrix(h_flip, v_flip, width, height),
            rotation_matrix(a, width, height),
            scale_matrix(f, width, height),
            translation_matrix(rx * width, ry * height),
        )
        params = {"angle": a, "scale": f, "shift": [rx, ry], "hflip": h_flip, "vflip": v_flip, "crop_scale": s}

    return AffinePlan(m, width, height, kind, crop, width, height, params)


def apply_points(plan: AffinePlan, pts) -> np.ndarray:
    pts = np.asarray(pts, dtype=np.float64).reshape(-1, 2)
    full = plan.full_matrix()
    return pts @ full[:2, :2].T + full[:2, 2]


def apply_point(plan: AffinePlan, p) -> Tuple[float, float]:
    x, y = apply_points(plan, [p])[0]
    return float(x), float(y)


def invert(plan: AffinePlan) -> AffinePlan:
    """Plan mapping the output frame back onto the source frame."""
    full = plan.full_matrix()
    det = float(np.linalg.det(full[:2, :2]))
    if not math.isfinite(det) or abs(det) < 1e-12:
        raise DegenerateTransformError(f"matrix is singular (det={det})")
    inv = np.linalg.inv(full)
    return AffinePlan(
        inv[:2],
        out_width=plan.in_width,
        out_height=plan.in_height,
        kind="identity" if plan.kind == "identity" else "composite",
        in_width=plan.out_width,
        in_height=plan.out_height,
    )


def warp_mask(mask: BinaryMask, plan: AffinePlan) -> BinaryMask:
    """Nearest-neighbour inverse-mapped warp of ``mask`` into the output frame.

    Output pixel ``(u, v)`` copies the source pixel containing the
    pre-image of its center ``(u + 0.5, v + 0.5)``; pre-images outside the
    source frame read as background.
    """
    inv = invert(plan).full_matrix()
    ow, oh = plan.out_width, plan.out_height
    out = np.zeros((oh, ow), dtype=bool)
    src = mask.bits
    rows = np.flatnonzero(src.any(axis=1))
    if rows.size == 0:
        return BinaryMask(out)
    cols = np.flatnonzero(src.any(axis=0))

    # Only output pixels whose center maps into the source bbox can be set.
    x0, x1, y0, y1 = cols[0], cols[-1] + 1, rows[0], rows[-1] + 1
    corners = np.array([[x0, y0], [x1, y0], [x0, y1], [x1, y1]], dtype=np.float64)
    dst = apply_points(plan, corners)
    u0 = max(0, int(np.floor(dst[:, 0].min())) - 1)
    u1 = min(ow, int(np.ceil(dst[:, 0].max())) + 1)
    v0 = max(0, int(np.floor(dst[:, 1].min())) - 1)
    v1 = min(oh, int(np.ceil(dst[:, 1].max())) + 1)
    if u0 >= u1 or v0 >= v1:
        return BinaryMask(out)

    uc = np.arange(u0, u1, dtype=np.float64) + 0.5
    vc = np.arange(v0, v1, dtype=np.float64) + 0.5
    # one background pixel of padding absorbs every out-of-frame pre-image
    padded = np.pad(src, 1).ravel()
    stride = mask.width + 2
    sx = inv[0, 0] * uc[None, :] + (inv[0, 1] * vc + inv[0, 2] + 1.0)[:, None]
    sy = inv[1, 0] * uc[None, :] + (inv[1, 1] * vc + inv[1, 2] + 1.0)[:, None]
    np.floor(sx, out=sx)
    np.floor(sy, out=sy)
    np.clip(sx, 0, mask.width + 1, out=sx)
    np.clip(sy, 0, mask.height + 1, out=sy)
    sy *= stride
    sy += sx
    vals = padded[sy.astype(np.intp)]
    out[v0:v1, u0:u1] = vals
    return BinaryMask(out)
