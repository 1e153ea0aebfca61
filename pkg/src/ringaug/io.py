"""Annotation files and pipeline configuration.

Three JSON formats are supported, all UTF-8:

``native``
    ``{"format": "native", "image": {...}, "annotations": [{"label",
    "coordinates": [x1, y1, ...], "ring_partition": L or null}]}``
``coco-single-chain``
    COCO layout with one image; each annotation's ``segmentation`` holds a
    single flat chain and the optional ``ring_partition`` key.
``labelme``
    LabelMe layout; polygon shapes carry ``ring_partition`` as an extra field.

Rings are never split into COCO hole polygons on disk; the partition key is
the convention.  :func:`coco_multipolygon` converts for export.
"""
from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any, Dict, List, Sequence, Tuple

import numpy as np

from .exceptions import (
    AnnotationError,
    AnnotationFormatError,
    AnnotationParseError,
    ConfigurationError,
    RingAugError,
    UnsupportedFormatError,
)
from .geometry import RingPolygon, split_boundaries
from .transform import TABLE_KINDS, AugmentationSpec

log = logging.getLogger(__name__)

FORMATS = ("native", "coco-single-chain", "labelme")
PARTITION_KEY = "ring_partition"
DEGENERATE_POLICIES = ("skip", "keep")
METHODS = ("repaired", "naive", "contour")


@dataclass(frozen=True)
class ImageRef:
    path: str
    width: int
    height: int


@dataclass
class AnnotationDocument:
    image: ImageRef
    annotations: List[RingPolygon] = field(default_factory=list)
    format: str = "native"

    @property
    def out_of_bounds(self) -> bool:
        """True if any vertex lies outside ``[0, width] x [0, height]``."""
        w, h = self.image.width, self.image.height
        for poly in self.annotations:
            v = poly.vertices
            if len(v) and (v[:, 0].min() < 0 or v[:, 1].min() < 0 or v[:, 0].max() > w or v[:, 1].max() > h):
                return True
        return False


def _num(v, what) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise AnnotationFormatError(f"{what}: expected a number, got {v!r}")
    v = float(v)
    if not math.isfinite(v):
        raise AnnotationFormatError(f"{what}: non-finite coordinate")
    return v


def _int(v, what) -> int:
    if isinstance(v, bool) or not isinstance(v, int):
        raise AnnotationFormatError(f"{what}: expected an integer, got {v!r}")
    return v


def _str(v, what) -> str:
    if not isinstance(v, str):
        raise AnnotationFormatError(f"{what}: expected a string, got {v!r}")
    return v


def _obj(v, what) -> dict:
    if not isinstance(v, dict):
        raise AnnotationFormatError(f"{what}: expected an object")
    return v


def _list(v, what) -> list:
    if not isinstance(v, list):
        raise AnnotationFormatError(f"{what}: expected a list")
    return v


def decode_flat(coords, what="coordinates") -> np.ndarray:
    coords = _list(coords, what)
    if len(coords) % 2:
        raise AnnotationFormatError(f"{what}: odd number of values ({len(coords)})")
    return np.array([_num(c, what) for c in coords], dtype=np.float64).reshape(-1, 2)


def encode_flat(vertices) -> List[float]:
    return [float(c) for c in np.asarray(vertices, dtype=np.float64).ravel()]


def _polygon(verts: np.ndarray, partition, label: str, what: str) -> RingPolygon:
    if partition is not None:
        partition = _int(partition, f"{what}.{PARTITION_KEY}")
        if not 1 <= partition < len(verts):
            raise AnnotationFormatError(f"{what}: partition {partition} out of range for {len(verts)} vertices")
    return RingPolygon(verts, partition, label)


# -- readers ---------------------------------------------------------------


def _read_native(data) -> AnnotationDocument:
    img = _obj(data.get("image"), "image")
    ref = ImageRef(_str(img.get("path"), "image.path"), _int(img.get("width"), "image.width"), _int(img.get("height"), "image.height"))
    polys = []
    for k, ann in enumerate(_list(data.get("annotations"), "annotations")):
        ann = _obj(ann, f"annotations[{k}]")
        verts = decode_flat(ann.get("coordinates"), f"annotations[{k}].coordinates")
        label = _str(ann.get("label", ""), f"annotations[{k}].label")
        polys.append(_polygon(verts, ann.get(PARTITION_KEY), label, f"annotations[{k}]"))
    return AnnotationDocument(ref, polys, "native")


def _read_coco(data) -> AnnotationDocument:
    images = _list(data.get("images"), "images")
    if len(images) != 1:
        raise AnnotationFormatError(f"expected exactly one image, found {len(images)}")
    img = _obj(images[0], "images[0]")
    image_id = img.get("id")
    ref = ImageRef(
        _str(img.get("file_name"), "images[0].file_name"),
        _int(img.get("width"), "images[0].width"),
        _int(img.get("height"), "images[0].height"),
    )
    names = {}
    for k, cat in enumerate(_list(data.get("categories", []), "categories")):
        cat = _obj(cat, f"categories[{k}]")
        names[_int(cat.get("id"), f"categories[{k}].id")] = _str(cat.get("name"), f"categories[{k}].name")
    polys = []
    for k, ann in enumerate(_list(data.get("annotations"), "annotations")):
        what = f"annotations[{k}]"
        ann = _obj(ann, what)
        if ann.get("image_id") != image_id:
            raise AnnotationFormatError(f"{what}: image_id does not match the image")
        seg = _list(ann.get("segmentation"), f"{what}.segmentation")
        if len(seg) != 1:
            raise AnnotationFormatError(f"{what}: expected one single-chain polygon, got {len(seg)} parts")
        verts = decode_flat(seg[0], f"{what}.segmentation[0]")
        cid = _int(ann.get("category_id"), f"{what}.category_id")
        if cid not in names:
            raise AnnotationFormatError(f"{what}: unknown category_id {cid}")
        polys.append(_polygon(verts, ann.get(PARTITION_KEY), names[cid], what))
    return AnnotationDocument(ref, polys, "coco-single-chain")


def _read_labelme(data) -> AnnotationDocument:
    ref = ImageRef(
        _str(data.get("imagePath"), "imagePath"),
        _int(data.get("imageWidth"), "imageWidth"),
        _int(data.get("imageHeight"), "imageHeight"),
    )
    polys = []
    for k, shape in enumerate(_list(data.get("shapes"), "shapes")):
        what = f"shapes[{k}]"
        shape = _obj(shape, what)
        if shape.get("shape_type", "polygon") != "polygon":
            raise AnnotationFormatError(f"{what}: only polygon shapes are supported")
        flat = []
        for j, pt in enumerate(_list(shape.get("points"), f"{what}.points")):
            pt = _list(pt, f"{what}.points[{j}]")
            if len(pt) != 2:
                raise AnnotationFormatError(f"{what}.points[{j}]: expected [x, y]")
            flat.extend(pt)
        verts = decode_flat(flat, f"{what}.points")
        polys.append(_polygon(verts, shape.get(PARTITION_KEY), _str(shape.get("label", ""), f"{what}.label"), what))
    return AnnotationDocument(ref, polys, "labelme")


_READERS = {"native": _read_native, "coco-single-chain": _read_coco, "labelme": _read_labelme}


def detect_format(data) -> str:
    if not isinstance(data, dict):
        raise AnnotationFormatError("top-level JSON value must be an object")
    tag = data.get("format")
    if tag is not None:
        if tag not in FORMATS:
            raise UnsupportedFormatError(f"unsupported format tag {tag!r}")
        return tag
    if "shapes" in data:
        return "labelme"
    if "images" in data and "annotations" in data:
        return "coco-single-chain"
    raise UnsupportedFormatError("cannot recognise the annotation format")


def loads_annotations(text: str, fmt: str | None = None) -> AnnotationDocument:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise AnnotationParseError(f"malformed JSON: {exc.msg} (line {exc.lineno}, column {exc.colno})", exc.lineno, exc.colno) from None
    except RecursionError:
        raise AnnotationParseError("JSON nesting too deep") from None
    found = detect_format(data)
    if fmt is not None and fmt != found:
        if fmt not in FORMATS:
            raise UnsupportedFormatError(f"unsupported format tag {fmt!r}")
        raise AnnotationFormatError(f"expected {fmt} content, found {found}")
    try:
        return _READERS[found](data)
    except AnnotationError:
        raise
    except (RingAugError, KeyError, TypeError, ValueError, IndexError, AttributeError) as exc:
        raise AnnotationFormatError(f"invalid {found} document: {exc}") from None


def read_annotations(path, fmt: str | None = None) -> AnnotationDocument:
    """Parse an annotation file; the format is detected unless given."""
    raw = Path(path).read_bytes()
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise AnnotationParseError(f"not UTF-8: {exc.reason} at byte {exc.start}", None, exc.start) from None
    return loads_annotations(text, fmt)


# -- writers ---------------------------------------------------------------


def _warn_ring_metadata(doc: AnnotationDocument, fmt: str):
    if fmt != "native" and any(p.partition is not None for p in doc.annotations):
        log.warning("%s cannot express rings natively; storing the partition in %r", fmt, PARTITION_KEY)


def _bbox(v: np.ndarray) -> List[float]:
    if len(v) == 0:
        return [0.0, 0.0, 0.0, 0.0]
    x0, y0 = v.min(axis=0)
    x1, y1 = v.max(axis=0)
    return [float(x0), float(y0), float(x1 - x0), float(y1 - y0)]


def _dump_native(doc):
    return {
        "format": "native",
        "image": {"path": doc.image.path, "width": doc.image.width, "height": doc.image.height},
        "annotations": [
            {"label": p.label, "coordinates": encode_flat(p.vertices), PARTITION_KEY: p.partition}
            for p in doc.annotations
        ],
    }


def _dump_coco(doc):
    cats: Dict[str, int] = {}
    for p in doc.annotations:
        cats.setdefault(p.label, len(cats) + 1)
    anns = []
    for k, p in enumerate(doc.annotations, start=1):
        ann = {
            "id": k,
            "image_id": 1,
            "category_id": cats[p.label],
            "segmentation": [encode_flat(p.vertices)],
            "iscrowd": 0,
            "bbox": _bbox(p.vertices),
        }
        if p.partition is not None:
            ann[PARTITION_KEY] = p.partition
        anns.append(ann)
    return {
        "format": "coco-single-chain",
        "images": [{"id": 1, "file_name": doc.image.path, "width": doc.image.width, "height": doc.image.height}],
        "categories": [{"id": i, "name": name} for name, i in cats.items()],
        "annotations": anns,
    }


def _dump_labelme(doc):
    shapes = []
    for p in doc.annotations:
        shape = {
            "label": p.label,
            "points": [[float(x), float(y)] for x, y in p.vertices],
            "group_id": None,
            "shape_type": "polygon",
            "flags": {},
        }
        if p.partition is not None:
            shape[PARTITION_KEY] = p.partition
        shapes.append(shape)
    return {
        "version": "5.2.1",
        "flags": {},
        "shapes": shapes,
        "imagePath": doc.image.path,
        "imageData": None,
        "imageHeight": doc.image.height,
        "imageWidth": doc.image.width,
    }


_DUMPERS = {"native": _dump_native, "coco-single-chain": _dump_coco, "labelme": _dump_labelme}


def dumps_annotations(doc: AnnotationDocument, fmt: str | None = None) -> str:
    fmt = fmt or doc.format
    if fmt not in _DUMPERS:
        raise UnsupportedFormatError(f"unsupported format tag {fmt!r}")
    _warn_ring_metadata(doc, fmt)
    return json.dumps(_DUMPERS[fmt](doc), indent=2, ensure_ascii=False, allow_nan=False) + "\n"


def write_annotations(doc: AnnotationDocument, path, fmt: str | None = None) -> Path:
    """Write ``doc``; coordinates keep full float precision."""
    path = Path(path)
    path.write_text(dumps_annotations(doc, fmt), encoding="utf-8")
    return path


def coco_multipolygon(poly: RingPolygon) -> List[List[float]]:
    """Standard COCO ``segmentation`` value: ``[outer, inner]`` for a ring."""
    if poly.partition is None:
        return [encode_flat(poly.vertices)]
    outer, inner = split_boundaries(poly)
    return [encode_flat(outer), encode_flat(inner)]


# -- pipeline config ---------------------------------------------------------


@dataclass(frozen=True)
class PipelineConfig:
    augmentations: Tuple[AugmentationSpec, ...] = tuple(AugmentationSpec(kind=k) for k in TABLE_KINDS)
    samples_per_image: int = 5
    seed: int = 0
    tol: float = 3.0
    match_tol: float = 3.0
    degenerate: str = "skip"
    format: str = "native"
    method: str = "repaired"

    def __post_init__(self):
        augs = tuple(a if isinstance(a, AugmentationSpec) else AugmentationSpec.from_dict(a) for a in self.augmentations)
        if not augs:
            raise ConfigurationError("at least one augmentation is required")
        object.__setattr__(self, "augmentations", augs)
        if isinstance(self.samples_per_image, bool) or not isinstance(self.samples_per_image, int) or self.samples_per_image < 1:
            raise ConfigurationError("samples_per_image must be an integer >= 1")
        if isinstance(self.seed, bool) or not isinstance(self.seed, int) or not 0 <= self.seed < 2**64:
            raise ConfigurationError("seed must be an unsigned 64-bit integer")
        for name in ("tol", "match_tol"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, (int, float)) or not v > 0:
                raise ConfigurationError(f"{name} must be positive")
        if self.degenerate not in DEGENERATE_POLICIES:
            raise ConfigurationError(f"degenerate must be one of {DEGENERATE_POLICIES}")
        if self.format not in FORMATS:
            raise ConfigurationError(f"format must be one of {FORMATS}")
        if self.method not in METHODS:
            raise ConfigurationError(f"method must be one of {METHODS}")

    @classmethod
    def from_dict(cls, d: Dict[str, Any]) -> "PipelineConfig":
        if not isinstance(d, dict):
            raise ConfigurationError("config must be a JSON object")
        known = {f.name for f in fields(cls)}
        extra = set(d) - known
        if extra:
            raise ConfigurationError(f"unknown config keys: {sorted(extra)}")
        d = dict(d)
        if "augmentations" in d:
            if not isinstance(d["augmentations"], list):
                raise ConfigurationError("augmentations must be a list")
            try:
                d["augmentations"] = tuple(AugmentationSpec.from_dict(a) for a in d["augmentations"])
            except TypeError as exc:
                raise ConfigurationError(f"bad augmentation entry: {exc}") from None
        return cls(**d)

    @classmethod
    def load(cls, path) -> "PipelineConfig":
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f"config is not valid JSON: {exc}") from None
        return cls.from_dict(data)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "augmentations": [a.to_dict() for a in self.augmentations],
            "samples_per_image": self.samples_per_image,
            "seed": self.seed,
            "tol": self.tol,
            "match_tol": self.match_tol,
            "degenerate": self.degenerate,
            "format": self.format,
            "method": self.method,
        }

    def replace(self, **changes) -> "PipelineConfig":
        d = {f.name: getattr(self, f.name) for f in fields(self)}
        d.update({k: v for k, v in changes.items() if v is not None})
        return PipelineConfig(**d)


def iter_annotation_files(root) -> List[Path]:
    """``*.json`` files under ``root`` in sorted order (manifests excluded)."""
    root = Path(root)
    return sorted(p for p in root.rglob("*.json") if p.is_file() and p.name != "manifest.json")


def relpath(path: Path, root: Path) -> str:
    return Path(path).relative_to(root).as_posix()


__all__: Sequence[str] = [
    "AnnotationDocument",
    "FORMATS",
    "ImageRef",
    "PipelineConfig",
    "coco_multipolygon",
    "dumps_annotations",
    "loads_annotations",
    "read_annotations",
    "write_annotations",
]
