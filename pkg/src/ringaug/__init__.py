"""Topology-preserving geometric augmentation for ring-type polygon annotations."""
from .geometry import RingPolygon, ValidationReport, split_boundaries, successor, validate
from .metrics import CapReport, cap_order, cap_report, cap_strict, match_indices, mean_cap
from .pipeline import AugmentResult, augment_polygon
from .raster import BinaryMask, BoundaryChain, extract_boundary, rasterize, topology
from .repair import RepairedPolygon, repair, repair_with_clips
from .transform import AffinePlan, AugmentationSpec, apply_point, invert, sample, warp_mask

__version__ = "0.1.0"

__all__ = [
    "AffinePlan",
    "AugmentResult",
    "AugmentationSpec",
    "BinaryMask",
    "BoundaryChain",
    "CapReport",
    "RepairedPolygon",
    "RingAugmenter",
    "RingPolygon",
    "ValidationReport",
    "apply_point",
    "augment_polygon",
    "cap_order",
    "cap_report",
    "cap_strict",
    "extract_boundary",
    "invert",
    "match_indices",
    "mean_cap",
    "rasterize",
    "repair",
    "repair_with_clips",
    "sample",
    "split_boundaries",
    "successor",
    "topology",
    "validate",
    "warp_mask",
]


def __getattr__(name):
    # the estimator pulls in scikit-learn; import it lazily
    if name == "RingAugmenter":
        from .estimator import RingAugmenter

        return RingAugmenter
    raise AttributeError(name)
