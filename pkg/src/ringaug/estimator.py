"""scikit-learn style front end for the augmentation pipeline."""
from __future__ import annotations

from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .metrics import cap_report, mean_cap
from .pipeline import augment_polygon
from .transform import AugmentationSpec, derive_rng, sample
from .validation import check_frame_size, check_polygons, check_seed, check_tolerance


class RingAugmenter(TransformerMixin, BaseEstimator):
    """Augment ring polygons and repair their cyclic connectivity.

    ``transform(X)`` returns one :class:`~ringaug.pipeline.AugmentResult` per
    polygon.  Polygon ``i`` of call ``sample_index`` draws its plan from the
    stream ``(random_state, sample_index, i)``, so results do not depend on
    batching or on how many times the estimator was used before.

    Parameters
    ----------
    kind : str
        Augmentation kind, e.g. ``"rotation"`` or ``"rotation+crop"``.
    width, height : int
        Frame size the polygons live in.
    tol : float
        Snap tolerance in pixels for projecting vertices onto the mask.
    random_state : int or None
        Master seed.
    sample_index : int
        Extra key for drawing several independent augmentations.
    ranges : dict or None
        Overrides for the parameter ranges (``angle``, ``scale``, ...).
    clips : bool
        Insert frame-intersection vertices into the repaired chain.
    """

    def __init__(
        self,
        kind="rotation",
        width=512,
        height=512,
        tol=3.0,
        random_state=None,
        sample_index=0,
        ranges=None,
        clips=True,
    ):
        self.kind = kind
        self.width = width
        self.height = height
        self.tol = tol
        self.random_state = random_state
        self.sample_index = sample_index
        self.ranges = ranges
        self.clips = clips

    def fit(self, X, y=None):
        polys = check_polygons(X)
        check_frame_size(self.width, self.height)
        check_tolerance(self.tol)
        self.seed_ = check_seed(self.random_state)
        self.spec_ = AugmentationSpec(kind=self.kind, **(self.ranges or {}))
        self.n_polygons_ = len(polys)
        return self

    def plans(self, X):
        """The plans :meth:`transform` would use for ``X``."""
        check_is_fitted(self, "spec_")
        polys = check_polygons(X)
        return [
            sample(self.spec_, derive_rng(self.seed_, self.sample_index, i), self.width, self.height)
            for i in range(len(polys))
        ]

    def transform(self, X):
        check_is_fitted(self, "spec_")
        polys = check_polygons(X)
        plans = self.plans(polys)
        return [augment_polygon(p, plan, self.tol, clips=self.clips) for p, plan in zip(polys, plans)]

    def score(self, X, y=None):
        """Mean order-relaxed CAP of the repaired outputs (skipping empty ones)."""
        results = self.transform(X)
        reports = [
            cap_report(r.repaired.source_n, [r.repaired.original_indices()])
            for r in results
            if r.ok
        ]
        return mean_cap(reports, "cap_order")
