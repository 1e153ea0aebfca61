import numpy as np
from hypothesis import given, strategies as st

from ringaug.baselines import SyntheticRingSpec, generate_corpus
from ringaug.metrics import cap_order
from ringaug.pipeline import augment_polygon
from ringaug.raster import rasterize, topology
from ringaug.transform import AffinePlan, AugmentationSpec, identity_plan, sample, translation_matrix

CORPUS = generate_corpus(SyntheticRingSpec(count=16, shape="mixed", seed=8))
KINDS = ["rotation", "scale", "crop", "rotation+crop", "translation", "flip"]


def test_identity_round_trip():
    for p in CORPUS:
        r = augment_polygon(p, identity_plan(512, 512))
        assert r.ok and r.repaired.original_indices() == list(range(1, p.n + 1))
        assert r.repaired.n_clips == 0 and r.polygon().partition == p.partition


def test_status_empty():
    r = augment_polygon(CORPUS[0], AffinePlan(translation_matrix(5000, 0), 512, 512, "translation"))
    assert r.status == "empty" and r.polygon() is None


@given(st.integers(0, 2**32 - 1), st.sampled_from(KINDS))
def test_closure_and_topology(seed, kind):
    p = CORPUS[seed % len(CORPUS)]
    plan = sample(AugmentationSpec(kind=kind), seed, 512, 512)
    r = augment_polygon(p, plan, keep_mask=True)
    if not r.ok:
        assert r.status in ("empty", "degenerate")
        return
    assert cap_order(p.n, r.repaired.original_indices()) == 1.0
    ks = r.survivors.indices()
    # a clip vertex lies on the frame border
    for e in r.repaired.entries:
        if e.index is None:
            assert min(abs(e.x), abs(e.x - 512), abs(e.y), abs(e.y - 512)) < 1e-6
    if ks == list(range(1, p.n + 1)) and r.repaired.partition is not None and r.warped is not None:
        assert topology(rasterize(r.polygon(), 512, 512)) == (1, 1)
