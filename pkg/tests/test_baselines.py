import numpy as np
import pytest

from ringaug.baselines import (
    SyntheticRingSpec,
    generate_corpus,
    mask_contour_reextract,
    naive_fragments,
    naive_vertex_transform,
    orientation,
)
from ringaug.exceptions import ConfigurationError
from ringaug.geometry import RingPolygon, validate
from ringaug.metrics import match_parts, score_parts
from ringaug.pipeline import augment_polygon
from ringaug.raster import rasterize, topology
from ringaug.transform import AffinePlan, AugmentationSpec, derive_rng, identity_plan, sample, translation_matrix

from conftest import square_ring


def test_empty_and_deterministic():
    assert generate_corpus(SyntheticRingSpec(count=0)) == []
    a = generate_corpus(SyntheticRingSpec(count=15, shape="mixed", seed=9))
    b = generate_corpus(SyntheticRingSpec(count=15, shape="mixed", seed=9))
    assert a == b
    c = generate_corpus(SyntheticRingSpec(count=15, shape="mixed", seed=10))
    assert a != c


@pytest.mark.parametrize("shape", ["rectangle", "l-shape", "orthogonal"])
def test_families_validate_with_ring_topology(shape):
    count = 200 if shape == "rectangle" else 40
    for p in generate_corpus(SyntheticRingSpec(count=count, shape=shape, seed=1)):
        assert validate(p).ok
        assert topology(rasterize(p, 512, 512)) == (1, 1)
        assert orientation(p.vertices[: p.partition]) == 1
        assert orientation(p.vertices[p.partition :]) == -1


def test_bridge_leaves_top_midpoint():
    for p in generate_corpus(SyntheticRingSpec(count=20, shape="mixed", seed=2)):
        outer = p.vertices[: p.partition]
        mid = p.vertices[p.partition - 1]
        assert mid[1] == outer[:, 1].min()


@pytest.mark.parametrize(
    "bad",
    [{"hole_ratio": (0.5, 1.0)}, {"shape": "circle"}, {"count": -1}, {"width": 10}, {"bridge": "left"}],
)
def test_infeasible_specs(bad):
    with pytest.raises(ConfigurationError):
        SyntheticRingSpec(**bad)


def test_naive_in_frame_is_exact():
    ring = square_ring()
    plan = sample(AugmentationSpec(kind="rotation", angle=(10, 10)), 0, 64, 64)
    (part,) = naive_vertex_transform(ring, plan)
    q = ring.vertices @ plan.matrix[:, :2].T + plan.matrix[:, 2]
    assert np.array_equal(part, q)


def test_naive_crop_through_bridge_breaks_strict_cap():
    ring = square_ring()
    # bridge is (40, 10) -> (20, 20); the window drops both of its ends
    plan = AffinePlan(np.eye(2, 3), 64, 64, "crop", crop_window=(0, 21, 64, 43))
    frags = naive_fragments(ring, plan)
    assert [f.tolist() for f in frags] == [[2, 3], [7, 8]]
    rep = score_parts(ring, plan, naive_vertex_transform(ring, plan))
    assert rep.parts == 2
    assert rep.cap_strict == 0.5 and rep.cap_order == 0.5


def test_naive_all_out():
    plan = AffinePlan(translation_matrix(500, 0), 64, 64, "translation")
    assert naive_vertex_transform(square_ring(), plan) == []


def test_contour_identity_ring_two_sequences():
    seqs = mask_contour_reextract(square_ring(), identity_plan(64, 64))
    assert len(seqs) == 2
    assert [len(s) for s in seqs] == [116, 40]


def test_contour_coarse_square_dense():
    sq = RingPolygon([(4, 4), (4, 36), (36, 36), (36, 4)])
    (seq,) = mask_contour_reextract(sq, identity_plan(48, 48))
    assert len(seq) == 4 * 31
    _, unmatched = match_parts(sq, identity_plan(48, 48), [seq])
    assert unmatched > sq.n


def test_contour_out_of_frame():
    plan = AffinePlan(translation_matrix(500, 0), 64, 64, "translation")
    assert mask_contour_reextract(square_ring(), plan) == []


def test_rotation_suite_ordering():
    corpus = generate_corpus(SyntheticRingSpec(count=40, shape="mixed", seed=5))
    spec = AugmentationSpec(kind="rotation")
    rep, nai, con = [], [], []
    for i, p in enumerate(corpus):
        for s in range(3):
            plan = sample(spec, derive_rng(5, i, s), 512, 512)
            r = augment_polygon(p, plan)
            rep.append(score_parts(p, plan, [r.repaired.xy]).cap_order)
            nai.append(score_parts(p, plan, naive_vertex_transform(p, plan)).cap_order)
            con.append(score_parts(p, plan, mask_contour_reextract(p, plan)).cap_order)
    assert np.mean(rep) == 1.0 > np.mean(nai) > np.mean(con)
