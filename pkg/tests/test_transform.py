import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ringaug.exceptions import ConfigurationError, DegenerateTransformError
from ringaug.geometry import RingPolygon
from ringaug.raster import BinaryMask, rasterize
from ringaug.transform import (
    AffinePlan,
    AugmentationSpec,
    apply_point,
    apply_points,
    derive_rng,
    flip_matrix,
    identity_plan,
    invert,
    rotation_matrix,
    sample,
    stable_key,
    translation_matrix,
    warp_mask,
)

from oracles import warp_oracle

seeds = st.integers(0, 2**64 - 1)


def test_identity_apply_point():
    assert apply_point(identity_plan(10, 10), (7.5, 3.25)) == (7.5, 3.25)


def test_rotation_90_about_center():
    # hand matrix: x' = cx - (y - cy), y' = cy + (x - cx) with c = (50, 50)
    plan = AffinePlan(rotation_matrix(90, 100, 100), 100, 100, "rotation")
    x, y = apply_point(plan, (0, 0))
    assert x == pytest.approx(100.0, abs=1e-12) and y == pytest.approx(0.0, abs=1e-12)


def test_hflip_point():
    plan = AffinePlan(flip_matrix(True, False, 100, 100), 100, 100, "hflip")
    assert apply_point(plan, (10, 20)) == (90.0, 20.0)


def test_crop_maps_window_to_frame():
    plan = AffinePlan(np.eye(2, 3), 100, 50, "crop", crop_window=(20, 10, 50, 25))
    assert apply_point(plan, (20, 10)) == (0.0, 0.0)
    assert apply_point(plan, (70, 35)) == (100.0, 50.0)


def test_crop_window_must_fit():
    with pytest.raises(ValueError):
        AffinePlan(np.eye(2, 3), 100, 100, "crop", crop_window=(60, 0, 50, 50))


@pytest.mark.parametrize("kind,key,lo,hi", [("rotation", "angle", -30, 30), ("scale", "scale", 0.7, 1.3)])
@given(seed=seeds)
def test_sampled_ranges(kind, key, lo, hi, seed):
    plan = sample(AugmentationSpec(kind=kind), seed, 64, 64)
    assert lo <= plan.params[key] <= hi


@given(seed=seeds)
def test_crop_and_shift_ranges(seed):
    plan = sample(AugmentationSpec(kind="crop"), seed, 64, 48)
    x, y, w, h = plan.crop_window
    assert 0.6 <= plan.params["crop_scale"] <= 1.0
    assert w / 64 == pytest.approx(h / 48)
    t = sample(AugmentationSpec(kind="translation"), seed, 64, 48)
    rx, ry = t.params["shift"]
    assert -0.1 <= rx <= 0.1 and -0.1 <= ry <= 0.1
    assert t.matrix[0, 2] == pytest.approx(rx * 64) and t.matrix[1, 2] == pytest.approx(ry * 48)


@given(seed=seeds, kind=st.sampled_from(["rotation", "scale", "crop", "rotation+crop", "translation", "flip", "composite"]))
def test_sample_is_deterministic(seed, kind):
    spec = AugmentationSpec(kind=kind)
    assert sample(spec, seed, 80, 60) == sample(spec, seed, 80, 60)


def test_flip_probability_roughly_half():
    spec = AugmentationSpec(kind="flip")
    plans = [sample(spec, s, 32, 32) for s in range(2000)]
    h = np.mean([p.params["hflip"] for p in plans])
    v = np.mean([p.params["vflip"] for p in plans])
    assert abs(h - 0.5) < 0.05 and abs(v - 0.5) < 0.05


@pytest.mark.parametrize(
    "bad",
    [
        {"kind": "shear"},
        {"angle": (10, -10)},
        {"scale": (0, 1)},
        {"crop_scale": (0.5, 1.5)},
        {"flip_p": 2},
        {"angle": "wide"},
    ],
)
def test_spec_rejects_bad_ranges(bad):
    with pytest.raises(ConfigurationError):
        AugmentationSpec(**bad)


def test_spec_dict_round_trip():
    spec = AugmentationSpec(kind="rotation+crop", angle=(-5, 5))
    assert AugmentationSpec.from_dict(spec.to_dict()) == spec
    with pytest.raises(ConfigurationError):
        AugmentationSpec.from_dict({"kind": "rotation", "bogus": 1})


def test_plan_dict_round_trip():
    plan = sample(AugmentationSpec(kind="composite"), 5, 64, 32)
    assert AffinePlan.from_dict(plan.to_dict()) == plan


def test_derive_rng_streams():
    a = derive_rng(7, 1, 2).random(4)
    assert np.array_equal(a, derive_rng(7, 1, 2).random(4))
    assert not np.array_equal(a, derive_rng(7, 2, 1).random(4))
    assert stable_key("a/b.json") == stable_key("a/b.json") != stable_key("a/c.json")
    with pytest.raises(ConfigurationError):
        derive_rng(-1)


def test_invert_examples():
    assert np.allclose(invert(identity_plan(5, 5)).matrix, np.eye(2, 3))
    t = AffinePlan(translation_matrix(3, -4), 10, 10, "translation")
    assert np.allclose(invert(t).matrix, translation_matrix(-3, 4))
    with pytest.raises(DegenerateTransformError):
        invert(AffinePlan(np.zeros((2, 3)), 10, 10, "composite"))


@given(seed=seeds)
def test_invert_round_trip(seed):
    plan = sample(AugmentationSpec(kind="composite"), seed, 128, 96)
    pts = derive_rng(seed, 1).uniform(-50, 200, size=(100, 2))
    back = apply_points(invert(plan), apply_points(plan, pts))
    assert np.max(np.abs(back - pts)) < 1e-9


def _asym():
    b = np.zeros((8, 8), bool)
    b[1:3, 1:7] = True
    b[3:7, 1:3] = True
    b[5, 5] = True
    return BinaryMask(b)


def test_warp_identity_and_flip():
    m = _asym()
    assert warp_mask(m, identity_plan(8, 8)) == m
    flipped = warp_mask(m, AffinePlan(flip_matrix(True, False, 8, 8), 8, 8, "hflip"))
    assert np.array_equal(flipped.bits, m.bits[:, ::-1])
    flipped = warp_mask(m, AffinePlan(flip_matrix(False, True, 8, 8), 8, 8, "vflip"))
    assert np.array_equal(flipped.bits, m.bits[::-1])


def test_warp_rotation_matches_oracle():
    m = _asym()
    plan = AffinePlan(rotation_matrix(90, 8, 8), 8, 8, "rotation")
    got = warp_mask(m, plan).bits
    assert got.tolist() == warp_oracle(m.bits.tolist(), plan.full_matrix().tolist(), 8, 8)
    # a quarter turn of a square frame is an exact pixel permutation
    assert np.array_equal(got, np.rot90(m.bits, -1))


@given(seed=seeds)
def test_warp_matches_oracle_random_plans(seed):
    rng = np.random.default_rng(seed % 2**32)
    m = BinaryMask(rng.random((20, 24)) < 0.4)
    plan = sample(AugmentationSpec(kind="composite"), seed, 24, 20)
    assert warp_mask(m, plan).bits.tolist() == warp_oracle(m.bits.tolist(), plan.full_matrix().tolist(), 24, 20)


def _iou(a, b):
    return np.logical_and(a, b).sum() / np.logical_or(a, b).sum()


@given(seed=seeds, kind=st.sampled_from(["rotation", "scale", "flip"]))
def test_equivariance(seed, kind):
    poly = RingPolygon([(150, 160), (150, 360), (360, 360), (360, 160), (210, 220), (300, 220), (300, 300), (210, 300)], 4)
    plan = sample(AugmentationSpec(kind=kind), seed, 512, 512)
    warped = warp_mask(rasterize(poly, 512, 512), plan)
    direct = rasterize(RingPolygon(apply_points(plan, poly.vertices), 4), 512, 512)
    assert _iou(warped.bits, direct.bits) >= 0.98
