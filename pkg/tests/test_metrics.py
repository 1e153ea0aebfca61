import json
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ringaug.baselines import mask_contour_reextract
from ringaug.exceptions import InvalidSequenceError, UndefinedMetricError
from ringaug.metrics import (
    CapReport,
    cap_order,
    cap_report,
    cap_strict,
    match_indices,
    match_parts,
    mean_cap,
    reports_to_csv,
    reports_to_json,
    summarize,
)
from ringaug.transform import AugmentationSpec, apply_points, identity_plan, sample

from conftest import square_ring
from oracles import cap_strict_exact, cap_next, greedy_match


def test_cap_strict_examples():
    assert cap_strict(8, range(1, 9)) == 1.0
    # frozen from oracles.cap_strict_exact(8, (1, 2, 3, 6, 7, 8)) = 5/6
    assert cap_strict(8, [1, 2, 3, 6, 7, 8]) == 5 / 6
    assert cap_strict(8, [5]) == 0.0


def test_cap_order_examples():
    assert cap_order(8, [1, 2, 3, 6, 7, 8]) == 1.0
    assert cap_order(4, [1, 3, 2]) == 0.0
    assert cap_order(6, [4, 5, 6, 1, 2, 3]) == 1.0


def test_errors():
    with pytest.raises(UndefinedMetricError):
        cap_strict(8, [])
    with pytest.raises(InvalidSequenceError):
        cap_order(8, [1, 2, 2])
    with pytest.raises(InvalidSequenceError):
        cap_strict(8, [9])
    with pytest.raises(UndefinedMetricError):
        mean_cap([])


sequences = st.integers(1, 32).flatmap(lambda n: st.tuples(st.just(n), st.lists(st.integers(1, n), min_size=1, max_size=40)))
distinct = st.integers(1, 32).flatmap(
    lambda n: st.tuples(st.just(n), st.permutations(range(1, n + 1)).flatmap(lambda p: st.integers(1, n).map(lambda k: list(p[:k]))))
)


@given(sequences)
def test_cap_strict_matches_exact_oracle(case):
    n, seq = case
    assert cap_strict(n, seq) == float(cap_strict_exact(n, seq))


@given(distinct)
def test_cap_order_matches_oracle(case):
    n, seq = case
    assert cap_order(n, seq) == float(cap_next(n, seq))


@given(distinct, st.integers(0, 40))
def test_cap_order_of_rotated_sorted_set_is_one(case, r):
    n, seq = case
    s = sorted(seq)
    r %= len(s)
    rot = s[r:] + s[:r]
    assert cap_order(n, rot) == 1.0
    assert cap_order(n, rot) >= cap_strict(n, rot)
    if len(s) == n:
        assert cap_strict(n, rot) == 1.0


@given(distinct)
def test_full_length_variants_agree(case):
    n, seq = case
    if len(seq) == n:
        assert cap_order(n, seq) == cap_strict(n, seq)


@given(st.lists(st.floats(0, 1), min_size=1, max_size=20), st.randoms())
def test_mean_cap_permutation_invariant(vals, rnd):
    shuffled = list(vals)
    rnd.shuffle(shuffled)
    assert mean_cap(vals) == pytest.approx(mean_cap(shuffled), abs=1e-12)


def test_mean_cap_examples():
    assert mean_cap([1.0, 1.0]) == 1.0
    assert mean_cap([0.5, 1.0]) == 0.75
    reps = [CapReport(0.5, 1.0, 8, 6), CapReport(1.0, 0.5, 8, 8)]
    assert mean_cap(reps) == 0.75 and mean_cap(reps, "cap_strict") == 0.75


def test_multi_part_scoring():
    # two fragments of an 8-cycle: each closes on itself and loses one pair
    r = cap_report(8, [[1, 2, 3], [5, 6, 7]])
    assert r.parts == 2 and r.m == 6
    assert r.cap_order == pytest.approx(4 / 6)
    assert r.cap_strict == pytest.approx(4 / 6)


def test_match_examples():
    ring = square_ring()
    plan = identity_plan(64, 64)
    seq, unmatched = match_indices(ring, plan, ring.vertices)
    assert seq == list(range(1, 9)) and unmatched == 0
    kept = np.delete(ring.vertices, [3, 4], axis=0)
    seq, unmatched = match_indices(ring, plan, kept)
    assert seq == [1, 2, 3, 6, 7, 8] and unmatched == 0
    dense = mask_contour_reextract(ring, plan)
    seqs, unmatched = match_parts(ring, plan, dense)
    assert unmatched > ring.n
    assert sorted(k for s in seqs for k in s) == list(range(1, 9))


@given(st.integers(0, 2**32 - 1))
def test_match_agrees_with_greedy_oracle(seed):
    rng = np.random.default_rng(seed)
    ring = square_ring()
    plan = sample(AugmentationSpec(kind="rotation"), seed, 64, 64)
    target = apply_points(plan, ring.vertices)
    aug = np.vstack([target + rng.normal(0, 1.5, target.shape), rng.uniform(0, 64, (5, 2))])
    rng.shuffle(aug)
    seq, unmatched = match_indices(ring, plan, aug, tol=3.0)
    assert (seq, unmatched) == greedy_match(aug.tolist(), target.tolist(), 3.0)


def test_report_serialization():
    reps = [CapReport(0.5, 1.0, 8, 6, 0, 1, "a", "x.json#0"), CapReport(1.0, 1.0, 8, 8, 2, 1, "b", "y.json#0")]
    csv_text = reports_to_csv(reps)
    assert csv_text.splitlines()[0] == "source,label,n,m,parts,cap_strict,cap_order,unmatched_new_vertices"
    assert len(csv_text.splitlines()) == 3
    s = summarize(reps)
    assert s["overall"] == {"cap_strict": 0.75, "cap_order": 1.0}
    assert set(s["per_class"]) == {"a", "b"}
    assert json.loads(reports_to_json(reps))["summary"]["count"] == 2
    assert summarize([])["overall"] is None
