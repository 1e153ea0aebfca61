import numpy as np
import pytest
from hypothesis import given, strategies as st

from ringaug.baselines import SyntheticRingSpec, generate_corpus
from ringaug.exceptions import GeometryError, NotARingError
from ringaug.geometry import (
    RingPolygon,
    point_in_polygon,
    ring_edges,
    signed_area,
    split_boundaries,
    successor,
    validate,
)

from conftest import square_ring


@pytest.mark.parametrize("i,n,expected", [(1, 8, 2), (8, 8, 1), (5, 12, 6)])
def test_successor_examples(i, n, expected):
    assert successor(i, n) == expected


@pytest.mark.parametrize("i,n", [(0, 8), (9, 8), (1, 0), (-1, 4)])
def test_successor_domain(i, n):
    with pytest.raises(GeometryError):
        successor(i, n)


@given(st.integers(1, 500), st.data())
def test_successor_cycles_back(n, data):
    i = data.draw(st.integers(1, n))
    k = i
    for _ in range(n):
        k = successor(k, n)
    assert k == i
    assert sorted(successor(j, n) for j in range(1, n + 1)) == list(range(1, n + 1))


def test_split_boundaries_lengths():
    r8 = RingPolygon(np.arange(16).reshape(8, 2), 4)
    out, inn = split_boundaries(r8)
    assert len(out) == 4 and len(inn) == 4
    r10 = RingPolygon(np.arange(20).reshape(10, 2), 6)
    out, inn = split_boundaries(r10)
    assert len(out) == 6 and len(inn) == 4


def test_split_boundaries_simple_polygon():
    with pytest.raises(NotARingError):
        split_boundaries(RingPolygon([(0, 0), (1, 0), (0, 1)]))


@given(st.integers(2, 40), st.data())
def test_split_then_concat_is_identity(n, data):
    L = data.draw(st.integers(1, n - 1))
    v = np.arange(2 * n, dtype=float).reshape(n, 2)
    out, inn = split_boundaries(RingPolygon(v, L))
    assert np.array_equal(np.vstack([out, inn]), v)


def test_ring_edges():
    e = ring_edges(square_ring())
    assert e.bridge == (4, 5) and e.closure == (8, 1)


def test_vertices_must_be_finite():
    with pytest.raises(GeometryError):
        RingPolygon([(0, 0), (np.nan, 1), (1, 1)])
    with pytest.raises(GeometryError):
        RingPolygon([(0, 0, 0)])


def test_polygon_is_immutable():
    p = square_ring()
    with pytest.raises(ValueError):
        p.vertices[0, 0] = 5


def test_validate_square_in_square():
    assert validate(square_ring()).ok


def test_validate_partition_bounds():
    p = square_ring()
    bad = RingPolygon(p.vertices, p.n - 1)
    assert "partition-bounds" in validate(bad).codes()


def test_validate_containment():
    v = square_ring().vertices.copy()
    v[5] = (45, 25)
    assert validate(RingPolygon(v, 4)).codes() == {"containment"}


def test_validate_degenerate_edge_and_size():
    assert "degenerate-edge" in validate(RingPolygon([(0, 0), (0, 0), (1, 1), (2, 0)])).codes()
    assert "too-few-vertices" in validate(RingPolygon([(0, 0), (1, 1)])).codes()


def test_point_in_polygon_matches_hand_cases():
    sq = [(0, 0), (0, 10), (10, 10), (10, 0)]
    assert point_in_polygon((5, 5), sq)
    assert not point_in_polygon((15, 5), sq)
    assert point_in_polygon((0, 5), sq)  # on edge counts as inside
    assert not point_in_polygon((0, 5), sq, on_edge=False)


def test_signed_area_orientation():
    ring = square_ring()
    assert signed_area(ring.vertices[:4]) == -900.0
    assert signed_area(ring.vertices[4:]) == 100.0
    corpus = generate_corpus(SyntheticRingSpec(count=10, shape="mixed"))
    for p in corpus:
        assert signed_area(p.vertices[: p.partition]) > 0 > signed_area(p.vertices[p.partition :])


def test_corpus_validates_and_each_single_mutation_is_caught():
    corpus = generate_corpus(SyntheticRingSpec(count=30, shape="mixed", seed=3))
    for p in corpus:
        assert validate(p).ok
        v = p.vertices
        L, n = p.partition, p.n
        # exactly one invariant broken per mutation
        dup = v.copy()
        dup[1] = dup[0]
        assert "degenerate-edge" in validate(RingPolygon(dup, L)).codes()
        assert validate(RingPolygon(v, n - 2)).codes() >= {"partition-bounds"}
        moved = v.copy()
        moved[L] = (-50.0, -50.0)
        assert validate(RingPolygon(moved, L)).codes() == {"containment"}
