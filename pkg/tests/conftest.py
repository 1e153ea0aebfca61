import numpy as np
import pytest
from hypothesis import settings, strategies as st

from ringaug.geometry import RingPolygon

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


def square_ring(o0=10, o1=40, i0=20, i1=30, label="ring"):
    """Square in square; the two loops run in opposite directions."""
    outer = [(o0, o0), (o0, o1), (o1, o1), (o1, o0)]
    inner = [(i0, i0), (i1, i0), (i1, i1), (i0, i1)]
    return RingPolygon(outer + inner, 4, label)


@pytest.fixture
def ring():
    return square_ring()


@pytest.fixture
def square():
    return RingPolygon([(0, 0), (0, 8), (8, 8), (8, 0)])


@st.composite
def rect_rings(draw, frame=128, min_wall=3):
    """Axis-aligned rectangle-in-rectangle rings with integer corners."""
    x0 = draw(st.integers(0, frame - 4 * min_wall - 4))
    y0 = draw(st.integers(0, frame - 4 * min_wall - 4))
    x1 = draw(st.integers(x0 + 2 * min_wall + 4, frame))
    y1 = draw(st.integers(y0 + 2 * min_wall + 4, frame))
    ix0 = draw(st.integers(x0 + min_wall, x1 - min_wall - 2))
    iy0 = draw(st.integers(y0 + min_wall, y1 - min_wall - 2))
    ix1 = draw(st.integers(ix0 + 2, x1 - min_wall))
    iy1 = draw(st.integers(iy0 + 2, y1 - min_wall))
    outer = [(x0, y0), (x0, y1), (x1, y1), (x1, y0)]
    inner = [(ix0, iy0), (ix1, iy0), (ix1, iy1), (ix0, iy1)]
    return RingPolygon(outer + inner, 4, "ring")


def random_polygon(rng, n, frame, integer=False):
    pts = rng.uniform(-0.1 * frame, 1.1 * frame, size=(n, 2))
    if integer:
        pts = np.round(pts)
    return RingPolygon(pts)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
