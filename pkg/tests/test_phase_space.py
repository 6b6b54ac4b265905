import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from randrec.phase_space import InvalidInputError, Space, distance, distances, in_ball, paired_distances, point

unit = st.floats(0.0, 1.0, exclude_max=True, allow_nan=False)


def test_distance_examples():
    assert distance(Space.CIRCLE, [0.1], [0.9]) == pytest.approx(0.2, abs=1e-15)
    assert distance(Space.TORUS2, [0, 0], [0.5, 0.5]) == pytest.approx(math.sqrt(0.5), abs=1e-15)
    assert distance(Space.INTERVAL, [0.2], [0.7]) == pytest.approx(0.5, abs=1e-15)


def test_in_ball_examples():
    assert in_ball(Space.CIRCLE, [0.0], 0.15, [0.9])
    assert not in_ball(Space.CIRCLE, [0.0], 0.1, [0.1])
    assert not in_ball(Space.TORUS2, [0.5, 0.5], 0.05, [0.5, 0.56])


def test_errors():
    with pytest.raises(InvalidInputError):
        distance(Space.TORUS2, [0.1], [0.2, 0.3])
    with pytest.raises(InvalidInputError):
        in_ball(Space.CIRCLE, [0.0], 0.0, [0.1])
    with pytest.raises(InvalidInputError):
        point(Space.INTERVAL, [1.5])
    with pytest.raises(InvalidInputError):
        point(Space.CIRCLE, [float("nan")])


def test_normalization():
    assert point(Space.CIRCLE, [1.25])[0] == 0.25
    assert point(Space.CIRCLE, [-1e-20])[0] == 0.0
    assert point(Space.INTERVAL, [1.0])[0] == 1.0


@pytest.mark.parametrize("space", list(Space))
def test_metric_axioms_bulk(space):
    rng = np.random.default_rng(5)
    n = 100_000
    # multiples of 2^-52, so x + 1 is exact and the wrap check is meaningful
    a, b, c = (rng.integers(0, 2**52, (n, space.dim)) * 2.0**-52 for _ in range(3))
    # vectorized path: symmetric exactly, triangle inequality to 1e-12
    d = lambda p, q: paired_distances(space, p, q)
    assert np.array_equal(d(a, b), d(b, a))
    assert np.all(d(a, c) <= d(a, b) + d(b, c) + 1e-12)
    assert np.all(d(a, a) == 0)
    if space.periodic:
        assert np.all(d(a, (a + 1.0) % 1.0) == 0)


@given(st.lists(unit, min_size=2, max_size=2), st.lists(unit, min_size=2, max_size=2))
def test_scalar_matches_vector(a, b):
    for space in Space:
        pa, pb = np.array(a[: space.dim]), np.array(b[: space.dim])
        assert distance(space, pa, pb) == distances(space, pa[None, :], pb)[0] == distance(space, pb, pa)


@given(unit, unit, st.floats(1e-6, 1.0))
def test_in_ball_is_strict_distance(c, y, r):
    assert in_ball(Space.CIRCLE, [c], r, [y]) == (distance(Space.CIRCLE, [c], [y]) < r)


@given(st.integers(0, 2**52 - 1), st.sampled_from([-1, 1]))
def test_wrap_consistency(m, k):
    x = m * 2.0**-52
    assert distance(Space.CIRCLE, [x], point(Space.CIRCLE, [x + k])) == 0.0
    assert distance(Space.TORUS2, [x, 0.5], point(Space.TORUS2, [x + k, 0.5 - k])) == 0.0
