import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from veech import words
from veech.subshift import (INF, RHO, FlippedGenerator, InconclusiveError, LogDistance,
                            OutOfWindowError, PointWindow, bowen_dist, dist, dist_to_Y, explicit_window,
                            flip_point, generator_from_json, generator_to_json,
                            inside_elementary, point_at_radius)

L6 = words.length_of(6)
L7 = words.length_of(7)
positions = st.integers(1000, L7 - 1000)


def test_metric_constants():
    assert RHO == 1 / 16
    assert LogDistance(0).value == RHO
    assert LogDistance(INF).value == 0.0 and LogDistance(INF).is_zero
    assert LogDistance(3).neg_log == pytest.approx(7 * math.log(2))


@settings(max_examples=100, deadline=None)
@given(st.integers(0, L6 - 1))
def test_coord_matches_letter_at(pos):
    p = inside_elementary(6, pos)
    assert p.coord(0) == words.letter_at(6, pos)


@settings(max_examples=50, deadline=None)
@given(positions, st.integers(-200, 200), st.integers(-200, 200))
def test_shift_composition(pos, a, b):
    p = inside_elementary(7, pos)
    assert p.shift(a).shift(b).center == p.shift(a + b).center
    assert p.shift(0) == p
    assert p.shift(1).coord(a) == p.coord(a + 1)


def test_window_limits():
    p = explicit_window("UDUDZ", 2)
    assert p.valid_radius == 2
    with pytest.raises(OutOfWindowError):
        p.coord(3)
    with pytest.raises(OutOfWindowError):
        p.shift(3)


def test_flip_changes_one_coordinate():
    base = inside_elementary(7, 10 ** 6)
    q = flip_point(base, 8)
    a, b = base.block(-50, 51), q.block(-50, 51)
    assert list(np.flatnonzero(a != b)) == [58]
    assert q.coord(8).value == q.generator.letter


def test_dist_examples():
    p = inside_elementary(7, 5000)
    assert not dist(p, p, 100).exact
    q = flip_point(p, 0)
    d = dist(p, q, 100)
    assert d.radius == 0 and d.value == RHO
    assert dist(q, p, 100) == d


def raw_flip(p, j):
    """Change coordinate j of p to another letter; no language certificate."""
    cur = p.coord(j).value
    return PointWindow(FlippedGenerator(p.generator, p.center + j, "Z" if cur != "Z" else "U"),
                       p.center)


def _random_pair(rng):
    pos = int(rng.integers(10 ** 4, L7 - 10 ** 4))
    p = inside_elementary(7, pos)
    j = int(rng.integers(-30, 31))
    return p, raw_flip(p, j), j


def test_ultrametric_and_bilipschitz():
    rng = np.random.default_rng(1)
    for _ in range(100):
        pos = int(rng.integers(10 ** 4, L7 - 10 ** 4))
        p = inside_elementary(7, pos)
        q = raw_flip(p, int(rng.integers(-30, 31)))
        r = raw_flip(p, int(rng.integers(-30, 31)))
        dpq, dqr, dpr = (dist(a, b, 80).radius for a, b in ((p, q), (q, r), (p, r)))
        assert dpr >= min(dpq, dqr)
        # agreement radius moves by at most one under the shift
        dT = dist(p.shift(1), q.shift(1), 80).radius
        assert abs(dT - dpq) <= 1
        assert dist(p.shift(1), q.shift(1), 80).value <= 2 * dist(p, q, 80).value


def test_bowen_distance():
    rng = np.random.default_rng(2)
    for _ in range(30):
        p, q, j = _random_pair(rng)
        assert bowen_dist(p, q, 0, 60) == dist(p, q, 60)
        for n in (1, 5, 40):
            b = bowen_dist(p, q, n, 60)
            assert b.radius == max(0, abs(j) - n)
            assert b.value >= dist(p, q, 60).value
            # direct max over shifted pairs
            direct = max(dist(p.shift(i), q.shift(i), 60).value for i in range(-n, n + 1))
            assert b.value == direct


def test_bowen_radius_arithmetic_against_schedule():
    M = (2, 6, 24, 120, 720, 5040)
    N = (2, 27, 148, 869, 5910, 46231)
    for k in range(2, 6):
        assert N[k - 1] - M[k] > N[k - 2]


def test_dist_to_Y_on_Y_and_shifts():
    p = inside_elementary(7, 123456)
    assert dist_to_Y(p).is_zero
    assert dist_to_Y(p.shift(1000)).is_zero


def test_flip_at_eight():
    q = point_at_radius(7, 10 ** 6, 8)
    d = dist_to_Y(q)
    assert d.exact and d.radius == 8
    assert d.value == RHO * 2.0 ** -8


@pytest.mark.parametrize("radius", [1, 2, 3, 5, 8, 13, 21])
def test_flip_distance_matches_direct_scan(radius):
    q = point_at_radius(7, 3 * 10 ** 6 + radius, radius, side=-1 if radius % 2 else 1)
    # copy the window into an explicit word: no certificates, plain language scan
    w = q.word(-200, 201)
    copy = explicit_window(w, 200)
    assert dist_to_Y(copy).radius == dist_to_Y(q).radius == radius


def test_non_Y_points_within_half_diameter():
    rng = np.random.default_rng(4)
    for _ in range(50):
        w = "".join(rng.choice(list("UDZ"), 41))
        try:
            d = dist_to_Y(explicit_window(w, 20))
        except InconclusiveError:
            continue
        if not d.is_zero:
            assert d.value <= RHO / 2


def test_dist_to_Y_changes_by_one_per_step():
    q = point_at_radius(7, 2 * 10 ** 6, 40)
    radii = [dist_to_Y(q.shift(i)).radius for i in range(0, 40)]
    assert radii[0] == 40
    for a, b in zip(radii, radii[1:]):
        assert abs(a - b) <= 1
    assert radii[-1] <= 2


def test_generator_json_roundtrip():
    q = point_at_radius(7, 10 ** 6, 12)
    data = q.to_json()
    assert data["kind"] == "flipped" and isinstance(data["flip"], str)
    gen = generator_from_json(generator_to_json(q.generator))
    assert gen == q.generator
    assert PointWindow(gen, q.center).word(-20, 20) == q.word(-20, 20)
