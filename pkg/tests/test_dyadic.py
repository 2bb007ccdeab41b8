import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stokeslab.dyadic import (
    CubeSet,
    DepthError,
    DyadicCube,
    ExceptionalSet,
    GridError,
    RootBox,
    neighborhood_indicator,
)

ROOT = RootBox((0.0, 0.0), 1.0)
UNIT = CubeSet.whole(ROOT)


def _cube(g, i, j, root=ROOT):
    return DyadicCube(root, g, (i, j))


def test_measure_unit_square():
    assert UNIT.measure() == 1.0


def test_measure_minus_generation2_cube():
    rest = UNIT.difference(CubeSet(ROOT, (_cube(2, 0, 0),)))
    assert rest.measure() == 15.0 / 16.0


def test_measure_empty():
    assert CubeSet.empty(ROOT).measure() == 0.0


def test_perimeter_unit_square():
    assert UNIT.perimeter() == 4.0


def test_perimeter_adjacent_squares():
    root2 = RootBox((0.0, 0.0), 2.0)
    two = CubeSet(root2, (DyadicCube(root2, 1, (0, 0)), DyadicCube(root2, 1, (0, 1))))
    assert two.perimeter() == 6.0
    assert two.measure() == 2.0


def test_perimeter_l_shape():
    # removing a corner quarter leaves the outer perimeter unchanged
    l_shape = UNIT.difference(CubeSet(ROOT, (_cube(1, 1, 1),)))
    assert l_shape.perimeter() == 4.0


def test_perimeter_one_dimensional():
    root = RootBox((0.0,), 1.0)
    whole = CubeSet.whole(root)
    assert whole.perimeter() == 2.0
    halves = CubeSet(root, tuple(whole.cubes[0].subdivide()))
    assert halves.perimeter() == 2.0  # interior endpoint cancels


def test_diameter_unit_square():
    assert UNIT.diameter() == pytest.approx(math.sqrt(2.0), abs=1e-15)


def test_diameter_single_cube_scales():
    c = CubeSet(ROOT, (_cube(3, 2, 5),))
    assert c.diameter() == pytest.approx((1 / 8) * math.sqrt(2.0), abs=1e-15)


def test_diameter_two_far_cubes():
    root4 = RootBox((0.0, 0.0), 4.0)
    pair = CubeSet(root4, (DyadicCube(root4, 2, (0, 0)), DyadicCube(root4, 2, (3, 0))))
    assert pair.diameter() == pytest.approx(math.sqrt(17.0), abs=1e-14)


def test_diameter_empty_raises():
    with pytest.raises(ValueError):
        CubeSet.empty(ROOT).diameter()


def test_subdivide_children():
    kids = UNIT.cubes[0].subdivide()
    assert len(kids) == 4
    assert math.fsum(k.measure() for k in kids) == 1.0
    grandkid = kids[0].subdivide()[0]
    assert grandkid.side == 0.25


def test_subdivide_interval():
    root = RootBox((0.0,), 1.0)
    kids = CubeSet.whole(root).cubes[0].subdivide()
    assert len(kids) == 2


def test_subdivide_depth_guard():
    with pytest.raises(DepthError):
        _cube(2, 0, 0).subdivide(max_generation=2)


def test_neighborhood_indicator_point():
    E = ExceptionalSet.points([(0.0, 0.0)])
    assert neighborhood_indicator(E, 1.0, (0.5, 0.0))
    assert not neighborhood_indicator(E, 1.0, (1.0, 0.0))  # open neighbourhood


def test_neighborhood_indicator_thin_box_clamps():
    y_inf = 0.5
    E = ExceptionalSet.box((0.0, y_inf, -1.0), (math.pi, y_inf, 1.0))
    assert E.distance((1.0, y_inf - 0.3, 0.0)) == pytest.approx(0.3, abs=1e-15)
    assert not neighborhood_indicator(E, 0.2, (1.0, y_inf - 0.3, 0.0))


def test_canonicalization_merges_and_dedups():
    kids = UNIT.cubes[0].subdivide()
    redundant = CubeSet(ROOT, tuple(kids) + (kids[0],) + tuple(kids[1].subdivide()))
    assert redundant == UNIT
    assert CubeSet(ROOT, redundant.cubes) == redundant


def test_union_intersection_difference():
    a = CubeSet(ROOT, (_cube(1, 0, 0), _cube(1, 1, 0)))
    b = CubeSet(ROOT, (_cube(1, 1, 0), _cube(2, 0, 3)))
    assert a.union(b).measure() == pytest.approx(0.5 + 1 / 16, abs=0)
    assert a.intersection(b).measure() == 0.25
    assert a.difference(b).measure() == 0.25
    assert b.difference(a).measure() == 1 / 16


def test_grid_mismatch_raises():
    other = CubeSet.whole(RootBox((0.0, 0.0), 2.0))
    with pytest.raises(GridError):
        UNIT.union(other)


def test_half_space_restriction():
    left = UNIT.restrict_half_space(0, 0.5, keep_below=True)
    assert left.measure() == 0.5
    assert left.perimeter() == 3.0
    with pytest.raises(GridError):
        UNIT.restrict_half_space(0, 1 / 3, keep_below=True, max_generation=8)


def test_json_round_trip_bit_exact():
    l_shape = UNIT.difference(CubeSet(ROOT, (_cube(1, 1, 1),)))
    text = l_shape.to_json()
    back = CubeSet.from_json(text)
    assert back == l_shape
    assert back.to_json() == text


@given(st.integers(0, 2 ** 32 - 1))
@settings(max_examples=100, deadline=None)
def test_subdivision_preserves_measure_exactly(seed):
    rng = np.random.default_rng(seed)
    g = int(rng.integers(0, 5))
    idx = tuple(int(v) for v in rng.integers(0, 2 ** g, size=2))
    q = DyadicCube(ROOT, g, idx)
    assert math.fsum(c.measure() for c in q.subdivide()) == q.measure()


def _random_complex(rng, max_cubes=12):
    cubes = []
    for _ in range(int(rng.integers(1, max_cubes))):
        g = int(rng.integers(1, 5))
        idx = tuple(int(v) for v in rng.integers(0, 2 ** g, size=2))
        cubes.append(DyadicCube(ROOT, g, idx))
    return CubeSet(ROOT, tuple(cubes))


def test_perimeter_subadditive_on_disjoint_complexes():
    rng = np.random.default_rng(42)
    done = 0
    while done < 500:
        a = _random_complex(rng)
        b = _random_complex(rng)
        inter = a.intersection(b)
        if not inter.is_empty():
            b = b.difference(a)
            if b.is_empty():
                continue
        u = a.union(b)
        assert u.perimeter() <= a.perimeter() + b.perimeter() + 1e-12
        done += 1


def test_perimeter_at_least_isoperimetric_on_rectangles():
    # squares give equality in perimeter >= 4 sqrt(measure)
    root = RootBox((0.0, 0.0), 1.0)
    for g, i, j in [(0, 0, 0), (1, 1, 0), (2, 3, 2), (3, 5, 1)]:
        c = CubeSet(root, (DyadicCube(root, g, (i, j)),))
        assert c.perimeter() == pytest.approx(4.0 * math.sqrt(c.measure()), rel=1e-14)
    # 2 x 1 rectangle of two generation-1 cubes: 6 >= 4 sqrt(1/2)
    rect = CubeSet(root, (DyadicCube(root, 1, (0, 0)), DyadicCube(root, 1, (1, 0))))
    assert rect.perimeter() >= 4.0 * math.sqrt(rect.measure())


@given(st.integers(0, 2 ** 32 - 1))
@settings(max_examples=300, deadline=None)
def test_distance_evaluator_is_1_lipschitz(seed):
    rng = np.random.default_rng(seed)
    E = ExceptionalSet((
        ((0.1, 0.2), (0.1, 0.8)),
        ((0.5, 0.5), (0.9, 0.5)),
        ((0.3, 0.3), (0.3, 0.3)),
    ))
    x = rng.uniform(-1, 2, 2)
    y = rng.uniform(-1, 2, 2)
    assert abs(E.distance(x) - E.distance(y)) <= float(np.linalg.norm(x - y)) + 1e-12


def test_exceptional_set_segment_validation():
    with pytest.raises(ValueError):
        ExceptionalSet.segment((0.0, 0.0), (1.0, 1.0))


def test_cube_min_max_distance():
    E = ExceptionalSet.points([(0.0, 0.0)])
    q = _cube(1, 1, 1)  # [0.5, 1]^2
    assert E.cube_min_distance(q) == pytest.approx(math.hypot(0.5, 0.5), abs=1e-15)
    assert E.cube_max_distance_bound(q) == pytest.approx(math.sqrt(2.0), abs=1e-15)
