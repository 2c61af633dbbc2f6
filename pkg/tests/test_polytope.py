import random

import numpy as np
import pytest
from gmpy2 import mpq

import oracles
from polybound import _kernels
from polybound.polytope import (
    HRep,
    PolytopeError,
    coordinate_width,
    dump_hrep,
    enumerate_vertices,
    lattice_points,
    parse_hrep,
    scaled_lattice,
    tangent_cones,
)


def points(P):
    return [v.point for v in enumerate_vertices(P)]


def test_triangle_vertices(triangle):
    assert points(triangle) == [(1, 1), (1, 2), (2, 1)]


def test_box_vertices():
    assert sorted(points(HRep.box([-1, -1], [1, 1]))) == [(-1, -1), (-1, 1), (1, -1), (1, 1)]


def test_simplex_vertices():
    assert points(HRep.unit_simplex(2)) == [(0, 0), (0, 1), (1, 0)]


def test_vertices_satisfy_constraints(triangle):
    for P in (triangle, HRep.box([0, 0, 0], [1, 2, 3]), HRep.unit_simplex(3)):
        for v in enumerate_vertices(P):
            assert P.contains(v.point)
            for i in v.tight:
                assert sum(a * x for a, x in zip(P.A[i], v.point)) == P.b[i]


def test_triangle_cone_at_origin_corner(triangle):
    cones = [c for c in tangent_cones(triangle) if c.apex.point == (1, 1)]
    assert len(cones) == 1
    assert set(cones[0].rays) == {(1, 0), (0, 1)}
    assert cones[0].parallelepiped_volume == 1


def test_simple_polytopes_have_one_cone_per_vertex(triangle):
    for P in (triangle, HRep.box([0, 0, 0], [1, 1, 1]), HRep.unit_simplex(3)):
        assert len(tangent_cones(P)) == len(P.vertices)


def square_pyramid():
    # base [-1,1]^2 at z = 0, apex (0, 0, 1)
    return HRep(
        [[0, 0, -1], [1, 0, 1], [-1, 0, 1], [0, 1, 1], [0, -1, 1]],
        [0, 1, 1, 1, 1],
    )


def test_pyramid_apex_is_split():
    P = square_pyramid()
    apex = [c for c in tangent_cones(P) if c.apex.point == (0, 0, 1)]
    assert len(apex) >= 2
    # the apex cone's cross-section at z = 0 is the base square (area 4);
    # each simplicial piece spans a triangle of area 2 -> |det| = 2 * 2 = 4
    assert sum(c.parallelepiped_volume for c in apex) == 8
    assert len(tangent_cones(P)) > len(P.vertices)


def test_rays_are_primitive_and_independent():
    from math import gcd

    for cone in tangent_cones(square_pyramid()):
        for u in cone.rays:
            g = 0
            for v in u:
                g = gcd(g, v)
            assert g == 1
        assert cone.parallelepiped_volume > 0


def test_coordinate_width(triangle):
    assert coordinate_width(triangle)[0] == 1
    assert coordinate_width(HRep.box([-1, -1], [1, 1])) == (2, 1)
    assert coordinate_width(HRep([[1], [-1]], [mpq(1, 4), mpq(1, 4)]))[0] == mpq(1, 2)


def test_width_invariant_under_row_permutation():
    rng = random.Random(3)
    A = [[-1, 0], [0, -1], [1, 1], [1, -2]]
    b = [0, 0, 4, 1]
    base = coordinate_width(HRep(A, b))
    for _ in range(5):
        order = list(range(len(A)))
        rng.shuffle(order)
        assert coordinate_width(HRep([A[i] for i in order], [b[i] for i in order])) == base


def test_lattice_examples(triangle, quarter_interval):
    assert lattice_points(quarter_interval, 2) == [(0,)]
    assert lattice_points(quarter_interval, 4) == [(mpq(-1, 4),), (0,), (mpq(1, 4),)]
    assert lattice_points(triangle, 1) == [(1, 1), (1, 2), (2, 1)]


@pytest.mark.parametrize("m", range(1, 21))
def test_interval_lattice_count(quarter_interval, m):
    want = mpq(m, 2) - mpq(m % 4, 2) + 1
    assert len(lattice_points(quarter_interval, m)) == want == oracles.interval_count(m)


@pytest.mark.skipif(not _kernels.HAVE_NUMBA, reason="numba not installed")
def test_scan_implementations_agree(triangle):
    for m in (1, 7, 50):
        a = scaled_lattice(triangle, m, "numpy")
        b = scaled_lattice(triangle, m, "numba")
        assert np.array_equal(a, b)
        assert len(a) == (m + 1) * (m + 2) // 2


def test_rejects_unbounded():
    with pytest.raises(PolytopeError):
        HRep([[-1, 0], [0, -1]], [0, 0])


def test_rejects_lower_dimensional():
    with pytest.raises(PolytopeError):
        HRep([[1], [-1]], [0, 0])


def test_rejects_empty():
    with pytest.raises(PolytopeError):
        HRep([[1], [-1]], [-1, 0])


def test_duplicate_rows_dropped():
    P = HRep([[1], [2], [-1]], [1, 2, 0])
    assert P.n == 2


def test_hrep_text_roundtrip(triangle):
    text = dump_hrep(triangle)
    again = parse_hrep(text)
    assert again.A == triangle.A and again.b == triangle.b


@pytest.mark.parametrize("text", ["", "3\n", "2 1\n1 1\n", "1 2\n1 1\n", "1 1\nx 1\n"])
def test_hrep_parse_errors(text):
    with pytest.raises(ValueError):
        parse_hrep(text, validate=False)
