import itertools
import random
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import BINARY_L, PENTAGON_L, F
from rieszlab.exactalg import StructuralError, dot, matvec
from rieszlab.polyhedra import (
    ChartPolytope,
    DegenerateInputError,
    FiberMap,
    HPolyhedron,
    VPolytope,
    chamber_complex,
    cone_of_columns,
    facet_enumeration,
    fiber_polytope,
    integrate_monomial,
    vertex_enumeration,
    volume,
)

PENTAGON_FACETS = {(-1, 1, 1), (0, -1, 2), (0, 2, -1), (1, -1, 0), (1, 0, -1)}
PENTAGON_VERTICES = {
    F(0, 5, 0, 4, 1), F(0, 1, 4, 0, 5), F(1, 0, "9/2", 0, "9/2"), F(4, 0, 3, 3, 0), F(1, "9/2", 0, "9/2", 0),
}


def unit_cube(d):
    ineqs = []
    for i in range(d):
        e = tuple(int(i == j) for j in range(d))
        ineqs += [(e, 0), (tuple(-v for v in e), -1)]
    return HPolyhedron(d, tuple(ineqs))


def std_simplex(d):
    verts = [tuple(Fraction(0) for _ in range(d))]
    verts += [tuple(Fraction(int(i == j)) for j in range(d)) for i in range(d)]
    return VPolytope(d, tuple(verts))


@pytest.fixture(scope="module")
def pentagon_complex():
    return chamber_complex(PENTAGON_L)


class TestChamberComplex:
    def test_eleven_cells_one_pentagon(self, pentagon_complex):
        sizes = sorted(len(c) for c in pentagon_complex.cells)
        assert sizes == [3] * 10 + [5]
        (pent,) = [c for c in pentagon_complex.cells if len(c) == 5]
        assert set(pent) == PENTAGON_FACETS

    def test_binary_walls(self):
        cc = chamber_complex(BINARY_L)
        assert len(cc.cells) == 3
        lines = set()
        for _, _, w in cc.walls:
            w = tuple(w) if w[0] < 0 else tuple(-v for v in w)
            lines.add(w)
        assert lines == {(-2, 1), (-1, 2)}

    def test_identity_is_one_orthant(self):
        cc = chamber_complex([[1, 0, 0], [0, 1, 0], [0, 0, 1]])
        assert len(cc.cells) == 1
        assert set(cc.cells[0]) == {(1, 0, 0), (0, 1, 0), (0, 0, 1)}

    def test_wall_normals_are_column_determinants(self, pentagon_complex):
        cols = list(zip(*PENTAGON_L))
        dets = set()
        for a, b in itertools.combinations(cols, 2):
            w = (a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0])
            if any(w):
                dets.add(w)

        def parallel(u, v):
            return all(u[i] * v[j] == u[j] * v[i] for i in range(3) for j in range(3))

        for _, _, w in pentagon_complex.walls:
            assert any(parallel(w, d) for d in dets)

    def test_rejects_non_spanning_columns(self):
        with pytest.raises(DegenerateInputError, match="span"):
            chamber_complex([[1, 2], [2, 4]])

    def test_rejects_non_pointed_cone(self):
        with pytest.raises(DegenerateInputError, match="pointed"):
            cone_of_columns([[1, -1, 0], [0, 0, 1]])

    def test_cells_tile_the_cone(self, pentagon_complex):
        cc = pentagon_complex
        cols = list(zip(*PENTAGON_L))
        rng = random.Random(11)
        for _ in range(1000):
            w = [Fraction(rng.randint(0, 30), rng.randint(1, 8)) for _ in cols]
            if not any(w):
                continue
            y = tuple(sum(wi * c[i] for wi, c in zip(w, cols)) for i in range(3))
            hits = cc.locate(y)
            assert hits, y
            if not cc.on_wall(y):
                assert len(hits) == 1
                strict = [i for i, c in enumerate(cc.cells) if all(dot(n, y) > 0 for n in c)]
                assert strict == hits

    def test_fiber_combinatorics_constant_per_cell(self, pentagon_complex):
        fm = FiberMap(PENTAGON_L)
        for cell in range(len(pentagon_complex.cells)):
            shapes = set()
            for y in pentagon_complex.interior_points(cell, 50, seed=cell):
                verts = fm.vertices(y)
                support = tuple(sorted(tuple(i for i, v in enumerate(u) if v == 0) for u in verts))
                shapes.add(support)
            assert len(shapes) == 1


class TestFibers:
    def test_pentagon_vertices(self):
        P = fiber_polytope(PENTAGON_L, (10, 9, 9))
        assert set(P.vertices) == PENTAGON_VERTICES
        for u in P.vertices:
            assert matvec([list(r) for r in PENTAGON_L], u) == [10, 9, 9]

    def test_fiber_over_a_column_is_a_point(self):
        P = fiber_polytope(PENTAGON_L, (3, 6, 3))  # 3 * third column
        assert P.vertices == (F(0, 0, 3, 0, 0),)

    def test_outside_cone_is_empty(self):
        assert fiber_polytope(PENTAGON_L, (1, 5, 0)).is_empty

    def test_dimension_mismatch(self):
        with pytest.raises(StructuralError):
            fiber_polytope(PENTAGON_L, (1, 1))

    @given(st.lists(st.fractions(min_value=0, max_value=9, max_denominator=6), min_size=5, max_size=5))
    def test_fiber_contains_its_preimage(self, u):
        y = matvec([list(r) for r in PENTAGON_L], u)
        P = fiber_polytope(PENTAGON_L, y)
        H = facet_enumeration(P)
        assert H.contains(u)

    def test_pentagon_round_trip_through_h_rep(self):
        P = fiber_polytope(PENTAGON_L, (10, 9, 9))
        H = facet_enumeration(P)
        assert set(vertex_enumeration(H).vertices) == PENTAGON_VERTICES

    def test_pentagon_area(self):
        r, s = volume(fiber_polytope(PENTAGON_L, (10, 9, 9)))
        assert r * r * s == 33 ** 2
        assert FiberMap(PENTAGON_L).density((10, 9, 9)) == Fraction(11, 2)


class TestEnumeration:
    def test_unit_square(self):
        V = vertex_enumeration(unit_cube(2))
        assert set(V.vertices) == {F(0, 0), F(0, 1), F(1, 0), F(1, 1)}

    def test_infeasible_is_empty(self):
        H = HPolyhedron(1, (((1,), 2), ((-1,), 0)))
        assert vertex_enumeration(H).is_empty

    def test_line_raises(self):
        with pytest.raises(DegenerateInputError):
            vertex_enumeration(HPolyhedron(2, (((1, 0), 0),)))

    def test_cone_rays(self):
        V = vertex_enumeration(HPolyhedron.cone([(1, 0), (-1, 2)]))
        assert V.vertices == (F(0, 0),)
        assert set(V.rays) == {F(0, 1), F(2, 1)}


class TestVolume:
    def test_cubes_and_simplices(self):
        for d in (1, 2, 3):
            assert volume(vertex_enumeration(unit_cube(d))) == (1, 1)
        assert volume(std_simplex(3)) == (Fraction(1, 6), 1)

    def test_empty_has_zero_volume(self):
        assert volume(VPolytope(2))[0] == 0

    def test_monomial_integrals(self):
        assert integrate_monomial(std_simplex(2), (1, 1)) == (Fraction(1, 24), 1)
        assert integrate_monomial(vertex_enumeration(unit_cube(2)), (1, 1)) == (Fraction(1, 4), 1)

    def test_pentagon_first_coordinate_two_ways(self):
        # fiber integral of u1 against the replicated-column density
        from rieszlab.kernels import replicate_columns

        fm = FiberMap(PENTAGON_L)
        direct = fm.integrate((10, 9, 9), (1, 0, 0, 0, 0))
        replicated = FiberMap(replicate_columns(PENTAGON_L, (2, 1, 1, 1, 1))).density((10, 9, 9))
        assert direct == replicated
        r, s = integrate_monomial(fiber_polytope(PENTAGON_L, (10, 9, 9)), (1, 0, 0, 0, 0))
        assert r * r * s == (direct * 6) ** 2

    @given(
        st.lists(
            st.tuples(st.integers(-6, 6), st.integers(-6, 6), st.integers(-6, 6)),
            min_size=4, max_size=8, unique=True,
        ),
        st.permutations(range(8)),
        st.sampled_from([
            ((1, 0, 0), (0, 1, 0), (0, 0, 1)),
            ((1, 2, 0), (0, 1, 0), (0, 3, 1)),
            ((0, 1, 0), (1, 0, 0), (-1, -1, 1)),
            ((2, 1, 1), (1, 1, 0), (1, 0, 1)),  # det 0 -> skipped
        ]),
    )
    def test_volume_invariance(self, pts, perm, U):
        from rieszlab.exactalg import determinant, rank

        pts = [F(*p) for p in pts]
        if rank([[a - b for a, b in zip(p, pts[0])] for p in pts[1:]]) < 3:
            return
        H = facet_enumeration(VPolytope(3, tuple(pts)))
        V = vertex_enumeration(H)
        base = volume(V)
        order = [i for i in perm if i < len(V.vertices)]
        shuffled = VPolytope(3, tuple(V.vertices[i] for i in order))
        assert volume(shuffled) == base
        if abs(determinant([list(r) for r in U])) == 1:
            moved = VPolytope(3, tuple(tuple(matvec([list(r) for r in U], v)) for v in V.vertices))
            assert volume(moved) == base
        assert integrate_monomial(V, (0, 0, 0)) == base

    def test_chart_triangulation_covers_polytope(self):
        C = ChartPolytope.from_vertices([F(0, 0), F(2, 0), F(2, 1), F(0, 1), F(1, 2)])
        assert C.volume() == 3
        assert len(C.triangulate()) == 3
