"""Exact polyhedral geometry over the rationals.

Chamber complexes of a matrix, fibers ``{u >= 0 : L u = y}``, vertex and
facet enumeration, fan triangulations, volumes and monomial integrals.
Sizes are small (n <= 4, m <= 8 in practice) so enumeration is brute force
over column or constraint subsets.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .exactalg import (
    SparsePoly,
    StructuralError,
    as_rational,
    as_vector,
    determinant,
    dot,
    inverse,
    matvec,
    nullspace,
    primitive_integer,
    rank,
    rref,
    solve,
)


class DegenerateInputError(ValueError):
    """Columns do not span the ambient space or span a non-pointed cone.

    In that situation the pushforward measure lives on a lower-dimensional
    set (or is not a measure on a proper cone) and has no density.
    """


def as_matrix(rows) -> tuple[tuple[Fraction, ...], ...]:
    M = tuple(as_vector(r) for r in rows)
    if M and len({len(r) for r in M}) != 1:
        raise StructuralError("ragged matrix")
    return M


def columns(L) -> list[tuple[Fraction, ...]]:
    return [tuple(col) for col in zip(*L)]


@dataclass(frozen=True)
class HPolyhedron:
    """``{x : <a, x> >= b for (a, b) in inequalities, <c, x> = d for (c, d) in equalities}``."""

    dim: int
    inequalities: tuple = ()
    equalities: tuple = ()

    def __post_init__(self):
        for a, _ in self.inequalities + self.equalities:
            if len(a) != self.dim:
                raise StructuralError("normal length does not match dimension")
            if all(x == 0 for x in a):
                raise StructuralError("zero normal")

    @classmethod
    def cone(cls, normals) -> "HPolyhedron":
        normals = [as_vector(w) for w in normals]
        return cls(len(normals[0]), tuple((w, Fraction(0)) for w in normals))

    def contains(self, x, strict: bool = False) -> bool:
        x = as_vector(x)
        for a, b in self.inequalities:
            v = dot(a, x)
            if v < b or (strict and v == b):
                return False
        return all(dot(c, x) == d for c, d in self.equalities)


@dataclass(frozen=True)
class VPolytope:
    dim: int
    vertices: tuple = ()
    rays: tuple = ()

    @property
    def is_empty(self) -> bool:
        return not self.vertices

    @property
    def bounded(self) -> bool:
        return not self.rays


# ---------------------------------------------------------------------------
# Vertex / facet enumeration


def _dedupe_points(points):
    seen = {}
    for p in points:
        seen.setdefault(tuple(p), None)
    return sorted(seen)


def vertex_enumeration(P: HPolyhedron) -> VPolytope:
    """Vertices and extreme rays of a pointed polyhedron (empty if infeasible)."""
    d = P.dim
    eqs = [(as_vector(c), as_rational(v)) for c, v in P.equalities]
    ineqs = [(as_vector(a), as_rational(b)) for a, b in P.inequalities]
    normals = [c for c, _ in eqs] + [a for a, _ in ineqs]
    if rank(normals) < d:
        raise DegenerateInputError("polyhedron contains a line; it has no vertices")
    r = rank([c for c, _ in eqs]) if eqs else 0

    def feasible(x):
        return all(dot(a, x) >= b for a, b in ineqs) and all(dot(c, x) == v for c, v in eqs)

    vertices = []
    for combo in itertools.combinations(range(len(ineqs)), d - r):
        rows = [c for c, _ in eqs] + [ineqs[i][0] for i in combo]
        rhs = [v for _, v in eqs] + [ineqs[i][1] for i in combo]
        if rank(rows) < d:
            continue
        x = solve(rows, rhs)
        if x is not None and feasible(x):
            vertices.append(tuple(x))
    vertices = _dedupe_points(vertices)

    rays = []
    if vertices:
        for combo in itertools.combinations(range(len(ineqs)), d - r - 1):
            rows = [c for c, _ in eqs] + [ineqs[i][0] for i in combo]
            if rows and rank(rows) != d - 1:
                continue
            ker = nullspace(rows) if rows else [tuple(Fraction(int(i == j)) for j in range(d)) for i in range(d)]
            if len(ker) != 1:
                continue
            for sign in (1, -1):
                ray = tuple(sign * x for x in ker[0])
                if all(dot(a, ray) >= 0 for a, _ in ineqs):
                    rays.append(tuple(Fraction(v) for v in primitive_integer(ray)))
        rays = _dedupe_points(rays)
    return VPolytope(d, tuple(vertices), tuple(rays))


def _affine_chart(points, directions=()):
    """Pivot-coordinate chart of the affine hull of points (+ directions).

    Returns (pivots, R, base) where R is the RREF basis of the direction
    space; a point of the hull is ``base + sum_j (z_j - base[p_j]) R_j``.
    """
    base = points[0]
    D = [tuple(p - b for p, b in zip(q, base)) for q in points[1:]] + [tuple(r) for r in directions]
    D = [row for row in D if any(row)]
    if not D:
        return [], [], base
    R, pivots = rref(D)
    return pivots, [tuple(row) for row in R[: len(pivots)]], base


def _gram(R) -> Fraction:
    if not R:
        return Fraction(1)
    return determinant([[dot(a, b) for b in R] for a in R])


def facet_enumeration(V: VPolytope) -> HPolyhedron:
    """Irredundant H-representation of a polytope or pointed polyhedron."""
    d = V.dim
    if V.is_empty:
        e0 = tuple(Fraction(int(i == 0)) for i in range(d))
        return HPolyhedron(d, ((e0, Fraction(1)), (tuple(-x for x in e0), Fraction(0))))
    verts = [as_vector(v) for v in V.vertices]
    rays = [as_vector(r) for r in V.rays]
    pivots, R, base = _affine_chart(verts, rays)
    k = len(pivots)
    # equalities: normals orthogonal to the direction space
    if R:
        eq_normals = nullspace(R)
    else:
        eq_normals = [tuple(Fraction(int(i == j)) for j in range(d)) for i in range(d)]
    equalities = tuple(
        (tuple(Fraction(x) for x in primitive_integer(w)), dot(primitive_integer(w), base))
        for w in eq_normals
    )
    zv = [tuple(v[p] for p in pivots) for v in verts]
    zr = [tuple(r[p] for p in pivots) for r in rays]
    gens = [(z, True) for z in zv] + [(z, False) for z in zr]
    facets = {}
    if k >= 1:
        for combo in itertools.combinations(range(len(gens)), k):
            pts = [gens[i][0] for i in combo if gens[i][1]]
            if not pts:
                continue
            p0 = pts[0]
            rows = [tuple(a - b for a, b in zip(p, p0)) for p in pts[1:]]
            rows += [gens[i][0] for i in combo if not gens[i][1]]
            rows = [r for r in rows if any(r)]
            if k > 1 and (not rows or rank(rows) != k - 1):
                continue
            ker = nullspace(rows) if rows else [tuple(Fraction(int(i == j)) for j in range(k)) for i in range(k)]
            if len(ker) != 1:
                continue
            a = ker[0]
            for sign in (1, -1):
                aa = tuple(sign * x for x in a)
                b = dot(aa, p0)
                if all(dot(aa, z) >= b for z in zv) and all(dot(aa, z) >= 0 for z in zr):
                    scaled = primitive_integer(aa + (b,))
                    facets[scaled] = None
    inequalities = []
    for key in sorted(facets):
        a_chart, b = key[:-1], key[-1]
        normal = [Fraction(0)] * d
        for p, c in zip(pivots, a_chart):
            normal[p] = Fraction(c)
        # express in ambient terms relative to the chart base (pivot coords only)
        inequalities.append((tuple(normal), Fraction(b)))
    return HPolyhedron(d, tuple(inequalities), equalities)


# ---------------------------------------------------------------------------
# Triangulation, volume and monomial integration


class ChartPolytope:
    """A bounded polytope with vertices in pivot-chart coordinates and facet incidences."""

    def __init__(self, ambient_vertices, chart_vertices, k, facet_sets, gram=Fraction(1)):
        self.ambient = [tuple(v) for v in ambient_vertices]
        self.chart = [tuple(v) for v in chart_vertices]
        self.k = k
        self.facets = [frozenset(f) for f in facet_sets]
        self.gram = gram
        self._dim_cache: dict[frozenset, int] = {}

    @classmethod
    def from_vertices(cls, vertices) -> "ChartPolytope":
        verts = _dedupe_points(as_vector(v) for v in vertices)
        pivots, R, base = _affine_chart(verts)
        chart = [tuple(v[p] for p in pivots) for v in verts]
        k = len(pivots)
        facet_sets = []
        if k >= 1:
            H = facet_enumeration(VPolytope(k, tuple(chart)))
            for a, b in H.inequalities:
                facet_sets.append(frozenset(i for i, z in enumerate(chart) if dot(a, z) == b))
        return cls(verts, chart, k, facet_sets, _gram(R))

    def affine_dim(self, face: frozenset) -> int:
        if face not in self._dim_cache:
            pts = [self.chart[i] for i in sorted(face)]
            p0 = pts[0]
            rows = [tuple(a - b for a, b in zip(p, p0)) for p in pts[1:]]
            self._dim_cache[face] = rank(rows) if rows and rows[0] else 0
        return self._dim_cache[face]

    def triangulate(self) -> list[tuple[int, ...]]:
        """Fan triangulation, recursively coned from the lexicographically least vertex."""
        if not self.chart:
            return []
        memo: dict[frozenset, list] = {}

        def tri(face: frozenset, dim: int):
            if face in memo:
                return memo[face]
            if len(face) == dim + 1:
                out = [tuple(sorted(face))]
            else:
                apex = min(face, key=lambda i: self.ambient[i])
                subfaces = {}
                for F in self.facets:
                    G = face & F
                    if apex in G or len(G) < dim or G in subfaces:
                        continue
                    if self.affine_dim(G) == dim - 1:
                        subfaces[G] = None
                out = []
                for G in subfaces:
                    for s in tri(G, dim - 1):
                        out.append((apex,) + s)
            memo[face] = out
            return out

        return tri(frozenset(range(len(self.chart))), self.k)

    def simplex_volume(self, simplex) -> Fraction:
        p0 = self.chart[simplex[0]]
        rows = [[a - b for a, b in zip(self.chart[i], p0)] for i in simplex[1:]]
        det = determinant(rows) if rows else Fraction(1)
        return abs(det) / math.factorial(self.k)

    def volume(self) -> Fraction:
        return sum((self.simplex_volume(s) for s in self.triangulate()), Fraction(0))

    def integrate_affine_monomial(self, forms, exponents) -> Fraction:
        """Exact integral of prod_i form_i(x)^e_i over the polytope (chart measure).

        ``forms[i]`` gives the value of the i-th affine function at each vertex
        (a list indexed by vertex); the functions are affine so on each simplex
        they expand in barycentric coordinates.
        """
        k = self.k
        total = Fraction(0)
        lam = SparsePoly.default_variables(k + 1, "l")
        for simplex in self.triangulate():
            vol = self.simplex_volume(simplex)
            if not vol:
                continue
            integrand = SparsePoly.constant(lam, 1)
            for values, e in zip(forms, exponents):
                if e:
                    lin = SparsePoly.linear_form(lam, [values[i] for i in simplex])
                    integrand = integrand * lin ** e
            acc = Fraction(0)
            for beta, c in integrand.items():
                num = math.prod(math.factorial(b) for b in beta)
                acc += c * Fraction(num, math.factorial(k + sum(beta)))
            total += vol * math.factorial(k) * acc
        return total


def volume(P: VPolytope, measure: str = "lebesgue_in_affine_hull") -> tuple[Fraction, Fraction]:
    """Volume ``r * sqrt(s)`` of a bounded polytope in its affine hull, as ``(r, s)``."""
    if measure != "lebesgue_in_affine_hull":
        raise ValueError(f"unsupported measure {measure!r}")
    if not P.bounded:
        raise StructuralError("volume of an unbounded polyhedron")
    if P.is_empty:
        return Fraction(0), Fraction(1)
    C = ChartPolytope.from_vertices(P.vertices)
    return C.volume(), C.gram


def integrate_monomial(P: VPolytope, exponents: Sequence[int]) -> tuple[Fraction, Fraction]:
    """Exact ``(r, s)`` with ``r * sqrt(s)`` = integral of prod u_i^e_i over P (affine-hull measure)."""
    if len(exponents) != P.dim:
        raise StructuralError("exponent vector length must equal the ambient dimension")
    if P.is_empty:
        return Fraction(0), Fraction(1)
    C = ChartPolytope.from_vertices(P.vertices)
    forms = [[v[i] for v in C.ambient] for i in range(P.dim)]
    return C.integrate_affine_monomial(forms, exponents), C.gram


# ---------------------------------------------------------------------------
# Fibers of a linear map restricted to the orthant


class FiberMap:
    """Precomputed data for the fibers ``{u in R^m_{>=0} : L u = y}`` of a fixed matrix.

    Coordinates on a fiber are the free (non-pivot) coordinates of u, so the
    fiber measure used here is Lebesgue measure ``dt`` on those coordinates.
    The pushforward density of Lebesgue measure on the orthant is then
    ``vol_t(fiber) / |det L_P|`` with ``L_P`` the pivot columns.
    """

    def __init__(self, L):
        self.L = as_matrix(L)
        self.n = len(self.L)
        self.m = len(self.L[0]) if self.L else 0
        if rank(self.L) < self.n:
            raise DegenerateInputError(
                "columns do not span the ambient space; the measure has no density"
            )
        _, pivots = rref(self.L)
        self.pivots = tuple(pivots)
        self.free = tuple(i for i in range(self.m) if i not in pivots)
        LP = [[row[p] for p in self.pivots] for row in self.L]
        self.det_pivot = abs(determinant(LP))
        self.bases = []
        cols = columns(self.L)
        for combo in itertools.combinations(range(self.m), self.n):
            B = [[cols[c][r] for c in combo] for r in range(self.n)]
            if determinant(B) != 0:
                self.bases.append((combo, inverse(B)))

    @property
    def fiber_dim(self) -> int:
        return self.m - self.n

    def gram_free(self) -> Fraction:
        """det(B^T B) for the nullspace basis with identity on the free rows."""
        LP = [[row[p] for p in self.pivots] for row in self.L]
        LPinv = inverse(LP)
        LF = [[row[f] for f in self.free] for row in self.L]
        X = [[dot(r, [LF[k][j] for k in range(self.n)]) for j in range(len(self.free))] for r in LPinv]
        d = len(self.free)
        G = [[Fraction(int(i == j)) + sum((X[k][i] * X[k][j] for k in range(self.n)), Fraction(0))
              for j in range(d)] for i in range(d)]
        return determinant(G) if d else Fraction(1)

    def vertices(self, y) -> list[tuple[Fraction, ...]]:
        y = as_vector(y)
        if len(y) != self.n:
            raise StructuralError(f"y has {len(y)} coordinates, expected {self.n}")
        out = []
        for combo, inv in self.bases:
            uB = matvec(inv, y)
            if all(v >= 0 for v in uB):
                u = [Fraction(0)] * self.m
                for c, v in zip(combo, uB):
                    u[c] = v
                out.append(tuple(u))
        return _dedupe_points(out)

    def chart(self, y) -> ChartPolytope | None:
        """The fiber in free coordinates, or None when it is not full-dimensional there."""
        verts = self.vertices(y)
        if not verts:
            return None
        chart = [tuple(v[f] for f in self.free) for v in verts]
        k = self.fiber_dim
        C = ChartPolytope(verts, chart, k, [], Fraction(1))
        if k == 0:
            return C
        full = frozenset(range(len(verts)))
        if len(verts) < k + 1 or C.affine_dim(full) < k:
            return None
        facets = {}
        for i in range(self.m):
            T = frozenset(j for j, v in enumerate(verts) if v[i] == 0)
            if len(T) >= k and T not in facets and C.affine_dim(T) == k - 1:
                facets[T] = None
        C.facets = list(facets)
        return C

    def density(self, y) -> Fraction:
        """Pushforward density of Lebesgue measure on the orthant at y."""
        C = self.chart(y)
        if C is None:
            return Fraction(0)
        return C.volume() / self.det_pivot

    def integrate(self, y, exponents) -> Fraction:
        """Integral of prod u_i^e_i over the fiber, divided by |det L_P|."""
        C = self.chart(y)
        if C is None:
            return Fraction(0)
        forms = [[v[i] for v in C.ambient] for i in range(self.m)]
        return C.integrate_affine_monomial(forms, exponents) / self.det_pivot


def fiber_polytope(L, y) -> VPolytope:
    """V-representation of ``{u >= 0 : L u = y}`` (empty if y is outside cone(L))."""
    L = as_matrix(L)
    y = as_vector(y)
    if len(y) != len(L):
        raise StructuralError(f"y has {len(y)} coordinates, L has {len(L)} rows")
    fm = FiberMap(L)
    return VPolytope(fm.m, tuple(fm.vertices(y)))


# ---------------------------------------------------------------------------
# Cones and chamber complexes


def _orient(w):
    w = primitive_integer(w)
    for x in w:
        if x:
            return w if x > 0 else tuple(-v for v in w)
    return w


def _hyperplane_normal(vectors, n):
    """Normal of the hyperplane spanned by n-1 vectors, or None if they are dependent."""
    if n == 1:
        return (1,)
    if rank(vectors) != n - 1:
        return None
    ker = nullspace(vectors)
    return _orient(ker[0])


def cone_rays(normals, n) -> list[tuple[int, ...]]:
    """Extreme rays (primitive integer) of the pointed cone ``{<w, y> >= 0}``."""
    normals = [as_vector(w) for w in normals]
    if n == 1:
        rays = [r for r in ((1,), (-1,)) if all(dot(w, r) >= 0 for w in normals)]
        return rays
    rays = {}
    for combo in itertools.combinations(normals, n - 1):
        if rank(list(combo)) != n - 1:
            continue
        r = nullspace(list(combo))[0]
        for sign in (1, -1):
            rr = tuple(sign * x for x in r)
            if all(dot(w, rr) >= 0 for w in normals):
                rays[primitive_integer(rr)] = None
    return sorted(rays)


def cone_facets(normals, rays, n) -> list[tuple[int, ...]]:
    """Irredundant normals: those whose tight rays span a hyperplane."""
    out = {}
    for w in normals:
        w = primitive_integer(w)
        tight = [r for r in rays if dot(w, r) == 0]
        if n == 1 or (tight and rank(tight) == n - 1):
            out[w] = None
    return sorted(out)


@dataclass
class ChamberComplex:
    """Maximal chambers of a matrix, as closed pointed cones with adjacency."""

    L: tuple
    cells: list  # list of tuples of primitive integer inward normals
    rays: list  # extreme rays per cell
    walls: list  # (i, j, normal) with normal pointing into cell i
    cone_normals: list = field(default_factory=list)
    hyperplanes: list = field(default_factory=list)

    @property
    def maximal_cells(self) -> list[HPolyhedron]:
        return [HPolyhedron.cone(c) for c in self.cells]

    def adjacent(self, i) -> list[int]:
        out = set()
        for a, b, _ in self.walls:
            if a == i:
                out.add(b)
            elif b == i:
                out.add(a)
        return sorted(out)

    def locate(self, y) -> list[int]:
        """Indices of every cell whose closure contains y."""
        y = as_vector(y)
        return [i for i, c in enumerate(self.cells) if all(dot(w, y) >= 0 for w in c)]

    def in_cone(self, y, strict=False) -> bool:
        y = as_vector(y)
        vals = [dot(w, y) for w in self.cone_normals]
        return all(v > 0 for v in vals) if strict else all(v >= 0 for v in vals)

    def on_wall(self, y) -> bool:
        y = as_vector(y)
        return any(dot(h, y) == 0 for h in self.hyperplanes)

    def interior_points(self, cell: int, count: int, seed: int, max_weight: int = 7):
        """Deterministic integer points strictly inside a cell."""
        rng = random.Random(seed)
        rays = self.rays[cell]
        pts = []
        while len(pts) < count:
            weights = [rng.randint(1, max_weight) for _ in rays]
            p = tuple(Fraction(sum(w * r[i] for w, r in zip(weights, rays))) for i in range(len(rays[0])))
            if p not in pts:
                pts.append(p)
        return pts


def cone_of_columns(L):
    """Facet normals of cone(L); raises if the cone is not full-dimensional and pointed."""
    L = as_matrix(L)
    n = len(L)
    cols = columns(L)
    if any(all(x == 0 for x in c) for c in cols):
        raise DegenerateInputError("zero column")
    if rank(L) < n:
        raise DegenerateInputError(
            "columns do not span the ambient space; the Riesz measure has no density"
        )
    facets = {}
    if n == 1:
        signs = {c[0] > 0 for c in cols}
        if len(signs) > 1:
            raise DegenerateInputError("cone spanned by the columns is not pointed")
        facets[(1,) if signs.pop() else (-1,)] = None
    else:
        for combo in itertools.combinations(cols, n - 1):
            w = _hyperplane_normal(list(combo), n)
            if w is None:
                continue
            vals = [dot(w, c) for c in cols]
            if all(v >= 0 for v in vals):
                facets[w] = None
            elif all(v <= 0 for v in vals):
                facets[tuple(-x for x in w)] = None
    normals = sorted(facets)
    c = [sum(w[i] for w in normals) for i in range(n)]
    if not normals or any(dot(c, col) <= 0 for col in cols):
        raise DegenerateInputError("cone spanned by the columns is not pointed")
    return normals


def chamber_complex(L, seed: int = 0) -> ChamberComplex:
    """Enumerate the maximal chambers of L by breadth-first wall crossing."""
    L = as_matrix(L)
    n = len(L)
    cols = columns(L)
    cone_normals = cone_of_columns(L)
    hyperplanes = {}
    if n > 1:
        for combo in itertools.combinations(cols, n - 1):
            w = _hyperplane_normal(list(combo), n)
            if w is not None:
                hyperplanes[w] = None
    hyperplanes = sorted(hyperplanes)
    bases = []
    for combo in itertools.combinations(range(len(cols)), n):
        B = [[cols[c][r] for c in combo] for r in range(n)]
        if determinant(B) != 0:
            bases.append([primitive_integer(row) for row in inverse(B)])
    rng = random.Random(seed)

    def generic(y):
        return all(dot(h, y) != 0 for h in hyperplanes)

    def chamber_of(y):
        normals = set(cone_normals)
        for rows in bases:
            if all(dot(r, y) > 0 for r in rows):
                normals.update(rows)
        normals = sorted(normals)
        rays = cone_rays(normals, n)
        facets = cone_facets(normals, rays, n)
        return tuple(facets), rays

    y0 = None
    for _ in range(1000):
        y = tuple(sum((Fraction(rng.randint(1, 97)) * c[i] for c in cols), Fraction(0)) for i in range(n))
        if generic(y):
            y0 = y
            break
    if y0 is None:
        raise DegenerateInputError("could not find a generic interior point")

    cone_set = set(cone_normals)
    first = chamber_of(y0)
    index = {first[0]: 0}
    cells = [first[0]]
    rays_of = [first[1]]
    walls = {}
    queue = [0]
    while queue:
        i = queue.pop(0)
        for w in cells[i]:
            if w in cone_set:
                continue
            tight = [r for r in rays_of[i] if dot(w, r) == 0]
            p = None
            for _ in range(1000):
                weights = [rng.randint(1, 97) for _ in tight]
                cand = tuple(Fraction(sum(a * r[j] for a, r in zip(weights, tight))) for j in range(n))
                if all(dot(h, cand) != 0 for h in hyperplanes if h != _orient(w)):
                    p = cand
                    break
            if p is None:
                raise DegenerateInputError("could not find a generic point on a wall")
            ww = sum(x * x for x in w)
            eps = None
            for h in hyperplanes:
                hw = dot(h, w)
                hp = dot(h, p)
                if hw and hp:
                    bound = abs(hp) / abs(hw)
                    eps = bound if eps is None else min(eps, bound)
            eps = (eps or Fraction(1)) / 2
            y = tuple(pi - eps * wi for pi, wi in zip(p, w))
            assert generic(y) and ww
            key, rays = chamber_of(y)
            if key not in index:
                index[key] = len(cells)
                cells.append(key)
                rays_of.append(rays)
                queue.append(index[key])
            j = index[key]
            pair = (min(i, j), max(i, j))
            normal = w if pair[0] == i else tuple(-x for x in w)
            walls[pair] = normal

    order = sorted(range(len(cells)), key=lambda i: cells[i])
    remap = {old: new for new, old in enumerate(order)}
    new_walls = []
    for (a, b), w in walls.items():
        na, nb = remap[a], remap[b]
        if na > nb:
            na, nb, w = nb, na, tuple(-x for x in w)
        new_walls.append((na, nb, w))
    new_walls.sort()
    return ChamberComplex(
        L=L,
        cells=[cells[i] for i in order],
        rays=[rays_of[i] for i in order],
        walls=new_walls,
        cone_normals=cone_normals,
        hyperplanes=hyperplanes,
    )
