"""Circuits, circuit polynomials and Orlik-Terao ideal generators of a matrix."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

from .exactalg import SparsePoly, StructuralError, as_vector, nullspace, primitive_integer, rank
from .polyhedra import as_matrix, columns

MAX_COLUMNS = 16


@dataclass(frozen=True)
class Circuit:
    support: tuple[int, ...]  # 0-based column indices, sorted
    coefficients: tuple[int, ...]  # one per support index

    def relation_holds(self, L) -> bool:
        cols = columns(as_matrix(L))
        n = len(cols[0])
        return all(
            sum(c * cols[i][r] for i, c in zip(self.support, self.coefficients)) == 0 for r in range(n)
        )


def circuits(L) -> list[Circuit]:
    """All minimal dependent column sets with their primitive dependence (first coefficient positive)."""
    L = as_matrix(L)
    cols = columns(L)
    m = len(cols)
    if m > MAX_COLUMNS:
        raise StructuralError(f"circuit enumeration is limited to {MAX_COLUMNS} columns (got {m})")
    n = len(L)
    found = []
    for size in range(1, min(n + 1, m) + 1):
        for support in itertools.combinations(range(m), size):
            M = [[cols[i][r] for i in support] for r in range(n)]
            ker = nullspace(M)
            if len(ker) != 1 or any(v == 0 for v in ker[0]):
                continue
            c = primitive_integer(ker[0])
            if c[0] < 0:
                c = tuple(-v for v in c)
            found.append(Circuit(support, c))
    return found


def circuit_polynomial(c: Circuit, m: int, variables=None) -> SparsePoly:
    """sum_i c_i prod_{j in support, j != i} z_j, with the first term (in term order) positive."""
    if any(i >= m for i in c.support):
        raise StructuralError("circuit refers to a column beyond m")
    z = tuple(variables or SparsePoly.default_variables(m, "z"))
    terms = {}
    for i, coef in zip(c.support, c.coefficients):
        exp = tuple(int(j in c.support and j != i) for j in range(m))
        terms[exp] = coef
    p = SparsePoly(z, terms)
    lead = next(iter(p.terms.values()))
    return -p if lead < 0 else p


def orlik_terao_generators(L) -> list[SparsePoly]:
    L = as_matrix(L)
    m = len(L[0])
    return [circuit_polynomial(c, m) for c in circuits(L)]


def reciprocal_substitution(p: SparsePoly, L, x) -> Fraction:
    """Value of p at z_i = 1 / <l_i, x>, multiplied by prod_i <l_i, x>^deg (clears denominators)."""
    cols = columns(as_matrix(L))
    x = as_vector(x)
    vals = [sum((a * b for a, b in zip(col, x)), Fraction(0)) for col in cols]
    if any(v == 0 for v in vals):
        raise ZeroDivisionError("x lies on the zero set of a linear form")
    z = [1 / v for v in vals]
    scale = math.prod(vals)
    return p.evaluate(z) * scale


def independent_proper_subsets(c: Circuit, L) -> bool:
    cols = columns(as_matrix(L))
    for i in range(len(c.support)):
        sub = [cols[j] for k, j in enumerate(c.support) if k != i]
        if sub and rank(sub) != len(sub):
            return False
    return True


def convolve_univariate(p: SparsePoly, q: SparsePoly) -> SparsePoly:
    """(p * q)(y) = int_0^y p(t) q(y - t) dt for univariate polynomial kernels, exactly."""
    if p.nvars != 1 or q.nvars != 1:
        raise StructuralError("univariate kernels only")
    out = {}
    for (a,), ca in p.items():
        for (b,), cb in q.items():
            # int_0^y t^a (y-t)^b dt = a! b! / (a+b+1)! y^(a+b+1)
            coef = ca * cb * Fraction(math.factorial(a) * math.factorial(b), math.factorial(a + b + 1))
            out[(a + b + 1,)] = out.get((a + b + 1,), Fraction(0)) + coef
    return SparsePoly(p.variables, out)
