"""Hyperbolic polynomials: sampled hyperbolicity checks and cone membership."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

from .exactalg import (
    SparsePoly,
    StructuralError,
    as_vector,
    is_real_rooted,
    random_rational,
    seeded_rng,
    squarefree_part,
    sturm_distinct_real_roots,
)


def elementary_symmetric(m: int, n: int, variables=None) -> SparsePoly:
    """E_{m,n}: sum of all products of m distinct variables among n."""
    if not 0 <= m <= n:
        raise ValueError(f"elementary symmetric E_{{m,n}} needs 0 <= m <= n, got m={m}, n={n}")
    variables = tuple(variables or SparsePoly.default_variables(n))
    terms = {}
    for combo in itertools.combinations(range(n), m):
        terms[tuple(int(i in combo) for i in range(n))] = 1
    return SparsePoly(variables, terms)


def symmetric_determinant(m: int) -> SparsePoly:
    """det of a symmetric m x m matrix in its upper-triangular entries x_ij (i <= j), row-major."""
    names = tuple(f"x{i + 1}{j + 1}" for i in range(m) for j in range(i, m))
    index = {}
    k = 0
    for i in range(m):
        for j in range(i, m):
            index[(i, j)] = index[(j, i)] = k
            k += 1
    total = SparsePoly(names, {})
    for perm in itertools.permutations(range(m)):
        sign = 1
        for a in range(m):
            for b in range(a + 1, m):
                if perm[a] > perm[b]:
                    sign = -sign
        term = SparsePoly.constant(names, sign)
        for i in range(m):
            term = term * SparsePoly.variable(names, index[(i, perm[i])])
        total = total + term
    return total


def identity_point(m: int) -> tuple[Fraction, ...]:
    return tuple(Fraction(int(i == j)) for i in range(m) for j in range(i, m))


@dataclass(frozen=True)
class HyperbolicInstance:
    p: SparsePoly
    e: tuple

    def __post_init__(self):
        object.__setattr__(self, "e", as_vector(self.e))
        if len(self.e) != self.p.nvars:
            raise StructuralError("direction length must equal the number of variables")
        if not self.p.is_homogeneous():
            raise StructuralError("hyperbolic polynomials must be homogeneous")

    @property
    def degree(self) -> int:
        return self.p.degree()

    def line(self, x):
        """t -> p(t e - x)."""
        return self.p.restrict_line(tuple(-v for v in as_vector(x)), self.e)


@dataclass
class HyperbolicityReport:
    passed: bool
    trials: int
    seed: int
    witness: tuple | None = None
    nonreal_roots: int | None = None
    reason: str = ""

    def to_dict(self) -> dict:
        from .exactalg import rational_str

        return {
            "passed": self.passed,
            "trials": self.trials,
            "seed": self.seed,
            "witness": None if self.witness is None else [rational_str(v) for v in self.witness],
            "nonreal_roots": self.nonreal_roots,
            "reason": self.reason,
        }


def hyperbolicity_check(inst: HyperbolicInstance, trials: int = 200, seed: int = 0) -> HyperbolicityReport:
    """Test real-rootedness of t -> p(t e - x) at seeded rational x in [-10, 10]^n.

    Failure is certified by an exact witness; passing is evidence only.
    """
    pe = inst.p.evaluate(inst.e)
    if pe <= 0:
        return HyperbolicityReport(False, 0, seed, reason=f"p(e) = {pe} is not positive")
    rng = seeded_rng(seed)
    n = inst.p.nvars
    candidates = [tuple(Fraction(int(i == j)) for j in range(n)) for i in range(n)]
    for trial in range(trials):
        if trial < len(candidates):
            x = candidates[trial]
        else:
            x = tuple(random_rational(rng, -10, 10) for _ in range(n))
        q = inst.line(x)
        if not is_real_rooted(q):
            sq = squarefree_part(q)
            real = sturm_distinct_real_roots(sq)
            return HyperbolicityReport(
                False, trial + 1, seed, witness=x, nonreal_roots=sq.degree() - real,
                reason="t -> p(t e - x) has nonreal roots",
            )
    return HyperbolicityReport(True, trials, seed)


def cone_membership(inst: HyperbolicInstance, x) -> bool:
    """x is in the open hyperbolicity cone iff every root of p(t e - x) is real and positive."""
    q = inst.line(x)
    if q.is_zero():
        return False
    if q(0) == 0:
        return False
    sq = squarefree_part(q)
    total = sturm_distinct_real_roots(sq)
    if total != sq.degree():
        return False
    return sturm_distinct_real_roots(sq, (Fraction(0), math.inf)) == total
