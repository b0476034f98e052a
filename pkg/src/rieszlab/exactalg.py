"""Exact rational arithmetic: sparse polynomials, linear algebra, Sturm chains.

Every coefficient is a :class:`fractions.Fraction`.  Polynomials are immutable
value objects; arithmetic returns new instances in canonical form (no stored
zero coefficients, terms ordered graded-lexicographically).
"""

from __future__ import annotations

import itertools
import math
import random
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

Rational = Fraction


class StructuralError(ValueError):
    """Operands have incompatible shapes or variable lists."""


class InterpolationError(ArithmeticError):
    """The interpolation system is rank deficient or inconsistent."""


def as_rational(value) -> Fraction:
    """Coerce ints, Fractions and ``"num/den"`` strings to a Fraction.

    Floats are accepted only when they are exactly representable integers or
    dyadic values the caller explicitly wants; they convert exactly.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    if isinstance(value, float):
        return Fraction(value)
    raise TypeError(f"cannot interpret {value!r} as a rational")


def rational_str(q: Fraction) -> str:
    q = as_rational(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def as_vector(values: Iterable) -> tuple[Fraction, ...]:
    return tuple(as_rational(v) for v in values)


def primitive_integer(vec: Sequence[Fraction]) -> tuple[int, ...]:
    """Scale a rational vector to the primitive integer vector on its ray."""
    vec = as_vector(vec)
    if all(v == 0 for v in vec):
        return tuple(0 for _ in vec)
    lcm = 1
    for v in vec:
        lcm = lcm * v.denominator // math.gcd(lcm, v.denominator)
    ints = [int(v * lcm) for v in vec]
    g = 0
    for i in ints:
        g = math.gcd(g, i)
    return tuple(i // g for i in ints)


def dot(u: Sequence, v: Sequence):
    return sum((a * b for a, b in zip(u, v)), Fraction(0))


# ---------------------------------------------------------------------------
# Sparse multivariate polynomials


def _grlex_key(exp: tuple[int, ...]):
    # descending total degree, then descending lex
    return (-sum(exp), tuple(-e for e in exp))


class SparsePoly:
    """Multivariate polynomial with Fraction coefficients over named variables."""

    __slots__ = ("variables", "_terms", "_hash")

    def __init__(self, variables: Sequence[str], terms: Mapping[tuple[int, ...], object] | None = None):
        self.variables = tuple(variables)
        n = len(self.variables)
        clean: dict[tuple[int, ...], Fraction] = {}
        for exp, c in (terms or {}).items():
            exp = tuple(int(e) for e in exp)
            if len(exp) != n:
                raise StructuralError(f"exponent {exp} does not match {n} variables")
            if any(e < 0 for e in exp):
                raise StructuralError(f"negative exponent in {exp}")
            c = as_rational(c)
            if c:
                clean[exp] = clean.get(exp, Fraction(0)) + c
                if not clean[exp]:
                    del clean[exp]
        self._terms = {k: clean[k] for k in sorted(clean, key=_grlex_key)}
        self._hash = None

    # construction helpers -------------------------------------------------
    @classmethod
    def _raw(cls, variables, terms: dict) -> "SparsePoly":
        obj = cls.__new__(cls)
        obj.variables = variables
        obj._terms = {k: terms[k] for k in sorted(terms, key=_grlex_key)}
        obj._hash = None
        return obj

    @classmethod
    def constant(cls, variables: Sequence[str], c) -> "SparsePoly":
        return cls(variables, {(0,) * len(variables): c})

    @classmethod
    def variable(cls, variables: Sequence[str], index: int) -> "SparsePoly":
        exp = [0] * len(variables)
        exp[index] = 1
        return cls(variables, {tuple(exp): 1})

    @classmethod
    def linear_form(cls, variables: Sequence[str], coeffs: Sequence) -> "SparsePoly":
        n = len(variables)
        terms = {}
        for i, c in enumerate(coeffs):
            exp = [0] * n
            exp[i] = 1
            terms[tuple(exp)] = c
        return cls(variables, terms)

    @staticmethod
    def default_variables(n: int, prefix: str = "x") -> tuple[str, ...]:
        return tuple(f"{prefix}{i + 1}" for i in range(n))

    # inspection ----------------------------------------------------------
    @property
    def terms(self) -> dict[tuple[int, ...], Fraction]:
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    @property
    def nvars(self) -> int:
        return len(self.variables)

    def __len__(self) -> int:
        return len(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def degree(self) -> int:
        if not self._terms:
            return -1
        return max(sum(e) for e in self._terms)

    def is_homogeneous(self) -> bool:
        return len({sum(e) for e in self._terms}) <= 1

    def coefficient(self, exp: Sequence[int]) -> Fraction:
        return self._terms.get(tuple(exp), Fraction(0))

    def __eq__(self, other) -> bool:
        if isinstance(other, SparsePoly):
            return self.variables == other.variables and self._terms == other._terms
        if isinstance(other, (int, Fraction)):
            return self == SparsePoly.constant(self.variables, other)
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.variables, tuple(self._terms.items())))
        return self._hash

    # arithmetic ------------------------------------------------------------
    def _check(self, other: "SparsePoly"):
        if self.variables != other.variables:
            raise StructuralError(f"variable lists differ: {self.variables} vs {other.variables}")

    def _coerce(self, other) -> "SparsePoly":
        if isinstance(other, SparsePoly):
            self._check(other)
            return other
        return SparsePoly.constant(self.variables, as_rational(other))

    def __add__(self, other):
        other = self._coerce(other)
        out = dict(self._terms)
        for e, c in other._terms.items():
            v = out.get(e, 0) + c
            if v:
                out[e] = v
            else:
                out.pop(e, None)
        return SparsePoly._raw(self.variables, out)

    __radd__ = __add__

    def __neg__(self):
        return SparsePoly._raw(self.variables, {e: -c for e, c in self._terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, SparsePoly):
            c = as_rational(other)
            if not c:
                return SparsePoly._raw(self.variables, {})
            return SparsePoly._raw(self.variables, {e: c * v for e, v in self._terms.items()})
        self._check(other)
        out: dict = {}
        for e1, c1 in self._terms.items():
            for e2, c2 in other._terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, 0) + c1 * c2
        return SparsePoly._raw(self.variables, {e: c for e, c in out.items() if c})

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative powers are not polynomials")
        result = SparsePoly.constant(self.variables, 1)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def diff(self, index: int) -> "SparsePoly":
        if not 0 <= index < self.nvars:
            raise StructuralError(f"variable index {index} out of range")
        out = {}
        for e, c in self._terms.items():
            if e[index]:
                ne = list(e)
                ne[index] -= 1
                out[tuple(ne)] = c * e[index]
        return SparsePoly._raw(self.variables, out)

    def evaluate(self, point: Sequence) -> Fraction:
        if len(point) != self.nvars:
            raise StructuralError(f"point has {len(point)} coordinates, expected {self.nvars}")
        point = as_vector(point)
        total = Fraction(0)
        for e, c in self._terms.items():
            term = c
            for x, k in zip(point, e):
                if k:
                    term *= x ** k
            total += term
        return total

    __call__ = evaluate

    def evaluate_float(self, points):
        """Vectorised float evaluation; ``points`` has shape (..., nvars)."""
        import numpy as np

        pts = np.asarray(points, dtype=float)
        out = np.zeros(pts.shape[:-1])
        for e, c in self._terms.items():
            term = np.full(pts.shape[:-1], float(c))
            for i, k in enumerate(e):
                if k:
                    term = term * pts[..., i] ** k
            out = out + term
        return out

    def substitute(self, images: Sequence["SparsePoly"]) -> "SparsePoly":
        """Compose: replace variable i by ``images[i]`` (all over one variable list)."""
        if len(images) != self.nvars:
            raise StructuralError("need one image per variable")
        target = images[0].variables
        result = SparsePoly(target, {})
        cache: dict[tuple[int, int], SparsePoly] = {}
        for e, c in self._terms.items():
            term = SparsePoly.constant(target, c)
            for i, k in enumerate(e):
                if k:
                    if (i, k) not in cache:
                        cache[(i, k)] = images[i] ** k
                    term = term * cache[(i, k)]
            result = result + term
        return result

    def restrict_line(self, base: Sequence, direction: Sequence) -> "UnivariatePoly":
        """The univariate polynomial t -> p(base + t * direction)."""
        base = as_vector(base)
        direction = as_vector(direction)
        lines = [UnivariatePoly([b, d]) for b, d in zip(base, direction)]
        result = UnivariatePoly([])
        for e, c in self._terms.items():
            term = UnivariatePoly([c])
            for i, k in enumerate(e):
                if k:
                    term = term * lines[i] ** k
            result = result + term
        return result

    def __repr__(self):
        return f"SparsePoly({self})"

    def __str__(self):
        if not self._terms:
            return "0"
        parts = []
        for e, c in self._terms.items():
            mono = "*".join(
                v if k == 1 else f"{v}^{k}" for v, k in zip(self.variables, e) if k
            )
            if not mono:
                parts.append(rational_str(c))
            elif c == 1:
                parts.append(mono)
            elif c == -1:
                parts.append("-" + mono)
            else:
                parts.append(f"{rational_str(c)}*{mono}")
        return " + ".join(parts).replace("+ -", "- ")


def monomials(nvars: int, degree: int, homogeneous: bool = True) -> list[tuple[int, ...]]:
    """Exponent vectors of the given degree (or up to it), in graded lex order."""
    degrees = [degree] if homogeneous else range(degree + 1)
    out = []
    for d in degrees:
        for combo in itertools.combinations_with_replacement(range(nvars), d):
            exp = [0] * nvars
            for i in combo:
                exp[i] += 1
            out.append(tuple(exp))
    return sorted(set(out), key=_grlex_key)


# ---------------------------------------------------------------------------
# Univariate polynomials and Sturm sequences


class UnivariatePoly:
    """Dense univariate polynomial, coefficients lowest degree first."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable):
        c = [as_rational(x) for x in coeffs]
        while c and c[-1] == 0:
            c.pop()
        self.coeffs = tuple(c)

    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def leading(self) -> Fraction:
        return self.coeffs[-1] if self.coeffs else Fraction(0)

    def __eq__(self, other):
        return isinstance(other, UnivariatePoly) and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __repr__(self):
        return f"UnivariatePoly({[rational_str(c) for c in self.coeffs]})"

    def __add__(self, other):
        a, b = self.coeffs, other.coeffs
        n = max(len(a), len(b))
        return UnivariatePoly(
            (a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0) for i in range(n)
        )

    def __neg__(self):
        return UnivariatePoly(-c for c in self.coeffs)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if not isinstance(other, UnivariatePoly):
            c = as_rational(other)
            return UnivariatePoly(c * x for x in self.coeffs)
        if not self.coeffs or not other.coeffs:
            return UnivariatePoly([])
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(other.coeffs):
                    out[i + j] += a * b
        return UnivariatePoly(out)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        result = UnivariatePoly([1])
        for _ in range(k):
            result = result * self
        return result

    def __call__(self, t) -> Fraction:
        t = as_rational(t)
        acc = Fraction(0)
        for c in reversed(self.coeffs):
            acc = acc * t + c
        return acc

    def derivative(self) -> "UnivariatePoly":
        return UnivariatePoly(i * c for i, c in enumerate(self.coeffs) if i)

    def divmod(self, other: "UnivariatePoly"):
        if other.is_zero():
            raise ZeroDivisionError("division by the zero polynomial")
        rem = list(self.coeffs)
        dq = other.degree()
        lead = other.leading()
        quot = [Fraction(0)] * max(len(rem) - dq, 1)
        while len(rem) - 1 >= dq and any(rem):
            shift = len(rem) - 1 - dq
            factor = rem[-1] / lead
            quot[shift] = factor
            for i, c in enumerate(other.coeffs):
                rem[shift + i] -= factor * c
            rem.pop()
            while rem and rem[-1] == 0:
                rem.pop()
        return UnivariatePoly(quot), UnivariatePoly(rem)

    def monic(self) -> "UnivariatePoly":
        return self * (1 / self.leading()) if self.coeffs else self

    def primitive(self) -> "UnivariatePoly":
        """Scale to integer coefficients with gcd 1 and positive leading coefficient."""
        if not self.coeffs:
            return self
        ints = primitive_integer(self.coeffs)
        if ints[-1] < 0:
            ints = tuple(-i for i in ints)
        return UnivariatePoly(ints)

    def sign_at(self, t) -> int:
        """Sign at a rational point or at +-inf (``t`` = ``math.inf`` / ``-math.inf``)."""
        if not self.coeffs:
            return 0
        if t == math.inf:
            v = self.leading()
        elif t == -math.inf:
            v = self.leading() * (-1) ** self.degree()
        else:
            v = self(t)
        return (v > 0) - (v < 0)


def poly_gcd(a: UnivariatePoly, b: UnivariatePoly) -> UnivariatePoly:
    while not b.is_zero():
        a, b = b, a.divmod(b)[1]
    return a.monic()


def squarefree_part(q: UnivariatePoly) -> UnivariatePoly:
    """q / gcd(q, q'), made primitive."""
    if q.is_zero():
        raise StructuralError("the zero polynomial has no squarefree part")
    if q.degree() <= 0:
        return UnivariatePoly([1])
    g = poly_gcd(q, q.derivative())
    return q.divmod(g)[0].primitive()


def sturm_chain(q: UnivariatePoly) -> list[UnivariatePoly]:
    chain = [q, q.derivative()]
    while not chain[-1].is_zero():
        rem = chain[-2].divmod(chain[-1])[1]
        if rem.is_zero():
            break
        # keep coefficients small; only the sign of the scale matters
        rem = -rem
        scale = rem.primitive()
        if (scale.leading() > 0) != (rem.leading() > 0):
            scale = -scale
        chain.append(scale)
    return chain


def _sign_changes(chain, t) -> int:
    signs = [s for s in (p.sign_at(t) for p in chain) if s]
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def sturm_distinct_real_roots(q: UnivariatePoly, interval=None) -> int:
    """Number of distinct real roots of ``q`` in an open interval (default: all of R).

    ``interval`` is ``None`` or a pair ``(lo, hi)`` of rationals or infinities.
    """
    if q.is_zero():
        raise StructuralError("the zero polynomial has infinitely many roots")
    sq = squarefree_part(q)
    if sq.degree() == 0:
        return 0
    lo, hi = interval if interval is not None else (-math.inf, math.inf)
    if lo not in (math.inf, -math.inf):
        lo = as_rational(lo)
    if hi not in (math.inf, -math.inf):
        hi = as_rational(hi)
    if not lo < hi:
        return 0
    chain = sturm_chain(sq)
    # V(lo) - V(hi) counts roots in (lo, hi]
    count = _sign_changes(chain, lo) - _sign_changes(chain, hi)
    if hi not in (math.inf, -math.inf) and sq(hi) == 0:
        count -= 1
    return count


def is_real_rooted(q: UnivariatePoly) -> bool:
    sq = squarefree_part(q)
    return sturm_distinct_real_roots(sq) == sq.degree()


# ---------------------------------------------------------------------------
# Exact linear algebra (lists of rows of Fractions)


def to_matrix(rows: Iterable[Iterable]) -> list[list[Fraction]]:
    return [[as_rational(x) for x in row] for row in rows]


def transpose(M):
    return [list(col) for col in zip(*M)] if M else []


def matmul(A, B):
    Bt = transpose(B)
    return [[dot(row, col) for col in Bt] for row in A]


def matvec(A, v):
    return [dot(row, v) for row in A]


def rref(M) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row echelon form and pivot columns."""
    A = [list(map(as_rational, row)) for row in M]
    if not A:
        return A, []
    nrows, ncols = len(A), len(A[0])
    pivots = []
    r = 0
    for c in range(ncols):
        pivot = next((i for i in range(r, nrows) if A[i][c] != 0), None)
        if pivot is None:
            continue
        A[r], A[pivot] = A[pivot], A[r]
        inv = 1 / A[r][c]
        A[r] = [x * inv for x in A[r]]
        for i in range(nrows):
            if i != r and A[i][c] != 0:
                f = A[i][c]
                A[i] = [a - f * b for a, b in zip(A[i], A[r])]
        pivots.append(c)
        r += 1
        if r == nrows:
            break
    return A, pivots


def rank(M) -> int:
    return len(rref(M)[1]) if M and M[0] else 0


def nullspace(M) -> list[tuple[Fraction, ...]]:
    """Basis of the right kernel, one vector per free column of the RREF."""
    if not M:
        return []
    ncols = len(M[0])
    R, pivots = rref(M)
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        v = [Fraction(0)] * ncols
        v[f] = Fraction(1)
        for row, p in zip(R, pivots):
            v[p] = -row[f]
        basis.append(tuple(v))
    return basis


def determinant(M) -> Fraction:
    A = [list(map(as_rational, row)) for row in M]
    n = len(A)
    if any(len(row) != n for row in A):
        raise StructuralError("determinant of a non-square matrix")
    det = Fraction(1)
    for c in range(n):
        pivot = next((i for i in range(c, n) if A[i][c] != 0), None)
        if pivot is None:
            return Fraction(0)
        if pivot != c:
            A[c], A[pivot] = A[pivot], A[c]
            det = -det
        det *= A[c][c]
        inv = 1 / A[c][c]
        for i in range(c + 1, n):
            if A[i][c]:
                f = A[i][c] * inv
                A[i] = [a - f * b for a, b in zip(A[i], A[c])]
    return det


def solve(A, b) -> list[Fraction] | None:
    """Unique solution of a square or overdetermined consistent system, else None."""
    ncols = len(A[0])
    aug = [list(row) + [rhs] for row, rhs in zip(A, b)]
    R, pivots = rref(aug)
    if ncols in pivots or len(pivots) < ncols:
        return None
    x = [Fraction(0)] * ncols
    for row, p in zip(R, pivots):
        x[p] = row[-1]
    return x


def inverse(A):
    n = len(A)
    aug = [list(row) + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(A)]
    R, pivots = rref(aug)
    if pivots[:n] != list(range(n)):
        raise ZeroDivisionError("singular matrix")
    return [row[n:] for row in R[:n]]


def right_inverse(L):
    """A rational m x n matrix S with L S = I, for a full-row-rank n x m matrix L."""
    Lt = transpose(L)
    return matmul(Lt, inverse(matmul(L, Lt)))


# ---------------------------------------------------------------------------
# Interpolation


def interpolate(
    degree: int,
    dimension: int,
    samples: Sequence[tuple[Sequence, object]],
    homogeneous: bool = True,
    variables: Sequence[str] | None = None,
) -> SparsePoly:
    """Recover the polynomial of the stated degree through exact samples.

    All samples are used; an overdetermined system must be consistent.
    """
    variables = tuple(variables or SparsePoly.default_variables(dimension, "y"))
    basis = monomials(dimension, degree, homogeneous)
    if len(samples) < len(basis):
        raise InterpolationError(
            f"{len(samples)} samples cannot determine {len(basis)} coefficients"
        )
    rows = []
    rhs = []
    for point, value in samples:
        point = as_vector(point)
        rows.append([math.prod((x ** k for x, k in zip(point, e) if k), start=Fraction(1)) for e in basis])
        rhs.append(as_rational(value))
    aug = [r + [v] for r, v in zip(rows, rhs)]
    R, pivots = rref(aug)
    if len(basis) in pivots:
        raise InterpolationError("samples are inconsistent with any polynomial of this degree")
    if len(pivots) < len(basis):
        raise InterpolationError(
            f"rank defect {len(basis) - len(pivots)}: sample points not in general position"
        )
    coeffs = {}
    for row, p in zip(R, pivots):
        coeffs[basis[p]] = row[-1]
    return SparsePoly(variables, coeffs)


def seeded_rng(seed: int) -> random.Random:
    return random.Random(seed)


def random_rational(rng: random.Random, lo, hi, max_den: int = 64) -> Fraction:
    den = rng.randint(1, max_den)
    lo_n = math.ceil(as_rational(lo) * den)
    hi_n = math.floor(as_rational(hi) * den)
    return Fraction(rng.randint(lo_n, hi_n), den)
