"""Deciding complete monotonicity of p^s.

* Refutation: exact signed derivatives of p^s, searched breadth-first.
* Validation: Monte Carlo Laplace transforms of candidate kernels.
* Certificates: machine-readable verdicts combining both.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Sequence

from .exactalg import SparsePoly, as_rational, as_vector, primitive_integer, rational_str
from .hyperbolicity import (
    HyperbolicInstance,
    cone_membership,
    elementary_symmetric,
    hyperbolicity_check,
    identity_point,
    symmetric_determinant,
)
from .kernels import ClosedFormKernel, PiecewiseKernel, StageKernel, kernel_linear_forms, poly_from_terms, poly_to_terms
from .polyhedra import DegenerateInputError, as_matrix, columns, cone_of_columns
from .special_fns import mc_cone_mean

CM_CERTIFIED = "CM_CERTIFIED"
CM_REFUTED = "CM_REFUTED"
UNKNOWN = "UNKNOWN"


class PreconditionError(ValueError):
    """An evaluation point is outside the region where p is positive."""


# ---------------------------------------------------------------------------
# Exact signed derivatives


@dataclass(frozen=True)
class ExactPower:
    """``rational * base ** exponent`` with 0 <= exponent < 1."""

    rational: Fraction
    base: Fraction
    exponent: Fraction

    @classmethod
    def normalized(cls, rational, base, exponent) -> "ExactPower":
        rational, base, exponent = Fraction(rational), Fraction(base), Fraction(exponent)
        whole = math.floor(exponent)
        return cls(rational * base ** whole, base, exponent - whole)

    def __float__(self) -> float:
        if self.rational == 0:
            return 0.0
        log = math.log(abs(self.rational.numerator)) - math.log(self.rational.denominator)
        log += float(self.exponent) * math.log(self.base)
        return math.copysign(math.exp(log), self.rational)

    def sign(self) -> int:
        return (self.rational > 0) - (self.rational < 0)

    def to_dict(self) -> dict:
        return {
            "rational": rational_str(self.rational),
            "base": rational_str(self.base),
            "exponent": rational_str(self.exponent),
            "float": float(self),
        }

    def __str__(self):
        return f"({rational_str(self.rational)}) * {rational_str(self.base)}^({rational_str(self.exponent)})"


@dataclass(frozen=True)
class DerivativeState:
    """D^beta (p^s) = P * p^(s - k) with k = |beta|."""

    p: SparsePoly
    s: Fraction
    k: int
    P: SparsePoly
    multiindex: tuple = ()

    @classmethod
    def start(cls, p: SparsePoly, s) -> "DerivativeState":
        return cls(p, as_rational(s), 0, SparsePoly.constant(p.variables, 1), (0,) * p.nvars)

    def step(self, i: int) -> "DerivativeState":
        P = self.P.diff(i) * self.p + self.P * self.p.diff(i) * (self.s - self.k)
        beta = list(self.multiindex)
        beta[i] += 1
        return DerivativeState(self.p, self.s, self.k + 1, P, tuple(beta))

    def value(self, x0) -> ExactPower:
        """Exact D^beta (p^s)(x0)."""
        x0 = as_vector(x0)
        base = self.p.evaluate(x0)
        if base <= 0:
            raise PreconditionError(f"p(x0) = {base} is not positive")
        return ExactPower.normalized(self.P.evaluate(x0), base, self.s - self.k)

    def signed_value(self, x0) -> ExactPower:
        v = self.value(x0)
        return ExactPower((-1) ** self.k * v.rational, v.base, v.exponent)

    def sign(self, x0) -> int:
        """Sign of (-1)^k D^beta (p^s)(x0); p^(s-k) > 0 so only P(x0) matters."""
        val = (-1) ** self.k * self.P.evaluate(as_vector(x0))
        return (val > 0) - (val < 0)


def signed_derivative(p: SparsePoly, s, multiindex: Sequence[int]) -> DerivativeState:
    if len(multiindex) != p.nvars:
        raise ValueError("multi-index length must equal the number of variables")
    state = DerivativeState.start(p, s)
    for i, count in enumerate(multiindex):
        for _ in range(count):
            state = state.step(i)
    return state


def is_symmetric(p: SparsePoly) -> bool:
    n = p.nvars
    if n < 2:
        return True
    gens = [(1, 0) + tuple(range(2, n)), tuple(range(1, n)) + (0,)]
    for perm in gens:
        moved = SparsePoly(p.variables, {tuple(e[perm[i]] for i in range(n)): c for e, c in p.items()})
        if moved != p:
            return False
    return True


def _multiindices(n: int, k: int, canonical: bool):
    """Multi-indices of total order k in ascending lex order (nonincreasing ones only if canonical)."""
    out = []
    for combo in itertools.combinations_with_replacement(range(n), k):
        beta = [0] * n
        for i in combo:
            beta[i] += 1
        beta = tuple(beta)
        if canonical and list(beta) != sorted(beta, reverse=True):
            continue
        out.append(beta)
    return sorted(set(out))


def _parent(beta):
    i = max(j for j, b in enumerate(beta) if b)
    return beta[:i] + (beta[i] - 1,) + beta[i + 1:], i


def default_points(n: int, seed: int = 0, count: int = 4) -> list[tuple[Fraction, ...]]:
    rng = random.Random(seed)
    pts = [tuple(Fraction(1) for _ in range(n))]
    while len(pts) < count + 1:
        pt = tuple(Fraction(rng.randint(1, 5), rng.randint(1, 3)) for _ in range(n))
        if pt not in pts:
            pts.append(pt)
    return pts


# ---------------------------------------------------------------------------
# Certificates


@dataclass
class LaplaceCheck:
    x: list
    target: float
    estimate: float
    rel_error: float
    stderr: float
    samples: int
    seed: int
    tol: float

    @property
    def passed(self) -> bool:
        return self.rel_error <= self.tol

    def to_dict(self) -> dict:
        d = asdict(self)
        d["passed"] = self.passed
        return d

    @classmethod
    def from_dict(cls, d) -> "LaplaceCheck":
        return cls(**{k: v for k, v in d.items() if k != "passed"})


@dataclass
class Certificate:
    status: str
    problem: dict
    kernel: dict | None = None
    witness: dict | None = None
    laplace_checks: list = field(default_factory=list)
    hyperbolicity: dict | None = None
    nonnegativity: dict | None = None
    reason: str = ""

    def to_dict(self) -> dict:
        return {
            "status": self.status,
            "problem": self.problem,
            "kernel": self.kernel,
            "witness": self.witness,
            "laplace_checks": [c.to_dict() for c in self.laplace_checks],
            "hyperbolicity": self.hyperbolicity,
            "nonnegativity": self.nonnegativity,
            "reason": self.reason,
        }

    @classmethod
    def from_dict(cls, d) -> "Certificate":
        return cls(
            status=d["status"],
            problem=d["problem"],
            kernel=d.get("kernel"),
            witness=d.get("witness"),
            laplace_checks=[LaplaceCheck.from_dict(c) for c in d.get("laplace_checks", [])],
            hyperbolicity=d.get("hyperbolicity"),
            nonnegativity=d.get("nonnegativity"),
            reason=d.get("reason", ""),
        )


def refute_cm(
    p: SparsePoly,
    s,
    max_order: int = 12,
    points: Sequence | None = None,
    cone_check: HyperbolicInstance | None = None,
    include_numerator: bool = False,
    seed: int = 0,
) -> Certificate:
    """Search for a negative signed derivative (-1)^k D^beta (p^s)(x0) with |beta| <= max_order.

    Multi-indices are visited by total order, then lexicographically. For a
    symmetric p only nonincreasing multi-indices are expanded, evaluated on
    every permutation of each point. Exhaustion gives UNKNOWN.
    """
    s = as_rational(s)
    n = p.nvars
    pts = [as_vector(x) for x in (points if points is not None else default_points(n, seed))]
    for x in pts:
        if len(x) != n:
            raise PreconditionError("point dimension does not match the polynomial")
        if p.evaluate(x) <= 0:
            raise PreconditionError(f"p is not positive at {[rational_str(v) for v in x]}")
        if cone_check is not None and not cone_membership(cone_check, x):
            raise PreconditionError(f"{[rational_str(v) for v in x]} is outside the hyperbolicity cone")
    symmetric = is_symmetric(p)
    if symmetric:
        eval_pts = []
        for x in pts:
            for perm in sorted(set(itertools.permutations(x))):
                if perm not in eval_pts:
                    eval_pts.append(perm)
    else:
        eval_pts = pts
    problem = {
        "kind": "refute",
        "polynomial": poly_to_terms(p),
        "s": rational_str(s),
        "max_order": max_order,
        "points": [[rational_str(v) for v in x] for x in pts],
        "symmetric_pruning": symmetric,
    }
    states = {(0,) * n: DerivativeState.start(p, s)}
    visited = 0
    for k in range(1, max_order + 1):
        layer = {}
        for beta in _multiindices(n, k, symmetric):
            parent, i = _parent(beta)
            state = states[parent].step(i)
            layer[beta] = state
            visited += 1
            for x in eval_pts:
                if state.sign(x) < 0:
                    value = state.value(x)
                    witness = {
                        "multiindex": list(beta),
                        "point": [rational_str(v) for v in x],
                        "order": k,
                        "numerator_terms": len(state.P),
                        "numerator_degree": state.P.degree(),
                        "derivative_value": value.to_dict(),
                        "signed_value": state.signed_value(x).to_dict(),
                        "multiindices_checked": visited,
                    }
                    if include_numerator:
                        witness["numerator"] = poly_to_terms(state.P)
                    return Certificate(CM_REFUTED, problem, witness=witness,
                                       reason=f"signed derivative of order {k} is negative")
        states = layer
    return Certificate(UNKNOWN, problem,
                       reason=f"no negative signed derivative up to order {max_order} "
                              f"({visited} multi-indices at {len(eval_pts)} points)")


# ---------------------------------------------------------------------------
# Laplace validation


def laplace_check(kernel, x, samples: int = 1_000_000, seed: int = 0, target: float | None = None,
                  tol: float = 0.01) -> LaplaceCheck:
    """Monte Carlo estimate of int exp(-<y, x>) q(y) dy compared with f(x)."""
    domain = kernel.laplace_frame(x)
    estimate, stderr = mc_cone_mean(kernel.evaluate_batch, domain, samples, seed)
    f = kernel.laplace_target(x) if target is None else float(target)
    rel = abs(estimate - f) / abs(f)
    return LaplaceCheck([_num(v) for v in x], float(f), float(estimate), float(rel), float(stderr),
                        int(samples), int(seed), float(tol))


def laplace_residual(kernel, x, samples: int = 1_000_000, seed: int = 0, target: float | None = None) -> float:
    return laplace_check(kernel, x, samples, seed, target).rel_error


def _num(v):
    try:
        return rational_str(as_rational(v))
    except TypeError:
        return float(v)


# ---------------------------------------------------------------------------
# Orchestration


@dataclass
class Problem:
    """What to certify.

    kind ``linear_forms``: ``matrix`` (columns are the forms) and integer ``alpha``.
    kind ``named_polynomial``: ``name`` in {e23, e24, det} (``m`` for det) and ``alpha``.
    kind ``raw_polynomial``: ``polynomial`` and ``alpha``; only refutation is attempted.
    f = (product or polynomial)^(-alpha).
    """

    kind: str
    alpha: object
    matrix: list | None = None
    name: str | None = None
    m: int | None = None
    polynomial: SparsePoly | None = None
    e: list | None = None

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "alpha": _alpha_doc(self.alpha)}
        if self.matrix is not None:
            d["matrix"] = [[rational_str(as_rational(v)) for v in row] for row in self.matrix]
        if self.name is not None:
            d["name"] = self.name
        if self.m is not None:
            d["m"] = self.m
        if self.polynomial is not None:
            d["polynomial"] = poly_to_terms(self.polynomial)
        if self.e is not None:
            d["e"] = [rational_str(as_rational(v)) for v in self.e]
        return d

    @classmethod
    def from_dict(cls, d) -> "Problem":
        alpha = d["alpha"]
        alpha = [as_rational(a) for a in alpha] if isinstance(alpha, list) else as_rational(alpha)
        return cls(
            kind=d["kind"],
            alpha=alpha,
            matrix=[[as_rational(v) for v in row] for row in d["matrix"]] if d.get("matrix") else None,
            name=d.get("name"),
            m=d.get("m"),
            polynomial=poly_from_terms(d["polynomial"]) if d.get("polynomial") else None,
            e=[as_rational(v) for v in d["e"]] if d.get("e") else None,
        )


def _alpha_doc(alpha):
    if isinstance(alpha, (list, tuple)):
        return [rational_str(as_rational(a)) for a in alpha]
    return rational_str(as_rational(alpha))


@dataclass
class CertifyConfig:
    samples: int = 200_000
    seed: int = 0
    tol: float = 0.03
    max_order: int = 12
    trials: int = 200
    laplace_points: int = 3
    nonneg_per_cell: int = 500


def _linear_forms_polynomial(L) -> SparsePoly:
    names = SparsePoly.default_variables(len(L))
    p = SparsePoly.constant(names, 1)
    for col in columns(L):
        p = p * SparsePoly.linear_form(names, col)
    return p


def _domain_points(generators, count: int, seed: int) -> list[tuple[Fraction, ...]]:
    """The sum of the generators plus seeded positive integer combinations."""
    rng = random.Random(seed)
    n = len(generators[0])
    pts = [tuple(Fraction(sum(g[i] for g in generators)) for i in range(n))]
    while len(pts) < count:
        w = [rng.randint(1, 3) for _ in generators]
        pt = tuple(Fraction(sum(a * g[i] for a, g in zip(w, generators))) for i in range(n))
        if pt not in pts:
            pts.append(pt)
    return [tuple(Fraction(v) for v in primitive_integer(pt)) for pt in pts]


def _spd_points(m: int, count: int, seed: int):
    rng = random.Random(seed)
    pts = [identity_point(m)]
    while len(pts) < count:
        B = [[rng.randint(-1, 1) for _ in range(m)] for _ in range(m)]
        A = [[int(i == j) + sum(B[i][k] * B[j][k] for k in range(m)) for j in range(m)] for i in range(m)]
        pt = tuple(Fraction(A[i][j]) for i in range(m) for j in range(i, m))
        if pt not in pts:
            pts.append(pt)
    return pts


def certify(problem: Problem, config: CertifyConfig = CertifyConfig()) -> Certificate:
    """Run the hyperbolicity check, build a kernel, sample nonnegativity and validate Laplace transforms."""
    doc = problem.to_dict()
    try:
        p, e, kernel_builder, points = _setup(problem, config)
    except (ValueError, DegenerateInputError) as exc:
        return Certificate(UNKNOWN, doc, reason=str(exc))
    hyp = hyperbolicity_check(HyperbolicInstance(p, e), config.trials, config.seed)
    if not hyp.passed:
        cert = _refute_instead(problem, p, config)
        cert.hyperbolicity = hyp.to_dict()
        if cert.status != CM_REFUTED:
            cert.reason = "hyperbolicity check failed, so p^(-alpha) cannot be completely monotone; " + cert.reason
        return cert
    if kernel_builder is None:
        cert = _refute_instead(problem, p, config)
        cert.hyperbolicity = hyp.to_dict()
        return cert
    kernel = kernel_builder()
    if isinstance(kernel, Certificate):
        kernel.hyperbolicity = hyp.to_dict()
        return kernel
    cert = Certificate(UNKNOWN, doc, kernel=kernel.to_dict(), hyperbolicity=hyp.to_dict())
    if isinstance(kernel, PiecewiseKernel):
        ok, lowest = kernel.nonnegativity_sample(config.nonneg_per_cell, config.seed)
        cert.nonnegativity = {"passed": ok, "min_value": rational_str(lowest),
                              "points_per_cell": config.nonneg_per_cell}
    else:
        ok = True
        cert.nonnegativity = {"passed": True, "reason": "closed form is a positive constant times a power of a nonnegative base"}
    for i, x in enumerate(points):
        cert.laplace_checks.append(
            laplace_check(kernel, x, config.samples, config.seed + i, tol=config.tol)
        )
    if not ok:
        cert.reason = "kernel takes a negative value at a sampled point"
    elif not all(c.passed for c in cert.laplace_checks):
        cert.reason = "a Laplace check exceeded the tolerance"
    else:
        cert.status = CM_CERTIFIED
        cert.reason = "nonnegative kernel with validated Laplace transform"
    return cert


def _refute_instead(problem: Problem, p: SparsePoly, config: CertifyConfig) -> Certificate:
    alpha = problem.alpha
    if isinstance(alpha, (list, tuple)):
        return Certificate(UNKNOWN, problem.to_dict(), reason="refutation needs a single exponent")
    points = None
    if problem.kind == "named_polynomial" and problem.name == "det":
        points = [identity_point(problem.m)]
    cert = refute_cm(p, -as_rational(alpha), config.max_order, points=points, seed=config.seed)
    cert.problem = problem.to_dict()
    return cert


def _setup(problem: Problem, config: CertifyConfig):
    """Return (p, e, kernel builder or None, Laplace points)."""
    count = max(3, config.laplace_points)
    if problem.kind == "linear_forms":
        if problem.matrix is None:
            raise ValueError("linear_forms problems need a matrix")
        L = as_matrix(problem.matrix)
        alpha = list(problem.alpha) if isinstance(problem.alpha, (list, tuple)) else [problem.alpha] * len(L[0])
        if len(alpha) != len(L[0]):
            raise ValueError("alpha must have one entry per linear form")
        normals = cone_of_columns(L)
        e = tuple(Fraction(sum(w[i] for w in normals)) for i in range(len(L)))
        p = _linear_forms_polynomial(L)
        points = _domain_points(normals, count, config.seed)
        if any(as_rational(a).denominator != 1 or as_rational(a) < 1 for a in alpha):
            def builder():
                return Certificate(UNKNOWN, problem.to_dict(),
                                   reason="piecewise polynomial kernels need integer exponents >= 1")
        else:
            def builder():
                return kernel_linear_forms(L, alpha, seed=config.seed)
        return p, e, builder, points
    if problem.kind == "named_polynomial":
        a = as_rational(problem.alpha)
        if a <= 0:
            raise ValueError("alpha must be positive")
        if problem.name in ("e23", "e24"):
            n = 3 if problem.name == "e23" else 4
            p = elementary_symmetric(2, n)
            e = (Fraction(1),) * n
            threshold = Fraction(1, 2) if n == 3 else Fraction(1)
            points = _domain_points([tuple(Fraction(int(i == j)) for j in range(n)) for i in range(n)], count, config.seed)
            if a > threshold:
                return p, e, (lambda: ClosedFormKernel(problem.name, a)), points
            if a == threshold:
                def singular():
                    return Certificate(UNKNOWN, problem.to_dict(),
                                       reason="at the threshold exponent the Riesz measure has no density")
                return p, e, singular, points
            return p, e, None, points
        if problem.name == "det":
            m = problem.m or 2
            p = symmetric_determinant(m)
            e = identity_point(m)
            points = _spd_points(m, count, config.seed)
            if a > Fraction(m - 1, 2):
                return p, e, (lambda: ClosedFormKernel("determinant", a, m=m)), points
            if (2 * a).denominator == 1:
                def singular():
                    return Certificate(UNKNOWN, problem.to_dict(),
                                       reason="exponent in the singular part of the Gindikin set; no kernel density")
                return p, e, singular, points
            return p, e, None, points
        raise ValueError(f"unsupported named polynomial {problem.name!r}")
    if problem.kind == "raw_polynomial":
        if problem.polynomial is None:
            raise ValueError("raw_polynomial problems need a polynomial")
        p = problem.polynomial
        e = tuple(as_vector(problem.e)) if problem.e else (Fraction(1),) * p.nvars
        return p, e, None, []
    raise ValueError(f"unsupported problem kind {problem.kind!r}")


def stage_laplace_check(alpha=2, x=(1, 1, 1, 1, 1), samples: int = 10_000_000, seed: int = 0,
                        tol: float = 0.05) -> LaplaceCheck:
    return laplace_check(StageKernel(alpha), x, samples, seed, tol=tol)


__all__ = [
    "CM_CERTIFIED", "CM_REFUTED", "UNKNOWN", "Certificate", "CertifyConfig", "DerivativeState",
    "ExactPower", "LaplaceCheck", "PreconditionError", "Problem", "certify", "laplace_check",
    "laplace_residual", "refute_cm", "signed_derivative", "stage_laplace_check",
]

