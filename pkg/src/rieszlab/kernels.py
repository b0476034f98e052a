"""Riesz kernels.

* Products of linear forms: exact piecewise polynomials on the chamber
  complex, built from fiber volumes of the column-replicated matrix.
* Pointwise values for real exponents by integrating the Dirichlet weight
  over a single fiber.
* Closed forms for monomials, E_{2,3}, E_{2,4}, symmetric determinants and
  the 2F1 kernel of x1 x2 (x1 + v x2), plus the first convolution stage of
  the E_{3,5} construction.
"""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy import integrate as _sp_integrate

from .exactalg import (
    InterpolationError,
    SparsePoly,
    StructuralError,
    as_rational,
    as_vector,
    determinant,
    dot,
    inverse,
    interpolate,
    monomials,
    rank,
    rational_str,
)
from .hyperbolicity import elementary_symmetric, symmetric_determinant
from .polyhedra import (
    ChamberComplex,
    FiberMap,
    as_matrix,
    chamber_complex,
    columns,
    cone_of_columns,
    cone_rays,
)
from .special_fns import ConeDomain, ConvergenceError, DomainError, QuadratureConfig, gamma_fn, gauss_2f1


class WallWarning(UserWarning):
    """A kernel was evaluated on a chamber wall, where pieces meet continuously."""


# ---------------------------------------------------------------------------
# Monte Carlo frames


def _regular_simplex(d: int) -> np.ndarray:
    """d+1 unit vectors in R^d summing to zero."""
    if d == 0:
        return np.zeros((1, 0))
    E = np.eye(d + 1) - 1.0 / (d + 1)
    Q, _ = np.linalg.qr(E[:, :d])
    V = E @ Q
    return V / np.linalg.norm(V, axis=1, keepdims=True)


def ball_frame(points: np.ndarray, x: np.ndarray, pairing=None) -> np.ndarray:
    """Generators of a simplicial cone containing the cone over ``points``.

    The points are projected to the section <x, y> = 1, enclosed in a ball
    around their centroid and the ball in a circumscribed regular simplex.
    """
    w = x if pairing is None else x * pairing
    P = np.asarray(points, dtype=float)
    P = P / (P @ w)[:, None]
    n = P.shape[1]
    c = P.mean(axis=0)
    # orthonormal basis of {z : <w, z> = 0}
    Q, _ = np.linalg.qr(np.column_stack([w] + [np.eye(n)[:, i] for i in range(n)]))
    B = Q[:, 1:n]
    radius = float(np.max(np.linalg.norm(P - c, axis=1))) * 1.000001 + 1e-12
    U = _regular_simplex(n - 1)
    G = np.array([c + (n - 1) * radius * (B @ u) for u in U]) if n > 1 else np.array([c])
    return G.T


# ---------------------------------------------------------------------------
# Piecewise polynomial kernels


@dataclass
class PiecewiseKernel:
    complex: ChamberComplex
    pieces: list
    total_degree: int
    smoothness_order: int
    alpha: tuple = ()

    @property
    def n(self) -> int:
        return len(self.complex.L)

    @property
    def L(self):
        return self.complex.L

    def evaluate(self, y) -> Fraction:
        """Exact value; zero outside cone(L). On walls any adjacent piece gives the same value."""
        y = as_vector(y)
        cells = self.complex.locate(y)
        if not cells:
            return Fraction(0)
        return self.pieces[cells[0]].evaluate(y)

    __call__ = evaluate

    def evaluate_batch(self, Y: np.ndarray) -> np.ndarray:
        Y = np.asarray(Y, dtype=float)
        out = np.zeros(Y.shape[0])
        todo = np.ones(Y.shape[0], dtype=bool)
        for normals, piece in zip(self.complex.cells, self.pieces):
            N = np.array(normals, dtype=float)
            inside = todo & np.all(Y @ N.T >= 0, axis=1)
            if np.any(inside):
                out[inside] = piece.evaluate_float(Y[inside])
                todo &= ~inside
        return out

    def wall_smoothness(self) -> list[tuple[int, int, int]]:
        """For each wall, the order to which the adjacent pieces agree (-1 if not even continuous).

        q_A - q_B vanishes to order r on {<w, y> = 0} iff it is divisible by
        <w, y>^(r+1); checked after a change of coordinates making <w, y> a variable.
        """
        results = []
        n = self.n
        for a, b, w in self.complex.walls:
            diff = self.pieces[a] - self.pieces[b]
            if diff.is_zero():
                results.append((a, b, self.total_degree))
                continue
            T = [list(as_vector(w))]
            for i in range(n):
                cand = T + [[Fraction(int(i == j)) for j in range(n)]]
                if rank(cand) == len(cand):
                    T = cand
                if len(T) == n:
                    break
            Tinv = inverse(T)
            z = SparsePoly.default_variables(n, "z")
            images = [SparsePoly.linear_form(z, row) for row in Tinv]
            moved = diff.substitute(images)
            order = min(e[0] for e in moved.terms) - 1
            results.append((a, b, order))
        return results

    def expected_wall_order(self, w) -> int:
        """Smoothness across the wall with normal w: (sum of alpha_i over columns off the wall) - 2."""
        return sum(a for col, a in zip(columns(self.L), self.alpha) if dot(w, col) != 0) - 2

    def is_smooth(self) -> bool:
        """Every wall is at least as smooth as its column multiplicities predict."""
        return all(
            order >= self.expected_wall_order(w)
            for (_, _, order), (_, _, w) in zip(self.wall_smoothness(), self.complex.walls)
        )

    def nonnegativity_sample(self, per_cell: int = 500, seed: int = 0) -> tuple[bool, Fraction]:
        """Evaluate every piece at seeded interior points of its cell; return (all >= 0, min value)."""
        lowest = None
        for i, piece in enumerate(self.pieces):
            for y in self.complex.interior_points(i, per_cell, seed + i, max_weight=50):
                v = piece.evaluate(y)
                lowest = v if lowest is None else min(lowest, v)
        return (lowest is None or lowest >= 0), (lowest if lowest is not None else Fraction(0))

    def laplace_target(self, x) -> float:
        x = np.asarray([float(v) for v in x])
        cols = np.array(columns(self.L), dtype=float)
        vals = cols @ x
        if np.any(vals <= 0):
            raise DomainError("x must make every linear form positive")
        return float(np.prod(vals ** -np.array([float(a) for a in self.alpha])))

    def laplace_frame(self, x) -> ConeDomain:
        x = np.asarray([float(v) for v in x])
        cols = np.array(columns(self.L), dtype=float)
        rays = np.array(cone_rays(self.complex.cone_normals, self.n), dtype=float)
        if len(rays) == self.n:
            G = (rays / (rays @ x)[:, None]).T
        else:
            G = ball_frame(cols, x)
        return ConeDomain(G, x)

    def to_dict(self) -> dict:
        return {
            "type": "piecewise",
            "alpha": [rational_str(as_rational(a)) for a in self.alpha],
            "total_degree": self.total_degree,
            "smoothness_order": self.smoothness_order,
            "cells": [
                {
                    "normals": [list(w) for w in normals],
                    "adjacent": self.complex.adjacent(i),
                    "polynomial": poly_to_terms(piece),
                }
                for i, (normals, piece) in enumerate(zip(self.complex.cells, self.pieces))
            ],
        }


def poly_to_terms(p: SparsePoly) -> dict:
    return {
        "variables": list(p.variables),
        "terms": [{"exponent": list(e), "coefficient": rational_str(c)} for e, c in p.items()],
    }


def poly_from_terms(doc: dict) -> SparsePoly:
    return SparsePoly(doc["variables"], {tuple(t["exponent"]): as_rational(t["coefficient"]) for t in doc["terms"]})


def _integer_alpha(alpha) -> tuple[int, ...] | None:
    out = []
    for a in alpha:
        try:
            q = as_rational(a)
        except TypeError:
            return None
        if q.denominator != 1:
            return None
        out.append(int(q))
    return tuple(out)


def replicate_columns(L, alpha) -> list[list[Fraction]]:
    cols = columns(as_matrix(L))
    rep = [c for c, a in zip(cols, alpha) for _ in range(a)]
    return [list(row) for row in zip(*rep)]


def kernel_linear_forms(L, alpha, seed: int = 0, complex: ChamberComplex | None = None) -> PiecewiseKernel:
    """Exact piecewise polynomial kernel of prod_i <l_i, x>^(-alpha_i) for integer alpha_i >= 1."""
    L = as_matrix(L)
    m = len(L[0])
    ints = _integer_alpha(alpha)
    if ints is None or len(ints) != m or any(a < 1 for a in ints):
        raise DomainError("piecewise kernels need one integer exponent >= 1 per column")
    cc = complex or chamber_complex(L, seed=seed)
    n = len(L)
    fm = FiberMap(replicate_columns(L, ints))
    degree = sum(ints) - n
    names = SparsePoly.default_variables(n, "y")
    needed = len(monomials(n, degree, True)) + 2
    pieces = []
    for cell in range(len(cc.cells)):
        for attempt in range(4):
            pts = cc.interior_points(cell, needed, seed=seed + 7919 * attempt + 104729 * cell)
            samples = [(y, fm.density(y)) for y in pts]
            try:
                pieces.append(interpolate(degree, n, samples, homogeneous=True, variables=names))
                break
            except InterpolationError:
                if attempt == 3:
                    raise
    K = PiecewiseKernel(cc, pieces, degree, degree - 1, tuple(ints))
    K.smoothness_order = min((K.expected_wall_order(w) for _, _, w in cc.walls), default=degree - 1)
    return K


# ---------------------------------------------------------------------------
# Pointwise kernel values for real exponents


def _duffy(k: int, order: int, grading: int):
    """Nodes (barycentric, shape (N, k+1)) and weights of a rule on the unit k-simplex (volume 1/k!)."""
    g, w = np.polynomial.legendre.leggauss(order)
    t = (g + 1) / 2
    wt = w / 2
    p = grading
    den = t ** p + (1 - t) ** p
    phi = t ** p / den
    phic = (1 - t) ** p / den  # 1 - phi without cancellation
    dphi = p * t ** (p - 1) * (1 - t) ** (p - 1) / den ** 2
    grid = np.meshgrid(*([np.arange(order)] * k), indexing="ij")
    idx = np.stack([gi.ravel() for gi in grid], axis=1)
    S, Sc = phi[idx], phic[idx]
    W = np.prod((wt * dphi)[idx], axis=1)
    lam = np.zeros((idx.shape[0], k + 1))
    rest = np.ones(idx.shape[0])
    jac = np.ones(idx.shape[0])
    for j in range(k):
        lam[:, j + 1] = rest * S[:, j]
        jac *= rest
        rest = rest * Sc[:, j]
    lam[:, 0] = rest
    return lam, W * jac


def _simplex_power_integral(U: np.ndarray, expo: np.ndarray, volume: float, order: int, grading: int) -> float:
    """Integral of prod_i u_i^expo_i over a simplex whose vertex u-values are the rows of U."""
    k = U.shape[0] - 1
    lam, W = _duffy(k, order, grading)
    vals = lam @ U
    with np.errstate(divide="ignore", invalid="ignore"):
        logs = np.where(vals > 0, np.log(np.where(vals > 0, vals, 1.0)), -np.inf)
        contrib = np.where(expo == 0, 0.0, logs * expo)
    f = np.exp(contrib.sum(axis=1))
    return float(math.factorial(k) * volume * np.dot(W, f))


def _on_wall(L, y) -> bool:
    n = len(L)
    cols = columns(L)
    for combo in itertools.combinations(cols, n - 1):
        M = [list(c) for c in combo] + [list(y)]
        if rank([list(c) for c in combo]) == n - 1 and determinant(M) == 0:
            return True
    return False


def kernel_value_at(L, alpha, y, rel_tol: float = 1e-8, max_order: int = 128):
    """Kernel of prod_i <l_i, x>^(-alpha_i) at y.

    Integer exponents give an exact Fraction (Dirichlet monomial integration
    over the fiber); real exponents use graded tensor Gauss-Legendre on a
    triangulation of the fiber, refined until the relative change is below
    ``rel_tol``.
    """
    L = as_matrix(L)
    y = as_vector(y)
    n, m = len(L), len(L[0])
    if len(y) != n:
        raise StructuralError(f"y has {len(y)} coordinates, expected {n}")
    if len(alpha) != m:
        raise StructuralError("need one exponent per column")
    normals = cone_of_columns(L)
    if any(dot(w, y) < 0 for w in normals):
        return Fraction(0) if _integer_alpha(alpha) else 0.0
    if n > 1 and _on_wall(L, y):
        warnings.warn(f"y = {[rational_str(v) for v in y]} lies on a chamber wall", WallWarning, stacklevel=2)
    fm = FiberMap(L)
    ints = _integer_alpha(alpha)
    if ints is not None:
        if any(a < 1 for a in ints):
            raise DomainError("exponents must be positive")
        denom = math.prod(math.factorial(a - 1) for a in ints)
        return fm.integrate(y, [a - 1 for a in ints]) / denom
    alpha_f = np.array([float(a) for a in alpha])
    if np.any(alpha_f <= 0):
        raise DomainError("exponents must be positive")
    norm = math.prod(gamma_fn(a) for a in alpha_f) * float(fm.det_pivot)
    expo = alpha_f - 1
    if m == n:
        u = np.array([float(v) for v in fm.vertices(y)[0]])
        return float(np.prod(np.where(expo == 0, 1.0, u ** expo))) / norm
    C = fm.chart(y)
    if C is None:
        return 0.0
    simplices = C.triangulate()
    U_all = np.array([[float(v) for v in u] for u in C.ambient])
    vols = [float(C.simplex_volume(s)) for s in simplices]
    grading = max(3, math.ceil(4 / min(1.0, float(alpha_f.min()))))
    k = C.k
    order = 8
    prev = None
    cap = {1: max_order, 2: min(max_order, 96)}.get(k, min(max_order, 32))
    while True:
        total = sum(_simplex_power_integral(U_all[list(s)], expo, v, order, grading) for s, v in zip(simplices, vols))
        if prev is not None and abs(total - prev) <= rel_tol * abs(total):
            return total / norm
        if order >= cap:
            if prev is not None and abs(total - prev) <= 1e3 * rel_tol * abs(total):
                warnings.warn(f"fiber quadrature stopped at order {order} (relative change "
                              f"{abs(total - prev) / abs(total):.2e})", RuntimeWarning, stacklevel=2)
                return total / norm
            raise ConvergenceError(f"fiber quadrature did not converge by order {order}")
        prev = total
        order *= 2


def aomoto_gelfand_phi(L, alpha, y, **kw) -> float:
    """Kernel value times prod Gamma(alpha_i)."""
    return float(kernel_value_at(L, alpha, y, **kw)) * math.prod(gamma_fn(a) for a in alpha)


# ---------------------------------------------------------------------------
# Closed-form kernels

KINDS = ("monomial", "e23", "e24", "determinant", "cubic_2f1")


def _e2(Y):
    s = Y.sum(axis=-1)
    return (s * s - (Y * Y).sum(axis=-1)) / 2


@dataclass
class ClosedFormKernel:
    """Closed-form Riesz kernels with their parameter domains.

    ``monomial``: prod y_i^(a_i - 1) / Gamma(a_i), alpha a vector.
    ``e23``: kernel of E_{2,3}^-alpha, alpha > 1/2.
    ``e24``: kernel of E_{2,4}^-alpha, alpha > 1.
    ``determinant``: kernel of det(x)^-alpha on symmetric m x m matrices in
    upper-triangular coordinates with the trace pairing, alpha > (m-1)/2.
    ``cubic_2f1``: kernel of (x1 x2 (x1 + v x2))^-alpha, alpha > 0, v > 0.
    """

    kind: str
    alpha: object
    m: int | None = None
    v: object = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown closed-form kind {self.kind!r}")
        if self.kind == "monomial":
            self.alpha = tuple(self.alpha) if isinstance(self.alpha, (list, tuple)) else (self.alpha,)
            if any(float(a) <= 0 for a in self.alpha):
                raise DomainError("monomial kernel needs every alpha_i > 0")
            return
        a = float(self.alpha)
        if self.kind == "e23" and not a > 0.5:
            raise DomainError("e23 kernel requires alpha > 1/2")
        if self.kind == "e24" and not a > 1:
            raise DomainError("e24 kernel requires alpha > 1")
        if self.kind == "determinant":
            if self.m is None or self.m < 1:
                raise DomainError("determinant kernel needs a matrix size m >= 1")
            if not a > (self.m - 1) / 2:
                raise DomainError(f"determinant kernel requires alpha > (m-1)/2 = {(self.m - 1) / 2}")
        if self.kind == "cubic_2f1":
            if self.v is None or float(self.v) <= 0:
                raise DomainError("cubic_2f1 kernel needs v > 0")
            if not a > 0:
                raise DomainError("cubic_2f1 kernel requires alpha > 0")

    # -- structure -------------------------------------------------------
    @property
    def dim(self) -> int:
        return {
            "monomial": len(self.alpha) if self.kind == "monomial" else 0,
            "e23": 3,
            "e24": 4,
            "determinant": (self.m or 0) * ((self.m or 0) + 1) // 2,
            "cubic_2f1": 2,
        }[self.kind]

    @property
    def pairing(self) -> np.ndarray | None:
        if self.kind != "determinant":
            return None
        return np.array([1.0 if i == j else 2.0 for i in range(self.m) for j in range(i, self.m)])

    def polynomial(self) -> SparsePoly:
        if self.kind == "monomial":
            names = SparsePoly.default_variables(self.dim)
            return SparsePoly(names, {tuple(1 for _ in names): 1})
        if self.kind == "e23":
            return elementary_symmetric(2, 3)
        if self.kind == "e24":
            return elementary_symmetric(2, 4)
        if self.kind == "determinant":
            return symmetric_determinant(self.m)
        names = SparsePoly.default_variables(2)
        x1, x2 = (SparsePoly.variable(names, i) for i in range(2))
        return x1 * x2 * (x1 + x2 * as_rational(self.v))

    def laplace_target(self, x) -> float:
        x = [float(v) for v in x]
        if self.kind == "monomial":
            return float(np.prod([xi ** -float(a) for xi, a in zip(x, self.alpha)]))
        val = float(self.polynomial().evaluate_float(np.array(x)))
        if val <= 0:
            raise DomainError("x is outside the domain of the power")
        return val ** -float(self.alpha)

    def _matrix(self, Y):
        m = self.m
        M = np.zeros(Y.shape[:-1] + (m, m))
        k = 0
        for i in range(m):
            for j in range(i, m):
                M[..., i, j] = Y[..., k]
                M[..., j, i] = Y[..., k]
                k += 1
        return M

    def laplace_frame(self, x) -> ConeDomain:
        x = np.asarray([float(v) for v in x])
        if self.kind != "determinant":
            return ConeDomain(np.diag(1.0 / x), x)
        m = self.m
        X = self._matrix(x)
        w, V = np.linalg.eigh(X)
        if np.any(w <= 0):
            raise DomainError("x must be positive definite")
        Xih = V @ np.diag(w ** -0.5) @ V.T
        # trace-one section of the PSD cone: a ball of radius sqrt(1 - 1/m) around I/m
        d = m * (m + 1) // 2 - 1
        basis = []
        for i in range(m):
            for j in range(i, m):
                E = np.zeros((m, m))
                E[i, j] = E[j, i] = 1.0
                basis.append(E)
        flat = np.array([E.ravel() for E in basis]).T
        P = np.eye(m * m) - np.outer(np.eye(m).ravel(), np.eye(m).ravel()) / m
        Q, R = np.linalg.qr(P @ flat)
        keep = np.abs(np.diag(R)) > 1e-12
        B = Q[:, keep][:, :d]
        radius = math.sqrt(1 - 1 / m) * 1.000001
        gens = []
        for u in _regular_simplex(d):
            Gm = np.eye(m) / m + (d * radius * (B @ u)).reshape(m, m) if d else np.eye(m)
            Y = Xih @ Gm @ Xih
            gens.append([Y[i, j] for i in range(m) for j in range(i, m)])
        return ConeDomain(np.array(gens).T, x, self.pairing)

    # -- evaluation ------------------------------------------------------
    def _constant(self) -> float:
        a = float(self.alpha) if self.kind != "monomial" else None
        if self.kind == "e23":
            return 2 ** (1 - a) / (math.sqrt(2 * math.pi) * gamma_fn(self.alpha) * gamma_fn(as_half(self.alpha, -1)))
        if self.kind == "e24":
            return 3 ** (1.5 - a) / (2 * math.pi * gamma_fn(self.alpha) * gamma_fn(as_half(self.alpha, -2)))
        if self.kind == "determinant":
            m = self.m
            gm = math.pi ** (m * (m - 1) / 4) * math.prod(gamma_fn(as_half(self.alpha, -j)) for j in range(m))
            return 1.0 / gm
        return 1.0

    def _exponent(self) -> float:
        a = float(self.alpha)
        if self.kind == "e23":
            return a - 1.5
        if self.kind == "e24":
            return a - 2.0
        return a - (self.m + 1) / 2

    def _base_batch(self, Y):
        if self.kind == "e23":
            return _e2(Y) - 0.5 * (Y * Y).sum(axis=-1), Y.sum(axis=-1) > 0
        if self.kind == "e24":
            return _e2(Y) - (Y * Y).sum(axis=-1), Y.sum(axis=-1) > 0
        M = self._matrix(Y)
        ev = np.linalg.eigvalsh(M)
        return np.prod(ev, axis=-1), np.all(ev >= 0, axis=-1)

    def _base_exact(self, y):
        if self.kind == "e23":
            return elementary_symmetric(2, 3).evaluate(y) - sum(v * v for v in y) / 2, sum(y) > 0
        if self.kind == "e24":
            return elementary_symmetric(2, 4).evaluate(y) - sum(v * v for v in y), sum(y) > 0
        m = self.m
        M = self._matrix_exact(y)
        minors = [determinant([row[:k] for row in M[:k]]) for k in range(1, m + 1)]
        if all(v > 0 for v in minors):
            return minors[-1], True
        # singular or indefinite; positive semidefinite iff every principal minor is >= 0
        ok = all(
            determinant([[M[i][j] for j in S] for i in S]) >= 0
            for r in range(1, m + 1) for S in itertools.combinations(range(m), r)
        )
        return minors[-1], ok

    def _matrix_exact(self, y):
        m = self.m
        M = [[Fraction(0)] * m for _ in range(m)]
        k = 0
        for i in range(m):
            for j in range(i, m):
                M[i][j] = M[j][i] = y[k]
                k += 1
        return M

    def _power(self, base, exponent):
        if base > 0:
            return float(base) ** exponent
        if exponent > 0:
            return 0.0
        if exponent == 0:
            return 1.0
        return math.inf

    def evaluate(self, y) -> float:
        if len(y) != self.dim:
            raise StructuralError(f"kernel expects {self.dim} coordinates")
        if self.kind == "monomial":
            yf = [float(v) for v in y]
            if any(v < 0 for v in yf):
                return 0.0
            return math.prod(self._power(v, float(a) - 1) / gamma_fn(a) for v, a in zip(yf, self.alpha))
        if self.kind == "cubic_2f1":
            return float(self.evaluate_batch(np.array([[float(v) for v in y]]))[0])
        try:
            yq = as_vector(y)
            base, ok = self._base_exact(yq)
        except TypeError:
            base_arr, ok_arr = self._base_batch(np.array([[float(v) for v in y]]))
            base, ok = float(base_arr[0]), bool(ok_arr[0])
        if not ok or base < 0:
            return 0.0
        return self._constant() * self._power(base, self._exponent())

    __call__ = evaluate

    def evaluate_batch(self, Y: np.ndarray) -> np.ndarray:
        Y = np.atleast_2d(np.asarray(Y, dtype=float))
        if self.kind == "monomial":
            out = np.ones(Y.shape[0])
            for i, a in enumerate(self.alpha):
                col = Y[:, i]
                with np.errstate(divide="ignore"):
                    out *= np.where(col > 0, col ** (float(a) - 1), 0.0 if float(a) > 1 else (1.0 if float(a) == 1 else np.inf))
                out /= gamma_fn(a)
            out[np.any(Y < 0, axis=1)] = 0.0
            return out
        if self.kind == "cubic_2f1":
            return self._cubic_batch(Y)
        base, ok = self._base_batch(Y)
        e = self._exponent()
        out = np.zeros(Y.shape[0])
        pos = ok & (base > 0)
        out[pos] = self._constant() * base[pos] ** e
        zero = ok & (base == 0)
        if np.any(zero):
            out[zero] = self._constant() * self._power(0, e)
        return out

    def _cubic_batch(self, Y):
        a = float(self.alpha)
        v = float(self.v)
        y1, y2 = Y[:, 0], Y[:, 1]
        out = np.zeros(Y.shape[0])
        G = gamma_fn(self.alpha) * gamma_fn(as_half(self.alpha, 0, scale=2))
        inside = (y1 >= 0) & (y2 >= 0) & ((y1 > 0) | (y2 > 0))
        wall = inside & (y2 == v * y1)
        lower = inside & (y2 < v * y1)
        upper = inside & (y2 > v * y1)
        if np.any(lower):
            s1, s2 = y1[lower], y2[lower]
            z = s2 / (s2 - v * s1)
            out[lower] = (s2 / v) ** (2 * a - 1) * (v * s1 - s2) ** (a - 1) / G * gauss_2f1(1 - a, a, 2 * a, z)
        if np.any(upper):
            s1, s2 = y1[upper], y2[upper]
            z = -v * s1 / (s2 - v * s1)
            with np.errstate(divide="ignore"):
                out[upper] = s1 ** (2 * a - 1) * (s2 - v * s1) ** (a - 1) / G * gauss_2f1(1 - a, a, 2 * a, z)
        if np.any(wall):
            # both fiber endpoints coincide: a Beta integral
            if a > 0.5:
                beta = math.exp(math.lgamma(2 * a - 1) + math.lgamma(a) - math.lgamma(3 * a - 1))
                out[wall] = v ** (a - 1) * y1[wall] ** (3 * a - 2) * beta / gamma_fn(self.alpha) ** 3
            else:
                out[wall] = np.inf
        return out

    def to_dict(self) -> dict:
        doc = {"type": "closed_form", "kind": self.kind, "alpha": _num_str(self.alpha)}
        if self.m is not None:
            doc["m"] = self.m
        if self.v is not None:
            doc["v"] = _num_str(self.v)
        return doc

    @classmethod
    def from_dict(cls, doc) -> "ClosedFormKernel":
        alpha = doc["alpha"]
        alpha = [_parse_num(a) for a in alpha] if isinstance(alpha, list) else _parse_num(alpha)
        return cls(doc["kind"], alpha, doc.get("m"), None if doc.get("v") is None else _parse_num(doc["v"]))


def as_half(alpha, shift, scale=1):
    """scale * alpha + shift/2, kept rational when alpha is rational."""
    try:
        return as_rational(alpha) * scale + Fraction(shift, 2)
    except TypeError:
        return float(alpha) * scale + shift / 2


def _num_str(a):
    if isinstance(a, (list, tuple)):
        return [_num_str(v) for v in a]
    if isinstance(a, (int, Fraction)):
        return rational_str(as_rational(a))
    return repr(float(a))


def _parse_num(s):
    if isinstance(s, (int, float)):
        return s
    if isinstance(s, str) and any(c in s for c in ".eEn"):
        return float(s)  # written by _num_str from a float
    try:
        return as_rational(s)
    except (ValueError, ZeroDivisionError):
        return float(s)


# ---------------------------------------------------------------------------
# First convolution stage of the E_{3,5} kernel


def _stage_factors(alpha: float, y):
    """Support interval [lo, hi] in s and the linear factors of the stage integrand.

    Returns (lo, hi, factors, const) with factors a list of (kind, root, exponent):
    kind +1 means (s - root), -1 means (root - s).
    """
    y1, y2, y3, y4, y5 = y
    S = y1 + y2 + y3
    e23 = y1 * y2 + y1 * y3 + y2 * y3
    sq = y1 * y1 + y2 * y2 + y3 * y3
    disc = S * S + 4 * (e23 - sq)
    if disc < 0 or y4 < 0 or y5 < 0:
        return None
    r = math.sqrt(disc)
    r1m, r1p = (S - r) / 2, (S + r) / 2
    a = (math.sqrt(y4) - math.sqrt(y5)) ** 2
    b = (math.sqrt(y4) + math.sqrt(y5)) ** 2
    lo = max(0.0, r1m, a)
    hi = min(r1p, b)
    if not lo < hi:
        return None
    e1, e2 = alpha - 2.0, alpha - 1.5
    factors = [(+1, 0.0, 1.0 - alpha), (+1, r1m, e1), (-1, r1p, e1), (+1, a, e2), (-1, b, e2)]
    # q1 base = (s - r1m)(r1p - s); q2 base = (s - a)(b - s)/2
    const = gamma_fn(alpha) * 0.5 ** e2
    return lo, hi, factors, const


def _stage_constants(alpha):
    q1 = ClosedFormKernel("e24", alpha)._constant()
    q2 = ClosedFormKernel("e23", alpha)._constant()
    return q1 * q2


def kernel_e35_stage(alpha, y, cfg: QuadratureConfig = QuadratureConfig(rel_tol=1e-10)) -> float:
    """int_0^inf Gamma(alpha) s^(1-alpha) q1(y1,y2,y3,s) q2(y4,y5,s) ds, the kernel of (Q4 + x5 E_{2,4})^-alpha.

    q1, q2 are the E_{2,4} and E_{2,3} kernels. The support in s is found from
    the roots of the two quadratic bases; endpoint singularities are handled
    by algebraic-weight adaptive quadrature.
    """
    a = float(alpha)
    if not a > 1:
        raise DomainError("the stage kernel requires alpha > 1")
    if len(y) != 5:
        raise StructuralError("the stage kernel takes 5 coordinates")
    yf = [float(v) for v in y]
    if any(v < 0 for v in yf):
        return 0.0
    info = _stage_factors(a, yf)
    if info is None:
        return 0.0
    lo, hi, factors, const = info
    ea = eb = 0.0
    smooth = []
    for kind, root, e in factors:
        if e == 0:
            continue
        if kind > 0 and root == lo:
            ea += e
        elif kind < 0 and root == hi:
            eb += e
        else:
            smooth.append((kind, root, e))

    def g(s):
        val = const
        for kind, root, e in smooth:
            val *= (kind * (s - root)) ** e
        return val

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        value, err, *rest = _sp_integrate.quad(
            g, lo, hi, weight="alg", wvar=(ea, eb), epsabs=0.0, epsrel=cfg.rel_tol,
            limit=cfg.max_subdivisions, full_output=1,
        )
    if not math.isfinite(value) or err > max(1e3 * cfg.rel_tol * abs(value), 1e-300):
        raise ConvergenceError(
            f"stage integral on s in [{lo:.6g}, {hi:.6g}] (endpoint exponents {ea:.3g}, {eb:.3g}) "
            f"reached error {err:.3g} for value {value:.6g}"
        )
    return value * _stage_constants(alpha)


@dataclass
class StageKernel:
    """The E_{3,5} first-stage kernel as an object with the common kernel interface."""

    alpha: object
    nodes: int = 48

    def __post_init__(self):
        if not float(self.alpha) > 1:
            raise DomainError("the stage kernel requires alpha > 1")

    dim = 5

    def evaluate(self, y) -> float:
        return kernel_e35_stage(self.alpha, y)

    __call__ = evaluate

    def polynomial(self) -> SparsePoly:
        names = SparsePoly.default_variables(5)
        x = [SparsePoly.variable(names, i) for i in range(5)]
        q4 = x[0] * x[1] * x[3] + x[0] * x[2] * x[3] + x[1] * x[2] * x[3]
        e24 = SparsePoly(names, {})
        for i, j in itertools.combinations(range(4), 2):
            e24 = e24 + x[i] * x[j]
        return q4 + x[4] * e24

    def laplace_target(self, x) -> float:
        val = float(self.polynomial().evaluate_float(np.array([float(v) for v in x])))
        return val ** -float(self.alpha)

    def laplace_frame(self, x) -> ConeDomain:
        x = np.asarray([float(v) for v in x])
        return ConeDomain(np.diag(1.0 / x), x)

    def evaluate_batch(self, Y: np.ndarray) -> np.ndarray:
        """Fixed-node version for Monte Carlo: s = lo + (hi - lo)(1 - cos theta)/2, Gauss-Legendre in theta."""
        a = float(self.alpha)
        Y = np.atleast_2d(np.asarray(Y, dtype=float))
        y1, y2, y3, y4, y5 = Y.T
        S = y1 + y2 + y3
        e23 = y1 * y2 + y1 * y3 + y2 * y3
        sq = y1 ** 2 + y2 ** 2 + y3 ** 2
        disc = S * S + 4 * (e23 - sq)
        out = np.zeros(Y.shape[0])
        ok = (disc > 0) & np.all(Y >= 0, axis=1)
        r = np.sqrt(np.where(ok, disc, 0.0))
        r1m, r1p = (S - r) / 2, (S + r) / 2
        sa, sb = np.sqrt(np.abs(y4)), np.sqrt(np.abs(y5))
        qa, qb = (sa - sb) ** 2, (sa + sb) ** 2
        lo = np.maximum(np.maximum(0.0, r1m), qa)
        hi = np.minimum(r1p, qb)
        ok &= lo < hi
        if not np.any(ok):
            return out
        idx = np.nonzero(ok)[0]
        g, w = np.polynomial.legendre.leggauss(self.nodes)
        theta = (g + 1) * math.pi / 2
        wt = w * math.pi / 2
        L, H = lo[idx, None], hi[idx, None]
        s = L + (H - L) * (1 - np.cos(theta))[None, :] / 2
        ds = (H - L) * np.sin(theta)[None, :] / 2
        b1 = np.clip((s - r1m[idx, None]) * (r1p[idx, None] - s), 0, None)
        b2 = np.clip((s - qa[idx, None]) * (qb[idx, None] - s) / 2, 0, None)
        with np.errstate(divide="ignore", invalid="ignore"):
            f = s ** (1 - a) * b1 ** (a - 2) * b2 ** (a - 1.5)
        f = np.where(np.isfinite(f), f, 0.0)
        out[idx] = gamma_fn(self.alpha) * _stage_constants(self.alpha) * (f * ds) @ wt
        return out

    def to_dict(self) -> dict:
        return {"type": "stage", "kind": "e35_stage", "alpha": _num_str(self.alpha)}
