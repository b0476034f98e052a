"""Floating-point special functions and numerical integration.

Gamma (with an exact path at integers and half-integers), Gauss 2F1,
adaptive 1-D quadrature, seeded Monte Carlo over simplicial cones and the
Garding oscillatory integral for n <= 2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np
from scipy import integrate as _sp_integrate

from .exactalg import SparsePoly, as_rational, as_vector


class DomainError(ValueError):
    """A parameter lies outside the domain where the function is defined."""


class ConvergenceError(RuntimeError):
    """A numerical procedure did not reach its tolerance within budget."""


@dataclass(frozen=True)
class QuadratureConfig:
    rel_tol: float = 1e-8
    max_subdivisions: int = 200
    seed: int = 0
    samples: int = 100_000

    def __post_init__(self):
        if not self.rel_tol > 0:
            raise DomainError("tolerance must be positive")
        if self.samples < 1000:
            raise DomainError("at least 1000 Monte Carlo samples are required")
        if self.max_subdivisions < 1:
            raise DomainError("max_subdivisions must be positive")


# ---------------------------------------------------------------------------
# Gamma


def gamma_exact(a) -> tuple[Fraction, int] | None:
    """Gamma at a positive integer or half-integer as ``(r, k)`` meaning ``r * sqrt(pi)**k``.

    Returns None for other arguments.
    """
    try:
        q = as_rational(a)
    except TypeError:
        return None
    if q <= 0:
        raise DomainError(f"Gamma requires a > 0, got {a}")
    if q.denominator == 1:
        return Fraction(math.factorial(q.numerator - 1)), 0
    if q.denominator == 2:
        n = (q.numerator - 1) // 2  # a = n + 1/2
        return Fraction(math.factorial(2 * n), 4 ** n * math.factorial(n)), 1
    return None


def gamma_fn(a) -> float:
    a_val = float(a)
    if not a_val > 0:
        raise DomainError(f"Gamma requires a > 0, got {a}")
    if isinstance(a, (int, Fraction)):
        ex = gamma_exact(a)
        if ex is not None:
            r, k = ex
            return float(r) * math.sqrt(math.pi) ** k
    return math.gamma(a_val)


# ---------------------------------------------------------------------------
# Gauss hypergeometric function


def _is_nonpositive_int(v: float) -> bool:
    return v <= 0 and float(v).is_integer()


def _2f1_series(a, b, c, z, max_terms, tol):
    z = np.asarray(z, dtype=float)
    term = np.ones_like(z)
    total = np.ones_like(z)
    for k in range(max_terms):
        term = term * ((a + k) * (b + k) / ((c + k) * (k + 1))) * z
        total = total + term
        if np.all(np.abs(term) <= tol * np.abs(total)) and k > 2:
            return total
    raise ConvergenceError(
        f"2F1({a}, {b}; {c}; z) series did not converge in {max_terms} terms "
        f"(max |z| = {float(np.max(np.abs(z))):.6g})"
    )


def gauss_2f1(a, b, c, z, max_terms: int = 200_000, tol: float = 1e-15):
    """Gauss hypergeometric function 2F1(a, b; c; z) for real z < 1.

    Power series in whichever of z and z/(z-1) is smaller in modulus, using
    2F1(a,b;c;z) = (1-z)^(-a) 2F1(a, c-b; c; z/(z-1)). Terminating series
    (a or b a nonpositive integer) are summed directly for any z < 1.
    """
    a, b, c = float(a), float(b), float(c)
    if _is_nonpositive_int(c):
        raise DomainError(f"2F1 undefined for c = {c} (nonpositive integer)")
    scalar = np.ndim(z) == 0
    z = np.atleast_1d(np.asarray(z, dtype=float))
    if np.any(z >= 1) or not np.all(np.isfinite(z)):
        raise DomainError("2F1 is only evaluated for finite z < 1")
    out = np.empty_like(z)
    if _is_nonpositive_int(a) or _is_nonpositive_int(b):
        n = int(-min(x for x in (a, b) if _is_nonpositive_int(x)))
        out = _2f1_series(a, b, c, z, n + 2, 0.0) if n else np.ones_like(z)
        return float(out[0]) if scalar else out
    w = z / (z - 1.0)
    direct = np.abs(z) <= np.abs(w)
    if np.any(direct):
        out[direct] = _2f1_series(a, b, c, z[direct], max_terms, tol)
    if np.any(~direct):
        zz = z[~direct]
        if _is_nonpositive_int(c - b):
            n = int(-(c - b))
            s = _2f1_series(a, c - b, c, w[~direct], n + 2, 0.0) if n else np.ones_like(zz)
        else:
            s = _2f1_series(a, c - b, c, w[~direct], max_terms, tol)
        out[~direct] = (1.0 - zz) ** (-a) * s
    return float(out[0]) if scalar else out


# ---------------------------------------------------------------------------
# Numerical integration


@dataclass(frozen=True)
class ConeDomain:
    """Simplicial cone ``{G w : w >= 0}`` sampled with exponential tilt ``exp(-<rate, y>)``.

    ``frame`` has the generators as columns. ``pairing`` optionally weights
    the coordinates in ``<rate, y>`` (for non-standard dual pairings).
    """

    frame: np.ndarray
    rate: np.ndarray
    pairing: np.ndarray | None = None

    def tilt(self):
        G = np.asarray(self.frame, dtype=float)
        x = np.asarray(self.rate, dtype=float)
        if self.pairing is not None:
            x = x * np.asarray(self.pairing, dtype=float)
        lam = G.T @ x
        if np.any(lam <= 0):
            raise DomainError("rate must pair positively with every frame generator")
        jac = abs(np.linalg.det(G)) / np.prod(lam)
        return G, x, lam, jac


CHUNK = 1 << 16


def _substream(seed: int, chunk: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(chunk,))))


def mc_cone_mean(weight: Callable[[np.ndarray], np.ndarray], domain: ConeDomain, samples: int, seed: int):
    """Estimate ``int_cone weight(y) exp(-<rate,y>) dy`` as (value, standard error).

    Samples come in fixed-size chunks, each drawn from its own counter-based
    substream of the seed, so results do not depend on scheduling.
    """
    G, _, lam, jac = domain.tilt()
    total = 0.0
    total_sq = 0.0
    done = 0
    chunk = 0
    while done < samples:
        size = min(CHUNK, samples - done)
        rng = _substream(seed, chunk)
        w = rng.standard_exponential((size, len(lam))) / lam
        y = w @ G.T
        vals = np.asarray(weight(y), dtype=float)
        if not np.all(np.isfinite(vals)):
            bad = y[~np.isfinite(vals)][0]
            raise FloatingPointError(f"non-finite integrand at y = {bad.tolist()}")
        total += float(vals.sum())
        total_sq += float((vals * vals).sum())
        done += size
        chunk += 1
    mean = total / samples
    var = max(total_sq / samples - mean * mean, 0.0)
    return jac * mean, jac * math.sqrt(var / samples)


def integrate_numeric(f: Callable, domain, cfg: QuadratureConfig = QuadratureConfig()):
    """Integrate ``f`` over an interval ``(a, b)`` (adaptive) or a ConeDomain (Monte Carlo).

    Returns ``(value, error_estimate)``. For a cone, ``f`` receives an array
    of shape (N, n) and must be vectorised.
    """
    if isinstance(domain, ConeDomain):
        _, x, _, _ = domain.tilt()
        return mc_cone_mean(lambda y: f(y) * np.exp(y @ x), domain, cfg.samples, cfg.seed)
    lo, hi = (float(v) for v in domain)
    with np.errstate(all="ignore"):
        value, err, *info = _sp_integrate.quad(
            f, lo, hi, epsabs=0.0, epsrel=cfg.rel_tol, limit=cfg.max_subdivisions, full_output=1
        )
    scale = max(abs(value), 1e-300)
    if not math.isfinite(value) or err > max(10 * cfg.rel_tol * scale, 1e-14):
        raise ConvergenceError(
            f"adaptive quadrature on [{lo}, {hi}] reached error {err:.3g} for value {value:.6g}"
        )
    return value, err


# ---------------------------------------------------------------------------
# Garding integral


def _complex_eval(p: SparsePoly, pts: np.ndarray) -> np.ndarray:
    out = np.zeros(pts.shape[:-1], dtype=complex)
    for e, c in p.items():
        term = np.full(pts.shape[:-1], float(c), dtype=complex)
        for i, k in enumerate(e):
            if k:
                term = term * pts[..., i] ** k
        out = out + term
    return out


def _line_coefficients(p: SparsePoly, e) -> list[SparsePoly]:
    """Coefficients c_j(x) with p(x + s e) = sum_j c_j(x) s^j."""
    n = p.nvars
    names = p.variables + ("_s",)
    s = SparsePoly.variable(names, n)
    images = [SparsePoly.variable(names, i) + s * e[i] for i in range(n)]
    lifted = SparsePoly(names, {k + (0,): v for k, v in p.items()})
    full = lifted.substitute(images + [s])
    d = p.degree()
    coeffs = [dict() for _ in range(d + 1)]
    for k, v in full.items():
        coeffs[k[-1]][k[:-1]] = v
    return [SparsePoly(p.variables, c) for c in coeffs]


def _gl_panels(R: float, width: float, order: int):
    panels = max(2, math.ceil(2 * R / width))
    edges = np.linspace(-R, R, panels + 1)
    g, w = np.polynomial.legendre.leggauss(order)
    half = (edges[1:] - edges[:-1]) / 2
    mid = (edges[1:] + edges[:-1]) / 2
    nodes = (mid[:, None] + half[:, None] * g[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def garding_numeric(p: SparsePoly, e, alpha, y, cfg: QuadratureConfig = QuadratureConfig(rel_tol=1e-3),
                    max_radius: float = 512.0):
    """Numerically evaluate ``(2 pi)^-n int p(e + i x)^-alpha exp(<y, e + i x>) dx``.

    Returns ``(value, error_estimate)``. The power uses the branch that is
    continuous along rays from x = 0: with mu_k(x) the negated roots of
    s -> p(x + s e), p(e + i x) = p(e) prod (1 + i mu_k) and each factor has
    positive real part, so principal logs add up continuously.
    """
    from .hyperbolicity import HyperbolicInstance, hyperbolicity_check

    e = as_vector(e)
    n = p.nvars
    if n > 2:
        raise DomainError("garding_numeric supports n <= 2 only")
    if len(e) != n or len(y) != n:
        raise DomainError("e and y must have one entry per variable")
    pe = p.evaluate(e)
    if pe <= 0:
        raise DomainError("e must satisfy p(e) > 0")
    if not float(alpha) > n:
        raise DomainError(f"the pointwise kernel needs alpha > n = {n}")
    report = hyperbolicity_check(HyperbolicInstance(p, e), trials=50, seed=cfg.seed)
    if not report.passed:
        raise DomainError(f"p is not hyperbolic in direction e (witness {report.witness})")
    alpha_f = float(alpha)
    y_f = np.array([float(v) for v in y])
    e_f = np.array([float(v) for v in e])
    integer_alpha = alpha_f.is_integer()
    d = p.degree()
    coeffs = None if integer_alpha else _line_coefficients(p, e)
    pe_f = float(pe)

    def integrand(X):
        Z = e_f + 1j * X
        if integer_alpha:
            val = _complex_eval(p, Z) ** (-int(alpha_f))
        else:
            c = np.stack([q.evaluate_float(X) for q in coeffs], axis=-1)  # (..., d+1)
            lead = c[..., d]
            comp = np.zeros(X.shape[:-1] + (d, d))
            comp[..., 0, :] = -c[..., d - 1::-1] / lead[..., None]
            if d > 1:
                comp[..., np.arange(1, d), np.arange(d - 1)] = 1.0
            roots = np.linalg.eigvals(comp).real
            mu = -roots
            val = pe_f ** (-alpha_f) * np.prod((1 + 1j * mu) ** (-alpha_f), axis=-1)
        return val * np.exp(Z @ y_f)

    width = math.pi / (float(np.max(np.abs(y_f))) + 1.0)

    def box(R, order):
        nodes, weights = _gl_panels(R, width, order)
        if n == 1:
            return complex(np.sum(integrand(nodes[:, None]) * weights))
        total = 0j
        step = max(1, 2_000_000 // len(nodes))
        for start in range(0, len(nodes), step):
            x1 = nodes[start:start + step]
            X = np.stack(np.meshgrid(x1, nodes, indexing="ij"), axis=-1)
            vals = integrand(X)
            total += complex(np.einsum("i,ij,j->", weights[start:start + step], vals, weights))
        return total

    scale = (2 * math.pi) ** (-n)
    R = 8.0
    prev = box(R, 8) * scale
    while True:
        R2 = 2 * R
        fine = box(R2, 8) * scale
        coarse = box(R2, 6) * scale
        tail = abs(fine - prev)
        err = tail + abs(fine - coarse)
        ref = max(abs(fine.real), 1.0)
        if err <= cfg.rel_tol * ref:
            return fine.real, err
        if R2 >= max_radius:
            raise ConvergenceError(
                f"Garding integral not converged at radius {R2}: error estimate {err:.3g}; "
                "try a larger alpha"
            )
        R, prev = R2, fine

