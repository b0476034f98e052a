"""Riesz kernels, complete monotonicity certificates and refutations for negative powers of hyperbolic polynomials."""

__version__ = "0.1.0"
