"""Command-line front end.

    rieszlab <command> <problem.json> [--samples N] [--seed S] [--tol T]
             [--max-order K] [--threads N] [--output PATH]

Commands: chambers, kernel, certify, refute, otideal, laplace-check,
hyperbolicity, garding. Exit status is 0 on success, 1 when a refutation is
found and 2 on errors.
"""

from __future__ import annotations

import argparse
import os
import sys
from fractions import Fraction

from . import __version__
from .certify import CM_REFUTED, CertifyConfig, Problem, certify, laplace_check, refute_cm
from .certify import _domain_points, _spd_points
from .convalg import circuit_polynomial, circuits
from .exactalg import SparsePoly, rational_str
from .hyperbolicity import (
    HyperbolicInstance,
    cone_membership,
    elementary_symmetric,
    hyperbolicity_check,
    identity_point,
    symmetric_determinant,
)
from .io import ProblemError, dumps, load_document, parse_matrix, parse_polynomial, parse_real, parse_vector
from .kernels import ClosedFormKernel, StageKernel, kernel_linear_forms, poly_to_terms
from .polyhedra import chamber_complex, cone_of_columns
from .special_fns import QuadratureConfig, garding_numeric

COMMANDS = ("chambers", "kernel", "certify", "refute", "otideal", "laplace-check", "hyperbolicity", "garding")
DEFAULTS = {"samples": 200_000, "seed": 0, "tol": 0.03, "max_order": 12, "threads": 1, "trials": 200}


# ---------------------------------------------------------------------------
# Problem decoding


def _matrix(doc):
    for key in ("linear_forms", "matrix"):
        if key in doc:
            return parse_matrix(doc[key], key)
    if {"rows", "cols", "entries"} <= doc.keys():
        return parse_matrix(doc, "document")
    raise ProblemError("field linear_forms is missing")


def _named_polynomial(name: str, m=None) -> tuple[SparsePoly, tuple]:
    if name == "det":
        m = int(m or 2)
        return symmetric_determinant(m), identity_point(m)
    if len(name) == 3 and name[0] == "e" and name[1:].isdigit():
        k, n = int(name[1]), int(name[2])
        return elementary_symmetric(k, n), (Fraction(1),) * n
    raise ProblemError(f"field name: unknown polynomial {name!r}")


def _alpha(doc):
    if "alpha" in doc:
        a = doc["alpha"]
        if isinstance(a, list):
            return [parse_real(v, f"alpha[{i}]") for i, v in enumerate(a)]
        return parse_real(a, "alpha")
    if "s" in doc:
        return -parse_real(doc["s"], "s")
    raise ProblemError("field alpha (or s) is missing")


def _polynomial(doc) -> tuple[SparsePoly, tuple]:
    kind = doc.get("kind")
    if kind == "named_polynomial":
        return _named_polynomial(doc.get("name", ""), doc.get("m"))
    if kind == "raw_polynomial":
        p = parse_polynomial(doc.get("polynomial"), "polynomial")
        e = parse_vector(doc["e"], "e") if "e" in doc else (Fraction(1),) * p.nvars
        return p, e
    if kind == "linear_forms":
        L = _matrix(doc)
        names = SparsePoly.default_variables(len(L))
        p = SparsePoly.constant(names, 1)
        for col in zip(*L):
            p = p * SparsePoly.linear_form(names, col)
        normals = cone_of_columns(L)
        return p, tuple(Fraction(sum(w[i] for w in normals)) for i in range(len(L)))
    raise ProblemError(f"field kind: expected linear_forms, named_polynomial or raw_polynomial, got {kind!r}")


def _problem(doc) -> Problem:
    kind = doc.get("kind")
    alpha = _alpha(doc)
    if kind == "linear_forms":
        return Problem("linear_forms", alpha, matrix=_matrix(doc))
    if kind == "named_polynomial":
        return Problem("named_polynomial", alpha, name=doc.get("name"), m=doc.get("m"))
    if kind == "raw_polynomial":
        p, e = _polynomial(doc)
        return Problem("raw_polynomial", alpha, polynomial=p, e=list(e))
    raise ProblemError(f"field kind: unsupported value {kind!r}")


def _kernel(doc, seed):
    kind = doc.get("kind")
    alpha = _alpha(doc)
    if kind == "linear_forms":
        L = _matrix(doc)
        if not isinstance(alpha, list):
            alpha = [alpha] * len(L[0])
        return kernel_linear_forms(L, alpha, seed=seed)
    if kind == "named_polynomial":
        name = doc.get("name")
        if name == "e35_stage":
            return StageKernel(alpha)
        if name == "det":
            return ClosedFormKernel("determinant", alpha, m=int(doc.get("m") or 2))
        if name == "cubic_2f1":
            return ClosedFormKernel("cubic_2f1", alpha, v=parse_real(doc.get("v"), "v"))
        if name in ("e23", "e24"):
            return ClosedFormKernel(name, alpha)
        raise ProblemError(f"field name: no kernel construction for {name!r}")
    raise ProblemError("kernels need kind linear_forms or named_polynomial")


def _points(doc, key):
    if key not in doc:
        return None
    if not isinstance(doc[key], list):
        raise ProblemError(f"field {key}: expected a list of points")
    return [parse_vector(v, f"{key}[{i}]") for i, v in enumerate(doc[key])]


# ---------------------------------------------------------------------------
# Commands


def cmd_chambers(doc, cfg):
    L = _matrix(doc)
    cc = chamber_complex(L, seed=cfg["seed"])
    return {
        "num_cells": len(cc.cells),
        "cells": [
            {"normals": [list(w) for w in normals], "rays": [list(r) for r in rays], "adjacent": cc.adjacent(i)}
            for i, (normals, rays) in enumerate(zip(cc.cells, cc.rays))
        ],
        "walls": [{"cells": [a, b], "normal": list(w)} for a, b, w in cc.walls],
    }, 0


def cmd_kernel(doc, cfg):
    K = _kernel(doc, cfg["seed"])
    out = {"kernel": K.to_dict()}
    pts = _points(doc, "evaluate")
    if pts:
        out["values"] = [{"y": [rational_str(v) for v in y], "value": _value(K.evaluate(y))} for y in pts]
    if hasattr(K, "wall_smoothness"):
        out["wall_smoothness"] = [{"cells": [a, b], "order": r} for a, b, r in K.wall_smoothness()]
    return out, 0


def _value(v):
    return rational_str(v) if isinstance(v, Fraction) else float(v)


def cmd_certify(doc, cfg):
    problem = _problem(doc)
    conf = CertifyConfig(samples=cfg["samples"], seed=cfg["seed"], tol=cfg["tol"],
                         max_order=cfg["max_order"], trials=cfg["trials"])
    cert = certify(problem, conf)
    return cert.to_dict(), (1 if cert.status == CM_REFUTED else 0)


def cmd_refute(doc, cfg):
    p, e = _polynomial(doc)
    s = -_alpha(doc)
    pts = _points(doc, "points")
    cone = HyperbolicInstance(p, e) if doc.get("check_cone") else None
    cert = refute_cm(p, s, cfg["max_order"], points=pts, cone_check=cone,
                     include_numerator=bool(doc.get("include_numerator")), seed=cfg["seed"])
    return cert.to_dict(), (1 if cert.status == CM_REFUTED else 0)


def cmd_otideal(doc, cfg):
    L = _matrix(doc)
    m = len(L[0])
    cs = circuits(L)
    return {
        "circuits": [{"support": [i + 1 for i in c.support], "coefficients": list(c.coefficients)} for c in cs],
        "generators": [poly_to_terms(circuit_polynomial(c, m)) for c in cs],
        "generators_text": [str(circuit_polynomial(c, m)) for c in cs],
    }, 0


def cmd_laplace(doc, cfg):
    K = _kernel(doc, cfg["seed"])
    pts = _points(doc, "x")
    if pts is None:
        if isinstance(K, ClosedFormKernel) and K.kind == "determinant":
            pts = _spd_points(K.m, 3, cfg["seed"])
        elif hasattr(K, "complex"):
            pts = _domain_points(K.complex.cone_normals, 3, cfg["seed"])
        else:
            pts = [(Fraction(1),) * K.dim]
    checks = [laplace_check(K, x, cfg["samples"], cfg["seed"] + i, tol=cfg["tol"]) for i, x in enumerate(pts)]
    return {"kernel": K.to_dict(), "checks": [c.to_dict() for c in checks],
            "all_passed": all(c.passed for c in checks)}, 0


def cmd_hyperbolicity(doc, cfg):
    p, e = _polynomial(doc)
    if "e" in doc:
        e = parse_vector(doc["e"], "e")
    inst = HyperbolicInstance(p, e)
    report = hyperbolicity_check(inst, cfg["trials"], cfg["seed"])
    out = {"polynomial": poly_to_terms(p), "e": [rational_str(v) for v in e], "report": report.to_dict()}
    pts = _points(doc, "points")
    if pts:
        out["membership"] = [{"x": [rational_str(v) for v in x], "member": cone_membership(inst, x)} for x in pts]
    return out, 0


def cmd_garding(doc, cfg):
    p, e = _polynomial(doc)
    if "e" in doc:
        e = parse_vector(doc["e"], "e")
    alpha = _alpha(doc)
    pts = _points(doc, "y") or []
    qc = QuadratureConfig(rel_tol=min(cfg["tol"], 1e-2), seed=cfg["seed"])
    values = []
    for y in pts:
        v, err = garding_numeric(p, e, alpha, y, qc)
        values.append({"y": [rational_str(c) for c in y], "value": v, "error_estimate": err})
    return {"polynomial": poly_to_terms(p), "e": [rational_str(v) for v in e], "values": values}, 0


HANDLERS = {
    "chambers": cmd_chambers,
    "kernel": cmd_kernel,
    "certify": cmd_certify,
    "refute": cmd_refute,
    "otideal": cmd_otideal,
    "laplace-check": cmd_laplace,
    "hyperbolicity": cmd_hyperbolicity,
    "garding": cmd_garding,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rieszlab", description="Riesz kernels and complete monotonicity.")
    parser.add_argument("--version", action="version", version=f"rieszlab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("input", help="problem file (JSON)")
        sp.add_argument("--samples", type=int)
        sp.add_argument("--seed", type=int)
        sp.add_argument("--tol", type=float)
        sp.add_argument("--max-order", dest="max_order", type=int)
        sp.add_argument("--threads", type=int, help="accepted and recorded; computation is single-threaded")
        sp.add_argument("--trials", type=int)
        sp.add_argument("--output", "-o")
    return parser


def resolve_config(args, doc) -> dict:
    cfg = dict(DEFAULTS)
    block = doc.get("config", {})
    if not isinstance(block, dict):
        raise ProblemError("field config: expected an object")
    for key, val in block.items():
        if key not in cfg:
            raise ProblemError(f"field config.{key}: unknown setting")
        cfg[key] = val
    for key in cfg:
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    env = os.environ.get("RIESZLAB_SEED")
    if env is not None:
        try:
            cfg["seed"] = int(env)
        except ValueError as exc:
            raise ProblemError(f"RIESZLAB_SEED={env!r} is not an integer") from exc
    return cfg


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        doc = load_document(args.input)
        cfg = resolve_config(args, doc)
        result, code = HANDLERS[args.command](doc, cfg)
    except (ValueError, ArithmeticError, RuntimeError, KeyError) as exc:
        print(f"rieszlab {args.command}: error: {exc}", file=sys.stderr)
        return 2
    out = {"tool": "rieszlab", "version": __version__, "command": args.command,
           "seed": cfg["seed"], "config": cfg, "result": result}
    text = dumps(out)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


def main() -> None:
    sys.exit(run())
