import json
import statistics
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import BINARY_L
from rieszlab.certify import (
    CM_CERTIFIED,
    CM_REFUTED,
    UNKNOWN,
    Certificate,
    CertifyConfig,
    DerivativeState,
    ExactPower,
    LaplaceCheck,
    PreconditionError,
    Problem,
    certify,
    laplace_check,
    laplace_residual,
    refute_cm,
    signed_derivative,
)
from rieszlab.exactalg import SparsePoly
from rieszlab.hyperbolicity import HyperbolicInstance, elementary_symmetric
from rieszlab.kernels import ClosedFormKernel

E23 = elementary_symmetric(2, 3)
S_REFUTE = Fraction(-5, 11)
FAST = CertifyConfig(samples=50_000, tol=0.05, nonneg_per_cell=50)


@pytest.fixture(scope="module")
def e23_refutation():
    return refute_cm(E23, S_REFUTE, max_order=12, points=[(1, 1, 1)])


class TestRefutation:
    def test_flagship_witness(self, e23_refutation):
        cert = e23_refutation
        assert cert.status == CM_REFUTED
        w = cert.witness
        assert w["order"] == 12
        assert w["numerator_terms"] == 61 and w["numerator_degree"] == 12
        val = w["derivative_value"]
        assert Fraction(val["rational"]) == Fraction(-16652440985600, 762638095543203)
        assert (val["base"], val["exponent"]) == ("3", "6/11")
        assert val["float"] == pytest.approx(-0.0397564287, abs=1e-8)

    def test_witness_recomputed_in_another_order(self, e23_refutation):
        beta = e23_refutation.witness["multiindex"]
        x0 = tuple(Fraction(v) for v in e23_refutation.witness["point"])
        state = DerivativeState.start(E23, S_REFUTE)
        for i in reversed(range(3)):
            for _ in range(beta[i]):
                state = state.step(i)
        assert state.signed_value(x0).rational < 0
        assert float(state.value(x0)) == pytest.approx(e23_refutation.witness["derivative_value"]["float"])

    def test_all_lower_orders_are_nonnegative(self):
        # nothing of order <= 11 refutes at all-ones
        cert = refute_cm(E23, S_REFUTE, max_order=11, points=[(1, 1, 1)])
        assert cert.status == UNKNOWN

    def test_exponent_below_threshold_is_unknown(self):
        assert refute_cm(E23, Fraction(-3, 5), max_order=8, points=[(1, 1, 1)]).status == UNKNOWN

    def test_positive_power_is_refuted_quickly(self):
        cert = refute_cm(E23, 1, max_order=3)
        assert cert.status == CM_REFUTED and cert.witness["order"] == 1

    def test_point_outside_cone_rejected(self):
        with pytest.raises(PreconditionError):
            refute_cm(E23, S_REFUTE, points=[(1, 1, -1)], cone_check=HyperbolicInstance(E23, (1, 1, 1)))
        with pytest.raises(PreconditionError):
            refute_cm(E23, S_REFUTE, points=[(1, -1, -1)])

    def test_nonsymmetric_search(self):
        x = ("x1", "x2")
        p = SparsePoly(x, {(1, 1): 1, (2, 0): 1})  # x1 (x1 + x2), positive on the orthant
        cert = refute_cm(p, Fraction(-1, 3), max_order=6, points=[(1, 1)])
        assert cert.problem["symmetric_pruning"] is False
        assert cert.status in (CM_REFUTED, UNKNOWN)
        if cert.status == CM_REFUTED:
            beta = cert.witness["multiindex"]
            assert signed_derivative(p, Fraction(-1, 3), beta).sign((1, 1)) < 0

    @given(st.permutations([0, 0, 1, 1, 2, 2, 2]), st.fractions(-2, 2, max_denominator=5))
    def test_derivative_order_independence(self, order, s):
        base = signed_derivative(E23, s, (2, 2, 3))
        state = DerivativeState.start(E23, s)
        for i in order:
            state = state.step(i)
        assert state.P == base.P

    def test_exact_power_normalisation(self):
        v = ExactPower.normalized(2, 3, Fraction(-7, 4))
        assert v.exponent == Fraction(1, 4) and v.rational == Fraction(2, 9)
        assert float(v) == pytest.approx(2 * 3 ** -1.75)


class TestLaplace:
    def test_residual_shrinks_with_samples(self):
        K = ClosedFormKernel("monomial", (Fraction(5, 2),))
        small = statistics.median(laplace_residual(K, (2,), 10_000, seed) for seed in range(5))
        large = statistics.median(laplace_residual(K, (2,), 1_000_000, seed) for seed in range(5))
        assert large < small

    def test_seed_determinism(self):
        K = ClosedFormKernel("e23", 2)
        a = laplace_check(K, (1, 2, 3), 70_000, seed=4)
        b = laplace_check(K, (1, 2, 3), 70_000, seed=4)
        c = laplace_check(K, (1, 2, 3), 70_000, seed=5)
        assert a.estimate == b.estimate and a.stderr == b.stderr
        assert a.estimate != c.estimate

    def test_explicit_target(self):
        K = ClosedFormKernel("monomial", (1, 2))
        chk = laplace_check(K, (1, 1), 100_000, target=1.0, tol=0.02)
        assert chk.passed and chk.target == 1.0


class TestCertify:
    def test_binary_forms_certified(self):
        cert = certify(Problem("linear_forms", [1, 1, 1, 1], matrix=BINARY_L), FAST)
        assert cert.status == CM_CERTIFIED
        assert cert.nonnegativity["passed"] and cert.hyperbolicity["passed"]
        assert len(cert.laplace_checks) == 3

    def test_e23_certified_above_threshold(self):
        assert certify(Problem("named_polynomial", 2, name="e23"), FAST).status == CM_CERTIFIED

    def test_e23_refuted_below_threshold(self):
        cert = certify(Problem("named_polynomial", Fraction(5, 11), name="e23"), FAST)
        assert cert.status == CM_REFUTED

    @pytest.mark.parametrize("problem", [
        Problem("named_polynomial", Fraction(1, 2), name="e23"),
        Problem("named_polynomial", Fraction(1, 2), name="det", m=2),
        Problem("linear_forms", Fraction(1, 2), matrix=BINARY_L),
        Problem("linear_forms", 1, matrix=[[1, 2], [2, 4]]),
    ], ids=["threshold", "gindikin-singular", "real-alpha-forms", "degenerate"])
    def test_unknown_cases(self, problem):
        assert certify(problem, FAST).status == UNKNOWN

    def test_non_hyperbolic_is_refuted(self):
        p = SparsePoly(("x1", "x2"), {(2, 0): 1, (0, 2): 1})
        cert = certify(Problem("raw_polynomial", 1, polynomial=p), FAST)
        assert cert.status == CM_REFUTED
        assert cert.hyperbolicity["passed"] is False

    def test_determinant_certified(self):
        assert certify(Problem("named_polynomial", 2, name="det", m=2), FAST).status == CM_CERTIFIED


class TestSerialisation:
    def test_certificate_round_trip(self, e23_refutation):
        cert = certify(Problem("linear_forms", [1, 1, 1, 1], matrix=BINARY_L), FAST)
        for c in (cert, e23_refutation):
            text = json.dumps(c.to_dict(), sort_keys=True)
            again = Certificate.from_dict(json.loads(text))
            assert again.to_dict() == c.to_dict()

    def test_problem_round_trip(self):
        for p in (Problem("linear_forms", [1, 2, 1, 1], matrix=BINARY_L),
                  Problem("named_polynomial", Fraction(5, 2), name="det", m=3),
                  Problem("raw_polynomial", 3, polynomial=E23, e=[1, 1, 1])):
            assert Problem.from_dict(json.loads(json.dumps(p.to_dict()))).to_dict() == p.to_dict()

    def test_laplace_check_round_trip(self):
        chk = laplace_check(ClosedFormKernel("e23", 2), (1, 1, 1), 10_000)
        assert LaplaceCheck.from_dict(chk.to_dict()) == chk
