import math

import numpy as np
import pytest

from qfloquet.expressions import parse
from qfloquet.floquet import Stability
from qfloquet.hill import (HillProblem, NotRealCoefficient, analyze,
                           classify_real, companion, k_matrix_diagnostics)
from qfloquet.qmatrix import QMatrix, _complete_unitary, qdet
from qfloquet.quaternion import J, Quaternion


def hermitian_2x2_eigs(K_mat):
    """Closed-form eigenvalues of a 2x2 Hermitian quaternion matrix."""
    a = K_mat[0, 0].q0
    d = K_mat[1, 1].q0
    b = abs(K_mat[0, 1])
    mid = 0.5 * (a + d)
    disc = math.sqrt((0.5 * (a - d)) ** 2 + b * b)
    return mid - disc, mid + disc


def test_companion_of_zero_coefficient():
    p = HillProblem(parse("0"), math.pi)
    spec = companion(p)
    A0 = spec.evaluate(0.0)
    assert A0[0, 0] == Quaternion()
    assert A0[0, 1] == Quaternion(1)
    assert A0[1, 0] == Quaternion()
    assert A0[1, 1] == Quaternion()


def test_companion_entry_signs(hill_trace_inconclusive, hill_trace_unstable):
    spec = companion(hill_trace_inconclusive)
    assert abs(spec.evaluate(0.0)[1, 0] - (-(Quaternion(2) + J))) < 1e-15
    spec = companion(hill_trace_unstable)
    assert abs(spec.evaluate(0.0)[1, 0] - (Quaternion(1) - J)) < 1e-15


def test_trace_inconclusive_case(hill_report_inconclusive):
    r = hill_report_inconclusive
    assert r.re_trace == pytest.approx(-0.262372, abs=0.005)
    assert r.frob_sq == pytest.approx(5.14637, abs=1e-2)
    mults = sorted(r.multipliers.expanded(), key=lambda z: abs(z))
    assert abs(mults[1] - complex(-0.197803, 1.73905)) < 0.02
    assert abs(mults[0] - complex(-0.064569, 0.567682)) < 0.02
    assert r.verdict_trace.kind == Stability.UNDETERMINED
    assert r.verdict_frobenius.kind == Stability.UNSTABLE
    assert r.verdict_multipliers.kind == Stability.UNSTABLE


def test_trace_unstable_case(hill_report_unstable):
    r = hill_report_unstable
    assert r.re_trace == pytest.approx(27.2976, abs=0.3)
    big = max(r.multipliers.expanded(), key=abs)
    assert abs(big - complex(27.2621, 4.96756)) < 0.3
    assert r.verdict_trace.kind == Stability.UNSTABLE
    moduli = [abs(v) for v in r.multipliers.expanded()]
    assert moduli[0] * moduli[1] == pytest.approx(1.0, abs=1e-4)


def test_large_frobenius_case(hill_report_frobenius):
    r = hill_report_frobenius
    assert abs(r.re_trace) == pytest.approx(1.0394, abs=0.02)
    assert r.frob_sq == pytest.approx(1942.77, rel=0.02)
    big = max(r.multipliers.expanded(), key=abs)
    assert abs(big - complex(-1.03876, 40.196)) < 0.5
    assert r.verdict_trace.kind == Stability.UNDETERMINED
    assert r.verdict_frobenius.kind == Stability.UNSTABLE
    assert r.verdict_multipliers.kind == Stability.UNSTABLE


def test_liouville_determinant_one(hill_report_inconclusive,
                                   hill_report_unstable,
                                   hill_report_frobenius):
    for r in (hill_report_inconclusive, hill_report_unstable,
              hill_report_frobenius):
        assert qdet(r.M_T) == pytest.approx(1.0, abs=1e-6)


def test_multiplier_trace_constraint(hill_report_inconclusive,
                                     hill_report_unstable,
                                     hill_report_frobenius):
    for r in (hill_report_inconclusive, hill_report_unstable,
              hill_report_frobenius):
        re_sum = sum(v.real for v in r.multipliers.expanded())
        assert re_sum == pytest.approx(r.re_trace, abs=1e-5)
        moduli = [abs(v) for v in r.multipliers.expanded()]
        assert moduli[0] * moduli[1] == pytest.approx(1.0, abs=1e-5)


def test_unstable_channels_imply_multiplier_instability(
        hill_report_inconclusive, hill_report_unstable,
        hill_report_frobenius):
    for r in (hill_report_inconclusive, hill_report_unstable,
              hill_report_frobenius):
        if (r.verdict_trace.kind == Stability.UNSTABLE
                or r.verdict_frobenius.kind == Stability.UNSTABLE):
            assert r.verdict_multipliers.kind == Stability.UNSTABLE


def test_k_matrix_identity():
    k1, k2, residual = k_matrix_diagnostics(QMatrix.identity(2))
    assert (k1, k2) == (pytest.approx(1.0), pytest.approx(1.0))
    assert residual == pytest.approx(0.0, abs=1e-12)


def test_k_matrix_unitary_monodromy():
    rng = np.random.default_rng(51)
    first = QMatrix(rng.uniform(-1, 1, (2, 1, 4)))
    first = first * (1.0 / math.sqrt(first.frobenius_sq()))
    basis = _complete_unitary(first, 2)
    U = QMatrix(np.concatenate([b.data for b in basis], axis=1))
    k1, k2, _ = k_matrix_diagnostics(U)
    assert k1 == pytest.approx(1.0, abs=1e-10)
    assert k2 == pytest.approx(1.0, abs=1e-10)


def test_k_matrix_eigs_match_closed_form(hill_report_inconclusive):
    M = hill_report_inconclusive.M_T
    k1, k2, _ = k_matrix_diagnostics(M)
    K_mat = M @ M.dagger()
    lo, hi = hermitian_2x2_eigs(K_mat)
    assert k1 == pytest.approx(lo, rel=1e-8)
    assert k2 == pytest.approx(hi, rel=1e-8)
    assert 0.0 <= k1 <= k2
    assert k1 * k2 == pytest.approx(1.0, abs=1e-6)


def test_volume_product_through_floquet_machinery(hill_trace_inconclusive):
    # trace-free companion system: the multiplier moduli must multiply to 1
    from qfloquet.floquet import multiplier_product_check, normal_form
    spec = companion(hill_trace_inconclusive)
    fd = normal_form(spec)
    assert multiplier_product_check(fd, spec) <= 1e-7


def test_k_matrix_residual_is_reported(hill_report_inconclusive):
    k1, k2, residual = k_matrix_diagnostics(hill_report_inconclusive.M_T)
    assert residual >= 0.0  # informational; no assertion on its size


def test_classify_real_rotation_full_period():
    verdict = classify_real(HillProblem(parse("1"), 2 * math.pi))
    assert verdict.kind == Stability.STABLE


def test_classify_real_rotation_half_period():
    # M(pi) = -I with trace -2: still stable
    verdict = classify_real(HillProblem(parse("1"), math.pi))
    assert verdict.kind == Stability.STABLE


def test_classify_real_hyperbolic():
    verdict = classify_real(HillProblem(parse("-1"), math.pi))
    assert verdict.kind == Stability.UNSTABLE


def test_classify_real_interior_trace():
    # 0 < a constant, period short of a full rotation: |tr| < 2
    verdict = classify_real(HillProblem(parse("1"), 1.0))
    assert verdict.kind == Stability.STABLE


def test_classify_real_rejects_quaternion_coefficient(hill_trace_unstable):
    with pytest.raises(NotRealCoefficient):
        classify_real(hill_trace_unstable)


def test_real_specialization_agrees_with_multipliers():
    for const in (-0.5, 0.3, 2.0):
        problem = HillProblem(parse(f"{const} + 0*cos(2*t)"), math.pi)
        trace_verdict = classify_real(problem)
        report = analyze(problem)
        if trace_verdict.kind == Stability.UNSTABLE:
            assert report.verdict_multipliers.kind == Stability.UNSTABLE
        if trace_verdict.kind == Stability.STABLE:
            assert report.verdict_multipliers.kind in (
                Stability.STABLE, Stability.ASYMPTOTICALLY_STABLE)


def test_hill_problem_requires_periodic_coefficient():
    with pytest.raises(ValueError):
        HillProblem(parse("cos(t)"), math.pi)
