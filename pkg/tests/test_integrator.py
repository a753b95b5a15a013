import math

import numpy as np
import pytest

from qfloquet.expressions import MatrixSpec
from qfloquet.integrate import (IntegratorConfig, StepUnderflow,
                                integrate, liouville_residual, trace_integral)
from qfloquet.qmatrix import QMatrix, allclose, expm, qdet
from qfloquet.quaternion import DivisionByZero, J, K, Quaternion

from conftest import CONST_DECAYING_2X2

TIGHT = IntegratorConfig(rel_tol=1e-12, abs_tol=1e-14)


def growing_periodic_spec():
    return MatrixSpec.from_strings([["1", "1"], ["0", "i + 2*exp(2*i*t)*j"]],
                                   period=math.pi)


def known_monodromy():
    ep = math.exp(math.pi)
    return QMatrix.from_entries(
        [[Quaternion(ep), Quaternion(3, -1, 4, 2) * ((1 + ep) / 10)],
         [0, Quaternion(-1)]])


def test_zero_field_is_constant():
    spec = MatrixSpec.from_strings([["0", "0"], ["0", "0"]])
    M0 = QMatrix.from_entries([[1, J], [K, 2]])
    traj = integrate(spec, 0.0, 3.0, M0)
    assert allclose(traj.final, M0, 0.0)
    assert traj.states[0] is M0
    assert liouville_residual(traj, spec) == 0.0


def test_constant_system_matches_expm():
    spec = MatrixSpec.from_qmatrix(CONST_DECAYING_2X2)
    traj = integrate(spec, 0.0, 5.0, QMatrix.identity(2))
    oracle = expm(CONST_DECAYING_2X2 * 5.0)
    assert (traj.final - oracle).sum_norm() <= 1e-8


def test_periodic_system_matches_closed_form():
    traj = integrate(growing_periodic_spec(), 0.0, math.pi, QMatrix.identity(2))
    assert (traj.final - known_monodromy()).max_abs() < 1e-7


def test_liouville_zero_trace_system():
    # companion form has zero trace, so qdet(M(t)) must stay 1
    spec = MatrixSpec.from_strings(
        [["0", "1"], ["-(2 + j*cos(2*t)^2 + k*sin(2*t))", "0"]],
        period=math.pi)
    traj = integrate(spec, 0.0, math.pi, QMatrix.identity(2))
    assert max(abs(qdet(M) - 1.0) for M in traj.states) <= 1e-8
    assert liouville_residual(traj, spec) <= 1e-8


def test_liouville_growing_system():
    spec = growing_periodic_spec()
    traj = integrate(spec, 0.0, math.pi, QMatrix.identity(2), TIGHT)
    assert liouville_residual(traj, spec) <= 1e-7


def test_trace_integral_quadrature():
    # Re tr A = 1 for the growing system: integral over [0, pi] is pi
    assert trace_integral(growing_periodic_spec(), 0.0, math.pi) == \
        pytest.approx(math.pi, abs=1e-12)


def test_rk4_order_convergence():
    spec = growing_periodic_spec()
    ref = integrate(spec, 0.0, math.pi, QMatrix.identity(2), TIGHT).final
    errors = []
    for n in (100, 200, 400):
        cfg = IntegratorConfig(method="rk4", rk4_step=math.pi / n)
        sol = integrate(spec, 0.0, math.pi, QMatrix.identity(2), cfg).final
        errors.append((sol - ref).sum_norm())
    for coarse, fine in zip(errors, errors[1:]):
        assert 12.0 <= coarse / fine <= 20.0


def test_semigroup_consistency():
    spec = growing_periodic_spec()
    rng = np.random.default_rng(31)
    t_star = float(rng.uniform(0.3, 2.5))
    full = integrate(spec, 0.0, math.pi, QMatrix.identity(2),
                     sample_times=[t_star])
    mid = full.matrix_at(t_star)
    restarted = integrate(spec, t_star, math.pi, mid)
    assert (restarted.final - full.final).sum_norm() <= 1e-8


def test_qdet_positive_along_flow():
    spec = growing_periodic_spec()
    traj = integrate(spec, 0.0, math.pi, QMatrix.identity(2))
    assert all(qdet(M) > 0 for M in traj.states)


def test_sample_times_hit_exactly():
    spec = growing_periodic_spec()
    wanted = [0.5, 1.0, 2.2]
    traj = integrate(spec, 0.0, math.pi, QMatrix.identity(2),
                     sample_times=wanted)
    for t in wanted:
        assert np.min(np.abs(traj.times - t)) == 0.0


def test_dense_output_interpolation():
    spec = growing_periodic_spec()
    traj = integrate(spec, 0.0, math.pi, QMatrix.identity(2))
    probe = 1.2345
    reference = integrate(spec, 0.0, math.pi, QMatrix.identity(2),
                          sample_times=[probe]).matrix_at(probe)
    interpolated = traj.matrix_at(probe)
    assert (interpolated - reference).sum_norm() < 1e-7


def test_step_underflow_near_singularity():
    spec = MatrixSpec.from_strings([["1/(1 - t)"]])
    with pytest.raises(StepUnderflow):
        integrate(spec, 0.0, 2.0, QMatrix.identity(1))


def test_eval_error_propagates():
    spec = MatrixSpec.from_strings([["1/0"]])
    with pytest.raises(DivisionByZero):
        integrate(spec, 0.0, 1.0, QMatrix.identity(1))


def test_shape_validation():
    spec = growing_periodic_spec()
    with pytest.raises(ValueError):
        integrate(spec, 0.0, 1.0, QMatrix.identity(3))
    with pytest.raises(ValueError):
        integrate(spec, 1.0, 1.0, QMatrix.identity(2))
