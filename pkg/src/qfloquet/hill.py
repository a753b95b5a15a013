"""Quaternion-valued Hill's equation u'' + a(t) u = 0 with periodic a.

The equation is analyzed through its 2x2 companion system.  Three verdict
channels are reported side by side: the real part of the monodromy trace
(inconclusive inside (-2, 2) for quaternion coefficients), the squared
Frobenius norm (> 2 forces instability), and the characteristic multipliers
(authoritative).  A real-coefficient specialization reproduces the classical
trace classification.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .expressions import MatrixSpec, Neg, Num, evaluate
from .floquet import (Evidence, Stability, StabilityVerdict,
                      characteristic_multipliers, classify_multipliers,
                      monodromy)
from .qmatrix import QMatrix, standard_eigenvalues

# band half-width for trace comparisons against +-2
TRACE_TOL = 1e-6
# allowance for the M(T) = +-I tests
IDENTITY_TOL = 1e-6
# periodicity requirement for the coefficient on a 64-point grid
COEFF_PERIODICITY_TOL = 1e-8


class NotRealCoefficient(ValueError):
    """Real-coefficient specialization called with a quaternion a(t)."""


@dataclass(frozen=True)
class HillProblem:
    a: object           # TimeExpr for the coefficient a(t)
    period: float

    def __post_init__(self):
        if not self.period > 0:
            raise ValueError("period must be positive")
        worst = 0.0
        for t in np.linspace(0.0, self.period, 64, endpoint=False):
            delta = evaluate(self.a, t) - evaluate(self.a, t + self.period)
            worst = max(worst, abs(delta))
        if worst > COEFF_PERIODICITY_TOL:
            raise ValueError(
                f"a(t) periodicity residual {worst:.3e} exceeds "
                f"{COEFF_PERIODICITY_TOL:.1e}")


@dataclass(frozen=True)
class HillReport:
    M_T: QMatrix
    re_trace: float
    frob_sq: float
    multipliers: object
    K_eigs: tuple
    verdict_trace: StabilityVerdict
    verdict_frobenius: StabilityVerdict
    verdict_multipliers: StabilityVerdict


def companion(problem):
    """2x2 first-order system [[0, 1], [-a(t), 0]] equivalent to the equation."""
    entries = [[Num(0.0), Num(1.0)],
               [Neg(problem.a), Num(0.0)]]
    return MatrixSpec(entries, period=problem.period)


def _near_identity_verdict(M_T, sign, re_trace):
    target = QMatrix.identity(2) * sign
    distance = (M_T - target).sum_norm()
    kind = Stability.STABLE if distance <= IDENTITY_TOL else Stability.UNSTABLE
    evidence = (
        Evidence(complex(re_trace), "Re(tr M(T))", 2.0, abs(re_trace) - 2.0),
        Evidence(complex(sign), f"||M(T) - {sign:+d}I||", IDENTITY_TOL, distance),
    )
    return StabilityVerdict(kind, evidence)


def _trace_verdict(re_trace, M_T):
    if abs(re_trace - 2.0) <= TRACE_TOL:
        return _near_identity_verdict(M_T, +1, re_trace)
    if abs(re_trace + 2.0) <= TRACE_TOL:
        return _near_identity_verdict(M_T, -1, re_trace)
    evidence = (Evidence(complex(re_trace), "Re(tr M(T))", 2.0,
                         abs(re_trace) - 2.0),)
    if abs(re_trace) > 2.0:
        return StabilityVerdict(Stability.UNSTABLE, evidence)
    return StabilityVerdict(Stability.UNDETERMINED, evidence)


def _frobenius_verdict(frob_sq):
    evidence = (Evidence(complex(frob_sq), "||M(T)||_F^2", 2.0, frob_sq - 2.0),)
    if frob_sq > 2.0 + TRACE_TOL:
        return StabilityVerdict(Stability.UNSTABLE, evidence)
    return StabilityVerdict(Stability.UNDETERMINED, evidence)


def k_matrix_diagnostics(M_T):
    """Eigenvalues of K(T) = M(T) M(T)^dagger and the quadratic residual.

    K is Hermitian positive semidefinite, so its standard eigenvalues are
    real.  The residual max |k^2 - ||M||_F^2 k + 1| probes whether the pair
    solves the trace/determinant quadratic; it is reported, not asserted.
    """
    K = M_T @ M_T.dagger()
    kappas = sorted(v.real for v in standard_eigenvalues(K).expanded())
    frob_sq = M_T.frobenius_sq()
    residual = max(abs(k * k - frob_sq * k + 1.0) for k in kappas)
    return kappas[0], kappas[1], residual


def analyze(problem, cfg=None):
    """Integrate the companion system over one period and report all three
    verdict channels."""
    spec = companion(problem)
    M_T = monodromy(spec, cfg)
    re_trace = M_T.re_trace()
    frob_sq = M_T.frobenius_sq()
    multipliers = characteristic_multipliers(M_T)
    k1, k2, _ = k_matrix_diagnostics(M_T)
    return HillReport(
        M_T=M_T,
        re_trace=re_trace,
        frob_sq=frob_sq,
        multipliers=multipliers,
        K_eigs=(k1, k2),
        verdict_trace=_trace_verdict(re_trace, M_T),
        verdict_frobenius=_frobenius_verdict(frob_sq),
        verdict_multipliers=classify_multipliers(multipliers),
    )


def classify_real(problem, cfg=None):
    """Classical trace test for real-valued a(t).

    tr M(T) outside [-2, 2] is unstable; strictly inside is stable (not
    asymptotically); on the boundary stability requires M(T) = +-I.
    """
    worst = 0.0
    for t in np.linspace(0.0, problem.period, 64, endpoint=False):
        value = evaluate(problem.a, t)
        worst = max(worst, value.vec_norm())
    if worst > 1e-12:
        raise NotRealCoefficient(
            f"coefficient has vector part up to {worst:.3e}")
    spec = companion(problem)
    M_T = monodromy(spec, cfg)
    trace = M_T.re_trace()
    if abs(trace - 2.0) <= TRACE_TOL:
        return _near_identity_verdict(M_T, +1, trace)
    if abs(trace + 2.0) <= TRACE_TOL:
        return _near_identity_verdict(M_T, -1, trace)
    evidence = (Evidence(complex(trace), "tr M(T)", 2.0, abs(trace) - 2.0),)
    if abs(trace) > 2.0:
        return StabilityVerdict(Stability.UNSTABLE, evidence)
    return StabilityVerdict(Stability.STABLE, evidence)
