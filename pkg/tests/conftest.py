import math

import pytest

from qfloquet import (HillProblem, MatrixSpec, QMatrix, analyze, normal_form,
                      parse)
from qfloquet.quaternion import I, J, K, Quaternion


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """Repeat the acceptance PASS/FAIL lines where capture cannot hide them."""
    try:
        import test_acceptance
    except ImportError:
        return
    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(test_acceptance.RESULTS):
            terminalreporter.write_line(line)

# -- constant systems with known spectra ---------------------------------------

# spectrum {0, 1, 1+i}: one growing direction -> unstable
CONST_UNSTABLE_3X3 = QMatrix.from_entries([
    [I, J, J],
    [K, 1, K],
    [0, 0, 1],
])

# spectrum {i} with algebraic multiplicity 3, geometric 2 -> unstable
CONST_DEFECTIVE_3X3 = QMatrix.from_entries([
    [I, 1, 0],
    [0, J, 0],
    [0, 1, K],
])

# spectrum {0, -3+3i}: marginal zero eigenvalue, simple -> stable
CONST_MARGINAL_2X2 = QMatrix.from_entries([
    [Quaternion(-1, 0, 2, -1), Quaternion(-1, 2, 1, 0)],
    [Quaternion(0, -1, 1, 2), Quaternion(-2, -1, 0, 1)],
])

# all eigenvalue real parts negative -> asymptotically stable
CONST_DECAYING_2X2 = QMatrix.from_entries([
    [Quaternion(-1, 1, 0, -1), Quaternion(0, -1, 0, 0)],
    [Quaternion(1, 1, -1, 1), Quaternion(-2, 0, 0, -1)],
])


# -- periodic systems with known monodromy ------------------------------------

def _pi_spec(rows):
    return MatrixSpec.from_strings(rows, period=math.pi)


@pytest.fixture(scope="session")
def periodic_growing_spec():
    # multipliers {e^pi, -1}; closed-form monodromy known
    return _pi_spec([["1", "1"], ["0", "i + 2*exp(2*i*t)*j"]])


@pytest.fixture(scope="session")
def periodic_defective_spec():
    # multipliers {-1, -1} with a single eigenvector (gm = 1)
    return _pi_spec([["k", "1"], ["0", "i + 2*exp(2*i*t)*j"]])


@pytest.fixture(scope="session")
def periodic_marginal_spec():
    # multipliers {i, -1}, both on the unit circle, distinct
    return _pi_spec([["k/2", "exp(-2*i*t)"],
                     ["0", "i + 2*j*cos(2*t) + 2*k*sin(2*t)"]])


@pytest.fixture(scope="session")
def periodic_decaying_spec():
    # multipliers {i e^-pi, e^-pi}, both inside the unit circle
    return _pi_spec([["i/2 - 1", "exp(2*j*t)*exp(-k*sin(2*t))"],
                     ["0", "2*k*cos(2*t) - 1"]])


@pytest.fixture(scope="session")
def fd_growing(periodic_growing_spec):
    return normal_form(periodic_growing_spec)


@pytest.fixture(scope="session")
def fd_defective(periodic_defective_spec):
    return normal_form(periodic_defective_spec)


@pytest.fixture(scope="session")
def fd_marginal(periodic_marginal_spec):
    return normal_form(periodic_marginal_spec)


@pytest.fixture(scope="session")
def fd_decaying(periodic_decaying_spec):
    return normal_form(periodic_decaying_spec)


# -- Hill problems --------------------------------------------------------------

@pytest.fixture(scope="session")
def hill_trace_inconclusive():
    # |Re tr M(T)| < 2 yet unstable: frobenius and multiplier channels catch it
    return HillProblem(parse("2 + j*cos(2*t)^2 + k*sin(2*t)"), math.pi)


@pytest.fixture(scope="session")
def hill_trace_unstable():
    return HillProblem(parse("-1 + j*cos(2*t) + k*sin(2*t)"), math.pi)


@pytest.fixture(scope="session")
def hill_frobenius_large():
    return HillProblem(parse("-1 + j*exp(cos(2*t)) + k*sin(2*t)"), math.pi)


@pytest.fixture(scope="session")
def hill_report_inconclusive(hill_trace_inconclusive):
    return analyze(hill_trace_inconclusive)


@pytest.fixture(scope="session")
def hill_report_unstable(hill_trace_unstable):
    return analyze(hill_trace_unstable)


@pytest.fixture(scope="session")
def hill_report_frobenius(hill_frobenius_large):
    return analyze(hill_frobenius_large)
