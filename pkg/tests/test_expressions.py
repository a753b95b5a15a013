import math

import numpy as np
import pytest

from qfloquet.expressions import (BinOp, Call, DomainError, EvalError,
                                  ExprSyntaxError, MatrixSpec, Neg, Num, Pow,
                                  Unit, UnknownIdentifier, Var, evaluate,
                                  parse, quaternion_literal, render)
from qfloquet.quaternion import DivisionByZero, I, J, K, Quaternion


def q(a, b=0.0, c=0.0, d=0.0):
    return Quaternion(a, b, c, d)


def test_parse_and_eval_oscillating_coefficient():
    node = parse("i + 2*exp(2*i*t)*j")
    assert abs(evaluate(node, 0.0) - (I + 2 * J)) < 1e-15
    # exp(2 i t) walks the unit circle in the complex slice
    value = evaluate(node, math.pi / 2)
    assert abs(value - (I - 2 * J)) < 1e-12


def test_variable_lookup():
    assert evaluate(parse("t"), 3.5) == q(3.5)


def test_noncommutative_order_preserved():
    assert evaluate(parse("k*j"), 0.0) == -I
    assert evaluate(parse("j*k"), 0.0) == I


def test_scalar_exponential():
    assert abs(evaluate(parse("exp(2*i*t)"), math.pi / 2) - q(-1)) < 1e-12


def test_hill_coefficient_values():
    assert abs(evaluate(parse("-1 + j*cos(2*t) + k*sin(2*t)"), 0.0)
               - (q(-1) + J)) < 1e-15
    assert abs(evaluate(parse("2 + j*cos(2*t)^2 + k*sin(2*t)"), math.pi / 4)
               - (q(2) + K)) < 1e-12


def test_power_is_repeated_ordered_multiplication():
    node = parse("(1 + i + j)^3")
    base = q(1, 1, 1, 0)
    assert abs(evaluate(node, 0.0) - base * base * base) < 1e-14
    assert evaluate(parse("t^0"), 5.0) == q(1)


def test_unary_minus_binds_at_atom_level():
    # -2^2 parses as (-2)^2 because '-' atom is itself an atom
    assert evaluate(parse("-2^2"), 0.0) == q(4)
    assert evaluate(parse("-k*sin(2*t)"), math.pi / 4) == -K


def test_division_is_right_inverse_multiplication():
    got = evaluate(parse("j/i"), 0.0)
    assert abs(got - J * Quaternion(0, -1, 0, 0)) < 1e-15


def test_syntax_error_reports_offset():
    with pytest.raises(ExprSyntaxError) as err:
        parse("1 + (2*")
    assert err.value.offset == 7
    with pytest.raises(ExprSyntaxError) as err:
        parse("2i")
    assert err.value.offset == 1
    with pytest.raises(ExprSyntaxError):
        parse("")
    with pytest.raises(ExprSyntaxError):
        parse("t ^ t")  # exponent must be an integer literal


def test_unknown_identifier():
    with pytest.raises(UnknownIdentifier) as err:
        parse("q + 1")
    assert err.value.offset == 0
    with pytest.raises(UnknownIdentifier):
        parse("p + 1")  # p allowed only when requested
    parse("p + 1", variables=("t", "p"))  # and accepted when it is


def test_identifiers_are_case_sensitive():
    with pytest.raises(UnknownIdentifier):
        parse("T")
    with pytest.raises(UnknownIdentifier):
        parse("COS(t)")


def test_domain_error_for_nonreal_trig():
    with pytest.raises(DomainError):
        evaluate(parse("cos(i*t)"), 1.0)
    with pytest.raises(DomainError):
        evaluate(parse("sin(j)"), 0.0)


def test_division_by_zero_propagates():
    with pytest.raises(DivisionByZero):
        evaluate(parse("1/t"), 0.0)


def test_parameter_evaluation():
    node = parse("p*t + 1", variables=("t", "p"))
    assert evaluate(node, 2.0, {"p": 3.0}) == q(7)
    with pytest.raises(EvalError):
        evaluate(node, 2.0)


def random_ast(rng, depth=0):
    choice = rng.integers(0, 8 if depth < 4 else 4)
    if choice == 0:
        return Num(round(float(rng.uniform(-3, 3)), 3))
    if choice == 1:
        return Unit(str(rng.choice(["i", "j", "k"])))
    if choice == 2:
        return Var("t")
    if choice == 3:
        return Neg(random_ast(rng, depth + 1))
    if choice == 4:
        return BinOp(str(rng.choice(["+", "-", "*"])),
                     random_ast(rng, depth + 1), random_ast(rng, depth + 1))
    if choice == 5:
        return Pow(random_ast(rng, depth + 1), int(rng.integers(0, 4)))
    if choice == 6:
        return Call("exp", random_ast(rng, depth + 1))
    return Call(str(rng.choice(["cos", "sin"])), BinOp("*", Num(2.0), Var("t")))


def test_render_parse_round_trip():
    rng = np.random.default_rng(21)
    count = 0
    while count < 60:
        node = random_ast(rng)
        text = render(node)
        reparsed = parse(text)
        ok = True
        for t in rng.uniform(0.1, 3.0, 100):
            try:
                a = evaluate(node, float(t))
            except (EvalError, DivisionByZero):
                ok = False
                break
            b = evaluate(reparsed, float(t))
            assert abs(a - b) <= 1e-14 * max(1.0, abs(a)), text
        if ok:
            count += 1


def test_order_preservation_of_rendered_products():
    rng = np.random.default_rng(22)
    for _ in range(100):
        e1 = quaternion_literal(Quaternion(*rng.uniform(-1, 1, 4)))
        e2 = quaternion_literal(Quaternion(*rng.uniform(-1, 1, 4)))
        combined = parse(f"({render(e1)}) * ({render(e2)})")
        v1 = evaluate(e1, 0.0)
        v2 = evaluate(e2, 0.0)
        assert abs(evaluate(combined, 0.0) - v1 * v2) < 1e-13


def test_eval_deterministic():
    node = parse("exp(i*t) * (1 - j*cos(2*t))")
    values = {evaluate(node, 1.234).components() for _ in range(5)}
    assert len(values) == 1


def test_matrix_spec_shape_and_periodicity():
    spec = MatrixSpec.from_strings([["1", "1"], ["0", "i + 2*exp(2*i*t)*j"]],
                                   period=math.pi)
    A0 = spec.evaluate(0.0)
    assert A0[1, 1] == I + 2 * J
    assert spec.periodicity_residual() < 1e-12
    aperiodic = MatrixSpec.from_strings([["cos(t)"]], period=math.pi)
    assert aperiodic.periodicity_residual() > 0.5
    with pytest.raises(ValueError):
        MatrixSpec.from_strings([["1", "1"]], period=1.0)


def test_matrix_spec_from_qmatrix():
    from qfloquet.qmatrix import QMatrix
    A = QMatrix.from_entries([[Quaternion(1, -2, 0.5, 0), J], [K, 3]])
    spec = MatrixSpec.from_qmatrix(A, period=2.0)
    assert (spec.evaluate(0.7) - A).max_abs() < 1e-15
