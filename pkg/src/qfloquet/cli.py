"""Command-line front end.

Subcommands: `constant`, `periodic`, `hill`, `sweep`.  Systems are given as
expression strings in the library grammar, either through flags or a JSON
config file; reports are rendered as text tables, JSON, or CSV.  Exit codes:
0 on success, 2 on configuration or parse errors, 3 on numerical failures.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import json
import math
import sys

from .expressions import (ExprSyntaxError, MatrixSpec, UnknownIdentifier,
                          evaluate, parse)
from .floquet import (NotPeriodic, PeriodicityViolation, classify_constant,
                      classify_periodic, exponent_sum_residual,
                      multiplier_product_check, normal_form)
from .hill import HillProblem, NotRealCoefficient, analyze
from .integrate import IntegratorConfig, StepUnderflow
from .qmatrix import (LogFailure, NonSquare, OmegaViolation, PairingFailure,
                      QMatrix, RecoveryFailure, Singular, expm,
                      standard_eigenvalues)
from .quaternion import DivisionByZero

NUMERICAL_ERRORS = (Singular, StepUnderflow, PeriodicityViolation, NotPeriodic,
                    LogFailure, OmegaViolation, PairingFailure, RecoveryFailure,
                    NotRealCoefficient, DivisionByZero, ArithmeticError)
CONFIG_ERRORS = (ExprSyntaxError, UnknownIdentifier, NonSquare, ValueError,
                 KeyError, json.JSONDecodeError)


# -- serialization ------------------------------------------------------------


def _quat_json(q):
    return [float(q.q0), float(q.q1), float(q.q2), float(q.q3)]


def _matrix_json(M):
    return [[_quat_json(M[i, j]) for j in range(M.cols)] for i in range(M.rows)]


def _complex_json(z):
    return [z.real, z.imag]


def _spectrum_json(spectrum):
    return [{"value": _complex_json(e.value),
             "algebraic_multiplicity": e.algebraic_multiplicity,
             "geometric_multiplicity": e.geometric_multiplicity}
            for e in spectrum]


def _verdict_json(verdict):
    return {"kind": verdict.kind.value,
            "evidence": [{"value": _complex_json(e.value),
                          "quantity": e.quantity,
                          "threshold": e.threshold,
                          "margin": e.margin} for e in verdict.evidence]}


def _fmt_complex(z):
    if z.imag == 0:
        return f"{z.real:.6g}"
    sign = "+" if z.imag >= 0 else "-"
    return f"{z.real:.6g}{sign}{abs(z.imag):.6g}i"


def _table(headers, rows):
    widths = [len(h) for h in headers]
    for row in rows:
        for idx, cell in enumerate(row):
            widths[idx] = max(widths[idx], len(cell))
    sep = "+" + "+".join("-" * (w + 2) for w in widths) + "+"
    lines = [sep,
             "|" + "|".join(f" {h.ljust(w)} " for h, w in zip(headers, widths)) + "|",
             sep]
    for row in rows:
        lines.append("|" + "|".join(
            f" {cell.ljust(w)} " for cell, w in zip(row, widths)) + "|")
    lines.append(sep)
    return "\n".join(lines)


# -- config handling -----------------------------------------------------------


def _parse_period(text):
    if isinstance(text, (int, float)):
        return float(text)
    if text.strip() == "pi":
        return math.pi
    return float(text)


def _entry_rows(tokens):
    """Split --entry tokens into rows: ';' separates rows, and each repeated
    --entry occurrence starts a fresh row."""
    rows, current = [], []
    for group in tokens:
        for token in group:
            parts = token.split(";")
            for idx, part in enumerate(parts):
                if idx > 0:
                    if current:
                        rows.append(current)
                    current = []
                if part.strip():
                    current.append(part.strip())
        if current:
            rows.append(current)
            current = []
    return rows


def _config_from_args(args):
    if args.config:
        with open(args.config) as handle:
            config = json.load(handle)
    else:
        config = {}
    if args.mode:
        config["mode"] = args.mode
    if getattr(args, "period", None) is not None:
        config["period"] = _parse_period(args.period)
    elif "period" in config:
        config["period"] = _parse_period(config["period"])
    if getattr(args, "entry", None):
        config["entries"] = _entry_rows(args.entry)
    if getattr(args, "a", None):
        config["a"] = args.a
    integ = config.setdefault("integrator", {})
    if args.rtol is not None:
        integ["rtol"] = args.rtol
    if args.atol is not None:
        integ["atol"] = args.atol
    output = config.setdefault("output", {})
    if args.format:
        output["format"] = args.format
    if args.out:
        output["path"] = args.out
    if getattr(args, "p_grid", None):
        config["sweep"] = {"grid": [_parse_period(v)
                                    for v in args.p_grid.split(",") if v.strip()]}
    if getattr(args, "jobs", None):
        config["jobs"] = args.jobs
    if "mode" not in config:
        raise ValueError("no mode given (subcommand or config file required)")
    return config


def _integrator_config(config):
    integ = config.get("integrator", {})
    kwargs = {}
    if "rtol" in integ:
        kwargs["rel_tol"] = float(integ["rtol"])
    if "atol" in integ:
        kwargs["abs_tol"] = float(integ["atol"])
    if "method" in integ:
        kwargs["method"] = integ["method"]
    return IntegratorConfig(**kwargs)


def _matrix_from_config(config, variables):
    entries = config.get("entries")
    if not entries:
        raise ValueError("matrix entries required for this mode")
    n = len(entries)
    for row in entries:
        if len(row) != n:
            raise ValueError(f"matrix must be square, got row lengths "
                             f"{[len(r) for r in entries]}")
    return [[parse(src, variables) for src in row] for row in entries]


# -- norm summaries -------------------------------------------------------------


def _norm_trend(norms):
    first, last = norms[0], norms[-1]
    peak = max(norms)
    if last > 10.0 * first:
        return f"||M(t)|| grows ({first:.3g} -> {last:.3g})"
    if last < 0.1 * first:
        return f"||M(t)|| decays ({first:.3g} -> {last:.3g})"
    return f"||M(t)|| stays within [{min(norms):.3g}, {peak:.3g}]"


# -- mode runners ---------------------------------------------------------------


def run_constant(config):
    grid = _matrix_from_config(config, variables=())
    A = QMatrix.from_entries(
        [[evaluate(node, 0.0) for node in row] for row in grid])
    spectrum = standard_eigenvalues(A)
    verdict = classify_constant(A)
    norms = [expm(A * t).sum_norm() for t in range(0, 11, 2)]
    return {
        "matrix": _matrix_json(A),
        "eigenvalues": _spectrum_json(spectrum),
        "verdict": _verdict_json(verdict),
        "norm_samples": norms,
        "norm_summary": _norm_trend(norms),
    }


def run_periodic(config):
    if "period" not in config:
        raise ValueError("periodic mode requires a period")
    grid = _matrix_from_config(config, variables=("t",))
    spec = MatrixSpec(grid, period=float(config["period"]))
    cfg = _integrator_config(config)
    fd = normal_form(spec, cfg)
    b_spectrum = standard_eigenvalues(fd.B)
    verdict = classify_periodic(fd)
    norms = [fd.trajectory.matrix_at(t).sum_norm()
             for t in [0.0, 0.5 * fd.period, fd.period, 1.5 * fd.period,
                       2.0 * fd.period]]
    sample_grid = [t for t, _ in fd.P_samples]
    trajectory = [[t] + [component
                         for row in _matrix_json(fd.trajectory.matrix_at(t))
                         for entry in row for component in entry]
                  for t in sample_grid]
    return {
        "period": fd.period,
        "monodromy": _matrix_json(fd.monodromy),
        "multipliers": _spectrum_json(fd.multipliers),
        "exponents": [_complex_json(mu) for mu in fd.exponents],
        "B": _matrix_json(fd.B),
        "B_spectrum": _spectrum_json(b_spectrum),
        "periodicity_residual": fd.periodicity_residual,
        "product_residual": multiplier_product_check(fd, spec),
        "exponent_sum_residual": exponent_sum_residual(fd, spec),
        "verdict": _verdict_json(verdict),
        "norm_samples": norms,
        "norm_summary": _norm_trend(norms),
        "trajectory_samples": trajectory,
    }


def run_hill(config, p_value=None):
    if "period" not in config:
        raise ValueError("hill mode requires a period")
    source = config.get("a")
    if not source:
        raise ValueError("hill mode requires the coefficient expression --a")
    variables = ("t", "p") if p_value is not None else ("t",)
    node = parse(source, variables)
    if p_value is not None:
        from .expressions import Num, Var, BinOp, Neg, Pow, Call

        def substitute(n):
            if isinstance(n, Var) and n.name == "p":
                return Num(float(p_value))
            if isinstance(n, Neg):
                return Neg(substitute(n.arg))
            if isinstance(n, BinOp):
                return BinOp(n.op, substitute(n.left), substitute(n.right))
            if isinstance(n, Pow):
                return Pow(substitute(n.base), n.exponent)
            if isinstance(n, Call):
                return Call(n.fn, substitute(n.arg))
            return n
        node = substitute(node)
    problem = HillProblem(node, float(config["period"]))
    report = analyze(problem, _integrator_config(config))
    moduli = sorted(abs(v) for v in report.multipliers.expanded())
    return {
        "period": problem.period,
        "monodromy": _matrix_json(report.M_T),
        "re_trace": report.re_trace,
        "frob_sq": report.frob_sq,
        "multipliers": _spectrum_json(report.multipliers),
        "K_eigs": list(report.K_eigs),
        "multiplier_moduli": moduli,
        "verdict_trace": _verdict_json(report.verdict_trace),
        "verdict_frobenius": _verdict_json(report.verdict_frobenius),
        "verdict_multipliers": _verdict_json(report.verdict_multipliers),
    }


def _sweep_point(config, p_value):
    row = {"p": p_value}
    try:
        result = run_hill(config, p_value=p_value)
        moduli = result["multiplier_moduli"]
        row.update({
            "re_trace": result["re_trace"],
            "frob_sq": result["frob_sq"],
            "abs_rho1": moduli[-1],
            "abs_rho2": moduli[0],
            "verdict_trace": result["verdict_trace"]["kind"],
            "verdict_frobenius": result["verdict_frobenius"]["kind"],
            "verdict_multipliers": result["verdict_multipliers"]["kind"],
            "error": "",
        })
    except Exception as exc:  # per-point failures recorded in-row
        row.update({"re_trace": "", "frob_sq": "", "abs_rho1": "",
                    "abs_rho2": "", "verdict_trace": "", "verdict_frobenius": "",
                    "verdict_multipliers": "", "error": f"{type(exc).__name__}: {exc}"})
    return row


SWEEP_COLUMNS = ("p", "re_trace", "frob_sq", "abs_rho1", "abs_rho2",
                 "verdict_trace", "verdict_frobenius", "verdict_multipliers",
                 "error")


def run_sweep(config):
    sweep = config.get("sweep", {})
    if "grid" in sweep:
        grid = [float(v) for v in sweep["grid"]]
    elif {"start", "stop", "step"} <= set(sweep):
        grid = []
        value = float(sweep["start"])
        while value <= float(sweep["stop"]) + 1e-12:
            grid.append(value)
            value += float(sweep["step"])
    else:
        grid = []
    jobs = int(config.get("jobs", 1))
    if jobs > 1 and grid:
        with concurrent.futures.ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_sweep_point, [config] * len(grid), grid))
    else:
        rows = [_sweep_point(config, p) for p in grid]
    return {"grid": grid, "rows": rows}


# -- rendering ------------------------------------------------------------------


def _render_text(mode, results):
    if mode == "constant":
        eig_cell = "; ".join(
            f"{_fmt_complex(complex(*e['value']))} (am={e['algebraic_multiplicity']}, "
            f"gm={e['geometric_multiplicity']})" for e in results["eigenvalues"])
        table = _table(
            ["Fundamental matrix", "Standard eigenvalues of A", "Stability"],
            [[results["norm_summary"], eig_cell, results["verdict"]["kind"]]])
        return table
    if mode == "periodic":
        mult_cell = "; ".join(
            f"{_fmt_complex(complex(*e['value']))} (am={e['algebraic_multiplicity']}, "
            f"gm={e['geometric_multiplicity']})" for e in results["multipliers"])
        exp_cell = "; ".join(
            _fmt_complex(complex(*mu)) for mu in results["exponents"])
        table = _table(
            ["Fundamental matrix", "Characteristic multipliers",
             "Standard eigenvalues of B", "Stability"],
            [[results["norm_summary"], mult_cell, exp_cell,
              results["verdict"]["kind"]]])
        extras = (f"periodicity residual {results['periodicity_residual']:.3e}   "
                  f"product residual {results['product_residual']:.3e}")
        return table + "\n" + extras
    if mode == "hill":
        mult_cell = "; ".join(
            f"{_fmt_complex(complex(*e['value']))}" for e in results["multipliers"])
        table = _table(
            ["Re(tr M(T))", "||M(T)||_F^2", "Characteristic multipliers",
             "Stability (multipliers)"],
            [[f"{results['re_trace']:.6g}", f"{results['frob_sq']:.6g}",
              mult_cell, results["verdict_multipliers"]["kind"]]])
        extras = (f"trace channel: {results['verdict_trace']['kind']}   "
                  f"frobenius channel: {results['verdict_frobenius']['kind']}")
        return table + "\n" + extras
    if mode == "sweep":
        rows = [[_cell_str(row[c]) for c in SWEEP_COLUMNS]
                for row in results["rows"]]
        return _table(list(SWEEP_COLUMNS), rows)
    raise ValueError(f"unknown mode {mode}")


def _cell_str(value):
    if isinstance(value, float):
        return repr(float(value))
    return str(value)


def _render_csv(mode, results):
    if mode == "sweep":
        lines = [",".join(SWEEP_COLUMNS)]
        for row in results["rows"]:
            lines.append(",".join(_csv_field(row[c]) for c in SWEEP_COLUMNS))
        return "\n".join(lines) + "\n"
    if mode in ("periodic", "hill"):
        matrix = results["monodromy"]
        n = len(matrix)
        header = ["t"] + [f"M{i+1}{j+1}_{w}" for i in range(n)
                          for j in range(n) for w in ("q0", "q1", "q2", "q3")]
        if "trajectory_samples" in results:
            rows = [",".join(repr(float(v)) for v in sample)
                    for sample in results["trajectory_samples"]]
        else:
            row = [repr(float(results["period"]))] + [
                repr(component) for mrow in matrix for entry in mrow
                for component in entry]
            rows = [",".join(row)]
        return ",".join(header) + "\n" + "\n".join(rows) + "\n"
    if mode == "constant":
        lines = ["value_re,value_im,algebraic_multiplicity,geometric_multiplicity"]
        for e in results["eigenvalues"]:
            lines.append(f"{e['value'][0]!r},{e['value'][1]!r},"
                         f"{e['algebraic_multiplicity']},{e['geometric_multiplicity']}")
        return "\n".join(lines) + "\n"
    raise ValueError(f"unknown mode {mode}")


def _csv_field(value):
    if isinstance(value, float):
        return repr(float(value))
    text = str(value)
    if "," in text or '"' in text:
        return '"' + text.replace('"', '""') + '"'
    return text


# -- replay ---------------------------------------------------------------------


def _numeric_match(a, b, tol=1e-12):
    if isinstance(a, dict) and isinstance(b, dict):
        return (a.keys() == b.keys()
                and all(_numeric_match(a[k], b[k], tol) for k in a))
    if isinstance(a, list) and isinstance(b, list):
        return (len(a) == len(b)
                and all(_numeric_match(x, y, tol) for x, y in zip(a, b)))
    if isinstance(a, float) and isinstance(b, (int, float)):
        return abs(a - b) <= tol * max(1.0, abs(a), abs(b))
    return a == b


def run_mode(config):
    mode = config["mode"]
    if mode == "constant":
        return run_constant(config)
    if mode == "periodic":
        return run_periodic(config)
    if mode == "hill":
        return run_hill(config)
    if mode == "sweep":
        return run_sweep(config)
    raise ValueError(f"unknown mode {mode!r}")


# -- entry point ------------------------------------------------------------------


def build_parser():
    parser = argparse.ArgumentParser(
        prog="qfloquet",
        description="Stability analysis of quaternion-valued linear ODE systems")
    parser.add_argument("--config", help="JSON config file")
    parser.add_argument("--replay",
                        help="re-run a previous JSON report and verify determinism")
    sub = parser.add_subparsers(dest="mode")
    for name in ("constant", "periodic", "hill", "sweep"):
        mode_parser = sub.add_parser(name)
        mode_parser.add_argument("--config", help="JSON config file")
        mode_parser.add_argument("--entry", nargs="+", action="append",
                                 help="matrix entries; rows separated by ';'")
        mode_parser.add_argument("--a", help="Hill coefficient expression a(t)")
        mode_parser.add_argument("--period", help="period (number or 'pi')")
        mode_parser.add_argument("--p-grid", dest="p_grid",
                                 help="sweep grid, comma separated")
        mode_parser.add_argument("--jobs", type=int, default=None)
        mode_parser.add_argument("--rtol", type=float, default=None)
        mode_parser.add_argument("--atol", type=float, default=None)
        mode_parser.add_argument("--format", choices=("text", "json", "csv"))
        mode_parser.add_argument("--out", help="output path (default stdout)")
    for flag in ("--rtol", "--atol"):
        parser.add_argument(flag, type=float, default=None, help=argparse.SUPPRESS)
    parser.add_argument("--format", choices=("text", "json", "csv"),
                        help=argparse.SUPPRESS)
    parser.add_argument("--out", help=argparse.SUPPRESS)
    return parser


def _emit(text, path):
    if path:
        with open(path, "w") as handle:
            handle.write(text)
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.replay:
            with open(args.replay) as handle:
                previous = json.load(handle)
            config = previous["config"]
            results = run_mode(config)
            if not _numeric_match(previous["results"], results):
                sys.stderr.write("replay mismatch: results differ beyond 1e-12\n")
                return 3
            report = {"mode": config["mode"], "config": config, "results": results}
            _emit(json.dumps(report, indent=2), args.out)
            return 0
        config = _config_from_args(args)
        results = run_mode(config)
    except NUMERICAL_ERRORS as exc:
        sys.stderr.write(f"numerical failure: {type(exc).__name__}: {exc}\n")
        return 3
    except CONFIG_ERRORS as exc:
        sys.stderr.write(f"configuration error: {exc}\n")
        return 2

    fmt = config.get("output", {}).get("format", "text")
    path = config.get("output", {}).get("path")
    mode = config["mode"]
    if fmt == "json":
        report = {"mode": mode, "config": config, "results": results}
        _emit(json.dumps(report, indent=2), path)
    elif fmt == "csv":
        _emit(_render_csv(mode, results), path)
    else:
        _emit(_render_text(mode, results), path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
