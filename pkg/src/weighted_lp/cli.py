"""Command-line front end: read an instance, solve it, print a report.

Two input formats are accepted.

``json-dense``
    ``{"A": [[...], ...], "b": [...], "c": [...]}``.

``csv-triple``
    The input file holds the nonzeros of ``A`` under the header
    ``i,j,value`` (zero-based indices).  Sidecar files ``b.csv`` and
    ``c.csv`` in the same directory hold one value per line, with an
    optional ``value`` header.  The row and column counts come from the
    sidecar lengths.

Exit codes follow the solve status: 0 Optimal, 2 Infeasible, 3 Unbounded,
4 IterationLimit, 5 NumericalFailure, and 64 for bad usage or a file that
cannot be read.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from .config import PathConfig
from .errors import DimensionMismatch, NonFinite, ParseError, SolverError
from .lp_driver import (
    INFEASIBLE,
    ITERATION_LIMIT,
    NUMERICAL_FAILURE,
    OPTIMAL,
    UNBOUNDED,
    RawLP,
    SolveReport,
    solve,
)

FORMATS = ("json-dense", "csv-triple")

EXIT_CODES = {
    OPTIMAL: 0,
    INFEASIBLE: 2,
    UNBOUNDED: 3,
    ITERATION_LIMIT: 4,
    NUMERICAL_FAILURE: 5,
}
EXIT_USAGE = 64


# ---------------------------------------------------------------- parsing


def parse_instance(path: str | Path, fmt: str = "json-dense") -> RawLP:
    path = Path(path)
    if fmt == "json-dense":
        return parse_json_dense(_read_text(path))
    if fmt == "csv-triple":
        return parse_csv_triple(
            _read_text(path),
            _read_text(path.parent / "b.csv"),
            _read_text(path.parent / "c.csv"),
        )
    raise ParseError(f"unknown format {fmt!r}")


def _read_text(path: Path) -> str:
    try:
        return path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc


def _reject_constant(name: str):
    raise ValueError(f"non-finite literal {name}")


def parse_json_dense(text: str) -> RawLP:
    try:
        data = json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno) from exc
    except (ValueError, RecursionError) as exc:
        raise ParseError(str(exc)) from exc
    if not isinstance(data, dict):
        raise ParseError("top level must be an object with keys A, b, c")
    missing = [k for k in ("A", "b", "c") if k not in data]
    if missing:
        raise ParseError(f"missing key(s) {', '.join(missing)}")
    A = data["A"]
    if not isinstance(A, list) or not all(isinstance(row, list) for row in A):
        raise ParseError("A must be a list of rows")
    if not A or not A[0]:
        raise DimensionMismatch("constraint matrix is empty")
    width = len(A[0])
    for i, row in enumerate(A):
        if len(row) != width:
            raise DimensionMismatch(f"row {i} of A has {len(row)} entries, row 0 has {width}")
    A = np.array([[_number(v, f"A[{i}][{j}]") for j, v in enumerate(row)] for i, row in enumerate(A)])
    b = _vector(data["b"], "b")
    c = _vector(data["c"], "c")
    return _build(A, b, c)


def _vector(values, name: str) -> np.ndarray:
    if not isinstance(values, list):
        raise ParseError(f"{name} must be a list")
    return np.array([_number(v, f"{name}[{k}]") for k, v in enumerate(values)], dtype=float)


def _number(value, where: str, line: int | None = None) -> float:
    # bool is an int subclass but never a sensible coefficient
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ParseError(f"{where} is not a number", line)
    try:
        out = float(value)
    except OverflowError as exc:
        raise ParseError(f"{where} is out of range", line) from exc
    if not math.isfinite(out):
        raise ParseError(f"{where} is not finite", line)
    return out


def _parse_float(token: str, where: str, line: int) -> float:
    try:
        value = float(token)
    except ValueError as exc:
        raise ParseError(f"{where}: cannot read {token!r} as a number", line) from exc
    if not math.isfinite(value):
        raise ParseError(f"{where} is not finite", line)
    return value


def _parse_index(token: str, where: str, line: int) -> int:
    try:
        return int(token.strip())
    except ValueError as exc:
        raise ParseError(f"{where}: cannot read {token!r} as an index", line) from exc


def _rows(text: str):
    """Non-blank CSV records paired with their one-based line numbers."""
    for lineno, raw in enumerate(io.StringIO(text), start=1):
        if not raw.strip():
            continue
        try:
            fields = next(csv.reader([raw]))
        except csv.Error as exc:
            raise ParseError(str(exc), lineno) from exc
        yield lineno, [f.strip() for f in fields]


def parse_column(text: str, name: str) -> np.ndarray:
    values = []
    for k, (lineno, fields) in enumerate(_rows(text)):
        if k == 0 and fields == ["value"]:
            continue
        if len(fields) != 1:
            raise ParseError(f"{name}: expected one value per line, got {len(fields)}", lineno)
        values.append(_parse_float(fields[0], name, lineno))
    return np.array(values, dtype=float)


def parse_csv_triple(a_text: str, b_text: str, c_text: str) -> RawLP:
    b = parse_column(b_text, "b.csv")
    c = parse_column(c_text, "c.csv")
    m, n = b.size, c.size
    if m == 0 or n == 0:
        raise DimensionMismatch("constraint matrix is empty")
    A = np.zeros((m, n))
    seen: set[tuple[int, int]] = set()
    header = False
    for lineno, fields in _rows(a_text):
        if not header:
            if fields != ["i", "j", "value"]:
                raise ParseError("expected header i,j,value", lineno)
            header = True
            continue
        if len(fields) != 3:
            raise ParseError(f"expected 3 fields, got {len(fields)}", lineno)
        i = _parse_index(fields[0], "i", lineno)
        j = _parse_index(fields[1], "j", lineno)
        if not (0 <= i < m and 0 <= j < n):
            raise DimensionMismatch(f"line {lineno}: entry ({i},{j}) outside a {m}x{n} matrix")
        if (i, j) in seen:
            raise ParseError(f"duplicate entry ({i},{j})", lineno)
        seen.add((i, j))
        A[i, j] = _parse_float(fields[2], "value", lineno)
    if not header:
        raise ParseError("missing header i,j,value", 1)
    return _build(A, b, c)


def _build(A: np.ndarray, b: np.ndarray, c: np.ndarray) -> RawLP:
    try:
        return RawLP(A, b, c)
    except NonFinite as exc:
        raise ParseError(str(exc)) from exc


# ---------------------------------------------------------------- writing


def emit_instance(lp: RawLP, path: str | Path, fmt: str = "json-dense") -> None:
    """Write ``lp`` so that ``parse_instance`` reads back the same floats."""
    path = Path(path)
    if fmt == "json-dense":
        payload = {"A": lp.A.tolist(), "b": lp.b.tolist(), "c": lp.c.tolist()}
        path.write_text(json.dumps(payload), encoding="utf-8")
        return
    if fmt != "csv-triple":
        raise ParseError(f"unknown format {fmt!r}")
    lines = ["i,j,value"]
    for i, j in zip(*np.nonzero(lp.A)):
        lines.append(f"{i},{j},{float(lp.A[i, j])!r}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    for name, vec in (("b.csv", lp.b), ("c.csv", lp.c)):
        body = "\n".join(["value"] + [repr(float(v)) for v in vec])
        (path.parent / name).write_text(body + "\n", encoding="utf-8")


def report_json(report: SolveReport) -> str:
    """Field names are those of ``SolveReport``; non-finite floats become null."""
    return json.dumps(_finite(report.to_dict()), sort_keys=True)


def _finite(obj):
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {k: _finite(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_finite(v) for v in obj]
    return obj


def report_text(report: SolveReport) -> str:
    lines = [f"status: {report.status}"]
    if report.objective is not None:
        lines.append(f"objective: {report.objective:.12g}")
    if report.x_star is not None:
        lines.append("x: " + " ".join(f"{v:.12g}" for v in report.x_star))
    lines.append(f"active set: {report.active_set}")
    if report.active_bounds:
        lines.append(f"active bounds: {', '.join(report.active_bounds)}")
    lines.append(
        f"iterations: {report.iterations}  linear solves: {report.linear_solves}  "
        f"audits: {report.audits}  rollbacks: {report.rollbacks}"
    )
    lines.append(f"duality gap bound: {report.duality_gap_bound:.3e}")
    lines.append(f"mode: {report.mode}  wall time: {report.wall_time:.1f} ms")
    return "\n".join(lines)


# ---------------------------------------------------------------- entry point


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _positive_float(text: str) -> float:
    value = float(text)
    if not (0.0 < value < 1.0):
        raise argparse.ArgumentTypeError("tolerance must lie in (0, 1)")
    return value


def _seed(text: str) -> int:
    value = int(text)
    if not (0 <= value < 2**64):
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def _positive_int(text: str) -> int:
    value = int(text)
    if value <= 0:
        raise argparse.ArgumentTypeError("must be positive")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="weighted-lp", description="Solve min c^T x subject to A x >= b.")
    parser.add_argument("--input", required=True, help="instance file")
    parser.add_argument("--format", choices=FORMATS, default="json-dense")
    parser.add_argument("--tol", type=_positive_float, default=1e-8, help="target duality gap")
    parser.add_argument("--mode", choices=("tolerance", "integral"), default="tolerance")
    parser.add_argument("--seed", type=_seed, default=0)
    parser.add_argument("--strict-constants", action="store_true", help="use the worst-case step constants")
    parser.add_argument("--trace", help="write one JSON record per iteration to this file")
    parser.add_argument("--report", choices=("text", "json"), default="text")
    parser.add_argument("--max-iters", type=_positive_int, default=None)
    return parser


def run(argv: list[str] | None = None, stdout=None, stderr=None) -> int:
    stdout = stdout if stdout is not None else sys.stdout
    stderr = stderr if stderr is not None else sys.stderr
    try:
        args = build_parser().parse_args(argv)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return 0 if exc.code in (0, None) else EXIT_USAGE

    try:
        lp = parse_instance(args.input, args.format)
    except (ParseError, DimensionMismatch) as exc:
        print(f"{args.input}: {exc}", file=stderr)
        return EXIT_USAGE

    trace: list | None = [] if args.trace else None
    pcfg = PathConfig(strict_constants=args.strict_constants, trace=trace)
    if args.max_iters is not None:
        pcfg.max_iters = args.max_iters
    try:
        report = solve(lp, tolerance=args.tol, mode=args.mode, rng=args.seed, pcfg=pcfg)
    except (SolverError, ValueError, ArithmeticError, np.linalg.LinAlgError) as exc:
        # solve classifies solver failures itself; this only catches surprises
        print(f"solver failure: {type(exc).__name__}: {exc}", file=stderr)
        return EXIT_CODES[NUMERICAL_FAILURE]

    if trace is not None:
        try:
            with open(args.trace, "w", encoding="utf-8") as fh:
                for record in trace:
                    fh.write(json.dumps(_finite(record), sort_keys=True) + "\n")
        except OSError as exc:
            print(f"cannot write trace: {exc}", file=stderr)
    for note in report.notes:
        print(f"note: {note}", file=stderr)
    print(report_json(report) if args.report == "json" else report_text(report), file=stdout)
    return EXIT_CODES[report.status]


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
