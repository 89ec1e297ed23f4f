import io
import json
import random
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from weighted_lp.cli import (
    EXIT_USAGE,
    emit_instance,
    parse_csv_triple,
    parse_instance,
    parse_json_dense,
    report_json,
    run,
)
from weighted_lp.errors import DimensionMismatch, ParseError
from weighted_lp.lp_driver import SolveReport

BOX_JSON = {"A": [[1, 0], [0, 1], [-1, 0], [0, -1]], "b": [0, 0, -1, -1], "c": [-1, -1]}
EMPTY_JSON = {"A": [[1], [-1]], "b": [1, 0], "c": [1]}


def write(tmp_path, payload, name="lp.json"):
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return str(path)


def invoke(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def test_interval_example():
    lp = parse_json_dense('{"A":[[1],[-1]],"b":[0,-1],"c":[-1]}')
    assert lp.shape == (2, 1)
    np.testing.assert_array_equal(lp.b, [0, -1])
    np.testing.assert_array_equal(lp.c, [-1])


def test_empty_matrix_is_a_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        parse_json_dense('{"A": [], "b": [], "c": []}')
    with pytest.raises(DimensionMismatch):
        parse_json_dense('{"A": [[]], "b": [0], "c": []}')
    with pytest.raises(DimensionMismatch):
        parse_csv_triple("i,j,value\n", "", "1\n")


@pytest.mark.parametrize(
    "text",
    [
        '{"A": [[1, 2], [3]], "b": [0, 0], "c": [1, 1]}',
        '{"A": [[1, 2]], "b": [0, 0], "c": [1, 1]}',
        '{"A": [[1, 2]], "b": [0], "c": [1]}',
    ],
)
def test_inconsistent_shapes(text):
    with pytest.raises(DimensionMismatch):
        parse_json_dense(text)


@pytest.mark.parametrize(
    "text",
    [
        '{"A": [[NaN]], "b": [0], "c": [1]}',
        '{"A": [[Infinity]], "b": [0], "c": [1]}',
        '{"A": [[1e999]], "b": [0], "c": [1]}',
        '{"A": [[true]], "b": [0], "c": [1]}',
        '{"A": [["1"]], "b": [0], "c": [1]}',
        '{"A": [[1]], "b": [0]}',
        '[1, 2]',
        '{"A": [[1]], "b": 0, "c": [1]}',
    ],
)
def test_json_rejections(text):
    with pytest.raises(ParseError):
        parse_json_dense(text)


def test_json_syntax_error_has_a_line():
    with pytest.raises(ParseError) as info:
        parse_json_dense('{"A": [[1]],\n "b": [0],\n "c": [1,]}')
    assert info.value.line == 3


def test_csv_parsing_and_rejections():
    lp = parse_csv_triple("i,j,value\n0,0,1\n1,1,-2.5\n", "value\n0\n1\n", "3\n4\n")
    np.testing.assert_array_equal(lp.A, [[1, 0], [0, -2.5]])
    np.testing.assert_array_equal(lp.b, [0, 1])
    with pytest.raises(ParseError):
        parse_csv_triple("i,j,value\n0,0,1\n0,0,2\n", "0\n", "1\n")
    with pytest.raises(DimensionMismatch):
        parse_csv_triple("i,j,value\n0,3,1\n", "0\n", "1\n")
    with pytest.raises(ParseError) as info:
        parse_csv_triple("i,j,value\n0,0,abc\n", "0\n", "1\n")
    assert info.value.line == 2
    with pytest.raises(ParseError):
        parse_csv_triple("0,0,1\n", "0\n", "1\n")
    with pytest.raises(ParseError):
        parse_csv_triple("i,j,value\n0,0,nan\n", "0\n", "1\n")


@given(st.integers(1, 7), st.integers(1, 5), st.integers(0, 2**32 - 1), st.sampled_from(["json-dense", "csv-triple"]))
def test_round_trip_is_exact(m, n, seed, fmt):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((m, n)) * 10.0 ** rng.integers(-300, 300, (m, n))
    A[rng.random((m, n)) < 0.3] = 0.0
    A[:, 0] += 1.0  # no empty matrix
    from weighted_lp.lp_driver import RawLP

    lp = RawLP(A, rng.standard_normal(m) * 1e-5, rng.standard_normal(n) * 1e7)
    import tempfile
    from pathlib import Path

    with tempfile.TemporaryDirectory() as d:
        path = Path(d) / ("lp.json" if fmt == "json-dense" else "A.csv")
        emit_instance(lp, path, fmt)
        back = parse_instance(path, fmt)
    for x, y in ((lp.A, back.A), (lp.b, back.b), (lp.c, back.c)):
        np.testing.assert_allclose(y, x, rtol=1e-15, atol=0)


def test_box_instance_end_to_end(tmp_path):
    code, out, _ = invoke("--input", write(tmp_path, BOX_JSON), "--report", "json")
    assert code == 0
    rep = json.loads(out)
    assert rep["status"] == "Optimal"
    assert abs(rep["objective"] + 2.0) <= 1e-8
    assert set(rep) == set(SolveReport.__dataclass_fields__)


def test_text_report(tmp_path):
    code, out, _ = invoke("--input", write(tmp_path, BOX_JSON))
    assert code == 0
    assert out.splitlines()[0] == "status: Optimal"


@pytest.mark.parametrize("mode", ["tolerance", "integral"])
def test_infeasible_exit_code(tmp_path, mode):
    code, out, _ = invoke("--input", write(tmp_path, EMPTY_JSON), "--report", "json", "--mode", mode)
    assert code == 2 and json.loads(out)["status"] == "Infeasible"


def test_unbounded_exit_code(tmp_path):
    code, _, err = invoke("--input", write(tmp_path, {"A": [[1]], "b": [0], "c": [-1]}), "--mode", "integral")
    assert code == 3


def test_iteration_limit_exit_code(tmp_path):
    code, out, _ = invoke("--input", write(tmp_path, BOX_JSON), "--max-iters", "5", "--report", "json")
    assert code == 4 and json.loads(out)["status"] == "IterationLimit"


def test_same_seed_gives_identical_reports(tmp_path):
    lp = {"A": np.vstack([np.eye(3), -np.eye(3), [[1, 2, 3]]]).tolist(), "b": [0, 0, 0, -2, -3, -1, 1], "c": [1, -2, 0.5]}
    path = write(tmp_path, lp)
    outs = []
    for _ in range(2):
        code, out, _ = invoke("--input", path, "--report", "json", "--seed", "12345", "--mode", "integral")
        rep = json.loads(out)
        rep.pop("wall_time")
        outs.append(json.dumps(rep, sort_keys=True))
    assert outs[0] == outs[1]


def test_trace_is_json_lines(tmp_path):
    trace = tmp_path / "trace.jsonl"
    code, _, _ = invoke("--input", write(tmp_path, BOX_JSON), "--trace", str(trace))
    assert code == 0
    records = [json.loads(line) for line in trace.read_text().splitlines()]
    assert records and all({"iter", "t", "delta"} <= set(r) for r in records)
    assert any(r.get("audit") for r in records)


def test_csv_input(tmp_path):
    (tmp_path / "A.csv").write_text("i,j,value\n0,0,1\n1,1,1\n2,0,-1\n3,1,-1\n")
    (tmp_path / "b.csv").write_text("0\n0\n-1\n-1\n")
    (tmp_path / "c.csv").write_text("-1\n-1\n")
    code, out, _ = invoke("--input", str(tmp_path / "A.csv"), "--format", "csv-triple", "--report", "json")
    assert code == 0 and abs(json.loads(out)["objective"] + 2) <= 1e-8


@pytest.mark.parametrize(
    "argv",
    [
        [],
        ["--input", "x.json", "--tol", "0"],
        ["--input", "x.json", "--tol", "2"],
        ["--input", "x.json", "--tol", "abc"],
        ["--input", "x.json", "--seed", "-1"],
        ["--input", "x.json", "--seed", str(2**64)],
        ["--input", "x.json", "--mode", "exact"],
        ["--input", "x.json", "--format", "mps"],
        ["--input", "x.json", "--max-iters", "0"],
        ["--input", "x.json", "--bogus"],
    ],
)
def test_usage_errors(argv):
    code, out, err = invoke(*argv)
    assert code == EXIT_USAGE and out == "" and err


def test_unreadable_and_malformed_files(tmp_path):
    assert invoke("--input", str(tmp_path / "missing.json"))[0] == EXIT_USAGE
    bad = tmp_path / "bad.json"
    bad.write_text('{"A": [[1]], "b": [0], "c": [1')
    code, _, err = invoke("--input", str(bad))
    assert code == EXIT_USAGE and "line 1" in err


def test_console_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "weighted_lp.cli", "--input", write(tmp_path, EMPTY_JSON), "--report", "json"],
        capture_output=True,
        text=True,
        timeout=600,
    )
    assert proc.returncode == 2
    assert json.loads(proc.stdout)["status"] == "Infeasible"


# ---------------------------------------------------------------- fuzzing

JSON_SEEDS = [json.dumps(BOX_JSON), json.dumps(EMPTY_JSON), '{"A":[[1],[-1]],"b":[0,-1],"c":[-1]}']
CSV_SEED = ("i,j,value\n0,0,1\n1,1,1\n2,0,-1\n3,1,-1\n", "0\n0\n-1\n-1\n", "-1\n-1\n")
ALPHABET = '{}[]",:0123456789.-+eE \nNaInfity abcijvalue,\t\\\x00é'


def mutate(text, rnd):
    chars = list(text)
    for _ in range(rnd.randint(1, 6)):
        op = rnd.random()
        pos = rnd.randrange(len(chars) + 1)
        if op < 0.35 and chars:
            del chars[min(pos, len(chars) - 1)]
        elif op < 0.7:
            chars.insert(pos, rnd.choice(ALPHABET))
        elif chars:
            chars[min(pos, len(chars) - 1)] = rnd.choice(ALPHABET)
    if rnd.random() < 0.05:
        chars = chars[: rnd.randrange(len(chars) + 1)]
    return "".join(chars)


def test_parser_fuzz_raises_only_documented_errors():
    """Ten thousand mutated files: each parses or raises ParseError / DimensionMismatch."""
    rnd = random.Random(20240601)
    outcomes = {"parsed": 0, "rejected": 0}
    for k in range(10_000):
        try:
            if k % 2 == 0:
                parse_json_dense(mutate(rnd.choice(JSON_SEEDS), rnd))
            else:
                which = rnd.randrange(3)
                parts = list(CSV_SEED)
                parts[which] = mutate(parts[which], rnd)
                parse_csv_triple(*parts)
            outcomes["parsed"] += 1
        except (ParseError, DimensionMismatch):
            outcomes["rejected"] += 1
    assert outcomes["parsed"] + outcomes["rejected"] == 10_000
    assert outcomes["parsed"] > 100 and outcomes["rejected"] > 1000


def test_fuzzed_files_through_the_command(tmp_path):
    """Accepted or not, every file ends in a documented exit code."""
    rnd = random.Random(7)
    path = tmp_path / "lp.json"
    for _ in range(60):
        path.write_text(mutate(rnd.choice(JSON_SEEDS), rnd))
        code, _, _ = invoke("--input", str(path), "--max-iters", "20000")
        assert code in (0, 2, 3, 4, 5, EXIT_USAGE)
