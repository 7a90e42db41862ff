import json
import random
import shutil
import subprocess
from fractions import Fraction

import numpy as np
import pytest

from laplace_toda import cli, disc, io, semidisc as sd, toda
from laplace_toda.errors import ParseError
from laplace_toda.verify import _laplace_chain

T = 2 * np.pi


def semi_op(seed=0, N=2):
    return sd.random_operator(N, 2, np.random.default_rng(seed), period=T)


def disc_op(seed=0):
    return disc.random_operator(disc.PeriodMatrix.from_rows([[2, 0], [1, 2]]), random.Random(seed))


# serialization

def test_semi_round_trip_is_byte_identical():
    text = io.dumps(semi_op(), {"note": "a [b], c\nd"})
    doc = io.loads(text)
    assert doc.kind == "semi-discrete"
    assert doc.metadata == {"note": "a [b], c\nd"}
    assert io.dumps(doc.obj, doc.metadata) == text
    assert sd.operator_distance(doc.obj, semi_op()) == 0


def test_disc_round_trip_exact():
    L = disc_op()
    doc = io.loads(io.dumps(L))
    assert doc.kind == "discrete" and doc.obj == L


def test_field_round_trips():
    rng = np.random.default_rng(1)
    sf = toda.SemiDiscreteField(tuple(tuple(sd.random_invariants(2, 2, rng).w) for _ in range(3)), k0=2)
    doc = io.loads(io.dumps(sf))
    assert doc.kind == "semi-discrete-field" and doc.obj.k0 == 2
    assert io.dumps(doc.obj) == io.dumps(sf)
    P = disc.PeriodMatrix.diag(2, 2)
    df = toda.DiscreteField(P, {0: ((Fraction(1, 3), 2), (3, 4)), 1: ((5, 6), (7, Fraction(-8, 9)))})
    back = io.loads(io.dumps(df)).obj
    assert back.layers == df.layers


@pytest.mark.parametrize("text", ["not json", "{}", '{"kind": "semi-discrete"}',
                                  '{"kind": "bogus"}', "[1, 2]"])
def test_parse_errors(text):
    with pytest.raises(ParseError):
        io.loads(text)


def test_bad_rational_rejected():
    data = json.loads(io.dumps(disc_op()))
    data["coefficients"]["a"][0][0] = "1/0"
    with pytest.raises(ParseError):
        io.loads(json.dumps(data))


# command line

def write(tmp_path, name, obj):
    path = tmp_path / name
    io.dump(obj, path)
    return str(path)


def test_verify_named_suites(capsys):
    assert cli.main(["verify", "--suite", "lemma4", "--seed", "7"]) == 0
    assert cli.main(["verify", "--suite", "lemma13", "--seed", "7"]) == 0
    out = capsys.readouterr().out
    assert "FAIL" not in out and out.count("PASS") >= 6


def test_verify_unknown_suite():
    assert cli.main(["verify", "--suite", "nope"]) == 2


def test_verify_writes_report(tmp_path):
    assert cli.main(["verify", "--suite", "eq15", "--output-dir", str(tmp_path)]) == 0
    report = json.loads((tmp_path / "verify.json").read_text())
    assert report and all(c["ok"] for c in report["checks"])


def test_usage_errors(tmp_path):
    with pytest.raises(SystemExit) as err:
        cli.main([])
    assert err.value.code == 2
    with pytest.raises(SystemExit) as err:
        cli.main(["laplace", "--input", "x.json", "--type", "third"])
    assert err.value.code == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{ nope")
    assert cli.main(["laplace", "--input", str(bad), "--output-dir", str(tmp_path)]) == 2


def test_laplace_count_zero_echoes_input(tmp_path):
    src = write(tmp_path, "in.json", semi_op())
    assert cli.main(["laplace", "--input", src, "--count", "0", "--output-dir", str(tmp_path)]) == 0
    assert (tmp_path / "op_000.json").read_text() == open(src).read()


def test_laplace_semi_chain(tmp_path, capsys):
    src = write(tmp_path, "in.json", semi_op(2))
    code = cli.main(["laplace", "--input", src, "--count", "2", "--then-inverse",
                     "--output-dir", str(tmp_path)])
    assert code == 0
    assert "gauge-equivalent: true" in capsys.readouterr().out
    assert (tmp_path / "op_002.json").exists() and (tmp_path / "trace.csv").exists()


def test_laplace_discrete_variant(tmp_path):
    P = disc.PeriodMatrix.diag(2, 2)
    L = _laplace_chain(P, random.Random(3), 3)[0]
    src = write(tmp_path, "in.json", L)
    assert cli.main(["laplace", "--input", src, "--count", "2", "--output-dir", str(tmp_path)]) == 0
    out = io.load(tmp_path / "op_001.json").obj
    assert disc.same_class(out, disc.laplace12_pp(L))
    report = json.loads((tmp_path / "report.json").read_text())
    assert "spectral_invariance" in report
    assert cli.main(["laplace", "--input", src, "--variant", "pmx12",
                     "--output-dir", str(tmp_path)]) == 0


def test_laplace_degenerate_exit(tmp_path):
    L = disc.DiscreteOperator.constant(disc.PeriodMatrix.diag(2, 2), 1, 2, 3, 6)   # w = 0
    src = write(tmp_path, "in.json", L)
    assert cli.main(["laplace", "--input", src, "--output-dir", str(tmp_path)]) == 3


def test_spectral_discrete(tmp_path):
    src = write(tmp_path, "in.json", disc_op(4))
    assert cli.main(["spectral", "--input", src, "--output-dir", str(tmp_path)]) == 0
    data = json.loads((tmp_path / "spectral.json").read_text())
    assert data["genus"] == 2 and data["newton_ok"] and all(data["corners"].values())


def test_spectral_semi(tmp_path):
    L = sd.SemiDiscreteOperator.constant([0.3, -0.2], -1, [0.5, 0.1], 1, N=2, period=1.0)
    src = write(tmp_path, "in.json", L)
    assert cli.main(["spectral", "--input", src, "--output-dir", str(tmp_path),
                     "--rho-grid", "0", "2+1j", "1"]) == 0
    rows = (tmp_path / "curve.csv").read_text().splitlines()
    assert len(rows) == 4 and rows[1].endswith(",ok") and "PoleAtOne" in rows[-1]
    fibers = json.loads((tmp_path / "fibers.json").read_text())
    assert fibers["zero"]["mismatch"] < 1e-8 and fibers["infinity"]["mismatch"] < 1e-8


def test_spectral_semi_needs_normalizable_operator(tmp_path):
    src = write(tmp_path, "in.json", semi_op(5))
    assert cli.main(["spectral", "--input", src, "--output-dir", str(tmp_path)]) == 3


def test_toda_check_pass_and_fail(tmp_path):
    rng = np.random.default_rng(6)
    chain = sd.build_chain(sd.random_invariants(2, 2, rng), 3)
    good = write(tmp_path, "good.json", toda.field_from_chain(chain))
    assert cli.main(["toda", "--input", good, "--output-dir", str(tmp_path)]) == 0
    junk = toda.SemiDiscreteField(tuple(tuple(sd.random_invariants(2, 2, rng).w) for _ in range(4)))
    bad = write(tmp_path, "bad.json", junk)
    assert cli.main(["toda", "--input", bad, "--output-dir", str(tmp_path)]) in (1, 3)


def test_toda_discrete_steps(tmp_path):
    P = disc.PeriodMatrix.diag(2, 2)
    ops = _laplace_chain(P, random.Random(7), 4)
    field = toda.DiscreteField(P, {0: disc.invariants(ops[0]).w, 1: disc.invariants(ops[1]).w})
    src = write(tmp_path, "in.json", field)
    assert cli.main(["toda", "--input", src, "--steps", "2", "--output-dir", str(tmp_path)]) == 0
    out = io.load(tmp_path / "field.json").obj
    assert out.layers[2] == disc.invariants(ops[2]).w
    assert out.layers[3] == disc.invariants(ops[3]).w


@pytest.mark.skipif(shutil.which("laplace-toda") is None, reason="console script not installed")
def test_console_script():
    proc = subprocess.run(["laplace-toda", "verify", "--suite", "lemma4", "--seed", "7"],
                          capture_output=True, text=True, timeout=120)
    assert proc.returncode == 0 and "PASS" in proc.stdout
