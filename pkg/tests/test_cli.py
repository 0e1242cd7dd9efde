import json

import pytest

from rwsa.cli import EXIT_FAIL, EXIT_GUARD, EXIT_OK, EXIT_USAGE, main, validate_output
from rwsa.gclass import full_class_suite
from rwsa.numerics.gilkey import gilkey_a2_oracle


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_gclass_suite(capsys):
    code, out, _ = run(capsys, "gclass", "--n", "2", "--suite")
    assert code == EXIT_OK
    lines = out.splitlines()
    assert lines == [f"{k}: {v}" for k, v in full_class_suite(2).items()]
    assert "projective_complement: L^5 - L^2" in lines


def test_heat_json_is_the_curvature_answer(capsys):
    code, out, _ = run(capsys, "heat", "--n", "1", "--format", "json")
    assert code == EXIT_OK
    obj = json.loads(out)
    assert obj["coefficient"] == gilkey_a2_oracle().to_json_obj()
    assert {t["coeff"] for t in obj["coefficient"]["terms"]} == {"-1/4", "1/4"}


def test_symbol_p2_is_scalar(capsys):
    code, out, _ = run(capsys, "symbol", "--which", "p2", "--n", "1", "--format", "json")
    assert code == EXIT_OK
    m = json.loads(out)["entries"]
    assert all(m[i][j] == (m[0][0] if i == j else {"n": 1, "terms": []}) for i in range(4) for j in range(4))
    code, text, _ = run(capsys, "symbol", "--which", "p2", "--n", "1")
    assert text.startswith("p2 (order 2), n=1")


JSON_COMMANDS = [
    ("symbol", "--which", "q0", "--n", "1"),
    ("parametrix", "--n", "1", "--order", "1"),
    ("parametrix", "--n", "1", "--trace", "--parity"),
    ("heat", "--n", "2"),
    ("period-form", "--n", "1"),
    ("gclass", "--n", "3", "--suite"),
    ("gclass", "--n", "1"),
    ("verify", "gilkey"),
    ("verify", "period", "--n", "1", "--alpha", "3/2", "--alphaj", "1/2", "-1"),
    ("verify", "period", "--n", "1", "--method", "mc", "--budget", "20000", "--tol", "1"),
]


@pytest.mark.parametrize("argv", JSON_COMMANDS, ids=lambda a: "-".join(a[:2]))
def test_json_is_valid_and_reproducible(capsys, argv):
    code, out, _ = run(capsys, *argv, "--format", "json")
    assert code == EXIT_OK
    obj = json.loads(out)
    kind = {"period-form": "period_form"}.get(obj["command"], obj["command"])
    validate_output(obj, kind)
    again = run(capsys, *argv, "--format", "json")[1]
    assert again == out


def test_mc_output_is_independent_of_threads(capsys):
    base = ("verify", "period", "--n", "1", "--method", "mc", "--budget", str(2**21 + 7), "--tol", "1",
            "--seed", "3", "--format", "json")
    one = run(capsys, *base, "--threads", "1")[1]
    two = run(capsys, *base, "--threads", "2")[1]
    assert one == two


def test_seed_changes_mc_output(capsys):
    base = ("verify", "period", "--n", "1", "--method", "mc", "--budget", "50000", "--tol", "1")
    assert run(capsys, *base, "--seed", "1")[1] != run(capsys, *base, "--seed", "2")[1]


def test_threads_from_environment(capsys, monkeypatch):
    monkeypatch.setenv("RWSA_THREADS", "nope")
    code, _, err = run(capsys, "heat", "--n", "1")
    assert code == EXIT_USAGE
    assert json.loads(err)["kind"] == "usage"
    monkeypatch.setenv("RWSA_THREADS", "2")
    assert run(capsys, "heat", "--n", "1")[0] == EXIT_OK


def test_resource_guard(capsys):
    code, out, err = run(capsys, "heat", "--n", "4")
    assert code == EXIT_GUARD
    assert out == ""
    diag = json.loads(err)
    assert diag["error"] is True and diag["kind"] == "resource"
    validate_output(diag, "diagnostic")


def test_bad_flags_exit_with_usage(capsys):
    with pytest.raises(SystemExit) as e:
        main(["heat", "--n", "one"])
    assert e.value.code == EXIT_USAGE
    capsys.readouterr()
    code, _, err = run(capsys, "parametrix", "--n", "1", "--order", "5")
    assert code == EXIT_USAGE and json.loads(err)["kind"] == "usage"


def test_missing_file_is_reported(capsys, tmp_path):
    code, _, err = run(capsys, "verify", "oracle", "--file", str(tmp_path / "none.txt"))
    assert code == EXIT_USAGE
    assert json.loads(err)["error"] is True


def test_out_writes_a_file(capsys, tmp_path):
    path = tmp_path / "form.json"
    code, out, _ = run(capsys, "period-form", "--n", "1", "--out", str(path), "--format", "json")
    assert code == EXIT_OK and out == ""
    obj = json.loads(path.read_text())
    assert obj["constant"]["rational"] == "1/2" and obj["constant"]["pi_power"] == -2


def test_verify_oracle_on_fixture(capsys, fixtures_dir):
    code, out, _ = run(capsys, "verify", "oracle", "--file", str(fixtures_dir / "b_minus4.txt"),
                       "--format", "json")
    assert code == EXIT_OK
    obj = json.loads(out)
    assert obj["ok"] and obj["points"] >= 20 and obj["max_rel_dev"] < 1e-10


def test_verify_oracle_mismatch_fails(capsys, tmp_path):
    f = tmp_path / "bad.txt"
    f.write_text("# n = 1\n4/Q^2\n")
    code, out, err = run(capsys, "verify", "oracle", "--file", str(f))
    assert code == EXIT_FAIL
    assert "MISMATCH" in out
    assert json.loads(err)["kind"] == "verification"


def test_verify_period_text(capsys):
    code, out, _ = run(capsys, "verify", "period", "--n", "1", "--alpha", "1", "--alphaj", "1/2", "1/3")
    assert code == EXIT_OK
    assert out.startswith("period (gauss") and out.rstrip().endswith("ok")


def test_version(capsys):
    with pytest.raises(SystemExit) as e:
        main(["--version"])
    assert e.value.code == 0
    assert capsys.readouterr().out.startswith("rwsa ")
