import csv
import json

import pytest

from veech.cli import EXIT_CONFIG, EXIT_FAIL, EXIT_OK, main

SMALL = """\
[run]
seed = 7

[samples]
walters_n = 2000
walters_offsets = 2
cone_samples = 40
z_samples = 40
mk_samples = 4
pipeline_points = 4
pipeline_n = 40
decay_per_shell = 3
key_samples = 2
band_orbits = 3
band_n = 200
"""


@pytest.fixture
def small_cfg(tmp_path):
    p = tmp_path / "small.ini"
    p.write_text(SMALL)
    return p


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_words_build(tmp_path, capsys):
    assert main(["words", "build", "--k", "2", "--out", str(tmp_path)]) == EXIT_OK
    assert capsys.readouterr().out.strip() == "UDUDZUDDUDUZDU"
    assert (tmp_path / "e_2.txt").read_text().strip() == "UDUDZUDDUDUZDU"
    rows = read_csv(tmp_path / "e_2.csv")
    assert rows[1][2:] == ["14", "4"]


def test_words_c_and_freq(tmp_path, capsys):
    assert main(["words", "c", "--out", str(tmp_path)]) == EXIT_OK
    assert capsys.readouterr().out.startswith("624960/5740286")
    assert main(["words", "freq", "--v", "UD", "--out", str(tmp_path)]) == EXIT_OK
    assert "inside=True" in capsys.readouterr().out
    assert main(["words", "freq", "--v", "UUU", "--out", str(tmp_path)]) == EXIT_FAIL


def test_missing_out_dir_is_created(tmp_path):
    out = tmp_path / "a" / "b" / "c"
    assert main(["words", "c", "--out", str(out)]) == EXIT_OK
    assert (out / "c_estimate.csv").exists()


@pytest.mark.parametrize("body", [
    "[tolerances]\nbundle_tol = -1\n",
    "[tolerances]\nmystery = 1\n",
    "[samples]\nnope = 3\n",
    "[samples]\ncone_samples = 0\n",
    "[run]\nschedule = weird\n",
    "[run]\nseed = abc\n",
])
def test_config_errors_exit_2(tmp_path, body, capsys):
    p = tmp_path / "bad.ini"
    p.write_text(body)
    assert main(["words", "c", "--config", str(p), "--out", str(tmp_path)]) == EXIT_CONFIG
    assert "config error" in capsys.readouterr().err


def test_missing_config_file(tmp_path):
    assert main(["words", "c", "--config", str(tmp_path / "none.ini")]) == EXIT_CONFIG


def test_bad_point_spec(tmp_path):
    code = main(["cocycle", "lyap", "--point", "moon:1", "--out", str(tmp_path)])
    assert code == EXIT_CONFIG


def test_global_flags_before_and_after_verb(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["--out", str(a), "words", "c"]) == EXIT_OK
    assert main(["words", "c", "--out", str(b)]) == EXIT_OK
    assert (a / "c_estimate.csv").read_text() == (b / "c_estimate.csv").read_text()


def test_scan_csv_and_plot(tmp_path):
    code = main(["cocycle", "scan", "--point", "junction:3", "--n-max", "400", "--oracle",
                 "--plot", "--out", str(tmp_path)])
    assert code == EXIT_OK
    rows = read_csv(tmp_path / "scan.csv")
    assert rows[0] == ["n", "log_norm", "exponent"]
    assert all(int(r[0]) % 2 == 0 for r in rows[1:])
    assert (tmp_path / "scan.svg").read_text().lstrip().startswith("<")
    summary = json.loads((tmp_path / "scan_summary.json").read_text())
    assert summary["oracle"] is True


def test_lyap_identity(tmp_path, capsys):
    assert main(["cocycle", "lyap", "--cocycle", "identity", "--n", "50",
                 "--out", str(tmp_path)]) == EXIT_OK
    assert float(capsys.readouterr().out) == 0.0


def test_schedules_command(tmp_path):
    assert main(["perturb", "schedules", "--names", "factorial", "--out", str(tmp_path)]) == EXIT_OK
    rows = read_csv(tmp_path / "schedule_factorial.csv")
    assert rows[1][:3] == ["1", "2", "2"]
    checks = read_csv(tmp_path / "schedule_factorial_checks.csv")
    assert all(r[2] == "true" for r in checks[1:])


def test_r_decay_sweep_deterministic(tmp_path):
    outs = []
    for name in ("one", "two"):
        out = tmp_path / name
        assert main(["perturb", "sweep", "--shells", "1", "2", "--per-shell", "3",
                     "--seed", "3", "--out", str(out)]) == EXIT_OK
        outs.append((out / "r_decay.csv").read_text())
    assert outs[0] == outs[1]
    rows = read_csv(tmp_path / "one" / "r_decay.csv")
    assert len(rows) == 7


def test_verify_all_subset_is_deterministic(tmp_path, small_cfg):
    texts = []
    for name in ("one", "two"):
        out = tmp_path / name
        code = main(["verify-all", "--only", "1", "2", "6", "--config", str(small_cfg),
                     "--out", str(out)])
        assert code == EXIT_OK
        texts.append(((out / "verify_all.json").read_text(), (out / "verify_all.csv").read_text()))
    assert texts[0] == texts[1]
    data = json.loads(texts[0][0])
    assert {d["criterion"] for d in data} == {1, 2, 6}
    assert all({"test", "paper_ref", "value", "bound", "pass"} <= set(d) for d in data)


def test_perturb_verify_small(tmp_path, small_cfg):
    code = main(["perturb", "verify", "--shell", "2", "--config", str(small_cfg),
                 "--out", str(tmp_path)])
    assert code in (EXIT_OK, EXIT_FAIL)
    data = json.loads((tmp_path / "perturb_verify.json").read_text())
    assert {d["criterion"] for d in data} == {7, 8, 9}
    assert (tmp_path / "verify_r_decay.csv").exists()
    assert (tmp_path / "verify_key_estimate.csv").exists()
