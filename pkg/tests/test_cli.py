import json
from pathlib import Path

import pytest

from bicmb.cli import EXIT_CONFIG, EXIT_MODEL, EXIT_OK, EXIT_VERIFY, WORKERS_ENV, main
from bicmb.config import parse_json, resolve
from bicmb.errors import ConfigInvalid

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def write(tmp_path, doc, name="c.json"):
    p = tmp_path / name
    p.write_text(doc if isinstance(doc, str) else json.dumps(doc))
    return str(p)


def test_spectrum_command(tmp_path, capsys):
    rc = main(["spectrum", "--config", str(CONFIGS / "spectrum_57_s2.json"), "--out", str(tmp_path)])
    assert rc == EXIT_OK
    out = capsys.readouterr().out
    assert "Z^5 (a^2 b^3)" in out
    data = json.loads((tmp_path / "spectrum.json").read_text())
    assert data["q_max_exact"] == 1


def test_design_command(tmp_path, capsys):
    assert main(["design", "--config", str(CONFIGS / "design_57_s4.json")]) == EXIT_OK
    assert "Q_max = 2" in capsys.readouterr().out
    assert main(["design", "--config", str(CONFIGS / "design_133_145_175_s3.json")]) == EXIT_OK


def test_design_budget_exhausted_is_model_error(tmp_path):
    cfg = write(tmp_path, {"code": {"generators": "5,7"}, "S": 3, "period_bits": 2})
    assert main(["design", "--config", cfg]) == EXIT_MODEL


def test_verify_appendix_commands(tmp_path, capsys):
    assert main(["verify-appendix", "--config", write(tmp_path, {"M_max": 1, "N_max": 1})]) == EXIT_OK
    assert "1/1 cases pass" in capsys.readouterr().out
    assert main(["verify-appendix", "--config", str(CONFIGS / "verify_appendix_fault.json")]) == EXIT_VERIFY


def test_diversity_table(tmp_path, capsys):
    assert main(["diversity-table", "--config", str(CONFIGS / "diversity_table_4x4.json"),
                 "--out", str(tmp_path)]) == EXIT_OK
    assert "4,16,9,9,4,4,1" in capsys.readouterr().out
    assert (tmp_path / "diversity_table.csv").exists()


def test_dry_run_does_no_work(tmp_path, capsys):
    rc = main(["simulate-ber", "--config", str(CONFIGS / "ber_diversity_trend.json"), "--dry-run",
               "--seed", "99", "--out", str(tmp_path)])
    assert rc == EXIT_OK
    doc = json.loads(capsys.readouterr().out)
    assert doc["config"]["seed"] == 99
    assert not list(tmp_path.iterdir())


def test_malformed_json_reports_location(tmp_path, capsys):
    cfg = write(tmp_path, '{\n  "M": ,\n}', "bad.json")
    assert main(["diversity-table", "--config", cfg]) == EXIT_CONFIG
    assert "bad.json:2:8" in capsys.readouterr().err


def test_schema_violation(tmp_path):
    assert main(["diversity-table", "--config", write(tmp_path, {"M": 0, "N": 2})]) == EXIT_CONFIG
    assert main(["spectrum", "--config", write(tmp_path, {"S": 2})]) == EXIT_CONFIG
    assert main(["spectrum", "--config", str(tmp_path / "missing.json")]) == EXIT_CONFIG


def test_catastrophic_code_is_model_error(tmp_path):
    cfg = write(tmp_path, {"code": {"generators": "6,5"}, "S": 2})
    assert main(["spectrum", "--config", cfg]) == EXIT_MODEL


def test_bad_puncture_is_model_error(tmp_path):
    cfg = write(tmp_path, {"code": {"generators": "133,171", "puncture": [[1, 0, 1], [1, 1, 0]]}, "S": 2})
    assert main(["spectrum", "--config", cfg]) == EXIT_MODEL


def test_worker_env(tmp_path, monkeypatch, capsys):
    cfg = write(tmp_path, {"M": 2, "N": 2})
    monkeypatch.setenv(WORKERS_ENV, "3")
    main(["diversity-table", "--config", cfg, "--dry-run"])
    assert json.loads(capsys.readouterr().out)["workers"] == 3
    main(["diversity-table", "--config", cfg, "--dry-run", "--workers", "2"])
    assert json.loads(capsys.readouterr().out)["workers"] == 2
    monkeypatch.setenv(WORKERS_ENV, "many")
    assert main(["diversity-table", "--config", cfg, "--dry-run"]) == EXIT_CONFIG


def test_outputs_reproducible(tmp_path):
    doc = {"seed": 4, "runs": [{"label": "a", "code": {"generators": "5,7"}, "L": 64,
                                "snr_db": [4, 8], "max_packets": 64, "batch_packets": 16,
                                "target_bit_errors": 20}]}
    cfg = write(tmp_path, doc)
    for d in ("o1", "o2"):
        assert main(["simulate-ber", "--config", cfg, "--out", str(tmp_path / d)]) == EXIT_OK
    for name in ("ber_a.csv", "ber_slopes.json"):
        assert (tmp_path / "o1" / name).read_bytes() == (tmp_path / "o2" / name).read_bytes()
    pep = {"M": 2, "N": 2, "alphas": [[1, 1], [0, 2]], "snr_db": [10, 20], "trials": 2000}
    pcfg = write(tmp_path, pep, "p.json")
    for d in ("p1", "p2"):
        assert main(["simulate-pep", "--config", pcfg, "--out", str(tmp_path / d)]) == EXIT_OK
    assert (tmp_path / "p1" / "pep_0.csv").read_bytes() == (tmp_path / "p2" / "pep_0.csv").read_bytes()


def test_resolve_fills_run_defaults():
    doc = resolve("simulate-ber", {"code": {"generators": "5,7"}, "snr_db": [1, 2]}, seed=3)
    assert doc["seed"] == 3 and doc["runs"][0]["L"] == 512 and doc["runs"][0]["slope_window"] == [1, 2]
    with pytest.raises(ConfigInvalid):
        parse_json("[1, 2]")
