import json

import pytest

from adsdeform import cli
from adsdeform.config import ConfigError, RunConfig


def run(tmp_path, *argv, env=None, monkeypatch=None):
    out = tmp_path / "out.txt"
    code = cli.main([*argv, "--out", str(out)])
    return code, (out.read_text() if out.exists() else None)


def test_config_validation():
    with pytest.raises(ConfigError):
        RunConfig(theta=0.0)
    with pytest.raises(ConfigError):
        RunConfig(alpha=1.0)
    with pytest.raises(ConfigError):
        RunConfig(grid_cells=1, grid_order=4)
    with pytest.raises(ConfigError):
        RunConfig.from_mapping({"nonsense": 1})
    assert RunConfig().hash() == RunConfig(out="x.json").hash()
    assert RunConfig().hash() != RunConfig(theta=0.5).hash()


def test_verify_suite_report(tmp_path):
    code, text = run(tmp_path, "verify", "--suite", "metric")
    assert code == 0
    doc = json.loads(text)
    assert doc["config_hash"] == RunConfig().hash()
    assert doc["version"] and doc["tolerances"]["metric.relative"] == 1e-6
    assert doc["suites"]["metric"]["passed"]


def test_verification_failure_exit_code(tmp_path):
    code, text = run(tmp_path, "bfield", "--samples", "5")
    assert code == 3
    assert text.startswith("# version=")


def test_config_error_exit_code(tmp_path, capsys):
    assert cli.main(["verify", "--theta", "0"]) == 2
    assert "theta" in capsys.readouterr().err
    assert cli.main(["verify", "--suite", "nope"]) == 2
    assert cli.main([]) == 2


def test_config_file(tmp_path):
    cfgf = tmp_path / "c.json"
    cfgf.write_text(json.dumps({"theta": 0.5, "n_metric": 3}))
    code, text = run(tmp_path, "verify", "--suite", "metric", "--config", str(cfgf))
    assert code == 0 and json.loads(text)["config"]["theta"] == 0.5
    cfgf.write_text("{not json")
    assert cli.main(["verify", "--config", str(cfgf)]) == 2


def test_io_error_exit_code(tmp_path):
    assert cli.main(["verify", "--suite", "metric", "--out", str(tmp_path / "no" / "x.json")]) == 4
    assert cli.main(["torus", "--modes", str(tmp_path / "missing.json")]) == 4
    assert cli.main(["verify", "--config", str(tmp_path / "missing.json")]) == 4


def test_threads_env(tmp_path, monkeypatch):
    monkeypatch.setenv("ADSDEFORM_THREADS", "0")
    assert cli.main(["verify", "--suite", "metric"]) == 2
    monkeypatch.setenv("ADSDEFORM_THREADS", "2")
    a = run(tmp_path, "classify", "--grid", "4x4x2")
    monkeypatch.setenv("ADSDEFORM_THREADS", "1")
    b = run(tmp_path, "classify", "--grid", "4x4x2")
    assert a == b and a[0] == 0


def test_classify_rows(tmp_path):
    code, text = run(tmp_path, "classify", "--grid", "4x3x2", "--spin", "0")
    lines = [l for l in text.splitlines() if not l.startswith("#")]
    assert code == 0 and len(lines) == 1 + 24
    assert lines[0] == "phi,n,a,causal_class,horizon,singularity,component"
    assert cli.main(["classify", "--grid", "4x4"]) == 2


def test_torus_json_complex_pairs(tmp_path):
    modes = tmp_path / "m.json"
    modes.write_text(json.dumps({"modes": [[1, 0], [0, 1]]}))
    code, text = run(tmp_path, "torus", "--theta", "0.5", "--modes", str(modes))
    doc = json.loads(text)
    assert code == 0
    row = [r for r in doc["products"] if r["m"] == [1, 0] and r["n"] == [0, 1]][0]
    assert row["mode"] == [1, 1] and len(row["coeff"]) == 2


def test_symsym_reports_and_rejects_wide_functions(tmp_path):
    code, text = run(tmp_path, "symsym")
    doc = json.loads(text)
    assert code in (0, 3)
    assert set(doc["report"]) >= {"trace_defect", "associativity_defect", "invariance_defect"}
    assert len(doc["product"]) == 24 and len(doc["product"][0][0]) == 2
    assert cli.main(["symsym", "--fn-a", "gauss:0,0,1.0"]) == 2
    assert cli.main(["symsym", "--fn-a", "blob:1"]) == 2


def test_spectral_deterministic(tmp_path):
    a = run(tmp_path, "spectral", "--check", "derivation")
    b = run(tmp_path, "spectral", "--check", "derivation")
    assert a == b and a[0] == 0
