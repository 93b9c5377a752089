import json
import shutil

import pytest

from canyonsim import cli
from canyonsim.artifacts import read_csv, read_event_delays, read_json
from canyonsim.simulate import ScenarioConfig
from canyonsim.verify import check_trends, check_threshold


def write_config(path, **overrides):
    data = ScenarioConfig().to_dict()
    data.update(overrides)
    path.write_text(json.dumps(data))
    return str(path)


def test_generate_default(tmp_path, capsys):
    out = tmp_path / "g.json"
    assert cli.main(["generate", "--nu", "25", "--seed", "42", "--out", str(out)]) == 0
    data = json.loads(out.read_text())
    assert len(data["buildings"]) == 324
    assert "324 buildings" in capsys.readouterr().out


def test_generate_is_byte_identical(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    cli.main(["generate", "--out", str(a), "--quiet"])
    cli.main(["generate", "--out", str(b), "--quiet"])
    assert a.read_bytes() == b.read_bytes()


def test_generate_rejects_negative_nu(tmp_path, capsys):
    assert cli.main(["generate", "--nu", "-1", "--out", str(tmp_path / "g.json")]) == cli.EXIT_CONFIG
    assert "rice_nu" in capsys.readouterr().err


def test_bad_config_file(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert cli.main(["sweep", "--config", str(bad), "--out", str(tmp_path / "o")]) == cli.EXIT_CONFIG
    bad.write_text(json.dumps({"duration": 100.0}))
    assert cli.main(["sweep", "--config", str(bad), "--out", str(tmp_path / "o")]) == cli.EXIT_CONFIG
    assert cli.main(["sweep", "--config", str(tmp_path / "missing.json"), "--out", str(tmp_path / "o")]) == cli.EXIT_IO


def test_usage_error_exit_code():
    with pytest.raises(SystemExit) as exc:
        cli.main(["sweep"])
    assert exc.value.code == cli.EXIT_CONFIG


def test_single_environment_sweep(tmp_path, monkeypatch):
    cfg = write_config(tmp_path / "c.json", repetitions=1, nu_sweep=[25.0])
    out = tmp_path / "o"
    monkeypatch.setenv("CANYONSIM_SEED", "99")
    assert cli.main(["sweep", "--config", cfg, "--out", str(out), "--quiet"]) == 0
    assert sorted(p.name for p in (out / "events").iterdir()) == ["events_nu25m.csv"]
    manifest = read_json(out / "manifest.json")
    assert manifest["master_seed"] == 99
    assert manifest["kernel_backend"] in ("python", "compiled")
    summary = read_json(out / "summary.json")
    assert len(summary["environments"]) == 1
    header, rows = read_csv(out / "events" / "events_nu25m.csv")
    assert header[:4] == ["epoch_s", "sat_id", "surface_kind", "delay_m"]
    assert rows
    # the flag wins over the environment
    out2 = tmp_path / "o2"
    cli.main(["sweep", "--config", cfg, "--out", str(out2), "--seed", "7", "--quiet"])
    assert read_json(out2 / "manifest.json")["master_seed"] == 7


def test_rerun_from_manifest_is_identical(tmp_path):
    cfg = write_config(tmp_path / "c.json", repetitions=1, nu_sweep=[10.0, 40.0])
    first = tmp_path / "a"
    cli.main(["sweep", "--config", cfg, "--out", str(first), "--quiet", "--seed", "1234"])
    manifest = read_json(first / "manifest.json")
    again = tmp_path / "b"
    (tmp_path / "m.json").write_text(json.dumps(manifest["config"]))
    cli.main(["sweep", "--config", str(tmp_path / "m.json"), "--out", str(again), "--quiet"])
    for name in ("summary.json", "model.json", "events/events_nu10m.csv", "observations/observations_nu40m.csv"):
        assert (first / name).read_bytes() == (again / name).read_bytes()


def test_satellites_and_default_config(tmp_path, capsys):
    out = tmp_path / "s.csv"
    cfg = write_config(tmp_path / "c.json", repetitions=1)
    assert cli.main(["satellites", "--config", cfg, "--out", str(out), "--quiet"]) == 0
    header, rows = read_csv(out)
    assert len(rows) == 224 * 31
    assert cli.main(["default-config"]) == 0
    assert ScenarioConfig.from_dict(json.loads(capsys.readouterr().out)) == ScenarioConfig()


def test_verify_empty_directory(tmp_path, capsys):
    assert cli.main(["verify", str(tmp_path)]) == cli.EXIT_IO
    assert "missing" in capsys.readouterr().err


def test_default_sweep_artifacts(default_sweep):
    out, result = default_sweep
    assert len(list((out / "events").glob("*.csv"))) == 12
    assert len(read_json(out / "summary.json")["environments"]) == 12
    delays = read_event_delays(out / "events" / "events_nu25m.csv")
    assert delays.min() >= 0.01
    model = read_json(out / "model.json")
    assert model["published"]["c2"] == -0.23


def test_schema_mismatch(default_sweep, tmp_path, capsys):
    out, _ = default_sweep
    copy = tmp_path / "copy"
    shutil.copytree(out, copy)
    data = json.loads((copy / "summary.json").read_text())
    data["schema_version"] = 2
    (copy / "summary.json").write_text(json.dumps(data))
    assert cli.main(["verify", str(copy), "--no-rerun"]) == cli.EXIT_SCHEMA


def test_tampered_summary_breaks_monotonicity(default_sweep):
    out, _ = default_sweep
    envs = read_json(out / "summary.json")["environments"]
    assert check_trends(envs)[1].passed
    tampered = json.loads(json.dumps(envs))
    for i, e in enumerate(sorted(tampered, key=lambda e: e["mu_h_m"])):
        e["mean_received_Ns"] = float(i % 2) * 5.0 + 3.0
    assert not check_trends(tampered)[1].passed


def test_threshold_detection_on_synthetic_summary():
    envs = [{"mu_h_m": mu, "mean_received_Ns": ns} for mu, ns in ((20.0, 6.0), (30.0, 5.0), (40.0, 3.0))]
    r = check_threshold(envs)
    assert r.passed
    assert "35" in r.observed


def test_verify_reports_failures_with_exit_code(default_sweep, capsys):
    out, _ = default_sweep
    code = cli.main(["verify", str(out), "--no-rerun"])
    text = capsys.readouterr().out
    assert "criteria passed" in text
    assert code in (cli.EXIT_OK, cli.EXIT_VERIFY)
    assert (code == cli.EXIT_OK) == ("FAIL" not in text)
