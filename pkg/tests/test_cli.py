import csv
import json

import pytest

from flatneuro import cli
from flatneuro.config import SCENARIOS, load_config
from flatneuro.errors import ConfigurationError


def read_report(path):
    return json.loads((path / "report.json").read_text())


def test_list_scenarios(capsys):
    assert cli.main(["list-scenarios"]) == 0
    out = capsys.readouterr().out
    for name in SCENARIOS:
        assert name in out


@pytest.mark.parametrize("scenario", sorted(SCENARIOS))
def test_every_default_config_loads(scenario):
    cfg = load_config(scenario=scenario)
    assert cfg.scenario == scenario
    assert load_config(scenario=scenario).to_ini() == cfg.to_ini()


def test_run_writes_artifacts(tmp_path, capsys):
    code = cli.main(["run", "--scenario", "wc-weak", "--out", str(tmp_path), "--t-end", "1"])
    assert code == 0
    report = read_report(tmp_path)
    assert report["status"] == "pass" and report["schema_version"] == 1
    for name in report["artifacts"]:
        assert (tmp_path / name).exists()
    with open(tmp_path / "timeseries.csv") as fh:
        header = next(csv.reader(fh))
    assert header[0] == "t" and "e" in header
    assert "PASS" in capsys.readouterr().out
    resolved = load_config(tmp_path / "config.ini", "wc-weak")
    assert resolved.get_float("integrator", "t_end") == 1.0


def test_config_file_and_overrides_layer(tmp_path):
    ini = tmp_path / "my.ini"
    ini.write_text("[scenario]\nname = wc-weak\n[gains]\nlambda = 3.0  # faster\n")
    cfg = load_config(ini, None, [("initial.e0", "0.2")])
    assert cfg.get_float("gains", "lambda") == 3.0
    assert cfg.get_float("initial", "e0") == 0.2
    cfg = load_config(ini, None, [("gains.lambda", "4")])
    assert cfg.get_float("gains", "lambda") == 4.0


@pytest.mark.parametrize("override", ["gains.lamda=2", "nosuch.key=1", "gains=2"])
def test_unknown_keys_exit_1(tmp_path, override, capsys):
    code = cli.main(["run", "--scenario", "wc-weak", "--out", str(tmp_path), "--set", override])
    assert code == 1
    assert "invalid configuration" in capsys.readouterr().err


def test_scenario_mismatch_is_rejected(tmp_path):
    ini = tmp_path / "my.ini"
    ini.write_text("[scenario]\nname = arm\n")
    with pytest.raises(ConfigurationError):
        load_config(ini, "wc-weak")


def test_family_change_drops_old_parameters():
    cfg = load_config(scenario="wc-weak")
    cfg = cfg.override("model.F.beta", "2.0")
    assert cfg.has("model", "F.beta")
    cfg = cfg.override("model.F", "Tanh")
    assert not any(k.startswith("F.") for k in cfg.sections["model"])


def test_negative_lambda_exits_1(tmp_path):
    assert cli.main(["run", "--scenario", "wc-weak", "--out", str(tmp_path),
                     "--lambda", "-1"]) == 1
    assert read_report(tmp_path)["status"] == "invalid"


def test_argparse_errors_exit_1():
    with pytest.raises(SystemExit) as info:
        cli.main(["run", "--scenario", "no-such-scenario"])
    assert info.value.code == 1


def test_runtime_failure_exits_2_with_partial_series(tmp_path):
    # a reference the logistic cannot reach fails during integration
    code = cli.main(["run", "--scenario", "wc-weak", "--out", str(tmp_path), "--no-svg",
                     "--set", "reference.offset=0.5", "--set", "reference.amps=0.45",
                     "--lambda", "20", "--e0", "0.3"])
    report = read_report(tmp_path)
    assert code == 2
    assert report["status"] == "error"
    assert report["error"]["type"] == "DomainError"
    assert (tmp_path / "partial_timeseries.csv").exists()


def test_fixed_step_runs_are_byte_identical(tmp_path):
    for d in ("a", "b"):
        cli.main(["run", "--scenario", "jansen-rit", "--out", str(tmp_path / d),
                  "--fixed-step", "--seed", "7", "--no-svg", "--t-end", "1"])
    a = (tmp_path / "a" / "timeseries.csv").read_bytes()
    assert a == (tmp_path / "b" / "timeseries.csv").read_bytes()


def test_sweep_writes_aggregate(tmp_path):
    code = cli.main(["sweep", "--scenario", "wc-weak", "--out", str(tmp_path), "--no-svg",
                     "--param", "gains.lambda", "--values", "1,2"])
    assert code == 0
    with open(tmp_path / "aggregate.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert [r["value"] for r in rows] == ["1", "2"]
    assert all(r["status"] == "pass" for r in rows)
    assert (tmp_path / "gains.lambda=2" / "report.json").exists()


def test_sweep_rejects_unknown_param(tmp_path):
    assert cli.main(["sweep", "--scenario", "wc-weak", "--out", str(tmp_path),
                     "--param", "gains.nope", "--values", "1"]) == 1


def test_defaults_and_config_are_exclusive(tmp_path):
    ini = tmp_path / "x.ini"
    ini.write_text("[scenario]\nname = wc-weak\n")
    assert cli.main(["run", "--defaults", "--config", str(ini), "--out", str(tmp_path)]) == 1
