import copy
import json
import os

import numpy as np
import pytest
import yaml

from actinf import ConfigError
from actinf.cli import main as cli_main
from actinf.config import build_config, load_config, load_mapping
from actinf.runner import compare_modes, run_experiment

CONFIG_DIR = os.path.join(os.path.dirname(__file__), os.pardir, "configs")
BANDIT = os.path.join(CONFIG_DIR, "bandit.yaml")
CHAIN = os.path.join(CONFIG_DIR, "noisy_chain.yaml")


def bandit_mapping():
    return load_mapping(BANDIT)


def test_load_config_reads_everything():
    cfg = load_config(BANDIT)
    assert cfg.mode == "active-inference"
    assert cfg.gamma == 10.0
    assert cfg.steps == 2
    assert cfg.seed == 7
    assert cfg.enable_exact_oracle is True
    assert cfg.motivation_name == "expected-reward"
    assert cfg.model.horizon.mode == "rolling"
    assert cfg.environment.reward_values == (0.0, 1.0)


def test_overrides_win_and_land_in_manifest():
    cfg = load_config(BANDIT, overrides={"seed": 99, "gamma": 3.5, "mode": "exact-induced"})
    assert cfg.seed == 99 and cfg.gamma == 3.5 and cfg.mode == "exact-induced"
    assert cfg.resolved["run"]["seed"] == 99
    assert cfg.resolved["agent"]["gamma"] == 3.5
    assert cfg.resolved["agent"]["mode"] == "exact-induced"


def test_manifest_covers_every_runtime_setting():
    cfg = load_config(BANDIT)
    resolved = cfg.resolved
    for section in ("environment", "model", "agent", "run", "output"):
        assert section in resolved
    # defaults must be materialized, not implied
    assert "optimizer" in resolved["agent"]
    assert resolved["run"]["enable_exact_oracle"] is True
    assert resolved["model"]["enum_cap"] > 0


def test_unknown_section_and_key_are_rejected(tmp_path):
    data = bandit_mapping()
    data["mystery"] = {"x": 1}
    with pytest.raises(ConfigError) as exc:
        build_config(data, base_dir=str(tmp_path))
    assert "mystery" in str(exc.value)

    data = bandit_mapping()
    data["agent"]["turbo"] = True
    with pytest.raises(ConfigError) as exc:
        build_config(data, base_dir=str(tmp_path))
    assert "turbo" in str(exc.value)


def test_errors_carry_line_numbers(tmp_path):
    text = open(BANDIT).read().replace("gamma: 10.0", "gamma: -2.0")
    bad = tmp_path / "bad.yaml"
    bad.write_text(text)
    with pytest.raises(ConfigError) as exc:
        load_config(str(bad))
    msg = str(exc.value)
    assert "line" in msg and "gamma" in msg


def test_mismatched_sensor_sizes_name_both_fields(tmp_path):
    data = bandit_mapping()
    data["model"]["sensor_size"] = 3
    with pytest.raises(ConfigError) as exc:
        build_config(data, base_dir=str(tmp_path))
    msg = str(exc.value)
    assert "sensor_size" in msg
    assert "environment" in msg and "model" in msg


def test_bad_mode_and_missing_rewards(tmp_path):
    data = bandit_mapping()
    data["agent"]["mode"] = "psychic"
    with pytest.raises(ConfigError):
        build_config(data, base_dir=str(tmp_path))

    data = bandit_mapping()
    del data["agent"]["rewards"]
    del data["environment"]["reward_values"]
    with pytest.raises(ConfigError) as exc:
        build_config(data, base_dir=str(tmp_path))
    assert "reward" in str(exc.value)


def test_fixed_horizon_bounds_steps(tmp_path):
    data = bandit_mapping()
    data["model"]["horizon"] = {"mode": "fixed", "final_step": 1}
    data["run"]["steps"] = 5
    with pytest.raises(ConfigError) as exc:
        build_config(data, base_dir=str(tmp_path))
    assert "steps" in str(exc.value)


def run_into(tmp_path, name, **overrides):
    overrides.setdefault("out", str(tmp_path / name))
    cfg = load_config(BANDIT, overrides=overrides)
    return run_experiment(cfg)


def test_run_experiment_writes_expected_files(tmp_path):
    result = run_into(tmp_path, "a")
    names = {os.path.basename(p) for p in result.paths.values()}
    assert {"trajectory.jsonl", "diagnostics.jsonl", "manifest.json", "geometry.csv"} <= names
    for p in result.paths.values():
        assert os.path.exists(p)
    assert result.record.steps == 2
    manifest = json.load(open(result.paths["manifest"]))
    assert manifest["run"]["seed"] == 7
    assert "package_version" in manifest


def test_oracle_off_skips_geometry(tmp_path):
    result = run_into(tmp_path, "nogeo", enable_exact_oracle=False)
    assert "geometry" not in result.paths
    assert not os.path.exists(tmp_path / "nogeo" / "geometry.csv")


def test_rerun_from_manifest_is_byte_identical(tmp_path):
    first = run_into(tmp_path, "one")
    manifest_path = first.paths["manifest"]
    manifest = json.load(open(manifest_path))
    manifest.pop("package_version")
    replay_cfg_path = tmp_path / "replay.yaml"
    replay_cfg_path.write_text(yaml.safe_dump(manifest))
    cfg = load_config(str(replay_cfg_path), overrides={"out": str(tmp_path / "two")})
    second = run_experiment(cfg)
    for key in ("trajectory", "diagnostics", "geometry"):
        a = open(first.paths[key], "rb").read()
        b = open(second.paths[key], "rb").read()
        assert a == b, key


def test_exact_mode_leaves_header_only_geometry(tmp_path):
    result = run_into(tmp_path, "exact", mode="exact-induced")
    lines = open(result.paths["geometry"]).read().strip().splitlines()
    assert lines[0] == "step,quantity_name,action_seq,value"
    assert len(lines) == 1


def test_compare_modes_runs_all_modes_on_one_seed(tmp_path):
    cfg = load_config(BANDIT, overrides={"out": str(tmp_path / "cmp")})
    modes = ["exact-induced", "variational-induced", "active-inference"]
    _, path = compare_modes(cfg, modes)
    lines = open(path).read().strip().splitlines()
    assert lines[0] == "step,mode,action,greedy_seq,policy,f_values,d1,d2,total"
    rows = [line.split(",", 2) for line in lines[1:]]
    assert len(rows) == cfg.steps * len(modes)
    # identical seed split: every mode faces the same world
    by_step = {}
    for line in lines[1:]:
        step, mode, rest = line.split(",", 2)
        by_step.setdefault(step, []).append(mode)
    assert all(sorted(ms) == sorted(modes) for ms in by_step.values())


def test_compare_modes_agree_on_deterministic_bandit(tmp_path):
    """All three pipelines should converge on the paying arm."""
    cfg = load_config(BANDIT, overrides={"out": str(tmp_path / "agree"), "steps": 3})
    _, path = compare_modes(cfg, ["exact-induced", "variational-induced", "active-inference"])
    lines = open(path).read().strip().splitlines()[1:]
    for line in lines:
        step, mode, action, greedy = line.split(",")[:4]
        if int(step) >= 1:
            assert greedy == "0", line


def test_one_action_world_gives_identical_actions(tmp_path):
    data = bandit_mapping()
    data["environment"]["action_size"] = 1
    data["environment"]["transition"] = [[[0.0, 1.0], [0.0, 1.0]]]
    data["model"]["theta"]["points"][0]["transition"] = [[[0.0, 1.0], [0.0, 1.0]]]
    cfg = build_config(data, base_dir=CONFIG_DIR,
                       overrides={"out": str(tmp_path / "one_action")})
    _, path = compare_modes(cfg, ["exact-induced", "variational-induced", "active-inference"])
    lines = open(path).read().strip().splitlines()[1:]
    assert all(line.split(",")[2] == "0" for line in lines)


def test_cli_round_trip(tmp_path, capsys):
    out = str(tmp_path / "cli_run")
    code = cli_main(["--config", BANDIT, "--out", out, "--quiet"])
    assert code == 0
    assert os.path.exists(os.path.join(out, "manifest.json"))


def test_cli_flag_overrides_reach_manifest(tmp_path):
    out = str(tmp_path / "cli_override")
    code = cli_main(["--config", BANDIT, "--out", out, "--seed", "123",
                     "--gamma", "0.5", "--quiet"])
    assert code == 0
    manifest = json.load(open(os.path.join(out, "manifest.json")))
    assert manifest["run"]["seed"] == 123
    assert manifest["agent"]["gamma"] == 0.5


def test_cli_compare_flag(tmp_path):
    out = str(tmp_path / "cli_cmp")
    code = cli_main(["--config", BANDIT, "--out", out, "--quiet",
                     "--compare", "exact-induced,active-inference"])
    assert code == 0
    assert os.path.exists(os.path.join(out, "comparison.csv"))


def test_cli_config_errors_exit_2(tmp_path, capsys):
    missing = str(tmp_path / "nope.yaml")
    assert cli_main(["--config", missing]) == 2

    text = open(BANDIT).read().replace("mode: active-inference", "mode: wat")
    bad = tmp_path / "bad.yaml"
    bad.write_text(text)
    assert cli_main(["--config", str(bad), "--quiet"]) == 2
    err = capsys.readouterr().err
    assert "wat" in err


def test_cli_runs_noisy_chain_with_file_model(tmp_path):
    out = str(tmp_path / "chain")
    code = cli_main(["--config", CHAIN, "--out", out, "--steps", "2", "--quiet"])
    assert code == 0
    manifest = json.load(open(os.path.join(out, "manifest.json")))
    assert manifest["run"]["steps"] == 2
