import json

import numpy as np
import pytest

from qite import cli
from qite.config import (ConfigError, config_from_dict, load_hamiltonian,
                         validate_config)
from qite.pauli import build_heisenberg, normalize


def write_cfg(tmp_path, payload, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(payload))
    return p


def test_minimal_config_defaults(tmp_path):
    cfg = validate_config(write_cfg(tmp_path, {
        "experiment": "lambda_sweep", "seed": 3,
    }))
    assert cfg.tau == 20.0 and cfg.alpha == 0.85
    assert cfg.shots == 10**6 and cfg.hamiltonian == "heisenberg4"


def test_missing_seed_rejected(tmp_path):
    with pytest.raises(ConfigError, match="seed"):
        validate_config(write_cfg(tmp_path, {"experiment": "tau_sweep"}))


def test_unknown_key_rejected(tmp_path):
    with pytest.raises(ConfigError, match="unknown key"):
        validate_config(write_cfg(tmp_path, {
            "experiment": "tau_sweep", "seed": 1, "taus": [10],
        }))


def test_inadmissible_alpha_rejected():
    with pytest.raises(ConfigError, match="alpha"):
        config_from_dict({"experiment": "tau_sweep", "seed": 1, "alpha": 0.3})


def test_field_level_messages():
    for payload, field in (
        ({"experiment": "warp", "seed": 1}, "experiment"),
        ({"experiment": "tau_sweep", "seed": 1, "B": -1}, "B"),
        ({"experiment": "tau_sweep", "seed": 1, "mode": "tree"}, "mode"),
        ({"experiment": "tau_sweep", "seed": 1.5}, "seed"),
    ):
        with pytest.raises(ConfigError) as err:
            config_from_dict(payload)
        assert err.value.field_name == field


def test_bad_json_rejected(tmp_path):
    p = tmp_path / "broken.json"
    p.write_text("{nope")
    with pytest.raises(ConfigError, match="JSON"):
        validate_config(p)


def test_load_hamiltonian_roundtrip(tmp_path):
    h = normalize(build_heisenberg(4))
    p = tmp_path / "h.json"
    p.write_text(h.to_json())
    assert load_hamiltonian(str(p)) == h
    assert load_hamiltonian("heisenberg4") == h


def test_flags_override_config(tmp_path):
    cfg_path = write_cfg(tmp_path, {
        "experiment": "tau_sweep", "seed": 1, "shots": 5,
    })
    args = cli.build_parser().parse_args([
        "--config", str(cfg_path), "--shots", "77", "--seed", "9",
        "--out", "x.csv",
    ])
    cfg = cli.config_from_args(args)
    assert cfg.shots == 77 and cfg.seed == 9 and cfg.output == "x.csv"
    paper = cli.build_parser().parse_args([
        "--config", str(cfg_path), "--paper-shots",
    ])
    assert cli.config_from_args(paper).shots == 10**9


def test_cli_trotter_diag(tmp_path, capsys):
    out = tmp_path / "trot.csv"
    code = cli.main(["trotter_diag", "--seed", "1", "--out", str(out)])
    assert code == 0
    assert "PASS measured_error_within_bound" in capsys.readouterr().out
    lines = out.read_text().splitlines()
    assert lines[0].startswith("# manifest-sha256: ")
    assert lines[1] == "n_steps,measured_error,error_bound"
    assert len(lines) == 2 + 5
    manifest = json.loads((tmp_path / "trot.csv.manifest.json").read_text())
    assert manifest["config_sha256"] == lines[0].split(": ")[1]
    assert manifest["results"]["checks"]["measured_error_within_bound"]


def test_cli_seventeen_digit_roundtrip(tmp_path):
    out = tmp_path / "apx.csv"
    assert cli.main(["approx_diag", "--seed", "1", "--out", str(out)]) == 0
    rows = out.read_text().splitlines()[2:]
    values = [float(r.split(",")[1]) for r in rows[:10]]
    rendered = [cli._fmt(v) for v in values]
    assert [float(s) for s in rendered] == values  # exact round-trip


def test_cli_rerun_byte_identical(tmp_path):
    out = tmp_path / "gse.csv"
    argv = ["ground_search", "--seed", "5", "--exact-loss", "--out", str(out)]
    assert cli.main(argv) == 0
    first = out.read_bytes()
    assert cli.main(argv) == 0
    assert out.read_bytes() == first


def test_cli_ground_search_exact_window(tmp_path):
    out = tmp_path / "gse.csv"
    code = cli.main(["ground_search", "--seed", "5", "--exact-loss",
                     "--out", str(out)])
    assert code == 0
    manifest = json.loads((tmp_path / "gse.csv.manifest.json").read_text())
    final = manifest["results"]["final"]
    lam0 = abs(manifest["results"]["ground_energy"])
    assert lam0 <= final["lambda"] <= lam0 + 1.0 / final["tau"]
    header = out.read_text().splitlines()[1].split(",")
    assert header[:6] == ["i", "tau", "lambda_l", "lambda_r", "r", "branch"]


def test_cli_config_error_exit_code(tmp_path, capsys):
    code = cli.main(["--config", str(write_cfg(tmp_path, {"seed": 1}))])
    assert code == 2
    assert "experiment" in capsys.readouterr().err
