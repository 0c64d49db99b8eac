import json

import numpy as np
import pytest

from mmdmiss.cli import main
from mmdmiss.data import load_csv


@pytest.fixture
def table_config(tmp_path):
    cfg = {
        "n": 100,
        "d": 10,
        "theta_star": 0.0,
        "seed": 21,
        "replications": 3,
        "estimators": ["mle", "median"],
        "mechanism": {
            "kind": "blockwise_huber_selfcensoring",
            "epsilon": 0.2,
            "alphas": [0.25, 0.25, 0.25, 0.25],
        },
        "scenarios": [
            {"name": "clean", "contamination": {"kind": "none"}},
        ],
    }
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    return path


def test_fit_command(tmp_path):
    rng = np.random.default_rng(0)
    data = tmp_path / "data.csv"
    lines = []
    for row in rng.standard_normal((80, 2)) + 1.0:
        lines.append(f"{row[0]},{row[1]}")
    lines[3] = lines[3].split(",")[0] + ",NA"
    data.write_text("\n".join(lines) + "\n")
    out = tmp_path / "fit.json"
    code = main(
        [
            "fit",
            "--input", str(data),
            "--steps", "200",
            "--seed", "3",
            "--output", str(out),
        ]
    )
    assert code == 0
    payload = json.loads(out.read_text())
    assert len(payload["theta_hat"]) == 2
    assert abs(payload["theta_hat"][0] - 1.0) < 0.6
    assert payload["bandwidth_used"] > 0
    assert payload["n_observations"] == 80


def test_fit_command_fixed_bandwidth_and_init(tmp_path, capsys):
    data = tmp_path / "d.csv"
    data.write_text("0.0\n1.0\n2.0\n")
    code = main(
        ["fit", "--input", str(data), "--steps", "50", "--bandwidth", "1.5",
         "--init", "0.5", "--samples", "16"]
    )
    assert code == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["bandwidth_used"] == 1.5


def test_fit_command_bad_bandwidth(tmp_path):
    data = tmp_path / "d.csv"
    data.write_text("0.0\n1.0\n")
    assert main(["fit", "--input", str(data), "--bandwidth", "huge"]) == 1


def test_fit_command_missing_file(tmp_path):
    assert main(["fit", "--input", str(tmp_path / "none.csv")]) == 1


def test_fit_command_empty_rows_flag(tmp_path, capsys):
    data = tmp_path / "d.csv"
    data.write_text("1.0,2.0\nNA,NA\n0.0,1.0\n4.0,2.0\n")
    assert main(["fit", "--input", str(data), "--steps", "20"]) == 1
    code = main(
        ["fit", "--input", str(data), "--steps", "20", "--drop-empty-rows"]
    )
    assert code == 0
    assert "dropped 1" in capsys.readouterr().err


def test_table_command_and_worker_determinism(table_config, tmp_path):
    out1 = tmp_path / "o1"
    out2 = tmp_path / "o2"
    assert main(["table", "--config", str(table_config), "--out-dir", str(out1),
                 "--workers", "1"]) == 0
    assert main(["table", "--config", str(table_config), "--out-dir", str(out2),
                 "--workers", "2"]) == 0
    assert (out1 / "table.csv").read_bytes() == (out2 / "table.csv").read_bytes()


def test_table_command_config_errors(tmp_path):
    missing = tmp_path / "missing.json"
    assert main(["table", "--config", str(missing), "--out-dir", str(tmp_path)]) == 1
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"n": 5}))
    assert main(["table", "--config", str(bad), "--out-dir", str(tmp_path)]) == 1


def test_figure1_command(tmp_path):
    out = tmp_path / "fig"
    code = main(
        ["figure1", "--n-grid", "100,200", "--replications", "3",
         "--out-dir", str(out), "--seed", "5", "--steps", "60"]
    )
    assert code == 0
    lines = (out / "figure1.csv").read_text().strip().splitlines()
    assert lines[0] == "mechanism,estimator,n,q25,median,q75"
    assert len(lines) == 1 + 2 * 3 * 2


def test_check_bounds_command(tmp_path):
    out = tmp_path / "bounds"
    code = main(
        ["check-bounds", "--scenario-set", "truncation-mle-limit",
         "--out-dir", str(out), "--replications", "3"]
    )
    assert code == 0
    assert (out / "bounds.csv").exists()


def test_check_bounds_unknown_scenario(tmp_path):
    code = main(
        ["check-bounds", "--scenario-set", "bogus", "--out-dir", str(tmp_path)]
    )
    assert code == 1


def test_simulate_command(table_config, tmp_path):
    out = tmp_path / "sim.csv"
    code = main(
        ["simulate", "--config", str(table_config), "--scenario", "clean",
         "--output", str(out), "--n", "50", "--seed", "2"]
    )
    assert code == 0
    ds = load_csv(out)
    assert ds.d == 10 and len(ds) == 50


def test_usage_errors_exit_code():
    assert main(["unknown-command"]) == 1
    assert main(["table"]) == 1  # missing required flags


def test_table_command_numerical_failure_exit_code(tmp_path):
    # the midrange estimator is undefined at d=10, so every replicate and
    # hence every cell fails: that is a runtime numerical failure (exit 2)
    cfg = {
        "n": 30,
        "d": 10,
        "seed": 3,
        "replications": 2,
        "estimators": ["extremes"],
        "mechanism": {"kind": "blockwise_mcar", "alphas": [0.25, 0.25, 0.25, 0.25]},
        "scenarios": [{"name": "clean", "contamination": {"kind": "none"}}],
    }
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    assert main(["table", "--config", str(path), "--out-dir", str(tmp_path / "o")]) == 2


def test_check_bounds_violation_exit_code(tmp_path, monkeypatch):
    import mmdmiss.cli as cli
    from mmdmiss.experiments import BoundCheck, BoundReport

    def fake_check_bounds(**kwargs):
        return BoundReport(
            checks=[
                BoundCheck(
                    name="synthetic", params={}, lhs=2.0, rhs=1.0, slack=1.2,
                    passed=False,
                )
            ],
            metadata={},
        )

    monkeypatch.setattr(cli, "check_bounds", fake_check_bounds)
    code = main(["check-bounds", "--scenario-set", "default",
                 "--out-dir", str(tmp_path)])
    assert code == 3
