import csv
import json
from pathlib import Path

import pytest
import yaml

from attnmarket.cli import main

SCHEMAS = {
    "profile.csv": ["state_id", "revealed_set", "realization", "sender", "rate"],
    "payoffs.csv": ["quantity", "sender", "value"],
    "prices.csv": ["sender", "price"],
    "episodes.csv": None,   # episode, rounds, cost, action, payoff, visits_*
    "summary.csv": ["quantity", "sender", "theory", "empirical", "stderr"],
    "gaussian_rates.csv": ["sender", "precision", "rate", "expected_visits"],
    "gaussian_payoffs.csv": ["quantity", "value"],
    "correlation.csv": ["pc", "threshold", "payoff_independent",
                        "payoff_correlated", "prefers_correlation"],
    "large_n.csv": ["n", "mse_term", "attention_cost", "total"],
    "large_market.csv": ["n", "residual_value", "scaled_residual",
                         "decision_error", "mode"],
    "trace.csv": ["episode", "round", "offers", "choice", "message",
                  "state_id"],
    "alpha.csv": ["pc", "threshold", "payoff_independent",
                  "payoff_correlated", "prefers_correlation"],
    "symmetry.csv": ["allocation", "payoff", "is_best", "is_symmetric"],
    "bridge.csv": ["t", "posterior_variance"],
}


def check_schema(path: Path):
    with open(path) as fh:
        rows = list(csv.reader(fh))
    assert rows, f"{path} is empty"
    header = rows[0]
    expected = SCHEMAS.get(path.name)
    if expected is not None:
        assert header == expected, f"{path.name} header {header}"
    elif path.name == "episodes.csv":
        assert header[:5] == ["episode", "rounds", "cost", "action", "payoff"]
        assert all(c.startswith("visits_") for c in header[5:])
    for row in rows[1:]:
        assert len(row) == len(header)
    return rows


def run(args):
    return main(args)


# -- check ------------------------------------------------------------------------

def test_check_passes_pair_guess(scenario_dir, capsys):
    code = run(["check", "--scenario", str(scenario_dir / "pair_guess.yaml")])
    out = capsys.readouterr().out
    assert code == 0
    assert "assumption2" in out and "substitutes" in out


def test_check_fails_coin_match(scenario_dir, capsys):
    code = run(["check", "--scenario", str(scenario_dir / "coin_match.yaml")])
    assert code == 2
    out = capsys.readouterr().out
    assert "False" in out


def test_check_writes_report(scenario_dir, tmp_path):
    run(["check", "--scenario", str(scenario_dir / "pair_guess.yaml"),
         "--out", str(tmp_path)])
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["command"] == "check"
    assert report["conditions"]["substitutes"]["holds"] is True


def test_check_rejects_gaussian_scenario(scenario_dir, capsys):
    code = run(["check", "--scenario",
                str(scenario_dir / "gaussian_symmetric.yaml")])
    assert code == 1


# -- scenario validation ------------------------------------------------------------

def write_scenario(tmp_path, mutate):
    base = {
        "schema_version": 1,
        "name": "bad",
        "cost": 0.1,
        "components": {"senders": [["H", "T"]]},
        "prior": {"product": {"state": [1.0],
                              "conditionals": [[[0.5, 0.5]]]}},
        "decision": {"actions": ["a"],
                     "utility": {"by_joint": {"a": [0.0, 1.0]}}},
    }
    mutate(base)
    path = tmp_path / "scenario.yaml"
    path.write_text(yaml.safe_dump(base))
    return str(path)


def test_malformed_prior_row_names_the_row(tmp_path, capsys):
    def mutate(base):
        base["prior"]["product"]["conditionals"] = [[[0.5, 0.4]]]
    code = run(["check", "--scenario", write_scenario(tmp_path, mutate)])
    assert code == 1
    err = capsys.readouterr().err
    assert "conditionals[0] row 0" in err and "0.9" in err


def test_missing_block(tmp_path, capsys):
    def mutate(base):
        del base["decision"]
    assert run(["check", "--scenario",
                write_scenario(tmp_path, mutate)]) == 1
    assert "decision" in capsys.readouterr().err


def test_both_blocks_rejected(tmp_path, capsys):
    def mutate(base):
        base["gaussian"] = {"p0": 1.0, "p": [1.0]}
    assert run(["check", "--scenario",
                write_scenario(tmp_path, mutate)]) == 1


def test_schema_version_enforced(tmp_path, capsys):
    def mutate(base):
        base["schema_version"] = 99
    assert run(["check", "--scenario",
                write_scenario(tmp_path, mutate)]) == 1
    assert "schema_version" in capsys.readouterr().err


def test_missing_file(capsys):
    assert run(["check", "--scenario", "/nonexistent.yaml"]) == 1


def test_utility_size_mismatch(tmp_path, capsys):
    def mutate(base):
        base["decision"]["utility"]["by_joint"]["a"] = [0.0, 1.0, 2.0]
    assert run(["check", "--scenario",
                write_scenario(tmp_path, mutate)]) == 1
    assert "expected 2" in capsys.readouterr().err


# -- solve ------------------------------------------------------------------------

def test_solve_pair_guess(scenario_dir, tmp_path, capsys):
    code = run(["solve", "--scenario", str(scenario_dir / "pair_guess.yaml"),
                "--out", str(tmp_path)])
    assert code == 0
    rows = check_schema(tmp_path / "profile.csv")
    rates = {float(r[4]) for r in rows[1:]}
    assert all(abs(r - 1 / 3) < 1e-9 for r in rates)
    payoff_rows = check_schema(tmp_path / "payoffs.csv")
    values = {(r[0], r[1]): float(r[2]) for r in payoff_rows[1:]}
    assert values[("expected_visits", "1")] == pytest.approx(3.0)
    assert values[("receiver_payoff", "")] == pytest.approx(1.4)
    check_schema(tmp_path / "prices.csv")


def test_solve_gated_without_force(scenario_dir, tmp_path):
    code = run(["solve", "--scenario", str(scenario_dir / "coin_match.yaml"),
                "--out", str(tmp_path)])
    assert code == 2


def test_solve_forced(scenario_dir, tmp_path):
    code = run(["solve", "--scenario", str(scenario_dir / "coin_match.yaml"),
                "--out", str(tmp_path), "--force"])
    assert code == 0
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["summary"]["equilibrium"] is False


def test_solve_gaussian(scenario_dir, tmp_path):
    code = run(["solve", "--scenario",
                str(scenario_dir / "gaussian_symmetric.yaml"),
                "--out", str(tmp_path)])
    assert code == 0
    rows = check_schema(tmp_path / "gaussian_rates.csv")
    assert float(rows[1][2]) == pytest.approx(0.06)
    payoffs = check_schema(tmp_path / "gaussian_payoffs.csv")
    values = {r[0]: float(r[1]) for r in payoffs[1:]}
    assert values["receiver_payoff"] == pytest.approx(-2 / 3)


def test_solve_gaussian_correlated(scenario_dir, tmp_path):
    run(["solve", "--scenario",
         str(scenario_dir / "gaussian_correlated.yaml"),
         "--out", str(tmp_path)])
    rows = check_schema(tmp_path / "correlation.csv")
    assert float(rows[1][1]) == pytest.approx(0.5)
    assert rows[1][4] == "1"


# -- simulate ----------------------------------------------------------------------

def test_simulate_deterministic_bytes(scenario_dir, tmp_path):
    args = ["simulate", "--scenario", str(scenario_dir / "pair_guess.yaml"),
            "--replications", "400", "--seed", "7"]
    out_a, out_b = tmp_path / "a", tmp_path / "b"
    assert run(args + ["--out", str(out_a)]) == 0
    assert run(args + ["--out", str(out_b)]) == 0
    for name in ("episodes.csv", "summary.csv", "report.json"):
        assert (out_a / name).read_bytes() == (out_b / name).read_bytes()
    check_schema(out_a / "episodes.csv")
    check_schema(out_a / "summary.csv")


def test_simulate_seed_changes_episodes(scenario_dir, tmp_path):
    base = ["simulate", "--scenario", str(scenario_dir / "pair_guess.yaml"),
            "--replications", "200"]
    out_a, out_b = tmp_path / "a", tmp_path / "b"
    run(base + ["--seed", "1", "--out", str(out_a)])
    run(base + ["--seed", "2", "--out", str(out_b)])
    assert (out_a / "episodes.csv").read_bytes() != \
        (out_b / "episodes.csv").read_bytes()


def test_simulate_receiver_orders(scenario_dir, tmp_path):
    for order in ("lowest", "random", "perm:2,1"):
        out = tmp_path / order.replace(":", "_").replace(",", "_")
        code = run(["simulate", "--scenario",
                    str(scenario_dir / "pair_guess.yaml"),
                    "--replications", "200", "--seed", "3",
                    "--receiver-order", order, "--out", str(out)])
        assert code == 0


def test_simulate_bad_order(scenario_dir, tmp_path, capsys):
    code = run(["simulate", "--scenario",
                str(scenario_dir / "pair_guess.yaml"),
                "--replications", "10", "--receiver-order", "perm:1,3",
                "--out", str(tmp_path)])
    assert code == 1


def test_simulate_gated(scenario_dir, tmp_path):
    code = run(["simulate", "--scenario",
                str(scenario_dir / "coin_match.yaml"),
                "--replications", "10", "--out", str(tmp_path)])
    assert code == 2


def test_simulate_uses_scenario_defaults(scenario_dir, tmp_path):
    # three_action_signals.yaml carries replications/seed in the file
    code = run(["simulate", "--scenario",
                str(scenario_dir / "three_action_signals.yaml"),
                "--replications", "300", "--out", str(tmp_path)])
    assert code == 0
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["summary"]["seed"] == 11


# -- sweep -------------------------------------------------------------------------

def test_simulate_round_trace(scenario_dir, tmp_path):
    code = run(["simulate", "--scenario", str(scenario_dir / "pair_guess.yaml"),
                "--replications", "50", "--seed", "3", "--trace-episodes", "5",
                "--out", str(tmp_path)])
    assert code == 0
    rows = check_schema(tmp_path / "trace.csv")
    episodes = {int(r[0]) for r in rows[1:]}
    assert episodes == set(range(5))
    # per-round bookkeeping: round indices count up within an episode
    first = [r for r in rows[1:] if r[0] == "0"]
    assert [int(r[1]) for r in first] == list(range(len(first)))
    # tracing must not change the replication outcomes
    plain = tmp_path / "plain"
    run(["simulate", "--scenario", str(scenario_dir / "pair_guess.yaml"),
         "--replications", "50", "--seed", "3", "--out", str(plain)])
    assert (tmp_path / "episodes.csv").read_bytes() == \
        (plain / "episodes.csv").read_bytes()


def test_sweep_large_n_finite(tmp_path):
    code = run(["sweep", "--sweep-kind", "large-n", "--finite",
                "--n-max", "40", "--out", str(tmp_path)])
    assert code == 0
    rows = check_schema(tmp_path / "large_market.csv")
    assert float(rows[1][1]) == pytest.approx(0.05)  # first-signal value
    assert float(rows[1][3]) == pytest.approx(0.4)
    report = json.loads((tmp_path / "report.json").read_text())
    assert 0 < report["summary"]["fit"]["rho"] < 1


def test_sweep_large_n(tmp_path):
    code = run(["sweep", "--sweep-kind", "large-n", "--p0", "1",
                "--precision", "1", "--cost", "0.01", "--n-max", "9",
                "--out", str(tmp_path)])
    assert code == 0
    rows = check_schema(tmp_path / "large_n.csv")
    assert float(rows[-1][2]) == pytest.approx(0.1)


def test_sweep_alpha(tmp_path):
    code = run(["sweep", "--sweep-kind", "alpha", "--p0", "1", "--p1", "1",
                "--p2", "1", "--pc", "0.4", "--pc", "0.6",
                "--out", str(tmp_path)])
    assert code == 0
    rows = check_schema(tmp_path / "alpha.csv")
    assert rows[1][4] == "0" and rows[2][4] == "1"


def test_sweep_symmetry(tmp_path):
    code = run(["sweep", "--sweep-kind", "symmetry", "--p0", "1",
                "--total-precision", "2", "--senders", "2",
                "--grid-step", "0.25", "--cost", "0.01",
                "--out", str(tmp_path)])
    assert code == 0
    rows = check_schema(tmp_path / "symmetry.csv")
    best = [r for r in rows[1:] if r[2] == "1"]
    assert len(best) == 1 and best[0][0] == "1.0|1.0"


def test_sweep_bridge(tmp_path):
    code = run(["sweep", "--sweep-kind", "bridge", "--precision", "1",
                "--cost", "0.1", "--out", str(tmp_path)])
    assert code == 0
    rows = check_schema(tmp_path / "bridge.csv")
    assert (float(rows[-1][0]), float(rows[-1][1])) == (10.0, 0.0)


def test_sweep_bridge_with_mc(tmp_path):
    code = run(["sweep", "--sweep-kind", "bridge", "--precision", "1",
                "--cost", "0.1", "--mc-samples", "2000", "--seed", "3",
                "--out", str(tmp_path)])
    assert code == 0
    with open(tmp_path / "bridge.csv") as fh:
        header = fh.readline().strip().split(",")
    assert header == ["t", "posterior_variance", "empirical_mse", "stderr"]


def test_out_dir_env_var(scenario_dir, tmp_path, monkeypatch):
    target = tmp_path / "envout"
    monkeypatch.setenv("ATTNMARKET_OUT", str(target))
    code = run(["solve", "--scenario",
                str(scenario_dir / "gaussian_symmetric.yaml")])
    assert code == 0
    assert (target / "gaussian_rates.csv").exists()
