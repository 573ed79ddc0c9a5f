"""Command-line interface: outputs, exit codes, determinism."""

import numpy as np
import pytest

from statehelper import parse_scheme, serialize_game, serialize_scheme
from statehelper.cli import main

from conftest import (
    make_degenerate_game,
    make_erasure_game,
    make_fig1_game,
    make_optimal_erasure_scheme,
)


@pytest.fixture
def erasure_file(tmp_path):
    path = tmp_path / "erasure.game"
    path.write_text(serialize_game(make_erasure_game()))
    return str(path)


@pytest.fixture
def scheme_file(tmp_path):
    path = tmp_path / "optimal.scheme"
    path.write_text(serialize_scheme(make_optimal_erasure_scheme()))
    return str(path)


@pytest.fixture
def degenerate_file(tmp_path):
    path = tmp_path / "degenerate.game"
    path.write_text(serialize_game(make_degenerate_game()))
    return str(path)


def _line_value(output, key):
    for line in output.splitlines():
        if line.startswith(key + ":"):
            return float(line.split(":", 1)[1])
    raise AssertionError(f"no line {key!r} in output:\n{output}")


def test_value_blind(erasure_file, capsys):
    assert main(["value", erasure_file]) == 0
    out = capsys.readouterr().out
    assert abs(_line_value(out, "value") - 0.5) < 1e-9


def test_value_information_structures(erasure_file, capsys):
    cases = [
        (["--a-info", "state", "--b-info", "state"], 0.75),
        (["--a-info", "state"], 1.5),
        (["--b-info", "state"], 0.0),
        (["--a-info", "signal:0:0,1:1", "--b-info", "signal:0:0,1:0"], 1.5),
    ]
    for flags, expected in cases:
        assert main(["value", erasure_file] + flags) == 0
        out = capsys.readouterr().out
        assert abs(_line_value(out, "value") - expected) < 1e-9


def test_value_fig1(tmp_path, capsys):
    path = tmp_path / "fig1.game"
    path.write_text(serialize_game(make_fig1_game()))
    assert main(["value", str(path)]) == 0
    out = capsys.readouterr().out
    assert abs(_line_value(out, "value") - 0.75) < 1e-9
    assert "strategy_A" in out


def test_value_rejects_bad_signal_spec(erasure_file, capsys):
    assert main(["value", erasure_file, "--a-info", "signal:0:0"]) == 2
    assert "misses states" in capsys.readouterr().err


def test_bound_scheme_report(erasure_file, scheme_file, capsys):
    assert main(["bound", erasure_file, "--rate", "0.655639",
                 "--b-knows-state", "--scheme", scheme_file]) == 0
    out = capsys.readouterr().out
    assert abs(_line_value(out, "payoff") - 0.5) < 1e-6
    assert abs(_line_value(out, "alpha") - 0.5) < 1e-5
    for key in ("i_us", "i_usa", "i_ua_given_s", "pi_low", "pi_low_s",
                "pi_low_u", "pi_low_su"):
        _line_value(out, key)


def test_bound_infeasible_rate_exit_code(erasure_file, scheme_file, capsys):
    assert main(["bound", erasure_file, "--rate", "0.1",
                 "--scheme", scheme_file]) == 3
    assert "below I(U;S)" in capsys.readouterr().err


def test_bound_optimize_emits_scheme(degenerate_file, tmp_path, capsys):
    out_path = tmp_path / "best.scheme"
    assert main(["bound", degenerate_file, "--rate", "0.5", "--optimize",
                 "--card-u", "2", "--out", str(out_path)]) == 0
    out = capsys.readouterr().out
    assert _line_value(out, "payoff") >= -0.12
    scheme = parse_scheme(out_path.read_text())
    assert scheme.card_u == 2


def test_sweep_csv_monotone(erasure_file, scheme_file, capsys):
    assert main(["sweep", erasure_file, "--rates", "0.5:0.81:0.05",
                 "--b-knows-state", "--scheme", scheme_file]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "rate,payoff,alpha"
    rows = [tuple(float(x) for x in line.split(",")) for line in lines[1:]]
    assert len(rows) == 7
    payoffs = [r[1] for r in rows]
    assert payoffs == sorted(payoffs)
    assert abs(payoffs[0] - 0.25) < 1e-9


def test_sweep_empty_range_header_only(erasure_file, scheme_file, capsys):
    assert main(["sweep", erasure_file, "--rates", "0.9:0.5:0.1",
                 "--scheme", scheme_file]) == 0
    assert capsys.readouterr().out == "rate,payoff,alpha\n"


def test_sweep_bad_rates_spec(erasure_file, scheme_file, capsys):
    assert main(["sweep", erasure_file, "--rates", "0.5,0.9",
                 "--scheme", scheme_file]) == 2


def test_simulate_csv_deterministic(erasure_file, scheme_file, capsys):
    argv = ["simulate", erasure_file, scheme_file, "--rate", "0.7",
            "--n", "12", "--trials", "3", "--seed", "5"]
    assert main(argv) == 0
    first = capsys.readouterr().out
    assert main(argv) == 0
    second = capsys.readouterr().out
    assert first == second
    lines = first.strip().splitlines()
    assert lines[0] == "k,mean_payoff_at_k,decode_success_at_k"
    assert len(lines) == 13


def test_simulate_out_file(erasure_file, scheme_file, tmp_path, capsys):
    out_path = tmp_path / "match.csv"
    assert main(["simulate", erasure_file, scheme_file, "--rate", "0.7",
                 "--n", "10", "--trials", "2", "--out", str(out_path)]) == 0
    text = out_path.read_text()
    assert text.startswith("k,mean_payoff_at_k,decode_success_at_k\n")
    assert len(text.strip().splitlines()) == 11


def test_common_info_joint_file(tmp_path, capsys):
    path = tmp_path / "joint.yaml"
    path.write_text("joint:\n  - [0.5, 0.0]\n  - [0.0, 0.5]\n")
    assert main(["common-info", str(path), "--card-u", "2",
                 "--restarts", "12"]) == 0
    out = capsys.readouterr().out
    assert abs(_line_value(out, "common_information") - 1.0) < 1e-6
    assert "p_s_given_u" in out


def test_common_info_game_plus_scheme(erasure_file, scheme_file, capsys):
    assert main(["common-info", erasure_file, "--scheme", scheme_file,
                 "--card-u", "3", "--restarts", "30"]) == 0
    out = capsys.readouterr().out
    value = _line_value(out, "common_information")
    assert 0.25 - 1e-9 <= value <= 1.0 + 1e-9


def test_missing_file_exit_code(capsys):
    assert main(["value", "/nonexistent/game.yaml"]) == 2


def test_invalid_yaml_exit_code(tmp_path, capsys):
    path = tmp_path / "broken.game"
    path.write_text("states: [unclosed\n")
    assert main(["value", str(path)]) == 2
    assert "error:" in capsys.readouterr().err


def test_capacity_exit_code(tmp_path, capsys):
    # 4^12 x 4^12 expanded strategies blow the matrix cap
    rng = np.random.default_rng(0)
    from conftest import random_game
    game = random_game(rng, n_states=12, n_actions_a=4, n_actions_b=4)
    path = tmp_path / "big.game"
    path.write_text(serialize_game(game))
    assert main(["value", str(path), "--a-info", "state",
                 "--b-info", "state"]) == 4
    assert "capacity:" in capsys.readouterr().err


def test_unknown_subcommand_exit_code(capsys):
    assert main(["frobnicate"]) == 2
