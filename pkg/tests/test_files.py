"""Game and scheme file parsing, serialization, and diagnostics."""

import numpy as np
import pytest

from statehelper import (
    GameFileError,
    LayeredScheme,
    Scheme,
    parse_game,
    parse_scheme,
    serialize_game,
    serialize_scheme,
)

from conftest import make_erasure_game, make_optimal_erasure_scheme

ERASURE_YAML = """
states: ["0", "1"]
prior: [0.5, 0.5]
actions_a: ["0", "e", "1"]
actions_b: ["0", "1"]
payoffs:
  - [[3, 0], [0, 1], ["-inf", "-inf"]]
  - [["-inf", "-inf"], [1, 0], [0, 3]]
"""


def test_parse_game_with_forbidden_entries():
    game = parse_game(ERASURE_YAML)
    reference = make_erasure_game()
    assert game.states == reference.states
    assert np.array_equal(game.payoff, reference.payoff)
    assert game.payoff[2, 0, 0] == -1e6


def test_game_round_trip_is_value_identity():
    game = make_erasure_game()
    again = parse_game(serialize_game(game))
    assert again.states == game.states
    assert again.actions_a == game.actions_a
    assert again.actions_b == game.actions_b
    assert np.array_equal(again.prior, game.prior)
    assert np.array_equal(again.payoff, game.payoff)
    assert again.neg_inf_value == game.neg_inf_value
    # the serialized text writes forbidden entries back as the literal
    assert "-inf" in serialize_game(game)


def test_parse_game_honors_custom_neg_inf_value():
    text = ERASURE_YAML + "neg_inf_value: -999.0\n"
    game = parse_game(text)
    assert game.payoff[2, 0, 0] == -999.0


def test_parse_game_diagnostics_name_the_field():
    with pytest.raises(GameFileError, match="missing required key 'prior'"):
        parse_game("states: [a]\nactions_a: [x]\nactions_b: [y]\npayoffs: []\n")
    bad = ERASURE_YAML.replace("[0, 3]", "[0, oops]")
    with pytest.raises(GameFileError, match=r"payoffs\[1\]\[2\]\[1\]"):
        parse_game(bad)
    with pytest.raises(GameFileError, match="not valid YAML"):
        parse_game("states: [unclosed\n")
    with pytest.raises(GameFileError, match="top level"):
        parse_game("- just\n- a\n- list\n")


def test_parse_game_shape_mismatches():
    with pytest.raises(GameFileError, match="prior has"):
        parse_game(ERASURE_YAML.replace("[0.5, 0.5]", "[1.0]"))
    with pytest.raises(GameFileError, match=r"payoffs\[0\]"):
        parse_game(ERASURE_YAML.replace("[[3, 0], [0, 1], ", "[[3, 0], "))


def test_scheme_round_trip():
    scheme = make_optimal_erasure_scheme()
    again = parse_scheme(serialize_scheme(scheme))
    assert isinstance(again, Scheme)
    assert np.array_equal(again.p_u_given_s.rows, scheme.p_u_given_s.rows)
    assert np.array_equal(again.p_a_given_u.rows, scheme.p_a_given_u.rows)


def test_layered_scheme_detection_and_round_trip():
    text = """
p_u_given_s:
  - [0.8, 0.2]
  - [0.2, 0.8]
p_u2_given_u1_s:
  - [0.9, 0.1]
  - [0.3, 0.7]
  - [0.7, 0.3]
  - [0.1, 0.9]
p_a_given_u1_u2:
  - [1.0, 0.0]
  - [0.5, 0.5]
  - [0.5, 0.5]
  - [0.0, 1.0]
"""
    scheme = parse_scheme(text)
    assert isinstance(scheme, LayeredScheme)
    again = parse_scheme(serialize_scheme(scheme))
    assert isinstance(again, LayeredScheme)
    assert np.array_equal(again.p_u2_given_u1_s.rows, scheme.p_u2_given_u1_s.rows)


def test_parse_scheme_diagnostics():
    with pytest.raises(GameFileError, match="p_a_given_u"):
        parse_scheme("p_u_given_s:\n  - [1.0]\n")
    with pytest.raises(GameFileError, match="conditional row"):
        parse_scheme("p_u_given_s:\n  - [0.9, 0.3]\np_a_given_u:\n"
                     "  - [1.0]\n  - [1.0]\n")
    with pytest.raises(GameFileError, match="cardinalities differ"):
        parse_scheme("p_u_given_s:\n  - [0.5, 0.5]\np_a_given_u:\n  - [1.0]\n")
