import random

import pytest

from axml_games.automata import Dnwa
from axml_games.errors import AlphabetMismatch, NotWinnable
from axml_games.game import NONE, UNBOUNDED, Game, ReplayMode, load_game_file
from axml_games.nested_word import nw
from axml_games.solver import (Limits, Verdict, brute_force_solve, decide_jwin, extract_strategy,
                               g0, g0_target, interactive_play, solve, verify_strategy)
from axml_games.effects import fixpoint_call_effect
from axml_games.testkit import (CITY_WORD, GameParams, city_game, random_finite_game,
                                random_game_word, random_simple_game, random_word, two_stage_game)

W0 = nw("<r><a></a></r>")


def test_reference_verdicts():
    g = g0()
    assert decide_jwin(g, W0, NONE) == Verdict.JULIET
    assert decide_jwin(g, nw("<r><b></b></r>"), NONE) == Verdict.JULIET
    assert decide_jwin(g, nw("<b></b>"), UNBOUNDED) == Verdict.ROMEO
    assert decide_jwin(g, nw("<a></a>"), NONE) == Verdict.ROMEO


def test_call_disabled_by_depth_zero():
    assert brute_force_solve(g0(), W0, 0).verdict == Verdict.ROMEO


def test_romeo_picks_bad_reply():
    sigma = ("r", "a", "b", "c")
    T = Dnwa(g0_target().states, sigma,
             {("q0", "r"): [("q1", "q0")], ("q1", "b"): [("q2", "q1")]},
             {("q2", "q1", "b"): ["q3"], ("q3", "q0", "r"): ["qF"]}, "q0", ["qF"])
    h = Game(sigma, ("a",), {"a": (nw("<b></b>"), nw("<c></c>"))}, T)
    assert decide_jwin(h, W0, NONE) == Verdict.ROMEO
    assert brute_force_solve(h, W0, NONE).verdict == Verdict.ROMEO


def test_reference_strategy_is_unique_call():
    s = extract_strategy(g0(), W0, NONE)
    assert s.moves() == ["Read", "Read", "Call", "Read", "Read", "Read"]
    assert s.call_depth() == 1
    assert verify_strategy(g0(), W0, s)


def test_already_in_target_prefers_read():
    s = extract_strategy(g0(), nw("<r><b></b></r>"), NONE)
    assert set(s.moves()) == {"Read"}


def test_extract_strategy_refuses_lost_game():
    with pytest.raises(NotWinnable):
        extract_strategy(g0(), nw("<b></b>"), NONE)


def test_word_outside_alphabet():
    with pytest.raises(AlphabetMismatch):
        solve(g0(), nw("<z></z>"), NONE)


def test_two_stage_needs_replay():
    g = two_stage_game()
    w = nw("<r><a></a></r>")
    assert decide_jwin(g, w, NONE) == Verdict.ROMEO
    assert decide_jwin(g, w, ReplayMode(2)) == Verdict.JULIET
    assert decide_jwin(g, w, UNBOUNDED) == Verdict.JULIET
    assert solve(g, w, UNBOUNDED).iterations == 2


def test_city_example():
    g = city_game()
    rep = solve(g, nw(CITY_WORD), NONE)
    assert rep.verdict == Verdict.JULIET and rep.pipeline == "simple"


def test_fixture_file_loads(fixtures):
    g = load_game_file(fixtures / "g0.json")
    assert decide_jwin(g, W0, NONE) == Verdict.JULIET


@pytest.mark.parametrize("seed", range(60))
def test_pipeline_matches_brute_force(seed):
    g = random_finite_game(GameParams(), seed)
    w = random_game_word(g, seed, 10)
    for mode in (NONE, ReplayMode(2), ReplayMode(3)):
        assert decide_jwin(g, w, mode) == brute_force_solve(g, w, mode, with_strategy=False).verdict


@pytest.mark.parametrize("seed", range(30))
def test_unbounded_matches_deep_enough_brute_force(seed):
    g = random_finite_game(GameParams(max_rule_length=4), seed)
    w = random_game_word(g, seed, 8)
    _C, it = fixpoint_call_effect(g)
    bf = brute_force_solve(g, w, max(it, 1), with_strategy=False).verdict
    assert decide_jwin(g, w, UNBOUNDED) == bf


@pytest.mark.parametrize("seed", range(25))
def test_strategies_are_winning(seed):
    g = random_finite_game(GameParams(max_rule_length=4), seed)
    w = random_game_word(g, seed, 8)
    if decide_jwin(g, w, ReplayMode(2)) != Verdict.JULIET:
        return
    s = extract_strategy(g, w, ReplayMode(2))
    assert verify_strategy(g, w, s, max_depth=2)


@pytest.mark.parametrize("seed", range(15))
def test_simple_and_general_pipelines_agree(seed):
    g = random_simple_game(seed)
    rng = random.Random(seed)
    for _ in range(20):
        w = random_word(rng, g.alphabet, 10, rooted=True)
        for mode in (NONE, ReplayMode(2)):
            a = solve(g, w, mode, pipeline="simple").verdict
            assert a == solve(g, w, mode, pipeline="general").verdict


def test_method_choice_does_not_change_verdict():
    g = two_stage_game()
    w = nw("<r><a></a></r>")
    verdicts = {solve(g, w, UNBOUNDED, method=m).verdict for m in ("mix", "summary", "membership")}
    assert verdicts == {Verdict.JULIET}


def test_threads_do_not_change_result():
    g = random_finite_game(GameParams(), 7)
    w = random_game_word(g, 7)
    assert solve(g, w, ReplayMode(3), threads=4).verdict == solve(g, w, ReplayMode(3)).verdict


def test_brute_force_step_limit_is_inconclusive():
    g = two_stage_game()
    res = brute_force_solve(g, nw("<r><a></a></r>"), ReplayMode(2), Limits(max_steps=1))
    assert res.verdict == Verdict.INCONCLUSIVE


def test_unbounded_brute_force_deepens():
    res = brute_force_solve(two_stage_game(), nw("<r><a></a></r>"), UNBOUNDED)
    assert res.verdict == Verdict.JULIET
    assert res.strategy.call_depth() == 2


def _scripted(answers):
    it = iter(answers)
    return lambda _prompt: next(it)


def test_play_read_everything_loses():
    out = []
    tr = interactive_play(g0(), W0, "J", input_fn=_scripted(["r"] * 4), output=out.append)
    assert tr.winner == Verdict.ROMEO


def test_play_call_wins():
    out = []
    tr = interactive_play(g0(), W0, "J", input_fn=_scripted(["r", "r", "c", "r", "r", "r"]),
                          output=out.append)
    assert tr.winner == Verdict.JULIET
    assert ("Reply", 2, "<b></b>") in tr.moves


def test_play_rejects_illegal_call():
    out = []
    tr = interactive_play(g0(), W0, "J", input_fn=_scripted(["c", "r", "r", "c", "r", "r", "r"]),
                          output=out.append)
    assert any("illegal Call" in line for line in out)
    assert tr.winner == Verdict.JULIET


def test_engine_juliet_wins_against_human_romeo():
    tr = interactive_play(g0(), W0, "R", input_fn=_scripted(["0"]), output=lambda _s: None)
    assert tr.winner == Verdict.JULIET


def test_report_json_excludes_timings_by_default():
    rep = solve(g0(), W0, NONE)
    assert "timings" not in rep.to_json()
    assert "timings" in rep.to_json(timings=True)
