import json
import random

import pytest

from axml_games.automata import Dnwa, words_nwa
from axml_games.effects import fixpoint_call_effect
from axml_games.errors import GameFormatError
from axml_games.game import NONE, UNBOUNDED, ReplayMode
from axml_games.insertion import (BACKSPACE, REVISIT_WORD, TINY_WORD, InsertionGame,
                                  InsertionMode, call_graph_depth, fallback_target,
                                  insertion_mode_for, insertion_oracle_solve,
                                  insertion_to_replacement, load_insertion_game, mu_decode,
                                  mu_transform, replacement_to_insertion, revisit_game,
                                  tiny_insertion_game)
from axml_games.nested_word import Close, NestedWord, Open, nested_words, nw
from axml_games.solver import Verdict, g0, solve
from axml_games.testkit import (GameParams, random_dnwa, random_finite_game, random_game_word,
                                random_word)

SMALL = GameParams(max_rule_length=4, max_word_length=8)
MODES = (InsertionMode.GENERAL, InsertionMode.WEAK, InsertionMode.NONE)


def test_mu_examples():
    assert str(mu_transform(nw("<a></a>"))) == "<a></a><a'></a'>"
    assert str(mu_transform(nw("<r><a></a></r>"))) == "<r><a></a><a'></a'></r><r'></r'>"
    assert len(mu_transform(nw(""))) == 0


def test_mu_decode_inverts():
    rng = random.Random(0)
    for _ in range(500):
        w = random_word(rng, ("a", "b", "c"), 12)
        assert mu_decode(mu_transform(w)) == w


def test_primed_symbols_must_be_fresh():
    T = Dnwa(["q", "⊥"], ["a", "a'"], {}, {}, "q", ["q"])
    G = InsertionGame(("a", "a'"), ("a",), {"a": (nw("<a></a>"),)}, T)
    with pytest.raises(GameFormatError):
        insertion_to_replacement(G, nw(""))


def test_fixture_games():
    G, w = tiny_insertion_game(), nw(TINY_WORD)
    for m in MODES:
        assert insertion_oracle_solve(G, w, m) == Verdict.JULIET
    R, w = revisit_game(), nw(REVISIT_WORD)
    assert insertion_oracle_solve(R, w, InsertionMode.GENERAL) == Verdict.JULIET
    assert insertion_oracle_solve(R, w, InsertionMode.WEAK) == Verdict.ROMEO
    assert insertion_oracle_solve(R, w, InsertionMode.NONE) == Verdict.ROMEO


def test_fixture_file_roundtrip(fixtures):
    G = load_insertion_game(json.loads((fixtures / "tiny_insertion.json").read_text()))
    assert insertion_oracle_solve(G, nw(TINY_WORD)) == Verdict.JULIET
    assert json.loads(G.dumps())["semantics"] == "insertion"


def test_mode_parsing():
    assert InsertionMode.parse("WeakReplay") == InsertionMode.WEAK
    assert InsertionMode.parse("noreplay") == InsertionMode.NONE
    assert insertion_mode_for(NONE) == InsertionMode.NONE
    assert insertion_mode_for(UNBOUNDED) == InsertionMode.WEAK


def test_call_graph_depth():
    assert call_graph_depth(tiny_insertion_game()) == 1
    T = tiny_insertion_game().target
    loop = InsertionGame(("a", "b", "r"), ("a",), {"a": (nw("<a></a>"),)}, T)
    assert call_graph_depth(loop) is None


def test_g0_transformed_is_won_under_weak_replay():
    G, w = g0(), nw("<r><a></a></r>")
    J, w2 = replacement_to_insertion(G, w)
    assert insertion_oracle_solve(J, w2, InsertionMode.WEAK) == Verdict.JULIET


@pytest.mark.parametrize("seed", range(40))
def test_fallback_target_language(seed):
    rng = random.Random(seed)
    T = random_dnwa(rng, ("a", "b"), 3)
    F = fallback_target(T, BACKSPACE)
    for w in nested_words(("a", "b"), 3, 2, max_length=8):
        assert F.accepts(w) == T.accepts(w)
    for _ in range(30):
        x, v, u, z = (random_word(rng, ("a", "b"), 4) for _ in range(4))
        a = rng.choice("ab")
        # <a>v</a> followed by an inserted reply <⌫>u</⌫> reads as if replaced by u
        w = NestedWord(x.tags + (Open(a),) + v.tags + (Close(a), Open(BACKSPACE)) + u.tags
                       + (Close(BACKSPACE),) + z.tags)
        assert F.accepts(w) == T.accepts(NestedWord(x.tags + u.tags + z.tags))


@pytest.mark.parametrize("seed", range(30))
def test_insertion_to_replacement_preserves_verdicts(seed):
    g = random_finite_game(SMALL, seed)
    I = InsertionGame(g.alphabet, g.functions, g.replacement, g.target)
    w = random_game_word(g, seed, 8)
    R, w2 = insertion_to_replacement(I, w)
    depth = max(fixpoint_call_effect(R)[1], 1)
    assert insertion_oracle_solve(I, w, InsertionMode.WEAK, depth=depth) == \
        solve(R, w2, UNBOUNDED).verdict
    assert insertion_oracle_solve(I, w, InsertionMode.NONE) == solve(R, w2, NONE).verdict


@pytest.mark.parametrize("seed", range(30))
def test_replacement_to_insertion_preserves_verdicts(seed):
    g = random_finite_game(SMALL, seed)
    w = random_game_word(g, seed, 8)
    J, w2 = replacement_to_insertion(g, w)
    depth = max(fixpoint_call_effect(g)[1], 1)
    assert insertion_oracle_solve(J, w2, InsertionMode.WEAK, depth=depth) == \
        solve(g, w, UNBOUNDED).verdict
    assert insertion_oracle_solve(J, w2, InsertionMode.NONE) == solve(g, w, NONE).verdict


@pytest.mark.parametrize("seed", range(30))
def test_modes_are_monotone(seed):
    g = random_finite_game(SMALL, seed)
    I = InsertionGame(g.alphabet, g.functions, g.replacement, g.target)
    w = random_game_word(g, seed, 8)
    R, _ = insertion_to_replacement(I, w)
    depth = max(fixpoint_call_effect(R)[1], 1)
    none = insertion_oracle_solve(I, w, InsertionMode.NONE)
    weak = insertion_oracle_solve(I, w, InsertionMode.WEAK, depth=depth)
    gen = insertion_oracle_solve(I, w, InsertionMode.GENERAL, max_calls=4)
    if none == Verdict.JULIET:
        assert weak == Verdict.JULIET
    if weak == Verdict.JULIET:
        assert gen == Verdict.JULIET


def test_oracle_needs_word_lists():
    R, _ = insertion_to_replacement(tiny_insertion_game(), nw(TINY_WORD))
    G = InsertionGame(("a", "b", "r"), ("a",), {"a": words_nwa([nw("<b></b>")], ("a", "b", "r"))},
                      tiny_insertion_game().target)
    with pytest.raises(GameFormatError):
        insertion_oracle_solve(G, nw(TINY_WORD))
    assert R.functions == ("a'",)


def test_unbounded_weak_search_may_be_inconclusive():
    T = tiny_insertion_game().target
    loop = InsertionGame(("a", "b", "r"), ("a",), {"a": (nw("<a></a>"),)}, T)
    assert insertion_oracle_solve(loop, nw(TINY_WORD), InsertionMode.WEAK) == Verdict.INCONCLUSIVE
    assert insertion_oracle_solve(loop, nw(TINY_WORD), InsertionMode.WEAK, depth=2) == \
        Verdict.ROMEO
