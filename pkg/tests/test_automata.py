import random

import pytest

from axml_games.automata import (Dnwa, Nwa, accepts, complement_dnwa, empty_nwa, load_automaton,
                                 nwa_accepts, product, run_dnwa, to_normal_form, universal_nwa,
                                 well_matched_reach, words_dnwa, words_nwa)
from axml_games.errors import AutomatonFormatError, NotDeterministic
from axml_games.nested_word import nested_words, nw
from axml_games.solver import g0, g0_target
from axml_games.testkit import random_dnwa, random_word

ALPHA = ("a", "b")


def words(n, seed, alphabet=ALPHA, length=12):
    rng = random.Random(seed)
    return [random_word(rng, alphabet, length) for _ in range(n)]


def random_pushing_dnwa(rng, alphabet, n):
    Q = [f"q{i}" for i in range(n)]
    opens = {(q, a): [(rng.choice(Q), rng.choice(Q))] for q in Q for a in alphabet}
    closes = {(q, p, a): [rng.choice(Q)] for q in Q for p in Q for a in alphabet}
    return Dnwa(Q, alphabet, opens, closes, "q0", [q for q in Q if rng.random() < 0.5])


def random_nwa(rng, alphabet, n, density=0.3):
    Q = [f"s{i}" for i in range(n)]
    opens, closes = {}, {}
    for q in Q:
        for a in alphabet:
            opens[(q, a)] = {(r, h) for r in Q for h in Q if rng.random() < density / n}
            for p in Q:
                closes[(q, p, a)] = {r for r in Q if rng.random() < density}
    return Nwa(Q, alphabet, opens, closes, "s0", [q for q in Q if rng.random() < 0.4])


# -- runs ------------------------------------------------------------------------------

def test_run_empty_word():
    assert run_dnwa(g0_target(), "q0", nw("")) == "q0"


def test_run_reference_target():
    A0 = g0_target()
    assert run_dnwa(A0, "q0", nw("<r><b></b></r>")) == "qF"
    assert run_dnwa(A0, "q0", nw("<b></b>")) == "⊥"


def test_reference_target_has_single_sink():
    assert g0_target().states == ("q0", "q1", "q2", "q3", "qF", "⊥")


def test_nwa_accepts_examples():
    A = universal_nwa(ALPHA)
    assert accepts(A, nw(""))
    R = words_nwa([nw("<b></b>")], ("b",))
    assert nwa_accepts(R, nw("<b></b>"))
    assert not nwa_accepts(R, nw("<b><b></b></b>"))


def test_nwa_accepts_matches_dnwa_run():
    rng = random.Random(1)
    for _ in range(10):
        A = random_dnwa(rng, ALPHA, 4)
        for w in words(50, rng.random()):
            assert nwa_accepts(A, w) == (run_dnwa(A, A.initial, w) in A.accepting)


def test_completion_adds_sink():
    A = Dnwa(["p"], ["a"], {}, {}, "p", ["p"])
    assert "⊥" in A.states
    assert not A.accepts(nw("<a></a>"))
    assert A.accepts(nw(""))


def test_nondeterminism_rejected():
    with pytest.raises(NotDeterministic):
        load_automaton({"states": ["p", "q"], "alphabet": ["a"], "initial": "p", "accepting": [],
                        "open": [["p", "a", "p", "p"], ["p", "a", "q", "p"]], "close": []},
                       deterministic=True)


def test_bad_state_rejected():
    with pytest.raises(AutomatonFormatError):
        load_automaton({"states": ["p"], "alphabet": ["a"], "initial": "p", "accepting": ["z"],
                        "open": [], "close": []})


def test_json_roundtrip():
    A = g0_target()
    assert load_automaton(A.to_json(), deterministic=True) == A


# -- normal form -------------------------------------------------------------------------

def test_normal_form_identity_when_already_normal():
    A = g0_target()
    assert A.is_normal_form()
    assert to_normal_form(A) is A


def test_normal_form_preserves_language():
    rng = random.Random(2)
    for _ in range(10):
        A = random_pushing_dnwa(rng, ALPHA, 3)
        N = to_normal_form(A)
        assert N.is_normal_form()
        for w in words(50, rng.random()):
            assert N.accepts(w) == A.accepts(w)
        assert N.accepts(nw("")) == (A.initial in A.accepting)


# -- product and complement -----------------------------------------------------------

def test_product_with_universe():
    rng = random.Random(3)
    U = universal_nwa(ALPHA)
    for _ in range(5):
        A = random_dnwa(rng, ALPHA, 3)
        P = product(A, U)
        for w in words(40, rng.random()):
            assert accepts(P, w) == accepts(A, w)


def test_product_with_complement_is_empty():
    rng = random.Random(4)
    for _ in range(5):
        A = random_dnwa(rng, ALPHA, 3)
        P = product(A, complement_dnwa(A))
        assert not any(accepts(P, w) for w in words(40, rng.random()))


def test_product_of_finite_languages():
    alphabet = ("b", "c")
    A = words_nwa([nw("<b></b>")], alphabet)
    B = words_nwa([nw("<b></b>"), nw("<c></c>")], alphabet)
    P = product(A, B)
    got = [str(w) for w in nested_words(alphabet, 2, 2, max_length=4) if accepts(P, w)]
    assert got == ["<b></b>"]


def test_complement_involution_and_universe():
    rng = random.Random(5)
    A = random_dnwa(rng, ALPHA, 4)
    CC = complement_dnwa(complement_dnwa(A))
    C = complement_dnwa(universal_nwa(ALPHA))
    for w in words(200, 9):
        assert CC.accepts(w) == A.accepts(w)
        assert not C.accepts(w)
    assert not any(empty_nwa(ALPHA).accepts(w) for w in words(20, 1))


def test_complement_of_reference_contains_r():
    assert complement_dnwa(g0_target()).accepts(nw("<r></r>"))


def test_de_morgan():
    rng = random.Random(6)
    for _ in range(3):
        A, B = random_dnwa(rng, ALPHA, 3), random_dnwa(rng, ALPHA, 3)
        left = product(complement_dnwa(A), complement_dnwa(B))
        for w in nested_words(ALPHA, 3, 3, max_length=6):
            assert accepts(left, w) == (not (A.accepts(w) or B.accepts(w)))


def test_words_dnwa():
    ws = [nw("<r><a></a></r>"), nw("<a></a>")]
    D = words_dnwa(ws, ("a", "r"))
    for w in nested_words(("a", "r"), 3, 2, max_length=6):
        assert D.accepts(w) == (w in ws)


# -- well-matched reachability ---------------------------------------------------------

def test_reach_contains_diagonal():
    rng = random.Random(7)
    A = random_nwa(rng, ALPHA, 4)
    R = well_matched_reach(A)
    assert all((p, p) in R for p in A.states)


def test_reach_rule_automaton_of_g0():
    R = g0().rule_nwa("a")
    reach = well_matched_reach(R)
    assert any((R.initial, f) in reach for f in R.accepting)


def _forest_relations(A):
    """Every run relation realised by some forest, built by tree/concatenation closure."""
    ident = frozenset((p, p) for p in A.states)

    def wrap(a, rel):
        return frozenset(
            (p, s)
            for p in A.states
            for r, h in A.opens(p, a)
            for x, t in rel
            if x == r
            for s in A.closes(t, h, a)
        )

    def compose(r1, r2):
        return frozenset((p, s) for p, q in r1 for q2, s in r2 if q == q2)

    seen = {ident}
    frontier = [ident]
    while frontier:
        new = {wrap(a, rel) for rel in frontier for a in A.alphabet}
        pool = seen | new
        new |= {compose(r1, r2) for r1 in pool for r2 in pool}
        frontier = [r for r in new if r not in seen]
        seen |= new
    return seen


def _reach_by_enumeration(A, ws):
    out = set()
    for p in A.states:
        for w in ws:
            for q in A.states:
                if nwa_accepts(A.with_initial(p, [q]), w):
                    out.add((p, q))
    return out


def test_reach_matches_relation_closure():
    rng = random.Random(8)
    for _ in range(50):
        A = random_nwa(rng, ALPHA, 3)
        expected = set().union(*_forest_relations(A))
        assert set(well_matched_reach(A)) == expected


def test_short_words_reach_is_sound():
    rng = random.Random(9)
    ws = list(nested_words(ALPHA, 3, 3, max_length=8))
    for _ in range(30):
        A = random_nwa(rng, ALPHA, 4)
        assert _reach_by_enumeration(A, ws) <= set(well_matched_reach(A))
