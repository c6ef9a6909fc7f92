"""Acceptance criteria 1-11.

Each test prints one ``criterion N: PASS|FAIL`` line with its measured
numbers.  Tolerances are pinned below; every comparison is exact.

Run alone with ``pytest tests/test_acceptance.py -v``; the status lines are
written straight to the terminal, so they also appear without ``-s``.
"""

from __future__ import annotations

import json
import os
import random
import subprocess
import sys
import time
from pathlib import Path

import pytest

from axml_games import antichain as ac
from axml_games.alternating import anwa_membership, sanwa_nwa_nonempty, sanwa_verify
from axml_games.automata import nwa_accepts
from axml_games.effects import (base_call_effect, call_effect_at, call_effect_chain,
                                fixpoint_call_effect, h_operator, iteration_bound, word_effect)
from axml_games.game import NONE, UNBOUNDED, ReplayMode, load_game_file
from axml_games.insertion import (InsertionGame, InsertionMode, insertion_oracle_solve,
                                  insertion_to_replacement, replacement_to_insertion)
from axml_games.nested_word import Close, NestedWord, Open, nested_trees, nested_words
from axml_games.schemas import grammar_to_snwa, grammar_validate_tree
from axml_games.solver import (Verdict, brute_force_solve, build_ac, build_ac_simple,
                               call_effect_for,
                               decide_jwin, g0)
from axml_games.testkit import (GameParams, all_small_qbfs, brute_force_effect, city_game,
                                effect_as_sets, qbf_eval, qbf_to_anwa, random_finite_game,
                                random_game_word, random_grammar, random_qbf, random_simple_game,
                                random_validation_game, random_validation_word, random_word,
                                two_stage_game)
from axml_games.validation import brute_force_validation_solve, validation_solve

from test_automata import random_nwa

FIXTURES = Path(__file__).parent / "fixtures"

# pinned tolerances
MAX_DISAGREEMENTS = 0
C1_GAMES, C1_SECONDS = 200, 300.0
C2_TRIPLES = 100
C5_RANDOM, C5_SECONDS = 100, 60.0
C6_GAMES, C6_WORDS = 20, 300
C7_GRAMMARS, C7_DEPTH, C7_WIDTH = 20, 3, 3
C8_PAIRS = 30
C9_GAMES, C9_SECONDS = 30, 300.0
C10_INSTANCES = 30

C1_PARAMS = GameParams()
SMALL = GameParams(max_rule_length=4, max_word_length=8)


@pytest.fixture
def report(capsys):
    def emit(n: int, ok: bool, detail: str):
        with capsys.disabled():
            print(f"\ncriterion {n}: {'PASS' if ok else 'FAIL'} ({detail})")
    return emit


def finite_fixtures():
    return [g0(), two_stage_game(), city_game(), load_game_file(FIXTURES / "g0.json"),
            load_game_file(FIXTURES / "two_stage.json")]


# -- 1 ----------------------------------------------------------------------------------

def test_criterion_1_pipeline_matches_oracle(report):
    t0 = time.perf_counter()
    bad, checked = [], 0
    for seed in range(C1_GAMES):
        g = random_finite_game(C1_PARAMS, seed)
        w = random_game_word(g, seed, C1_PARAMS.max_word_length)
        for mode in (NONE, ReplayMode(2), ReplayMode(3)):
            checked += 1
            a = decide_jwin(g, w, mode)
            b = brute_force_solve(g, w, mode, with_strategy=False).verdict
            if a != b:
                bad.append((seed, str(mode), a.value, b.value))
    elapsed = time.perf_counter() - t0
    ok = len(bad) <= MAX_DISAGREEMENTS and elapsed < C1_SECONDS
    report(1, ok, f"{checked} instances, {len(bad)} disagreements, {elapsed:.1f}s")
    assert not bad
    assert elapsed < C1_SECONDS


# -- 2 ----------------------------------------------------------------------------------

def _top_level_splits(w: NestedWord):
    cuts, i = [0], 0
    while i < len(w):
        i = w.matching(i) + 1
        cuts.append(i)
    return cuts


def test_criterion_2_effect_composition_laws(report):
    triples = seq_bad = hier_bad = 0
    seed = 0
    while triples < C2_TRIPLES:
        g = random_finite_game(SMALL, seed)
        rng = random.Random(seed)
        seed += 1
        w = random_word(rng, g.alphabet, 8)
        k = rng.randint(0, 2)
        C = call_effect_at(g, k) if k else None
        states = g.target.states
        cuts = _top_level_splits(w)
        cut = rng.choice(cuts)
        u, v = NestedWord(w.tags[:cut]), NestedWord(w.tags[cut:])
        composed = ac.compose(word_effect(g, C, u), word_effect(g, C, v))
        for i, q in enumerate(states):
            if effect_as_sets(g, composed[i]) != brute_force_effect(g, w, q, k):
                seq_bad += 1
                break
        a = rng.choice(g.alphabet)
        wrapped = NestedWord((Open(a),) + v.tags + (Close(a),))
        hier = h_operator(g, a, word_effect(g, C, v), C)
        for i, q in enumerate(states):
            if effect_as_sets(g, hier[i]) != brute_force_effect(g, wrapped, q, k):
                hier_bad += 1
                break
        triples += 1
    ok = seq_bad == hier_bad == 0
    report(2, ok, f"{triples} triples, sequential {seq_bad} / hierarchical {hier_bad} failures")
    assert ok


# -- 3 ----------------------------------------------------------------------------------

def test_criterion_3_base_call_effect(report):
    games = finite_fixtures() + [random_finite_game(C1_PARAMS, s) for s in range(50)]
    cells = bad = 0
    for g in games:
        C = base_call_effect(g)
        for a in g.functions:
            for i, q in enumerate(g.target.states):
                cells += 1
                direct = frozenset(g.target.run(q, v) for v in g.words(a))
                bad += effect_as_sets(g, C(a, i)) != (direct,)
    report(3, bad == 0, f"{len(games)} games, {cells} cells, {bad} mismatches")
    assert bad == 0


# -- 4 ----------------------------------------------------------------------------------

def test_criterion_4_fixpoint_behaviour(report):
    games = finite_fixtures() + [random_finite_game(C1_PARAMS, s) for s in range(50)]
    over_bound = mono_bad = 0
    for g in games:
        chain = list(call_effect_chain(g))
        _C, it = fixpoint_call_effect(g)
        if it > iteration_bound(g):
            over_bound += 1
        # one extra step shows the repeat
        chain.append(call_effect_at(g, len(chain) + 1))
        for Ck, Cn in zip(chain, chain[1:]):
            for a in g.functions:
                for qi in range(len(g.target.states)):
                    if not all(any(y & x == y for y in Cn(a, qi)) for x in Ck(a, qi)):
                        mono_bad += 1
    two = two_stage_game()
    steps = list(call_effect_chain(two))
    _C2, it2 = fixpoint_call_effect(two)
    stage_ok = len(steps) == 2 and steps[0] != steps[1] and it2 == 2
    ok = over_bound == 0 and mono_bad == 0 and stage_ok
    report(4, ok, f"{len(games)} games, {over_bound} over bound, {mono_bad} chain violations, "
                  f"two-stage fixpoint at k={len(steps)}")
    assert ok


# -- 5 ----------------------------------------------------------------------------------

def test_criterion_5_qbf_reduction(report):
    t0 = time.perf_counter()
    n = bad = 0
    for phi in all_small_qbfs(max_vars=3, max_clauses=2, max_lits=3):
        A, w = qbf_to_anwa(phi)
        n += 1
        bad += anwa_membership(A, w) != qbf_eval(phi)
    truth = 0
    for seed in range(C5_RANDOM):
        phi = random_qbf(seed, n=6)
        A, w = qbf_to_anwa(phi)
        value = qbf_eval(phi)
        truth += value
        bad += anwa_membership(A, w) != value
    elapsed = time.perf_counter() - t0
    ok = bad == 0 and elapsed < C5_SECONDS
    report(5, ok, f"{n} exhaustive + {C5_RANDOM} random ({truth} true), {bad} mismatches, "
                  f"{elapsed:.1f}s")
    assert bad == 0
    assert elapsed < C5_SECONDS


# -- 6 ----------------------------------------------------------------------------------

def test_criterion_6_simple_pipeline(report):
    n = bad = accepted = 0
    for seed in range(C6_GAMES):
        g = random_simple_game(seed)
        C, _ = call_effect_for(g, ReplayMode(2))
        general, simple = build_ac(g, C), build_ac_simple(g, C)
        rng = random.Random(seed)
        for _ in range(C6_WORDS):
            w = random_word(rng, g.alphabet, 10, rooted=rng.random() < 0.7)
            x = anwa_membership(general, w)
            n += 1
            accepted += x
            bad += x != sanwa_verify(simple, w)
    report(6, bad == 0, f"{n} words, {accepted} accepted, {bad} mismatches")
    assert bad == 0


# -- 7 ----------------------------------------------------------------------------------

def test_criterion_7_schema_compilation(report):
    trees = bad = backtracks = 0
    for seed in range(C7_GRAMMARS):
        gr = random_grammar(seed, max_types=5, n_labels=2)
        A = grammar_to_snwa(gr)
        stats, cache = {}, {}
        for w in nested_trees(sorted(gr.labels), C7_DEPTH, C7_WIDTH):
            if len(w) == 0 or len(w.roots()) != 1:
                continue
            trees += 1
            bad += A.accepts(w) != grammar_validate_tree(gr, w, stats, cache)
        backtracks += stats.get("choices", 0)
    ok = bad == 0 and backtracks == 0
    report(7, ok, f"{C7_GRAMMARS} grammars, {trees} trees, {bad} mismatches, "
                  f"{backtracks} typing choices")
    assert ok


# -- 8 ----------------------------------------------------------------------------------

def _sanwa_fixtures():
    out = []
    for g in [city_game()] + [random_simple_game(s) for s in range(10)]:
        for mode in (NONE, ReplayMode(2)):
            out.append((g, build_ac_simple(g, call_effect_for(g, mode)[0])))
    return out


def test_criterion_8_sanwa_algorithms(report):
    verify_bad = words = 0
    for i, (g, S) in enumerate(_sanwa_fixtures()):
        rng = random.Random(i)
        for _ in range(100):
            w = random_word(rng, g.alphabet, 10, rooted=rng.random() < 0.7)
            words += 1
            verify_bad += sanwa_verify(S, w) != anwa_membership(S.underlying, w)
    pair_bad = bound_bad = nonempty = 0
    for seed in range(C8_PAIRS):
        g = random_simple_game(seed, max_types=2)
        B = build_ac_simple(g, call_effect_for(g, NONE)[0])
        A = random_nwa(random.Random(seed), sorted(g.alphabet), 2, density=1.0)
        if seed % 2:
            A.accepting = frozenset(A.states)
        res = sanwa_nwa_nonempty(A, B)
        found = any(nwa_accepts(A, w) and sanwa_verify(B, w)
                    for w in nested_words(sorted(g.alphabet), 3, 3, max_length=8))
        pair_bad += res.nonempty != found
        nonempty += res.nonempty
        full = sanwa_nwa_nonempty(A, B, saturate=True)
        if full.status != res.status or full.c_used > res.c0 or full.n_used > res.n0:
            bound_bad += 1
    ok = verify_bad == pair_bad == bound_bad == 0
    report(8, ok, f"verify: {words} words, {verify_bad} mismatches; nonemptiness: "
                  f"{C8_PAIRS} pairs ({nonempty} nonempty), {pair_bad} mismatches, "
                  f"{bound_bad} outside (c0, n0)")
    assert ok


# -- 9 ----------------------------------------------------------------------------------

def test_criterion_9_validation(report):
    t0 = time.perf_counter()
    games = words = bad = wins = 0
    seed = 0
    while games < C9_GAMES:
        G = random_validation_game(seed)
        seed += 1
        if G.d > 1:
            continue
        games += 1
        for j in range(5):
            w = random_validation_word(100 * seed + j, G)
            a = validation_solve(G, w)
            words += 1
            wins += a == Verdict.JULIET
            bad += a != brute_force_validation_solve(G, w)
    elapsed = time.perf_counter() - t0
    ok = bad == 0 and elapsed < C9_SECONDS
    report(9, ok, f"{games} games (d <= 1), {words} words, {wins} Juliet wins, "
                  f"{bad} mismatches, {elapsed:.1f}s")
    assert bad == 0
    assert elapsed < C9_SECONDS


# -- 10 ---------------------------------------------------------------------------------

def test_criterion_10_insertion_correspondences(report):
    checks = bad = 0
    for seed in range(C10_INSTANCES):
        g = random_finite_game(SMALL, seed)
        w = random_game_word(g, seed, SMALL.max_word_length)
        # insertion -> replacement
        I = InsertionGame(g.alphabet, g.functions, g.replacement, g.target)
        R, w2 = insertion_to_replacement(I, w)
        depth = max(fixpoint_call_effect(R)[1], 1)
        pairs = [
            (insertion_oracle_solve(I, w, InsertionMode.WEAK, depth=depth),
             decide_jwin(R, w2, UNBOUNDED)),
            (insertion_oracle_solve(I, w, InsertionMode.NONE), decide_jwin(R, w2, NONE)),
        ]
        # replacement -> insertion
        J, w3 = replacement_to_insertion(g, w)
        depth = max(fixpoint_call_effect(g)[1], 1)
        pairs += [
            (insertion_oracle_solve(J, w3, InsertionMode.WEAK, depth=depth),
             decide_jwin(g, w, UNBOUNDED)),
            (insertion_oracle_solve(J, w3, InsertionMode.NONE), decide_jwin(g, w, NONE)),
        ]
        checks += len(pairs)
        bad += sum(a != b for a, b in pairs)
    report(10, bad == 0, f"{C10_INSTANCES} instances, {checks} verdict pairs, {bad} mismatches")
    assert bad == 0


# -- 11 ---------------------------------------------------------------------------------

_SWEEP = """
import json
from axml_games.game import NONE, ReplayMode, UNBOUNDED
from axml_games.solver import solve
from axml_games.testkit import random_finite_game, random_game_word
out = []
for seed in range(40):
    g = random_finite_game(seed=seed)
    w = random_game_word(g, seed)
    for m in (NONE, ReplayMode(2), UNBOUNDED):
        rep = solve(g, w, m)
        out.append({"seed": seed, "mode": str(m), **rep.to_json(),
                    "effect": rep.call_effect.to_json()})
print(json.dumps(out, sort_keys=True, ensure_ascii=False))
"""


def _suite_run(hash_seed: str, tmp: Path) -> bytes:
    env = {**os.environ, "PYTHONHASHSEED": hash_seed}
    cli = [sys.executable, "-m", "axml_games"]
    commands = [
        cli + ["solve", "--game", FIXTURES / "g0.json", "--word", FIXTURES / "w0.nw", "--json",
               "--strategy"],
        cli + ["solve", "--game", FIXTURES / "two_stage.json", "--word",
               FIXTURES / "two_stage.nw", "--replay", "unbounded", "--json"],
        cli + ["solve", "--game", FIXTURES / "validated.json", "--word", "<r><a></a></r>",
               "--validated", "--json"],
        cli + ["oracle", "--game", FIXTURES / "revisit_insertion.json", "--word",
               "<r><a></a></r>", "--semantics", "insertion", "--insert-mode", "general", "--json"],
        cli + ["effects", "--game", FIXTURES / "two_stage.json"],
        cli + ["schema", "check", "--grammar", FIXTURES / "city.dtd"],
        cli + ["gen", "game", "--seed", "11"],
        cli + ["convert", "--from", "replacement", "--to", "insertion", "--game",
               FIXTURES / "g0.json", "--word", FIXTURES / "w0.nw"],
        [sys.executable, "-c", _SWEEP],
    ]
    blobs = []
    for cmd in commands:
        res = subprocess.run([str(c) for c in cmd], capture_output=True, env=env, cwd=tmp,
                             timeout=600)
        blobs.append(res.stdout + b"\x00" + str(res.returncode).encode())
    return b"\x01".join(blobs)


def test_criterion_11_determinism(report, tmp_path):
    first = _suite_run("1", tmp_path)
    second = _suite_run("2", tmp_path)
    ok = first == second
    report(11, ok, f"{len(first)} bytes of JSON reports, identical across two runs "
                   f"with different hash seeds: {ok}")
    assert ok
