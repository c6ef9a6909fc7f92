"""Word effects and call effects of replacement games.

States of the (normal form) target automaton are indexed by their position in
``target.states``; effects are tuples of antichains indexed the same way.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from itertools import combinations
from typing import Iterable

from . import antichain as ac
from .alternating import anwa_dual, anwa_emptiness_bounded, anwa_intersect_nwa, anwa_membership
from .automata import Nwa, product, well_matched_reach
from .errors import EmptyReplacementLanguage, InconclusiveEmptiness
from .game import Game
from .nested_word import NestedWord

log = logging.getLogger(__name__)

minimize = ac.minimize
mix = ac.mix
compose = ac.compose


class CallEffect:
    """Map (function symbol, target state) -> antichain."""

    def __init__(self, states: tuple, cells: dict):
        self.states = tuple(states)
        self.cells = dict(cells)  # a -> tuple of antichains by state index

    def __call__(self, a, q):
        return self.cells[a][q]

    def __eq__(self, other):
        return isinstance(other, CallEffect) and self.cells == other.cells

    def __repr__(self):
        return f"CallEffect({self.to_json()})"

    @property
    def functions(self):
        return tuple(sorted(self.cells))

    def named(self, a, q: str) -> list[list[str]]:
        return [[self.states[i] for i in ac.members(x)] for x in self.cells[a][self.states.index(q)]]

    def to_json(self, k=None) -> dict:
        cells = []
        for a in sorted(self.cells):
            for i, q in enumerate(self.states):
                cells.append({"symbol": a, "state": q,
                              "antichain": [[self.states[j] for j in ac.members(x)]
                                            for x in self.cells[a][i]]})
        out = {"cells": cells}
        if k is not None:
            out = {"k": k, **out}
        return out

    def refines(self, other: "CallEffect") -> bool:
        """self ⊑ other cellwise (every set of ``other`` has a subset in ``self``)."""
        return all(ac.leq(self.cells[a][i], other.cells[a][i])
                   for a in self.cells for i in range(len(self.states)))


class TargetIndex:
    """Index tables for a normal-form target DNWA."""

    def __init__(self, game: Game):
        T = game.target
        self.game = game
        self.states = T.states
        self.n = len(T.states)
        self.idx = {q: i for i, q in enumerate(T.states)}
        self.open_to = {}
        self.read = {}
        for i, q in enumerate(T.states):
            for a in T.alphabet:
                r, _h = T.step_open(q, a)
                self.open_to[(i, a)] = self.idx[r]
                for j, s in enumerate(T.states):
                    self.read[(j, i, a)] = self.idx[T.step_close(s, q, a)]
        self.accepting = ac.bits(self.idx[q] for q in T.accepting)
        self.initial = self.idx[T.initial]


def _index(game: Game) -> TargetIndex:
    cached = game.meta.get("_index")
    if cached is None:
        cached = game.meta["_index"] = TargetIndex(game)
    return cached


def identity_effect(game: Game) -> tuple:
    return ac.identity_effect(_index(game).n)


def h_operator(game: Game, a: str, E: tuple, C: CallEffect | None) -> tuple:
    """Effect of <a> v </a> from the effect E of v."""
    ix = _index(game)
    callable_ = C is not None and a in game.functions
    out = []
    for q in range(ix.n):
        inner = E[ix.open_to[(q, a)]]
        call = C(a, q) if callable_ else ()
        sets = []
        for x in inner:
            family = []
            for r in ac.members(x):
                family.append(tuple(call) + (1 << ix.read[(r, q, a)],))
            sets.extend(ac.mix(family))
        out.append(ac.minimize(sets))
    return tuple(out)


def word_effect(game: Game, C: CallEffect | None, w: NestedWord) -> tuple:
    """Structural fold: ε -> identity, uv -> compose, <a>v</a> -> h_operator."""

    def seq(i, j):
        eff = identity_effect(game)
        k = i
        while k <= j:
            m = w.matching(k)
            eff = ac.compose(eff, h_operator(game, w[k].symbol, seq(k + 1, m - 1), C))
            k = m + 1
        return eff

    return seq(0, len(w) - 1)


def base_call_effect(game: Game) -> CallEffect:
    """C¹(a, q) = {{δ*(q, v) | v ∈ R_a}} via well-matched summaries of R_a × T."""
    T = game.target
    ix = _index(game)
    cells = {}
    for a in game.functions:
        R = game.rule_nwa(a)
        P = product(R, T, seeds=[(R.initial, q) for q in T.states])
        comp = P.components
        reach = {q: set() for q in T.states}
        for s, t in well_matched_reach(P):
            (r0, q), (r1, q1) = comp[s], comp[t]
            if r0 == R.initial and r1 in R.accepting:
                reach[q].add(q1)
        row = []
        for q in T.states:
            if not reach[q]:
                raise EmptyReplacementLanguage(a)
            row.append((ac.bits(ix.idx[t] for t in reach[q]),))
        cells[a] = tuple(row)
    return CallEffect(T.states, cells)


# -- iteration -------------------------------------------------------------------

def _candidate_sets(n: int):
    for size in range(n + 1):
        for combo in combinations(range(n), size):
            yield ac.bits(combo)


def _cell_by_membership(game, anwa, a, q, words):
    accepted = []
    for x in _candidate_sets(_index(game).n):
        if any(y & x == y for y in accepted):
            continue
        final = {game.target.states[i] for i in ac.members(x)}
        if all(anwa_membership(anwa, w, accepting=final, initial=game.target.states[q])
               for w in words):
            accepted.append(x)
    return ac.minimize(accepted)


def _cell_by_mix(game, Ck, a, q):
    return ac.mix(word_effect(game, Ck, w)[q] for w in game.words(a))


def rule_effects(game: Game, Ck: CallEffect, a: str) -> set:
    """All effects E^k[w] for w ∈ R_a, by saturation over pairs of rule states."""
    R = game.rule_nwa(a)
    ident = identity_effect(game)
    summ: dict = {}
    succ: dict = {}
    pred: dict = {}
    opens_into: dict = {}
    for (p, b), moves in R.open_trans.items():
        for r, h in moves:
            opens_into.setdefault(r, []).append((p, b, h))
    work = [(s, s, ident) for s in R.states]
    while work:
        s, t, e = work.pop()
        bucket = summ.setdefault((s, t), set())
        if e in bucket:
            continue
        bucket.add(e)
        succ.setdefault(s, set()).add(t)
        pred.setdefault(t, set()).add(s)
        for u in list(succ.get(t, ())):
            for e2 in list(summ[(t, u)]):
                work.append((s, u, ac.compose(e, e2)))
        for o in list(pred.get(s, ())):
            for e0 in list(summ[(o, s)]):
                work.append((o, t, ac.compose(e0, e)))
        for p0, b, h in opens_into.get(s, ()):
            closes = R.closes(t, h, b)
            if closes:
                he = h_operator(game, b, e, Ck)
                for r in closes:
                    work.append((p0, r, he))
    out = set()
    for f in R.accepting:
        out |= summ.get((R.initial, f), set())
    return out


def _cell_by_bounded(game, anwa, a, q, x, depth, width):
    final = {game.target.states[i] for i in ac.members(x)}
    A_qx = anwa.with_initial(game.target.states[q], final)
    res = anwa_emptiness_bounded(anwa_intersect_nwa(anwa_dual(A_qx), game.rule_nwa(a)),
                                 depth, width)
    return not res.nonempty


def iterate_call_effect(game: Game, Ck: CallEffect, method: str = "auto",
                        threads: int = 1, allow_bounded: bool = False,
                        depth: int = 3, width: int = 3, warnings: list | None = None
                        ) -> CallEffect:
    """One step C^k -> C^{k+1}.

    Methods: ``membership`` (per-word ANWA membership, finite rules),
    ``mix`` (mix of word effects, finite rules), ``summary`` (exact effect
    saturation over the rule automaton) and ``bounded`` (dual-ANWA emptiness
    within depth/width bounds).  ``auto`` picks mix for word lists and summary
    for automata; membership enumerates 2^|Q| candidates and is kept as a
    cross-check for small targets.
    """
    from .solver import build_ac

    ix = _index(game)
    anwa = None
    if method in ("membership", "bounded"):
        anwa = build_ac(game, Ck)

    def cell(a, q):
        rule = game.replacement[a]
        how = method
        if how == "auto":
            how = "summary" if isinstance(rule, Nwa) else "mix"
        if how == "membership":
            return _cell_by_membership(game, anwa, a, q, game.words(a))
        if how == "mix":
            return _cell_by_mix(game, Ck, a, q)
        if how == "summary":
            return ac.mix(sorted({e[q] for e in effects_for[a]}))
        if how == "bounded":
            accepted = []
            for x in _candidate_sets(ix.n):
                if any(y & x == y for y in accepted):
                    continue
                if _cell_by_bounded(game, anwa, a, q, x, depth, width):
                    if not allow_bounded:
                        raise InconclusiveEmptiness(a, game.target.states[q],
                                                    {game.target.states[i] for i in ac.members(x)})
                    if warnings is not None:
                        warnings.append(f"bounded emptiness assumed for ({a}, "
                                        f"{game.target.states[q]}, {sorted(ac.members(x))})")
                    accepted.append(x)
            return ac.minimize(accepted)
        raise ValueError(f"unknown method {method!r}")

    effects_for = {}
    if method in ("auto", "summary"):
        for a in game.functions:
            if method == "summary" or isinstance(game.replacement[a], Nwa):
                effects_for[a] = rule_effects(game, Ck, a)
    jobs = [(a, q) for a in game.functions for q in range(ix.n)]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda j: cell(*j), jobs))
    else:
        results = [cell(a, q) for a, q in jobs]
    cells = {a: [] for a in game.functions}
    for (a, _q), res in zip(jobs, results):
        cells[a].append(res)
    return CallEffect(game.target.states, {a: tuple(v) for a, v in cells.items()})


def call_effect_chain(game: Game, max_k: int | None = None, **kw) -> Iterable[CallEffect]:
    """Yield C¹, C², ... stopping after the first repeat or at ``max_k``."""
    C = base_call_effect(game)
    k = 1
    yield C
    while max_k is None or k < max_k:
        nxt = iterate_call_effect(game, C, **kw)
        k += 1
        if nxt == C:
            return
        yield nxt
        C = nxt


def call_effect_at(game: Game, k: int, **kw) -> CallEffect:
    C = base_call_effect(game)
    for _ in range(k - 1):
        nxt = iterate_call_effect(game, C, **kw)
        if nxt == C:
            break
        C = nxt
    return C


def fixpoint_call_effect(game: Game, **kw) -> tuple[CallEffect, int]:
    """Iterate until C^{k+1} = C^k; returns (C^k, number of iterations run)."""
    C = base_call_effect(game)
    if not game.functions:
        return C, 0
    iterations = 0
    while True:
        nxt = iterate_call_effect(game, C, **kw)
        iterations += 1
        log.debug("iteration %d done", iterations)
        if nxt == C:
            return C, iterations
        C = nxt


def iteration_bound(game: Game) -> int:
    n = len(game.target.states)
    return len(game.functions) * n * 2 ** n
