"""Insertion semantics: Call results are appended after the called subtree.

Three successor rules after a Call at </a> with result v':

* General: play restarts before <a>, on <a>v</a> v' w;
* WeakReplay: play continues on v' w;
* NoReplay: play skips v' and continues on w.

Two translations link these games to replacement games: anchors (a primed
empty leaf after every subtree) turn insertion into replacement, and a
backspace tag with a fallback-state target turns replacement into insertion.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping

from .automata import Dnwa, Nwa, fresh_name, pair_name, to_normal_form, words_dnwa
from .errors import GameFormatError, StepLimitExceeded, SymbolNotInAlphabet
from .game import Game, ReplayMode, load_automaton, load_target
from .nested_word import Close, NestedWord, Open, parse_nested_word
from .solver import Limits, Verdict


class InsertionMode(str, Enum):
    GENERAL = "general"
    WEAK = "weak"
    NONE = "none"

    @staticmethod
    def parse(text: str) -> "InsertionMode":
        text = text.strip().lower()
        aliases = {"weakreplay": "weak", "noreplay": "none", "no": "none"}
        return InsertionMode(aliases.get(text, text))


@dataclass
class InsertionGame:
    alphabet: tuple
    functions: tuple
    insertion: dict
    target: Dnwa
    name: str = ""
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        # validation is shared with replacement games
        g = Game(self.alphabet, self.functions, self.insertion, self.target)
        self.alphabet, self.functions = g.alphabet, g.functions
        self.insertion, self.target = g.replacement, g.target

    def words(self, a) -> tuple:
        r = self.insertion[a]
        if isinstance(r, Nwa):
            raise GameFormatError(f"insertion rule for {a} is an automaton")
        return r

    def to_json(self) -> dict:
        out = Game(self.alphabet, self.functions, self.insertion, self.target).to_json()
        out["semantics"] = "insertion"
        if self.name:
            out["name"] = self.name
        return out

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, ensure_ascii=False)


def load_insertion_game(obj: Mapping) -> InsertionGame:
    try:
        alphabet = obj["alphabet"]
        target = load_target(obj["target"], alphabet)
        rules = {}
        for a, spec in obj.get("rules", {}).items():
            if "words" in spec:
                rules[a] = tuple(parse_nested_word(s) for s in spec["words"])
            elif "automaton" in spec:
                rules[a] = load_automaton(spec["automaton"])
            else:
                raise GameFormatError(f"rule for {a} needs 'words' or 'automaton'")
    except KeyError as e:
        raise GameFormatError(f"missing game field {e}") from None
    return InsertionGame(alphabet, obj.get("functions", []), rules, target,
                         name=obj.get("name", ""))


# -- μ and anchors -------------------------------------------------------------------------

def primed(a: str) -> str:
    return a + "'"


def _check_fresh(alphabet, new):
    clash = set(alphabet) & set(new)
    if clash:
        raise GameFormatError(f"generated symbols collide with the alphabet: {sorted(clash)}")


def mu_transform(w: NestedWord) -> NestedWord:
    """Append an anchor <a'></a'> after every subtree <a>...</a>."""
    tags = []
    for t in w:
        tags.append(t)
        if not t.is_open:
            a = primed(t.symbol)
            tags += [Open(a), Close(a)]
    return NestedWord(tags, check=False)


def mu_decode(w: NestedWord, alphabet=None) -> NestedWord:
    """Drop primed leaves; left inverse of :func:`mu_transform`."""
    keep = (lambda s: s in alphabet) if alphabet is not None else (lambda s: not s.endswith("'"))
    return NestedWord((t for t in w if keep(t.symbol)), check=False)


def _mu_nwa(R: Nwa, alphabet) -> Nwa:
    """An NWA for μ(L(R)): every close is followed by the matching anchor."""
    states = set(R.states)
    opens = {k: set(v) for k, v in R.open_trans.items()}
    closes = {}
    names = {}
    for (q, h, a), succ in R.close_trans.items():
        for r in succ:
            mid = names.setdefault((r, a, 1), fresh_name(f"{r}·{a}'", states))
            states.add(mid)
            inner = names.setdefault((r, a, 2), fresh_name(f"{r}·{a}'·", states))
            states.add(inner)
            closes.setdefault((q, h, a), set()).add(mid)
            opens.setdefault((mid, primed(a)), set()).add((inner, mid))
            closes.setdefault((inner, mid, primed(a)), set()).add(r)
    return Nwa(states, alphabet, opens, closes, R.initial, R.accepting)


def _ignore_primed(T: Dnwa, alphabet) -> Dnwa:
    opens = {k: [v] for k, v in T.dopen.items()}
    closes = {k: [v] for k, v in T.dclose.items()}
    for a in T.alphabet:
        for q in T.states:
            opens[(q, primed(a))] = [(q, q)]
            for p in T.states:
                closes[(q, p, primed(a))] = [q]
    return Dnwa(T.states, alphabet, opens, closes, T.initial, T.accepting)


def insertion_to_replacement(G: InsertionGame, w: NestedWord) -> tuple[Game, NestedWord]:
    """Replacement game G' and μ(w).

    Weak-replay wins of G correspond to unbounded-replay wins of G', and
    replay-free wins to replay-free wins.
    """
    primes = [primed(a) for a in G.alphabet]
    _check_fresh(G.alphabet, primes)
    alphabet = tuple(G.alphabet) + tuple(primes)
    rules = {}
    for a in G.functions:
        r = G.insertion[a]
        rules[primed(a)] = (_mu_nwa(r, alphabet) if isinstance(r, Nwa)
                            else tuple(mu_transform(v) for v in r))
    target = _ignore_primed(to_normal_form(G.target), alphabet)
    out = Game(alphabet, [primed(a) for a in G.functions], rules, target,
               name=f"{G.name}-replacement" if G.name else "")
    return out, mu_transform(w)


# -- backspace and fallback states ------------------------------------------------------

BACKSPACE = "⌫"


def fallback_target(T: Dnwa, backspace: str) -> Dnwa:
    """DNWA over state pairs (current, fallback).

    An open moves the current state and remembers the state before the open
    as fallback; a close does the same for the matching open.  An opening
    backspace restores the fallback, a closing one keeps the current pair.
    """
    T = to_normal_form(T)
    alphabet = tuple(T.alphabet) + (backspace,)
    pairs = [(p, q) for p in T.states for q in T.states]
    name = {pq: pair_name(*pq) for pq in pairs}
    opens, closes = {}, {}
    for p, q in pairs:
        here = name[(p, q)]
        for a in T.alphabet:
            opens[(here, a)] = [(name[(T.step_open(p, a)[0], p)], here)]
        opens[(here, backspace)] = [(name[(q, q)], here)]
        for p2, q2 in pairs:
            hier = name[(p2, q2)]
            for a in T.alphabet:
                closes[(here, hier, a)] = [name[(T.step_close(p, p2, a), p2)]]
            closes[(here, hier, backspace)] = [here]
    accepting = [name[(p, q)] for p in T.accepting for q in T.states]
    return Dnwa(list(name.values()), alphabet, opens, closes,
                name[(T.initial, T.initial)], accepting)


def _backspace_nwa(R: Nwa, alphabet, backspace: str) -> Nwa:
    states = set(R.states)
    start = fresh_name("⌫0", states)
    states.add(start)
    done = fresh_name("⌫1", states)
    states.add(done)
    opens = {k: set(v) for k, v in R.open_trans.items()}
    closes = {k: set(v) for k, v in R.close_trans.items()}
    opens[(start, backspace)] = {(R.initial, start)}
    for f in R.accepting:
        closes.setdefault((f, start, backspace), set()).add(done)
    return Nwa(states, alphabet, opens, closes, start, {done})


def replacement_to_insertion(G: Game, w: NestedWord,
                             backspace: str = BACKSPACE) -> tuple[InsertionGame, NestedWord]:
    """Insertion game G' and w.

    Unbounded-replay wins of G correspond to weak-replay wins of G', and
    replay-free wins to replay-free wins.
    """
    _check_fresh(G.alphabet, [backspace])
    alphabet = tuple(G.alphabet) + (backspace,)
    rules = {}
    for a in G.functions:
        r = G.replacement[a]
        if isinstance(r, Nwa):
            rules[a] = _backspace_nwa(r, alphabet, backspace)
        else:
            rules[a] = tuple(NestedWord((Open(backspace),) + u.tags + (Close(backspace),),
                                        check=False) for u in r)
    target = fallback_target(G.target, backspace)
    out = InsertionGame(alphabet, G.functions, rules, target,
                        name=f"{G.name}-insertion" if G.name else "")
    return out, w


def insertion_mode_for(mode: ReplayMode) -> InsertionMode:
    return InsertionMode.NONE if mode.k == 1 else InsertionMode.WEAK


# -- oracle --------------------------------------------------------------------------------

def _open_of(tags, pos):
    depth = 0
    for i in range(pos - 1, -1, -1):
        if tags[i].is_open:
            if depth == 0:
                return i
            depth -= 1
        else:
            depth += 1
    raise ValueError("unmatched close")


def call_graph_depth(G: InsertionGame) -> int | None:
    """Longest chain of nested calls possible under weak replay (None if unbounded)."""
    edges = {f: {t.symbol for v in G.words(f) for t in v if t.symbol in G.functions}
             for f in G.functions}
    memo, active = {}, set()

    def depth(f):
        if f in memo:
            return memo[f]
        if f in active:
            raise RecursionError
        active.add(f)
        d = 1 + max((depth(g) for g in edges[f]), default=0)
        active.discard(f)
        memo[f] = d
        return d

    try:
        return max((depth(f) for f in G.functions), default=0)
    except RecursionError:
        return None


class _InsertionSearch:
    def __init__(self, G: InsertionGame, mode: InsertionMode, limits: Limits):
        self.G = G
        self.mode = mode
        self.limits = limits
        self.memo = {}
        self.target_memo = {}
        self.cut = False    # some Call was refused only because of the bound

    def accepts(self, tags):
        hit = self.target_memo.get(tags)
        if hit is None:
            hit = self.target_memo[tags] = self.G.target.accepts(NestedWord(tags, check=False))
        return hit

    def tick(self):
        if len(self.memo) >= self.limits.max_steps:
            raise StepLimitExceeded(f"more than {self.limits.max_steps} configurations")

    def win(self, tags, levels, pos, budget):
        """``budget`` bounds call depth (weak) or the number of calls (general)."""
        key = (tags, levels, pos, budget)
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        self.tick()
        if pos == len(tags):
            res = self.accepts(tags)
        else:
            res = self.win(tags, levels, pos + 1, budget)
            t = tags[pos]
            if not res and not t.is_open and t.symbol in self.G.functions:
                res = self._call(tags, levels, pos, budget, t.symbol)
        self.memo[key] = res
        return res

    def _call(self, tags, levels, pos, budget, f):
        mode = self.mode
        if (budget == 0 if mode == InsertionMode.GENERAL
                else mode == InsertionMode.WEAK and levels[pos] >= budget):
            self.cut = True
            return False
        for v in self.G.words(f):
            nt = tags[:pos + 1] + v.tags + tags[pos + 1:]
            nl = levels[:pos + 1] + (levels[pos] + 1,) * len(v) + levels[pos + 1:]
            if mode == InsertionMode.GENERAL:
                ok = self.win(nt, (0,) * len(nt), _open_of(tags, pos), budget - 1)
            elif mode == InsertionMode.WEAK:
                ok = self.win(nt, nl, pos + 1, budget)
            else:
                ok = self.win(nt, nl, pos + 1 + len(v), budget)
            if not ok:
                return False
        return True


def insertion_oracle_solve(G: InsertionGame, w: NestedWord,
                           mode: InsertionMode = InsertionMode.WEAK,
                           limits: Limits = Limits(), max_calls: int = 8,
                           depth: int | None = None) -> Verdict:
    """Minimax over concrete configurations with the mode's successor rule.

    NoReplay always terminates.  WeakReplay deepens the call depth up to
    ``limits.max_replay`` (or uses exactly ``depth`` when given); General
    deepens the total number of calls up to ``max_calls``.  A loss is
    reported as RomeoWins only if the bound never cut off a Call, or the
    call graph of the insertion lists is acyclic (weak replay), or ``depth``
    was given explicitly.
    """
    tags = tuple(w.tags)
    levels = (0,) * len(tags)
    for f in G.functions:
        if isinstance(G.insertion[f], Nwa):
            raise GameFormatError("the insertion oracle needs explicit word lists")
    for t in tags:
        if t.symbol not in G.alphabet:
            raise SymbolNotInAlphabet(t.symbol)
    s = _InsertionSearch(G, mode, limits)
    if mode == InsertionMode.NONE:
        bounds, exact = [1], True
    elif mode == InsertionMode.WEAK:
        acyclic = call_graph_depth(G)
        if depth is not None:
            bounds, exact = [depth], True
        elif acyclic is not None:
            bounds, exact = [acyclic], True
        else:
            bounds, exact = range(1, limits.max_replay + 1), False
    else:
        bounds, exact = range(0, max_calls + 1), False
    try:
        for b in bounds:
            s.cut = False
            s.memo.clear()
            if s.win(tags, levels, 0, b):
                return Verdict.JULIET
            if not s.cut:
                return Verdict.ROMEO
    except StepLimitExceeded:
        return Verdict.INCONCLUSIVE
    return Verdict.ROMEO if exact else Verdict.INCONCLUSIVE


# -- fixtures ------------------------------------------------------------------------------

def tiny_insertion_game() -> InsertionGame:
    alphabet = ("a", "b", "r")
    T = words_dnwa([parse_nested_word("<r><a></a><b></b></r>")], alphabet)
    return InsertionGame(alphabet, ("a",), {"a": (parse_nested_word("<b></b>"),)}, T,
                         name="tiny-insertion")


TINY_WORD = "<r><a></a></r>"


def revisit_game() -> InsertionGame:
    """General wins, WeakReplay loses.

    Calling at </a> inserts <b></b> behind it; only General lets Juliet go
    back and call the same </a> again to get the second <b></b>.
    """
    alphabet = ("a", "b", "r")
    T = words_dnwa([parse_nested_word("<r><a></a><b></b><b></b></r>")], alphabet)
    return InsertionGame(alphabet, ("a",), {"a": (parse_nested_word("<b></b>"),)}, T,
                         name="revisit")


REVISIT_WORD = "<r><a></a></r>"
