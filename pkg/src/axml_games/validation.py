"""Replacement games whose Call moves are guarded by validation DTDs.

Juliet may call at </a> only if the current subtree <a>v</a> is valid for
the validator V_a.  Without replay the game is solved bottom-up: each node
gets a dossier, the antichain of profile sets Juliet can force for its
subtree, where a profile is the set of schemas the subtree is valid for.
Each dossier entry is decided by a small flat game over the children.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from itertools import combinations
from typing import Callable, Iterable, Mapping

from .automata import Nwa, product, well_matched_reach
from .errors import (GameFormatError, NotDtd, NotReplayFree, NotRooted, StepLimitExceeded)
from .game import Game, ReplayMode, load_game
from .nested_word import Node, NestedWord, from_forest, to_forest
from .schemas import (GrammarKind, TreeGrammar, classify_grammar, grammar_to_snwa,
                      grammar_validate_tree, parse_grammar)
from .solver import Limits, Verdict

TARGET = "T"

log = logging.getLogger(__name__)


@dataclass
class ValidationGame:
    """A replacement game plus one validation DTD per function symbol.

    ``schemas`` is the declared schema set: the target DTD under the name
    ``T`` followed by the distinct validators ``V1``, ``V2``, ...
    """

    base: Game
    target: TreeGrammar
    validators: dict              # function symbol -> schema name
    schemas: dict                 # schema name -> TreeGrammar
    _rerooted: dict = field(default_factory=dict, repr=False)
    _valid: dict = field(default_factory=dict, repr=False)

    @staticmethod
    def build(base: Game, target: TreeGrammar, validators: Mapping[str, TreeGrammar]):
        schemas = {TARGET: target}
        names = {}
        texts = {}
        for f in sorted(validators):
            g = validators[f]
            key = g.to_text()
            if key not in texts:
                texts[key] = f"V{len(texts) + 1}"
                schemas[texts[key]] = g
            names[f] = texts[key]
        missing = set(base.functions) - set(names)
        if missing:
            raise GameFormatError(f"no validator for {sorted(missing)}")
        for name, g in schemas.items():
            if classify_grammar(g).kind != GrammarKind.LOCAL or any(
                    g.labeling[X] != X for X in g.types):
                raise NotDtd(f"schema {name} is not a DTD")
        if len(schemas) - 1 > 2:
            log.warning("%d distinct validators: dossier enumeration grows doubly exponentially",
                        len(schemas) - 1)
        return ValidationGame(base, target, names, schemas)

    @property
    def d(self) -> int:
        return len(self.schemas) - 1

    def rerooted(self, name: str, label: str) -> TreeGrammar | None:
        """The schema with the type of ``label`` as start (None if undeclared)."""
        key = (name, label)
        if key not in self._rerooted:
            g = self.schemas[name]
            self._rerooted[key] = (TreeGrammar(g.labels, g.types, label, g.productions,
                                               g.labeling)
                                   if label in g.types else None)
        return self._rerooted[key]

    def locally_valid(self, name: str, node: Node) -> bool:
        key = (name, node)
        hit = self._valid.get(key)
        if hit is None:
            g = self.rerooted(name, node.label)
            hit = g is not None and grammar_validate_tree(g, from_forest([node]))
            self._valid[key] = hit
        return hit

    def guard(self, f: str, profile: frozenset) -> bool:
        """<f>v</f> ∈ V_f, given the profile of the subtree."""
        name = self.validators[f]
        return name in profile and self.schemas[name].start == f


def profile_of_tree(G: ValidationGame, t: NestedWord | Node) -> frozenset:
    """Names of the schemas the rooted tree is valid for (rooted at its own label)."""
    if isinstance(t, NestedWord):
        roots = to_forest(t)
        if len(roots) != 1:
            raise NotRooted(f"{len(roots)} roots")
        t = roots[0]
    return frozenset(n for n in G.schemas if G.locally_valid(n, t))


def _outcome(G: ValidationGame, y: NestedWord) -> tuple:
    return tuple((r.label, profile_of_tree(G, r)) for r in to_forest(y))


# -- Σ_{f,a} ----------------------------------------------------------------------------

def compute_sigma(f: str, a: str, G: ValidationGame) -> set:
    """Pairs (a, P) such that some root tree labelled a of a word in R_f has profile P."""
    rule = G.base.replacement[f]
    if not isinstance(rule, Nwa):
        return {(r.label, profile_of_tree(G, r)) for y in rule for r in to_forest(y)
                if r.label == a}
    return _sigma_by_product(G, rule, a)


def _schema_automata(G: ValidationGame, a: str):
    names = sorted(G.schemas)
    autos = []
    for n in names:
        g = G.rerooted(n, a)
        autos.append(None if g is None else grammar_to_snwa(_on_alphabet(g, G.base.alphabet)))
    return names, autos


def _on_alphabet(g: TreeGrammar, alphabet) -> TreeGrammar:
    return TreeGrammar(frozenset(alphabet), g.types, g.start, g.productions, g.labeling)


def _sigma_by_product(G: ValidationGame, R: Nwa, a: str) -> set:
    """Nonemptiness of R × B_P for every profile P, by well-matched reachability.

    B_P skips root trees and nondeterministically selects one root tree
    labelled a whose run through every schema automaton yields profile P.
    """
    names, autos = _schema_automata(G, a)
    live = [(n, A) for n, A in zip(names, autos) if A is not None]
    alphabet = G.base.alphabet

    def zname(z):
        return "z" + json.dumps(z, ensure_ascii=False)

    z0 = tuple(A.initial for _, A in live)
    # reachable tuple states of the joint schema run, and its close table
    opens, closes = {}, {}
    lin, hier = {z0}, set()
    frontier = [z0]
    while frontier:
        new = []
        for z in frontier:
            for b in alphabet:
                nz = tuple(A.step_open(q, b)[0] for q, (_, A) in zip(z, live))
                opens[(z, b)] = nz
                hier.add(z)
                if nz not in lin:
                    lin.add(nz)
                    new.append(nz)
        for z in list(lin):
            for h in list(hier):
                for b in alphabet:
                    if (z, h, b) in closes:
                        continue
                    nz = tuple(A.step_close(q, p, b) for q, p, (_, A) in zip(z, h, live))
                    closes[(z, h, b)] = nz
                    if nz not in lin:
                        lin.add(nz)
                        new.append(nz)
        frontier = new

    def profile(z):
        return frozenset(n for (n, A), q in zip(live, z) if q in A.accepting)

    out = set()
    for P in {profile(z) for z in lin}:
        states = {"s0", "s1", "k", "sel"} | {zname(z) for z in lin}
        bo, bc = {}, {}
        for b in alphabet:
            bo[("s0", b)] = {("k", "s0")} | ({(zname(opens[(z0, b)]), "sel")} if b == a else set())
            bo[("s1", b)] = {("k", "s1")}
            bo[("k", b)] = {("k", "k")}
            for top in ("s0", "s1", "k"):
                bc[("k", top, b)] = {top}
            for z in lin:
                bo[(zname(z), b)] = {(zname(opens[(z, b)]), zname(z))}
                if b == a:
                    nz = closes[(z, z0, b)] if (z, z0, b) in closes else None
                    if nz is not None and profile(nz) == P:
                        bc[(zname(z), "sel", b)] = {"s1"}
                for h in lin:
                    if (z, h, b) in closes:
                        bc[(zname(z), zname(h), b)] = {zname(closes[(z, h, b)])}
        B = Nwa(states, alphabet, bo, bc, "s0", {"s1"})
        Pd = product(R, B)
        comp = Pd.components
        for s, t in well_matched_reach(Pd):
            if s == Pd.initial and comp[t][0] in R.accepting and comp[t][1] == "s1":
                out.add((a, P))
                break
    return out


# -- flat replay-free games -----------------------------------------------------------------

def flat_replay_free_solve(word: Iterable, step: Callable, calls: Callable, initial,
                           accepting: Callable) -> bool:
    """Backward induction on a flat word.

    ``step(q, s)`` is the Read successor, ``calls(s, q)`` the set of states
    Romeo can force after a Call (None when s is not callable) and
    ``accepting(q)`` the final test.  Win(i, q) = Read ∨ (Call ∧ all replies).
    """
    word = tuple(word)
    memo = {}

    def win(i, q):
        key = (i, q)
        if key in memo:
            return memo[key]
        if i == len(word):
            res = accepting(q)
        else:
            s = word[i]
            res = win(i + 1, step(q, s))
            if not res:
                succ = calls(s, q)
                res = succ is not None and all(win(i + 1, r) for r in succ)
        memo[key] = res
        return res

    return win(0, initial)


# -- bottom-up dossiers ---------------------------------------------------------------------

DEAD = "dead"


class _Solver:
    def __init__(self, G: ValidationGame):
        self.G = G
        self.names = tuple(sorted(G.schemas))
        self.processed = 0
        self.call_outcomes = {}
        for f in G.base.functions:
            rule = G.base.replacement[f]
            if isinstance(rule, Nwa):
                raise GameFormatError("validation games need explicit replacement lists")
            self.call_outcomes[f] = tuple(sorted({_outcome(G, y) for y in rule}, key=repr))

    # content tracking for a node labelled a: one content-DFA state per schema
    def start_states(self, a):
        out = []
        for n in self.names:
            g = self.G.rerooted(n, a)
            out.append(None if g is None else 0)
        return tuple(out)

    def advance(self, a, states, pairs):
        states = list(states)
        for b, P in pairs:
            for k, n in enumerate(self.names):
                s = states[k]
                if s is None:
                    continue
                if n not in P:
                    states[k] = None
                    continue
                states[k] = self.G.schemas[n].dfa(a).step(s, b)
        return tuple(states)

    def profile_of(self, a, states) -> frozenset:
        return frozenset(n for n, s in zip(self.names, states)
                         if s is not None and s in self.G.schemas[n].dfa(a).accepting)

    def segment_game(self, children, dossiers, step_pairs, init):
        """Flat word and transition functions for a children sequence."""
        word = []
        for i, (child, D) in enumerate(zip(children, dossiers)):
            for j in range(len(D)):
                word.append(("pset", i, j))
            word.append(("hash", i))

        def step(q, s):
            if q == DEAD:
                return DEAD
            states, pending = q
            if s[0] == "pset":
                return q
            if pending is None:
                return DEAD
            label = children[s[1]].label
            return (step_pairs(states, ((label, pending),)), None)

        def calls(s, q):
            if q == DEAD:
                return None
            states, pending = q
            if s[0] == "pset":
                if pending is not None:
                    return {DEAD}
                return {(states, P) for P in dossiers[s[1]][s[2]]}
            label = children[s[1]].label
            if pending is None or label not in self.G.base.functions:
                return None
            if not self.G.guard(label, pending):
                return None
            return {(step_pairs(states, o), None) for o in self.call_outcomes[label]}

        return word, step, calls, (init, None)

    def dossier(self, node: Node) -> tuple:
        self.processed += 1
        kids = node.children
        dossiers = [self.dossier(c) for c in kids]
        a = node.label
        word, step, calls, init = self.segment_game(
            kids, dossiers, lambda st, pairs: self.advance(a, st, pairs), self.start_states(a))
        reachable = self._final_profiles(word, step, calls, init, a)
        found = []
        universe = sorted(reachable, key=lambda P: (len(P), sorted(P)))
        for size in range(1, len(universe) + 1):
            for cand in combinations(universe, size):
                cset = frozenset(cand)
                if any(f <= cset for f in found):
                    continue
                ok = flat_replay_free_solve(
                    word, step, calls, init,
                    lambda q: q != DEAD and q[1] is None and self.profile_of(a, q[0]) in cset)
                if ok:
                    found.append(cset)
        return tuple(found)

    def _final_profiles(self, word, step, calls, init, a) -> set:
        seen = {init}
        for s in word:
            nxt = set()
            for q in seen:
                nxt.add(step(q, s))
                nxt |= calls(s, q) or set()
            seen = nxt
        return {self.profile_of(a, q[0]) for q in seen if q != DEAD and q[1] is None}

    def root_wins(self, roots) -> bool:
        start = self.G.target.start
        dossiers = [self.dossier(r) for r in roots]
        self.root_dossiers = dossiers

        # top-level string: remember the single pair seen, or "many"
        def pairs_step(state, pairs):
            for p in pairs:
                state = p if state == () else "many"
            return state

        word, step, calls, init = self.segment_game(roots, dossiers, pairs_step, ())

        def accepting(q):
            if q == DEAD or q[1] is not None:
                return False
            top = q[0]
            return top not in ((), "many") and top[0] == start and TARGET in top[1]

        return flat_replay_free_solve(word, step, calls, init, accepting)


@dataclass
class ValidationResult:
    verdict: Verdict
    root_dossier: tuple
    processed: int


def validation_solve(G: ValidationGame, w: NestedWord, mode: ReplayMode = ReplayMode(1),
                     details: bool = False):
    if mode.k != 1:
        raise NotReplayFree("validation games are solved without replay only")
    roots = to_forest(w)
    if len(roots) != 1:
        raise NotRooted(f"input has {len(roots)} roots")
    s = _Solver(G)
    won = s.root_wins(roots)
    verdict = Verdict.JULIET if won else Verdict.ROMEO
    if details:
        return ValidationResult(verdict, s.root_dossiers[0], s.processed)
    return verdict


# -- brute force ----------------------------------------------------------------------------

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


def _valid_document(g: TreeGrammar, tags) -> bool:
    w = NestedWord(tags, check=False)
    if len(w) == 0 or len(to_forest(w)) != 1:
        return False
    return grammar_validate_tree(g, w)


def brute_force_validation_solve(G: ValidationGame, w: NestedWord,
                                 limits: Limits = Limits(), audit: list | None = None) -> Verdict:
    """Minimax on concrete words; Call edges exist only when the guard holds.

    ``audit`` (if given) collects every Call edge explored as (word, position).
    """
    game = G.base
    memo = {}
    valid_cache = {}

    def in_validator(f, tags):
        key = (f, tags)
        if key not in valid_cache:
            valid_cache[key] = _valid_document(G.schemas[G.validators[f]], tags)
        return valid_cache[key]

    def win(tags, levels, pos):
        key = (tags, levels, pos)
        if key in memo:
            return memo[key]
        if len(memo) >= limits.max_steps:
            raise StepLimitExceeded(f"more than {limits.max_steps} configurations")
        if pos == len(tags):
            res = _valid_document(G.target, tags)
        else:
            res = win(tags, levels, pos + 1)
            t = tags[pos]
            if not res and not t.is_open and t.symbol in game.functions and levels[pos] == 0:
                i = _open_of(tags, pos)
                if in_validator(t.symbol, tags[i:pos + 1]):
                    if audit is not None:
                        audit.append((tags, pos))
                    res = True
                    for y in game.words(t.symbol):
                        nt = tags[:i] + y.tags + tags[pos + 1:]
                        nl = levels[:i] + (1,) * len(y) + levels[pos + 1:]
                        if not win(nt, nl, i):
                            res = False
                            break
        memo[key] = res
        return res

    try:
        won = win(tuple(w.tags), (0,) * len(w), 0)
    except StepLimitExceeded:
        return Verdict.INCONCLUSIVE
    return Verdict.JULIET if won else Verdict.ROMEO


# -- loading --------------------------------------------------------------------------------

def _grammar(spec, alphabet) -> TreeGrammar:
    text = spec.get("dtd", spec.get("xsd")) if isinstance(spec, Mapping) else spec
    if text is None:
        raise GameFormatError("validator needs a 'dtd' entry")
    if isinstance(text, list):
        text = "\n".join(text)
    return parse_grammar(text, extra_labels=alphabet)


def load_validation_game(obj: Mapping) -> ValidationGame:
    base = load_game(obj)
    target = getattr(base.target, "grammar", None)
    if target is None:
        raise NotDtd("validation games need a DTD target")
    raw = obj.get("validators")
    if raw is None:
        raise GameFormatError("missing 'validators'")
    validators = {f: _grammar(spec, base.alphabet) for f, spec in raw.items()}
    return ValidationGame.build(base, target, validators)


def universal_dtd(alphabet, start: str) -> TreeGrammar:
    """A DTD accepting every tree whose root is labelled ``start``."""
    labels = sorted(alphabet)
    any_ = "(" + "+".join(labels) + ")*"
    text = f"start {start}\n" + "\n".join(f"element {a} -> {any_}" for a in labels)
    return parse_grammar(text)
