"""Deciding JWin: A_C construction, pipelines, brute-force oracle, strategies, play."""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable

from . import antichain as ac
from .alternating import Anwa, Sanwa, anwa_membership, check_simplicity, sanwa_verify
from .automata import Dnwa, fresh_name, nwa_accepts
from .effects import CallEffect, base_call_effect, call_effect_at, fixpoint_call_effect
from .errors import (AlphabetMismatch, InconclusiveEmptiness, NotWinnable, StepLimitExceeded,
                     TargetNotSimple)
from .formulas import FALSE, TRUE, atom, conj, disj
from .game import Game, ReplayMode
from .nested_word import Close, NestedWord, Open, nested_words, nw

log = logging.getLogger(__name__)


class Verdict(str, Enum):
    JULIET = "JulietWins"
    ROMEO = "RomeoWins"
    INCONCLUSIVE = "Inconclusive"

    def __str__(self):
        return self.value


# -- A_C ----------------------------------------------------------------------------

def build_ac(game: Game, C: CallEffect | None) -> Anwa:
    """Opens copy the target; closes are Read ∨ one conjunction per antichain member."""
    T = game.target
    opens, closes = {}, {}
    for q in T.states:
        for a in T.alphabet:
            r, _h = T.step_open(q, a)
            opens[(q, a)] = atom((r, q))
    for pi, p in enumerate(T.states):
        for a in T.alphabet:
            calls = []
            if C is not None and a in game.functions:
                calls = [conj(atom(T.states[i]) for i in ac.members(x)) for x in C(a, pi)]
            for q in T.states:
                closes[(q, p, a)] = disj([atom(T.step_close(q, p, a))] + calls)
    return Anwa(T.states, T.alphabet, opens, closes, T.initial, T.accepting)


def build_ac_simple(game: Game, C: CallEffect | None) -> Sanwa:
    """Simple ANWA for a game whose target is a simple DNWA.

    Opens are ((q', t(q,a)) ∧ (q', q?)) ∨ ⋁_{X ∈ C(a,q)} ⋀_{r ∈ X} (skip, r);
    the target function is the identity, so a close returns the hierarchical state.
    """
    S = game.simple
    if S is None:
        raise TargetNotSimple("target is not a simple DNWA")
    taken = set(S.states)
    test = fresh_name("q?", taken)
    skip = fresh_name("skip", taken | {test})
    linear = tuple(S.states) + (skip,)
    opens, closes, target = {}, {}, {}
    for qi, q in enumerate(S.states):
        for a in S.alphabet:
            r, _h = S.dopen[(q, a)]
            t = S.target_fn[(q, a)]
            branches = [conj([atom((r, t)), atom((r, test))])]
            if C is not None and a in game.functions:
                for x in C(a, qi):
                    branches.append(conj(atom((skip, S.states[i])) for i in ac.members(x)))
            opens[(q, a)] = disj(branches)
    for a in S.alphabet:
        opens[(skip, a)] = atom((skip, skip))
    for q in linear:
        for a in S.alphabet:
            target[(q, a)] = q
            closes[(q, test, a)] = TRUE if q in S.local_accept[a] else FALSE
            for p in linear:
                closes[(q, p, a)] = atom(p)
    types = dict(S.type_of)
    types[skip] = fresh_name("skip", set(types.values()))
    anwa = Anwa(linear + (test,), S.alphabet, opens, closes, S.initial, S.accepting)
    return check_simplicity(anwa, types, S.local_accept, test, target, skip_state=skip)


# -- decision pipeline ----------------------------------------------------------------

@dataclass
class SolveReport:
    verdict: Verdict
    pipeline: str
    iterations: int
    call_effect: CallEffect | None = None
    warnings: list = field(default_factory=list)
    timings: dict = field(default_factory=dict)
    strategy: "Strategy | None" = None

    def to_json(self, timings: bool = False) -> dict:
        out = {
            "verdict": self.verdict.value,
            "pipeline": self.pipeline,
            "iterations": self.iterations,
            "warnings": list(self.warnings),
        }
        if timings:
            out["timings"] = dict(self.timings)
        if self.strategy is not None:
            out["strategy"] = self.strategy.to_json()
        return out


def _check_word(game: Game, w: NestedWord):
    extra = w.symbols - set(game.alphabet)
    if extra:
        raise AlphabetMismatch(f"word uses symbols {sorted(extra)} outside the game alphabet")


def call_effect_for(game: Game, mode: ReplayMode, warnings: list | None = None,
                    **kw) -> tuple[CallEffect, int]:
    """C¹ for None, C^k for Bounded(k), C* for Unbounded; also the iterations run."""
    if mode.k is None:
        return fixpoint_call_effect(game, warnings=warnings, **kw)
    C = base_call_effect(game)
    if mode.k == 1:
        return C, 0
    return call_effect_at(game, mode.k, warnings=warnings, **kw), mode.k - 1


def solve(game: Game, w: NestedWord, mode: ReplayMode, pipeline: str = "auto",
          method: str = "auto", allow_bounded: bool = False, depth: int = 3, width: int = 3,
          threads: int = 1) -> SolveReport:
    _check_word(game, w)
    warnings: list = []
    t0 = time.perf_counter()
    C, iterations = call_effect_for(game, mode, warnings=warnings, method=method,
                                    allow_bounded=allow_bounded, depth=depth, width=width,
                                    threads=threads)
    t1 = time.perf_counter()
    if pipeline == "auto":
        pipeline = "simple" if game.simple is not None and mode.k is not None else "general"
    if pipeline == "simple":
        won = sanwa_verify(build_ac_simple(game, C), w)
    elif pipeline == "general":
        won = anwa_membership(build_ac(game, C), w)
    else:
        raise ValueError(f"unknown pipeline {pipeline!r}")
    verdict = Verdict.JULIET if won else Verdict.ROMEO
    if warnings and won:
        # bounded emptiness can only over-approximate Juliet's power
        verdict = Verdict.INCONCLUSIVE
    t2 = time.perf_counter()
    return SolveReport(verdict, pipeline, iterations, C, warnings,
                       {"effects": t1 - t0, "membership": t2 - t1})


def decide_jwin(game: Game, w: NestedWord, mode: ReplayMode, **kw) -> Verdict:
    return solve(game, w, mode, **kw).verdict


# -- brute force --------------------------------------------------------------------

@dataclass(frozen=True)
class Limits:
    max_steps: int = 2_000_000
    max_rule_length: int = 6   # enumeration cap for automaton-backed rules
    max_rule_depth: int = 3
    max_rule_width: int = 3
    max_replay: int = 6        # deepening cap for Unbounded


@dataclass(frozen=True)
class Step:
    """One Juliet move; ``replies`` maps each Romeo reply to the continuation."""

    kind: str          # "Read" or "Call"
    position: int      # index of the tag in the current word
    tag: object
    replies: tuple = ()  # ((reply word, Strategy), ...)

    def to_json(self):
        out = {"move": self.kind, "position": self.position, "tag": str(self.tag)}
        if self.kind == "Call":
            out["replies"] = [{"word": str(y), "then": s.to_json()} for y, s in self.replies]
        return out


@dataclass(frozen=True)
class Strategy:
    """A finite decision tree: moves until the end of the word or a Call."""

    steps: tuple

    def to_json(self):
        return [s.to_json() for s in self.steps]

    def moves(self) -> list[str]:
        """First-reply linearization, e.g. ['Read', 'Read', 'Call', 'Read', ...]."""
        out = []
        node = self
        while node is not None:
            nxt = None
            for s in node.steps:
                out.append(s.kind)
                if s.kind == "Call":
                    nxt = s.replies[0][1]
            node = nxt
        return out

    def call_depth(self) -> int:
        best = 0
        for s in self.steps:
            for _y, sub in s.replies:
                best = max(best, 1 + sub.call_depth())
        return best

    def __str__(self):
        return ",".join(self.moves())


@dataclass
class BruteForceResult:
    verdict: Verdict
    strategy: Strategy | None = None
    explored: int = 0
    truncated: bool = False


def _rule_words(game: Game, a, limits: Limits) -> tuple[tuple, bool]:
    rule = game.replacement[a]
    if isinstance(rule, tuple):
        return rule, False
    words = [w for w in nested_words(game.alphabet, limits.max_rule_depth, limits.max_rule_width,
                                     limits.max_rule_length) if nwa_accepts(rule, w)]
    return tuple(words), True


class _Search:
    """Minimax over configurations (q, stack, v) with levelled tags in v.

    In normal form the state before an open tag is on the stack, so a Call at
    the matching close resumes from the stack top.
    """

    def __init__(self, game: Game, max_level: int | None, limits: Limits):
        self.game = game
        self.T = game.target
        self.max_level = max_level
        self.limits = limits
        self.memo: dict = {}
        self.truncated = False
        self.words = {}
        for a in game.functions:
            ws, trunc = _rule_words(game, a, limits)
            self.words[a] = ws
            self.truncated |= trunc

    def can_call(self, tag, level) -> bool:
        return (not tag.is_open and tag.symbol in self.game.functions
                and (self.max_level is None or level < self.max_level))

    def read(self, q, stack, v):
        tag, _lvl = v[0]
        if tag.is_open:
            r, _h = self.T.step_open(q, tag.symbol)
            return r, stack + (q,), v[1:]
        return self.T.step_close(q, stack[-1], tag.symbol), stack[:-1], v[1:]

    def replies(self, stack, v):
        tag, lvl = v[0]
        base = stack[-1]
        for y in self.words[tag.symbol]:
            yield y, (base, stack[:-1], tuple((t, lvl + 1) for t in y) + v[1:])

    def win(self, q, stack, v) -> bool:
        key = (q, stack, v)
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        if len(self.memo) >= self.limits.max_steps:
            raise StepLimitExceeded(f"more than {self.limits.max_steps} configurations")
        if not v:
            res = q in self.T.accepting
        else:
            res = self.win(*self.read(q, stack, v))
            tag, lvl = v[0]
            if not res and self.can_call(tag, lvl):
                res = all(self.win(*c) for _y, c in self.replies(stack, v))
        self.memo[key] = res
        return res

    def strategy(self, q, stack, v) -> Strategy:
        """Positions are placeholders here; ``_positions_fix`` fills them in."""
        steps = []
        pos = 0
        while v:
            tag, lvl = v[0]
            nxt = self.read(q, stack, v)
            if self.win(*nxt):
                steps.append(Step("Read", pos, tag))
                q, stack, v = nxt
                pos += 1
                continue
            if not self.can_call(tag, lvl):
                raise NotWinnable("no winning move")
            subs = tuple((y, self.strategy(*c)) for y, c in self.replies(stack, v))
            steps.append(Step("Call", pos, tag, subs))
            return Strategy(tuple(steps))
        if q not in self.T.accepting:
            raise NotWinnable("final word not in target")
        return Strategy(tuple(steps))


def _open_of(tags: list, pos: int) -> int:
    """Index of the open tag matching the close tag at ``pos``."""
    depth = 0
    for i in range(pos - 1, -1, -1):
        if tags[i].is_open:
            if depth == 0:
                return i
            depth -= 1
        else:
            depth += 1
    raise ValueError("unmatched close tag")


def _positions_fix(strategy: Strategy, word: NestedWord) -> Strategy:
    """Recompute Call-continuation positions from the actual words."""

    def walk(s: Strategy, tags: list, start: int) -> Strategy:
        out = []
        cur = list(tags)
        pos = start
        for st in s.steps:
            if st.kind == "Read":
                out.append(Step("Read", pos, st.tag))
                pos += 1
                continue
            i = _open_of(cur, pos)
            subs = []
            for y, sub in st.replies:
                new = cur[:i] + list(y) + cur[pos + 1:]
                subs.append((y, walk(sub, new, i)))
            out.append(Step("Call", pos, st.tag, tuple(subs)))
        return Strategy(tuple(out))

    return walk(strategy, list(word.tags), 0)


def _levels(w: NestedWord) -> tuple:
    return tuple((t, 0) for t in w.tags)


def brute_force_solve(game: Game, w: NestedWord, mode: ReplayMode | int,
                      limits: Limits = Limits(), with_strategy: bool = True) -> BruteForceResult:
    """Exhaustive minimax.  ``mode`` may also be an int Call-depth bound (0 disables Call)."""
    _check_word(game, w)
    if isinstance(mode, int):
        depths = [mode]
        unbounded = False
    elif mode.k is None:
        depths = list(range(1, limits.max_replay + 1))
        unbounded = True
    else:
        depths = [mode.k]
        unbounded = False
    explored = 0
    for k in depths:
        s = _Search(game, k, limits)
        try:
            won = s.win(game.target.initial, (), _levels(w))
        except StepLimitExceeded:
            return BruteForceResult(Verdict.INCONCLUSIVE, None, explored + len(s.memo), s.truncated)
        explored += len(s.memo)
        if won:
            if s.truncated:
                return BruteForceResult(Verdict.INCONCLUSIVE, None, explored, True)
            strat = None
            if with_strategy:
                strat = _positions_fix(s.strategy(game.target.initial, (), _levels(w)), w)
            return BruteForceResult(Verdict.JULIET, strat, explored, False)
    verdict = Verdict.INCONCLUSIVE if unbounded else Verdict.ROMEO
    return BruteForceResult(verdict, None, explored, False)


def extract_strategy(game: Game, w: NestedWord, mode: ReplayMode,
                     limits: Limits = Limits()) -> Strategy:
    """A winning strategy (Read preferred over Call), cross-checked with the pipeline."""
    if decide_jwin(game, w, mode) != Verdict.JULIET:
        raise NotWinnable(f"Romeo wins {w} under replay {mode}")
    if mode.k is None:
        _C, iterations = fixpoint_call_effect(game)
        mode = ReplayMode(max(iterations, 1))
    res = brute_force_solve(game, w, mode, limits)
    if res.verdict != Verdict.JULIET:
        raise NotWinnable(f"no strategy found within limits ({res.verdict})")
    return res.strategy


def verify_strategy(game: Game, w: NestedWord, strategy: Strategy,
                    max_depth: int | None = None) -> bool:
    """Play the strategy against every Romeo reply; all plays must end in the target."""

    def play(tags: list, levels: list, s: Strategy) -> bool:
        tags, levels = list(tags), list(levels)
        for st in s.steps:
            if st.kind == "Read":
                if tags[st.position] != st.tag:
                    return False
                continue
            i = _open_of(tags, st.position)
            lvl = levels[st.position]
            if st.tag.symbol not in game.functions or tags[st.position] != st.tag:
                return False
            if max_depth is not None and lvl >= max_depth:
                return False
            expected = {str(y) for y in game.words(st.tag.symbol)}
            if {str(y) for y, _ in st.replies} != expected:
                return False
            for y, sub in st.replies:
                new_tags = tags[:i] + list(y) + tags[st.position + 1:]
                new_lv = levels[:i] + [lvl + 1] * len(y) + levels[st.position + 1:]
                if not play(new_tags, new_lv, sub):
                    return False
            return True
        return game.in_target(NestedWord(tags))

    return play(list(w.tags), [0] * len(w), strategy)


# -- interactive play ---------------------------------------------------------------

@dataclass
class Transcript:
    configurations: list = field(default_factory=list)
    moves: list = field(default_factory=list)
    winner: Verdict | None = None
    warnings: list = field(default_factory=list)


def _show(tags, pos, player) -> str:
    u = "".join(str(t) for t in tags[:pos])
    v = "".join(str(t) for t in tags[pos:])
    return f"({player}, {u} | {v})"


def interactive_play(game: Game, w: NestedWord, human_side: str, mode: ReplayMode = ReplayMode(1),
                     input_fn: Callable[[str], str] = input,
                     output: Callable[[str], None] = print,
                     limits: Limits = Limits()) -> Transcript:
    """Terminal play; the engine side moves optimally using the brute-force search."""
    human_side = human_side.upper()
    if human_side not in ("J", "R"):
        raise ValueError("side must be J or R")
    tr = Transcript()
    k = mode.k if mode.k is not None else limits.max_replay
    engine = _Search(game, k, limits)
    T = game.target
    tags = list(w.tags)
    levels = [0] * len(tags)
    pos = 0
    q, stack = T.initial, ()

    def vv():
        return tuple(zip(tags[pos:], levels[pos:]))

    while pos < len(tags):
        tr.configurations.append(_show(tags, pos, "J"))
        output(tr.configurations[-1])
        tag, lvl = tags[pos], levels[pos]
        callable_ = engine.can_call(tag, lvl)
        if human_side == "J":
            while True:
                ans = input_fn(f"{tag}: [r]ead or [c]all? ").strip().lower()
                if ans in ("r", "read"):
                    choice = "Read"
                    break
                if ans in ("c", "call"):
                    if callable_:
                        choice = "Call"
                        break
                    if tag.is_open:
                        why = "calls happen at closing tags"
                    elif tag.symbol not in game.functions:
                        why = f"{tag.symbol} is not a function symbol"
                    else:
                        why = f"call depth bound {k} reached"
                    output(f"illegal Call: {why}")
                    continue
                output("please answer r or c")
        else:
            try:
                nxt = engine.read(q, stack, vv())
                choice = "Read"
                if callable_ and not engine.win(*nxt):
                    if all(engine.win(*c) for _y, c in engine.replies(stack, vv())):
                        choice = "Call"
            except StepLimitExceeded as e:
                tr.warnings.append(str(e))
                output(f"warning: {e}; engine forfeits")
                tr.winner = Verdict.INCONCLUSIVE
                return tr
        tr.moves.append((choice, pos, str(tag)))
        output(f"J: {choice} {tag}")
        if choice == "Read":
            q, stack, _ = engine.read(q, stack, vv())
            pos += 1
            continue
        tr.configurations.append(_show(tags, pos, "R"))
        options = list(engine.replies(stack, vv()))
        if human_side == "R":
            for n, (y, _c) in enumerate(options):
                output(f"  [{n}] {y}")
            while True:
                ans = input_fn("reply #? ").strip()
                if ans.isdigit() and int(ans) < len(options):
                    idx = int(ans)
                    break
                output(f"choose 0..{len(options) - 1}")
        else:
            idx = 0
            for n, (_y, c) in enumerate(options):
                if not engine.win(*c):
                    idx = n
                    break
        y, (q, stack, _v) = options[idx]
        tr.moves.append(("Reply", pos, str(y)))
        output(f"R: {y}")
        start = _open_of(tags, pos)
        tags = tags[:start] + list(y.tags) + tags[pos + 1:]
        levels = levels[:start] + [lvl + 1] * len(y) + levels[pos + 1:]
        pos = start
    final = NestedWord(tags)
    tr.configurations.append(_show(tags, pos, "J"))
    tr.winner = Verdict.JULIET if game.in_target(final) else Verdict.ROMEO
    output(f"final word {final}: {tr.winner}")
    return tr


# -- fixtures -----------------------------------------------------------------------

def g0_target() -> Dnwa:
    opens = {("q0", "r"): [("q1", "q0")], ("q1", "b"): [("q2", "q1")]}
    closes = {("q2", "q1", "b"): ["q3"], ("q3", "q0", "r"): ["qF"]}
    return Dnwa(["q0", "q1", "q2", "q3", "qF", "⊥"], ["r", "a", "b"], opens, closes, "q0", ["qF"])


def g0() -> Game:
    """Σ={r,a,b}, Γ={a}, R_a={<b></b>}, T={<r><b></b></r>}."""
    return Game(("r", "a", "b"), ("a",), {"a": (nw("<b></b>"),)}, g0_target(), name="G0")


W0 = "<r><a></a></r>"
