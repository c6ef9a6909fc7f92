"""Alternating nested word automata (ANWA) and their simple variant (SANWA)."""

from __future__ import annotations

import json
import math
import sys
from dataclasses import dataclass, field
from typing import Mapping, NamedTuple

from . import antichain as ac
from .automata import Nwa, fresh_name
from .errors import (AlphabetMismatch, AutomatonFormatError, NotHorizontallySimple,
                     NotTestCovered, NotVerticallySimple, TypeNotPreserved)
from .formulas import (FALSE, TRUE, atom, atoms, conj, disj, dual, evaluate,
                       minimal_models, parse_formula, substitute, to_text)
from .nested_word import NestedWord, nested_words

sys.setrecursionlimit(max(sys.getrecursionlimit(), 20000))


class Anwa:
    """Alternating NWA.

    ``open_f[(q, a)]`` is a formula over (linear, hierarchical) pairs and
    ``close_f[(q, p, a)]`` a formula over states.  Missing entries are False
    and explicit False entries are dropped, so equality is structural.
    """

    def __init__(self, states, alphabet, open_f, close_f, initial, accepting):
        self.states = tuple(sorted(set(states)))
        self.alphabet = tuple(sorted(set(alphabet)))
        self.open_f = {k: v for k, v in open_f.items() if v != FALSE}
        self.close_f = {k: v for k, v in close_f.items() if v != FALSE}
        self.initial = initial
        self.accepting = frozenset(accepting)
        st = set(self.states)
        if initial not in st or not self.accepting <= st:
            raise AutomatonFormatError("initial/accepting states must be declared")
        for (q, a), f in self.open_f.items():
            if q not in st or a not in self.alphabet:
                raise AutomatonFormatError(f"bad open key {(q, a)}")
            for r, h in atoms(f):
                if r not in st or h not in st:
                    raise AutomatonFormatError(f"undeclared atom {(r, h)} in open {(q, a)}")
        for (q, p, a), f in self.close_f.items():
            if q not in st or p not in st or a not in self.alphabet:
                raise AutomatonFormatError(f"bad close key {(q, p, a)}")
            if not atoms(f) <= st:
                raise AutomatonFormatError(f"undeclared atom in close {(q, p, a)}")

    def open_formula(self, q, a):
        return self.open_f.get((q, a), FALSE)

    def close_formula(self, q, p, a):
        return self.close_f.get((q, p, a), FALSE)

    def with_initial(self, q, accepting=None) -> "Anwa":
        out = Anwa.__new__(Anwa)
        out.__dict__.update(self.__dict__)
        out.initial = q
        if accepting is not None:
            out.accepting = frozenset(accepting)
        return out

    def __eq__(self, other):
        return isinstance(other, Anwa) and self.to_json() == other.to_json()

    def __repr__(self):
        return f"Anwa(|Q|={len(self.states)}, Σ={list(self.alphabet)})"

    def to_json(self) -> dict:
        return {
            "states": list(self.states),
            "alphabet": list(self.alphabet),
            "initial": self.initial,
            "accepting": sorted(self.accepting),
            "open": sorted([q, a, to_text(f)] for (q, a), f in self.open_f.items()),
            "close": sorted([q, p, a, to_text(f)] for (q, p, a), f in self.close_f.items()),
        }


def load_anwa(obj: Mapping) -> Anwa:
    try:
        opens = {(q, a): parse_formula(f) for q, a, f in obj.get("open", [])}
        closes = {(q, p, a): parse_formula(f) for q, p, a, f in obj.get("close", [])}
        return Anwa(obj["states"], obj["alphabet"], opens, closes, obj["initial"],
                    obj["accepting"])
    except (KeyError, TypeError, ValueError) as e:
        raise AutomatonFormatError(f"bad ANWA description: {e}") from None


# -- membership ----------------------------------------------------------------------

def anwa_membership(A: Anwa, w: NestedWord, accepting=None, initial=None) -> bool:
    """Memoized AND/OR evaluation over (state, position, branch stack)."""
    if any(t.symbol not in A.alphabet for t in w):
        return False
    final = A.accepting if accepting is None else accepting
    tags = w.tags
    n = len(tags)
    memo: dict = {}

    def run(q, i, stack):
        key = (q, i, stack)
        hit = memo.get(key)
        if hit is not None:
            return hit
        if i == n:
            res = q in final
        else:
            t = tags[i]
            if t.is_open:
                f = A.open_f.get((q, t.symbol), FALSE)
                res = evaluate(f, lambda x: run(x[0], i + 1, stack + (x[1],)))
            else:
                f = A.close_f.get((q, stack[-1], t.symbol), FALSE)
                rest = stack[:-1]
                res = evaluate(f, lambda r: run(r, i + 1, rest))
        memo[key] = res
        return res

    return run(A.initial if initial is None else initial, 0, ())


def anwa_dual(A: Anwa) -> Anwa:
    """Complement automaton: dual formulas (missing entries become True)."""
    opens = {(q, a): dual(A.open_formula(q, a)) for q in A.states for a in A.alphabet}
    closes = {(q, p, a): dual(A.close_formula(q, p, a))
              for q in A.states for p in A.states for a in A.alphabet}
    return Anwa(A.states, A.alphabet, opens, closes, A.initial,
                set(A.states) - A.accepting)


def anwa_intersect_nwa(A: Anwa, B: Nwa) -> Anwa:
    """L(A) ∩ L(B) as an ANWA.

    B runs as one extra existential thread next to A's alternating run, so
    A-branches that stop early (True) cannot skip the check on B.
    """
    if set(A.alphabet) != set(B.alphabet):
        raise AlphabetMismatch(f"{A.alphabet} vs {B.alphabet}")
    ta = lambda q: f"a({q})"
    tb = lambda q: f"b({q})"
    opens = {}
    closes = {}
    for (q, a), f in A.open_f.items():
        opens[(ta(q), a)] = substitute(f, lambda x: atom((ta(x[0]), ta(x[1]))))
    for (q, p, a), f in A.close_f.items():
        closes[(ta(q), ta(p), a)] = substitute(f, lambda r: atom(ta(r)))

    def b_open(q, a):
        return disj(atom((tb(r), tb(h))) for r, h in sorted(B.opens(q, a)))

    for (q, a) in B.open_trans:
        opens[(tb(q), a)] = b_open(q, a)
    for (q, p, a), succ in B.close_trans.items():
        closes[(tb(q), tb(p), a)] = disj(atom(tb(r)) for r in sorted(succ))
    states = {ta(q) for q in A.states} | {tb(q) for q in B.states}
    init = fresh_name("init", states)
    states.add(init)
    for a in A.alphabet:
        a_part = substitute(A.open_formula(A.initial, a), lambda x: atom((ta(x[0]), ta(x[1]))))
        opens[(init, a)] = conj([a_part, b_open(B.initial, a)])
    accepting = {ta(q) for q in A.accepting} | {tb(q) for q in B.accepting}
    if A.initial in A.accepting and B.initial in B.accepting:
        accepting.add(init)
    return Anwa(states, A.alphabet, opens, closes, init, accepting)


class EmptinessResult(NamedTuple):
    status: str  # "NonEmpty" or "EmptyWithinBounds"
    witness: NestedWord | None = None

    @property
    def nonempty(self) -> bool:
        return self.status == "NonEmpty"


def anwa_emptiness_bounded(A: Anwa, max_depth: int, max_width: int,
                           max_length: int | None = None) -> EmptinessResult:
    for w in nested_words(A.alphabet, max_depth, max_width, max_length):
        if anwa_membership(A, w):
            return EmptinessResult("NonEmpty", w)
    return EmptinessResult("EmptyWithinBounds")


# -- simple ANWAs ------------------------------------------------------------------

class SimplicityViolation(AutomatonFormatError):
    """Raised with every violated clause attached as ``violations``."""


class _H(NotHorizontallySimple, SimplicityViolation):
    pass


class _V(NotVerticallySimple, SimplicityViolation):
    pass


class _T(TypeNotPreserved, SimplicityViolation):
    pass


class _C(NotTestCovered, SimplicityViolation):
    pass


@dataclass(eq=False)
class Sanwa:
    """A validated simple ANWA.

    ``skip_state`` (optional) is a state whose runs never test anything:
    it pushes itself, closes to itself and is used by call branches that
    discard a subtree.  Atoms ``(skip, r)`` may appear under any type.
    """

    underlying: Anwa
    type_of: dict
    local_accept: dict
    test_state: str
    target_fn: dict
    skip_state: str | None = None
    _models: dict = field(default_factory=dict, repr=False)

    @property
    def linear_states(self) -> tuple:
        return tuple(q for q in self.underlying.states if q != self.test_state)

    def floc(self, a) -> frozenset:
        return self.local_accept.get(a, frozenset())

    def models(self, q, a) -> list:
        key = (q, a)
        if key not in self._models:
            self._models[key] = minimal_models(self.underlying.open_formula(q, a))
        return self._models[key]

    def to_json(self) -> dict:
        out = self.underlying.to_json()
        out["sanwa"] = {
            "types": {q: self.type_of[q] for q in sorted(self.type_of)},
            "local_accept": {a: sorted(s) for a, s in sorted(self.local_accept.items())},
            "test_state": self.test_state,
            "target": sorted([q, a, r] for (q, a), r in self.target_fn.items()),
            "skip_state": self.skip_state,
        }
        return out


def check_simplicity(A: Anwa, type_of: Mapping, local_accept: Mapping, test_state: str,
                     target_fn: Mapping, skip_state: str | None = None) -> Sanwa:
    violations = []
    test = test_state
    linear = [q for q in A.states if q != test]
    floc = {a: frozenset(local_accept.get(a, ())) for a in A.alphabet}
    # horizontal simplicity
    for q in linear:
        for a in A.alphabet:
            for p in A.states:
                f = A.close_formula(q, p, a)
                if p == test:
                    want = TRUE if q in floc[a] else FALSE
                else:
                    r = target_fn.get((p, a))
                    want = atom(r) if r is not None else None
                if want is None or f != want:
                    violations.append(_H(f"close ({q}, {p}, </{a}>) is {to_text(f)}, "
                                         f"expected {to_text(want) if want else 't(' + p + ',' + a + ')'}"))
    # type preservation
    for (q, a), r in sorted(target_fn.items()):
        if type_of.get(q) != type_of.get(r):
            violations.append(_T(f"t({q},{a}) = {r} changes type {type_of.get(q)} -> {type_of.get(r)}"))
    # vertical simplicity
    by_type: dict = {}
    for q in linear:
        by_type.setdefault(type_of.get(q), []).append(q)
    for X, qs in sorted(by_type.items(), key=lambda kv: str(kv[0])):
        for a in A.alphabet:
            succs = set()
            for q in qs:
                for r, h in atoms(A.open_formula(q, a)):
                    if skip_state is not None and r == skip_state and h != test:
                        continue
                    succs.add(r)
                    if h != test and type_of.get(h) != X:
                        violations.append(_V(f"type {X}, <{a}>: hierarchical {h} has type "
                                             f"{type_of.get(h)}"))
            if len(succs) > 1:
                violations.append(_V(f"type {X}, <{a}>: linear successors {sorted(succs)}"))
    if skip_state is not None:
        for a in A.alphabet:
            if A.open_formula(skip_state, a) != atom((skip_state, skip_state)):
                violations.append(_V(f"skip state must push itself on <{a}>"))
            if target_fn.get((skip_state, a)) != skip_state:
                violations.append(_T(f"t({skip_state},{a}) must be {skip_state}"))
    # test coverage: a non-skip branch that skips its subword is always
    # accompanied by a test of that subword in the same choice
    for q in linear:
        for a in A.alphabet:
            for m in minimal_models(A.open_formula(q, a)):
                for r, h in m:
                    if h != test and r != skip_state and (r, test) not in m:
                        violations.append(_C(f"open ({q}, <{a}>) uses ({r},{h}) without ({r},{test})"))
                        break
    if violations:
        first = violations[0]
        first.violations = violations
        raise first
    return Sanwa(A, dict(type_of), floc, test, dict(target_fn), skip_state)


def load_sanwa(obj: Mapping) -> Sanwa:
    A = load_anwa(obj)
    meta = obj.get("sanwa")
    if meta is None:
        raise AutomatonFormatError("missing 'sanwa' witnesses")
    target = {(q, a): r for q, a, r in meta["target"]}
    return check_simplicity(A, meta["types"], meta["local_accept"], meta["test_state"],
                            target, meta.get("skip_state"))


def sanwa_verify(S: Sanwa, w: NestedWord) -> bool:
    """Membership by the (q, i, j, f) recursion.

    ``f`` is None for the top level (final check against F) or the label of
    the enclosing test subrun (final check against its local acceptance set).
    """
    A = S.underlying
    if any(t.symbol not in A.alphabet for t in w):
        return False
    tags = w.tags
    test = S.test_state
    t_fn = S.target_fn
    memo: dict = {}

    def verify(q, i, j, f):
        key = (q, i, j, f)
        hit = memo.get(key)
        if hit is not None:
            return hit
        if i > j:
            res = q in (A.accepting if f is None else S.floc(f))
        else:
            a = tags[i].symbol
            m = w.matching(i)

            def branch(x):
                q2, p = x
                if p == test:
                    return verify(q2, i + 1, m - 1, a)
                return verify(t_fn[(p, a)], m + 1, j, f)

            res = evaluate(A.open_formula(q, a), branch)
        memo[key] = res
        return res

    return verify(A.initial, 0, len(tags) - 1, None)


# -- nonemptiness of NWA ∩ SANWA ----------------------------------------------------------

@dataclass
class NonemptinessResult:
    status: str  # "NonEmpty" or "Empty"
    c0: int
    n0: int
    c_used: int
    n_used: int
    positions: int

    @property
    def nonempty(self) -> bool:
        return self.status == "NonEmpty"


class EveAdamGame:
    """The Eve/Adam game for L(A) ∩ L(B) ≠ ∅ solved by level tables.

    A position (q1, q2, S, c, n) asks for a word of root width ≤ 2^c and
    depth ≤ n leading A from q1 to q2 such that B has, from every state q,
    a run ending inside S(q).  Eve's claims are upward closed in S, so the
    table at (c, n) stores per word shape the minimal claims: a B-effect
    (antichain of leaf sets per state).  Concatenation rounds compose two
    entries of level c-1, nesting rounds wrap entries of (c0, n-1), and the
    two solve moves seed every level.
    """

    def __init__(self, A: Nwa, B: Sanwa):
        if set(A.alphabet) != set(B.underlying.alphabet):
            raise AlphabetMismatch(f"{A.alphabet} vs {B.underlying.alphabet}")
        self.A = A
        self.B = B
        self.sigma = A.alphabet
        self.qb = list(B.linear_states)
        self.idx = {q: i for i, q in enumerate(self.qb)}
        nq = len(self.qb)
        types = {B.type_of.get(q) for q in self.qb}
        prod = len(self.sigma) * len(A.states)
        self.c0 = math.ceil(nq * math.log2(prod)) if prod > 1 else 0
        self.n0 = 3 * (len(self.sigma) + 1) * len(A.states) ** 2 * len(types)
        self.identity = ac.identity_effect(nq)
        self._floc_bits = {a: ac.bits(self.idx[q] for q in B.floc(a) if q in self.idx)
                           for a in self.sigma}
        self._nest_cache: dict = {}
        self._levels: list = []  # levels[n] = list of sets Win(c, n) for c = 0..
        self._a_moves = []
        for (q1, a), moves in sorted(A.open_trans.items()):
            for r, h in sorted(moves):
                self._a_moves.append((q1, a, r, h))

    def nest(self, a, inner) -> tuple:
        """B-effect of <a> v </a> from the B-effect of v."""
        key = (a, inner)
        hit = self._nest_cache.get(key)
        if hit is not None:
            return hit
        B = self.B
        test = B.test_state
        fl = self._floc_bits[a]
        out = []
        for q in self.qb:
            sets = []
            for m in B.models(q, a):
                ok = all(ac.has_subset_of(inner[self.idx[r]], fl)
                         for r, h in m if h == test)
                if ok:
                    sets.append(ac.bits(self.idx[B.target_fn[(h, a)]] for r, h in m if h != test))
            out.append(ac.minimize(sets))
        res = tuple(out)
        self._nest_cache[key] = res
        return res

    def _base(self, below):
        win = {(q, q, self.identity) for q in self.A.states}
        inner_entries = [(q, q, self.identity) for q in self.A.states]
        if below is not None:
            inner_entries = sorted(below, key=repr)
        by_start: dict = {}
        for q1, q2, e in inner_entries:
            by_start.setdefault(q1, []).append((q2, e))
        for q1, a, r, h in self._a_moves:
            for q2, e in by_start.get(r, ()):
                eff = self.nest(a, e)
                for s in self.A.closes(q2, h, a):
                    win.add((q1, s, eff))
        return win

    def _concat(self, win):
        by_start: dict = {}
        for q1, q2, e in win:
            by_start.setdefault(q1, []).append((q2, e))
        out = set(win)
        for q1, q2, e1 in win:
            for q3, e2 in by_start.get(q2, ()):
                out.add((q1, q3, ac.compose(e1, e2, strict=False)))
        return out

    def solve(self, c_limit=None, n_limit=None):
        """Fill level tables; limits default to (c0, n0).  Returns the top table."""
        c_limit = self.c0 if c_limit is None else c_limit
        n_limit = self.n0 if n_limit is None else n_limit
        self.c_used = 0
        self.n_used = 0
        below = None
        n = 0
        while True:
            win = self._base(below)
            c = 0
            while c < c_limit:
                nxt = self._concat(win)
                if nxt == win:
                    break
                win = nxt
                c += 1
            self.c_used = max(self.c_used, c)
            if below is not None and win == below:
                break
            self.n_used = n
            below = win
            if n >= n_limit:
                break
            n += 1
        self.table = below
        return below

    def accepts_entry(self, entry) -> bool:
        q1, q2, e = entry
        fb = ac.bits(self.idx[q] for q in self.B.underlying.accepting if q in self.idx)
        start = self.idx[self.B.underlying.initial]
        return q1 == self.A.initial and q2 in self.A.accepting and ac.has_subset_of(e[start], fb)

    def eve_wins(self, q1, q2, S: Mapping, c=None, n=None) -> bool:
        """Query a position; S maps each B-state to the set Eve claims."""
        table = self.solve(c, n)
        claim = [ac.bits(self.idx[r] for r in S.get(q, ())) for q in self.qb]
        return any(x1 == q1 and x2 == q2 and
                   all(ac.has_subset_of(e[i], claim[i]) for i in range(len(self.qb)))
                   for x1, x2, e in table)


def sanwa_nwa_nonempty(A: Nwa, B: Sanwa, saturate: bool = False) -> NonemptinessResult:
    """Exact test of L(A) ∩ L(B) ≠ ∅.

    With ``saturate`` the tables are grown past (c0, n0) until stable, which
    reports how much of the bound budget the instance actually needed.
    """
    game = EveAdamGame(A, B)
    if saturate:
        table = game.solve(c_limit=10 ** 9, n_limit=10 ** 9)
    else:
        table = game.solve()
    found = any(game.accepts_entry(e) for e in table)
    return NonemptinessResult("NonEmpty" if found else "Empty", game.c0, game.n0,
                              game.c_used, game.n_used, len(table))


def dump_anwa(A) -> str:
    return json.dumps(A.to_json(), sort_keys=True, ensure_ascii=False)
