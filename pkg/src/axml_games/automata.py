"""Nested word automata (NWA / DNWA): runs, normal form, products, summaries."""

from __future__ import annotations

import json
from collections import defaultdict
from typing import Iterable, Mapping

from .errors import (AlphabetMismatch, AutomatonFormatError, NotDeterministic,
                     SymbolNotInAlphabet)
from .nested_word import NestedWord

SINK = "⊥"


def pair_name(p: str, q: str) -> str:
    return f"pair({p},{q})"


def fresh_name(base: str, taken) -> str:
    name = base
    while name in taken:
        name += "'"
    return name


class Nwa:
    """Nondeterministic nested word automaton.

    ``open_trans[(q, a)]`` is a frozenset of (linear, hierarchical) pairs and
    ``close_trans[(q, p, a)]`` a frozenset of states.  Missing keys mean no move.
    """

    deterministic = False

    def __init__(self, states, alphabet, open_trans, close_trans, initial, accepting):
        self.states = tuple(sorted(set(states)))
        self.alphabet = tuple(sorted(set(alphabet)))
        self.open_trans = {k: frozenset(v) for k, v in open_trans.items() if v}
        self.close_trans = {k: frozenset(v) for k, v in close_trans.items() if v}
        self.initial = initial
        self.accepting = frozenset(accepting)
        self._check()

    def _check(self):
        st = set(self.states)
        sig = set(self.alphabet)
        if self.initial not in st:
            raise AutomatonFormatError(f"initial state {self.initial!r} not declared")
        if not self.accepting <= st:
            raise AutomatonFormatError(f"undeclared accepting states {sorted(self.accepting - st)}")
        for (q, a), succ in self.open_trans.items():
            if q not in st or a not in sig:
                raise AutomatonFormatError(f"bad open transition key {(q, a)}")
            for r, h in succ:
                if r not in st or h not in st:
                    raise AutomatonFormatError(f"undeclared state in open {(q, a)} -> {(r, h)}")
        for (q, p, a), succ in self.close_trans.items():
            if q not in st or p not in st or a not in sig:
                raise AutomatonFormatError(f"bad close transition key {(q, p, a)}")
            if not set(succ) <= st:
                raise AutomatonFormatError(f"undeclared state in close {(q, p, a)}")

    def __eq__(self, other):
        return (isinstance(other, Nwa) and self.to_json() == other.to_json())

    def __hash__(self):
        return hash(json.dumps(self.to_json(), sort_keys=True))

    def __repr__(self):
        kind = "Dnwa" if self.deterministic else "Nwa"
        return f"{kind}(|Q|={len(self.states)}, Σ={list(self.alphabet)})"

    def opens(self, q, a):
        return self.open_trans.get((q, a), frozenset())

    def closes(self, q, p, a):
        return self.close_trans.get((q, p, a), frozenset())

    def with_initial(self, q, accepting=None):
        cls = type(self)
        out = cls.__new__(cls)
        out.__dict__.update(self.__dict__)
        out.initial = q
        if accepting is not None:
            out.accepting = frozenset(accepting)
        return out

    # -- serialization -------------------------------------------------------
    def to_json(self) -> dict:
        opens = sorted([q, a, r, h] for (q, a), s in self.open_trans.items() for r, h in s)
        closes = sorted([q, p, a, r] for (q, p, a), s in self.close_trans.items() for r in s)
        return {
            "states": list(self.states),
            "alphabet": list(self.alphabet),
            "initial": self.initial,
            "accepting": sorted(self.accepting),
            "open": opens,
            "close": closes,
        }


class Dnwa(Nwa):
    """Deterministic and total NWA (completed with a sink on construction)."""

    deterministic = True

    def __init__(self, states, alphabet, open_trans, close_trans, initial, accepting,
                 complete: bool = True):
        super().__init__(states, alphabet, open_trans, close_trans, initial, accepting)
        for k, v in list(self.open_trans.items()) + list(self.close_trans.items()):
            if len(v) != 1:
                raise NotDeterministic(f"transition {k} has {len(v)} successors")
        if complete:
            self._complete()
        self.dopen = {k: next(iter(v)) for k, v in self.open_trans.items()}
        self.dclose = {k: next(iter(v)) for k, v in self.close_trans.items()}

    def _complete(self):
        missing_open = [(q, a) for q in self.states for a in self.alphabet
                        if (q, a) not in self.open_trans]
        missing_close = [(q, p, a) for q in self.states for p in self.states
                         for a in self.alphabet if (q, p, a) not in self.close_trans]
        if not missing_open and not missing_close:
            return
        sink = self.sink_state()
        if sink is None:
            sink = fresh_name(SINK, set(self.states))
            self.states = tuple(sorted(self.states + (sink,)))
        for q in self.states:
            for a in self.alphabet:
                self.open_trans.setdefault((q, a), frozenset([(sink, q)]))
                for p in self.states:
                    self.close_trans.setdefault((q, p, a), frozenset([sink]))

    def sink_state(self):
        """A non-accepting state whose defined moves all stay put, if present.

        Missing moves are completed into the sink, so such a state traps every
        run once completion is done.  A state named ⊥ is preferred.
        """
        def traps(s):
            if s in self.accepting:
                return False
            for a in self.alphabet:
                o = self.open_trans.get((s, a))
                if o is not None and o != frozenset([(s, s)]):
                    return False
                for p in self.states:
                    c = self.close_trans.get((s, p, a))
                    if c is not None and c != frozenset([s]):
                        return False
            return True

        for s in sorted(self.states, key=lambda s: s != SINK):
            if traps(s):
                return s
        return None

    def step_open(self, q, a):
        try:
            return self.dopen[(q, a)]
        except KeyError:
            raise SymbolNotInAlphabet(a) from None

    def step_close(self, q, p, a):
        try:
            return self.dclose[(q, p, a)]
        except KeyError:
            raise SymbolNotInAlphabet(a) from None

    def run(self, q, w: Iterable) -> str:
        return run_dnwa(self, q, w)

    def is_normal_form(self) -> bool:
        return all(h == q for (q, _a), (_r, h) in self.dopen.items())

    def accepts(self, w) -> bool:
        return run_dnwa(self, self.initial, w) in self.accepting


# -- runs --------------------------------------------------------------------

def run_dnwa(A: Dnwa, frm: str, w: Iterable) -> str:
    q = frm
    stack = []
    for t in w:
        if t.is_open:
            q, h = A.step_open(q, t.symbol)
            stack.append(h)
        else:
            q = A.step_close(q, stack.pop(), t.symbol)
    return q


def nwa_accepts(A: Nwa, w: NestedWord) -> bool:
    """Subset simulation with per-level summaries (visibly pushdown determinisation)."""
    for t in w:
        if t.symbol not in A.alphabet:
            return False
    # a level relation holds (key, state); key identifies the run's entry context
    level = {(None, A.initial)}
    stack = []
    for t in w:
        a = t.symbol
        if t.is_open:
            inner = set()
            for key, q in level:
                for r, h in A.opens(q, a):
                    inner.add(((q, h), r))
            stack.append(level)
            level = inner
        else:
            outer = stack.pop()
            by_prev = defaultdict(set)
            for key, q in outer:
                by_prev[q].add(key)
            nxt = set()
            for (prev, h), q in level:
                for r in A.closes(q, h, a):
                    for key in by_prev[prev]:
                        nxt.add((key, r))
            level = nxt
        if not level:
            return False
    return any(q in A.accepting for _k, q in level)


def accepts(A: Nwa, w: NestedWord) -> bool:
    if isinstance(A, Dnwa):
        return all(t.symbol in A.alphabet for t in w) and A.accepts(w)
    return nwa_accepts(A, w)


# -- constructions -------------------------------------------------------------

def to_normal_form(A: Dnwa) -> Dnwa:
    if A.is_normal_form():
        return A
    opens = {}
    closes = {}
    for (p, a), (r, h) in A.dopen.items():
        opens[(p, a)] = [(r, p)]
        for q in A.states:
            closes[(q, p, a)] = [A.step_close(q, h, a)]
    return Dnwa(A.states, A.alphabet, opens, closes, A.initial, A.accepting)


def product(A: Nwa, B: Nwa, seeds=None) -> Nwa:
    """Synchronous product over the state pairs reachable from ``seeds``.

    ``seeds`` defaults to the pair of initial states, which is also the
    initial state of the result.  ``components`` maps each generated name back
    to its pair.
    """
    if set(A.alphabet) != set(B.alphabet):
        raise AlphabetMismatch(f"{A.alphabet} vs {B.alphabet}")
    alphabet = A.alphabet
    seeds = [(A.initial, B.initial)] if seeds is None else list(seeds)
    components = {}

    def nm(x):
        s = pair_name(*x)
        components[s] = x
        return s

    lin = set(seeds)
    hier = set()
    frontier = sorted(lin)
    opens, closes = {}, {}
    done_close = set()
    while frontier:
        new = []
        for (p, q) in frontier:
            for a in alphabet:
                succ = {((r, s), (h, k)) for r, h in A.opens(p, a) for s, k in B.opens(q, a)}
                if succ:
                    opens[(nm((p, q)), a)] = {(nm(r), nm(h)) for r, h in succ}
                for r, h in succ:
                    if r not in lin:
                        lin.add(r)
                        new.append(r)
                    hier.add(h)
        for pq in sorted(lin):
            for hk in sorted(hier):
                if (pq, hk) in done_close:
                    continue
                done_close.add((pq, hk))
                (p, q), (h, k) = pq, hk
                for a in alphabet:
                    succ = {(r, s) for r in A.closes(p, h, a) for s in B.closes(q, k, a)}
                    if succ:
                        closes[(nm(pq), nm(hk), a)] = {nm(x) for x in succ}
                    for x in succ:
                        if x not in lin:
                            lin.add(x)
                            new.append(x)
        frontier = new
    states = {nm(x) for x in lin | hier}
    acc = {nm(x) for x in lin if x[0] in A.accepting and x[1] in B.accepting}
    init = nm(seeds[0])
    if A.deterministic and B.deterministic:
        out = Dnwa(states, alphabet, opens, closes, init, acc)
    else:
        out = Nwa(states, alphabet, opens, closes, init, acc)
    out.components = components
    return out


def complement_dnwa(A: Dnwa) -> Dnwa:
    return Dnwa(A.states, A.alphabet, A.open_trans, A.close_trans, A.initial,
                set(A.states) - A.accepting)


def universal_nwa(alphabet) -> Dnwa:
    u = "u"
    opens = {(u, a): [(u, u)] for a in alphabet}
    closes = {(u, u, a): [u] for a in alphabet}
    return Dnwa([u], alphabet, opens, closes, u, [u])


def empty_nwa(alphabet) -> Dnwa:
    return complement_dnwa(universal_nwa(alphabet))


def words_nwa(words: Iterable[NestedWord], alphabet) -> Nwa:
    """NWA accepting exactly the given finite list of nested words."""
    init = "w"
    states = {init}
    opens = defaultdict(set)
    closes = defaultdict(set)
    accepting = set()
    for k, w in enumerate(sorted(set(words))):
        chain = [init] + [f"w{k}.{i + 1}" for i in range(len(w))]
        states.update(chain)
        for i, t in enumerate(w):
            if t.is_open:
                opens[(chain[i], t.symbol)].add((chain[i + 1], chain[i]))
            else:
                m = w.matching(i)
                closes[(chain[i], chain[m], t.symbol)].add(chain[i + 1])
        accepting.add(chain[-1])
    return Nwa(states, alphabet, opens, closes, init, accepting)


def words_dnwa(words: Iterable[NestedWord], alphabet) -> Dnwa:
    """DNWA for a finite set of nested words: states are the prefixes read so far."""
    def key(tags):
        return "p:" + "".join(map(repr, tags))

    opens, closes = {}, {}
    states = set()
    for w in words:
        tags = w.tags
        for i in range(len(tags) + 1):
            states.add(key(tags[:i]))
        for i, t in enumerate(tags):
            here, nxt = key(tags[:i]), key(tags[:i + 1])
            if t.is_open:
                opens[(here, t.symbol)] = [(nxt, here)]
            else:
                closes[(here, key(tags[:w.matching(i)]), t.symbol)] = [nxt]
    return Dnwa(states, alphabet, opens, closes, key(()), {key(w.tags) for w in words})


def well_matched_reach(A: Nwa) -> frozenset:
    """All (p, q) such that some well-nested word leads from p to q."""
    summary = set()
    succ = defaultdict(set)
    pred = defaultdict(set)
    opens_into = defaultdict(list)  # r -> [(p, a, h)] with (r, h) in open(p, a)
    for (p, a), moves in A.open_trans.items():
        for r, h in moves:
            opens_into[r].append((p, a, h))
    work = [(q, q) for q in A.states]

    while work:
        p, q = work.pop()
        if (p, q) in summary:
            continue
        summary.add((p, q))
        succ[p].add(q)
        pred[q].add(p)
        for r in list(succ[q]):
            work.append((p, r))
        for o in list(pred[p]):
            work.append((o, q))
        # wrap: p was entered by an open, q is closed by the matching close
        for p0, a, h in opens_into[p]:
            for s in A.closes(q, h, a):
                work.append((p0, s))
    return frozenset(summary)


# -- JSON loading ----------------------------------------------------------------

def load_automaton(obj: Mapping, deterministic: bool = False) -> Nwa:
    try:
        states = obj["states"]
        alphabet = obj["alphabet"]
        initial = obj["initial"]
        accepting = obj["accepting"]
        raw_open = obj.get("open", [])
        raw_close = obj.get("close", [])
    except (KeyError, TypeError) as e:
        raise AutomatonFormatError(f"missing automaton field {e}") from None
    opens = defaultdict(set)
    closes = defaultdict(set)
    for row in raw_open:
        if len(row) != 4:
            raise AutomatonFormatError(f"open transition needs [q, a, q', p]: {row}")
        q, a, r, h = row
        opens[(q, a)].add((r, h))
    for row in raw_close:
        if len(row) != 4:
            raise AutomatonFormatError(f"close transition needs [q, p, a, q']: {row}")
        q, p, a, r = row
        closes[(q, p, a)].add(r)
    if deterministic:
        return Dnwa(states, alphabet, opens, closes, initial, accepting)
    return Nwa(states, alphabet, opens, closes, initial, accepting)


def dump_automaton(A: Nwa) -> str:
    return json.dumps(A.to_json(), sort_keys=True)
