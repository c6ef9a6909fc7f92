"""Replacement games on nested words and their JSON loader."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Mapping, Union

from .automata import Dnwa, Nwa, load_automaton, to_normal_form, words_nwa
from .errors import AlphabetMismatch, EmptyReplacementLanguage, GameFormatError
from .nested_word import NestedWord, length_lex_key, parse_nested_word

Replacement = Union[tuple, Nwa]  # tuple of NestedWord, or an automaton


@dataclass(frozen=True)
class ReplayMode:
    """None (call depth 1), Bounded(k) or Unbounded (``k`` is None)."""

    k: int | None

    @staticmethod
    def none() -> "ReplayMode":
        return ReplayMode(1)

    @staticmethod
    def bounded(k: int) -> "ReplayMode":
        if k < 1:
            raise ValueError("bounded replay needs k >= 1")
        return ReplayMode(k)

    @staticmethod
    def unbounded() -> "ReplayMode":
        return ReplayMode(None)

    @staticmethod
    def parse(text: str) -> "ReplayMode":
        text = str(text).strip().lower()
        if text == "none":
            return ReplayMode.none()
        if text == "unbounded":
            return ReplayMode.unbounded()
        return ReplayMode.bounded(int(text))

    def __str__(self):
        if self.k is None:
            return "unbounded"
        return "none" if self.k == 1 else str(self.k)


NONE = ReplayMode.none()
UNBOUNDED = ReplayMode.unbounded()


@dataclass(eq=False)
class Game:
    alphabet: tuple
    functions: tuple
    replacement: dict
    target: Dnwa
    name: str = ""
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.alphabet = tuple(sorted(set(self.alphabet)))
        self.functions = tuple(sorted(set(self.functions)))
        if not set(self.functions) <= set(self.alphabet):
            raise GameFormatError(f"functions {self.functions} not in alphabet")
        if set(self.target.alphabet) != set(self.alphabet):
            raise AlphabetMismatch(f"target alphabet {self.target.alphabet} != {self.alphabet}")
        if set(self.replacement) != set(self.functions):
            raise GameFormatError("every function symbol needs exactly one rule")
        rep = {}
        for a in self.functions:
            r = self.replacement[a]
            if isinstance(r, Nwa):
                if set(r.alphabet) != set(self.alphabet):
                    raise AlphabetMismatch(f"rule automaton for {a} uses another alphabet")
            else:
                r = tuple(sorted(set(r), key=length_lex_key))
                if not r:
                    raise EmptyReplacementLanguage(a)
                for w in r:
                    if not w.symbols <= set(self.alphabet):
                        raise AlphabetMismatch(f"replacement word {w} for {a}")
            rep[a] = r
        self.replacement = rep
        self.target = to_normal_form(self.target)

    @property
    def is_finite(self) -> bool:
        return all(not isinstance(r, Nwa) for r in self.replacement.values())

    @property
    def simple(self):
        from .schemas import Snwa
        return self.target if isinstance(self.target, Snwa) else None

    def words(self, a) -> tuple:
        r = self.replacement[a]
        if isinstance(r, Nwa):
            raise GameFormatError(f"rule for {a} is an automaton, not a word list")
        return r

    def rule_nwa(self, a) -> Nwa:
        r = self.replacement[a]
        return r if isinstance(r, Nwa) else words_nwa(r, self.alphabet)

    def in_target(self, w) -> bool:
        return self.target.accepts(w)

    def to_json(self) -> dict:
        rules = {}
        for a, r in self.replacement.items():
            if isinstance(r, Nwa):
                rules[a] = {"automaton": r.to_json()}
            else:
                rules[a] = {"words": [str(w) for w in r]}
        out = {
            "alphabet": list(self.alphabet),
            "functions": list(self.functions),
            "target": self.target.to_json(),
            "rules": rules,
        }
        if self.name:
            out["name"] = self.name
        return out

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, ensure_ascii=False)


def load_target(obj: Mapping, alphabet) -> Dnwa:
    from .schemas import grammar_to_snwa, parse_grammar

    if "dtd" in obj or "xsd" in obj:
        text = obj.get("dtd", obj.get("xsd"))
        if isinstance(text, list):
            text = "\n".join(text)
        g = parse_grammar(text, extra_labels=alphabet)
        return grammar_to_snwa(g)
    A = load_automaton(obj, deterministic=True)
    if "snwa" in obj:
        return _load_snwa(A, obj["snwa"])
    return A


def _load_snwa(A: Dnwa, extra: Mapping):
    from .schemas import Snwa

    try:
        return Snwa(A.states, A.alphabet, A.open_trans, A.close_trans, A.initial, A.accepting,
                    type_of=extra["types"], local_accept=extra["local_accept"],
                    target_fn={(q, a): r for q, a, r in extra["target"]},
                    bottom=extra["bottom"])
    except (KeyError, TypeError, ValueError) as e:
        raise GameFormatError(f"bad snwa block: {e}") from None


def load_game(obj: Mapping) -> Game:
    try:
        alphabet = obj["alphabet"]
        functions = obj.get("functions", [])
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
    return Game(alphabet, functions, rules, target, name=obj.get("name", ""))


def load_game_file(path) -> Game:
    with open(path, encoding="utf-8") as fh:
        return load_game(json.load(fh))
