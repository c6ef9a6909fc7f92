"""Context-free games on nested words: solvers, oracles and schema tooling."""

from .errors import AxmlGamesError
from .game import Game, ReplayMode, load_game, load_game_file
from .insertion import (InsertionGame, InsertionMode, insertion_oracle_solve,
                        insertion_to_replacement, mu_transform, replacement_to_insertion)
from .nested_word import NestedWord, nw, parse_nested_word
from .solver import (Limits, SolveReport, Strategy, Verdict, brute_force_solve, decide_jwin,
                     extract_strategy, solve)
from .validation import (ValidationGame, brute_force_validation_solve, load_validation_game,
                         validation_solve)

__version__ = "0.1.0"

__all__ = [
    "AxmlGamesError", "Game", "ReplayMode", "load_game", "load_game_file",
    "InsertionGame", "InsertionMode", "insertion_oracle_solve", "insertion_to_replacement",
    "mu_transform", "replacement_to_insertion", "NestedWord", "nw", "parse_nested_word",
    "Limits", "SolveReport", "Strategy", "Verdict", "brute_force_solve", "decide_jwin",
    "extract_strategy", "solve", "ValidationGame", "brute_force_validation_solve",
    "load_validation_game", "validation_solve",
]
