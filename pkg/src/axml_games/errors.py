"""Exception types shared across the package."""


class AxmlGamesError(Exception):
    """Base class; the CLI maps these to exit codes >= 64."""


class TagSyntaxError(AxmlGamesError, ValueError):
    pass


class NotWellNested(AxmlGamesError, ValueError):
    pass


class IndexOutOfRange(AxmlGamesError, IndexError):
    pass


class SymbolNotInAlphabet(AxmlGamesError, KeyError):
    pass


class AlphabetMismatch(AxmlGamesError, ValueError):
    pass


class NotDeterministic(AxmlGamesError, ValueError):
    pass


class AutomatonFormatError(AxmlGamesError, ValueError):
    pass


class NotHorizontallySimple(AxmlGamesError, ValueError):
    pass


class NotVerticallySimple(AxmlGamesError, ValueError):
    pass


class TypeNotPreserved(AxmlGamesError, ValueError):
    pass


class NotTestCovered(AxmlGamesError, ValueError):
    pass


class SimplicityViolations(AxmlGamesError, ValueError):
    """Carries every violated simplicity clause in ``violations``."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(str(v) for v in self.violations))


class EmptyFamilyMember(AxmlGamesError, ValueError):
    pass


class EmptyReplacementLanguage(AxmlGamesError, ValueError):
    pass


class InconclusiveEmptiness(AxmlGamesError):
    def __init__(self, symbol, state, states):
        self.symbol, self.state, self.states = symbol, state, states
        super().__init__(
            f"bounded search found no counterexample for ({symbol}, {state}, {sorted(states)})")


class TargetNotSimple(AxmlGamesError, ValueError):
    pass


class NotWinnable(AxmlGamesError):
    pass


class StepLimitExceeded(AxmlGamesError):
    pass


class ExplosionGuard(AxmlGamesError):
    pass


class NotSingleType(AxmlGamesError, ValueError):
    pass


class NotRooted(AxmlGamesError, ValueError):
    pass


class GrammarSyntaxError(AxmlGamesError, ValueError):
    pass


class NotReplayFree(AxmlGamesError, ValueError):
    pass


class NotDtd(AxmlGamesError, ValueError):
    pass


class TooManyVariables(AxmlGamesError, ValueError):
    pass


class GameFormatError(AxmlGamesError, ValueError):
    pass
