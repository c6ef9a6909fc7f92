"""The ``axml-games`` command line.

Exit codes: 0 JulietWins / true, 1 RomeoWins / false, 2 Inconclusive,
64 usage errors, 65 malformed input data, 66 unreadable files.
"""

from __future__ import annotations

import json
import logging
import os
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import click

from . import testkit
from .alternating import anwa_membership, load_anwa, load_sanwa, sanwa_verify
from .automata import accepts, load_automaton
from .effects import call_effect_chain
from .errors import AxmlGamesError, NotDeterministic
from .game import ReplayMode, load_game
from .insertion import (InsertionMode, insertion_oracle_solve, insertion_to_replacement,
                        load_insertion_game, replacement_to_insertion)
from .nested_word import NestedWord, parse_nested_word
from .schemas import classify_grammar, grammar_to_snwa, parse_grammar
from .solver import (Limits, Verdict, brute_force_solve, extract_strategy, interactive_play,
                     solve as solve_game)
from .validation import brute_force_validation_solve, load_validation_game, validation_solve

EXIT_USAGE, EXIT_DATA, EXIT_IO = 64, 65, 66
CODES = {Verdict.JULIET: 0, Verdict.ROMEO: 1, Verdict.INCONCLUSIVE: 2}


@dataclass
class RunReport:
    verdict: Verdict
    pipeline: str
    iterations: int | None = None
    timings: dict = field(default_factory=dict)
    strategy: object = None
    warnings: list = field(default_factory=list)

    def to_json(self, timings: bool = False) -> dict:
        out = {"verdict": self.verdict.value, "pipeline": self.pipeline,
               "iterations": self.iterations, "warnings": list(self.warnings)}
        if self.strategy is not None:
            out["strategy"] = self.strategy
        if timings:
            out["timings"] = self.timings
        return out

    @staticmethod
    def from_json(obj: dict) -> "RunReport":
        return RunReport(Verdict(obj["verdict"]), obj["pipeline"], obj.get("iterations"),
                         obj.get("timings", {}), obj.get("strategy"), obj.get("warnings", []))


def _emit(report: RunReport, as_json: bool, timings: bool, strategy_text: str | None = None):
    if as_json:
        click.echo(json.dumps(report.to_json(timings), sort_keys=True, ensure_ascii=False))
    else:
        click.echo(report.verdict.value)
        click.echo(f"pipeline: {report.pipeline}")
        if report.iterations is not None:
            click.echo(f"iterations: {report.iterations}")
        for w in report.warnings:
            click.echo(f"warning: {w}")
        if strategy_text:
            click.echo(strategy_text)
        if timings:
            click.echo("timings: " + ", ".join(f"{k}={v:.4f}s" for k, v in report.timings.items()))
    return CODES[report.verdict]


# -- input helpers ----------------------------------------------------------------------

def _load_json(path: str) -> dict:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def _read_text(path: str) -> str:
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _word(value: str) -> NestedWord:
    """A word file, or the word itself when no such file exists."""
    text = _read_text(value) if Path(value).is_file() else value
    return parse_nested_word(text.strip())


def _replay(value: str) -> ReplayMode:
    try:
        return ReplayMode.parse(value)
    except ValueError as e:
        raise click.BadParameter(str(e), param_hint="--replay") from None


def _write(path, text):
    if path in (None, "-"):
        click.echo(text)
    else:
        Path(path).write_text(text + "\n", encoding="utf-8")


game_opt = click.option("--game", "game_path", required=True, help="Game JSON file.")
word_opt = click.option("--word", "word_arg", required=True, help="Word file or literal word.")
replay_opt = click.option("--replay", default="none", show_default=True,
                          help="none, a depth k, or unbounded.")
json_opt = click.option("--json", "as_json", is_flag=True, help="Emit a JSON report.")
timings_opt = click.option("--timings", is_flag=True, help="Include wall-clock timings.")


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
def cli():
    """Decide context-free games on nested words."""


# -- solve ------------------------------------------------------------------------------

@cli.command()
@game_opt
@word_opt
@replay_opt
@click.option("--pipeline", type=click.Choice(["auto", "general", "simple"]), default="auto",
              show_default=True)
@click.option("--method", type=click.Choice(["auto", "mix", "summary", "membership", "bounded"]),
              default="auto", show_default=True, help="Effect iteration method.")
@click.option("--allow-bounded", is_flag=True,
              help="Accept bounded emptiness checks (Juliet wins become Inconclusive).")
@click.option("--depth", default=3, show_default=True)
@click.option("--width", default=3, show_default=True)
@click.option("--strategy", "want_strategy", is_flag=True, help="Print a winning strategy.")
@click.option("--threads", default=1, show_default=True)
@click.option("--validated", is_flag=True, help="Game file carries validators.")
@click.option("--semantics", type=click.Choice(["replacement", "insertion"]),
              default="replacement", show_default=True)
@click.option("--insert-mode", type=click.Choice(["general", "weak", "none"]), default="weak",
              show_default=True)
@json_opt
@timings_opt
def solve(game_path, word_arg, replay, pipeline, method, allow_bounded, depth, width,
          want_strategy, threads, validated, semantics, insert_mode, as_json, timings):
    """Decide whether Juliet wins on WORD."""
    obj = _load_json(game_path)
    w = _word(word_arg)
    mode = _replay(replay)
    t0 = time.perf_counter()
    if validated:
        if mode.k != 1:
            raise click.UsageError("--validated requires --replay none")
        G = load_validation_game(obj)
        verdict = validation_solve(G, w)
        report = RunReport(verdict, "validation",
                           timings={"total": time.perf_counter() - t0})
        return _emit(report, as_json, timings)
    if semantics == "insertion":
        G = load_insertion_game(obj)
        im = InsertionMode(insert_mode)
        if im == InsertionMode.GENERAL:
            verdict = insertion_oracle_solve(G, w, im)
            report = RunReport(verdict, "insertion-oracle",
                               timings={"total": time.perf_counter() - t0})
            return _emit(report, as_json, timings)
        R, w2 = insertion_to_replacement(G, w)
        rm = ReplayMode.unbounded() if im == InsertionMode.WEAK else ReplayMode.none()
        res = solve_game(R, w2, rm, pipeline=pipeline, method=method, threads=threads)
        report = RunReport(res.verdict, "insertion-to-replacement/" + res.pipeline,
                           res.iterations, res.timings, None, res.warnings)
        return _emit(report, as_json, timings)
    game = load_game(obj)
    res = solve_game(game, w, mode, pipeline=pipeline, method=method,
                     allow_bounded=allow_bounded, depth=depth, width=width, threads=threads)
    strategy, text = None, None
    if want_strategy and res.verdict == Verdict.JULIET:
        s = extract_strategy(game, w, mode)
        strategy, text = s.to_json(), str(s)
    report = RunReport(res.verdict, res.pipeline, res.iterations, res.timings, strategy,
                       res.warnings)
    return _emit(report, as_json, timings, text)


# -- oracle -----------------------------------------------------------------------------

@cli.command()
@game_opt
@word_opt
@replay_opt
@click.option("--validated", is_flag=True)
@click.option("--semantics", type=click.Choice(["replacement", "insertion"]),
              default="replacement", show_default=True)
@click.option("--insert-mode", type=click.Choice(["general", "weak", "none"]), default="weak",
              show_default=True)
@click.option("--max-steps", default=Limits().max_steps, show_default=True)
@json_opt
@timings_opt
def oracle(game_path, word_arg, replay, validated, semantics, insert_mode, max_steps, as_json,
           timings):
    """Brute-force minimax over concrete configurations."""
    obj = _load_json(game_path)
    w = _word(word_arg)
    mode = _replay(replay)
    limits = Limits(max_steps=max_steps)
    t0 = time.perf_counter()
    if validated:
        if mode.k != 1:
            raise click.UsageError("--validated requires --replay none")
        verdict = brute_force_validation_solve(load_validation_game(obj), w, limits)
    elif semantics == "insertion":
        verdict = insertion_oracle_solve(load_insertion_game(obj), w, InsertionMode(insert_mode),
                                         limits)
    else:
        verdict = brute_force_solve(load_game(obj), w, mode, limits, with_strategy=False).verdict
    return _emit(RunReport(verdict, "oracle", timings={"total": time.perf_counter() - t0}),
                 as_json, timings)


# -- effects ----------------------------------------------------------------------------

@cli.command()
@game_opt
@click.option("--max-k", type=int, default=None, help="Stop after C^k.")
@click.option("--method", type=click.Choice(["auto", "mix", "summary", "membership"]),
              default="auto", show_default=True)
@click.option("--threads", default=1, show_default=True)
def effects(game_path, max_k, method, threads):
    """Print the call effects C^k as JSON lines up to the fixpoint."""
    game = load_game(_load_json(game_path))
    for k, C in enumerate(call_effect_chain(game, max_k, method=method, threads=threads), 1):
        click.echo(json.dumps(C.to_json(k), ensure_ascii=False))
    return 0


# -- member -----------------------------------------------------------------------------

@cli.command()
@click.option("--anwa", "anwa_path", help="Alternating automaton JSON.")
@click.option("--sanwa", "sanwa_path", help="Simple alternating automaton JSON.")
@click.option("--nwa", "nwa_path", help="Nested word automaton JSON.")
@word_opt
def member(anwa_path, sanwa_path, nwa_path, word_arg):
    """Membership of a word; exit 0 if accepted, 1 otherwise."""
    given = [p for p in (anwa_path, sanwa_path, nwa_path) if p]
    if len(given) != 1:
        raise click.UsageError("give exactly one of --anwa, --sanwa, --nwa")
    w = _word(word_arg)
    if anwa_path:
        ok = anwa_membership(load_anwa(_load_json(anwa_path)), w)
    elif sanwa_path:
        ok = sanwa_verify(load_sanwa(_load_json(sanwa_path)), w)
    else:
        ok = accepts(load_automaton(_load_json(nwa_path)), w)
    click.echo("true" if ok else "false")
    return 0 if ok else 1


# -- schema -----------------------------------------------------------------------------

@cli.group()
def schema():
    """Tree grammars (DTD / XML Schema abstractions)."""


def _grammar(path, labels=()):
    return parse_grammar(_read_text(path), extra_labels=labels)


@schema.command()
@click.option("--grammar", "grammar_path", required=True)
@click.option("--labels", default="", help="Extra labels, comma separated.")
@click.option("--out", default=None, help="Output file (default stdout).")
def compile(grammar_path, labels, out):
    """Compile a single-type grammar into a simple DNWA (JSON)."""
    g = _grammar(grammar_path, [x for x in labels.split(",") if x])
    A = grammar_to_snwa(g)
    _write(out, json.dumps(A.to_json(), sort_keys=True, ensure_ascii=False))
    return 0


@schema.command()
@click.option("--grammar", "grammar_path", required=True)
def check(grammar_path):
    """Check determinism of content models and classify the grammar."""
    g = _grammar(grammar_path)
    c = classify_grammar(g)
    click.echo(f"kind: {c.kind.value}")
    if c.witness is not None:
        click.echo(f"witness: {c.witness}")
    return 0


# -- convert ----------------------------------------------------------------------------

@cli.command()
@click.option("--from", "src", type=click.Choice(["insertion", "replacement"]), required=True)
@click.option("--to", "dst", type=click.Choice(["insertion", "replacement"]), required=True)
@game_opt
@word_opt
@click.option("--out-game", default=None, help="Output game file (default stdout).")
@click.option("--out-word", default=None, help="Output word file (default stdout).")
def convert(src, dst, game_path, word_arg, out_game, out_word):
    """Translate between insertion and replacement games."""
    if src == dst:
        raise click.UsageError("--from and --to must differ")
    obj = _load_json(game_path)
    w = _word(word_arg)
    if src == "insertion":
        G, w2 = insertion_to_replacement(load_insertion_game(obj), w)
    else:
        G, w2 = replacement_to_insertion(load_game(obj), w)
    _write(out_game, G.dumps())
    _write(out_word, str(w2))
    return 0


# -- gen --------------------------------------------------------------------------------

@cli.group()
def gen():
    """Generate test instances."""


@gen.command("qbf")
@click.option("--formula", required=True, help="QDIMACS file.")
@click.option("--out-anwa", default=None)
@click.option("--out-word", default=None)
def gen_qbf(formula, out_anwa, out_word):
    """ANWA and word accepted iff the formula is true."""
    phi = testkit.parse_qdimacs(_read_text(formula))
    A, w = testkit.qbf_to_anwa(phi)
    _write(out_anwa, json.dumps(A.to_json(), sort_keys=True, ensure_ascii=False))
    _write(out_word, str(w))
    return 0


@gen.command("game")
@click.option("--seed", type=int, required=True)
@click.option("--out", default=None)
@click.option("--word-out", default=None, help="Also write a random input word.")
@click.option("--kind", type=click.Choice(["finite", "simple"]), default="finite",
              show_default=True)
def gen_game(seed, out, word_out, kind):
    """A random game (fully determined by --seed)."""
    game = (testkit.random_finite_game(testkit.GameParams(), seed) if kind == "finite"
            else testkit.random_simple_game(seed))
    _write(out, game.dumps())
    if word_out:
        _write(word_out, str(testkit.random_game_word(game, seed)))
    return 0


@gen.command("word")
@game_opt
@click.option("--seed", type=int, required=True)
@click.option("--max-length", default=10, show_default=True)
def gen_word(game_path, seed, max_length):
    """A random word over the game alphabet."""
    game = load_game(_load_json(game_path))
    click.echo(str(testkit.random_game_word(game, seed, max_length)))
    return 0


# -- play -------------------------------------------------------------------------------

@cli.command()
@game_opt
@word_opt
@replay_opt
@click.option("--side", type=click.Choice(["J", "R", "j", "r"]), default="J", show_default=True,
              help="The side you play.")
def play(game_path, word_arg, replay, side):
    """Play interactively against the engine."""
    game = load_game(_load_json(game_path))
    tr = interactive_play(game, _word(word_arg), side, _replay(replay),
                          input_fn=lambda prompt: click.prompt(prompt, prompt_suffix=" "),
                          output=click.echo)
    return CODES.get(tr.winner, 2)


# -- entry point ------------------------------------------------------------------------

def _setup_logging():
    level = os.environ.get("AXML_GAMES_LOG")
    if level:
        logging.basicConfig(level=level.upper(), stream=sys.stderr,
                            format="%(levelname)s %(name)s: %(message)s")


def main(argv=None) -> int:
    _setup_logging()
    try:
        rv = cli.main(args=argv, prog_name="axml-games", standalone_mode=False)
    except click.exceptions.Exit as e:
        return e.exit_code
    except click.exceptions.Abort:
        click.echo("aborted", err=True)
        return EXIT_USAGE
    except click.UsageError as e:
        e.show()
        return EXIT_USAGE
    except NotDeterministic as e:
        click.echo(f"error: {e}", err=True)
        return EXIT_DATA
    except (AxmlGamesError, json.JSONDecodeError, KeyError, ValueError) as e:
        click.echo(f"error: {type(e).__name__}: {e}", err=True)
        return EXIT_DATA
    except OSError as e:
        click.echo(f"error: {e}", err=True)
        return EXIT_IO
    return rv if isinstance(rv, int) else 0


if __name__ == "__main__":
    sys.exit(main())
