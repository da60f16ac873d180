"""Text formats for models, plus the bundled example models."""

from __future__ import annotations

from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Union

from .core import MalformedRational, PdrError, rat_parse
from .mdp import Action, Mdp
from .ts import StateSet, TransitionSystem

Model = Union[TransitionSystem, Mdp]

BUNDLED_MODELS = ("fig1.ts", "example3.mdp", "example6.mdp")


class ParseError(PdrError):
    def __init__(self, line: int, reason: str):
        super().__init__(f"line {line}: {reason}")
        self.line = line
        self.reason = reason


class IndexOutOfRange(ParseError):
    pass


class ProbabilitySumMismatch(ParseError):
    def __init__(self, line: int, state: int, label: str, total: Fraction):
        super().__init__(line, f"probabilities of state {state} action {label} sum to {total}, not 1")
        self.state = state
        self.label = label
        self.total = total


class NoActionForState(ParseError):
    def __init__(self, state: int):
        super().__init__(0, f"state {state} has no action")
        self.state = state


def _lines(text: str) -> list[tuple[int, list[str]]]:
    out = []
    for no, raw in enumerate(text.splitlines(), start=1):
        words = raw.split("#", 1)[0].split()
        if words:
            out.append((no, words))
    return out


def _int(word: str, line: int) -> int:
    try:
        return int(word)
    except ValueError:
        raise ParseError(line, f"expected an integer, got {word!r}") from None


def _state(word: str, line: int, n: int) -> int:
    s = _int(word, line)
    if not 0 <= s < n:
        raise IndexOutOfRange(line, f"state {s} out of range for {n} states")
    return s


def _header(lines: list[tuple[int, list[str]]], kind: str) -> int:
    if not lines or lines[0][1] != [kind]:
        raise ParseError(lines[0][0] if lines else 1, f"first line must be {kind!r}")
    if len(lines) < 2 or lines[1][1][0] != "states" or len(lines[1][1]) != 2:
        raise ParseError(lines[1][0] if len(lines) > 1 else 1, "expected 'states <n>'")
    n = _int(lines[1][1][1], lines[1][0])
    if n < 1:
        raise ParseError(lines[1][0], "need at least one state")
    return n


def parse_ts(text: str) -> TransitionSystem:
    lines = _lines(text)
    n = _header(lines, "ts")
    initial: list[int] | None = None
    safe: list[int] | None = None
    edges = []
    for no, words in lines[2:]:
        key, args = words[0], words[1:]
        if key == "initial":
            initial = [_state(w, no, n) for w in args]
        elif key == "safe":
            safe = [_state(w, no, n) for w in args]
        elif key == "edge":
            if len(args) != 2:
                raise ParseError(no, "expected 'edge <src> <dst>'")
            edges.append((_state(args[0], no, n), _state(args[1], no, n)))
        else:
            raise ParseError(no, f"unknown directive {key!r}")
    if initial is None or safe is None:
        raise ParseError(lines[-1][0], "missing 'initial' or 'safe' line")
    return TransitionSystem.build(n, initial, safe, edges)


def parse_mdp(text: str) -> Mdp:
    lines = _lines(text)
    n = _header(lines, "mdp")
    initial: int | None = None
    bad: list[int] | None = None
    lam: Fraction | None = None
    actions: list[list[Action]] = [[] for _ in range(n)]
    for no, words in lines[2:]:
        key, args = words[0], words[1:]
        try:
            if key == "initial":
                if len(args) != 1:
                    raise ParseError(no, "expected 'initial <state>'")
                initial = _state(args[0], no, n)
            elif key == "bad":
                bad = [_state(w, no, n) for w in args]
            elif key == "lambda":
                if len(args) != 1:
                    raise ParseError(no, "expected 'lambda <rational>'")
                lam = rat_parse(args[0])
                if not 0 <= lam <= 1:
                    raise ParseError(no, f"lambda {lam} outside [0,1]")
            elif key == "action":
                if len(args) < 3:
                    raise ParseError(no, "expected 'action <state> <label> <target>:<prob> ...'")
                s, label = _state(args[0], no, n), args[1]
                if any(a.label == label for a in actions[s]):
                    raise ParseError(no, f"duplicate action {label!r} at state {s}")
                dist: dict[int, Fraction] = {}
                for tok in args[2:]:
                    target, sep, prob = tok.partition(":")
                    if not sep:
                        raise ParseError(no, f"expected <target>:<prob>, got {tok!r}")
                    t = _state(target, no, n)
                    p = rat_parse(prob)
                    if p <= 0:
                        raise ParseError(no, f"probability {p} must be positive")
                    if t in dist:
                        raise ParseError(no, f"target {t} listed twice")
                    dist[t] = p
                total = sum(dist.values(), Fraction(0))
                if total != 1:
                    raise ProbabilitySumMismatch(no, s, label, total)
                actions[s].append(Action(label, tuple(dist.items())))
            else:
                raise ParseError(no, f"unknown directive {key!r}")
        except MalformedRational as exc:
            raise ParseError(no, str(exc)) from None
    if initial is None or bad is None or lam is None:
        raise ParseError(lines[-1][0], "missing 'initial', 'bad' or 'lambda' line")
    for s, acts in enumerate(actions):
        if not acts:
            raise NoActionForState(s)
    return Mdp(n, tuple(map(tuple, actions)), initial, StateSet.of(n, bad), lam)


def serialize_ts(ts: TransitionSystem) -> str:
    out = ["ts", f"states {ts.num_states}"]
    out.append(" ".join(["initial", *map(str, ts.initial)]))
    out.append(" ".join(["safe", *map(str, ts.safe)]))
    out += [f"edge {s} {t}" for s, t in ts.edges()]
    return "\n".join(out) + "\n"


def serialize_mdp(mdp: Mdp) -> str:
    out = ["mdp", f"states {mdp.num_states}", f"initial {mdp.initial}"]
    out.append(" ".join(["bad", *map(str, mdp.bad)]))
    out.append(f"lambda {mdp.lam}")
    for s, acts in enumerate(mdp.actions):
        for a in acts:
            out.append(" ".join([f"action {s} {a.label}", *(f"{t}:{p}" for t, p in a.dist)]))
    return "\n".join(out) + "\n"


def parse_model(text: str) -> Model:
    lines = _lines(text)
    kind = lines[0][1][0] if lines else None
    if kind == "ts":
        return parse_ts(text)
    if kind == "mdp":
        return parse_mdp(text)
    raise ParseError(lines[0][0] if lines else 1, "first line must be 'ts' or 'mdp'")


def serialize_model(model: Model) -> str:
    return serialize_ts(model) if isinstance(model, TransitionSystem) else serialize_mdp(model)


def load_model(path: Union[str, Path]) -> Model:
    return parse_model(Path(path).read_text())


def bundled_model_text(name: str) -> str:
    return resources.files("lattice_pdr").joinpath("models", name).read_text()


def bundled_model(name: str) -> Model:
    return parse_model(bundled_model_text(name))
