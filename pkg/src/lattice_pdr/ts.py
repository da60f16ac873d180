"""Finite transition systems over the powerset lattice."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable, Iterator

from .core import Heuristic, Mode, PdrState, ProblemInstance


@dataclass(frozen=True)
class StateSet:
    """A subset of ``{0, .., size-1}`` stored as a bitmask."""

    bits: int
    size: int

    def __post_init__(self) -> None:
        if self.bits < 0 or self.bits >> self.size:
            raise ValueError(f"bitmask {self.bits:b} out of range for {self.size} states")

    @classmethod
    def of(cls, size: int, members: Iterable[int]) -> StateSet:
        bits = 0
        for s in members:
            if not 0 <= s < size:
                raise IndexError(f"state {s} out of range for {size} states")
            bits |= 1 << s
        return cls(bits, size)

    @classmethod
    def empty(cls, size: int) -> StateSet:
        return cls(0, size)

    @classmethod
    def full(cls, size: int) -> StateSet:
        return cls((1 << size) - 1, size)

    def __contains__(self, s: int) -> bool:
        return 0 <= s < self.size and bool(self.bits >> s & 1)

    def __iter__(self) -> Iterator[int]:
        return (s for s in range(self.size) if self.bits >> s & 1)

    def __len__(self) -> int:
        return bin(self.bits).count("1")

    def __bool__(self) -> bool:
        return self.bits != 0

    def _check(self, other: object) -> bool:
        if not isinstance(other, StateSet):
            return False
        if other.size != self.size:
            raise ValueError("state sets over different state spaces")
        return True

    def __le__(self, other: object) -> bool:
        if not self._check(other):
            return NotImplemented
        return self.bits & ~other.bits == 0

    def __and__(self, other: StateSet) -> StateSet:
        if not self._check(other):
            return NotImplemented
        return StateSet(self.bits & other.bits, self.size)

    def __or__(self, other: StateSet) -> StateSet:
        if not self._check(other):
            return NotImplemented
        return StateSet(self.bits | other.bits, self.size)

    def complement(self) -> StateSet:
        return StateSet(~self.bits & ((1 << self.size) - 1), self.size)

    def __str__(self) -> str:
        return "{" + ",".join(map(str, self)) + "}"

    def __repr__(self) -> str:
        return f"StateSet({self})"


@dataclass(frozen=True)
class TransitionSystem:
    num_states: int
    initial: StateSet
    delta: tuple[StateSet, ...]
    safe: StateSet

    def __post_init__(self) -> None:
        if self.num_states < 1:
            raise ValueError("a transition system needs at least one state")
        if len(self.delta) != self.num_states:
            raise ValueError("delta must list successors for every state")
        for s in (self.initial, self.safe, *self.delta):
            if s.size != self.num_states:
                raise ValueError("state set over the wrong state space")

    @classmethod
    def build(
        cls,
        num_states: int,
        initial: Iterable[int],
        safe: Iterable[int],
        edges: Iterable[tuple[int, int]],
    ) -> TransitionSystem:
        succ = [0] * num_states
        for src, dst in edges:
            for v in (src, dst):
                if not 0 <= v < num_states:
                    raise IndexError(f"state {v} out of range for {num_states} states")
            succ[src] |= 1 << dst
        return cls(
            num_states,
            StateSet.of(num_states, initial),
            tuple(StateSet(b, num_states) for b in succ),
            StateSet.of(num_states, safe),
        )

    def edges(self) -> list[tuple[int, int]]:
        return [(s, t) for s in range(self.num_states) for t in self.delta[s]]

    def full(self) -> StateSet:
        return StateSet.full(self.num_states)

    def empty(self) -> StateSet:
        return StateSet.empty(self.num_states)


def post(ts: TransitionSystem, x: StateSet) -> StateSet:
    bits = 0
    for s in x:
        bits |= ts.delta[s].bits
    return StateSet(bits, ts.num_states)


def pre_tilde(ts: TransitionSystem, x: StateSet) -> StateSet:
    """States whose successors all lie in ``x`` (deadlocks included)."""
    bits = 0
    for s in range(ts.num_states):
        if ts.delta[s].bits & ~x.bits == 0:
            bits |= 1 << s
    return StateSet(bits, ts.num_states)


class TsInstance(ProblemInstance):
    mode = Mode.PLAIN

    def __init__(self, ts: TransitionSystem):
        self.ts = ts

    def pos_bot(self) -> StateSet:
        return self.ts.empty()

    def pos_top(self) -> StateSet:
        return self.ts.full()

    def initial(self) -> StateSet:
        return self.ts.initial

    def prop(self) -> StateSet:
        return self.ts.safe

    def forward(self, x: StateSet) -> StateSet:
        return post(self.ts, x)

    def backward(self, y: StateSet) -> StateSet:
        return pre_tilde(self.ts, y)

    def neg_contains_pos(self, x: StateSet, y: StateSet) -> bool:
        return x <= y

    def decide_covers(self, z: StateSet, y: StateSet) -> bool:
        return pre_tilde(self.ts, y) <= z


def ts_instance(ts: TransitionSystem) -> TsInstance:
    return TsInstance(ts)


class ConflictMode(enum.Enum):
    INITIAL = "initial"
    FINAL = "final"


class SimpleHeuristic(Heuristic):
    """Candidate ``P``, Decide ``G(y_k)``; Conflict is ``F(x_{k-1}) | I`` or ``y_k``."""

    def __init__(self, ts: TransitionSystem, conflict_mode: ConflictMode):
        self.ts = ts
        self.conflict_mode = conflict_mode
        self.name = "simple-init" if conflict_mode is ConflictMode.INITIAL else "simple-final"

    def choose_candidate(self, state: PdrState) -> StateSet:
        return self.ts.safe

    def choose_decide(self, state: PdrState) -> StateSet:
        return pre_tilde(self.ts, state.neg(state.k))

    def choose_conflict(self, state: PdrState) -> StateSet:
        if self.conflict_mode is ConflictMode.INITIAL:
            return post(self.ts, state.positive[state.k - 1]) | self.ts.initial
        return state.neg(state.k)


def heuristic_simple(ts: TransitionSystem, conflict_mode: ConflictMode) -> SimpleHeuristic:
    return SimpleHeuristic(ts, conflict_mode)
