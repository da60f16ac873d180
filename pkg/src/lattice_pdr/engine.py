"""The four-rule PDR state machine and its invariant checker."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Any, Collection, Iterable, Optional, Sequence

from .core import (
    EMPTY,
    Heuristic,
    HeuristicViolation,
    Holds,
    Index,
    Mode,
    PdrError,
    PdrState,
    ProblemInstance,
    Refuted,
    Unknown,
    UnknownReason,
    Verdict,
)


class Rule(enum.Enum):
    UNFOLD = "U"
    CANDIDATE = "Ca"
    DECIDE = "D"
    CONFLICT = "Co"

    def __str__(self) -> str:
        return self.value


class Status(enum.Enum):
    HOLDS = "Holds"
    VIOLATED = "Violated"
    NOT_CHECKABLE = "NotCheckable"


INVARIANT_IDS = ("I0", "I1", "I2", "P1", "P2", "P3", "P3a", "N1", "N2", "PN", "A1", "A2", "A3")


@dataclass(frozen=True)
class TraceEvent:
    step_number: int
    rule: Rule
    index_before: Index
    index_after: Index
    chosen: Optional[str]
    state_after: Optional[PdrState] = None
    witness: Any = None
    element: Any = None

    def line(self) -> str:
        chosen = "-" if self.chosen is None else self.chosen
        n, k = self.index_after.n, self.index_after.k
        return f"step={self.step_number} rule={self.rule} n={n} k={k} chosen={chosen}"


@dataclass
class Trace:
    initial: PdrState
    events: list[TraceEvent] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.events)

    def __iter__(self):
        return iter(self.events)

    def states(self) -> list[PdrState]:
        """All visited states, starting with the initial one.

        Only available when the run retained states.
        """
        out = [self.initial]
        for ev in self.events:
            if ev.state_after is None:
                raise ValueError("trace was recorded without states")
            out.append(ev.state_after)
        return out

    def rule_counts(self) -> dict[Rule, int]:
        counts = {r: 0 for r in Rule}
        for ev in self.events:
            counts[ev.rule] += 1
        return counts

    def format(self) -> str:
        return "".join(ev.line() + "\n" for ev in self.events)


def init_state(instance: ProblemInstance) -> PdrState:
    return instance.initial_state()


def _holds_scan(state: PdrState, instance: ProblemInstance) -> Optional[Holds]:
    xs = state.positive
    # Nothing is below the down-mode sentinel, so x_1 <= x_0 never fires there.
    start = 1 if instance.mode is Mode.DOWN else 0
    for j in range(start, state.n - 1):
        if xs[j + 1] <= xs[j]:
            return Holds(xs[j + 1], j + 1)
    return None


def classify(state: PdrState, instance: ProblemInstance) -> Verdict | Rule:
    """Return the conclusive verdict of ``state`` or the unique enabled rule."""
    holds = _holds_scan(state, instance)
    if holds is not None:
        return holds
    if state.negative and state.k == 1 and instance.neg_refutes(state.neg(1)):
        return Refuted(state.negative)

    xs, n, k = state.positive, state.n, state.k
    empty = not state.negative
    under = empty and instance.under_p(xs[n - 1])
    inside = (not empty) and instance.b_image_in(xs[k - 1], state.neg(k))
    guards = {
        Rule.UNFOLD: empty and under,
        Rule.CANDIDATE: empty and not under,
        Rule.DECIDE: (not empty) and not inside,
        Rule.CONFLICT: (not empty) and inside,
    }
    enabled = [r for r, g in guards.items() if g]
    assert len(enabled) == 1, f"guards not exclusive: {enabled}"
    return enabled[0]


def apply_rule(
    state: PdrState,
    rule: Rule,
    instance: ProblemInstance,
    heuristic: Heuristic,
    checked: bool = False,
) -> tuple[PdrState, Any]:
    """Fire ``rule`` on ``state``; returns the successor and the chosen element.

    With ``checked`` set, the heuristic's choice is validated against the
    rule's side conditions and ``HeuristicViolation`` is raised on failure.
    """
    xs, ys, n, k = state.positive, state.negative, state.n, state.k

    if rule is Rule.UNFOLD:
        return PdrState(xs + (instance.pos_top(),), (), Index(n + 1, n + 1)), None

    if rule is Rule.CANDIDATE:
        z = heuristic.choose_candidate(state)
        if z is None:
            return state, None
        if checked:
            if instance.neg_contains_pos(xs[n - 1], z):
                raise HeuristicViolation(rule, "x_{n-1} must lie outside the candidate")
            if not instance.neg_contains_pos(instance.prop(), z):
                raise HeuristicViolation(rule, "the candidate must contain p")
        return PdrState(xs, (z,), Index(n, n - 1)), z

    if rule is Rule.DECIDE:
        z = heuristic.choose_decide(state)
        if z is None:
            return state, None
        if checked:
            if instance.neg_contains_pos(xs[k - 1], z):
                raise HeuristicViolation(rule, "x_{k-1} must lie outside the new obligation")
            if not instance.decide_covers(z, ys[0]):
                raise HeuristicViolation(rule, "the new obligation must cover the pullback of y_k")
        return PdrState(xs, (z,) + ys, Index(n, k - 1)), z

    z = heuristic.choose_conflict(state)
    if z is None:
        return state, None
    if checked:
        if not instance.neg_contains_pos(z, ys[0]):
            raise HeuristicViolation(rule, "z must lie in y_k")
        if not instance.image(xs[k - 1] & z) <= z:
            raise HeuristicViolation(rule, "b(x_{k-1} meet z) must be below z")
    met = tuple(x & z for x in xs[: k + 1]) + xs[k + 1 :]
    return PdrState(met, ys[1:], Index(n, k + 1)), z


def solve(
    instance: ProblemInstance,
    heuristic: Heuristic,
    budget: int = 100_000,
    checked: bool = False,
    record_states: bool = True,
) -> tuple[Verdict, Trace]:
    if budget < 1:
        raise ValueError("budget must be positive")
    state = init_state(instance)
    trace = Trace(state)
    for step in range(1, budget + 1):
        outcome = classify(state, instance)
        if not isinstance(outcome, Rule):
            return _verified(outcome, instance), trace
        new_state, chosen = apply_rule(state, outcome, instance, heuristic, checked)
        if new_state is state:
            return Unknown(UnknownReason.HEURISTIC_FAILURE), trace
        rendered = None
        if chosen is not None:
            rendered = (
                instance.format_neg(chosen)
                if outcome in (Rule.CANDIDATE, Rule.DECIDE)
                else instance.format_pos(chosen)
            )
        trace.events.append(
            TraceEvent(
                step_number=step,
                rule=outcome,
                index_before=state.index,
                index_after=new_state.index,
                chosen=rendered,
                state_after=new_state if record_states else None,
                witness=getattr(chosen, "scheduler", None),
                element=chosen,
            )
        )
        state = new_state
    outcome = classify(state, instance)
    if not isinstance(outcome, Rule):
        return _verified(outcome, instance), trace
    return Unknown(UnknownReason.BUDGET_EXHAUSTED), trace


def _verified(verdict: Verdict, instance: ProblemInstance) -> Verdict:
    if isinstance(verdict, Holds):
        w = verdict.witness
        if not (instance.image(w) <= w and instance.under_p(w)):
            raise PdrError("positive verdict failed re-verification")
    elif isinstance(verdict, Refuted):
        if not instance.neg_refutes(verdict.witness[0]):
            raise PdrError("negative verdict failed re-verification")
    return verdict


def _status(ok: bool) -> Status:
    return Status.HOLDS if ok else Status.VIOLATED


def check_state(
    state: PdrState,
    instance: ProblemInstance,
    invariants: Optional[Collection[str]] = None,
) -> dict[str, Status]:
    """Evaluate the decidable invariants of ``state`` (all, or just ``invariants``).

    Down-mode instances have no right adjoint on frames, so ``P3a`` and
    ``A3`` are reported as not checkable there and ``A1`` covers only the
    lower bound by the initial chain.
    """
    wanted = set(INVARIANT_IDS if invariants is None else invariants)
    unknown = wanted - set(INVARIANT_IDS)
    if unknown:
        raise ValueError(f"unknown invariants: {sorted(unknown)}")
    full = _check_basic(state, instance)
    if wanted & {"A1", "A2", "A3"}:
        full.update(_check_chains(state, instance, wanted))
    return {inv: full[inv] for inv in INVARIANT_IDS if inv in wanted}


def _check_basic(state: PdrState, instance: ProblemInstance) -> dict[str, Status]:
    xs, n, k = state.positive, state.n, state.k
    plain = instance.mode is Mode.PLAIN
    p = instance.prop()
    out: dict[str, Status] = {}

    out["I0"] = _status(xs[0] == instance.pos_bot() if plain else xs[0] is EMPTY)
    out["I1"] = _status(1 <= k <= n and len(state.negative) == n - k)
    out["I2"] = _status(all(xs[j] <= xs[j + 1] for j in range(n - 1)))
    out["P1"] = _status(instance.initial() <= xs[1])
    out["P2"] = _status(xs[n - 2] <= p)
    out["P3"] = _status(all(instance.fwd(xs[j]) <= xs[j + 1] for j in range(n - 1)))
    if plain:
        out["P3a"] = _status(all(xs[j] <= instance.backward(xs[j + 1]) for j in range(n - 1)))
    else:
        out["P3a"] = Status.NOT_CHECKABLE

    if state.negative:
        out["N1"] = _status(instance.neg_contains_pos(p, state.neg(n - 1)))
    else:
        out["N1"] = Status.HOLDS
    out["N2"] = _status(
        all(instance.decide_covers(state.neg(j), state.neg(j + 1)) for j in range(k, n - 1))
    )
    out["PN"] = _status(
        all(not instance.neg_contains_pos(xs[j], state.neg(j)) for j in range(k, n))
    )
    return out


def _check_chains(state: PdrState, instance: ProblemInstance, wanted: set[str]) -> dict[str, Status]:
    xs, n, k = state.positive, state.n, state.k
    plain = instance.mode is Mode.PLAIN
    p = instance.prop()
    out: dict[str, Status] = {}

    # initial chain: c_0 = x_0's bottom, c_{j+1} = b(c_j)
    lower = [xs[0] if not plain else instance.pos_bot()]
    for _ in range(n - 1):
        lower.append(instance.image(lower[-1]))
    a1 = all(lower[j] <= xs[j] for j in range(n))

    if plain:
        # final chain of g & p, and the plain powers g^m(p)
        upper = [instance.pos_top()]
        gp = [p]
        for _ in range(n - 1):
            upper.append(instance.backward(upper[-1]) & p)
            gp.append(instance.backward(gp[-1]))
        a1 = a1 and all(xs[j] <= upper[n - 1 - j] for j in range(n))
        out["A1"] = _status(a1)
        out["A2"] = _status(all(xs[j - 1] <= gp[n - 1 - j] for j in range(1, n)))
        out["A3"] = _status(all(gp[n - 1 - j] <= state.neg(j) for j in range(k, n)))
    else:
        out["A1"] = _status(a1)
        if "A2" in wanted:
            out["A2"] = _status(all(_in_pullback_power(instance, xs[j - 1], n - 1 - j) for j in range(1, n)))
        out["A3"] = Status.NOT_CHECKABLE
    return out


def _in_pullback_power(instance: ProblemInstance, x: Any, m: int) -> bool:
    # x in (b_r)^m(p-down)  iff  b^m(x) <= p
    if x is EMPTY:
        return True
    for _ in range(m):
        x = instance.forward(x)
    return x <= instance.prop()


@dataclass
class InvariantReport:
    steps: list[dict[str, Status]]

    def violations(self) -> list[tuple[int, str]]:
        return [
            (i, inv)
            for i, row in enumerate(self.steps)
            for inv, status in row.items()
            if status is Status.VIOLATED
        ]

    @property
    def ok(self) -> bool:
        return not self.violations()


def check_invariants(
    trace: Trace | Sequence[PdrState],
    instance: ProblemInstance,
    invariants: Optional[Collection[str]] = None,
) -> InvariantReport:
    states = trace.states() if isinstance(trace, Trace) else list(trace)
    return InvariantReport([check_state(s, instance, invariants) for s in states])


def detect_repeat(trace: Trace | Iterable[PdrState]) -> Optional[tuple[int, int]]:
    """First pair ``(i, j)`` of identical states, or ``None``."""
    states = trace.states() if isinstance(trace, Trace) else trace
    seen: dict[PdrState, int] = {}
    for j, s in enumerate(states):
        if s in seen:
            return seen[s], j
        seen[s] = j
    return None
