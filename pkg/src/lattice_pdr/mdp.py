"""Max-reachability of Markov decision processes as a down-mode instance.

Positive elements are frames ``S -> [0,1]`` of exact rationals; negative
elements are lower sets cut out of the box by one linear inequality.
"""

from __future__ import annotations

import enum
import itertools
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Iterable, Iterator, Optional, Sequence

from .core import EMPTY, Heuristic, Mode, PdrError, PdrState, ProblemInstance, rat_parse
from .ts import StateSet

Scheduler = tuple[int, ...]

_ZERO = Fraction(0)
_ONE = Fraction(1)


class EmptySet(PdrError):
    """An operation that needs a nonempty half-space received an empty one."""


@dataclass(frozen=True)
class Frame:
    values: tuple[Fraction, ...]

    def __post_init__(self) -> None:
        for v in self.values:
            if not 0 <= v <= 1:
                raise ValueError(f"frame entry {v} outside [0,1]")

    @classmethod
    def of(cls, values: Iterable[Any]) -> Frame:
        return cls(tuple(Fraction(v) for v in values))

    @classmethod
    def zeros(cls, n: int) -> Frame:
        return cls((_ZERO,) * n)

    @classmethod
    def ones(cls, n: int) -> Frame:
        return cls((_ONE,) * n)

    def __len__(self) -> int:
        return len(self.values)

    def __getitem__(self, s: int) -> Fraction:
        return self.values[s]

    def __iter__(self) -> Iterator[Fraction]:
        return iter(self.values)

    def __le__(self, other: object) -> bool:
        if not isinstance(other, Frame):
            return NotImplemented
        return all(a <= b for a, b in zip(self.values, other.values))

    def __and__(self, other: Frame) -> Frame:
        if not isinstance(other, Frame):
            return NotImplemented
        return Frame(tuple(min(a, b) for a, b in zip(self.values, other.values)))

    def __or__(self, other: Frame) -> Frame:
        if not isinstance(other, Frame):
            return NotImplemented
        return Frame(tuple(max(a, b) for a, b in zip(self.values, other.values)))

    def __str__(self) -> str:
        return "[" + ",".join(str(v) for v in self.values) + "]"

    def __repr__(self) -> str:
        return f"Frame({self})"


@dataclass(frozen=True)
class Action:
    label: str
    dist: tuple[tuple[int, Fraction], ...]


@dataclass(frozen=True)
class Mdp:
    num_states: int
    actions: tuple[tuple[Action, ...], ...]
    initial: int
    bad: StateSet
    lam: Fraction

    def __post_init__(self) -> None:
        n = self.num_states
        if n < 1:
            raise ValueError("an MDP needs at least one state")
        if len(self.actions) != n:
            raise ValueError("actions must be listed for every state")
        if not 0 <= self.initial < n:
            raise IndexError(f"initial state {self.initial} out of range")
        if self.bad.size != n:
            raise ValueError("bad set over the wrong state space")
        if not 0 <= self.lam <= 1:
            raise ValueError(f"threshold {self.lam} outside [0,1]")
        for s, acts in enumerate(self.actions):
            if not acts:
                raise ValueError(f"state {s} has no action")
            for a in acts:
                for t, p in a.dist:
                    if not 0 <= t < n:
                        raise IndexError(f"target {t} out of range")
                    if p <= 0:
                        raise ValueError(f"nonpositive probability {p} at state {s} action {a.label}")
                if sum(p for _, p in a.dist) != 1:
                    raise ValueError(f"distribution of state {s} action {a.label} does not sum to 1")

    def states(self) -> range:
        return range(self.num_states)

    def schedulers(self) -> Iterator[Scheduler]:
        return itertools.product(*(range(len(a)) for a in self.actions))

    def num_schedulers(self) -> int:
        total = 1
        for a in self.actions:
            total *= len(a)
        return total


def _expect(dist: tuple[tuple[int, Fraction], ...], d: Sequence[Fraction]) -> Fraction:
    return sum((p * d[t] for t, p in dist), _ZERO)


def bellman(mdp: Mdp, d: Frame) -> Frame:
    return Frame(
        tuple(
            _ONE if s in mdp.bad else max(_expect(a.dist, d.values) for a in mdp.actions[s])
            for s in mdp.states()
        )
    )


def bellman_sched(mdp: Mdp, alpha: Scheduler, d: Frame) -> Frame:
    return Frame(
        tuple(
            _ONE if s in mdp.bad else _expect(mdp.actions[s][alpha[s]].dist, d.values)
            for s in mdp.states()
        )
    )


def argmax_scheduler(mdp: Mdp, d: Frame) -> Scheduler:
    """Pointwise maximizing actions; ties go to the first declared action."""
    choice = []
    for s in mdp.states():
        best, best_val = 0, None
        for i, a in enumerate(mdp.actions[s]):
            v = _expect(a.dist, d.values)
            if best_val is None or v > best_val:
                best, best_val = i, v
        choice.append(best)
    return tuple(choice)


_HS_TERM = re.compile(r"s(\d+):(\S+)")
_HS_FORM = re.compile(r"sum\{(.*)\}\s*<=\s*(\S+)")


@dataclass(frozen=True)
class HalfSpaceDownSet:
    """``{d in [0,1]^S | sum_s coeffs[s] * d(s) <= bound}``.

    Empty sets are normalized to zero coefficients and bound ``-1``. The
    optional scheduler records how a Decide obligation was obtained; it is
    not part of the value.
    """

    coeffs: tuple[Fraction, ...]
    bound: Fraction
    scheduler: Optional[Scheduler] = field(default=None, compare=False, hash=False)

    def __post_init__(self) -> None:
        if any(c < 0 for c in self.coeffs):
            raise ValueError("half-space coefficients must be nonnegative")
        if self.bound < 0 and (self.bound != -1 or any(self.coeffs)):
            object.__setattr__(self, "coeffs", (_ZERO,) * len(self.coeffs))
            object.__setattr__(self, "bound", Fraction(-1))

    @classmethod
    def of(cls, coeffs: Iterable[Any], bound: Any) -> HalfSpaceDownSet:
        return cls(tuple(Fraction(c) for c in coeffs), Fraction(bound))

    @property
    def is_empty(self) -> bool:
        return self.bound < 0

    def __len__(self) -> int:
        return len(self.coeffs)

    def __contains__(self, d: Frame) -> bool:
        return hs_member(self, d)

    def __str__(self) -> str:
        terms = " ".join(f"s{s}:{c}" for s, c in enumerate(self.coeffs) if c != 0)
        return f"sum{{ {terms} }} <= {self.bound}" if terms else f"sum{{ }} <= {self.bound}"

    @classmethod
    def parse(cls, text: str, num_states: int) -> HalfSpaceDownSet:
        m = _HS_FORM.fullmatch(text.strip())
        if not m:
            raise ValueError(f"not a half-space: {text!r}")
        coeffs = [_ZERO] * num_states
        body = m.group(1).split()
        for tok in body:
            tm = _HS_TERM.fullmatch(tok)
            if not tm or int(tm.group(1)) >= num_states:
                raise ValueError(f"bad half-space term {tok!r}")
            coeffs[int(tm.group(1))] = rat_parse(tm.group(2))
        return cls(tuple(coeffs), rat_parse(m.group(2)))


def hs_member(h: HalfSpaceDownSet, d: Frame) -> bool:
    return sum((r * v for r, v in zip(h.coeffs, d.values) if r), _ZERO) <= h.bound


def hs_transform(mdp: Mdp, alpha: Scheduler, h: HalfSpaceDownSet) -> HalfSpaceDownSet:
    """The exact pullback ``{d | bellman_sched(alpha, d) in h}``."""
    coeffs = [_ZERO] * mdp.num_states
    bound = h.bound
    for s, r in enumerate(h.coeffs):
        if not r:
            continue
        if s in mdp.bad:
            bound -= r
            continue
        for t, p in mdp.actions[s][alpha[s]].dist:
            coeffs[t] += r * p
    return HalfSpaceDownSet(tuple(coeffs), bound, scheduler=tuple(alpha))


def hs_max_linear(h: HalfSpaceDownSet, weights: Sequence[Fraction]) -> Fraction:
    """Maximum of ``sum w_s d(s)`` over ``h`` by the fractional-knapsack greedy."""
    if h.is_empty:
        raise EmptySet("maximum over an empty half-space")
    total = _ZERO
    weighted = []
    for s, (r, w) in enumerate(zip(h.coeffs, weights)):
        if w < 0:
            raise ValueError("weights must be nonnegative")
        if r == 0:
            total += w
        elif w > 0:
            weighted.append((w / r, s))
    budget = h.bound
    for _, s in sorted(weighted, key=lambda e: (-e[0], e[1])):
        if budget <= 0:
            break
        r = h.coeffs[s]
        take = min(_ONE, budget / r)
        total += weights[s] * take
        budget -= r * take
    return total


def hs_contains(a: HalfSpaceDownSet, b: HalfSpaceDownSet) -> bool:
    """Whether ``a`` is a subset of ``b``."""
    if a.is_empty:
        return True
    if b.is_empty:
        return False
    return hs_max_linear(a, b.coeffs) <= b.bound


def hs_equal(a: HalfSpaceDownSet, b: HalfSpaceDownSet) -> bool:
    return hs_contains(a, b) and hs_contains(b, a)


def _constrained_points(h: HalfSpaceDownSet, lower: Frame) -> tuple[list[int], list[tuple[Fraction, ...]], bool]:
    """Generators projected on the coordinates with a positive coefficient.

    Returns those coordinates, the projected points dominating ``lower``, and
    whether the remaining coordinates are free (tight face) or fixed at 1.
    """
    r, bound = h.coeffs, h.bound
    cs = [s for s, c in enumerate(r) if c > 0]
    if sum((r[s] for s in cs), _ZERO) <= bound:
        # 1 lies in h: the box itself, whose only maximal point is 1
        return cs, [(_ONE,) * len(cs)], False

    points = []
    forced = {s for s in cs if lower[s] > 0}
    for frac in [None, *cs]:
        base = sum((r[s] for s in forced if s != frac), _ZERO)
        cap = bound - base
        if cap < 0:
            continue
        free = [s for s in cs if s != frac and s not in forced]

        def subsets(i: int, used: Fraction, chosen: list[int]) -> Iterator[tuple[list[int], Fraction]]:
            if i == len(free):
                yield chosen, used
                return
            yield from subsets(i + 1, used, chosen)
            s = free[i]
            if used + r[s] <= cap:
                chosen.append(s)
                yield from subsets(i + 1, used + r[s], chosen)
                chosen.pop()

        for chosen, used in subsets(0, _ZERO, []):
            rest = cap - used
            ones = forced.union(chosen)
            if frac is None:
                if rest != 0:
                    continue
                points.append(tuple(_ONE if s in ones else _ZERO for s in cs))
            else:
                v = rest / r[frac]
                if not (0 < v < 1 and v >= lower[frac]):
                    continue
                ones.discard(frac)
                points.append(tuple(v if s == frac else _ONE if s in ones else _ZERO for s in cs))
    return cs, points, True


def enumerate_dominating_generators(h: HalfSpaceDownSet, lower: Frame) -> list[Frame]:
    """Generators of ``h`` that lie above ``lower``, in lexicographic order.

    When the all-ones frame is in ``h`` the only generator is that frame.
    Otherwise the generators are the vertices on the face where the
    inequality is tight: every constrained coordinate is 0 or 1 except at
    most one, and coordinates with a zero coefficient range over {0, 1}.
    """
    if h.is_empty:
        raise EmptySet("generators of an empty half-space")
    n = len(h.coeffs)
    cs, points, free = _constrained_points(h, lower)
    if not free:
        return [Frame.ones(n)] if lower <= Frame.ones(n) else []
    zc = [s for s in range(n) if s not in cs]
    zc_choices = [(_ONE,) if lower[s] > 0 else (_ZERO, _ONE) for s in zc]
    out = []
    for p in points:
        for rest in itertools.product(*zc_choices):
            vals = [_ZERO] * n
            for s, v in zip(cs, p):
                vals[s] = v
            for s, v in zip(zc, rest):
                vals[s] = v
            out.append(Frame(tuple(vals)))
    out.sort(key=lambda f: f.values)
    return out


class ConflictChoice(enum.Enum):
    B = "B"
    ZERO_ONE = "01"


def conflict_z(mdp: Mdp, x_prev: Any, h: HalfSpaceDownSet, mode: ConflictChoice) -> Frame:
    """The hCoB / hCo01 Conflict choice.

    Takes the meet of the dominating generators on constrained coordinates;
    elsewhere it keeps ``b(x_prev)``, rounded up to 0/1 in ``ZERO_ONE`` mode.
    """
    lower = Frame.zeros(mdp.num_states) if x_prev is EMPTY else bellman(mdp, x_prev)
    cs, points, _ = _constrained_points(h, lower)
    if not points:
        return lower
    vals = list(lower.values)
    for i, s in enumerate(cs):
        vals[s] = min(p[i] for p in points)
    if mode is ConflictChoice.ZERO_ONE:
        for s in range(mdp.num_states):
            if h.coeffs[s] == 0 and vals[s] > 0:
                vals[s] = _ONE
    return Frame(tuple(vals))


class MdpInstance(ProblemInstance):
    """``mu b <= p`` where ``p`` caps the initial state at the threshold."""

    mode = Mode.DOWN

    def __init__(self, mdp: Mdp):
        self.mdp = mdp
        n = mdp.num_states
        self._bot = Frame.zeros(n)
        self._top = Frame.ones(n)
        self._p = Frame(tuple(mdp.lam if s == mdp.initial else _ONE for s in range(n)))
        self._p_down = HalfSpaceDownSet(
            tuple(_ONE if s == mdp.initial else _ZERO for s in range(n)), mdp.lam
        )

    def pos_bot(self) -> Frame:
        return self._bot

    def pos_top(self) -> Frame:
        return self._top

    def initial(self) -> Frame:
        return self._bot

    def prop(self) -> Frame:
        return self._p

    def p_down(self) -> HalfSpaceDownSet:
        return self._p_down

    def forward(self, x: Frame) -> Frame:
        return bellman(self.mdp, x)

    def image(self, x: Any) -> Frame:
        return self._bot if x is EMPTY else bellman(self.mdp, x)

    def under_p(self, x: Frame) -> bool:
        return x[self.mdp.initial] <= self.mdp.lam

    def neg_contains_pos(self, x: Frame, y: HalfSpaceDownSet) -> bool:
        return hs_member(y, x)

    def neg_refutes(self, y: HalfSpaceDownSet) -> bool:
        return y.is_empty

    def decide_covers(self, z: HalfSpaceDownSet, y: HalfSpaceDownSet) -> bool:
        # z must be the scheduler pullback of y, which contains the exact one
        return z.scheduler is not None and z == hs_transform(self.mdp, z.scheduler, y)


def mdp_instance(mdp: Mdp) -> MdpInstance:
    return MdpInstance(mdp)


class MdpHeuristic(Heuristic):
    """Candidate ``p``-down and the argmax scheduler pullback for Decide."""

    names = {ConflictChoice.B: "hcob", ConflictChoice.ZERO_ONE: "hco01", None: "mdp-simple-init"}

    def __init__(self, mdp: Mdp, conflict: Optional[ConflictChoice]):
        self.mdp = mdp
        self.instance = MdpInstance(mdp)
        self.conflict = conflict
        self.name = self.names[conflict]

    def choose_candidate(self, state: PdrState) -> HalfSpaceDownSet:
        return self.instance.p_down()

    def choose_decide(self, state: PdrState) -> HalfSpaceDownSet:
        x = state.positive[state.k - 1]
        lower = self.instance.pos_bot() if x is EMPTY else x
        alpha = argmax_scheduler(self.mdp, lower)
        return hs_transform(self.mdp, alpha, state.neg(state.k))

    def choose_conflict(self, state: PdrState) -> Frame:
        x = state.positive[state.k - 1]
        if self.conflict is None:
            return self.instance.image(x)
        return conflict_z(self.mdp, x, state.neg(state.k), self.conflict)


def mdp_heuristics(mdp: Mdp) -> dict[str, MdpHeuristic]:
    return {h.name: h for h in (MdpHeuristic(mdp, c) for c in (ConflictChoice.B, ConflictChoice.ZERO_ONE, None))}
