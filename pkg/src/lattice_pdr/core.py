"""Scalar type, PDR configurations and the interfaces the engine is generic over.

Lattice elements handed to the engine are plain Python values that implement
the partial order with ``<=``, the meet with ``&`` and the join with ``|``.
Positive elements are ``StateSet`` (powerset lattice) or ``Frame`` (the
``[0,1]^S`` lattice); negative elements are whatever the instance says they
are. ``EMPTY`` is the bottom lower set used as ``x_0`` in down mode.
"""

from __future__ import annotations

import enum
import re
from abc import ABC, abstractmethod
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Optional

Rational = Fraction


class PdrError(Exception):
    """Base class for every error raised by this package."""


class MalformedRational(PdrError, ValueError):
    pass


class ZeroDenominator(MalformedRational):
    pass


class HeuristicViolation(PdrError):
    """A heuristic produced a choice that breaks the rule's side conditions."""

    def __init__(self, rule: Any, constraint: str):
        super().__init__(f"{rule}: {constraint}")
        self.rule = rule
        self.constraint = constraint


_INT_OR_FRACTION = re.compile(r"([+-]?\d+)(?:/(\d+))?")
_DECIMAL = re.compile(r"([+-]?)(\d+)\.(\d+)")


def rat_parse(text: str) -> Fraction:
    """Parse ``"p"``, ``"p/q"`` or a terminating decimal ``"a.b"`` exactly."""
    text = text.strip()
    m = _INT_OR_FRACTION.fullmatch(text)
    if m:
        num = int(m.group(1))
        if m.group(2) is None:
            return Fraction(num)
        den = int(m.group(2))
        if den == 0:
            raise ZeroDenominator(f"zero denominator in {text!r}")
        return Fraction(num, den)
    m = _DECIMAL.fullmatch(text)
    if m:
        sign, whole, frac = m.groups()
        value = Fraction(int(whole + frac), 10 ** len(frac))
        return -value if sign == "-" else value
    raise MalformedRational(f"not a rational: {text!r}")


def rat_str(q: Fraction) -> str:
    # Fraction.__str__ is already canonical: "p/q" with q > 0, or "p".
    return str(q)


class _Empty:
    """The bottom lower set: below every element, absorbing under meet."""

    _instance: Optional[_Empty] = None

    def __new__(cls) -> _Empty:
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __le__(self, other: object) -> bool:
        return True

    def __ge__(self, other: object) -> bool:
        return other is self

    def __and__(self, other: object) -> _Empty:
        return self

    __rand__ = __and__

    def __or__(self, other: Any) -> Any:
        return other

    __ror__ = __or__

    def __repr__(self) -> str:
        return "EMPTY"

    __str__ = __repr__

    def __reduce__(self):
        return (_Empty, ())


EMPTY = _Empty()


class Mode(enum.Enum):
    PLAIN = "plain"
    DOWN = "down"


@dataclass(frozen=True)
class Index:
    n: int
    k: int

    def __post_init__(self) -> None:
        if not 1 <= self.k <= self.n:
            raise ValueError(f"index violates 1 <= k <= n: ({self.n}, {self.k})")


@dataclass(frozen=True)
class PdrState:
    """A configuration ``(x_0..x_{n-1} || y_k..y_{n-1})_{n,k}``."""

    positive: tuple
    negative: tuple
    index: Index

    def __post_init__(self) -> None:
        n, k = self.index.n, self.index.k
        if len(self.positive) != n:
            raise ValueError(f"positive chain has length {len(self.positive)}, index says {n}")
        if len(self.negative) != n - k:
            raise ValueError(f"negative sequence has length {len(self.negative)}, index says {n - k}")
        for j in range(n - 1):
            if not self.positive[j] <= self.positive[j + 1]:
                raise ValueError(f"positive chain is not ordered at position {j}")

    @property
    def n(self) -> int:
        return self.index.n

    @property
    def k(self) -> int:
        return self.index.k

    def neg(self, j: int) -> Any:
        """The negative element ``y_j`` (valid for ``k <= j < n``)."""
        return self.negative[j - self.index.k]


@dataclass(frozen=True)
class Holds:
    witness: Any
    witness_position: int


@dataclass(frozen=True)
class Refuted:
    witness: tuple


class UnknownReason(enum.Enum):
    BUDGET_EXHAUSTED = "BudgetExhausted"
    HEURISTIC_FAILURE = "HeuristicFailure"


@dataclass(frozen=True)
class Unknown:
    reason: UnknownReason


Verdict = Holds | Refuted | Unknown


def verdict_name(verdict: Verdict) -> str:
    if isinstance(verdict, Holds):
        return "holds"
    if isinstance(verdict, Refuted):
        return "refuted"
    return "unknown"


class ProblemInstance(ABC):
    """A lattice problem ``mu b <= p`` as seen by the engine.

    Subclasses provide a handful of primitives; the guard predicates used by
    the engine are derived from them. In plain mode ``forward`` is the left
    adjoint ``f`` and ``b = f | i``; in down mode ``forward`` is ``b`` itself
    and ``initial`` is the bottom element.
    """

    mode: Mode

    @abstractmethod
    def pos_bot(self) -> Any: ...

    @abstractmethod
    def pos_top(self) -> Any: ...

    @abstractmethod
    def initial(self) -> Any:
        """The element ``i`` (down mode: the bottom frame)."""

    @abstractmethod
    def prop(self) -> Any:
        """The property ``p`` as a positive element."""

    @abstractmethod
    def forward(self, x: Any) -> Any: ...

    def backward(self, y: Any) -> Any:
        """Right adjoint of ``forward``; only plain instances have one."""
        raise NotImplementedError

    @abstractmethod
    def neg_contains_pos(self, x: Any, y: Any) -> bool:
        """Plain mode: ``x <= y``. Down mode: ``x in Y``."""

    @abstractmethod
    def decide_covers(self, z: Any, y: Any) -> bool:
        """Whether the pullback of ``y`` is included in ``z`` (Decide side condition)."""

    def format_pos(self, x: Any) -> str:
        return str(x)

    def format_neg(self, y: Any) -> str:
        return str(y)

    # Derived operations. EMPTY is handled here so instances never see it.

    def image(self, x: Any) -> Any:
        """``b(x)``; the sentinel maps to bottom."""
        if x is EMPTY:
            return self.pos_bot()
        return self.forward(x) | self.initial()

    def fwd(self, x: Any) -> Any:
        if x is EMPTY:
            return self.pos_bot()
        return self.forward(x)

    def pos_meet(self, x: Any, z: Any) -> Any:
        return x & z

    def pos_leq(self, x: Any, y: Any) -> bool:
        return x <= y

    def under_p(self, x: Any) -> bool:
        return x <= self.prop()

    def b_image_in(self, x: Any, y: Any) -> bool:
        return self.neg_contains_pos(self.fwd(x), y)

    def neg_refutes(self, y: Any) -> bool:
        # Down mode: a lower set misses the bottom frame iff it is empty.
        return not self.neg_contains_pos(self.initial(), y)

    def initial_state(self) -> PdrState:
        if self.mode is Mode.PLAIN:
            return PdrState((self.pos_bot(), self.pos_top()), (), Index(2, 2))
        return PdrState((EMPTY, self.pos_bot(), self.pos_top()), (), Index(3, 3))


class Heuristic(ABC):
    """Resolves the choice of ``z`` in Candidate, Decide and Conflict."""

    name: str = "heuristic"

    @abstractmethod
    def choose_candidate(self, state: PdrState) -> Any: ...

    @abstractmethod
    def choose_decide(self, state: PdrState) -> Any: ...

    @abstractmethod
    def choose_conflict(self, state: PdrState) -> Any: ...


def format_state(instance: ProblemInstance, state: PdrState) -> str:
    pos = ", ".join(instance.format_pos(x) for x in state.positive)
    neg = ", ".join(instance.format_neg(y) for y in state.negative) or "eps"
    return f"({pos} || {neg})_{{{state.n},{state.k}}}"

