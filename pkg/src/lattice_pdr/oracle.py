"""Exact reference answers and seeded random instances."""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .core import PdrError
from .mdp import Action, Frame, HalfSpaceDownSet, Mdp, Scheduler, bellman
from .ts import StateSet, TransitionSystem, post


class EnumerationCapExceeded(PdrError):
    pass


@dataclass(frozen=True)
class TsOracleResult:
    reachable: StateSet
    safe: bool


@dataclass(frozen=True)
class MdpOracleResult:
    max_prob: Fraction
    verdict: bool
    witness_scheduler: Scheduler
    values: tuple[Fraction, ...]


def ts_reach(ts: TransitionSystem) -> StateSet:
    seen = set(ts.initial)
    todo = list(seen)
    while todo:
        s = todo.pop()
        for t in ts.delta[s]:
            if t not in seen:
                seen.add(t)
                todo.append(t)
    return StateSet.of(ts.num_states, seen)


def ts_oracle(ts: TransitionSystem) -> TsOracleResult:
    reach = ts_reach(ts)
    return TsOracleResult(reach, reach <= ts.safe)


def solve_linear(a: list[list[Fraction]], b: list[Fraction]) -> list[Fraction]:
    """Solve ``a x = b`` for square nonsingular ``a`` by exact elimination."""
    n = len(a)
    m = [row[:] + [rhs] for row, rhs in zip(a, b)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if m[r][col] != 0), None)
        if pivot is None:
            raise ZeroDivisionError("singular system")
        m[col], m[pivot] = m[pivot], m[col]
        inv = 1 / m[col][col]
        m[col] = [v * inv for v in m[col]]
        for r in range(n):
            if r != col and m[r][col] != 0:
                f = m[r][col]
                m[r] = [v - f * w for v, w in zip(m[r], m[col])]
    return [m[r][n] for r in range(n)]


def sched_reach_values(mdp: Mdp, alpha: Scheduler) -> tuple[Fraction, ...]:
    """Reach probabilities of the bad states in the chain induced by ``alpha``."""
    n = mdp.num_states
    dist = [dict(mdp.actions[s][alpha[s]].dist) for s in range(n)]
    # states that can reach bad at all; everything else has value 0
    can = set(mdp.bad)
    changed = True
    while changed:
        changed = False
        for s in range(n):
            if s not in can and any(t in can for t in dist[s]):
                can.add(s)
                changed = True
    unknown = [s for s in range(n) if s in can and s not in mdp.bad]
    pos = {s: i for i, s in enumerate(unknown)}
    a = [[Fraction(0)] * len(unknown) for _ in unknown]
    b = [Fraction(0)] * len(unknown)
    for s in unknown:
        i = pos[s]
        a[i][i] += 1
        for t, p in dist[s].items():
            if t in mdp.bad:
                b[i] += p
            elif t in pos:
                a[i][pos[t]] -= p
    x = solve_linear(a, b) if unknown else []
    vals = []
    for s in range(n):
        if s in mdp.bad:
            vals.append(Fraction(1))
        elif s in pos:
            vals.append(x[pos[s]])
        else:
            vals.append(Fraction(0))
    return tuple(vals)


def mdp_max_reach_exact(mdp: Mdp, cap: int = 10**6) -> MdpOracleResult:
    """Maximum over memoryless schedulers of the probability of reaching bad."""
    if mdp.num_schedulers() > cap:
        raise EnumerationCapExceeded(f"{mdp.num_schedulers()} schedulers exceed the cap {cap}")
    best: Optional[tuple[Fraction, ...]] = None
    best_alpha: Scheduler = ()
    for alpha in mdp.schedulers():
        vals = sched_reach_values(mdp, alpha)
        if best is None or vals[mdp.initial] > best[mdp.initial]:
            best, best_alpha = vals, alpha
    assert best is not None
    p = best[mdp.initial]
    return MdpOracleResult(p, p <= mdp.lam, best_alpha, best)


def value_iteration(mdp: Mdp, iterations: int = 200) -> list[Frame]:
    """The Kleene chain ``0, b(0), b(b(0)), ..`` of the Bellman operator."""
    d = Frame.zeros(mdp.num_states)
    out = [d]
    for _ in range(iterations):
        d = bellman(mdp, d)
        out.append(d)
    return out


def lambda_grid(p: Fraction) -> list[Fraction]:
    """Thresholds just below, at and above ``p`` inside [0,1]."""
    grid = []
    if p > 0:
        grid.append(p / 2)
    grid.append(p)
    if p < 1:
        grid.append((p + 1) / 2)
    return grid


def _random_dist(rng: random.Random, n: int, denom_bound: int) -> tuple[tuple[int, Fraction], ...]:
    den = rng.randint(1, denom_bound)
    k = rng.randint(1, min(n, den))
    targets = sorted(rng.sample(range(n), k))
    # split den into k positive integer parts
    cuts = sorted(rng.sample(range(1, den), k - 1))
    parts = [b - a for a, b in zip([0, *cuts], [*cuts, den])]
    return tuple((t, Fraction(c, den)) for t, c in zip(targets, parts))


def random_mdp(seed: int, max_states: int = 4, max_actions: int = 2, denom_bound: int = 8) -> Mdp:
    """A reproducible random MDP with a threshold near its exact answer."""
    rng = random.Random(seed)
    n = rng.randint(min(2, max_states), max_states)
    bad = StateSet.of(n, rng.sample(range(n), rng.randint(1, max(1, n // 2))))
    safe = [s for s in range(n) if s not in bad]
    initial = rng.choice(safe) if safe else rng.randrange(n)
    actions = []
    for s in range(n):
        if s in safe and s != initial and rng.random() < 0.4:
            # an absorbing safe state, so that values strictly below 1 occur
            actions.append((Action("a", ((s, Fraction(1)),)),))
            continue
        acts = [Action(chr(ord("a") + i), _random_dist(rng, n, denom_bound)) for i in range(rng.randint(1, max_actions))]
        actions.append(tuple(acts))
    model = Mdp(n, tuple(actions), initial, bad, Fraction(1, 2))
    p = mdp_max_reach_exact(model).max_prob
    candidates = [lam for lam in lambda_grid(p) if 0 < lam < 1]
    if not candidates:
        candidates = [Fraction(rng.randint(1, denom_bound - 1), denom_bound) if denom_bound > 1 else Fraction(1, 2)]
    return Mdp(n, tuple(actions), initial, bad, rng.choice(candidates))


def with_lambda(mdp: Mdp, lam: Fraction) -> Mdp:
    return Mdp(mdp.num_states, mdp.actions, mdp.initial, mdp.bad, lam)


def random_ts(seed: int, max_states: int = 12) -> TransitionSystem:
    rng = random.Random(seed)
    n = rng.randint(1, max_states)
    density = rng.choice([0.1, 0.2, 0.35])
    edges = [(s, t) for s in range(n) for t in range(n) if rng.random() < density]
    initial = rng.sample(range(n), rng.randint(1, max(1, n // 3)))
    unsafe = set(rng.sample(range(n), rng.randint(0, max(1, n // 3))))
    return TransitionSystem.build(n, initial, [s for s in range(n) if s not in unsafe], edges)


def random_half_space(rng: random.Random, n: int, denom_bound: int = 6) -> HalfSpaceDownSet:
    coeffs = [Fraction(rng.randint(0, denom_bound), rng.randint(1, denom_bound)) if rng.random() < 0.75 else Fraction(0) for _ in range(n)]
    bound = Fraction(rng.randint(0, 3 * denom_bound), rng.randint(1, denom_bound))
    return HalfSpaceDownSet(tuple(coeffs), bound)


def box_vertices(h: HalfSpaceDownSet) -> list[tuple[Fraction, ...]]:
    """All vertices of ``h`` intersected with the unit box.

    Every choice of ``n`` constraints among ``d_s = 0``, ``d_s = 1`` and the
    hyperplane is solved exactly; feasible unique solutions are vertices.
    """
    n = len(h.coeffs)
    rows: list[tuple[list[Fraction], Fraction]] = []
    for s in range(n):
        unit = [Fraction(int(i == s)) for i in range(n)]
        rows.append((unit, Fraction(0)))
        rows.append((unit, Fraction(1)))
    rows.append((list(h.coeffs), h.bound))
    found = set()
    for pick in itertools.combinations(rows, n):
        try:
            x = solve_linear([r for r, _ in pick], [v for _, v in pick])
        except ZeroDivisionError:
            continue
        if all(0 <= v <= 1 for v in x) and sum(r * v for r, v in zip(h.coeffs, x)) <= h.bound:
            found.add(tuple(x))
    return sorted(found)


def brute_force_generators(h: HalfSpaceDownSet, lower: Sequence[Fraction]) -> list[Frame]:
    """Generators above ``lower`` found by plain vertex enumeration.

    If the all-ones point is feasible it is the only generator; otherwise the
    generators are the vertices where the inequality is tight.
    """
    n = len(h.coeffs)
    verts = box_vertices(h)
    ones = tuple(Fraction(1) for _ in range(n))
    if ones in verts:
        gens = [ones]
    else:
        gens = [v for v in verts if sum(r * x for r, x in zip(h.coeffs, v)) == h.bound]
    return [Frame(v) for v in gens if all(lo <= x for lo, x in zip(lower, v))]
