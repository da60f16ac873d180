import itertools
import random
from fractions import Fraction as Q

import pytest
from hypothesis import given, settings, strategies as st

from lattice_pdr.core import EMPTY, Holds, Refuted
from lattice_pdr.engine import Rule, solve
from lattice_pdr.mdp import (
    ConflictChoice,
    EmptySet,
    Frame,
    HalfSpaceDownSet,
    MdpHeuristic,
    argmax_scheduler,
    bellman,
    bellman_sched,
    conflict_z,
    enumerate_dominating_generators,
    hs_contains,
    hs_equal,
    hs_max_linear,
    hs_member,
    hs_transform,
    mdp_heuristics,
    mdp_instance,
)
from lattice_pdr.oracle import box_vertices, brute_force_generators, random_half_space, random_mdp, with_lambda


def fr(*vals):
    return Frame.of(Q(v) for v in vals)


def hs(coeffs, bound):
    return HalfSpaceDownSet.of([Q(c) for c in coeffs], Q(bound))


P6 = hs([1, 0, 0, 0], "2/5")
ZETA = (0, 0, 0, 0)  # example3.mdp: a at s0, s1, s3 and the only action b at s2


def test_bellman_example6(example6):
    assert bellman(example6, fr("2/5", 0, 0, 1)) == fr("2/5", "4/5", 0, 1)
    assert bellman(example6, Frame.zeros(4)) == fr(0, 0, 0, 1)
    assert bellman(example6, fr(0, 0, 0, 1)) == fr(0, "2/3", 0, 1)
    assert bellman(example6, Frame.ones(4)) == Frame.ones(4)


def test_bellman_sched_example3(example3):
    assert bellman_sched(example3, ZETA, fr(0, 0, 0, 1)) == fr(0, "1/2", 0, 1)
    v = fr("1/5", "2/5", "3/5", "4/5")
    assert bellman_sched(example3, ZETA, v) == fr("1/2", "1/2", "1/5", 1)
    assert bellman_sched(example3, ZETA, Frame.ones(4)) == Frame.ones(4)


def test_bellman_example3_at_zero(example3):
    assert bellman(example3, Frame.zeros(4)) == fr(0, 0, 0, 1)
    assert bellman(example3, fr(0, 0, 0, 1)) == fr(0, "1/2", 0, 1)


def test_argmax_examples(example3, example6):
    assert argmax_scheduler(example6, fr("2/5", 1, 0, 1))[0] == 1
    assert argmax_scheduler(example3, Frame.ones(4)) == ZETA
    single = with_lambda(example6, Q(1, 2))
    assert argmax_scheduler(single, Frame.zeros(4))[1:] == (0, 0, 0)


def test_hs_member_examples():
    assert hs_member(P6, fr("2/5", "4/5", 0, 1))
    assert not hs_member(P6, fr("1/2", "4/5", 0, 1))
    empty = hs([1, 0, 0, 0], "-3/16")
    assert empty.is_empty and not hs_member(empty, Frame.zeros(4))


def test_hs_transform_matches_example3_column(example3):
    f0 = hs([1, 0, 0, 0], "1/4")
    f1 = hs_transform(example3, ZETA, f0)
    assert f1 == hs([0, "1/2", "1/2", 0], "1/4")
    assert f1.scheduler == ZETA
    assert hs_transform(example3, ZETA, f1) == hs(["3/4", 0, 0, "1/4"], "1/4")
    f5 = hs_transform(example3, (1, 0, 0, 0), hs(["9/16", 0, 0, "3/16"], 0))
    assert f5.is_empty and f5.bound == -1 and not any(f5.coeffs)


def test_empty_normalization():
    assert hs([2, 3], -5) == hs([0, 0], -1)
    assert str(hs([2, 3], -5)) == "sum{ } <= -1"
    with pytest.raises(ValueError):
        hs([-1, 0], 1)


def test_hs_str_and_parse():
    h = hs([0, "1/2", "1/2", 0], "1/4")
    assert str(h) == "sum{ s1:1/2 s2:1/2 } <= 1/4"
    assert HalfSpaceDownSet.parse(str(h), 4) == h
    assert str(P6) == "sum{ s0:1 } <= 2/5"


def test_hs_max_linear_examples():
    assert hs_max_linear(hs([1, 0, 0, 0], "2/5"), [1, 0, 0, 0]) == Q(2, 5)
    assert hs_max_linear(hs([0, "1/2", "1/2", 0], "1/4"), [0, 1, 1, 0]) == Q(1, 2)
    assert hs_max_linear(hs([1, 1], 1), [2, 1]) == 2
    with pytest.raises(EmptySet):
        hs_max_linear(hs([1], -1), [1])


def test_hs_max_linear_against_vertices():
    rng = random.Random(3)
    for _ in range(300):
        n = rng.randint(1, 4)
        h = random_half_space(rng, n)
        w = [Q(rng.randint(0, 5), rng.randint(1, 4)) for _ in range(n)]
        best = max(sum(a * b for a, b in zip(w, v)) for v in box_vertices(h))
        assert hs_max_linear(h, w) == best


def test_hs_contains_example3_scaling():
    # the same set written with doubled coefficients
    assert hs_equal(hs([0, 1, 1, 0], "1/2"), hs([0, "1/2", "1/2", 0], "1/4"))
    assert hs_contains(hs([1, 1], "1/2"), hs([1, 0], 1))
    assert not hs_contains(hs([1, 0], 1), hs([1, 1], "1/2"))
    assert hs_contains(hs([1], -1), hs([1], 0))
    assert not hs_contains(hs([1], 0), hs([1], -1))


def test_hs_contains_agrees_with_vertices():
    # a polytope is inside the half-space iff all of its vertices are
    rng = random.Random(11)
    for _ in range(400):
        n = rng.randint(1, 4)
        a, b = random_half_space(rng, n), random_half_space(rng, n)
        want = all(hs_member(b, Frame(v)) for v in box_vertices(a))
        assert hs_contains(a, b) == want


def test_hs_contains_is_a_preorder():
    rng = random.Random(5)
    spaces = [random_half_space(rng, 3) for _ in range(25)]
    for a in spaces:
        assert hs_contains(a, a)
    for a, b, c in itertools.product(spaces[:12], repeat=3):
        if hs_contains(a, b) and hs_contains(b, c):
            assert hs_contains(a, c)


def test_generators_example6():
    got = enumerate_dominating_generators(P6, fr(0, 0, 0, 1))
    assert set(got) == {fr("2/5", 0, 0, 1), fr("2/5", 1, 0, 1), fr("2/5", 0, 1, 1), fr("2/5", 1, 1, 1)}
    got = enumerate_dominating_generators(P6, fr("2/5", "4/5", 0, 1))
    assert set(got) == {fr("2/5", 1, 0, 1), fr("2/5", 1, 1, 1)}


def test_generators_full_box():
    assert enumerate_dominating_generators(hs([0, 0, 0], 0), Frame.zeros(3)) == [Frame.ones(3)]
    with pytest.raises(EmptySet):
        enumerate_dominating_generators(hs([1], -1), Frame.zeros(1))


def test_generators_can_be_empty():
    h, lower = hs([1, 1], 1), fr("1/2", "1/2")
    assert hs_member(h, lower)
    assert enumerate_dominating_generators(h, lower) == []


@settings(max_examples=300, deadline=None)
@given(st.integers(0, 10**9))
def test_generators_match_brute_force(seed):
    rng = random.Random(seed)
    n = rng.randint(1, 3)
    h = random_half_space(rng, n)
    lower = Frame.of(Q(rng.randint(0, 6), 6) for _ in range(n))
    if not hs_member(h, lower):
        lower = Frame.zeros(n)
    assert set(enumerate_dominating_generators(h, lower)) == set(brute_force_generators(h, lower.values))


def test_conflict_z_examples(example6):
    assert conflict_z(example6, Frame.zeros(4), P6, ConflictChoice.B) == fr("2/5", 0, 0, 1)
    x = fr("2/5", 0, 0, 1)
    assert conflict_z(example6, x, P6, ConflictChoice.B) == fr("2/5", "4/5", 0, 1)
    assert conflict_z(example6, x, P6, ConflictChoice.ZERO_ONE) == fr("2/5", 1, 0, 1)
    # the sentinel contributes the bottom frame as lower bound
    assert conflict_z(example6, EMPTY, P6, ConflictChoice.B) == fr("2/5", 0, 0, 0)


def test_conflict_z_fallback_when_no_generator_dominates():
    # two states, each moving to the bad state 2 with probability 1/2
    from lattice_pdr.io import parse_mdp

    mdp = parse_mdp(
        "mdp\nstates 3\ninitial 0\nbad 2\nlambda 1/2\n"
        "action 0 a 0:1/2 2:1/2\naction 1 a 1:1/2 2:1/2\naction 2 a 2:1\n"
    )
    h = hs([1, 1, 0], 1)
    x = fr(0, 0, 1)
    lower = bellman(mdp, x)
    assert lower == fr("1/2", "1/2", 1) and hs_member(h, lower)
    for mode in ConflictChoice:
        assert conflict_z(mdp, x, h, mode) == lower


def _enumerated_meet(mdp, x, h, mode):
    lower = bellman(mdp, x)
    zs = enumerate_dominating_generators(h, lower)
    if not zs:
        return lower
    vals = []
    for s in range(mdp.num_states):
        if h.coeffs[s] != 0:
            vals.append(min(z[s] for z in zs))
        elif mode is ConflictChoice.ZERO_ONE and lower[s] > 0:
            vals.append(Q(1))
        else:
            vals.append(lower[s])
    return Frame(tuple(vals))


def test_conflict_z_equals_enumerated_meet():
    rng = random.Random(17)
    seen = 0
    while seen < 300:
        mdp = random_mdp(rng.randrange(10**6), 4, 2, 8)
        n = mdp.num_states
        h = random_half_space(rng, n)
        x = Frame.of(Q(rng.randint(0, 4), 4) for _ in range(n))
        if h.is_empty or not hs_member(h, bellman(mdp, x)):
            continue
        seen += 1
        for mode in ConflictChoice:
            z = conflict_z(mdp, x, h, mode)
            assert z == _enumerated_meet(mdp, x, h, mode)
            # legitimacy
            assert hs_member(h, z) and bellman(mdp, x & z) <= z


def test_example_verdicts(example3, example6):
    for name in ("hcob", "hco01"):
        v, _ = solve(mdp_instance(example3), mdp_heuristics(example3)[name], budget=100, checked=True)
        assert isinstance(v, Refuted)
        v, _ = solve(mdp_instance(example6), mdp_heuristics(example6)[name], budget=100, checked=True)
        assert v == Holds(fr("2/5", "4/5", 0, 1), 4)


@pytest.mark.parametrize("seed", range(20))
def test_threshold_one_always_holds(seed):
    mdp = with_lambda(random_mdp(seed), Q(1))
    for h in ("hcob", "hco01"):
        v, _ = solve(mdp_instance(mdp), mdp_heuristics(mdp)[h], budget=100, checked=True)
        assert isinstance(v, Holds)


def test_hco01_second_conflict(example6):
    _, t = solve(mdp_instance(example6), mdp_heuristics(example6)["hco01"], budget=100)
    conflicts = [ev.element for ev in t.events if ev.rule is Rule.CONFLICT]
    assert conflicts == [
        fr("2/5", 0, 0, 1),
        fr("2/5", 1, 0, 1),
        fr(1, "4/5", 0, 1),
        fr("2/5", 1, 0, 1),
        fr(1, "4/5", 0, 1),
    ]
    decide = next(ev for ev in t.events if ev.rule is Rule.DECIDE)
    assert decide.witness[0] == 1  # action b at s0
    assert decide.element == hs([0, "1/2", "1/2", 0], "2/5")


def _random_frame(rng, n, den=6):
    return Frame.of(Q(rng.randint(0, den), den) for _ in range(n))


def test_bellman_monotone():
    rng = random.Random(23)
    for _ in range(300):
        mdp = random_mdp(rng.randrange(10**6))
        n = mdp.num_states
        d = _random_frame(rng, n)
        e = d | _random_frame(rng, n)
        assert bellman(mdp, d) <= bellman(mdp, e)
        alpha = tuple(rng.randrange(len(a)) for a in mdp.actions)
        assert bellman_sched(mdp, alpha, d) <= bellman_sched(mdp, alpha, e)
        assert bellman_sched(mdp, alpha, d) <= bellman(mdp, d)
        assert bellman_sched(mdp, argmax_scheduler(mdp, d), d) == bellman(mdp, d)


def test_hs_transform_exact():
    rng = random.Random(29)
    for _ in range(1000):
        mdp = random_mdp(rng.randrange(10**6))
        n = mdp.num_states
        h = random_half_space(rng, n)
        alpha = tuple(rng.randrange(len(a)) for a in mdp.actions)
        d = _random_frame(rng, n)
        t = hs_transform(mdp, alpha, h)
        assert all(c >= 0 for c in t.coeffs)
        assert hs_member(t, d) == hs_member(h, bellman_sched(mdp, alpha, d))


def test_argmax_discharges_decide():
    rng = random.Random(31)
    for _ in range(500):
        mdp = random_mdp(rng.randrange(10**6))
        n = mdp.num_states
        h = random_half_space(rng, n)
        x = _random_frame(rng, n)
        if not hs_member(h, bellman(mdp, x)):
            alpha = argmax_scheduler(mdp, x)
            assert not hs_member(h, bellman_sched(mdp, alpha, x))
            assert not hs_member(hs_transform(mdp, alpha, h), x)


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 10**6), st.sampled_from(list(ConflictChoice) + [None]))
def test_shipped_heuristics_are_legit(seed, choice):
    mdp = random_mdp(seed, 4, 2, 8)
    # checked mode raises HeuristicViolation on any illegal choice
    solve(mdp_instance(mdp), MdpHeuristic(mdp, choice), budget=150, checked=True)


def test_mdp_validation(example6):
    from lattice_pdr.mdp import Action, Mdp

    with pytest.raises(ValueError):
        Mdp(1, ((),), 0, example6.bad.__class__.of(1, [0]), Q(1, 2))
    with pytest.raises(ValueError):
        Mdp(1, ((Action("a", ((0, Q(1, 2)),)),),), 0, example6.bad.__class__.of(1, [0]), Q(1, 2))
    with pytest.raises(ValueError):
        Frame.of([2])
