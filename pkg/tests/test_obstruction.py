import random
from fractions import Fraction

from hypothesis import given, settings
from hypothesis import strategies as st

from soficity_lab.actions import projective_action
from soficity_lab.obstruction import (
    ObstructionInstance,
    bad_edge_count,
    components,
    compute_D,
    count_bad_edges,
    heavy_indices,
    random_involution,
    t_square_defect,
    theta_partition,
)

import oracles


def cycle_perm(n, start, length):
    p = list(range(n))
    for i in range(length):
        p[start + i] = start + (i + 1) % length
    return tuple(p)


def rand_perm(n, rng):
    p = list(range(n))
    rng.shuffle(p)
    return tuple(p)


def random_instance(rng, n=None, tau=None):
    n = n or rng.randint(2, 60)
    gamma = {f"a{i}": rand_perm(n, rng) for i in range(rng.randint(1, 2))}
    lam = {f"b{i}": rand_perm(n, rng) for i in range(rng.randint(0, 2))}
    if tau is None:
        tau = random_involution(n, rng) if rng.random() < 0.7 else rand_perm(n, rng)
    return ObstructionInstance(n, gamma, lam, tau, Fraction(1, 2), Fraction(3))


def d_brute(inst):
    comps = oracles.components_brute(inst.n, list(inst.gamma.values()))
    where = {x: j for j, c in enumerate(comps) for x in c}
    return {w for w in range(inst.n) if where[w] <= where[inst.tau[w]]}


def test_single_component_gives_full_D():
    inst = ObstructionInstance(5, {"a": cycle_perm(5, 0, 5)}, {}, (1, 0, 3, 2, 4), 1, 2)
    assert compute_D(inst) == frozenset(range(5))


def test_identity_tau_gives_full_D():
    rng = random.Random(0)
    inst = random_instance(rng, 20, tau=tuple(range(20)))
    assert compute_D(inst) == frozenset(range(20))


def test_D_for_swapped_components():
    # Gamma: a 4-cycle on 0..3 and a swap on 4,5; tau swaps 0<->4 and 1<->5
    gamma = {"a": (1, 2, 3, 0, 5, 4)}
    inst = ObstructionInstance(6, gamma, {}, (4, 5, 2, 3, 0, 1), 1, 2)
    assert components(inst).sizes() == [4, 2]
    assert compute_D(inst) == frozenset({0, 1, 2, 3})


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10**6))
def test_D_matches_definition(seed):
    inst = random_instance(random.Random(seed))
    assert compute_D(inst) == d_brute(inst)
    comps = components(inst)
    assert [sorted(b) for b in comps.blocks] == oracles.components_brute(inst.n, list(inst.gamma.values()))


def test_heavy_threshold_boundary():
    # two 10-cycles; one D-point in the first component is exactly a tenth
    gamma = {"a": tuple(10 * (i // 10) + (i + 1) % 10 for i in range(20))}
    inst = ObstructionInstance(20, gamma, {}, tuple(range(20)), 1, 2)
    h = heavy_indices(inst, d=frozenset({3}))
    assert h.indices == (0,)
    assert h.mass == 10
    assert heavy_indices(inst, d=frozenset()).indices == ()
    full = heavy_indices(inst, d=frozenset(range(20)))
    assert full.indices == (0, 1) and full.mass == 20


def test_theta_singletons_when_lambda_trivial():
    gamma = {"a": cycle_perm(6, 0, 6)}
    inst = ObstructionInstance(6, gamma, {}, tuple(range(6)), 1, 2)
    th = theta_partition(inst, 0)
    assert th.blocks == [(x,) for x in range(6)]


def test_theta_single_block_when_lambda_is_gamma():
    gamma = {"a": cycle_perm(8, 0, 5)}
    inst = ObstructionInstance(8, gamma, gamma, tuple(range(8)), 1, 2)
    for j in range(len(components(inst).blocks)):
        th = theta_partition(inst, j)
        assert th.blocks == [tuple(sorted(components(inst).blocks[j]))]
        assert th.boundary_sizes == [0]


def test_theta_violation_reported_not_raised():
    gamma = {"a": cycle_perm(6, 0, 6)}
    inst = ObstructionInstance(6, gamma, gamma, tuple(range(6)), 1, Fraction(3))
    th = theta_partition(inst, 0)
    assert th.lambda_chain == [False]
    assert th.violations


def test_theta_p4f2_against_recomputation():
    rng = random.Random(11)
    act = projective_action(5, 2)
    tau = random_involution(act.n, rng, fixed=1)
    inst = ObstructionInstance.from_action(act, "full", "psl2block", tau, Fraction(1), Fraction(31, 3))
    comps = oracles.components_brute(inst.n, list(inst.gamma.values()))
    lam_comps = oracles.components_brute(inst.n, list(inst.lam.values()))
    lam_of = {x: q for q, c in enumerate(lam_comps) for x in c}
    d = d_brute(inst)
    for j in heavy_indices(inst).indices:
        groups = {}
        for w in comps[j]:
            if w in d:
                groups.setdefault(lam_of[inst.tau[w]], []).append(w)
        expect = sorted(sorted(g) for g in groups.values())
        assert [list(b) for b in theta_partition(inst, j).blocks] == expect


def test_identity_instance_has_no_bad_edges():
    act = projective_action(5, 2)
    inst = ObstructionInstance.from_action(act, "full", "full", tuple(range(act.n)), Fraction(1), Fraction(1))
    rep = bad_edge_count(inst)
    assert rep.bad_edge_count == 0
    assert not rep.precondition_flags["lambdaGT1"]
    assert not rep.theorem_instance


def test_bad_edges_12_points():
    gamma = {"a": (1, 2, 3, 0, 5, 6, 7, 4, 9, 10, 11, 8), "b": (4, 5, 6, 7, 0, 1, 2, 3, 8, 9, 10, 11)}
    lam = {"c": (1, 0, 3, 2, 5, 4, 7, 6, 9, 8, 11, 10)}
    tau = (0, 2, 1, 3, 5, 4, 6, 7, 8, 11, 10, 9)
    inst = ObstructionInstance(12, gamma, lam, tau, 1, 2)
    brute = oracles.bad_edges_brute(12, list(gamma.values()), list(lam.values()), tau)
    assert count_bad_edges(inst) == brute == bad_edge_count(inst).bad_edge_count


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10**6))
def test_bad_edges_match_brute_force(seed):
    inst = random_instance(random.Random(seed))
    assert count_bad_edges(inst) == oracles.bad_edges_brute(
        inst.n, list(inst.gamma.values()), list(inst.lam.values()), inst.tau
    )


def test_implications_on_random_instances():
    rng = random.Random(99)
    checked = 0
    for _ in range(200):
        inst = random_instance(rng)
        rep = bad_edge_count(inst)
        n = inst.n
        if t_square_defect(inst) <= Fraction(1, 10):
            assert rep.d_size >= Fraction(9, 20) * n
            checked += 1
        if rep.d_size >= Fraction(9, 20) * n:
            assert rep.heavy_mass >= Fraction(n, 10)
        assert rep.implications["doubleCount"]
        assert all(v in (True, None) for v in rep.implications.values())
        assert rep.d_size <= n and rep.heavy_mass <= n
        assert rep.components == sorted(rep.components, reverse=True)
    assert checked > 100


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10**6))
def test_double_count(seed):
    inst = random_instance(random.Random(seed))
    for j in range(len(components(inst).blocks)):
        th = theta_partition(inst, j)
        assert 2 * th.boundary_union >= th.boundary_sum


def test_perfect_on_h_flag():
    gamma = {"a": cycle_perm(4, 0, 4)}
    ok = ObstructionInstance(4, gamma, {}, tuple(range(4)), 1, 2, ("a a a a",))
    bad = ObstructionInstance(4, gamma, {}, tuple(range(4)), 1, 2, ("a a",))
    assert bad_edge_count(ok).precondition_flags["perfectOnH"]
    assert not bad_edge_count(bad).precondition_flags["perfectOnH"]


def test_bound_arithmetic():
    inst = random_instance(random.Random(3), n=40)
    rep = bad_edge_count(inst)
    # c' = c * min(1, lambda - 1) = 1/2 * 1
    assert rep.c_prime == Fraction(1, 2)
    assert rep.bound == Fraction(1, 2) * 40 / 200
    assert rep.bound_holds == (rep.bad_edge_count >= rep.bound)


def test_p4f2_bound_over_involutions():
    act = projective_action(5, 2)
    rng = random.Random(2024)
    for _ in range(50):
        tau = random_involution(act.n, rng)
        inst = ObstructionInstance.from_action(
            act, "full", "psl2block", tau, Fraction(29, 10), Fraction(31, 3)
        )
        rep = bad_edge_count(inst)
        assert rep.theorem_instance
        assert rep.bound_holds


def test_json_round_trip():
    inst = random_instance(random.Random(5), n=15)
    back = ObstructionInstance.from_json(inst.to_json())
    assert back == inst
    assert bad_edge_count(back).to_json() == bad_edge_count(inst).to_json()


def test_random_involution_is_involution():
    rng = random.Random(4)
    for n in range(1, 30):
        t = random_involution(n, rng)
        assert all(t[t[i]] == i for i in range(n))
