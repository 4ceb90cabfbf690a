import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from soficity_lab.actions import LabeledAction, orbit_partition, projective_action
from soficity_lab.errors import NoAdmissibleSubset, NotACovering, NotRegular, OutOfRange, ScaleExceeded
from soficity_lab.scenario import covering_instance
from soficity_lab.schreier import (
    MultiGraph,
    boundary_edges,
    build_schreier,
    complete_graph,
    covering_ratio_check,
    cycle_graph,
    edge_boundary,
    expansion_exact,
    expansion_spectral,
    from_pairs,
    graph_from_perms,
    isoperimetric_ratio,
    second_eigenvalue,
    validate_covering,
)

import oracles


def random_perm_graph(n, k, rng):
    perms = {}
    for i in range(k):
        p = list(range(n))
        rng.shuffle(p)
        perms[f"s{i}"] = p
    return graph_from_perms(n, perms)


def test_identity_generator_gives_loops():
    act = LabeledAction(3, {"e": (0, 1, 2)}, {"F": ("e",)})
    g = build_schreier(act, "F")
    assert g.edges == ((0, 0, "e"), (1, 1, "e"), (2, 2, "e"))
    assert g.degrees() == [2, 2, 2]
    assert edge_boundary(g, [0]) == 0


def test_cyclic_shift_is_cycle():
    act = LabeledAction(6, {"s": (1, 2, 3, 4, 5, 0)}, {"F": ("s",)})
    g = build_schreier(act, "F")
    assert sorted(tuple(sorted(e[:2])) for e in g.edges) == sorted(
        tuple(sorted(e[:2])) for e in cycle_graph(6).edges
    )
    assert g.regular_degree() == 2


def test_components_match_orbits_p4f2():
    act = projective_action(5, 2)
    for fam in ("psl2block", "full"):
        g = build_schreier(act, fam)
        assert [tuple(c) for c in g.components()] == list(orbit_partition(act, fam).blocks)
        assert g.regular_degree() == 2 * len(act.family(fam))


def test_edge_boundary_examples():
    assert edge_boundary(cycle_graph(6), range(6)) == 0
    assert edge_boundary(cycle_graph(6), [0, 1, 2]) == 2
    assert edge_boundary(complete_graph(4), [0, 1]) == 4
    with pytest.raises(OutOfRange):
        edge_boundary(cycle_graph(6), [6])


@settings(max_examples=200, deadline=None)
@given(st.integers(2, 14), st.integers(0, 10**6))
def test_boundary_symmetric_under_complement(n, seed):
    rng = random.Random(seed)
    g = random_perm_graph(n, 2, rng)
    w = {x for x in range(n) if rng.random() < 0.5}
    comp = set(range(n)) - w
    assert boundary_edges(g, w) == boundary_edges(g, comp)
    assert edge_boundary(g, w) == oracles.undirected_boundary(n, [e[:2] for e in g.edges], w)


def test_exact_expansion_k4_c6():
    k4 = expansion_exact(complete_graph(4))
    assert k4.value == 2
    assert len(k4.witness) == 2
    c6 = expansion_exact(cycle_graph(6))
    assert c6.value == Fraction(2, 3)
    assert c6.witness == (0, 1, 2)
    assert isoperimetric_ratio(cycle_graph(6), c6.witness) == c6.value


def test_exact_expansion_single_vertex():
    with pytest.raises(NoAdmissibleSubset):
        expansion_exact(MultiGraph(1, ()))


def test_exact_expansion_scale():
    with pytest.raises(ScaleExceeded):
        expansion_exact(cycle_graph(25))


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 11), st.integers(1, 3), st.integers(0, 10**6))
def test_exact_expansion_matches_brute_force(n, k, seed):
    g = random_perm_graph(n, k, random.Random(seed))
    res = expansion_exact(g)
    assert res.value == oracles.expansion_brute(n, [e[:2] for e in g.edges])
    assert isoperimetric_ratio(g, res.witness) == res.value
    assert 1 <= len(res.witness) <= n // 2


def test_spectral_c6():
    res = expansion_spectral(cycle_graph(6))
    assert res.contains(Fraction(2, 3))
    # lambda_2(C_6) = 1 - cos(pi/3)
    assert res.lambda2 == pytest.approx(1 - math.cos(math.pi / 3), abs=1e-6)
    assert res.lo <= res.hi


def test_spectral_disconnected():
    g = from_pairs(6, [(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3)])
    res = expansion_spectral(g)
    assert (res.lo, res.hi, res.lambda2) == (0.0, 0.0, 0.0)


def test_spectral_not_regular():
    with pytest.raises(NotRegular):
        expansion_spectral(from_pairs(3, [(0, 1), (1, 2)]))


def test_spectral_deterministic():
    g = random_perm_graph(16, 2, random.Random(4))
    assert expansion_spectral(g).to_json() == expansion_spectral(g).to_json()


def test_spectral_interval_brackets_exact_random():
    rng = random.Random(2024)
    for _ in range(20):
        n = rng.randint(4, 16)
        g = random_perm_graph(n, 2, rng)
        exact = expansion_exact(g).value
        assert expansion_spectral(g).contains(exact)


def test_second_eigenvalue_matches_dense_solver():
    import numpy as np

    g = random_perm_graph(12, 2, random.Random(8))
    if len(g.components()) > 1:
        pytest.skip("disconnected draw")
    lo, hi, _ = second_eigenvalue(g)
    a = g.adjacency().toarray()
    lap = np.eye(12) - a / 4
    ev = sorted(np.linalg.eigvalsh(lap))
    assert lo - 1e-9 <= ev[1] <= hi + 1e-9


def test_edge_list_and_dot():
    g = cycle_graph(6)
    assert MultiGraph.from_edge_list(g.to_edge_list()) == g
    dot = g.to_dot()
    assert sum(1 for ln in dot.splitlines() if ln.strip().endswith(";") and "--" not in ln) == 6
    assert dot.count("--") == 6


def test_identity_covering():
    g = cycle_graph(6)
    rep = covering_ratio_check(g, g, list(range(6)), trials=20)
    assert rep.all_equal


def test_psl2f5_covering():
    cover, base, fiber = covering_instance(2, 5)
    assert (cover.n, base.n) == (60, 6)
    rep = covering_ratio_check(cover, base, fiber, trials=100, seed=3)
    assert rep.all_equal and rep.equal == 100


def test_covering_ratio_by_hand():
    cover, base, fiber = covering_instance(2, 5)
    rng = random.Random(1)
    for _ in range(20):
        d = [b for b in range(6) if rng.random() < 0.5] or [0]
        pre = [v for v in range(60) if fiber[v] in d]
        lhs = Fraction(oracles.undirected_boundary(60, [e[:2] for e in cover.edges], pre), len(pre))
        rhs = Fraction(oracles.undirected_boundary(6, [e[:2] for e in base.edges], d), len(d))
        assert lhs == rhs


def test_corrupted_covering_detected():
    cover, base, fiber = covering_instance(2, 5)
    bad = list(fiber)
    bad[7] = (bad[7] + 1) % 6
    with pytest.raises(NotACovering) as exc:
        validate_covering(cover, base, bad)
    assert exc.value.vertex is not None
