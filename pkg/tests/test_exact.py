import random

import pytest

from treecvrp.baselines import flow_lower_bound
from treecvrp.exact import (
    InfeasibleError, OracleLimits, OracleSizeError, merge_small_tours,
    solve_exact, solve_exact_k_tours, solve_exact_naive)
from treecvrp.instance import Solution, Tour, TreeInstance
from treecvrp.verify import check_feasible

from conftest import random_instance

STAR = TreeInstance((-1, 0, 0, 0), (0, 1, 1, 1), (0, 1, 1, 1), 2)
PATH = TreeInstance((-1, 0, 1), (0, 1, 2), (0, 1, 1), 2)


def test_star_optimum():
    sol = solve_exact(STAR)
    assert sol.total_cost == 6
    assert check_feasible(STAR, sol).ok


def test_path_optimum_merges_tokens():
    # one tour picking both tokens: 2*(1+2) = 6
    sol = solve_exact(PATH)
    assert sol.total_cost == 6
    assert len(sol.tours) == 1


def test_single_node_demand():
    inst = TreeInstance((-1, 0, 1), (0, 2, 3), (0, 0, 1), 4)
    sol = solve_exact(inst)
    assert sol.total_cost == 2 * (2 + 3)


def test_empty_instance():
    inst = TreeInstance((-1, 0), (0, 1), (0, 0), 2)
    assert solve_exact(inst).tours == ()
    assert solve_exact_naive(inst).tours == ()


def test_token_limit_enforced():
    inst = TreeInstance((-1, 0), (0, 1), (0, 15), 20)
    with pytest.raises(OracleSizeError):
        solve_exact(inst)
    assert solve_exact(inst, OracleLimits(max_tokens=15)).total_cost == 2


def test_exact_agrees_with_naive_sample():
    # full 300-instance sweep lives in the acceptance suite
    for seed in range(40):
        inst = random_instance(seed, max_n=7, unit_demand=False, max_tokens=8)
        a = solve_exact(inst)
        b = solve_exact_naive(inst)
        assert a.total_cost == b.total_cost, f"seed {seed}"
        assert check_feasible(inst, a).ok


def test_exact_at_least_lower_bound():
    for seed in range(40):
        inst = random_instance(seed, unit_demand=False, max_tokens=10)
        assert solve_exact(inst).total_cost >= flow_lower_bound(inst)


def test_extra_token_never_cheapens():
    for seed in range(20):
        inst = random_instance(seed, max_n=6, unit_demand=False, max_tokens=6)
        base = solve_exact(inst).total_cost
        for v in range(1, inst.n):
            demand = list(inst.demand)
            demand[v] += 1
            bumped = inst.replace(demand=tuple(demand))
            assert solve_exact(bumped).total_cost >= base


def test_optimum_invariant_under_relabeling():
    rng = random.Random(0)
    for seed in range(15):
        inst = random_instance(seed, max_n=7, unit_demand=False, max_tokens=7)
        perm = list(range(1, inst.n))
        rng.shuffle(perm)
        new_of = [0] + perm  # old id -> new id
        parent = [0] * inst.n
        weight = [0] * inst.n
        demand = [0] * inst.n
        for old in range(inst.n):
            nv = new_of[old]
            parent[nv] = -1 if old == 0 else new_of[inst.parent[old]]
            weight[nv] = inst.weight[old]
            demand[nv] = inst.demand[old]
        relabeled = TreeInstance(tuple(parent), tuple(weight), tuple(demand),
                                 inst.capacity)
        assert solve_exact(relabeled).total_cost == solve_exact(inst).total_cost


class TestKTours:
    def test_matches_unrestricted_when_enough_tours(self):
        for seed in range(25):
            inst = random_instance(seed, max_n=6, max_tokens=8)
            opt = solve_exact(inst)
            total = inst.total_demand
            d = min(4, total)
            if total <= d * inst.capacity and len(opt.tours) <= d:
                sol = solve_exact_k_tours(inst, d)
                assert sol.total_cost == opt.total_cost

    def test_restriction_can_cost_more(self):
        # two far-apart leaves, Q=2: one tour must take a detour
        inst = TreeInstance((-1, 0, 0), (0, 5, 5), (0, 2, 2), 2)
        assert solve_exact_k_tours(inst, 2).total_cost == 20
        with pytest.raises(InfeasibleError):
            solve_exact_k_tours(inst, 1)

    def test_tour_cap(self):
        with pytest.raises(OracleSizeError):
            solve_exact_k_tours(STAR, 5)


def test_merge_small_tours():
    sol = Solution.of(STAR, [Tour.of({1: 1}), Tour.of({2: 1}),
                             Tour.of({3: 1})])
    merged = merge_small_tours(STAR, sol)
    assert sum(t.load for t in merged.tours) == 3
    assert all(t.load <= STAR.capacity for t in merged.tours)
    # Q=2: loads 1,1,1 -> at most one merge pair
    assert len(merged.tours) == 2


def test_merge_preserves_optimal_cost():
    # on an optimum, merging can neither cheapen (it was optimal) nor cost
    # more (a merged tour spans a subset of the union's edges)
    for seed in range(20):
        inst = random_instance(seed, max_n=7, unit_demand=False, max_tokens=8)
        opt = solve_exact(inst)
        merged = merge_small_tours(inst, opt)
        assert merged.total_cost == opt.total_cost
        assert check_feasible(inst, merged).ok
        small = [t for t in merged.tours if 2 * t.load <= inst.capacity]
        assert len(small) <= 1
