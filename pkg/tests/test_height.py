import math
import random

import pytest

from treecvrp.exact import solve_exact
from treecvrp.generate import generate
from treecvrp.height import (
    build_reduced_tree, decompose_paths, lift_solution, path_length_trigger,
    project_solution, select_anchors)
from treecvrp.instance import Solution, Tour, TreeInstance
from treecvrp.verify import check_feasible

from conftest import random_instance


def long_path(n, q=3):
    parent = tuple([-1] + list(range(n - 1)))
    weight = (0,) + (1,) * (n - 1)
    demand = (0,) * (n - 1) + (2,)
    return TreeInstance(parent, weight, demand, q)


class TestDecomposition:
    def test_path_is_one_level(self):
        d = decompose_paths(long_path(10))
        assert d.num_levels == 1
        assert d.levels[0] == (tuple(range(10)),)

    def test_edges_partitioned(self):
        for seed in range(30):
            inst = random_instance(seed, max_n=12)
            d = decompose_paths(inst)
            owned = []
            for lvl, level in enumerate(d.levels, start=1):
                for path in level:
                    # non-root paths start at their attachment node
                    if lvl > 1:
                        assert d.node_level[path[0]] < lvl
                    owned.extend(zip(path, path[1:]))
            assert sorted(owned) == sorted(
                (inst.parent[v], v) for v in range(1, inst.n))

    def test_perfect_binary_tree_levels(self):
        parent = tuple([-1] + [(v - 1) // 2 for v in range(1, 15)])
        inst = TreeInstance(parent, (0,) + (1,) * 14, (0,) * 14 + (1,), 2)
        d = decompose_paths(inst)
        assert d.num_levels == 4  # floor(log2(15)) + 1

    def test_level_count_logarithmic(self):
        for n in (10, 50, 200, 1000):
            inst = generate("random", n, 3, "unit", seed=n)
            d = decompose_paths(inst)
            assert d.num_levels <= math.floor(math.log2(n)) + 1


class TestAnchors:
    def test_unit_path_example(self):
        assert select_anchors([1, 1, 1, 1], 1.0) == [0, 1, 3, 4]

    def test_endpoints_always_anchored(self):
        for eps in (0.25, 0.5, 1.0, 2.0):
            a = select_anchors([3, 1, 4, 1, 5, 9], eps)
            assert a[0] == 0 and a[1] == 1 and a[-1] == 6
            assert a == sorted(set(a))

    def test_huge_budget_collapses_to_three(self):
        assert select_anchors([1, 2, 3, 4], 100.0) == [0, 1, 4]

    def test_zero_weight_head_is_skipped(self):
        # the zero-weight stretch after anchor 1 compresses onto one anchor
        assert select_anchors([0, 0, 0, 1, 1], 0.5) == [0, 1, 4, 5]

    def test_anchor_growth_and_count_bound(self):
        rng = random.Random(5)
        for _ in range(30):
            w = [rng.randint(1, 9) for _ in range(rng.randint(3, 40))]
            eps = rng.choice([0.25, 0.5, 1.0])
            a = select_anchors(w, eps)
            prefix = [0]
            for x in w:
                prefix.append(prefix[-1] + x)
            # every non-final anchor step grows the span geometrically ...
            for i, j in zip(a[1:], a[2:]):
                if j != len(w):
                    assert prefix[j] > (1 + eps) * prefix[i]
            # ... so the anchor count is logarithmic in the path weight
            assert len(a) <= 3 + math.log(sum(w), 1 + eps)

    def test_span_within_budget(self):
        w = [2, 1, 1, 1, 1, 1, 8, 1, 1]
        eps = 0.5
        a = select_anchors(w, eps)
        prefix = [0]
        for x in w:
            prefix.append(prefix[-1] + x)
        for i, j in zip(a[1:], a[2:]):
            # nodes strictly between consecutive anchors stay within budget
            if j - i > 1:
                assert prefix[j - 1] - prefix[i] <= eps * prefix[i]


class TestReducedTree:
    def test_short_paths_untouched(self):
        inst = random_instance(3, max_n=6)
        rt = build_reduced_tree(inst, 0.5)
        assert rt.tree == inst  # all paths below the trigger

    def test_distances_never_increase(self):
        for seed in range(20):
            inst = generate("random", 60, 3, "unit", seed)
            rt = build_reduced_tree(inst, 0.5)
            for v in range(inst.n):
                assert rt.tree.dist_root[v] <= inst.dist_root[v]

    def test_height_shrinks_on_long_path(self):
        inst = long_path(64)
        rt = build_reduced_tree(inst, 0.5)
        assert rt.tree.height < inst.height
        trigger = path_length_trigger(inst.n, 0.5)
        assert inst.n - 1 > trigger  # the path did trigger

    def test_anchor_distance_preserved(self):
        # the leaf is always an anchor; its depot distance is exact
        inst = long_path(40)
        rt = build_reduced_tree(inst, 0.5)
        assert rt.tree.dist_root[39] == inst.dist_root[39]

    def test_zeroed_edges_recorded(self):
        inst = long_path(40)
        rt = build_reduced_tree(inst, 0.5)
        assert rt.zeroed_edges
        for v in rt.zeroed_edges:
            assert rt.tree.weight[v] == 0

    def test_compression_conserves_total_weight(self):
        inst = long_path(64)
        rt = build_reduced_tree(inst, 0.5)
        assert sum(rt.tree.weight) == sum(inst.weight)

    def test_up_pushed_nodes_stay_within_eps(self):
        # an up-pushed node sits at its anchor; the forgotten stub was within
        # the eps budget, so lifting a visit back costs at most a 1+eps factor
        inst = long_path(64)
        rt = build_reduced_tree(inst, 0.5)
        assert rt.zeroed_edges
        for v in rt.zeroed_edges:
            assert inst.dist_root[v] <= (1 + 0.5) * rt.tree.dist_root[v]

    def test_rejects_bad_eps(self):
        with pytest.raises(ValueError):
            build_reduced_tree(long_path(10), 0)


class TestProjectLift:
    def test_project_never_costs_more(self):
        from treecvrp.baselines import itp_solve
        for seed in range(15):
            inst = generate("path", 20, 3, "unit", seed)
            rt = build_reduced_tree(inst, 0.5)
            sol = itp_solve(inst)
            proj = project_solution(rt, sol)
            assert proj.total_cost <= sol.total_cost

    def test_lift_round_trips_feasibility(self):
        inst = generate("path", 20, 3, "unit", 1)
        rt = build_reduced_tree(inst, 0.5)
        from treecvrp.baselines import itp_solve
        red_sol = itp_solve(rt.tree)
        lifted = lift_solution(rt, red_sol)
        assert check_feasible(inst, lifted).ok

    def test_project_lift_round_trip(self):
        from treecvrp.baselines import itp_solve
        inst = generate("path", 20, 3, "unit", 1)
        rt = build_reduced_tree(inst, 0.5)
        sol = itp_solve(rt.tree)
        back = project_solution(rt, lift_solution(rt, sol))
        assert back.canonical() == sol.canonical()
        assert back.total_cost == sol.total_cost

    def test_lift_rejects_infeasible(self):
        inst = generate("path", 20, 3, "unit", 1)
        rt = build_reduced_tree(inst, 0.5)
        bogus = Solution.of(rt.tree, [Tour.of({1: 1})])
        with pytest.raises(ValueError):
            lift_solution(rt, bogus)


def test_sandwich_on_small_paths():
    # opt' <= opt <= (1 + 3*eps) * opt'; the full 100-instance sweep is in
    # the acceptance suite
    eps = 0.5
    for seed in range(10):
        inst = generate("path", 9, 2, "unit", seed)
        rt = build_reduced_tree(inst, eps)
        opt = solve_exact(inst).total_cost
        opt_red = solve_exact(rt.tree).total_cost
        assert opt_red <= opt <= (1 + 3 * eps) * opt_red
