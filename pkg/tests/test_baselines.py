from hypothesis import given, strategies as st

from treecvrp.baselines import flow_lower_bound, itp_solve
from treecvrp.instance import TreeInstance
from treecvrp.verify import check_feasible

from conftest import random_instance

STAR = TreeInstance((-1, 0, 0, 0), (0, 1, 1, 1), (0, 1, 1, 1), 2)


def test_flow_lower_bound_star():
    # 3 unit-weight leaf edges, Q=2: each edge crossed once, ceil(1/2)=1
    assert flow_lower_bound(STAR) == 6


def test_flow_lower_bound_ignores_empty_subtrees():
    inst = TreeInstance((-1, 0, 0), (0, 5, 7), (0, 2, 0), 2)
    assert flow_lower_bound(inst) == 2 * 5 * 1


def test_flow_lower_bound_single_leaf():
    inst = TreeInstance((-1, 0), (0, 5), (0, 1), 1)
    assert flow_lower_bound(inst) == 10


def test_itp_single_tour_when_total_fits():
    inst = TreeInstance((-1, 0, 1), (0, 2, 1), (0, 1, 1), 4)
    sol = itp_solve(inst)
    assert len(sol.tours) == 1
    assert sol.total_cost == 6


def test_itp_star():
    sol = itp_solve(STAR)
    assert check_feasible(STAR, sol).ok
    assert sol.total_cost == 6


def test_itp_is_deterministic():
    a = itp_solve(STAR)
    b = itp_solve(STAR)
    assert a.canonical() == b.canonical()


@given(st.integers(0, 10 ** 6))
def test_itp_feasible_and_above_lower_bound(seed):
    inst = random_instance(seed, max_n=10, unit_demand=False)
    sol = itp_solve(inst)
    assert check_feasible(inst, sol).ok
    assert sol.total_cost >= flow_lower_bound(inst)


def test_itp_tour_count_is_minimal():
    # DFS blocks: ceil(total/Q) tours, the fewest possible
    for seed in range(20):
        inst = random_instance(seed, unit_demand=False)
        sol = itp_solve(inst)
        total = inst.total_demand
        assert len(sol.tours) == -(-total // inst.capacity)
