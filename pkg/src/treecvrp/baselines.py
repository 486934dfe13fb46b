"""Classical baseline solver and lower bound.

``flow_lower_bound`` is the per-edge flow bound: every edge e must be crossed
by at least ceil(D_e / Q) tours, each paying 2*w(e). ``itp_solve`` is iterated
tour partitioning: lay the tokens out in DFS order and cut the sequence into
consecutive capacity-Q blocks.
"""

from __future__ import annotations

import math

from .instance import Solution, Tour, TreeInstance, Weight


def flow_lower_bound(inst: TreeInstance) -> Weight:
    total = 0
    for v in range(1, inst.n):
        d_e = inst.subtree_demand[v]
        if d_e:
            total += 2 * inst.weight[v] * math.ceil(d_e / inst.capacity)
    return total


def _dfs_token_order(inst: TreeInstance) -> list[int]:
    """One entry per token, in DFS order with children visited ascending."""
    order: list[int] = []
    stack = [0]
    while stack:
        v = stack.pop()
        order.extend([v] * inst.demand[v])
        stack.extend(reversed(inst.children[v]))
    return order


def itp_solve(inst: TreeInstance) -> Solution:
    tokens = _dfs_token_order(inst)
    q = inst.capacity
    tours = []
    for i in range(0, len(tokens), q):
        block: dict[int, int] = {}
        for v in tokens[i:i + q]:
            block[v] = block.get(v, 0) + 1
        tours.append(Tour.of(block))
    return Solution.of(inst, tours)
