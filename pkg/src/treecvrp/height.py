"""Height reduction: path decomposition, anchor selection and up-pushes.

The tree's edge set is decomposed into heavy-path-style levels; long paths are
compressed by making the nodes between consecutive anchors zero-weight children
of the earlier anchor, with the anchor-to-anchor edge carrying the summed
segment weight. Distances to the root never increase, so any solution projects
to the reduced tree at no extra cost and lifts back at a small one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

from .instance import Solution, TreeInstance, Weight


@dataclass(frozen=True)
class PathDecomposition:
    """Edge-disjoint paths grouped into levels.

    Each path is the node list [top, ..., leaf]; the top node of a non-level-1
    path belongs to a lower level (it is the attachment point), and the path
    owns the edges between consecutive entries.
    """

    levels: tuple[tuple[tuple[int, ...], ...], ...]
    node_level: tuple[int, ...]

    @property
    def num_levels(self) -> int:
        return len(self.levels)


def _subtree_sizes(inst: TreeInstance) -> list[int]:
    size = [1] * inst.n
    for v in reversed(inst.topo_order):
        if v:
            size[inst.parent[v]] += size[v]
    return size


def decompose_paths(inst: TreeInstance) -> PathDecomposition:
    size = _subtree_sizes(inst)
    node_level = [0] * inst.n
    levels: list[list[tuple[int, ...]]] = []
    # (root-of-pending-subtree, attachment-node-or-None, level)
    pending = [(0, None, 1)]
    while pending:
        top, attach, lvl = pending.pop()
        # D-path: always descend into the child with the largest subtree,
        # ties broken by smallest id (children are stored ascending).
        path = [top]
        v = top
        while inst.children[v]:
            v = max(inst.children[v], key=lambda c: (size[c], -c))
            path.append(v)
        for u in path:
            node_level[u] = lvl
        full = tuple(path) if attach is None else (attach,) + tuple(path)
        while len(levels) < lvl:
            levels.append([])
        levels[lvl - 1].append(full)
        on_path = set(path)
        for u in path:
            for c in inst.children[u]:
                if c not in on_path:
                    pending.append((c, u, lvl + 1))
    return PathDecomposition(
        tuple(tuple(sorted(lv)) for lv in levels), tuple(node_level))


def select_anchors(weights: list[Weight], eps: float) -> list[int]:
    """Anchor positions on a path given its consecutive edge weights.

    ``weights[i]`` is the weight of the edge between path nodes i and i+1.
    Returns indices into the node list; index 0 and the last node are always
    anchors, index 1 is the second anchor.
    """
    k = len(weights)  # number of edges; nodes are 0..k
    if k == 0:
        return [0]
    prefix = [0]
    for w in weights:
        prefix.append(prefix[-1] + w)
    anchors = [0, 1]
    while anchors[-1] < k:
        a = anchors[-1]
        budget = eps * prefix[a]
        # farthest j such that the weight from a to the node before j fits
        j = a + 1
        while j < k and prefix[j] - prefix[a] <= budget:
            j += 1
        if prefix[k - 1] - prefix[a] <= budget:
            j = k  # whole tail within the budget: last node is the next anchor
        anchors.append(j)
    return anchors


@dataclass(frozen=True)
class ReducedTree:
    tree: TreeInstance
    original: TreeInstance
    node_map: tuple[int, ...]  # identity bijection, kept explicit
    zeroed_edges: tuple[int, ...]  # nodes whose parent edge was zeroed

    def to_reduced(self, v: int) -> int:
        return self.node_map[v]

    def to_original(self, v: int) -> int:
        return self.node_map[v]


def path_length_trigger(n: int, eps: float, delta: float = 1.0) -> float:
    return delta * math.log2(max(n, 2)) / eps


def build_reduced_tree(inst: TreeInstance, eps: float,
                       delta: float = 1.0) -> ReducedTree:
    if eps <= 0:
        raise ValueError("eps must be positive")
    decomp = decompose_paths(inst)
    parent = list(inst.parent)
    weight = list(inst.weight)
    trigger = path_length_trigger(inst.n, eps, delta)
    zeroed: list[int] = []
    for level in decomp.levels:
        for path in level:
            n_edges = len(path) - 1
            if n_edges <= trigger:
                continue
            edge_w = [inst.weight[path[i + 1]] for i in range(n_edges)]
            anchors = select_anchors(edge_w, eps)
            for ai, aj in zip(anchors, anchors[1:]):
                a_node = path[ai]
                seg = sum(edge_w[ai:aj])
                for mid in range(ai + 1, aj):
                    parent[path[mid]] = a_node
                    weight[path[mid]] = 0
                    zeroed.append(path[mid])
                parent[path[aj]] = a_node
                weight[path[aj]] = seg
    reduced = TreeInstance(tuple(parent), tuple(weight), inst.demand, inst.capacity)
    return ReducedTree(reduced, inst, tuple(range(inst.n)), tuple(sorted(zeroed)))


def project_solution(rt: ReducedTree, sol: Solution) -> Solution:
    """Re-cost a solution of the original tree on the reduced tree."""
    return Solution.of(rt.tree, sol.tours)


def lift_solution(rt: ReducedTree, sol: Solution) -> Solution:
    """Re-cost a reduced-tree solution on the original tree."""
    from .verify import check_feasible

    report = check_feasible(rt.tree, sol)
    if not report.ok:
        raise ValueError(f"solution infeasible on reduced tree: {report.violations}")
    return Solution.of(rt.original, sol.tours)
