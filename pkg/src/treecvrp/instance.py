"""Rooted-tree CVRP instances, tours, solutions, file I/O and preprocessing.

Node 0 is always the depot. Edge weights are non-negative integers after
preprocessing; raw instances may carry non-negative rationals (``Fraction``).
A tour is stored as its pickup multiset only -- on a tree the cheapest closed
walk through a pickup set is determined by the set, so no explicit walk is kept.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Mapping

Weight = int | Fraction


class InstanceError(ValueError):
    """Malformed instance data (parse errors, bad tree structure, bad Q)."""


class DisconnectedDemandError(InstanceError):
    """Removing over-weight edges would cut a demand node off the depot."""


def _as_weight(value: Weight) -> Weight:
    if isinstance(value, Fraction) and value.denominator == 1:
        return int(value)
    return value


@dataclass(frozen=True)
class TreeInstance:
    """A rooted edge-weighted tree with token demands and vehicle capacity.

    ``parent[v]`` is the parent of node v (``parent[0] == -1``), ``weight[v]``
    the weight of the edge (parent[v], v) with ``weight[0] == 0``.
    """

    parent: tuple[int, ...]
    weight: tuple[Weight, ...]
    demand: tuple[int, ...]
    capacity: int

    def __post_init__(self):
        n = len(self.parent)
        if n < 1 or self.parent[0] != -1:
            raise InstanceError("node 0 must be the depot with parent -1")
        if len(self.weight) != n or len(self.demand) != n:
            raise InstanceError("parent/weight/demand length mismatch")
        if self.capacity < 1:
            raise InstanceError(f"capacity must be positive, got {self.capacity}")
        if self.weight[0] != 0:
            raise InstanceError("depot carries no parent edge; weight[0] must be 0")
        for v in range(1, n):
            p = self.parent[v]
            if not 0 <= p < n or p == v:
                raise InstanceError(f"node {v}: invalid parent {p}")
            if self.weight[v] < 0:
                raise InstanceError(f"node {v}: negative edge weight")
        if any(d < 0 for d in self.demand):
            raise InstanceError("negative demand")
        # Reachability check; a cycle among non-root nodes never reaches 0.
        for v in range(1, n):
            u, steps = v, 0
            while u != 0:
                u = self.parent[u]
                steps += 1
                if steps > n:
                    raise InstanceError(f"node {v}: parent chain never reaches the depot")

    @property
    def n(self) -> int:
        return len(self.parent)

    @cached_property
    def children(self) -> tuple[tuple[int, ...], ...]:
        kids: list[list[int]] = [[] for _ in range(self.n)]
        for v in range(1, self.n):
            kids[self.parent[v]].append(v)
        return tuple(tuple(sorted(k)) for k in kids)

    @cached_property
    def depth(self) -> tuple[int, ...]:
        """Depth in levels; the depot has depth 1."""
        d = [0] * self.n
        d[0] = 1
        for v in self.topo_order[1:]:
            d[v] = d[self.parent[v]] + 1
        return tuple(d)

    @cached_property
    def dist_root(self) -> tuple[Weight, ...]:
        d: list[Weight] = [0] * self.n
        for v in self.topo_order[1:]:
            d[v] = _as_weight(d[self.parent[v]] + self.weight[v])
        return tuple(d)

    @cached_property
    def topo_order(self) -> tuple[int, ...]:
        """Nodes ordered root-first (every parent before its children)."""
        order = [0]
        stack = [0]
        while stack:
            u = stack.pop()
            for c in self.children_raw[u]:
                order.append(c)
                stack.append(c)
        return tuple(order)

    @cached_property
    def children_raw(self) -> tuple[tuple[int, ...], ...]:
        kids: list[list[int]] = [[] for _ in range(self.n)]
        for v in range(1, self.n):
            kids[self.parent[v]].append(v)
        return tuple(tuple(k) for k in kids)

    @property
    def height(self) -> int:
        return max(self.depth)

    def subtree(self, v: int) -> tuple[int, ...]:
        """All nodes of the subtree rooted at v, root-first."""
        out = [v]
        stack = [v]
        while stack:
            u = stack.pop()
            for c in self.children_raw[u]:
                out.append(c)
                stack.append(c)
        return tuple(out)

    @cached_property
    def subtree_demand(self) -> tuple[int, ...]:
        total = list(self.demand)
        for v in reversed(self.topo_order):
            if v:
                total[self.parent[v]] += total[v]
        return tuple(total)

    @property
    def total_demand(self) -> int:
        return sum(self.demand)

    def replace(self, **kw) -> "TreeInstance":
        fields = dict(parent=self.parent, weight=self.weight, demand=self.demand,
                      capacity=self.capacity)
        fields.update(kw)
        return TreeInstance(**fields)


@dataclass(frozen=True)
class Tour:
    """One vehicle route, as the multiset of (node, tokens picked)."""

    pickups: tuple[tuple[int, int], ...]

    def __post_init__(self):
        seen = set()
        for node, cnt in self.pickups:
            if cnt < 1:
                raise ValueError(f"non-positive pickup {cnt} at node {node}")
            if node in seen:
                raise ValueError(f"duplicate pickup entry for node {node}")
            seen.add(node)

    @classmethod
    def of(cls, pickups: Mapping[int, int] | Iterable[tuple[int, int]]) -> "Tour":
        items = pickups.items() if isinstance(pickups, Mapping) else pickups
        return cls(tuple(sorted((v, c) for v, c in items if c)))

    @property
    def load(self) -> int:
        return sum(c for _, c in self.pickups)

    def as_dict(self) -> dict[int, int]:
        return dict(self.pickups)

    @property
    def nodes(self) -> tuple[int, ...]:
        return tuple(v for v, _ in self.pickups)


@dataclass(frozen=True)
class Solution:
    """A set of tours with cached total cost."""

    tours: tuple[Tour, ...]
    total_cost: Weight

    @classmethod
    def of(cls, inst: TreeInstance, tours: Iterable[Tour]) -> "Solution":
        tours = tuple(tours)
        return cls(tours, solution_cost(inst, tours))

    @property
    def covered(self) -> Counter:
        cov: Counter = Counter()
        for t in self.tours:
            for v, c in t.pickups:
                cov[v] += c
        return cov

    def canonical(self) -> tuple:
        return tuple(sorted(t.pickups for t in self.tours))


def tour_cost(inst: TreeInstance, tour: Tour) -> Weight:
    """2x the weight of the minimal subtree connecting depot and pickup nodes."""
    return pickup_set_cost(inst, (v for v, _ in tour.pickups))


def pickup_set_cost(inst: TreeInstance, nodes: Iterable[int]) -> Weight:
    marked = set()
    for v in nodes:
        while v != 0 and v not in marked:
            marked.add(v)
            v = inst.parent[v]
    return _as_weight(2 * sum(inst.weight[v] for v in marked))


def solution_cost(inst: TreeInstance, tours: Iterable[Tour]) -> Weight:
    return _as_weight(sum(tour_cost(inst, t) for t in tours))


def normalize_demands(inst: TreeInstance) -> tuple[TreeInstance, Solution]:
    """Peel full vehicle loads at each node into dedicated trivial tours.

    Returns the residual instance (d(v) < Q everywhere) and the peeled tours.
    """
    q = inst.capacity
    residual = list(inst.demand)
    trivial: list[Tour] = []
    for v in range(inst.n):
        while residual[v] >= q:
            residual[v] -= q
            trivial.append(Tour.of({v: q}))
    out = inst.replace(demand=tuple(residual))
    return out, Solution.of(inst, trivial)


@dataclass(frozen=True)
class ScaledInstance:
    instance: TreeInstance
    factor: Fraction  # output weight ~= factor * lifted raw weight
    kept_nodes: tuple[int, ...]  # old ids, index = new id


def scale_weights(inst: TreeInstance, eps: Fraction | float,
                  w_guess: Weight) -> ScaledInstance:
    """Round and scale edge weights to a polynomially bounded integer range.

    Edges heavier than ``w_guess`` are removed (their subtrees must carry no
    demand); remaining weights are lifted to at least eps*w_guess/(4 n^3),
    rescaled so the minimum becomes 1, divided by eps and rounded up.
    """
    eps = Fraction(eps)
    if eps <= 0:
        raise ValueError("eps must be positive")

    # Drop subtrees behind over-weight edges.
    dropped = set()
    for v in inst.topo_order[1:]:
        if inst.parent[v] in dropped or inst.weight[v] > w_guess:
            dropped.add(v)
            if inst.subtree_demand[v] > 0 and inst.weight[v] > w_guess:
                raise DisconnectedDemandError(
                    f"edge to node {v} exceeds guess {w_guess} but its subtree has demand")
    if dropped:
        for v in dropped:
            if inst.demand[v] > 0:
                raise DisconnectedDemandError(f"demand node {v} disconnected")
    kept = [v for v in range(inst.n) if v not in dropped]
    remap = {old: new for new, old in enumerate(kept)}
    n = len(kept)

    floor_w = eps * w_guess / (4 * n ** 3)
    lifted = [max(Fraction(inst.weight[v]), floor_w) if v else Fraction(0) for v in kept]
    m = min(w for w in lifted[1:]) if n > 1 else Fraction(1)
    factor = 1 / (m * eps)
    new_weight = tuple(
        0 if i == 0 else math.ceil(lifted[i] * factor) for i in range(n))
    out = TreeInstance(
        parent=tuple(-1 if i == 0 else remap[inst.parent[kept[i]]] for i in range(n)),
        weight=new_weight,
        demand=tuple(inst.demand[v] for v in kept),
        capacity=inst.capacity,
    )
    return ScaledInstance(out, factor, tuple(kept))


# ---------------------------------------------------------------------------
# file formats

HEADER = "cvrp-tree v1"


def _parse_weight(tok: str) -> Weight:
    try:
        return int(tok)
    except ValueError:
        return Fraction(tok)


def load_instance(text: str) -> TreeInstance:
    """Parse the line-oriented instance format (see save_instance)."""
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0] != HEADER:
        raise InstanceError(f"missing header {HEADER!r}")
    n = q = None
    edges: list[tuple[int, int, Weight]] = []
    demands: dict[int, int] = {}
    for ln in lines[1:]:
        parts = ln.split()
        try:
            if parts[0] == "n" and len(parts) == 2:
                n = int(parts[1])
            elif parts[0] == "Q" and len(parts) == 2:
                q = int(parts[1])
            elif parts[0] == "edge" and len(parts) == 4:
                edges.append((int(parts[1]), int(parts[2]), _parse_weight(parts[3])))
            elif parts[0] == "demand" and len(parts) == 3:
                node = int(parts[1])
                if node in demands:
                    raise InstanceError(f"duplicate demand line for node {node}")
                demands[node] = int(parts[2])
            else:
                raise InstanceError(f"unrecognized line: {ln!r}")
        except (ValueError, ZeroDivisionError) as exc:
            if isinstance(exc, InstanceError):
                raise
            raise InstanceError(f"malformed line: {ln!r}") from exc
    if n is None or q is None:
        raise InstanceError("missing n or Q line")
    parent: list[int] = [-1] * n
    weight: list[Weight] = [0] * n
    seen_child = set()
    for p, c, w in edges:
        if not (0 <= p < n and 0 < c < n):
            raise InstanceError(f"edge ({p},{c}) out of range")
        if c in seen_child:
            raise InstanceError(f"duplicate node id {c} as edge child")
        seen_child.add(c)
        parent[c] = p
        weight[c] = w
    if len(edges) != n - 1:
        raise InstanceError(f"expected {n - 1} edges, got {len(edges)}")
    demand = [0] * n
    for node, d in demands.items():
        if not 0 <= node < n:
            raise InstanceError(f"demand for unknown node {node}")
        demand[node] = d
    return TreeInstance(tuple(parent), tuple(weight), tuple(demand), q)


def save_instance(inst: TreeInstance) -> str:
    lines = [HEADER, f"n {inst.n}", f"Q {inst.capacity}"]
    for v in range(1, inst.n):
        lines.append(f"edge {inst.parent[v]} {v} {inst.weight[v]}")
    for v in range(inst.n):
        if inst.demand[v]:
            lines.append(f"demand {v} {inst.demand[v]}")
    return "\n".join(lines) + "\n"


def save_solution(sol: Solution) -> str:
    lines = []
    for t in sorted(sol.tours, key=lambda t: t.pickups):
        body = " ".join(f"{v}:{c}" for v, c in t.pickups)
        lines.append(f"tour {body}".rstrip())
    lines.append(f"cost {sol.total_cost}")
    return "\n".join(lines) + "\n"


def load_solution(text: str) -> Solution:
    tours: list[Tour] = []
    cost: Weight | None = None
    for ln in text.splitlines():
        ln = ln.strip()
        if not ln:
            continue
        parts = ln.split()
        if parts[0] == "tour":
            pick = {}
            for item in parts[1:]:
                node, _, cnt = item.partition(":")
                pick[int(node)] = int(cnt)
            tours.append(Tour.of(pick))
        elif parts[0] == "cost" and len(parts) == 2:
            cost = _parse_weight(parts[1])
        else:
            raise InstanceError(f"unrecognized solution line: {ln!r}")
    if cost is None:
        raise InstanceError("missing cost line")
    return Solution(tuple(tours), cost)
