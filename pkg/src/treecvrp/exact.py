"""Exact ground-truth solvers for desk-scale instances.

Two independent implementations cross-validate each other in the test suite:

* ``solve_exact`` -- memoized set-partition DP keyed by per-node residual
  demand vectors (tokens at one node are interchangeable, which is what makes
  ~14 tokens tractable).
* ``solve_exact_naive`` -- plain recursive partition enumeration over
  individual tokens, capped at 9 tokens. Deliberately shares no code with the
  DP beyond the instance types.

``solve_exact_k_tours`` is the few-tours DP: per-node states are vectors of
per-tour coverage counts, children combined by convolution.
"""

from __future__ import annotations

from dataclasses import dataclass

from .instance import Solution, Tour, TreeInstance, pickup_set_cost


class OracleSizeError(ValueError):
    """Instance exceeds the configured oracle limits."""


class InfeasibleError(ValueError):
    """No feasible solution under the given restrictions."""


@dataclass(frozen=True)
class OracleLimits:
    max_tokens: int = 14
    max_tours: int = 4


DEFAULT_LIMITS = OracleLimits()


def _groups_from(inst: TreeInstance, residual: tuple[int, ...], pivot: int):
    """All pickup groups with load <= Q that take >= 1 token at the pivot."""
    q = inst.capacity
    nodes = [v for v in range(pivot, inst.n) if residual[v] > 0]
    out: list[tuple[tuple[int, int], ...]] = []

    def rec(idx: int, load: int, acc: list[tuple[int, int]]):
        if idx == len(nodes):
            if acc and acc[0][0] == pivot:
                out.append(tuple(acc))
            return
        v = nodes[idx]
        lo = 1 if v == pivot else 0
        hi = min(residual[v], q - load)
        if lo > hi:
            if v == pivot:
                return
            rec(idx + 1, load, acc)
            return
        for c in range(lo, hi + 1):
            if c:
                acc.append((v, c))
                rec(idx + 1, load + c, acc)
                acc.pop()
            else:
                rec(idx + 1, load, acc)

    rec(0, 0, [])
    return out


def solve_exact(inst: TreeInstance, limits: OracleLimits = DEFAULT_LIMITS) -> Solution:
    """Optimal solution via memoized DP over residual demand vectors."""
    total = inst.total_demand
    if total > limits.max_tokens:
        raise OracleSizeError(
            f"{total} tokens exceeds oracle limit {limits.max_tokens}")
    if total == 0:
        return Solution.of(inst, ())

    group_cost_cache: dict[tuple[int, ...], int] = {}

    def group_cost(group) -> int:
        key = tuple(v for v, _ in group)
        if key not in group_cost_cache:
            group_cost_cache[key] = pickup_set_cost(inst, key)
        return group_cost_cache[key]

    memo: dict[tuple[int, ...], tuple[int, tuple | None]] = {}

    def solve(residual: tuple[int, ...]) -> tuple[int, tuple | None]:
        if residual in memo:
            return memo[residual]
        pivot = next((v for v, r in enumerate(residual) if r), None)
        if pivot is None:
            memo[residual] = (0, None)
            return memo[residual]
        best = None
        # Groups come out in ascending canonical order, so ties resolve to the
        # lexicographically smallest group encoding deterministically.
        for group in _groups_from(inst, residual, pivot):
            rest = list(residual)
            for v, c in group:
                rest[v] -= c
            sub, _ = solve(tuple(rest))
            cand = group_cost(group) + sub
            if best is None or cand < best[0]:
                best = (cand, group)
        memo[residual] = best  # type: ignore[assignment]
        return best  # type: ignore[return-value]

    start = tuple(inst.demand)
    cost, _ = solve(start)
    tours = []
    state = start
    while any(state):
        _, group = memo[state]
        assert group is not None
        tours.append(Tour(group))
        rest = list(state)
        for v, c in group:
            rest[v] -= c
        state = tuple(rest)
    sol = Solution.of(inst, tours)
    assert sol.total_cost == cost
    return sol


def solve_exact_naive(inst: TreeInstance, max_tokens: int = 9) -> Solution:
    """Brute-force partition enumeration over individual tokens."""
    total = inst.total_demand
    if total > max_tokens:
        raise OracleSizeError(
            f"{total} tokens exceeds naive-enumerator limit {max_tokens}")
    tokens: list[int] = []
    for v in range(inst.n):
        tokens.extend([v] * inst.demand[v])
    q = inst.capacity
    best: list = [None]

    groups: list[list[int]] = []
    loads: list[int] = []

    def rec(i: int):
        if i == len(tokens):
            tours = [Tour.of({v: g.count(v) for v in set(g)}) for g in groups]
            sol = Solution.of(inst, tours)
            key = (sol.total_cost, sol.canonical())
            if best[0] is None or key < best[0][0:2]:
                best[0] = (sol.total_cost, sol.canonical(), sol)
            return
        v = tokens[i]
        for gi in range(len(groups)):
            if loads[gi] < q:
                groups[gi].append(v)
                loads[gi] += 1
                rec(i + 1)
                groups[gi].pop()
                loads[gi] -= 1
        groups.append([v])
        loads.append(1)
        rec(i + 1)
        groups.pop()
        loads.pop()

    rec(0)
    if best[0] is None:
        return Solution.of(inst, ())
    return best[0][2]


def solve_exact_k_tours(inst: TreeInstance, d: int,
                        limits: OracleLimits = DEFAULT_LIMITS) -> Solution:
    """Optimum among solutions with at most ``d`` tours."""
    if d > limits.max_tours:
        raise OracleSizeError(f"{d} tours exceeds oracle limit {limits.max_tours}")
    q = inst.capacity
    if inst.total_demand > d * q:
        raise InfeasibleError(
            f"total demand {inst.total_demand} > {d} tours x Q={q}")

    def compositions(total: int):
        """All ways to split `total` tokens over d tours, each part <= Q."""
        out = []

        def rec(i, left, acc):
            if i == d:
                if left == 0:
                    out.append(tuple(acc))
                return
            for c in range(min(left, q) + 1):
                acc.append(c)
                rec(i + 1, left - c, acc)
                acc.pop()

        rec(0, total, [])
        return out

    # table[v]: state -> (cost, witness); witness = (own composition, child states)
    table: dict[int, dict] = {}
    for v in reversed(inst.topo_order):
        cur: dict = {}
        for comp in compositions(inst.demand[v]):
            cur[comp] = (0, (comp, ()))
        for child in inst.children[v]:
            sub = table[child]
            nxt: dict = {}
            for s1, (c1, w1) in cur.items():
                for s2, (c2, _) in sub.items():
                    merged = tuple(a + b for a, b in zip(s1, s2))
                    if any(x > q for x in merged):
                        continue
                    cost = c1 + c2
                    prev = nxt.get(merged)
                    if prev is None or cost < prev[0]:
                        nxt[merged] = (cost, (w1[0], w1[1] + ((child, s2),)))
            cur = nxt
        if v != 0:
            w_e = inst.weight[v]
            cur = {s: (c + 2 * w_e * sum(1 for x in s if x), w)
                   for s, (c, w) in cur.items()}
        table[v] = cur

    root = table[0]
    if not root:
        raise InfeasibleError("no feasible assignment")
    best_state = min(root, key=lambda s: (root[s][0], s))
    pickups: list[dict[int, int]] = [dict() for _ in range(d)]

    def collect(v: int, state):
        comp, kids = table[v][state][1]
        for i, c in enumerate(comp):
            if c:
                pickups[i][v] = c
        for child, cs in kids:
            collect(child, cs)

    # Recompute witnesses along the chosen path: table kept full witnesses.
    collect(0, best_state)
    tours = [Tour.of(p) for p in pickups if p]
    return Solution.of(inst, tours)


def merge_small_tours(inst: TreeInstance, sol: Solution) -> Solution:
    """Greedily merge pairs of tours whose loads both fit in Q/2."""
    q = inst.capacity
    tours = list(sol.tours)
    changed = True
    while changed:
        changed = False
        small = [i for i, t in enumerate(tours) if 2 * t.load <= q]
        if len(small) >= 2:
            i, j = small[0], small[1]
            merged: dict[int, int] = dict(tours[i].pickups)
            for v, c in tours[j].pickups:
                merged[v] = merged.get(v, 0) + c
            tours[i] = Tour.of(merged)
            del tours[j]
            changed = True
    return Solution.of(inst, tours)
