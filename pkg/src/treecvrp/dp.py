"""Approximation-scheme dynamic programs over per-node tour-size profiles.

Both solvers sweep the tree bottom-up. A node's table maps a profile (the
sorted multiset of sizes of the partial tours entering its subtree) to the
cheapest witness realizing it. Children are folded in one at a time -- every
child tour is either kept separate or merged into one distinct accumulated
tour -- then the node's own tokens are distributed, and finally the parent
edge is charged once per tour.

``solve_bicriteria`` stores sizes rounded DOWN to a threshold grid built from
a much finer eps', so its cost never exceeds the optimum while true loads may
overshoot Q slightly. When the grid degenerates to 1..Q (eps' small enough)
the rounding is the identity and the solver is exact.

``solve_structured`` keeps exact sizes but only admits profiles with the
structured bucket shape (small buckets hold at most gamma tours; bigger
buckets take at most g distinct sizes), optionally padding tours with
artificial tokens to hit shared sizes. Its output is always capacity-feasible;
pads are stripped before the solution is returned.

Profile enumeration is reachability-driven: only profiles realized by some
combination of children exist in a table, and equal profiles keep the single
cheapest witness. This yields the same optimum as the textbook table indexed
by all profiles, without materializing the astronomically many unreachable
entries.
"""

from __future__ import annotations

import bisect
import math
from collections import Counter
from dataclasses import dataclass

from .instance import Solution, Tour, TreeInstance, Weight
from .structure import ThresholdSchedule, TransformParams, thresholds


class ResourceLimitError(RuntimeError):
    """The DP frontier at some node exceeded the state budget."""

    def __init__(self, message: str, node: int):
        super().__init__(message)
        self.node = node


class NoStructuredSolutionError(RuntimeError):
    """The structure filter rejected every profile at some node."""

    def __init__(self, message: str, node: int):
        super().__init__(message)
        self.node = node


@dataclass(frozen=True)
class DPParams:
    gamma: int
    groups: int
    schedule: ThresholdSchedule
    pad_cap: int = 0  # max pad tokens the DP may add per node
    max_states: int = 200_000

    @classmethod
    def generous(cls, inst: TreeInstance, eps: float = 0.5) -> "DPParams":
        """Parameters making every bucket small; the DP is then exact."""
        return cls(gamma=inst.total_demand + 1, groups=1,
                   schedule=thresholds(inst.capacity, eps))

    @classmethod
    def defaults(cls, inst: TreeInstance, eps: float,
                 pad_cap: int = 0) -> "DPParams":
        tp = TransformParams.defaults(inst.n, eps)
        return cls(gamma=tp.gamma, groups=tp.groups,
                   schedule=thresholds(inst.capacity, eps), pad_cap=pad_cap)


@dataclass(frozen=True)
class _Build:
    """One partial tour: stored size plus its physical and pad pickups."""

    size: int
    phys: tuple[tuple[int, int], ...] = ()
    pads: tuple[tuple[int, int], ...] = ()


# table: profile key (sorted size tuple) -> (cost, tuple[_Build, ...])
Table = dict


def _key(builds) -> tuple[int, ...]:
    return tuple(sorted(b.size for b in builds))


def _put(table: Table, builds, cost) -> None:
    k = _key(builds)
    cur = table.get(k)
    if cur is None or cost < cur[0]:
        table[k] = (cost, tuple(builds))


def _check_budget(table: Table, budget: int, node: int) -> None:
    if len(table) > budget:
        raise ResourceLimitError(
            f"DP frontier exceeded {budget} states at node {node}", node)


def merge_child_table(acc: Table, child: Table, capacity: int,
                      budget: int = 10 ** 9, node: int = -1) -> Table:
    """Fold one child's table into the accumulated sweep table.

    Each child tour either stays a separate tour or merges into one distinct
    accumulated tour (sizes add, capped at the capacity). This is the B-table
    step; costs simply add because edge charges live below.
    """
    out: Table = {}
    for c_acc, acc_builds in acc.values():
        n_acc = len(acc_builds)
        for c_ch, ch_builds in child.values():
            base = c_acc + c_ch
            # canonical order so equal-size child tours are interchangeable
            ch = tuple(sorted(ch_builds, key=lambda b: b.size))

            # choice encoding: slot index 0..n_acc-1 to merge, n_acc = separate
            def assign(i: int, cur: tuple[_Build, ...], used: frozenset,
                       prev_choice: int):
                if i == len(ch):
                    _put(out, cur, base)
                    return
                cb = ch[i]
                # equal-size child tours take non-decreasing choices
                floor = prev_choice if i and cb.size == ch[i - 1].size else 0
                tried: set[int] = set()
                for s in range(floor, n_acc):
                    if s in used or cur[s].size in tried:
                        continue
                    tried.add(cur[s].size)
                    merged = cur[s].size + cb.size
                    if merged > capacity:
                        continue
                    nb = _Build(merged, cur[s].phys + cb.phys,
                                cur[s].pads + cb.pads)
                    assign(i + 1, cur[:s] + (nb,) + cur[s + 1:],
                           used | {s}, s)
                # keep separate (choice n_acc, repeatable)
                assign(i + 1, cur + (cb,), used, n_acc)

            assign(0, tuple(acc_builds), frozenset(), 0)
            _check_budget(out, budget, node)
    return out


def _partitions(total: int, max_part: int):
    """Non-increasing partitions of ``total`` into parts <= max_part."""
    if total == 0:
        yield ()
        return
    for first in range(min(total, max_part), 0, -1):
        for rest in _partitions(total - first, first):
            yield (first,) + rest


def distribute_tokens(table: Table, v: int, phys_tokens: int, capacity: int,
                      pad_cap: int = 0, budget: int = 10 ** 9) -> Table:
    """Distribute d(v) physical tokens plus 0..pad_cap pads at node v.

    Existing tours may each take any number of tokens up to their remaining
    room; leftover tokens spawn new tours (each nonempty, <= capacity). The
    physical tokens are handed out first in assignment order; the labeling
    does not affect the DP value, only which pickups get stripped as pads.
    """
    out: Table = {}
    for cost, builds in table.values():
        # canonical order so equal-size tours receive non-increasing takes
        ordered = tuple(sorted(builds, key=lambda b: b.size))
        orig_sizes = tuple(b.size for b in ordered)
        for pad_total in range(pad_cap + 1):
            total = phys_tokens + pad_total

            def give(i: int, left: int, phys_left: int,
                     cur: tuple[_Build, ...], prev_take: int):
                if i == len(cur):
                    for parts in _partitions(left, capacity):
                        born = []
                        pl = phys_left
                        for p in parts:
                            ph = min(p, pl)
                            pl -= ph
                            pd = p - ph
                            born.append(_Build(
                                p,
                                ((v, ph),) if ph else (),
                                ((v, pd),) if pd else ()))
                        _put(out, cur + tuple(born), cost)
                    return
                b = cur[i]
                room = capacity - b.size
                cap = min(left, room)
                if i and orig_sizes[i] == orig_sizes[i - 1]:
                    cap = min(cap, prev_take)
                for take in range(cap + 1):
                    if take:
                        ph = min(take, phys_left)
                        pd = take - ph
                        nb = _Build(b.size + take,
                                    b.phys + (((v, ph),) if ph else ()),
                                    b.pads + (((v, pd),) if pd else ()))
                        give(i + 1, left - take, phys_left - ph,
                             cur[:i] + (nb,) + cur[i + 1:], take)
                    else:
                        give(i + 1, left, phys_left, cur, 0)

            give(0, total, phys_tokens, ordered, capacity)
            _check_budget(out, budget, v)
    return out


def charge_edge(table: Table, weight: Weight) -> Table:
    """Add the parent-edge crossing cost: 2*w(e) per tour in the profile."""
    if not weight:
        return table
    return {k: (c + 2 * weight * len(k), b) for k, (c, b) in table.items()}


def _structured_ok(key: tuple[int, ...], schedule: ThresholdSchedule,
                   gamma: int, groups: int) -> bool:
    per_bucket: Counter = Counter()
    distinct: dict[int, set[int]] = {}
    for s in key:
        b = schedule.bucket_of(s)
        per_bucket[b] += 1
        distinct.setdefault(b, set()).add(s)
    return all(per_bucket[b] <= gamma or len(distinct[b]) <= groups
               for b in per_bucket)


def _round_down(size: int, sigma: tuple[int, ...]) -> int:
    return sigma[bisect.bisect_right(sigma, size) - 1]


def _sweep(inst: TreeInstance, node_filter, pad_cap: int,
           budget: int, stats: dict | None = None) -> Table:
    """Bottom-up profile DP; returns the root table."""
    table: dict[int, Table] = {}
    states = 0
    for v in reversed(inst.topo_order):
        acc: Table = {(): (0, ())}
        for u in inst.children[v]:
            acc = merge_child_table(acc, table.pop(u), inst.capacity,
                                    budget, v)
            acc = node_filter(acc, v)
            states += len(acc)
        acc = distribute_tokens(acc, v, inst.demand[v], inst.capacity,
                                pad_cap, budget)
        acc = node_filter(acc, v)
        states += len(acc)
        if not acc:
            raise NoStructuredSolutionError(
                f"no admissible profile survives at node {v}", v)
        table[v] = charge_edge(acc, inst.weight[v])
    if stats is not None:
        stats["states"] = states
    return table[0]


def _best_entry(root: Table):
    best_key = min(root, key=lambda k: (root[k][0], len(k), k))
    return root[best_key]


def _builds_to_solution(inst: TreeInstance, builds, with_pads=False) -> Solution:
    tours = []
    for b in builds:
        pick: Counter = Counter()
        for v, c in b.phys:
            pick[v] += c
        if with_pads:
            for v, c in b.pads:
                pick[v] += c
        if pick:
            tours.append(Tour.of(pick))
    return Solution.of(inst, tours)


@dataclass(frozen=True)
class BicriteriaResult:
    solution: Solution
    eps_prime: float
    max_load: int
    dp_cost: Weight
    grid_exact: bool  # threshold grid was 1..Q, so no rounding happened


def default_eps_prime(inst: TreeInstance, eps: float) -> float:
    log_n = math.log2(max(inst.n, 2))
    return min(eps ** 2 / log_n ** 2, eps / max(inst.height, 1))


def solve_bicriteria(inst: TreeInstance, eps: float,
                     eps_prime: float | None = None,
                     max_states: int = 200_000,
                     stats: dict | None = None) -> BicriteriaResult:
    """Cost never above the optimum; loads may exceed Q by ~(1+eps').

    Sizes are rounded down to the eps'-threshold grid after each node, so any
    optimal solution maps to an admissible run of the same or lower stored
    cost, while a stored size understates the true load by at most a (1+eps')
    factor per tree level.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    ep = eps_prime if eps_prime is not None else default_eps_prime(inst, eps)
    sigma = thresholds(inst.capacity, ep).sigma

    def node_filter(acc: Table, v: int) -> Table:
        out: Table = {}
        for cost, builds in acc.values():
            rounded = tuple(_Build(_round_down(b.size, sigma), b.phys, b.pads)
                            for b in builds)
            _put(out, rounded, cost)
        return out

    root = _sweep(inst, node_filter, 0, max_states, stats)
    cost, builds = _best_entry(root)
    sol = _builds_to_solution(inst, builds)
    max_load = max((t.load for t in sol.tours), default=0)
    grid_exact = sigma == tuple(range(1, inst.capacity + 1))
    return BicriteriaResult(sol, ep, max_load, cost, grid_exact)


def solve_structured(inst: TreeInstance, eps: float = 0.5,
                     params: DPParams | None = None,
                     stats: dict | None = None) -> Solution:
    """Cheapest solution whose every per-node profile is structured.

    With generous parameters (gamma above the tour count) this is the exact
    optimum; with tight parameters the cost can exceed it, but the returned
    solution is always feasible. Pad tokens the DP added internally are
    stripped before returning.
    """
    if params is None:
        params = DPParams.generous(inst, eps)

    def node_filter(acc: Table, v: int) -> Table:
        if v == 0:
            return acc  # no depot edge, no bucket constraint at the depot
        return {k: e for k, e in acc.items()
                if _structured_ok(k, params.schedule, params.gamma,
                                  params.groups)}

    root = _sweep(inst, node_filter, params.pad_cap, params.max_states, stats)
    _, builds = _best_entry(root)
    sol = _builds_to_solution(inst, builds)
    assert sol.covered == Counter(
        {v: d for v, d in enumerate(inst.demand) if d})
    return sol


# ---------------------------------------------------------------------------
# consistency table


def check_consistency(o_v: int, z_v: tuple[int, ...], z1: tuple[int, ...],
                      z2: tuple[int, ...],
                      _memo: dict | None = None) -> bool:
    """Can the tours of z1 and z2 combine into the tours of z_v?

    Each z_v tour absorbs at most one tour from z1 and at most one from z2,
    plus o_c >= 0 extra tokens at the node; every z1/z2 tour must be absorbed
    and the extra tokens must total exactly o_v. Vectors are tour-size
    multisets (any order).
    """
    if o_v < 0:
        return False
    memo = _memo if _memo is not None else {}
    state = (o_v, tuple(sorted(z_v)), tuple(sorted(z1)), tuple(sorted(z2)))
    return _consistent(state, memo)


def _consistent(state, memo) -> bool:
    if state in memo:
        return memo[state]
    o_v, z_v, z1, z2 = state
    if not z_v:
        res = o_v == 0 and not z1 and not z2
        memo[state] = res
        return res
    t_v, rest_v = z_v[0], z_v[1:]
    res = False
    for i in range(-1, len(z1)):
        if i > 0 and z1[i] == z1[i - 1]:
            continue  # identical left tours are interchangeable
        a = z1[i] if i >= 0 else 0
        r1 = z1[:i] + z1[i + 1:] if i >= 0 else z1
        for j in range(-1, len(z2)):
            if j > 0 and z2[j] == z2[j - 1]:
                continue
            b = z2[j] if j >= 0 else 0
            o_c = t_v - a - b
            if o_c < 0 or o_c > o_v:
                continue
            r2 = z2[:j] + z2[j + 1:] if j >= 0 else z2
            if _consistent((o_v - o_c, rest_v, r1, r2), memo):
                res = True
                break
        if res:
            break
    memo[state] = res
    return res
