"""Executable structure transform: thresholds, buckets, grouping and repacking.

Given a feasible solution and an RNG seed, produce a modified instance (extra
"pad" tokens at some nodes) and solution in which, at every node and size
bucket, partial tours either number at most gamma (small bucket, kept verbatim)
or take at most g distinct sizes (big bucket, compressed by the shift map).
Orphan tokens vacated from each big bucket's largest group are repacked onto
duplicated randomly sampled tours designated to that level.
"""

from __future__ import annotations

import bisect
import math
import random
from collections import defaultdict
from dataclasses import dataclass, field

from .instance import Solution, Tour, TreeInstance, Weight, solution_cost


class TransformInfeasible(RuntimeError):
    """Retry-able: a level's sampled extra tours cannot host its orphan load."""

    def __init__(self, message: str, node: int, bucket: int):
        super().__init__(message)
        self.node = node
        self.bucket = bucket


@dataclass(frozen=True)
class ThresholdSchedule:
    sigma: tuple[int, ...]
    eps: float
    capacity: int

    def bucket_of(self, size: int) -> int:
        """0-based bucket index for a coverage in [1, Q]."""
        if not 1 <= size <= self.capacity:
            raise ValueError(f"coverage {size} outside [1, {self.capacity}]")
        return bisect.bisect_right(self.sigma, size) - 1

    def __len__(self) -> int:
        return len(self.sigma)


def thresholds(capacity: int, eps: float) -> ThresholdSchedule:
    if capacity < 1 or eps <= 0:
        raise ValueError("need Q >= 1 and eps > 0")
    head = math.ceil(1 / eps)
    sigma = list(range(1, min(head, capacity) + 1))
    while sigma[-1] < capacity:
        sigma.append(min(capacity, math.ceil(sigma[-1] * (1 + eps))))
    return ThresholdSchedule(tuple(sigma), eps, capacity)


@dataclass(frozen=True)
class TransformParams:
    gamma: int  # small-bucket tour cap
    groups: int  # g: group count for big buckets

    @classmethod
    def defaults(cls, n: int, eps: float, alpha: float = 1.0,
                 delta: float = 1.0) -> "TransformParams":
        log_n = math.log2(max(n, 2))
        gamma = max(1, math.ceil(alpha * log_n ** 3 / eps ** 2))
        g = max(1, math.ceil(2 * delta * log_n / eps ** 2))
        return cls(gamma, g)


@dataclass
class BucketView:
    node: int
    bucket: int
    tour_ids: list[int]  # ascending by (coverage, id)
    coverages: list[int]
    small: bool
    groups: list[list[int | None]] = field(default_factory=list)  # None = padding slot

    @property
    def group_maxima(self) -> list[int]:
        cov = dict(zip(self.tour_ids, self.coverages))
        out = []
        for grp in self.groups:
            real = [cov[t] for t in grp if t is not None]
            out.append(max(real) if real else 0)
        return out


def partial_coverage(inst: TreeInstance, pickups: dict[int, int], v: int) -> int:
    return sum(pickups.get(u, 0) for u in inst.subtree(v))


def bucket_partial_tours(inst: TreeInstance, sol: Solution, v: int,
                         schedule: ThresholdSchedule,
                         gamma: int | None = None,
                         groups: int | None = None) -> list[BucketView]:
    """Classify the partial tours at v into threshold buckets."""
    picks = [t.as_dict() for t in sol.tours]
    return _bucket_views(inst, picks, v, schedule,
                         gamma if gamma is not None else len(sol.tours) + 1,
                         groups or 1)


def _bucket_views(inst, pickups_list, v, schedule, gamma, g,
                  include=None) -> list[BucketView]:
    sub = set(inst.subtree(v))
    per_bucket: dict[int, list[tuple[int, int]]] = defaultdict(list)
    ids = include if include is not None else range(len(pickups_list))
    for tid in ids:
        cov = sum(c for u, c in pickups_list[tid].items() if u in sub)
        if cov:
            per_bucket[schedule.bucket_of(cov)].append((cov, tid))
    views = []
    for b in sorted(per_bucket):
        entries = sorted(per_bucket[b])
        tour_ids = [tid for _, tid in entries]
        covs = [c for c, _ in entries]
        small = len(entries) <= gamma
        view = BucketView(v, b, tour_ids, covs, small)
        if not small:
            m = len(tour_ids)
            per = math.ceil(m / g)
            padded: list[int | None] = [None] * (per * g - m) + list(tour_ids)
            view.groups = [padded[i * per:(i + 1) * per] for i in range(g)]
        views.append(view)
    return views


@dataclass
class TransformReport:
    cost_before: Weight = 0
    cost_after: Weight = 0
    sampled_cost: Weight = 0
    extra_cost: Weight = 0
    shrink_savings: Weight = 0
    pad_tokens: int = 0
    sampled_ids: list[int] = field(default_factory=list)
    big_buckets: int = 0
    distinct_sizes: dict[tuple[int, int], int] = field(default_factory=dict)

    @property
    def shortcut_savings(self) -> Weight:
        """Per-copy saving vs duplicating every sampled tour verbatim.

        Includes the shrinking of the original tours, amortized over the two
        copies, so that cost_after - cost_before
        = 2 * (sampled_cost - shortcut_savings) holds exactly.
        """
        delta = self.cost_after - self.cost_before
        return self.sampled_cost - delta // 2


def transform(inst: TreeInstance, sol: Solution, eps: float,
              params: TransformParams, seed: int
              ) -> tuple[TreeInstance, Solution, TransformReport]:
    """Apply the bottom-up grouping/shift/repack procedure to ``sol``."""
    rng = random.Random(seed)
    schedule = thresholds(inst.capacity, eps)
    q = inst.capacity
    report = TransformReport(cost_before=sol.total_cost)

    # Working state: pickups per tour (physical tokens) and pads per tour.
    picks: list[dict[int, int]] = [t.as_dict() for t in sol.tours]
    pads: list[dict[int, int]] = [dict() for _ in sol.tours]
    n_orig = len(picks)

    # Sampling: each tour independently with probability eps; both copies of a
    # sampled tour are designated to one uniformly random visited level.
    sampled_by_level: dict[int, list[int]] = defaultdict(list)
    for tid, t in enumerate(sol.tours):
        if not t.pickups or rng.random() >= eps:
            continue
        visited = sorted({inst.depth[u] for v0, _ in t.pickups
                          for u in _root_path(inst, v0)} - {1})
        if not visited:
            continue
        level = rng.choice(visited)
        report.sampled_ids.append(tid)
        report.sampled_cost += sol_cost_of(inst, picks[tid])
        sampled_by_level[level].append(tid)

    # Extra-copy accumulators: copy_items[tid] = list of orphan units assigned
    # to sampled tour tid; each unit = (pickups dict, pads-at-v count, v).
    copy_items: dict[int, list[tuple[dict[int, int], int, int]]] = defaultdict(list)
    used_at: dict[int, set[tuple[int, int]]] = defaultdict(set)

    by_depth: dict[int, list[int]] = defaultdict(list)
    for v in range(1, inst.n):
        by_depth[inst.depth[v]].append(v)

    orig_cov = _original_bucket_index(inst, sol, schedule)

    for level in sorted(by_depth, reverse=True):
        extras = sampled_by_level.get(level, [])
        for v in sorted(by_depth[level]):
            views = _bucket_views(inst, _merged(picks, pads), v, schedule,
                                  params.gamma, params.groups)
            for view in views:
                if view.small:
                    continue
                report.big_buckets += 1
                _apply_big_bucket(inst, picks, pads, view, v, report,
                                  extras, copy_items, used_at, orig_cov)

    # Materialize extra copies with the two-bin split of the orphan units.
    extra_tours, extra_pads = _split_copies(inst, sol, copy_items, q)

    # Assemble the transformed instance and solution.
    pad_demand = [0] * inst.n
    for pd in pads + extra_pads:
        for v, c in pd.items():
            pad_demand[v] += c
            report.pad_tokens += c
    all_picks = _merged(picks, pads) + [
        _merge_two(p, pd) for p, pd in zip(extra_tours, extra_pads)]
    # Unused extra copies stay in the solution as empty, zero-cost tours.
    missing = 2 * len(report.sampled_ids) - len(extra_tours)
    all_picks.extend({} for _ in range(missing))

    inst2 = inst.replace(demand=tuple(d + p for d, p in zip(inst.demand, pad_demand)))
    tours2 = tuple(Tour.of(p) for p in all_picks)
    sol2 = Solution.of(inst2, tours2)
    report.cost_after = sol2.total_cost
    new_orig_cost = solution_cost(inst2, tours2[:n_orig])
    report.shrink_savings = report.cost_before - new_orig_cost
    report.extra_cost = report.cost_after - new_orig_cost
    report.distinct_sizes = profile_complexity(inst2, sol2, schedule, params).distinct_sizes
    return inst2, sol2, report


def _root_path(inst: TreeInstance, v: int):
    while v != 0:
        yield v
        v = inst.parent[v]


def sol_cost_of(inst: TreeInstance, pickups: dict[int, int]) -> Weight:
    from .instance import pickup_set_cost

    return pickup_set_cost(inst, pickups.keys())


def _merged(picks, pads):
    return [_merge_two(p, pd) for p, pd in zip(picks, pads)]


def _merge_two(a: dict[int, int], b: dict[int, int]) -> dict[int, int]:
    out = dict(a)
    for v, c in b.items():
        out[v] = out.get(v, 0) + c
    return out


def _original_bucket_index(inst, sol, schedule):
    """(tid, v) -> bucket of the tour's partial at v in the *input* solution."""
    out: dict[tuple[int, int], int] = {}
    for tid, t in enumerate(sol.tours):
        picks = t.as_dict()
        cov = dict(picks)
        for v in reversed(inst.topo_order):
            if v:
                cov[inst.parent[v]] = cov.get(inst.parent[v], 0) + cov.get(v, 0)
        for v, c in cov.items():
            if c and v:
                out[(tid, v)] = schedule.bucket_of(c)
    return out


def _apply_big_bucket(inst, picks, pads, view, v, report, extras,
                      copy_items, used_at, orig_cov):
    """Shift bottoms one group down, pad to group maxima, orphan the last group."""
    sub = set(inst.subtree(v))
    g = len(view.groups)
    maxima = view.group_maxima
    cov = dict(zip(view.tour_ids, view.coverages))

    def bottom_of(tid):
        phys = {u: c for u, c in picks[tid].items() if u in sub}
        pad = {u: c for u, c in pads[tid].items() if u in sub}
        return phys, pad

    bottoms = {tid: bottom_of(tid) for tid in view.tour_ids}

    def clear_bottom(tid):
        for u in list(picks[tid]):
            if u in sub:
                del picks[tid][u]
        for u in list(pads[tid]):
            if u in sub:
                del pads[tid][u]

    def set_bottom(tid, phys, pad):
        clear_bottom(tid)
        for u, c in phys.items():
            picks[tid][u] = picks[tid].get(u, 0) + c
        for u, c in pad.items():
            pads[tid][u] = pads[tid].get(u, 0) + c

    def bottom_size(phys, pad):
        return sum(phys.values()) + sum(pad.values())

    # Shift: group j receives the bottoms of group j-1 (position-wise), padded
    # up to h_max_{j-1}; group 1 receives empty bottoms; nulls give empty
    # bottoms with no pads.
    new_bottoms: dict[int, tuple[dict, dict]] = {}
    for j in range(1, g):
        for pos, tid in enumerate(view.groups[j]):
            if tid is None:
                continue
            src = view.groups[j - 1][pos]
            if src is None:
                new_bottoms[tid] = ({}, {})
                continue
            phys, pad = bottoms[src]
            size = bottom_size(phys, pad)
            want = maxima[j - 1]
            # Capacity safety: h_max_{j-1} <= h_min_j <= old bottom size.
            assert want <= cov[tid], "shift map would violate capacity"
            pad = dict(pad)
            if want > size:
                pad[v] = pad.get(v, 0) + (want - size)
            new_bottoms[tid] = (phys, pad)
    for tid in view.groups[0]:
        if tid is not None:
            new_bottoms[tid] = ({}, {})

    # Orphans: the last group's bottoms, each padded to exactly h_max_g, are
    # handed whole to distinct sampled tours whose own partial sits in this
    # bucket. One orphan unit per sampled tour per (v, bucket).
    orphans = []
    for tid in view.groups[-1]:
        if tid is None:
            continue
        phys, pad = bottoms[tid]
        extra_pad = maxima[-1] - bottom_size(phys, pad)
        orphans.append((_merge_two(phys, pad), extra_pad))

    hosts = [tid for tid in extras
             if orig_cov.get((tid, v)) == view.bucket
             and (v, view.bucket) not in used_at[tid]]
    if len(hosts) < len(orphans):
        raise TransformInfeasible(
            f"level {inst.depth[v]}: only {len(hosts)} sampled hosts for "
            f"{len(orphans)} orphan units at node {v} bucket {view.bucket}",
            v, view.bucket)
    for (unit, extra_pad), host in zip(orphans, hosts):
        used_at[host].add((v, view.bucket))
        copy_items[host].append((unit, extra_pad, v))

    for tid, (phys, pad) in new_bottoms.items():
        set_bottom(tid, phys, pad)


def _split_copies(inst, sol, copy_items, q):
    """Two-bin split of each sampled tour's assigned orphan units."""
    tours: list[dict[int, int]] = []
    tour_pads: list[dict[int, int]] = []
    for host in sorted(copy_items):
        items = copy_items[host]
        sizes = [sum(u.values()) + ep for u, ep, _ in items]
        total = sum(sizes)
        bin1: list[int] = []
        acc = 0
        for i, s in enumerate(sizes):
            if acc + s <= q:
                bin1.append(i)
                acc += s
            else:
                break
        rest = [i for i in range(len(items)) if i not in bin1]
        rest_load = sum(sizes[i] for i in rest)
        if rest_load > q:
            unit, _, v = items[rest[0]]
            raise TransformInfeasible(
                f"two-bin split failed for sampled tour {host}: "
                f"loads {sizes} exceed two bins of {q}", v, -1)
        for chosen in (bin1, rest):
            p: dict[int, int] = {}
            pd: dict[int, int] = {}
            for i in chosen:
                unit, extra_pad, v = items[i]
                for u, c in unit.items():
                    p[u] = p.get(u, 0) + c
                if extra_pad:
                    pd[v] = pd.get(v, 0) + extra_pad
            if p or pd:
                tours.append(p)
                tour_pads.append(pd)
    return tours, tour_pads


@dataclass
class ComplexityReport:
    distinct_sizes: dict[tuple[int, int], int]
    violations: list[str]

    @property
    def ok(self) -> bool:
        return not self.violations


def profile_complexity(inst: TreeInstance, sol: Solution,
                       schedule: ThresholdSchedule,
                       params: TransformParams) -> ComplexityReport:
    """Check the structured shape: small buckets few, big buckets few sizes."""
    distinct: dict[tuple[int, int], int] = {}
    violations: list[str] = []
    picks = [t.as_dict() for t in sol.tours]
    for v in range(1, inst.n):
        sub = set(inst.subtree(v))
        per_bucket: dict[int, list[int]] = defaultdict(list)
        for p in picks:
            cov = sum(c for u, c in p.items() if u in sub)
            if cov:
                per_bucket[schedule.bucket_of(cov)].append(cov)
        for b, covs in per_bucket.items():
            d = len(set(covs))
            distinct[(v, b)] = d
            if len(covs) <= params.gamma:
                continue
            if d > params.groups:
                violations.append(
                    f"node {v} bucket {b}: big bucket with {d} distinct sizes "
                    f"(> g={params.groups})")
    return ComplexityReport(distinct, violations)
