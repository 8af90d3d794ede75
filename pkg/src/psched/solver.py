"""The recursive guessing solver.

The driver enumerates split decisions for the first levels of the tree,
then hands each frontier state to a recursive subtree solver that guesses
one more level of splits, computes windows for the jobs staying at the
node, partitions the window-constrained pool between the two halves (one
representative per window-multiset equivalence class), and recurses.
Bottom intervals are solved exactly by branch and bound.  A hinted mode
replays the splits and partitions recorded from a reference schedule
instead of enumerating, realizing the guarantee that the enumeration can
do at least as well as the reference.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product

from .core import (
    DISC,
    Instance,
    Interval,
    JobSet,
    Schedule,
    Slot,
    iter_jobs,
    job_count,
    mask_from,
)
from .dyadic import (
    BOT,
    TOP,
    Guesses,
    Params,
    PartialDyadicSystem,
    Window,
    _window_for,
    full_system,
    push_down,
    system_from_schedule,
    tree_for,
    window_step,
)
from .convert import valid_to_virtually_valid
from .errors import BudgetExceeded, GuessExhausted

DEFAULT_BUDGET = 10_000_000


@dataclass
class Budget:
    """Shared improve-only node counter; aborts the search when exhausted."""

    limit: int = DEFAULT_BUDGET
    nodes: int = 0

    def tick(self) -> None:
        self.nodes += 1
        if self.nodes > self.limit:
            raise BudgetExceeded(self.nodes, self.limit)


@dataclass(frozen=True)
class SubproblemInput:
    """One node of the recursion: what is already decided under ``root``.

    ``assigned`` fixes the job sets of intervals in the first h-1 relative
    levels; ``pending`` holds, per relative-level-(h-1) interval, the jobs
    assigned somewhere in its subtree; ``ancestors`` carry fixed windows.
    """

    root: Interval
    ancestors: JobSet = 0
    anc_windows: dict[int, Window] = field(default_factory=dict)
    assigned: dict[Interval, JobSet] = field(default_factory=dict)
    pending: dict[Interval, JobSet] = field(default_factory=dict)

    def assigned_jobs(self) -> JobSet:
        out = 0
        for jobs in self.assigned.values():
            out |= jobs
        return out

    def pending_jobs(self) -> JobSet:
        out = 0
        for jobs in self.pending.values():
            out |= jobs
        return out


@dataclass(frozen=True)
class Hints:
    """Recorded split vectors and a reference schedule to replay them against."""

    guesses: dict[Interval, Guesses]
    reference: Schedule


PartialAssign = dict[int, Slot]
Result = tuple[PartialDyadicSystem, PartialAssign]


def _region_lookup(maps: list[dict[Interval, JobSet]]):
    def region(w: Interval) -> JobSet:
        out = 0
        for mp in maps:
            for iv, jobs in mp.items():
                if jobs and w.contains_interval(iv):
                    out |= jobs
        return out

    return region


def node_windows(
    inst: Instance,
    root: Interval,
    j_map: dict[Interval, JobSet],
    k_map: dict[Interval, JobSet],
    params: Params,
) -> dict[int, Window]:
    """Windows for the jobs staying at ``root``, from one frontier level of info.

    Boundaries are multiples of the root's alignment unit; a pending set
    counts as inside a region when its frontier interval is."""
    step = window_step(params, root.length)
    region = _region_lookup([j_map, k_map])
    return {
        j: _window_for(inst, j, root, step, region)
        for j in iter_jobs(j_map.get(root, 0))
    }


def _clip(w: Window, half: Interval) -> Window | None:
    b, e = max(w[0], half.begin), min(w[1], half.end)
    return (b, e) if b < e else None


def enumerate_partitions(
    pool_windows: dict[int, Window],
    root: Interval,
):
    """Partitions of the pool into (left, right, discarded), one per class.

    Two partitions are equivalent when the multisets of windows clipped to
    the left half agree on the left parts and likewise on the right.  Jobs
    sharing both clips are interchangeable, so enumeration runs over
    per-group count vectors, deduplicated by the class key; concrete jobs
    fill the sides in ascending id.
    """
    groups: dict[tuple, list[int]] = {}
    for j in sorted(pool_windows):
        lc = _clip(pool_windows[j], root.left)
        rc = _clip(pool_windows[j], root.right)
        groups.setdefault((lc, rc), []).append(j)
    keys = sorted(groups, key=lambda k: (k[0] or (-1, -1), k[1] or (-1, -1)))
    counts = [
        [(a, b) for a in range(len(groups[k]) + 1) for b in range(len(groups[k]) - a + 1)]
        for k in keys
    ]
    seen: set[tuple] = set()
    for combo in product(*counts):
        left_ms: list[Window] = []
        right_ms: list[Window] = []
        for key, (a, b) in zip(keys, combo):
            lc, rc = key
            left_ms.extend([lc] * a)
            right_ms.extend([rc] * b)
        class_key = (
            tuple(sorted(left_ms, key=lambda w: w or (-1, -1))),
            tuple(sorted(right_ms, key=lambda w: w or (-1, -1))),
        )
        if class_key in seen:
            continue
        seen.add(class_key)
        j_left = 0
        j_right = 0
        j_disc = 0
        for key, (a, b) in zip(keys, combo):
            members = groups[key]
            j_left |= mask_from(members[:a])
            j_right |= mask_from(members[a : a + b])
            j_disc |= mask_from(members[a + b :])
        yield j_left, j_right, j_disc


def partition_class_key(
    pool_windows: dict[int, Window],
    root: Interval,
    j_left: JobSet,
    j_right: JobSet,
) -> tuple:
    """Equivalence-class key of a concrete partition (for tests and dedup)."""
    left_ms = sorted(
        (_clip(pool_windows[j], root.left) for j in iter_jobs(j_left)),
        key=lambda w: w or (-1, -1),
    )
    right_ms = sorted(
        (_clip(pool_windows[j], root.right) for j in iter_jobs(j_right)),
        key=lambda w: w or (-1, -1),
    )
    return tuple(left_ms), tuple(right_ms)


def _feasible_warm(
    inst: Instance,
    iv: Interval,
    bottom: JobSet,
    windows: dict[int, Window],
    m: int,
    warm: PartialAssign,
) -> bool:
    counts: dict[int, int] = {}
    for j, t in warm.items():
        if t is None:
            continue
        if t not in iv:
            return False
        if windows.get(j) is not None:
            b, e = windows[j]
            if not b < t <= e:
                return False
        counts[t] = counts.get(t, 0) + 1
        if counts[t] > m:
            return False
    done = [j for j in iter_jobs(bottom) if warm.get(j) is not None]
    for a in done:
        for b in done:
            if inst.precedes(a, b) and warm[a] >= warm[b]:
                return False
    return True


def bottom_solve(
    inst: Instance,
    iv: Interval,
    bottom: JobSet,
    ancestors: JobSet,
    anc_windows: dict[int, Window],
    params: Params,
    budget: Budget | None = None,
    warm: PartialAssign | None = None,
) -> PartialAssign:
    """Best virtually-valid assignment on a bottom interval.

    Bottom jobs obey precedence among themselves plus the interval range;
    ancestors obey only their windows; capacity is m per slot.  Branch and
    bound over per-slot antichain batches of bottom jobs; ancestor slots
    are filled greedily by earliest window end, which is optimal for unit
    jobs.  ``warm`` seeds the incumbent (it must be feasible to be used).
    """
    budget = budget or Budget()
    m = params.m
    slots = list(iv.slots())
    anc_order = sorted(
        iter_jobs(ancestors), key=lambda j: (anc_windows[j][1], j)
    )
    total_jobs = job_count(bottom) + job_count(ancestors)

    best_assign: PartialAssign = {j: DISC for j in iter_jobs(bottom | ancestors)}
    best_count = 0
    if warm is not None and _feasible_warm(inst, iv, bottom, anc_windows, m, warm):
        got = {j: warm.get(j) for j in iter_jobs(bottom | ancestors)}
        cnt = sum(1 for t in got.values() if t is not None)
        if cnt > 0:
            best_assign, best_count = got, cnt

    assign: PartialAssign = {j: DISC for j in iter_jobs(bottom | ancestors)}

    def antichains(alive: JobSet, cap: int) -> list[list[int]]:
        jobs = list(iter_jobs(alive))
        out: list[list[int]] = [[]]
        stack: list[tuple[list[int], int]] = [([], 0)]
        while stack:
            chosen, start = stack.pop()
            if len(chosen) == cap:
                continue
            for i in range(start, len(jobs)):
                cand = jobs[i]
                if any(
                    inst.precedes(c, cand) or inst.precedes(cand, c) for c in chosen
                ):
                    continue
                nxt = chosen + [cand]
                out.append(nxt)
                stack.append((nxt, i + 1))
        # larger batches first, then lexicographic members
        out.sort(key=lambda batch: (-len(batch), batch))
        return out

    def dfs(idx: int, alive: JobSet, anc_left: tuple[int, ...], count: int) -> None:
        nonlocal best_assign, best_count
        budget.tick()
        if idx == len(slots):
            if count > best_count:
                best_count = count
                best_assign = dict(assign)
            return
        remaining_cap = m * (len(slots) - idx)
        placeable_anc = sum(1 for j in anc_left if anc_windows[j][1] > slots[idx] - 1)
        if count + min(remaining_cap, job_count(alive) + placeable_anc) <= best_count:
            return
        t = slots[idx]
        for batch in antichains(alive, m):
            killed = 0
            for j in batch:
                killed |= inst.pred[j] & alive
            batch_mask = mask_from(batch)
            if killed & batch_mask:
                continue
            for j in batch:
                assign[j] = t
            # earliest-deadline ancestors into the remaining capacity
            placed_anc = []
            room = m - len(batch)
            rest: list[int] = []
            for j in anc_left:
                b, e = anc_windows[j]
                if room > 0 and b < t <= e:
                    assign[j] = t
                    placed_anc.append(j)
                    room -= 1
                else:
                    rest.append(j)
            dfs(
                idx + 1,
                alive & ~(batch_mask | killed),
                tuple(rest),
                count + len(batch) + len(placed_anc),
            )
            for j in batch:
                assign[j] = DISC
            for j in placed_anc:
                assign[j] = DISC
            if best_count == total_jobs:
                return

    dfs(0, bottom, tuple(anc_order), 0)
    return dict(best_assign)


def _guess_outcomes(
    inst: Instance,
    iv: Interval,
    jobs: JobSet,
    params: Params,
    max_len: int,
) -> list[tuple[Guesses, tuple[JobSet, JobSet, JobSet]]]:
    """Distinct results of the split loop over all guess vectors of ``max_len``.

    Enumerates the tree of terminating guess prefixes (left branch first,
    so results follow the lexicographic order of the full vectors); any
    prefix still running after ``max_len`` entries is pruned, mirroring
    the exhausted-guess behaviour of the replay.
    """
    out: list[tuple[Guesses, tuple[JobSet, JobSet, JobSet]]] = []

    def grow(prefix: tuple[str, ...]) -> None:
        try:
            result = push_down(inst, iv, jobs, prefix, params)
        except GuessExhausted:
            if len(prefix) < max_len:
                grow(prefix + ("L",))
                grow(prefix + ("R",))
            return
        out.append((prefix, result))

    grow(())
    return out


def _merge_window_maps(a: dict[int, Window], b: dict[int, Window]) -> dict[int, Window]:
    merged = dict(a)
    merged.update(b)
    return merged


def _restrict(mp: dict[Interval, JobSet], half: Interval) -> dict[Interval, JobSet]:
    return {iv: jobs for iv, jobs in mp.items() if half.contains_interval(iv)}


def schedule_subtree(
    inst: Instance,
    sub: SubproblemInput,
    params: Params,
    budget: Budget | None = None,
    hints: Hints | None = None,
) -> Result | None:
    """Best partial system plus virtually-valid assignment over ``sub.root``.

    Returns None when the input sizes already exceed the capacity of the
    root interval.  Otherwise tries every split-outcome combination for
    the frontier level and every partition representative of the
    window-constrained pool, recursing on both halves and keeping the
    candidate that schedules strictly more jobs.
    """
    budget = budget or Budget()
    budget.tick()
    tree = tree_for(params)
    iv = sub.root
    m = params.m
    if job_count(sub.ancestors) > m * iv.length:
        return None
    if job_count(sub.assigned_jobs()) + job_count(sub.pending_jobs()) > m * iv.length:
        return None

    if tree.kind(iv) == BOT:
        bottom = sub.assigned.get(iv, 0) | sub.pending.get(iv, 0)
        warm = None
        if hints is not None:
            ref = hints.reference
            warm = {
                j: (ref.assign[j] if ref.assign[j] is not None and ref.assign[j] in iv else None)
                for j in iter_jobs(bottom | sub.ancestors)
            }
        assign = bottom_solve(
            inst, iv, bottom, sub.ancestors, sub.anc_windows, params,
            budget=budget, warm=warm,
        )
        sys = PartialDyadicSystem(
            root=iv, ancestors=sub.ancestors, anc_windows=dict(sub.anc_windows),
            assign={iv: bottom},
        )
        return sys, assign

    frontier = tree.rel_level(iv, params.h - 1)
    if not frontier:
        # Whole subtree already fixed by `assigned`; behave as a frontier of none.
        splits = iter(((),))
    else:
        per_interval: list[list[tuple[Interval, tuple[JobSet, JobSet, JobSet] | None]]] = []
        for f in frontier:
            jobs = sub.pending.get(f, 0)
            if tree.kind(f) == BOT:
                per_interval.append([(f, None)])
                continue
            max_len = params.p if tree.kind(f) == TOP else m * f.length
            if hints is not None:
                trace = hints.guesses.get(f, ())
                try:
                    per_interval.append([(f, push_down(inst, f, jobs, trace, params))])
                except GuessExhausted:
                    return None
            else:
                options = _guess_outcomes(inst, f, jobs, params, max_len)
                per_interval.append([(f, result) for _, result in options])
        splits = product(*per_interval)

    best: Result | None = None
    best_count = -1
    for combo in splits:
        j_map = dict(sub.assigned)
        k_map: dict[Interval, JobSet] = {}
        for f, outcome in combo:
            if outcome is None:  # frontier interval at the bottom level
                j_map[f] = sub.pending.get(f, 0)
            else:
                stay, k_left, k_right = outcome
                j_map[f] = stay
                k_map[f.left] = k_left
                k_map[f.right] = k_right
        own_windows = node_windows(inst, iv, j_map, k_map, params)
        pool_windows = _merge_window_maps(dict(sub.anc_windows), own_windows)

        if hints is not None:
            ref = hints.reference
            pool = sub.ancestors | j_map.get(iv, 0)
            j_left = mask_from(
                j for j in iter_jobs(pool)
                if ref.assign[j] is not None and ref.assign[j] in iv.left
            )
            j_right = mask_from(
                j for j in iter_jobs(pool)
                if ref.assign[j] is not None and ref.assign[j] in iv.right
            )
            partitions = [(j_left, j_right, pool & ~(j_left | j_right))]
        else:
            partitions = enumerate_partitions(pool_windows, iv)

        for j_left, j_right, j_disc in partitions:
            left_in = SubproblemInput(
                root=iv.left,
                ancestors=j_left,
                anc_windows={j: pool_windows[j] for j in iter_jobs(j_left)},
                assigned=_restrict(j_map, iv.left),
                pending=_restrict(k_map, iv.left),
            )
            right_in = SubproblemInput(
                root=iv.right,
                ancestors=j_right,
                anc_windows={j: pool_windows[j] for j in iter_jobs(j_right)},
                assigned=_restrict(j_map, iv.right),
                pending=_restrict(k_map, iv.right),
            )
            left = schedule_subtree(inst, left_in, params, budget, hints)
            if left is None:
                continue
            right = schedule_subtree(inst, right_in, params, budget, hints)
            if right is None:
                continue
            (lsys, lassign), (rsys, rassign) = left, right
            merged: PartialAssign = dict(lassign)
            merged.update(rassign)
            for j in iter_jobs(j_disc):
                merged[j] = DISC
            count = sum(1 for t in merged.values() if t is not None)
            if count > best_count:
                assign_map = {iv: j_map.get(iv, 0)}
                assign_map.update(lsys.assign)
                assign_map.update(rsys.assign)
                best = (
                    PartialDyadicSystem(
                        root=iv,
                        ancestors=sub.ancestors,
                        anc_windows=dict(sub.anc_windows),
                        assign=assign_map,
                    ),
                    merged,
                )
                best_count = count
    return best


def _outer_cascades(
    inst: Instance,
    params: Params,
    budget: Budget,
    hints: Hints | None,
):
    """States after deciding all splits above the frontier level.

    Yields (j_map over levels < h-1, pending map at level h-1); prunes
    states where a half receives more jobs than it can hold.
    """
    tree = tree_for(params)
    m = params.m
    outer: list[Interval] = []
    for l in range(min(params.h - 1, tree.L + 1)):
        outer.extend(tree.level(l))
    frontier = set(tree.level(params.h - 1)) if params.h - 1 <= tree.L else set()

    def walk(idx: int, j_map: dict[Interval, JobSet], k_map: dict[Interval, JobSet]):
        budget.tick()
        if idx == len(outer):
            pending = {f: k_map.get(f, 0) for f in sorted(frontier, key=lambda x: x.begin)}
            yield dict(j_map), pending
            return
        f = outer[idx]
        jobs = k_map.get(f, 0)
        if tree.kind(f) == BOT:
            j_map[f] = jobs
            yield from walk(idx + 1, j_map, k_map)
            del j_map[f]
            return
        max_len = params.p if tree.kind(f) == TOP else m * f.length
        if hints is not None:
            try:
                options = [push_down(inst, f, jobs, hints.guesses.get(f, ()), params)]
            except GuessExhausted:
                return
        else:
            options = [result for _, result in _guess_outcomes(inst, f, jobs, params, max_len)]
        for stay, k_left, k_right in options:
            if job_count(k_left) > m * f.length // 2 or job_count(k_right) > m * f.length // 2:
                continue
            j_map[f] = stay
            k_map[f.left] = k_left
            k_map[f.right] = k_right
            yield from walk(idx + 1, j_map, k_map)
            del j_map[f], k_map[f.left], k_map[f.right]

    yield from walk(0, {}, {tree.root: inst.all_jobs})


def main_solve(
    inst: Instance,
    params: Params,
    budget: Budget | None = None,
    hints: Hints | None = None,
) -> tuple[PartialDyadicSystem, Schedule]:
    """Full enumeration over outer split decisions, keeping the best schedule.

    Always succeeds: the all-discard schedule over a trivial system is the
    starting candidate.  The result is a full system together with a
    virtually-valid schedule for it.
    """
    budget = budget or Budget()
    tree = tree_for(params)
    if inst.n == 0:
        empty = full_system(params, {})
        return empty, Schedule(T=params.T, assign=())
    fallback_iv = tree.level(tree.L)[0]
    best_sys = full_system(params, {fallback_iv: inst.all_jobs})
    best_sched = Schedule(T=params.T, assign=(DISC,) * inst.n)
    best_count = 0
    for j_map, pending in _outer_cascades(inst, params, budget, hints):
        sub = SubproblemInput(root=tree.root, assigned=j_map, pending=pending)
        got = schedule_subtree(inst, sub, params, budget, hints)
        if got is None:
            continue
        sys, assign = got
        count = sum(1 for t in assign.values() if t is not None)
        if count > best_count:
            full_assign: list[Slot] = [DISC] * inst.n
            for j, t in assign.items():
                full_assign[j] = t
            best_sys = PartialDyadicSystem(root=tree.root, assign=dict(sys.assign))
            best_sched = Schedule(T=params.T, assign=tuple(full_assign))
            best_count = count
    return best_sys, best_sched


def solve_hinted(
    inst: Instance,
    reference: Schedule,
    params: Params,
    budget: Budget | None = None,
) -> tuple[PartialDyadicSystem, Schedule]:
    """Drive the solver along the splits recorded from an optimal schedule.

    Builds the reference system and its virtually-valid counterpart, then
    replays the recorded guess vectors and the reference partitions
    through the same machinery as the full enumeration.  The result
    schedules at least as many jobs as the virtually-valid reference.
    """
    ref_sys, _, guesses = system_from_schedule(inst, reference, params)
    virt = valid_to_virtually_valid(inst, ref_sys, reference, params)
    hints = Hints(guesses=guesses, reference=virt)
    return main_solve(inst, params, budget=budget, hints=hints)
