"""Conversions between valid and virtually-valid schedules for a full system.

Three steps: (1) rebuild a valid schedule's top jobs inside their windows
by sweeping aligned blocks per half-interval, discarding a bounded
remainder; (2) canonicalize a virtually-valid schedule by swapping
violating pairs until weak precedence and side-order agreement hold; (3)
turn a canonical virtually-valid schedule into a valid one by re-running
each bottom interval's top-job load through capacity-constrained list
scheduling.
"""

from __future__ import annotations

from collections.abc import Mapping

from .baselines import CapacityProfile, capacity_list_schedule
from .core import (
    DISC,
    Instance,
    Interval,
    Schedule,
    Slot,
    chain_depths,
    count_inversions,
    iter_jobs,
    mask_from,
)
from .dyadic import (
    TOP,
    Params,
    PartialDyadicSystem,
    check_valid_for_system,
    check_virtually_valid,
    tree_for,
    window_step,
    windows,
)
from .errors import InvalidInput, PrecongruenceViolated

_SWAP_CAP = 1_000_000


def _half_blocks(half: Interval, step: int, reverse: bool) -> list[Interval]:
    starts = range(half.begin, half.end, step)
    blocks = [Interval(b, b + step) for b in starts]
    return blocks[::-1] if reverse else blocks


def valid_to_virtually_valid(
    inst: Instance,
    sys: PartialDyadicSystem,
    sched: Schedule,
    params: Params,
) -> Schedule:
    """Turn a schedule that is valid for the system into a virtually-valid one.

    Bottom jobs keep their slots.  Per top interval and half, the jobs stay
    on their side and reuse exactly the slots the input gave them, but each
    aligned block's occupants shift into later-processed blocks; whatever
    remains after the last block is discarded.  Per half that is at most
    one block's worth of jobs, so per top interval at most
    max(2**(1-h) |I|, 2**(h+1)) * m jobs are lost.
    """
    report = check_valid_for_system(inst, sys, params, sched)
    if not report.ok:
        raise InvalidInput(f"input schedule is not valid for the system:\n{report}")
    tree = tree_for(params)
    assign: list[Slot] = list(sched.assign)
    for iv, jobs in sorted(sys.assign.items(), key=lambda kv: (kv[0].center, kv[0].length)):
        if not jobs or tree.kind(iv) != TOP:
            continue
        step = window_step(params, iv.length)
        for half, reverse in ((iv.left, False), (iv.right, True)):
            members = [
                j for j in iter_jobs(jobs)
                if sched.assign[j] is not None and sched.assign[j] in half
            ]
            for j in members:
                assign[j] = DISC
            cap = {t: 0 for t in half.slots()}
            for j in members:
                cap[sched.assign[j]] += 1
            queue: list[int] = []
            for block in _half_blocks(half, step, reverse):
                free = [t for t in block.slots() for _ in range(cap[t])]
                for t in free[: len(queue)]:
                    assign[queue.pop(0)] = t
                queue.extend(j for j in members if sched.assign[j] in block)
    return Schedule(T=sched.T, assign=tuple(assign))


def _side_of(owner: Mapping[int, Interval], slot: int, j: int) -> str:
    return "L" if slot in owner[j].left else "R"


def _canonicalize(
    inst: Instance,
    sys: PartialDyadicSystem,
    sched: Schedule,
    params: Params,
) -> tuple[Schedule, int]:
    """Swap loop of the canonicalization; returns the fixpoint and swap count."""
    win = windows(inst, sys, params)
    owner = sys.owner_of()
    scheduled_top = sorted(
        j for j in win if sched.assign[j] is not None
    )
    depth_key: dict[int, int] = {}
    by_interval: dict[Interval, list[int]] = {}
    for j in scheduled_top:
        by_interval.setdefault(owner[j], []).append(j)
    for iv, members in by_interval.items():
        depths = chain_depths(inst, mask_from(members))
        depth_key.update(depths)

    slot: dict[int, int] = {j: sched.assign[j] for j in scheduled_top}

    def side(j: int) -> str:
        return _side_of(owner, slot[j], j)

    def side_less(a: int, b: int) -> bool:
        if owner[a] != owner[b] or side(a) != side(b):
            return False
        ka = (win[a][0], depth_key[a]) if side(a) == "L" else (win[a][1], depth_key[a])
        kb = (win[b][0], depth_key[b]) if side(b) == "L" else (win[b][1], depth_key[b])
        return ka < kb

    def dif_vector() -> tuple[int, int, int]:
        d1 = sum(owner[j].length * abs(slot[j] - owner[j].center) for j in scheduled_top)
        sides = {j: 0 if side(j) == "L" else 1 for j in scheduled_top}
        d2 = count_inversions(scheduled_top, inst.precedes, sides)
        d3 = count_inversions(scheduled_top, side_less, slot)
        return d1, d2, d3

    def find_violation() -> tuple[int, int] | None:
        for i, a in enumerate(scheduled_top):
            for b in scheduled_top[i + 1 :]:
                if inst.precedes(a, b) and slot[a] > slot[b]:
                    return a, b
                if inst.precedes(b, a) and slot[b] > slot[a]:
                    return b, a
        for i, a in enumerate(scheduled_top):
            for b in scheduled_top[i + 1 :]:
                if side_less(a, b) and slot[a] > slot[b]:
                    return a, b
                if side_less(b, a) and slot[b] > slot[a]:
                    return b, a
        return None

    swaps = 0
    rank = dif_vector()
    while (pair := find_violation()) is not None:
        a, b = pair
        slot[a], slot[b] = slot[b], slot[a]
        swaps += 1
        for j in (a, b):
            wb, we = win[j]
            assert wb < slot[j] <= we, "swap broke a window constraint"
        new_rank = dif_vector()
        assert new_rank < rank, "swap did not decrease the ranking vector"
        rank = new_rank
        if swaps > _SWAP_CAP:  # pragma: no cover - strict decrease prevents this
            raise RuntimeError("canonicalization exceeded the swap cap")
    out = list(sched.assign)
    for j, t in slot.items():
        out[j] = t
    return Schedule(T=sched.T, assign=tuple(out)), swaps


def canonicalize(
    inst: Instance,
    sys: PartialDyadicSystem,
    sched: Schedule,
    params: Params,
) -> Schedule:
    """Reorder scheduled top jobs (by slot swaps) until weakly consistent.

    At the fixpoint, for scheduled top jobs: precedence implies
    slot(j) <= slot(j'), and so does the per-(interval, side) key order by
    (window boundary, chain depth).  Discards and bottom-job slots are
    unchanged; each swap stays inside both windows and strictly decreases
    the lexicographic ranking vector, which bounds the loop polynomially.
    """
    return _canonicalize(inst, sys, sched, params)[0]


def canonical_violations(
    inst: Instance,
    sys: PartialDyadicSystem,
    sched: Schedule,
    params: Params,
) -> list[str]:
    """Pairs breaking the weak-order conditions of a canonical schedule."""
    win = windows(inst, sys, params)
    owner = sys.owner_of()
    scheduled_top = sorted(j for j in win if sched.assign[j] is not None)
    out = []
    depth_key: dict[int, int] = {}
    by_interval: dict[Interval, list[int]] = {}
    for j in scheduled_top:
        by_interval.setdefault(owner[j], []).append(j)
    for members in by_interval.values():
        depth_key.update(chain_depths(inst, mask_from(members)))
    for i, a in enumerate(scheduled_top):
        for b in scheduled_top[i + 1 :]:
            for x, y in ((a, b), (b, a)):
                if inst.precedes(x, y) and sched.assign[x] > sched.assign[y]:
                    out.append(f"precedence pair ({x}, {y}) out of order")
                if owner[x] == owner[y]:
                    sx = _side_of(owner, sched.assign[x], x)
                    if sx == _side_of(owner, sched.assign[y], y):
                        kx = (win[x][0 if sx == "L" else 1], depth_key[x])
                        ky = (win[y][0 if sx == "L" else 1], depth_key[y])
                        if kx < ky and sched.assign[x] > sched.assign[y]:
                            out.append(f"side pair ({x}, {y}) out of order")
    return out


def virtually_valid_to_valid(
    inst: Instance,
    sys: PartialDyadicSystem,
    sched: Schedule,
    params: Params,
) -> Schedule:
    """Turn a canonical virtually-valid schedule into a valid one.

    Bottom jobs and discards carry over.  The top jobs inside each bottom
    interval are rescheduled there by capacity-constrained list scheduling
    over exactly the slots they occupied, discarding at most
    m * (chain length of that group) extra jobs per bottom interval.
    """
    report = check_virtually_valid(inst, sys, params, sched)
    if not report.ok:
        raise InvalidInput(f"input schedule is not virtually valid:\n{report}")
    bad = canonical_violations(inst, sys, sched, params)
    if bad:
        raise PrecongruenceViolated("; ".join(bad))
    tree = tree_for(params)
    win = windows(inst, sys, params)
    assign: list[Slot] = list(sched.assign)
    for iv in tree.level(tree.L):
        group = mask_from(
            j for j in win
            if sched.assign[j] is not None and sched.assign[j] in iv
        )
        if not group:
            continue
        cap = [0] * iv.length
        for j in iter_jobs(group):
            cap[sched.assign[j] - iv.begin - 1] += 1
        sub = capacity_list_schedule(inst, group, CapacityProfile(iv, tuple(cap)))
        for j in iter_jobs(group):
            assign[j] = sub.assign[j]
    return Schedule(T=sched.T, assign=tuple(assign))
