"""Horizon padding, discarded-job re-insertion, and the outer makespan search."""

from __future__ import annotations

from collections.abc import Callable

from .core import Instance, JobSet, Schedule, iter_jobs, longest_chain, verify_valid
from .errors import InvalidInput, NoSolution


def next_power_of_two(x: int) -> int:
    if x < 1:
        raise ValueError("need x >= 1")
    return 1 << (x - 1).bit_length()


def pad_to_power_of_two(inst: Instance, T: int) -> tuple[Instance, int, JobSet]:
    """Extend the instance so the target horizon becomes a power of two.

    Adds ``m * (T' - T)`` sink jobs, each preceded by every original job,
    where ``T'`` is the smallest power of two >= T.  Original job ids are
    preserved; returns ``(padded instance, T', mask of added jobs)``.
    """
    T2 = next_power_of_two(T)
    extra = inst.m * (T2 - T)
    if extra == 0:
        return inst, T2, 0
    n2 = inst.n + extra
    originals = inst.all_jobs
    pad_mask = ((1 << n2) - 1) ^ originals
    succ = [s | pad_mask for s in inst.succ] + [0] * extra
    pred = list(inst.pred) + [originals] * extra
    topo = inst.topo + tuple(range(inst.n, n2))
    padded = Instance(n=n2, m=inst.m, succ=tuple(succ), pred=tuple(pred), topo=topo)
    return padded, T2, pad_mask


def insert_discarded(inst: Instance, sched: Schedule) -> Schedule:
    """Insert every discarded job back, growing the makespan by one per job.

    Each discarded job goes right after its latest-scheduled predecessor
    (slot 0 if none), with the suffix of the schedule shifted right by one
    slot to make room.  Jobs are inserted in topological order so that a
    discarded predecessor is placed before its discarded successors.
    """
    base = verify_valid(inst, sched)
    if not base.ok:
        raise InvalidInput(f"schedule is not valid before insertion:\n{base}")
    assign = list(sched.assign)
    T = sched.T
    for j in inst.topo:
        if assign[j] is not None:
            continue
        t = 0
        for i in iter_jobs(inst.pred[j]):
            ti = assign[i]
            if ti is not None and ti > t:
                t = ti
        T += 1
        for i, ti in enumerate(assign):
            if ti is not None and ti >= t + 1:
                assign[i] = ti + 1
        assign[j] = t + 1
    return Schedule(T=T, assign=tuple(assign))


def binary_search_makespan(
    inst: Instance, solver: Callable[[int], Schedule | None]
) -> tuple[int, Schedule]:
    """Minimal horizon at which ``solver`` succeeds, assuming monotone success.

    Searches ``[max(longest chain, ceil(n/m)), n]``; both ends are the
    classic lower and upper bounds for unit jobs.
    """
    if inst.n == 0:
        return 0, Schedule(T=0, assign=())
    lo = max(longest_chain(inst, inst.all_jobs), -(-inst.n // inst.m))
    hi = inst.n
    best: Schedule | None = solver(hi)
    if best is None:
        raise NoSolution(f"solver failed at horizon n={hi}")
    best_T = hi
    while lo < best_T:
        mid = (lo + best_T) // 2
        got = solver(mid)
        if got is None:
            lo = mid + 1
        else:
            best, best_T = got, mid
    return best_T, best
