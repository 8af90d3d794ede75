"""List-scheduling baselines and the exact brute-force makespan oracle."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

from .core import (
    DISC,
    Instance,
    Interval,
    JobSet,
    Schedule,
    Slot,
    iter_jobs,
    job_count,
    longest_chain,
    mask_from,
)
from .errors import CapacityDeficit, TooLarge

EXACT_OPT_LIMIT = 16


@dataclass(frozen=True)
class CapacityProfile:
    """Per-slot machine capacities over an interval."""

    interval: Interval
    cap: tuple[int, ...]  # one entry per slot of `interval`, each in [0, m]

    def __post_init__(self) -> None:
        if len(self.cap) != self.interval.length:
            raise ValueError("capacity vector length must match interval length")
        if any(c < 0 for c in self.cap):
            raise ValueError("capacities must be nonnegative")

    @classmethod
    def uniform(cls, interval: Interval, cap: int) -> "CapacityProfile":
        return cls(interval, (cap,) * interval.length)

    def total(self) -> int:
        return sum(self.cap)


def graham_list(inst: Instance) -> Schedule:
    """Greedy non-idling list schedule: at each slot run up to ``m`` ready jobs.

    Ready jobs are taken in ascending id.  Never discards; the makespan is
    at most (longest chain) + ceil(n/m).
    """
    assign: list[Slot] = [DISC] * inst.n
    done: JobSet = 0
    t = 0
    while job_count(done) < inst.n:
        t += 1
        ready = [
            j
            for j in range(inst.n)
            if not done >> j & 1 and inst.pred[j] & ~done == 0
        ]
        batch = ready[: inst.m]
        for j in batch:
            assign[j] = t
        done |= mask_from(batch)
    return Schedule(T=max(t, 1) if inst.n else 0, assign=tuple(assign))


def capacity_list_schedule(
    inst: Instance, jobs: JobSet, profile: CapacityProfile
) -> Schedule:
    """Schedule ``jobs`` inside the profile's interval, discarding leftovers.

    Greedy per slot: run as many ready jobs as the slot's capacity allows
    (ascending id).  When capacities sum to more than ``|jobs|`` the excess
    is trimmed away from the latest slots first.  Discards at most
    ``m * longest_chain(jobs)`` jobs; precedence is respected within
    ``jobs`` and per-slot counts never exceed the (untrimmed) capacities.
    """
    total, want = profile.total(), job_count(jobs)
    if total < want:
        raise CapacityDeficit(f"capacity {total} < {want} jobs")
    cap = list(profile.cap)
    surplus = total - want
    for i in range(len(cap) - 1, -1, -1):
        if surplus == 0:
            break
        take = min(cap[i], surplus)
        cap[i] -= take
        surplus -= take

    assign: dict[int, Slot] = {j: DISC for j in iter_jobs(jobs)}
    done: JobSet = 0
    for idx, t in enumerate(profile.interval.slots()):
        if cap[idx] == 0:
            continue
        ready = [
            j
            for j in iter_jobs(jobs & ~done)
            if inst.pred[j] & jobs & ~done == 0
        ]
        for j in ready[: cap[idx]]:
            assign[j] = t
            done |= 1 << j
    full = [DISC] * inst.n
    for j, t in assign.items():
        full[j] = t
    return Schedule(T=profile.interval.end, assign=tuple(full))


def _ready(inst: Instance, remaining: JobSet) -> JobSet:
    r = 0
    for j in iter_jobs(remaining):
        if inst.pred[j] & remaining == 0:
            r |= 1 << j
    return r


def exact_opt(inst: Instance, limit: int = EXACT_OPT_LIMIT) -> tuple[int, Schedule]:
    """Minimum-makespan zero-discard schedule by exhaustive search.

    Branches slot by slot over maximal ready batches (for unit jobs some
    optimal schedule always runs min(m, #ready) jobs per slot), memoized on
    the bitmask of completed jobs, pruned with the admissible bound
    max(longest chain, ceil(remaining / m)).
    """
    if inst.n > limit:
        raise TooLarge(f"exact oracle limited to {limit} jobs, got {inst.n}")
    if inst.n == 0:
        return 0, Schedule(T=0, assign=())
    all_jobs = inst.all_jobs
    memo: dict[JobSet, int] = {all_jobs: 0}

    def lower_bound(done: JobSet) -> int:
        rem = all_jobs & ~done
        if not rem:
            return 0
        return max(longest_chain(inst, rem), -(-job_count(rem) // inst.m))

    def batches(done: JobSet) -> list[JobSet]:
        ready = list(iter_jobs(_ready(inst, all_jobs & ~done)))
        k = min(inst.m, len(ready))
        return [mask_from(c) for c in combinations(ready, k)]

    def solve(done: JobSet, ceiling: int) -> int:
        """Fewest extra slots to finish, or ceiling if that cannot be beaten."""
        if done in memo:
            return memo[done]
        lb = lower_bound(done)
        if lb >= ceiling:
            return lb  # not stored: may be an underestimate cut
        best = ceiling
        for batch in batches(done):
            got = 1 + solve(done | batch, best - 1)
            if got < best:
                best = got
                if best == lb:
                    break
        if best < ceiling:
            memo[done] = best
        return best

    opt = solve(0, inst.n + 1)

    # Reconstruct deterministically by replaying the memoized values.
    assign: list[Slot] = [DISC] * inst.n
    done: JobSet = 0
    t = 0
    while done != all_jobs:
        t += 1
        rest = solve(done, inst.n + 1)
        for batch in batches(done):
            if 1 + solve(done | batch, inst.n + 1) == rest:
                for j in iter_jobs(batch):
                    assign[j] = t
                done |= batch
                break
        else:  # pragma: no cover - memo guarantees a matching batch
            raise AssertionError("reconstruction failed")
    return opt, Schedule(T=opt, assign=tuple(assign))


def exact_feasible(inst: Instance, T: int, limit: int = EXACT_OPT_LIMIT) -> Schedule | None:
    """Zero-discard schedule with makespan <= T, or None."""
    opt, sched = exact_opt(inst, limit=limit)
    if opt > T:
        return None
    return Schedule(T=T, assign=sched.assign)
