"""Instances, schedules, and order-combinatorics primitives.

Jobs are dense integer ids ``0..n-1``.  Sets of jobs are plain ``int``
bitmasks (bit ``j`` set means job ``j`` is a member); the precedence
relation is stored as its transitive closure, one reachability mask per
job, so "no precedence constraints from A to B" is a couple of bitwise
ops.  A schedule maps each job to a time slot in ``(0, T]`` or to
``None``, the discard sentinel.
"""

from __future__ import annotations

import heapq
from collections.abc import Callable, Iterable, Iterator, Mapping, Sequence
from dataclasses import dataclass

from .errors import CycleError, NotInSet

JobSet = int  # bitmask over job ids
Slot = int | None  # None = discarded

DISC: Slot = None


def mask_from(jobs: Iterable[int]) -> JobSet:
    """Bitmask with the given job ids set."""
    m = 0
    for j in jobs:
        m |= 1 << j
    return m


def iter_jobs(mask: JobSet) -> Iterator[int]:
    """Ascending job ids present in the mask."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def job_count(mask: JobSet) -> int:
    return mask.bit_count()


@dataclass(frozen=True)
class Interval:
    """Half-open integer time interval ``(begin, end]``."""

    begin: int
    end: int

    def __post_init__(self) -> None:
        if not 0 <= self.begin < self.end:
            raise ValueError(f"bad interval ({self.begin}, {self.end}]")

    @property
    def length(self) -> int:
        return self.end - self.begin

    @property
    def center(self) -> int:
        return (self.begin + self.end) // 2

    @property
    def left(self) -> "Interval":
        return Interval(self.begin, self.center)

    @property
    def right(self) -> "Interval":
        return Interval(self.center, self.end)

    def __contains__(self, t: object) -> bool:
        return isinstance(t, int) and self.begin < t <= self.end

    def slots(self) -> range:
        return range(self.begin + 1, self.end + 1)

    def contains_interval(self, other: "Interval") -> bool:
        return self.begin <= other.begin and other.end <= self.end

    def __repr__(self) -> str:  # compact, used in violation messages
        return f"({self.begin},{self.end}]"


@dataclass(frozen=True)
class Instance:
    """``n`` unit jobs on ``m`` machines under a strict partial order.

    ``succ[j]`` / ``pred[j]`` are the transitively closed successor and
    predecessor masks of job ``j``; ``topo`` is a fixed topological order
    (ascending id among incomparable jobs).
    """

    n: int
    m: int
    succ: tuple[JobSet, ...]
    pred: tuple[JobSet, ...]
    topo: tuple[int, ...]

    @property
    def all_jobs(self) -> JobSet:
        return (1 << self.n) - 1

    def precedes(self, a: int, b: int) -> bool:
        return bool(self.succ[a] >> b & 1)

    def edges(self) -> Iterator[tuple[int, int]]:
        """All closure pairs (a, b) with a before b, ascending."""
        for a in range(self.n):
            for b in iter_jobs(self.succ[a]):
                yield a, b

    def no_prec_between(self, src: JobSet, dst: JobSet) -> bool:
        """True if no job in ``src`` precedes any job in ``dst``."""
        reach = 0
        for j in iter_jobs(src):
            reach |= self.succ[j]
        return not reach & dst

    def __hash__(self) -> int:
        return hash((self.n, self.m, self.succ))


def build_instance(n: int, m: int, edges: Iterable[tuple[int, int]]) -> Instance:
    """Build an instance from direct precedence edges.

    Stores the transitive closure of ``edges``.  Raises ``CycleError`` on a
    directed cycle and ``IndexError`` on out-of-range job ids.
    """
    if n < 0 or m < 1:
        raise ValueError(f"need n >= 0 and m >= 1, got n={n}, m={m}")
    out: list[JobSet] = [0] * n
    indeg = [0] * n
    for u, v in edges:
        if not (0 <= u < n and 0 <= v < n):
            raise IndexError(f"edge ({u}, {v}) out of range for n={n}")
        if u == v:
            raise CycleError(f"self-loop on job {u}")
        if not out[u] >> v & 1:
            out[u] |= 1 << v
            indeg[v] += 1

    # Kahn's algorithm: topological order, detects cycles.
    ready = sorted(j for j in range(n) if indeg[j] == 0)
    topo: list[int] = []
    heap = list(ready)
    heapq.heapify(heap)
    while heap:
        u = heapq.heappop(heap)
        topo.append(u)
        for v in iter_jobs(out[u]):
            indeg[v] -= 1
            if indeg[v] == 0:
                heapq.heappush(heap, v)
    if len(topo) != n:
        raise CycleError("precedence edges contain a directed cycle")

    succ = [0] * n
    for u in reversed(topo):
        s = out[u]
        for v in iter_jobs(out[u]):
            s |= succ[v]
        succ[u] = s
    pred = [0] * n
    for u in range(n):
        for v in iter_jobs(succ[u]):
            pred[v] |= 1 << u
    return Instance(n=n, m=m, succ=tuple(succ), pred=tuple(pred), topo=tuple(topo))


def longest_chain(inst: Instance, jobs: JobSet) -> int:
    """Length (job count) of the longest precedence chain inside ``jobs``."""
    best = 0
    depth: dict[int, int] = {}
    for j in inst.topo:
        if jobs >> j & 1:
            d = 1
            for i in iter_jobs(inst.pred[j] & jobs):
                di = depth[i] + 1
                if di > d:
                    d = di
            depth[j] = d
            if d > best:
                best = d
    return best


def chain_depths(inst: Instance, jobs: JobSet) -> dict[int, int]:
    """Longest-chain-ending-at-j lengths for every j in ``jobs``."""
    depth: dict[int, int] = {}
    for j in inst.topo:
        if jobs >> j & 1:
            d = 1
            for i in iter_jobs(inst.pred[j] & jobs):
                di = depth[i] + 1
                if di > d:
                    d = di
            depth[j] = d
    return depth


def chain_depth(inst: Instance, jobs: JobSet, j: int) -> int:
    """Longest chain within ``jobs`` ending at ``j``."""
    if not jobs >> j & 1:
        raise NotInSet(j)
    return chain_depths(inst, jobs)[j]


def preds_and_succs(inst: Instance, jobs: JobSet, j: int) -> tuple[JobSet, JobSet]:
    """Predecessor and successor masks of ``j`` restricted to ``jobs``."""
    if not jobs >> j & 1:
        raise NotInSet(j)
    return inst.pred[j] & jobs, inst.succ[j] & jobs


@dataclass(frozen=True)
class Violation:
    kind: str
    detail: str

    def __str__(self) -> str:
        return f"{self.kind}: {self.detail}"


@dataclass(frozen=True)
class ValidityReport:
    violations: tuple[Violation, ...]
    discards: int = 0

    @property
    def ok(self) -> bool:
        return not self.violations

    def kinds(self) -> set[str]:
        return {v.kind for v in self.violations}

    def __str__(self) -> str:
        if self.ok:
            return f"valid ({self.discards} discarded)"
        lines = [f"INVALID ({len(self.violations)} violations, {self.discards} discarded)"]
        lines += [f"  {v}" for v in self.violations]
        return "\n".join(lines)


@dataclass(frozen=True)
class Schedule:
    """Assignment of every job to a slot in ``(0, T]`` or to discard."""

    T: int
    assign: tuple[Slot, ...]

    def __post_init__(self) -> None:
        if self.T < 0:
            raise ValueError("horizon must be nonnegative")
        for j, t in enumerate(self.assign):
            if t is not None and not 1 <= t <= self.T:
                raise ValueError(f"job {j} assigned slot {t} outside (0, {self.T}]")

    @property
    def n(self) -> int:
        return len(self.assign)

    @property
    def discarded(self) -> JobSet:
        return mask_from(j for j, t in enumerate(self.assign) if t is None)

    @property
    def discard_count(self) -> int:
        return sum(1 for t in self.assign if t is None)

    @property
    def scheduled_count(self) -> int:
        return sum(1 for t in self.assign if t is not None)

    @property
    def makespan(self) -> int:
        return max((t for t in self.assign if t is not None), default=0)

    def jobs_at(self, t: int) -> JobSet:
        return mask_from(j for j, s in enumerate(self.assign) if s == t)

    def jobs_in(self, iv: Interval) -> JobSet:
        return mask_from(
            j for j, s in enumerate(self.assign) if s is not None and s in iv
        )

    def as_dict(self) -> dict[int, Slot]:
        return dict(enumerate(self.assign))

    def replace(self, updates: Mapping[int, Slot], T: int | None = None) -> "Schedule":
        assign = list(self.assign)
        for j, t in updates.items():
            assign[j] = t
        return Schedule(T=self.T if T is None else T, assign=tuple(assign))


def verify_valid(inst: Instance, sched: Schedule) -> ValidityReport:
    """Check capacity and precedence constraints; reports every violation."""
    out: list[Violation] = []
    if sched.n != inst.n:
        out.append(Violation("domain", f"schedule covers {sched.n} jobs, instance has {inst.n}"))
    counts: dict[int, int] = {}
    for t in sched.assign:
        if t is not None:
            counts[t] = counts.get(t, 0) + 1
    for t in sorted(counts):
        if counts[t] > inst.m:
            out.append(Violation("capacity", f"{counts[t]} jobs at slot {t} > m={inst.m}"))
    for a in range(min(sched.n, inst.n)):
        ta = sched.assign[a]
        if ta is None:
            continue
        for b in iter_jobs(inst.succ[a]):
            tb = sched.assign[b]
            if tb is not None and ta >= tb:
                out.append(Violation("precedence", f"job {a} at {ta} not before job {b} at {tb}"))
    return ValidityReport(violations=tuple(out), discards=sched.discard_count)


def count_inversions(
    items: Sequence,
    less: Callable[[object, object], bool],
    values: Mapping,
) -> int:
    """Unordered pairs ordered one way by ``less`` and the other way by ``values``.

    ``{a, b}`` is an inversion when ``less(a, b)`` holds but
    ``values[b] < values[a]`` (or symmetrically); equal values never count.
    """
    total = 0
    for i, a in enumerate(items):
        for b in items[i + 1 :]:
            if less(a, b):
                if values[b] < values[a]:
                    total += 1
            elif less(b, a):
                if values[a] < values[b]:
                    total += 1
    return total
