"""Global parameters, the dyadic interval tree, job-to-interval systems,
windows for top jobs, and the two splitting procedures that drive the solver.

A (partial) system assigns jobs to tree intervals under a root so that
chain lengths stay small on top intervals, middle intervals are empty, and
the in-order sequence of assignments respects precedence.  Windows relax
the precedence constraints of top jobs to aligned sub-ranges of their
owning intervals.
"""

from __future__ import annotations

import math
from collections.abc import Mapping
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

from .core import (
    Instance,
    Interval,
    JobSet,
    Schedule,
    Slot,
    ValidityReport,
    Violation,
    iter_jobs,
    job_count,
    longest_chain,
    mask_from,
    verify_valid,
)
from .errors import GuessExhausted, InvalidInput, InvalidOverride

Guesses = tuple[str, ...]  # entries 'L' / 'R'
Window = tuple[int, int]  # (b, e) meaning the half-open range (b, e]

LEFT = "L"
RIGHT = "R"

OVERRIDE_KEYS = ("h", "hp", "p", "delta", "deltap")


def _ceil_log2(x: Fraction) -> int:
    """Smallest k >= 0 with 2**k >= x, computed exactly."""
    if x <= 0:
        raise ValueError("need x > 0")
    k = 0
    while (1 << k) * x.denominator < x.numerator:
        k += 1
    return k


@dataclass(frozen=True)
class Params:
    """Derived solver parameters for horizon T, machine count m and accuracy eps.

    ``h`` fixes the bottom-interval length 2**h, ``L = log2(T) - h`` the
    tree depth, ``hp`` the number of middle levels, ``delta``/``deltap``
    the chain-length budget of top intervals, and ``p`` the guess-vector
    length for top intervals.  ``overridden`` records which fields were
    replaced by hand.
    """

    T: int
    m: int
    eps: Fraction
    h: int
    hp: int
    delta: Fraction
    deltap: Fraction
    p: int
    overridden: tuple[str, ...] = ()

    @property
    def log_T(self) -> int:
        return self.T.bit_length() - 1

    @property
    def L(self) -> int:
        return self.log_T - self.h


def compute_params(
    T: int,
    m: int,
    eps: Fraction | float | str,
    overrides: Mapping[str, object] | None = None,
) -> Params:
    """Default parameters per the global formulas, with validated overrides.

    Defaults: h = ceil(log2(8 m log2(T) / eps)), hp = ceil(log2(4m / eps)),
    delta = eps / (16 * 2**h * m**2), deltap = 1 / (2 * 2**(2h)),
    p = floor((2 / delta) * ln(m / deltap)) + 1.

    The formulas presume a horizon much larger than m/eps; when the default
    h would exceed log2(T) it is clamped to log2(T), which collapses the
    tree to a single bottom interval (the whole horizon is then solved
    exactly).  Explicit overrides are validated, never clamped.
    """
    if T < 2 or T & (T - 1):
        raise InvalidOverride(f"T must be a power of two >= 2, got {T}")
    if m < 1:
        raise InvalidOverride(f"m must be >= 1, got {m}")
    eps = Fraction(eps)
    if not 0 < eps < 1:
        raise InvalidOverride(f"eps must be in (0, 1), got {eps}")
    log_T = T.bit_length() - 1

    h = min(_ceil_log2(Fraction(8 * m * log_T) / eps), log_T)
    hp = _ceil_log2(Fraction(4 * m) / eps)
    overridden: list[str] = []
    ov = dict(overrides or {})
    unknown = set(ov) - set(OVERRIDE_KEYS)
    if unknown:
        raise InvalidOverride(f"unknown override keys: {sorted(unknown)}")
    if "h" in ov:
        h = int(ov["h"])  # type: ignore[arg-type]
        overridden.append("h")
    if "hp" in ov:
        hp = int(ov["hp"])  # type: ignore[arg-type]
        overridden.append("hp")
    delta = eps / (16 * (1 << h) * m * m)
    deltap = Fraction(1, 2 << (2 * h))
    if "delta" in ov:
        delta = Fraction(ov["delta"])  # type: ignore[arg-type]
        overridden.append("delta")
    if "deltap" in ov:
        deltap = Fraction(ov["deltap"])  # type: ignore[arg-type]
        overridden.append("deltap")
    if delta > 0 and deltap > 0:
        ratio = Fraction(m) / deltap
        log_ratio = math.log(ratio.numerator) - math.log(ratio.denominator)
        p = math.floor(Fraction(2) / delta * Fraction(log_ratio)) + 1
    else:
        p = 1
    if "p" in ov:
        p = int(ov["p"])  # type: ignore[arg-type]
        overridden.append("p")

    if not 0 <= h <= log_T:
        raise InvalidOverride(f"need 0 <= h <= log2(T)={log_T}, got h={h}")
    if hp < 0:
        raise InvalidOverride(f"need hp >= 0, got {hp}")
    if delta < 0 or deltap < 0:
        raise InvalidOverride("delta and deltap must be nonnegative")
    if p < 1:
        raise InvalidOverride(f"need p >= 1, got {p}")
    return Params(
        T=T, m=m, eps=eps, h=h, hp=hp, delta=delta, deltap=deltap, p=p,
        overridden=tuple(overridden),
    )


TOP = "top"
MID = "mid"
BOT = "bot"


@dataclass(frozen=True)
class DyadicTree:
    """Aligned power-of-two intervals over (0, T], levels 0..L.

    Level l holds 2**l intervals of length T / 2**l; leaves (level L) have
    length 2**h.  Levels 0..L-hp-1 are top, L-hp..L-1 middle, L bottom.
    """

    T: int
    L: int
    hp: int

    @property
    def root(self) -> Interval:
        return Interval(0, self.T)

    @property
    def bottom_length(self) -> int:
        return self.T >> self.L

    def level(self, l: int) -> tuple[Interval, ...]:
        if not 0 <= l <= self.L:
            return ()
        size = self.T >> l
        return tuple(Interval(k * size, (k + 1) * size) for k in range(1 << l))

    def levels(self) -> list[tuple[Interval, ...]]:
        return [self.level(l) for l in range(self.L + 1)]

    def level_of(self, iv: Interval) -> int:
        l = self.T.bit_length() - iv.length.bit_length()
        if not (0 <= l <= self.L and self.T >> l == iv.length and iv.begin % iv.length == 0
                and 0 <= iv.begin < iv.end <= self.T):
            raise ValueError(f"{iv} is not a tree interval")
        return l

    def kind(self, iv: Interval) -> str:
        l = self.level_of(iv)
        if l == self.L:
            return BOT
        if l >= self.L - self.hp:
            return MID
        return TOP

    def is_tree_interval(self, iv: Interval) -> bool:
        try:
            self.level_of(iv)
        except ValueError:
            return False
        return True

    def under(self, root: Interval) -> list[Interval]:
        """All tree intervals contained in ``root``, by (level, begin)."""
        out: list[Interval] = []
        l0 = self.level_of(root)
        for l in range(l0, self.L + 1):
            size = self.T >> l
            out.extend(
                Interval(b, b + size) for b in range(root.begin, root.end, size)
            )
        return out

    def rel_level(self, root: Interval, k: int) -> tuple[Interval, ...]:
        """Intervals of length |root| / 2**k inside ``root`` (empty if below leaves)."""
        if k < 0:
            return ()
        l = self.level_of(root) + k
        if l > self.L:
            return ()
        size = self.T >> l
        return tuple(
            Interval(b, b + size) for b in range(root.begin, root.end, size)
        )

    def rel_below(self, root: Interval, k: int) -> list[Interval]:
        """Intervals of relative level < k inside ``root``."""
        out: list[Interval] = []
        for kk in range(k):
            out.extend(self.rel_level(root, kk))
        return out


@lru_cache(maxsize=None)
def tree_for(params: Params) -> DyadicTree:
    return DyadicTree(T=params.T, L=params.L, hp=params.hp)


def tree_levels(params: Params) -> list[tuple[Interval, ...]]:
    return tree_for(params).levels()


def chain_bound(params: Params, kind: str, interval_len: int, count: int) -> Fraction:
    """Chain-length budget for ``count`` jobs on an interval of the given kind."""
    if kind == TOP:
        return params.delta * count + params.deltap * interval_len
    if kind == MID:
        return Fraction(0)
    raise ValueError("chain budget applies to top and middle intervals only")


@dataclass(frozen=True)
class PartialDyadicSystem:
    """Job assignment over the tree intervals under ``root``, plus ancestor
    jobs inherited from enclosing levels with their fixed windows."""

    root: Interval
    assign: Mapping[Interval, JobSet]
    ancestors: JobSet = 0
    anc_windows: Mapping[int, Window] = field(default_factory=dict)

    def jobs_assigned(self) -> JobSet:
        out = 0
        for jobs in self.assign.values():
            out |= jobs
        return out

    def all_jobs(self) -> JobSet:
        return self.jobs_assigned() | self.ancestors

    def owner_of(self) -> dict[int, Interval]:
        out: dict[int, Interval] = {}
        for iv, jobs in self.assign.items():
            for j in iter_jobs(jobs):
                out[j] = iv
        return out

    def jobs_within(self, region: Interval) -> JobSet:
        """Union of assignments over tree intervals fully inside ``region``."""
        out = 0
        for iv, jobs in self.assign.items():
            if jobs and region.contains_interval(iv):
                out |= jobs
        return out


def full_system(params: Params, assign: Mapping[Interval, JobSet]) -> PartialDyadicSystem:
    return PartialDyadicSystem(root=tree_for(params).root, assign=dict(assign))


def _sorted_items(assign: Mapping[Interval, JobSet]) -> list[tuple[Interval, JobSet]]:
    return sorted(assign.items(), key=lambda kv: (kv[0].center, kv[0].length))


def check_system(
    inst: Instance,
    sys: PartialDyadicSystem,
    params: Params,
    require_full: bool = False,
) -> ValidityReport:
    """Check the four structural clauses of a (partial) system, with witnesses.

    (a) ancestor and per-interval job sets mutually disjoint; (b) chain
    length within budget on every top interval; (c) middle intervals
    empty; (d) for in-order earlier intervals, no precedence constraints
    pointing back.  With ``require_full``: root covers the whole horizon,
    no ancestors, every job assigned.
    """
    tree = tree_for(params)
    out: list[Violation] = []
    seen = sys.ancestors
    for iv, jobs in _sorted_items(sys.assign):
        if not tree.is_tree_interval(iv) or not sys.root.contains_interval(iv):
            out.append(Violation("system-key", f"{iv} is not a tree interval under {sys.root}"))
            continue
        if jobs & seen:
            dup = next(iter_jobs(jobs & seen))
            out.append(Violation("system-disjoint", f"job {dup} assigned twice (at {iv})"))
        seen |= jobs
        kind = tree.kind(iv)
        if kind == TOP:
            bound = chain_bound(params, TOP, iv.length, job_count(jobs))
            got = longest_chain(inst, jobs)
            if got > bound:
                out.append(Violation(
                    "system-chain", f"chain {got} > budget {bound} on top {iv}"))
        elif kind == MID and jobs:
            out.append(Violation("system-middle", f"middle {iv} holds {job_count(jobs)} jobs"))
    items = [(iv, jobs) for iv, jobs in _sorted_items(sys.assign) if jobs]
    for i, (iv_a, jobs_a) in enumerate(items):
        for iv_b, jobs_b in items[i + 1 :]:
            if iv_a == iv_b:
                continue
            # iv_a is in-order before iv_b: no constraints from later to earlier.
            if not inst.no_prec_between(jobs_b, jobs_a):
                out.append(Violation(
                    "system-order",
                    f"precedence from jobs of {iv_b} back to jobs of {iv_a}"))
    if require_full:
        if sys.root != tree.root:
            out.append(Violation("system-cover", f"root {sys.root} != {tree.root}"))
        if sys.ancestors:
            out.append(Violation("system-cover", "full system must have no ancestors"))
        missing = inst.all_jobs & ~sys.jobs_assigned()
        if missing:
            out.append(Violation(
                "system-cover", f"jobs {list(iter_jobs(missing))} not assigned"))
    return ValidityReport(violations=tuple(out))


def window_step(params: Params, interval_len: int) -> int:
    """Alignment unit for window boundaries within an owning interval."""
    return max(interval_len >> params.h, 1 << params.h)


def _window_for(
    inst: Instance,
    j: int,
    iv: Interval,
    step: int,
    region_jobs,
) -> Window:
    """Largest aligned window (b, e] around center(iv) with no precedence
    into j from the left remainder nor out of j into the right remainder."""
    center = iv.center
    b = center
    for cand in range(iv.begin + step, center + 1, step):
        region = region_jobs(Interval(cand, center)) if cand < center else 0
        if inst.no_prec_between(region, 1 << j):
            b = cand
            break
    e = center
    for cand in range(iv.end - step, center - 1, -step):
        region = region_jobs(Interval(center, cand)) if cand > center else 0
        if inst.no_prec_between(1 << j, region):
            e = cand
            break
    return b, e


def windows(inst: Instance, sys: PartialDyadicSystem, params: Params) -> dict[int, Window]:
    """Window (b, e] for every top job of the system.

    ``b`` is the least multiple of the alignment unit in (begin, center]
    such that no job assigned fully inside (b, center] precedes j; ``e``
    mirrors it on the right.  Boundaries always satisfy
    begin < b <= center <= e < end.
    """
    tree = tree_for(params)
    out: dict[int, Window] = {}
    for iv, jobs in _sorted_items(sys.assign):
        if not jobs or tree.kind(iv) != TOP:
            continue
        step = window_step(params, iv.length)
        for j in iter_jobs(jobs):
            out[j] = _window_for(inst, j, iv, step, sys.jobs_within)
    return out


def check_valid_for_system(
    inst: Instance,
    sys: PartialDyadicSystem,
    params: Params,
    sched: Schedule,
) -> ValidityReport:
    """Validity against a full system: capacity, precedence, and each job
    scheduled inside its owning interval (or discarded)."""
    base = verify_valid(inst, sched)
    out = list(base.violations)
    for iv, jobs in _sorted_items(sys.assign):
        for j in iter_jobs(jobs):
            t = sched.assign[j]
            if t is not None and t not in iv:
                out.append(Violation("interval", f"job {j} at {t} outside owning {iv}"))
    return ValidityReport(violations=tuple(out), discards=base.discards)


def check_virtually_valid(
    inst: Instance,
    sys: PartialDyadicSystem,
    params: Params,
    sched: Mapping[int, Slot] | Schedule,
) -> ValidityReport:
    """Check the five clause families of a virtually-valid schedule.

    Capacity everywhere; precedence and interval constraints for bottom
    jobs only; window constraints for top jobs; window constraints for
    ancestor jobs.  The schedule must cover exactly the system's jobs with
    slots inside the root interval.
    """
    if isinstance(sched, Schedule):
        domain_all = sched.as_dict()
        sched = {
            j: domain_all[j] for j in iter_jobs(sys.all_jobs()) if j in domain_all
        }
    tree = tree_for(params)
    out: list[Violation] = []
    expect = sys.all_jobs()
    got = mask_from(sched.keys())
    if got != expect:
        out.append(Violation(
            "domain",
            f"schedule covers {job_count(got)} jobs, system has {job_count(expect)}"))
    counts: dict[int, int] = {}
    discards = 0
    for j, t in sched.items():
        if t is None:
            discards += 1
            continue
        if t not in sys.root:
            out.append(Violation("domain", f"job {j} at {t} outside root {sys.root}"))
        counts[t] = counts.get(t, 0) + 1
    for t in sorted(counts):
        if counts[t] > inst.m:
            out.append(Violation("capacity", f"{counts[t]} jobs at slot {t} > m={inst.m}"))

    bottom_jobs: JobSet = 0
    for iv, jobs in _sorted_items(sys.assign):
        if tree.kind(iv) == BOT:
            bottom_jobs |= jobs
            for j in iter_jobs(jobs):
                t = sched.get(j)
                if t is not None and t not in iv:
                    out.append(Violation("interval", f"bottom job {j} at {t} outside {iv}"))
    sched_bottom = [j for j in iter_jobs(bottom_jobs) if sched.get(j) is not None]
    for i, a in enumerate(sched_bottom):
        for b in sched_bottom[i + 1 :]:
            if inst.precedes(a, b) and sched[a] >= sched[b]:
                out.append(Violation(
                    "precedence", f"bottom job {a} at {sched[a]} not before {b} at {sched[b]}"))
            elif inst.precedes(b, a) and sched[b] >= sched[a]:
                out.append(Violation(
                    "precedence", f"bottom job {b} at {sched[b]} not before {a} at {sched[a]}"))

    win = windows(inst, sys, params)
    for j in sorted(win):
        t = sched.get(j)
        b, e = win[j]
        if t is not None and not b < t <= e:
            out.append(Violation("window", f"top job {j} at {t} outside ({b},{e}]"))
    for j in sorted(iter_jobs(sys.ancestors)):
        t = sched.get(j)
        if t is None:
            continue
        b, e = sys.anc_windows[j]
        if not b < t <= e:
            out.append(Violation("window-anc", f"ancestor {j} at {t} outside ({b},{e}]"))
    return ValidityReport(violations=tuple(out), discards=discards)


def _select_pivot(inst: Instance, jobs: JobSet, threshold: Fraction) -> int:
    """Smallest-id job whose predecessor and successor counts within ``jobs``
    both reach the threshold.  Such a job always exists while the chain
    length exceeds the budget (take the middle of a longest chain)."""
    for j in iter_jobs(jobs):
        if (job_count(inst.pred[j] & jobs) >= threshold
                and job_count(inst.succ[j] & jobs) >= threshold):
            return j
    raise AssertionError("no eligible pivot; split loop invariant broken")


def push_down(
    inst: Instance,
    iv: Interval,
    jobs: JobSet,
    guesses: Guesses,
    params: Params,
) -> tuple[JobSet, JobSet, JobSet]:
    """Split ``jobs`` into (stay, to-left, to-right) following a guess vector.

    Repeatedly picks the pivot of an over-long chain; entry 'L' moves the
    pivot with its predecessors left, 'R' moves it with its successors
    right, until the chain length of the remainder fits the interval's
    budget.  Raises ``GuessExhausted`` when the vector is shorter than the
    number of iterations required (callers treat that as a pruned guess).
    """
    tree = tree_for(params)
    kind = tree.kind(iv)
    if kind == BOT:
        raise ValueError("push_down applies to top and middle intervals only")
    stay = jobs
    k_left = 0
    k_right = 0
    q = 0
    while True:
        bound = chain_bound(params, kind, iv.length, job_count(stay))
        if longest_chain(inst, stay) <= bound:
            break
        if q >= len(guesses):
            raise GuessExhausted(f"needed more than {len(guesses)} guesses at {iv}")
        j = _select_pivot(inst, stay, bound / 2 - 1)
        if guesses[q] == LEFT:
            moved = (1 << j) | (inst.pred[j] & stay)
            k_left |= moved
        else:
            moved = (1 << j) | (inst.succ[j] & stay)
            k_right |= moved
        stay &= ~moved
        q += 1
    return stay, k_left, k_right


def system_from_schedule(
    inst: Instance,
    sched: Schedule,
    params: Params,
) -> tuple[PartialDyadicSystem, dict[Interval, JobSet], dict[Interval, Guesses]]:
    """Build the full system a zero-discard schedule is valid for.

    Walks the tree from the root; on each non-bottom interval it runs the
    split loop, deciding each pivot's side by where the schedule put it.
    Returns the system, the per-interval covered sets (all jobs assigned
    within each interval), and the recorded guess vectors.  The pivot rule
    matches ``push_down``, so replaying a recorded vector (under any
    padding) reproduces the same split.
    """
    if sched.discard_count:
        raise InvalidInput("reference schedule must have zero discards")
    if sched.makespan > params.T:
        raise InvalidInput(f"makespan {sched.makespan} exceeds horizon {params.T}")
    report = verify_valid(inst, sched)
    if not report.ok:
        raise InvalidInput(f"reference schedule invalid:\n{report}")
    tree = tree_for(params)
    assign: dict[Interval, JobSet] = {}
    covered: dict[Interval, JobSet] = {}
    guesses: dict[Interval, Guesses] = {}

    def walk(iv: Interval, pool: JobSet) -> None:
        covered[iv] = pool
        if tree.kind(iv) == BOT:
            assign[iv] = pool
            return
        kind = tree.kind(iv)
        stay = pool
        k_left = 0
        k_right = 0
        trace: list[str] = []
        while True:
            bound = chain_bound(params, kind, iv.length, job_count(stay))
            if longest_chain(inst, stay) <= bound:
                break
            j = _select_pivot(inst, stay, bound / 2 - 1)
            t = sched.assign[j]
            assert t is not None and t in iv
            if t in iv.left:
                trace.append(LEFT)
                moved = (1 << j) | (inst.pred[j] & stay)
                k_left |= moved
            else:
                trace.append(RIGHT)
                moved = (1 << j) | (inst.succ[j] & stay)
                k_right |= moved
            stay &= ~moved
        assign[iv] = stay
        guesses[iv] = tuple(trace)
        walk(iv.left, k_left)
        walk(iv.right, k_right)

    walk(tree.root, inst.all_jobs)
    return full_system(params, assign), covered, guesses
