"""Command-line front end.

Subcommands: ``gen`` (instance generators), ``verify`` (schedule checking),
``graham`` (greedy baseline), ``oracle`` (exact optimum for small
instances), ``solve`` (the guessing solver; output may ignore precedence
among window-constrained jobs), ``pipeline`` (solve, make the schedule
valid, re-insert discarded jobs), and ``bench`` (CSV comparison rows).

Reports go to stdout, diagnostics to stderr.  Exit codes: 0 success,
1 failure or invalid input, 2 search budget exhausted.
"""

from __future__ import annotations

import argparse
import sys
import time
from dataclasses import dataclass
from fractions import Fraction

from . import io
from .baselines import EXACT_OPT_LIMIT, exact_opt, graham_list
from .convert import canonicalize, virtually_valid_to_valid
from .core import Instance, Schedule, Slot, iter_jobs, longest_chain, verify_valid
from .dyadic import OVERRIDE_KEYS, compute_params
from .errors import BudgetExceeded, NoSolution
from .generators import FAMILIES, gen_instance
from .solver import DEFAULT_BUDGET, Budget, main_solve, solve_hinted
from .transform import binary_search_makespan, insert_discarded, pad_to_power_of_two

BENCH_COLUMNS = (
    "instance", "family", "n", "m", "opt", "graham",
    "solver_discards", "final_makespan", "ratio", "wall_time_ms",
)


def _parse_overrides(pairs: list[str]) -> dict:
    out = {}
    for pair in pairs:
        key, _, value = pair.partition("=")
        if key not in OVERRIDE_KEYS or not value:
            raise ValueError(
                f"bad override {pair!r}; expected k=v with k in {OVERRIDE_KEYS}")
        out[key] = Fraction(value) if key in ("delta", "deltap") else int(value)
    return out


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


@dataclass
class SolveOutcome:
    horizon: int          # requested horizon (pre-padding)
    padded_T: int         # power-of-two horizon actually solved
    virtual: Schedule     # virtually-valid schedule, original jobs only
    valid: Schedule       # after conversions, original jobs only
    discards: int         # discarded original jobs in `valid`
    nodes: int


def _restrict(sched: Schedule, n: int) -> Schedule:
    return Schedule(T=sched.T, assign=sched.assign[:n])


def _solve_at_horizon(
    inst: Instance,
    horizon: int,
    eps: Fraction,
    overrides: dict,
    budget: Budget,
    hinted: bool,
    limit: int = EXACT_OPT_LIMIT,
) -> SolveOutcome | None:
    target = max(horizon, 2)
    padded, T2, _pads = pad_to_power_of_two(inst, target)
    params = compute_params(T2, inst.m, eps, overrides=overrides or None)
    if hinted:
        opt, best = exact_opt(inst, limit=limit)
        if opt > horizon:
            return None
        assign: list[Slot] = list(best.assign)
        slot = target
        for k, j in enumerate(iter_jobs(padded.all_jobs & ~inst.all_jobs)):
            if k % inst.m == 0:
                slot += 1
            assign.append(slot)
        reference = Schedule(T=T2, assign=tuple(assign))
        sys_out, virtual = solve_hinted(padded, reference, params, budget=budget)
    else:
        sys_out, virtual = main_solve(padded, params, budget=budget)
    canon = canonicalize(padded, sys_out, virtual, params)
    valid = virtually_valid_to_valid(padded, sys_out, canon, params)
    valid_orig = _restrict(valid, inst.n)
    return SolveOutcome(
        horizon=horizon,
        padded_T=T2,
        virtual=_restrict(virtual, inst.n),
        valid=valid_orig,
        discards=valid_orig.discard_count,
        nodes=budget.nodes,
    )


def _search_horizon(inst, eps, overrides, budget, hinted, limit=EXACT_OPT_LIMIT):
    """Minimal horizon whose converted schedule discards nothing."""
    outcomes: dict[int, SolveOutcome] = {}

    def attempt(T0: int) -> Schedule | None:
        got = _solve_at_horizon(inst, T0, eps, overrides, budget, hinted, limit)
        if got is None or got.discards:
            return None
        outcomes[T0] = got
        return got.valid

    T, _ = binary_search_makespan(inst, attempt)
    return outcomes[T]


def cmd_gen(args) -> int:
    inst, edges = gen_instance(args.family, args.n, args.m, args.density, args.seed)
    _emit(io.format_instance(inst, edges), args.out)
    return 0


def cmd_verify(args) -> int:
    inst = io.read_instance(args.instance)
    sched = io.read_schedule(args.schedule)
    report = verify_valid(inst, sched)
    print(report)
    return 0 if report.ok else 1


def cmd_graham(args) -> int:
    inst = io.read_instance(args.instance)
    sched = graham_list(inst)
    _emit(io.format_schedule(sched), args.out)
    chain = longest_chain(inst, inst.all_jobs)
    print(f"graham makespan {sched.makespan} (chain {chain}, jobs {inst.n}, m {inst.m})",
          file=sys.stderr)
    return 0


def cmd_oracle(args) -> int:
    inst = io.read_instance(args.instance)
    opt, sched = exact_opt(inst, limit=args.limit)
    _emit(io.format_schedule(sched), args.out)
    print(f"optimal makespan {opt}", file=sys.stderr)
    return 0


def _common_solve(args) -> SolveOutcome:
    inst = io.read_instance(args.instance)
    overrides = _parse_overrides(args.param_override)
    budget = Budget(limit=args.budget)
    eps = Fraction(args.epsilon)
    if args.horizon is not None:
        got = _solve_at_horizon(inst, args.horizon, eps, overrides, budget, args.hinted)
        if got is None:
            raise NoSolution(f"no zero-discard reference at horizon {args.horizon}")
        return got
    return _search_horizon(inst, eps, overrides, budget, args.hinted)


def cmd_solve(args) -> int:
    got = _common_solve(args)
    _emit(io.format_schedule(got.virtual), args.out)
    print(
        f"horizon {got.horizon} padded {got.padded_T}: "
        f"{got.virtual.scheduled_count} scheduled, "
        f"{got.virtual.discard_count} discarded, {got.nodes} nodes",
        file=sys.stderr,
    )
    return 0


def cmd_pipeline(args) -> int:
    inst = io.read_instance(args.instance)
    got = _common_solve(args)
    final = insert_discarded(inst, got.valid)
    _emit(io.format_schedule(final), args.out)
    report = verify_valid(inst, final)
    status = "valid" if report.ok else "INVALID"
    print(
        f"horizon {got.horizon} padded {got.padded_T}: solver discarded {got.discards}, "
        f"final makespan {final.makespan} ({status}, {final.discard_count} discarded)",
        file=sys.stderr,
    )
    return 0 if report.ok else 1


def cmd_bench(args) -> int:
    rows = []
    for i in range(args.count):
        seed = args.seed + i
        inst, edges = gen_instance(args.family, args.n, args.m, args.density, seed)
        name = f"{args.family}-n{args.n}-m{args.m}-s{seed}"
        start = time.perf_counter()
        opt, _ = exact_opt(inst)
        graham = graham_list(inst).makespan
        budget = Budget(limit=args.budget)
        got = _solve_at_horizon(
            inst, opt, Fraction(args.epsilon), _parse_overrides(args.param_override),
            budget, hinted=True,
        )
        final = insert_discarded(inst, got.valid)
        wall_ms = (time.perf_counter() - start) * 1000
        rows.append({
            "instance": name,
            "family": args.family,
            "n": inst.n,
            "m": inst.m,
            "opt": opt,
            "graham": graham,
            "solver_discards": got.discards,
            "final_makespan": final.makespan,
            "ratio": f"{final.makespan / opt:.3f}",
            "wall_time_ms": f"{wall_ms:.1f}",
        })
    rows.sort(key=lambda r: r["instance"])
    if args.format == "csv":
        lines = [",".join(BENCH_COLUMNS)]
        lines += [",".join(str(r[c]) for c in BENCH_COLUMNS) for r in rows]
        _emit("\n".join(lines) + "\n", args.out)
    else:
        widths = {c: max(len(c), *(len(str(r[c])) for r in rows)) for c in BENCH_COLUMNS}
        lines = ["  ".join(c.ljust(widths[c]) for c in BENCH_COLUMNS)]
        for r in rows:
            lines.append("  ".join(str(r[c]).ljust(widths[c]) for c in BENCH_COLUMNS))
        _emit("\n".join(lines) + "\n", args.out)
    return 0


def _add_solver_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--epsilon", default="1/2", help="accuracy parameter (fraction)")
    p.add_argument("--horizon", type=int, default=None,
                   help="target horizon; searched if omitted")
    p.add_argument("--param-override", action="append", default=[], metavar="K=V",
                   help=f"override a derived parameter; keys: {', '.join(OVERRIDE_KEYS)}")
    p.add_argument("--hinted", action="store_true",
                   help="replay splits recorded from the exact oracle's schedule")
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET,
                   help="search node budget (exit 2 when exhausted)")
    p.add_argument("--out", default=None, help="write the schedule here")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="psched",
        description="Scheduling of precedence-constrained unit jobs on identical machines.",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("gen", help="generate an instance file")
    p.add_argument("--family", choices=FAMILIES, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--density", type=float, default=0.3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_gen)

    p = subs.add_parser("verify", help="check a schedule against an instance")
    p.add_argument("instance")
    p.add_argument("schedule")
    p.set_defaults(func=cmd_verify)

    p = subs.add_parser("graham", help="greedy list schedule")
    p.add_argument("instance")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_graham)

    p = subs.add_parser("oracle", help="exact optimum (small instances)")
    p.add_argument("instance")
    p.add_argument("--limit", type=int, default=EXACT_OPT_LIMIT)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_oracle)

    p = subs.add_parser(
        "solve",
        help="run the guessing solver; output may place window-constrained "
             "jobs out of precedence order (see pipeline)",
    )
    p.add_argument("instance")
    _add_solver_flags(p)
    p.set_defaults(func=cmd_solve)

    p = subs.add_parser(
        "pipeline",
        help="solve, convert to a valid schedule, re-insert discarded jobs",
    )
    p.add_argument("instance")
    _add_solver_flags(p)
    p.set_defaults(func=cmd_pipeline)

    p = subs.add_parser("bench", help="compare baselines and solver over seeded instances")
    p.add_argument("--family", choices=FAMILIES, default="random-dag")
    p.add_argument("--count", type=int, default=10)
    p.add_argument("--n", type=int, default=8)
    p.add_argument("--m", type=int, default=2)
    p.add_argument("--density", type=float, default=0.3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--epsilon", default="1/2")
    p.add_argument("--param-override", action="append", default=[], metavar="K=V")
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    p.add_argument("--format", choices=("text", "csv"), default="csv",
                   help=f"csv columns, in order: {', '.join(BENCH_COLUMNS)}")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_bench)
    return parser


def run_command(argv: list[str]) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits 2 on usage errors; keep 2 for budget
        return 0 if exc.code in (0, None) else 1
    try:
        return args.func(args)
    except BudgetExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (NoSolution, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run_command(sys.argv[1:]))


if __name__ == "__main__":
    main()
