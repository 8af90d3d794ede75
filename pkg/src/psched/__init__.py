"""Scheduling of precedence-constrained unit jobs on identical machines.

Library layout:

- ``core``       instances, schedules, chains, validity checks
- ``transform``  horizon padding, discard re-insertion, makespan search
- ``baselines``  Graham list scheduling, capacity-constrained variant, exact oracle
- ``dyadic``     parameters, interval tree, job-to-interval systems, split procedures
- ``convert``    conversions between valid and virtually-valid schedules
- ``solver``     the recursive guessing solver and its hinted replay mode
- ``cli``        file formats, instance generators, command-line front end
"""

from .core import (
    DISC,
    Instance,
    Interval,
    Schedule,
    ValidityReport,
    build_instance,
    chain_depth,
    count_inversions,
    iter_jobs,
    job_count,
    longest_chain,
    mask_from,
    preds_and_succs,
    verify_valid,
)
from .dyadic import Params, PartialDyadicSystem, compute_params

__all__ = [
    "DISC",
    "Instance",
    "Interval",
    "Params",
    "PartialDyadicSystem",
    "Schedule",
    "ValidityReport",
    "build_instance",
    "chain_depth",
    "compute_params",
    "count_inversions",
    "iter_jobs",
    "job_count",
    "longest_chain",
    "mask_from",
    "preds_and_succs",
    "verify_valid",
]
