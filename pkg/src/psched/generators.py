"""Seeded instance generators for tests and benchmarks."""

from __future__ import annotations

import math
import random

from .core import Instance, build_instance
from .errors import BadParams

FAMILIES = ("chain", "antichain", "layered", "random-dag", "forest")


def gen_instance(
    family: str,
    n: int,
    m: int,
    density: float = 0.3,
    seed: int = 0,
) -> tuple[Instance, list[tuple[int, int]]]:
    """Deterministic instance of the given family; returns (instance, edges)."""
    if family not in FAMILIES:
        raise BadParams(f"unknown family {family!r}; pick one of {FAMILIES}")
    if n < 0 or m < 1:
        raise BadParams(f"need n >= 0 and m >= 1, got n={n}, m={m}")
    if not 0 <= density <= 1:
        raise BadParams(f"density must be in [0, 1], got {density}")
    rng = random.Random(seed)
    edges: list[tuple[int, int]] = []
    if family == "chain":
        edges = [(i, i + 1) for i in range(n - 1)]
    elif family == "antichain":
        edges = []
    elif family == "layered":
        layers = max(2, math.isqrt(n)) if n > 1 else 1
        of = [j * layers // n for j in range(n)]
        for u in range(n):
            for v in range(n):
                if of[u] < of[v] and rng.random() < density:
                    edges.append((u, v))
    elif family == "random-dag":
        order = list(range(n))
        rng.shuffle(order)
        for i in range(n):
            for k in range(i + 1, n):
                if rng.random() < density:
                    edges.append((order[i], order[k]))
    elif family == "forest":
        for j in range(1, n):
            if rng.random() < max(density, 0.5):
                edges.append((rng.randrange(j), j))
    return build_instance(n, m, edges), edges
