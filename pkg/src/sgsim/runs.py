"""Paired m0 = +-1/2 runs shared by the CLI, scripts and tests."""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor

from .approximations import APPROXIMATIONS
from .core import SPIN_DOWN, SPIN_UP, SimParams
from .evolution import DEFAULT_STRIDE, EvolutionRecord, run_exact
from .observables import RunPair


def suggest_n_basis(A: float, S: float, minimum: int = 40) -> int:
    """Rough level count covering the kicked, displaced packet plus 4-sigma tails."""
    p = S / 2 + 4
    z = A * S / 4 + 4
    need = 0.5 * (p * p + z * z)
    return max(minimum, 10 * math.ceil(need / 10))


def exact_records(params: SimParams, drift: bool | float = False,
                  snapshot_stride: int = DEFAULT_STRIDE) -> tuple[EvolutionRecord, EvolutionRecord]:
    with ThreadPoolExecutor(max_workers=2) as pool:
        futures = [pool.submit(run_exact, params, m0, drift, snapshot_stride) for m0 in (SPIN_UP, SPIN_DOWN)]
        return futures[0].result(), futures[1].result()


def exact_pair(params: SimParams, drift: bool | float = False) -> RunPair:
    plus, minus = exact_records(params, drift)
    return RunPair(plus.final_grid, minus.final_grid)


def approximation_pair(name: str, params: SimParams, t: float = 1.0) -> RunPair:
    fn = APPROXIMATIONS[name]
    return RunPair(fn(params, t, SPIN_UP), fn(params, t, SPIN_DOWN))
