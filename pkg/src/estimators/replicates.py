"""
Independent replicates over derived seeds, folded in replicate order.
"""
from concurrent.futures import ProcessPoolExecutor
from typing import Any, Callable, List, Sequence, TypeVar

import numpy as np

from src.utils.logging import get_experiment_logger
from src.utils.rng import replicate_seeds

logger = get_experiment_logger("replicates")

T = TypeVar("T")


def run_tasks(
    fn: Callable[[Any, np.random.SeedSequence], T],
    tasks: Sequence[Any],
    root_seed: int,
    tag: str,
    jobs: int = 1,
) -> List[T]:
    """``fn(tasks[i], seed_i)`` for every i; results come back ordered by i.

    With jobs > 1, ``fn`` and the tasks must be picklable. The result list is the
    same for every value of jobs.
    """
    seeds = replicate_seeds(root_seed, tag, len(tasks))
    if jobs <= 1 or len(tasks) <= 1:
        return [fn(task, seed) for task, seed in zip(tasks, seeds)]
    logger.info("Running replicates in parallel", tag=tag, replicates=len(tasks), jobs=jobs)
    workers = min(jobs, len(tasks))
    # a shared payload is pickled once per chunk
    chunksize = max(1, len(tasks) // (4 * workers))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, tasks, seeds, chunksize=chunksize))


def run_replicates(
    fn: Callable[[Any, np.random.SeedSequence], T],
    payload: Any,
    root_seed: int,
    tag: str,
    count: int,
    jobs: int = 1,
) -> List[T]:
    """``count`` replicates of ``fn(payload, seed_i)``."""
    return run_tasks(fn, [payload] * count, root_seed, tag, jobs)
