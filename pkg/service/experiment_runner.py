# service/experiment_runner.py
from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Iterable, List, TypeVar

J = TypeVar("J")
R = TypeVar("R")


class ExperimentRunner:
    """
    Runs independent experiment jobs (n, variant, run) sequentially or on a
    process pool. Results always come back in job order, so tables do not
    depend on the number of workers.
    """

    def __init__(self, workers: int = 1):
        if workers < 1:
            raise ValueError(f"workers must be >= 1, got {workers}")
        self.workers = workers
        self.log = logging.getLogger("FULL")
        self.imp = logging.getLogger("IMPORTANT")

    def map(self, fn: Callable[[J], R], jobs: Iterable[J]) -> List[R]:
        jobs = list(jobs)
        if not jobs:
            return []
        self.imp.info("[RUNNER] %d jobs on %d worker(s)", len(jobs), self.workers,
                      extra={"type": "runner", "evt": "start"})
        if self.workers == 1 or len(jobs) == 1:
            results = []
            for k, job in enumerate(jobs, 1):
                results.append(fn(job))
                self.log.debug("[RUNNER] job %d/%d done", k, len(jobs))
        else:
            with ProcessPoolExecutor(max_workers=min(self.workers, len(jobs))) as pool:
                results = list(pool.map(fn, jobs))
        self.imp.info("[RUNNER] %d jobs finished", len(results),
                      extra={"type": "runner", "evt": "done"})
        return results
