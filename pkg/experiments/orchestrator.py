"""
Sweep Orchestrator - Runs grid points and splits concurrently on worker threads
"""

import asyncio
import logging
import time
from typing import Any, Callable, Dict, List, Optional, Sequence, TypeVar

from diffmath.rng import derive_seed

from .config import RunConfig, thread_cap
from .pipeline import fit_split, prepare_split
from .run_store import RunStore
from .sweep import GridPoint

logger = logging.getLogger(__name__)

T = TypeVar("T")


async def run_in_threads(jobs: Sequence[Callable[[], T]], max_workers: int) -> List[T]:
    """Run blocking jobs on threads, at most max_workers at a time, results in job order"""
    semaphore = asyncio.Semaphore(max(int(max_workers), 1))

    async def guarded(job: Callable[[], T]) -> T:
        async with semaphore:
            return await asyncio.to_thread(job)

    return list(await asyncio.gather(*(guarded(job) for job in jobs)))


class SweepOrchestrator:
    """Trains one model per grid point and ranks them by validation metric"""

    def __init__(self, config: RunConfig, store: Optional[RunStore] = None, max_workers: Optional[int] = None):
        self.config = config
        self.metric = config.sweep.get("metric") or ("es" if config.method == "samplenet" else "nll")
        self.store = store or RunStore(self.metric)
        self.max_workers = max_workers or config.sweep.get("max_workers") or thread_cap()
        self.split_index = int(config.sweep.get("split_index") or 0)

    def _run_point(self, point: GridPoint) -> Dict[str, Any]:
        start = time.perf_counter()
        record: Dict[str, Any] = {"index": point.index, "values": point.values}
        try:
            run_config = self.config.with_overrides({**point.overrides, "schedule.validation_metric": self.metric})
            model_seed = derive_seed(self.config.seed, point.index)
            data = prepare_split(run_config, self.split_index)
            _, history = fit_split(run_config, data, model_seed)
            record.update(
                status="completed",
                value=history.best_value if history.best_step is not None else None,
                best_step=history.best_step,
                steps_run=history.steps_run,
                seed=model_seed,
                transport=history.transport.to_dict(),
            )
        except Exception as e:
            logger.error(f"Sweep run {point.index} {point.values} failed: {e}")
            record.update(status="failed", error=f"{type(e).__name__}: {e}", value=None)
        logger.debug(f"Sweep run {point.index} took {time.perf_counter() - start:.1f}s")
        return record

    async def run(self, points: Sequence[GridPoint]) -> List[Dict[str, Any]]:
        """Execute every grid point; individual failures never stop the sweep"""
        logger.info(f"Starting sweep of {len(points)} runs with {self.max_workers} worker(s)")

        async def execute(point: GridPoint):
            async with semaphore:
                record = await asyncio.to_thread(self._run_point, point)
            await self.store.store_run(record)

        semaphore = asyncio.Semaphore(self.max_workers)
        await asyncio.gather(*(execute(point) for point in points))
        best = self.store.best()
        if best is not None:
            logger.info(f"Best run {best['index']} {best['values']}: {self.metric} {best['value']:.6f}")
        return self.store.leaderboard()
