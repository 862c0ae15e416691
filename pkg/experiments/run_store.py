"""
Run Store - Records of sweep runs and the leaderboard built from them
"""

import asyncio
import json
import logging
import math
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from diffmath.errors import ArtifactError

logger = logging.getLogger(__name__)


class RunStore:
    """
    Collects one record per grid point

    Records are stored under their grid index so the leaderboard does not
    depend on the order in which concurrent runs finish.
    """

    def __init__(self, metric: str):
        self.metric = metric
        self.records: Dict[int, Dict[str, Any]] = {}
        self._lock = asyncio.Lock()
        self.metrics = {"total_stored": 0, "completed": 0, "failed": 0}

    async def store_run(self, record: Dict[str, Any]) -> int:
        """
        Store the outcome of one grid point

        Args:
            record: Must carry 'index', 'status' and, when completed, 'value'

        Returns:
            The grid index of the stored record
        """
        index = int(record["index"])
        async with self._lock:
            self.records[index] = record
            self.metrics["total_stored"] += 1
            self.metrics["completed" if record["status"] == "completed" else "failed"] += 1
        logger.info(f"Stored run {index} ({record['status']})")
        return index

    def leaderboard(self) -> List[Dict[str, Any]]:
        """Completed runs by ascending validation value (ties by index), failed runs last"""

        def sort_key(record: Dict[str, Any]):
            value = record.get("value")
            failed = record["status"] != "completed" or value is None or not math.isfinite(value)
            return (failed, value if not failed else 0.0, record["index"])

        ranked = sorted(self.records.values(), key=sort_key)
        return [{"rank": rank, **record} for rank, record in enumerate(ranked, start=1)]

    def best(self) -> Optional[Dict[str, Any]]:
        board = self.leaderboard()
        if not board or board[0]["status"] != "completed":
            return None
        return board[0]

    def write_leaderboard(self, path: Union[str, Path], extra: Optional[Dict[str, Any]] = None) -> Path:
        path = Path(path)
        payload = {
            "metric": self.metric,
            "n_runs": len(self.records),
            "completed": self.metrics["completed"],
            "failed": self.metrics["failed"],
            "best": self.best(),
            "leaderboard": self.leaderboard(),
            **(extra or {}),
        }
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        except OSError as e:
            raise ArtifactError(f"Cannot write leaderboard {path}: {e}") from e
        logger.info(f"Wrote leaderboard with {len(self.records)} runs to {path}")
        return path
