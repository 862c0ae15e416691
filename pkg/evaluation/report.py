"""
Metrics Reports - Per-split records, mean/std aggregates and their JSON artifacts
"""

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Sequence, Tuple, Union

import numpy as np

from diffmath.errors import ArtifactError, ContractError

from .metrics import METRICS, MetricsRecord

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
RECORDS_FILE = "report.jsonl"
AGGREGATE_FILE = "aggregate.json"


@dataclass
class MetricsReport:
    records: List[MetricsRecord]
    aggregates: Dict[str, Tuple[float, float]]
    metadata: Dict[str, Any] = field(default_factory=dict)

    @property
    def n_splits(self) -> int:
        return len(self.records)

    def values(self, metric: str) -> List[float]:
        """Per-split values in split order, skipping missing ones"""
        return [record.value(metric) for record in self.records if record.value(metric) is not None]

    def mean(self, metric: str) -> float:
        return self.aggregates[metric][0]


def _mean_std(values: Sequence[float]) -> Tuple[float, float]:
    array = np.asarray(values, dtype=np.float64)
    std = float(array.std(ddof=1)) if array.size > 1 else 0.0
    return float(array.mean()), std


def aggregate(records: Sequence[MetricsRecord], metadata: Dict[str, Any] = None) -> MetricsReport:
    """Mean and sample std (0 for one record) per metric, records ordered by split"""
    if not records:
        raise ContractError("aggregate() needs at least one record")
    ordered = sorted(records, key=lambda record: record.split_index)
    aggregates = {}
    for metric in METRICS:
        values = [record.value(metric) for record in ordered if record.value(metric) is not None]
        if values:
            aggregates[metric] = _mean_std(values)
    return MetricsReport(records=ordered, aggregates=aggregates, metadata=dict(metadata or {}))


def _dumps(payload: Any) -> str:
    return json.dumps(payload, sort_keys=True)


def write_report(report: MetricsReport, directory: Union[str, Path]) -> Tuple[Path, Path]:
    """Write report.jsonl (one record per split) and aggregate.json"""
    directory = Path(directory)
    records_path, aggregate_path = directory / RECORDS_FILE, directory / AGGREGATE_FILE
    aggregate_block = {
        "schema_version": SCHEMA_VERSION,
        "n_splits": report.n_splits,
        "aggregates": {metric: {"mean": mean, "std": std} for metric, (mean, std) in report.aggregates.items()},
        "metadata": report.metadata,
    }
    try:
        directory.mkdir(parents=True, exist_ok=True)
        with records_path.open("w", encoding="utf-8") as handle:
            for record in report.records:
                handle.write(_dumps({"schema_version": SCHEMA_VERSION, **record.to_dict()}) + "\n")
        aggregate_path.write_text(json.dumps(aggregate_block, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    except OSError as e:
        raise ArtifactError(f"Cannot write report to {directory}: {e}") from e
    logger.info(f"Wrote {report.n_splits} split record(s) to {records_path}")
    return records_path, aggregate_path


def read_report(directory: Union[str, Path]) -> MetricsReport:
    """Reload a report; aggregates are recomputed from the records"""
    directory = Path(directory)
    records: List[MetricsRecord] = []
    try:
        lines = (directory / RECORDS_FILE).read_text(encoding="utf-8").splitlines()
        metadata = json.loads((directory / AGGREGATE_FILE).read_text(encoding="utf-8")).get("metadata", {})
        for line in lines:
            if not line.strip():
                continue
            payload = json.loads(line)
            version = payload.pop("schema_version", None)
            if version != SCHEMA_VERSION:
                raise ArtifactError(f"Unsupported report schema {version} in {directory}")
            records.append(MetricsRecord.from_dict(payload))
    except (OSError, ValueError, TypeError) as e:
        raise ArtifactError(f"Cannot read report from {directory}: {e}") from e
    return aggregate(records, metadata)
