"""
Sweep Planning - Cartesian hyperparameter grids with the K <= M filter
"""

import itertools
import logging
from dataclasses import dataclass
from typing import Any, Dict, List, Mapping, Sequence, Tuple

from diffmath.errors import ConfigError

from .config import RunConfig

logger = logging.getLogger(__name__)

SHORT_NAMES = {
    "M": "loss.M",
    "K": "loss.K",
    "L": "loss.L",
    "eta": "loss.eta",
    "beta": "baseline.beta",
    "lr": "schedule.learning_rate",
}
AXIS_ORDER = ("M", "K", "L", "eta", "beta", "lr")


@dataclass(frozen=True)
class GridPoint:
    index: int
    values: Dict[str, Any]

    @property
    def overrides(self) -> Dict[str, Any]:
        return {SHORT_NAMES.get(axis, axis): value for axis, value in self.values.items()}


def _ordered_axes(grids: Mapping[str, Sequence[Any]]) -> List[str]:
    known = [axis for axis in AXIS_ORDER if axis in grids]
    return known + sorted(axis for axis in grids if axis not in AXIS_ORDER)


def plan_sweep(grids: Mapping[str, Sequence[Any]], base: RunConfig) -> Tuple[List[GridPoint], List[Dict[str, Any]]]:
    """
    Enumerate valid grid points

    Axes use short names (M, K, L, eta, beta, lr) or dotted config keys. Points
    with K > M, where either side may come from the base config, are skipped
    and logged.

    Returns:
        (points indexed 0..n-1 in enumeration order, skipped value dicts)
    """
    if not grids:
        raise ConfigError("Sweep grids are empty")
    for axis, values in grids.items():
        if not isinstance(values, (list, tuple)) or not values:
            raise ConfigError(f"Sweep axis '{axis}' needs a nonempty list of values")

    axes = _ordered_axes(grids)
    points: List[GridPoint] = []
    skipped: List[Dict[str, Any]] = []
    for combo in itertools.product(*(grids[axis] for axis in axes)):
        values = dict(zip(axes, combo))
        M = values.get("M", base.loss.M)
        K = values.get("K", M if "M" in values and base.raw["loss"].get("K") is None else base.loss.K)
        if K is not None and K > M:
            logger.warning(f"Skipping grid point {values}: K={K} exceeds M={M}")
            skipped.append(values)
            continue
        points.append(GridPoint(index=len(points), values=values))
    logger.info(f"Planned {len(points)} sweep runs ({len(skipped)} skipped)")
    return points, skipped
