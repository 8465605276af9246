from dataclasses import dataclass, field
from typing import List

from equistream.core.util.stats import OpStats


@dataclass
class AggregationStats(OpStats):
    """``OpStats`` plus the target rows that had no valid neighbor."""

    isolated: List[int] = field(default_factory=list)
