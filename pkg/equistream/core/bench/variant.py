from abc import ABC, abstractmethod
from dataclasses import dataclass

import numpy as np

from equistream.core.attention.neighbors import NeighborIndex
from equistream.core.attention.radial import RadialScalars
from equistream.core.attention.stats import AggregationStats
from equistream.core.config.bench import BenchCfg


@dataclass(frozen=True)
class AttentionWorkload:
    """Inputs shared by every aggregation variant at one sweep point."""

    q: np.ndarray
    k: np.ndarray
    values: np.ndarray
    idx: NeighborIndex
    radial: RadialScalars
    tau: float

    @property
    def n(self) -> int:
        return self.q.shape[0]

    @property
    def heads(self) -> int:
        return self.q.shape[1]

    @property
    def d_k(self) -> int:
        return self.q.shape[2]

    @property
    def channels(self) -> int:
        return self.values.shape[2]


class BaseVariant(ABC):
    """An aggregation strategy timed by the attention benchmark."""

    variants = {}

    def __init__(self, config: BenchCfg):
        self.config = config
        self.name = None
        self.workload = None

    @classmethod
    def register(cls, name: str):
        """
        Register a variant class with the given name(decorator).

        Args:
            name(str): name of the variant
        """

        def wrapper(variant_class):
            cls.variants[name] = variant_class
            return variant_class

        return wrapper

    @abstractmethod
    def predicted_peak_elems(self, n: int, k: int, heads: int, d_k: int, channels: int) -> int:
        """Auxiliary elements one forward call holds at its high-water mark."""
        raise NotImplementedError(f'`predicted_peak_elems` of {self.name} is not implemented')

    def skip_reason(self, n: int, k: int, heads: int, d_k: int, channels: int):
        """Why this size is reported as OOM instead of run, or None."""
        peak = self.predicted_peak_elems(n, k, heads, d_k, channels)
        if peak > self.config.max_elements:
            return f'predicted {peak} elements exceed the budget of {self.config.max_elements}'
        return None

    def prepare(self, workload: AttentionWorkload):
        """Called once per sweep point, outside the timed region."""
        self.workload = workload

    @abstractmethod
    def run(self, stats: AggregationStats = None) -> np.ndarray:
        """One forward aggregation of the prepared workload; returns ``(N, H, C)`` in double precision."""
        raise NotImplementedError(f'`run` function of {self.name} is not implemented')

    def measure(self) -> AggregationStats:
        """Counters of one instrumented forward call, taken outside the timed loop."""
        stats = AggregationStats()
        self.run(stats)
        return stats


def create_variant(name: str, config: BenchCfg) -> BaseVariant:
    if name not in BaseVariant.variants:
        raise KeyError(f"""The variant {name} is not registered, please register it using `@BaseVariant.register`""")
    variant = BaseVariant.variants[name](config)
    variant.name = name
    return variant
