import numpy as np

from equistream.core.attention.aggregate import stream_aggregate
from equistream.core.attention.stats import AggregationStats
from equistream.core.bench.variant import BaseVariant


@BaseVariant.register('streaming')
class StreamingVariant(BaseVariant):
    def predicted_peak_elems(self, n: int, k: int, heads: int, d_k: int, channels: int) -> int:
        # running state plus one gathered slot; no term in k
        return n * heads * (2 + channels) + n * heads * (d_k + channels)

    def run(self, stats: AggregationStats = None) -> np.ndarray:
        w = self.workload
        return stream_aggregate(w.q, w.k, w.values, w.idx, w.radial, w.tau, stats)
