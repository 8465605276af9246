import numpy as np

from equistream.core.attention.aggregate import dense_reference_aggregate
from equistream.core.attention.stats import AggregationStats
from equistream.core.bench.variant import BaseVariant


@BaseVariant.register('edge-materializing')
class EdgeMaterializingVariant(BaseVariant):
    """Gathers every edge into ``(N, K, H, .)`` arrays before reducing, the traditional message-passing layout."""

    def predicted_peak_elems(self, n: int, k: int, heads: int, d_k: int, channels: int) -> int:
        return n * k * heads * (d_k + 2 + 2 * channels)

    def run(self, stats: AggregationStats = None) -> np.ndarray:
        w = self.workload
        return dense_reference_aggregate(w.q, w.k, w.values, w.idx, w.radial, w.tau, stats)
