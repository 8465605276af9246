from concurrent.futures import ThreadPoolExecutor

import numpy as np

from equistream.core.attention.aggregate import stream_aggregate
from equistream.core.attention.stats import AggregationStats
from equistream.core.bench.variant import AttentionWorkload, BaseVariant
from equistream.core.config.bench import PARALLEL_VARIANT


@BaseVariant.register(PARALLEL_VARIANT)
class StreamingParallelVariant(BaseVariant):
    """Streaming aggregation with target rows split into ``config.workers`` contiguous chunks run on threads.

    Chunks share the read-only key and value arrays; each keeps its own running state.
    """

    def predicted_peak_elems(self, n: int, k: int, heads: int, d_k: int, channels: int) -> int:
        return n * heads * (2 + channels) + n * heads * (d_k + channels)

    def prepare(self, workload: AttentionWorkload):
        super().prepare(workload)
        self.chunks = [c for c in np.array_split(np.arange(workload.n), self.config.workers) if len(c)]
        self.sub_indices = [workload.idx.rows(c) for c in self.chunks]

    def _chunk(self, i: int, stats: AggregationStats = None) -> np.ndarray:
        w = self.workload
        return stream_aggregate(w.q[self.chunks[i]], w.k, w.values, self.sub_indices[i], w.radial, w.tau, stats)

    def run(self, stats: AggregationStats = None) -> np.ndarray:
        if stats is None:
            with ThreadPoolExecutor(max_workers=self.config.workers) as ex:
                parts = list(ex.map(self._chunk, range(len(self.chunks))))
            return np.concatenate(parts, axis=0)
        parts, peak = [], 0
        for i, rows in enumerate(self.chunks):
            part_stats = AggregationStats()
            parts.append(self._chunk(i, part_stats))
            # all chunks are live at once in the threaded run
            peak += part_stats.peak_elems
            stats.add_madds(part_stats.madds, 'stream')
            stats.isolated.extend(int(rows[j]) for j in part_stats.isolated)
        stats.alloc(peak)
        stats.free(peak)
        return np.concatenate(parts, axis=0)
