import numpy as np

from equistream.core.attention.aggregate import dense_reference_aggregate, stream_aggregate
from equistream.core.attention.neighbors import NeighborIndex
from equistream.core.attention.stats import AggregationStats
from equistream.core.bench.report import fit_linear
from equistream.core.bench.runner import tp_madds_ratio, tp_paths
from equistream.core.verify.suite import BaseSuite

HEADS, D_K, CHANNELS = 4, 4, 4


@BaseSuite.register('accounting')
class AccountingSuite(BaseSuite):
    """Auxiliary memory and multiply-add counters of the instrumented kernels."""

    k_sweep = (8, 16, 32, 64)
    n_sweep = (128, 512, 2048, 8192)

    def properties(self):
        yield self.streaming_peak_independent_of_k
        yield self.streaming_peak_linear_in_n
        yield self.materializing_peak_linear_in_k
        yield self.tensor_product_madds_ratio

    def _peak(self, fn, n: int, k: int) -> int:
        rng = self.rng(1, n, k)
        q = rng.standard_normal((n, HEADS, D_K))
        kk = rng.standard_normal((n, HEADS, D_K))
        v = rng.standard_normal((n, HEADS, CHANNELS))
        idx = NeighborIndex(rng.integers(0, n, size=(n, k)))
        stats = AggregationStats()
        fn(q, kk, v, idx, stats=stats)
        return stats.peak_elems

    def streaming_peak_independent_of_k(self):
        n = 256
        peaks = [self._peak(stream_aggregate, n, k) for k in self.k_sweep]
        return self.check('streaming_peak_independent_of_k', max(peaks) - min(peaks), 0, detail=f'peaks {peaks}')

    def streaming_peak_linear_in_n(self):
        peaks = [self._peak(stream_aggregate, n, 64) for n in self.n_sweep]
        _, _, r2 = fit_linear(self.n_sweep, peaks)
        return self.check('streaming_peak_linear_in_n', r2, self.tol.r2, upper=False)

    def materializing_peak_linear_in_k(self):
        n = 256
        peaks = [self._peak(dense_reference_aggregate, n, k) for k in self.k_sweep]
        slope, _, r2 = fit_linear(self.k_sweep, peaks)
        detail = f'slope {slope:.1f} elements per slot'
        return self.check('materializing_peak_linear_in_k', r2 if slope > 0 else 0.0, self.tol.r2, False, detail)

    def tensor_product_madds_ratio(self):
        """Dense over sparse multiply-adds for every path with a non-scalar edge harmonic, at degree 2."""
        ratios = [tp_madds_ratio(li, lf, lo) for li, lf, lo in tp_paths(2) if lf >= 1]
        return self.check('tensor_product_madds_ratio', min(ratios), 3.0, upper=False)
