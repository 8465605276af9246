import numpy as np
import torch

from equistream.core.attention.radial import slot_scalars
from equistream.core.attention.stats import AggregationStats
from equistream.core.bench.variant import AttentionWorkload, BaseVariant

TORCH_DTYPES = {np.dtype(np.float32): torch.float32, np.dtype(np.float64): torch.float64}


@BaseVariant.register('masked-dense')
class MaskedDenseVariant(BaseVariant):
    """
    Fused-attention baseline: a full ``N x N`` softmax per head with the neighbor pattern applied as a mask.

    The mask, bias and gate matrices are built once per ``N`` in ``prepare`` and reused by every timed call.
    Assumes each neighbor row lists a source at most once.
    """

    def predicted_peak_elems(self, n: int, k: int, heads: int, d_k: int, channels: int) -> int:
        # mask, bias and gate matrices, plus scores and probabilities of one head
        return 5 * n * n

    def skip_reason(self, n: int, k: int, heads: int, d_k: int, channels: int):
        if n > self.config.masked_dense_max_n:
            return f'N={n} is above the masked-dense cap of {self.config.masked_dense_max_n}'
        return super().skip_reason(n, k, heads, d_k, channels)

    def prepare(self, workload: AttentionWorkload):
        super().prepare(workload)
        n, idx = workload.n, workload.idx
        dtype = TORCH_DTYPES[workload.q.dtype]
        b, phi = slot_scalars(idx, workload.radial)
        rows, slots = np.nonzero(idx.mask)
        cols = torch.from_numpy(idx.table[rows, slots])
        b, phi = torch.from_numpy(b[rows, slots]), torch.from_numpy(phi[rows, slots])
        rows = torch.from_numpy(rows)
        self.mask = torch.zeros((n, n), dtype=torch.bool)
        self.mask[rows, cols] = True
        self.bias = torch.zeros((n, n), dtype=dtype)
        self.bias[rows, cols] = b.to(dtype)
        self.gate = torch.zeros((n, n), dtype=dtype)
        self.gate[rows, cols] = phi.to(dtype)
        self.q = torch.from_numpy(np.ascontiguousarray(workload.q))
        self.k = torch.from_numpy(np.ascontiguousarray(workload.k))
        self.values = torch.from_numpy(np.ascontiguousarray(workload.values))

    def run(self, stats: AggregationStats = None) -> np.ndarray:
        w = self.workload
        n = w.n
        if stats is not None:
            stats.alloc(3 * n * n)
        out = torch.empty((n, w.heads, w.channels), dtype=self.values.dtype)
        with torch.no_grad():
            for head in range(w.heads):
                if stats is not None:
                    stats.alloc(2 * n * n)
                scores = w.tau * (self.q[:, head] @ self.k[:, head].T) + self.bias
                scores = scores.masked_fill(~self.mask, float('-inf'))
                # rows without any neighbor are all -inf and softmax to NaN
                probs = torch.nan_to_num(torch.softmax(scores, dim=-1), nan=0.0)
                out[:, head] = (probs * self.gate) @ self.values[:, head]
                if stats is not None:
                    stats.free(2 * n * n)
                    stats.add_madds(n * n * (w.d_k + w.channels + 2), 'masked_dense')
        if stats is not None:
            stats.free(3 * n * n)
        return out.numpy().astype(np.float64)
