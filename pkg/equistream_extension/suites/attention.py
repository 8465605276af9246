import numpy as np

from equistream.core.attention.aggregate import (
    attention_weights,
    dense_reference_aggregate,
    stream_aggregate,
)
from equistream.core.attention.fixture import random_fixture
from equistream.core.attention.neighbors import NeighborIndex
from equistream.core.attention.projection import QKProjection, project_qk
from equistream.core.attention.radial import RadialScalars, create_radial
from equistream.core.attention.stats import AggregationStats
from equistream.core.so3.irreps import IrrepsFeature, IrrepsSpec
from equistream.core.so3.rotation import Rotation, rotate_feature
from equistream.core.verify.suite import BaseSuite

SCORE_SHIFT = 1e4


@BaseSuite.register('attention')
class AttentionSuite(BaseSuite):
    """Single-pass online softmax against the materializing two-pass reference."""

    instances = 100

    def properties(self):
        yield self.oracle_equivalence
        yield self.shift_invariance
        yield self.padding_neutrality
        yield self.isolated_rows
        yield self.alpha_invariance

    def _fixture(self, i: int):
        rng = self.rng(1, i)
        n, k = int(rng.integers(1, 16)), int(rng.integers(1, 9))
        return random_fixture(n, k, heads=2, d=4, channels=3, seed=int(rng.integers(2**31)))

    def oracle_equivalence(self):
        radial = create_radial()
        worst = 0.0
        for i in range(self.instances):
            fx = self._fixture(i)
            a = stream_aggregate(fx.q, fx.k, fx.values, fx.idx, radial)
            b = dense_reference_aggregate(fx.q, fx.k, fx.values, fx.idx, radial)
            worst = max(worst, np.max(np.abs(a - b), initial=0.0))
        return self.check('oracle_equivalence', worst, self.tol.stream, detail=f'{self.instances} instances')

    def shift_invariance(self):
        """A constant ``+1e4`` on every score leaves the softmax, and so the output, unchanged."""
        base = create_radial()
        shifted = RadialScalars(bias=lambda r: base.bias(r) + SCORE_SHIFT, gate=base.gate)
        worst = 0.0
        for i in range(self.instances):
            fx = self._fixture(i)
            a = stream_aggregate(fx.q, fx.k, fx.values, fx.idx, shifted)
            b = stream_aggregate(fx.q, fx.k, fx.values, fx.idx, base)
            if not np.all(np.isfinite(a)):
                return self.check('shift_invariance', float('inf'), self.tol.shift, detail=f'non-finite at {i}')
            worst = max(worst, np.max(np.abs(a - b) / np.maximum(1.0, np.abs(b)), initial=0.0))
        return self.check('shift_invariance', worst, self.tol.shift)

    def padding_neutrality(self):
        """Extra sentinel columns: the reference is bit-identical, the stream moves by less than 1e-15."""
        radial = create_radial()
        worst_dense, worst_stream = 0.0, 0.0
        for i in range(self.instances):
            fx = self._fixture(i)
            padded = fx.idx.pad(3)
            a = dense_reference_aggregate(fx.q, fx.k, fx.values, fx.idx, radial)
            b = dense_reference_aggregate(fx.q, fx.k, fx.values, padded, radial)
            worst_dense = max(worst_dense, np.max(np.abs(a - b), initial=0.0))
            a = stream_aggregate(fx.q, fx.k, fx.values, fx.idx, radial)
            b = stream_aggregate(fx.q, fx.k, fx.values, padded, radial)
            worst_stream = max(worst_stream, np.max(np.abs(a - b), initial=0.0))
        detail = f'reference drift {worst_dense:.1e}'
        if worst_dense != 0.0:
            return self.check('padding_neutrality', worst_dense, 0.0, detail=detail)
        return self.check('padding_neutrality', worst_stream, 1e-15, detail=detail)

    def isolated_rows(self):
        """Rows without a valid neighbor get an exact zero message and are reported."""
        worst, missing = 0.0, 0
        for i in range(self.instances):
            fx = self._fixture(i)
            stats = AggregationStats()
            out = stream_aggregate(fx.q, fx.k, fx.values, fx.idx, stats=stats)
            empty = np.flatnonzero(fx.idx.counts == 0)
            worst = max(worst, np.max(np.abs(out[empty]), initial=0.0))
            missing += len(set(empty.tolist()) ^ set(stats.isolated))
        return self.check('isolated_rows', worst + missing, 0.0)

    def alpha_invariance(self):
        rng = self.rng(2)
        spec = IrrepsSpec.parse('4x0+2x1+2x2')
        proj = QKProjection.random(spec, rng, heads=2)
        n, k = 12, 5
        table = np.stack([rng.permutation(np.delete(np.arange(n), i))[:k] for i in range(n)])
        idx = NeighborIndex(table, rng.uniform(1.0, 5.0, size=table.shape))
        worst = 0.0
        for _ in range(self.config.rotations):
            h = IrrepsFeature.random(spec, rng, (n,))
            rotated = rotate_feature(h, Rotation.random(rng))
            alpha = attention_weights(*project_qk(h, proj), idx)
            alpha_rot = attention_weights(*project_qk(rotated, proj), idx)
            worst = max(worst, np.max(np.abs(alpha - alpha_rot)))
        return self.check('alpha_invariance', worst, self.tol.equivariance)
