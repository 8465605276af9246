import numpy as np

from equistream.core.attention.neighbors import NeighborIndex
from equistream.core.attention.projection import QKProjection, ValueProjection
from equistream.core.config import FactorizationCfg
from equistream.core.message.factorized import (
    attention_message,
    edge_centric_message,
    factorized_message,
)
from equistream.core.message.problem import random_problem
from equistream.core.so3.irreps import IrrepsFeature, IrrepsSpec
from equistream.core.so3.rotation import Rotation, rotate_block, rotate_feature, wigner_d_all
from equistream.core.util.stats import OpStats
from equistream.core.verify.suite import BaseSuite

CG_KINDS = ('dense_tp', 'eaas_tp')
SPEC = IrrepsSpec.uniform(2, 2)


def _residual(got, want) -> float:
    return max(float(np.max(np.abs(got[d] - want[d]))) for d in want)


def _scale(want) -> float:
    return max(float(np.max(np.abs(b), initial=0.0)) for b in want.values())


@BaseSuite.register('factorization')
class FactorizationSuite(BaseSuite):
    """Node-centric messages against the per-edge oracle."""

    systems = 50

    def properties(self):
        yield self.exactness
        yield self.exactness_after_translation
        yield self.equivariance
        yield self.attention_block_equivariance
        yield self.edge_independent_coupling_work

    def _problem(self, i: int):
        rng = self.rng(1, i)
        l = int(rng.integers(0, 3))
        l_out = int(rng.integers(0, l + 3))
        return random_problem(int(rng.integers(4, 33)), SPEC, rng, l_out=l_out), l

    def exactness(self):
        worst, scale = 0.0, 0.0
        for i in range(self.systems):
            prob, l = self._problem(i)
            want = edge_centric_message(prob, l)
            worst = max(worst, _residual(factorized_message(prob, l), want))
            scale = max(scale, _scale(want))
        detail = f'{self.systems} systems, largest message component {scale:.3g}'
        return self.check('exactness', worst, self.tol.factorization, detail=detail)

    def exactness_after_translation(self):
        worst = 0.0
        for i in range(self.systems):
            prob, l = self._problem(i)
            direction = self.rng(2, i).standard_normal(3)
            moved = prob.translated(100.0 * direction / np.linalg.norm(direction))
            got = factorized_message(moved, l, cfg=FactorizationCfg(recenter=True))
            worst = max(worst, _residual(got, edge_centric_message(prob, l)))
        return self.check('exactness_after_translation', worst, self.tol.factorization, detail='|t| = 100')

    def equivariance(self):
        worst = 0.0
        for i in range(min(self.systems, self.config.rotations)):
            prob, l = self._problem(i)
            rotation = Rotation.random(self.rng(3, i))
            d_out = wigner_d_all(prob.l_out, rotation)[prob.l_out]
            base = factorized_message(prob, l)
            turned = factorized_message(prob.rotated(rotation), l)
            expected = {d: rotate_block(block, d_out) for d, block in base.items()}
            worst = max(worst, _residual(turned, expected))
        return self.check('equivariance', worst, self.tol.composite_equivariance)

    def attention_block_equivariance(self):
        rng = self.rng(4)
        n, k, l, l_out = 6, 4, 1, 1
        positions = rng.uniform(-1.5, 1.5, size=(n, 3))
        table = np.stack([rng.permutation(np.delete(np.arange(n), i))[:k] for i in range(n)])
        distances = np.linalg.norm(positions[table] - positions[:, None, :], axis=-1)
        idx = NeighborIndex(table, distances)
        qk = QKProjection.random(SPEC, rng, heads=1)
        value = ValueProjection.random(SPEC, rng)
        h = IrrepsFeature.random(SPEC, rng, (n,))
        base = attention_message(h, positions, idx, qk, value, l, l_out)
        worst = 0.0
        for _ in range(self.config.rotations):
            rotation = Rotation.random(rng)
            d_out = wigner_d_all(l_out, rotation)[l_out]
            turned = attention_message(rotate_feature(h, rotation), rotation.apply(positions), idx, qk, value, l, l_out)
            expected = {d: rotate_block(block, d_out) for d, block in base.items()}
            worst = max(worst, _residual(turned, expected))
        return self.check('attention_block_equivariance', worst, self.tol.composite_equivariance)

    def edge_independent_coupling_work(self):
        """Coupling multiply-adds of the node-centric path do not change when edges are added."""
        rng = self.rng(5)
        counts = []
        for k in (2, 11):
            prob = random_problem(12, SPEC, np.random.default_rng(rng.integers(2**31)), l_out=1, k=k)
            stats = OpStats()
            factorized_message(prob, 1, stats=stats)
            counts.append(sum(stats.by_kind.get(kind, 0) for kind in CG_KINDS))
        return self.check('edge_independent_coupling_work', abs(counts[1] - counts[0]), 0, detail=f'{counts}')
