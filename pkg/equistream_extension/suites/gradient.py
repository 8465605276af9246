import numpy as np

from equistream.core.attention.aggregate import (
    dense_reference_aggregate,
    stream_aggregate_backward,
)
from equistream.core.attention.fixture import random_fixture
from equistream.core.attention.radial import create_radial
from equistream.core.verify.suite import BaseSuite

STEP = 1e-6


def finite_difference(loss, x: np.ndarray) -> np.ndarray:
    """Central differences of scalar ``loss()`` with respect to every entry of ``x`` (modified in place)."""
    grad = np.zeros_like(x)
    flat, gflat = x.reshape(-1), grad.reshape(-1)
    for i in range(flat.size):
        keep = flat[i]
        flat[i] = keep + STEP
        plus = loss()
        flat[i] = keep - STEP
        minus = loss()
        flat[i] = keep
        gflat[i] = (plus - minus) / (2 * STEP)
    return grad


@BaseSuite.register('gradient')
class GradientSuite(BaseSuite):
    instances = 5

    def properties(self):
        yield self.backward_matches_finite_differences

    def backward_matches_finite_differences(self):
        radial = create_radial()
        worst = 0.0
        for i in range(self.instances):
            rng = self.rng(1, i)
            fx = random_fixture(8, 4, heads=1, d=3, channels=6, seed=int(rng.integers(2**31)))
            q, k, v = (np.array(a[:, 0, :], dtype=np.float64) for a in (fx.q, fx.k, fx.values))
            g = rng.standard_normal(v.shape)

            def loss():
                return float(np.sum(g * dense_reference_aggregate(q, k, v, fx.idx, radial)))

            analytic = stream_aggregate_backward(g, q, k, v, fx.idx, radial)
            for x, grad in zip((q, k, v), analytic):
                numeric = finite_difference(loss, x)
                scale = max(np.linalg.norm(numeric), 1e-8)
                worst = max(worst, np.linalg.norm(grad - numeric) / scale)
        return self.check('backward_matches_finite_differences', worst, self.tol.gradient)
