import numpy as np

from equistream.core.eaas.alignment import alignment_rotation, pole_residual
from equistream.core.verify.suite import BaseSuite
from equistream.macros import gm


@BaseSuite.register('pole-sparsity')
class PoleSparsitySuite(BaseSuite):
    """After alignment only the ``m = 0`` component of a solid harmonic survives."""

    def properties(self):
        yield self.random_directions
        yield self.near_poles
        yield self.aligned_onto_z

    def random_directions(self):
        rng = self.rng(1)
        r = rng.standard_normal((1000, 3))
        worst = max(pole_residual(l, r) for l in range(gm.L_MAX + 1))
        return self.check('random_directions', worst, self.tol.pole)

    def near_poles(self):
        rng = self.rng(2)
        tilts = np.array([0.0, 1e-12, 1e-9, 1e-6, 1e-3])
        r = []
        for sign in (1.0, -1.0):
            for tilt in tilts:
                noise = rng.standard_normal(2) * tilt
                r.append([noise[0], noise[1], sign])
        r = np.array(r)
        worst = max(pole_residual(l, r) for l in range(gm.L_MAX + 1))
        return self.check('near_poles', worst, self.tol.pole, detail=f'{len(r)} directions around +-e_z')

    def aligned_onto_z(self):
        rng = self.rng(3)
        r = rng.standard_normal((1000, 3)) * rng.uniform(0.1, 10.0, size=(1000, 1))
        aligned = alignment_rotation(r).rotation.apply(r)
        target = np.zeros_like(r)
        target[:, 2] = np.linalg.norm(r, axis=-1)
        worst = np.max(np.abs(aligned - target) / target[:, 2:])
        return self.check('aligned_onto_z', worst, self.tol.pole)
