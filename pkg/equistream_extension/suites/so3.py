import numpy as np

from equistream.core.so3.clebsch_gordan import cg_real, triangle, valid_paths
from equistream.core.so3.harmonics import solid_harmonics
from equistream.core.so3.product import tensor_product_dense
from equistream.core.so3.rotation import Rotation, rotate_block, wigner_d_all
from equistream.core.verify.suite import BaseSuite
from equistream.macros import gm


@BaseSuite.register('so3')
class SO3Suite(BaseSuite):
    """Harmonics, Wigner-D and Clebsch-Gordan conventions against each other."""

    def properties(self):
        yield self.harmonic_transformation
        yield self.representation
        yield self.dense_equivariance
        yield self.realness
        yield self.cg_orthogonality
        yield self.homogeneity

    def harmonic_transformation(self):
        rng = self.rng(1)
        rotation = Rotation.random(rng, (self.config.rotations,))
        r = rng.standard_normal((self.config.rotations, 3))
        ds = wigner_d_all(gm.L_MAX, rotation)
        worst = 0.0
        for l in range(gm.L_MAX + 1):
            lhs = solid_harmonics(l, rotation.apply(r))
            rhs = np.einsum('...nm,...m->...n', ds[l], solid_harmonics(l, r))
            worst = max(worst, np.max(np.abs(lhs - rhs)))
        return self.check('harmonic_transformation', worst, self.tol.equivariance)

    def representation(self):
        rng = self.rng(2)
        r1 = Rotation.random(rng, (self.config.rotations,))
        r2 = Rotation.random(rng, (self.config.rotations,))
        d1, d2, d12 = wigner_d_all(gm.L_MAX, r1), wigner_d_all(gm.L_MAX, r2), wigner_d_all(gm.L_MAX, r1 @ r2)
        worst = max(np.max(np.abs(d12[l] - d1[l] @ d2[l])) for l in range(gm.L_MAX + 1))
        return self.check('representation', worst, self.tol.equivariance)

    def dense_equivariance(self):
        rng = self.rng(3)
        n, channels = 20, 3
        rotation = Rotation.random(rng, (n,))
        ds = wigner_d_all(gm.L_MAX, rotation)
        worst = 0.0
        for l1, l2, lo in valid_paths(gm.L_MAX):
            u = rng.standard_normal((n, channels, 2 * l1 + 1))
            v = rng.standard_normal((n, channels, 2 * l2 + 1))
            lhs = tensor_product_dense(rotate_block(u, ds[l1]), rotate_block(v, ds[l2]), lo)
            rhs = rotate_block(tensor_product_dense(u, v, lo), ds[lo])
            worst = max(worst, np.max(np.abs(lhs - rhs)))
        return self.check('dense_equivariance', worst, self.tol.equivariance)

    def realness(self):
        worst = max(cg_real(*path).imag_residue for path in valid_paths(gm.L_MAX))
        return self.check('realness', worst, self.tol.realness)

    def cg_orthogonality(self):
        """Stacked over every output degree, the tables of ``(l1, l2)`` have orthonormal columns."""
        worst = 0.0
        for l1 in range(gm.L_MAX + 1):
            for l2 in range(gm.L_MAX + 1):
                blocks = [
                    cg_real(l1, l2, lo).coeffs.reshape(-1, 2 * lo + 1)
                    for lo in range(gm.L_MAX + 1)
                    if triangle(l1, l2, lo)
                ]
                m = np.concatenate(blocks, axis=1)
                worst = max(worst, np.max(np.abs(m.T @ m - np.eye(m.shape[1]))))
        return self.check('cg_orthogonality', worst, self.tol.equivariance)

    def homogeneity(self):
        rng = self.rng(4)
        r = rng.standard_normal((100, 3))
        s = rng.uniform(0.25, 4.0, size=(100, 1))
        worst = 0.0
        for l in range(gm.L_MAX + 1):
            lhs = solid_harmonics(l, s * r)
            rhs = s**l * solid_harmonics(l, r)
            worst = max(worst, np.max(np.abs(lhs - rhs) / np.maximum(1.0, np.abs(rhs))))
        return self.check('homogeneity', worst, self.tol.homogeneity)
