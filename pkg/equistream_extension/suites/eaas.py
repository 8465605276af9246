import numpy as np

from equistream.core.config import EAASCfg
from equistream.core.eaas.product import apply_reindex, eaas_tensor_product
from equistream.core.eaas.reindex import build_reindex_rule, survivors
from equistream.core.so3.clebsch_gordan import valid_paths
from equistream.core.so3.harmonics import solid_harmonics
from equistream.core.so3.product import tensor_product_dense
from equistream.core.so3.rotation import Rotation, rotate_block, wigner_d_all
from equistream.core.util.stats import OpStats
from equistream.core.verify.suite import BaseSuite
from equistream.macros import gm


@BaseSuite.register('eaas')
class EAASSuite(BaseSuite):
    """The axis-aligned sparse product against the dense Clebsch-Gordan product."""

    def properties(self):
        yield self.exactness
        yield self.worked_cases
        yield self.parity_rule
        yield self.equivariance
        yield self.gauge_independence
        yield self.sparsity

    def _draws_per_path(self, paths) -> int:
        return max(100, -(-self.config.draws // len(paths)))

    def exactness(self):
        rng = self.rng(1)
        paths = list(valid_paths(gm.L_MAX))
        n = self._draws_per_path(paths)
        worst = 0.0
        for li, lf, lo in paths:
            h = rng.standard_normal((n, 1, 2 * li + 1))
            r = rng.standard_normal((n, 3))
            dense = tensor_product_dense(h, solid_harmonics(lf, r)[:, None, :], lo)
            worst = max(worst, np.max(np.abs(eaas_tensor_product(h, r, lf, lo) - dense)))
        return self.check('exactness', worst, self.tol.eaas, detail=f'{len(paths)} paths x {n} draws')

    def worked_cases(self):
        """``(1,1,0)`` keeps only ``m_o = 0 <- m_i = 0``; ``(1,1,1)`` has nothing at ``m_o = 0``."""
        rule_110, rule_111 = build_reindex_rule(1, 1, 0), build_reindex_rule(1, 1, 1)
        ok_110 = len(rule_110.entries) == 1 and (rule_110.entries[0].m_out, rule_110.entries[0].m_in) == (0, 0)
        ok_111 = rule_111.entry(0) is None
        failures = int(not ok_110) + int(not ok_111)
        return self.check('worked_cases', failures, 0)

    def parity_rule(self):
        violations = 0
        for li, lf, lo in valid_paths(gm.L_MAX):
            sign = 1 if (li + lf + lo) % 2 == 0 else -1
            violations += sum(1 for m_i, m_o in survivors(li, lf, lo) if m_i != sign * m_o)
        return self.check('parity_rule', violations, 0)

    def equivariance(self):
        rng = self.rng(2)
        n, channels = self.config.rotations, 2
        rotation = Rotation.random(rng, (n,))
        ds = wigner_d_all(gm.L_MAX, rotation)
        worst = 0.0
        for li, lf, lo in valid_paths(gm.L_MAX):
            h = rng.standard_normal((n, channels, 2 * li + 1))
            r = rng.standard_normal((n, 3))
            lhs = eaas_tensor_product(rotate_block(h, ds[li]), rotation.apply(r), lf, lo)
            rhs = rotate_block(eaas_tensor_product(h, r, lf, lo), ds[lo])
            worst = max(worst, np.max(np.abs(lhs - rhs)))
        return self.check('equivariance', worst, self.tol.equivariance)

    def gauge_independence(self):
        rng = self.rng(3)
        twisted = EAASCfg(azimuth=float(rng.uniform(0.1, 2 * np.pi)))
        worst = 0.0
        for li, lf, lo in valid_paths(gm.L_MAX):
            h = rng.standard_normal((50, 2, 2 * li + 1))
            r = rng.standard_normal((50, 3))
            a = eaas_tensor_product(h, r, lf, lo)
            b = eaas_tensor_product(h, r, lf, lo, twisted)
            worst = max(worst, np.max(np.abs(a - b)))
        return self.check('gauge_independence', worst, self.tol.eaas)

    def sparsity(self):
        """Sparse multiply-adds never exceed ``(2 lo + 1) C`` per product; reported as the worst ratio to that bound."""
        rng = self.rng(4)
        n, channels = 8, 4
        worst = 0.0
        for li, lf, lo in valid_paths(gm.L_MAX):
            stats = OpStats()
            apply_reindex(build_reindex_rule(li, lf, lo), rng.standard_normal((n, channels, 2 * li + 1)), 1.0, stats)
            worst = max(worst, stats.madds / ((2 * lo + 1) * channels * n))
        return self.check('sparsity', worst, 1.0)
