import numpy as np

from equistream.core.bench.system import build_neighbors, gen_fcc_system, neighbor_counts
from equistream.core.verify.suite import BaseSuite

LATTICE = 3.8
CUTOFF = 6.0


@BaseSuite.register('geometry')
class GeometrySuite(BaseSuite):
    """Synthetic FCC systems and the cell-list neighbor table."""

    def properties(self):
        yield self.fcc_neighbor_count
        yield self.unit_cell_spacing
        yield self.neighbor_table_matches_scan

    def fcc_neighbor_count(self):
        system = gen_fcc_system(2048, LATTICE, self.config.seed)
        mean = float(neighbor_counts(system.positions, CUTOFF).mean())
        return self.check('fcc_neighbor_count', abs(mean - 50.0), 10.0, detail=f'mean {mean:.2f}')

    def unit_cell_spacing(self):
        positions = gen_fcc_system(4, LATTICE, self.config.seed).positions
        d = np.linalg.norm(positions[:, None] - positions[None], axis=-1)[np.triu_indices(4, 1)]
        return self.check('unit_cell_spacing', np.max(np.abs(d - LATTICE / np.sqrt(2))), 1e-12)

    def neighbor_table_matches_scan(self):
        """Cell-list table against an all-pairs scan sorted by (distance, index)."""
        system = gen_fcc_system(256, LATTICE, self.config.seed)
        k = 64
        idx = build_neighbors(system, k, CUTOFF)
        p = system.positions
        d = np.linalg.norm(p[:, None] - p[None], axis=-1)
        mismatches = 0
        for i in range(len(p)):
            j = np.flatnonzero((d[i] < CUTOFF) & (np.arange(len(p)) != i))
            j = j[np.lexsort((j, d[i, j]))][:k]
            row = idx.table[i][idx.mask[i]]
            mismatches += int(len(row) != len(j) or np.any(row != j))
        return self.check('neighbor_table_matches_scan', mismatches, 0, detail=f'{len(p)} rows')
