import itertools
from dataclasses import dataclass

import numpy as np

from equistream.core.attention.neighbors import NeighborIndex
from equistream.core.errors import PreconditionError
from equistream.macros import gm

FCC_BASIS = np.array([[0.0, 0.0, 0.0], [0.5, 0.5, 0.0], [0.5, 0.0, 0.5], [0.0, 0.5, 0.5]])


@dataclass(frozen=True)
class SyntheticSystem:
    positions: np.ndarray
    a: float
    seed: int
    cells: int

    @property
    def n_atoms(self) -> int:
        return self.positions.shape[0]


def gen_fcc_system(n: int, a: float = 3.8, seed: int = 0) -> SyntheticSystem:
    """Sample ``n`` distinct sites of the smallest cubic FCC supercell holding at least ``n`` sites.

    No periodic images are generated.
    """
    if n < 1:
        raise PreconditionError(f'atom count must be positive, got {n}')
    cells = 1
    while 4 * cells**3 < n:
        cells += 1
    grid = np.stack(np.meshgrid(*(np.arange(cells),) * 3, indexing='ij'), axis=-1).reshape(-1, 3)
    sites = (grid[:, None, :] + FCC_BASIS[None, :, :]).reshape(-1, 3) * a
    rng = np.random.default_rng(seed)
    chosen = np.sort(rng.choice(len(sites), size=n, replace=False))
    return SyntheticSystem(positions=sites[chosen], a=a, seed=seed, cells=cells)


def _candidate_pairs(positions: np.ndarray, r_cut: float):
    """Cell-list candidates: bins of edge ``r_cut``, pairs drawn from the 27 surrounding bins."""
    cells = np.floor((positions - positions.min(axis=0)) / r_cut).astype(np.int64)
    dims = cells.max(axis=0) + 1
    cell_id = np.ravel_multi_index(cells.T, dims)
    order = np.argsort(cell_id, kind='stable')
    counts = np.bincount(cell_id, minlength=int(np.prod(dims)))
    starts = np.cumsum(counts) - counts
    for offset in itertools.product((-1, 0, 1), repeat=3):
        shifted = cells + np.array(offset)
        inside = np.all((shifted >= 0) & (shifted < dims), axis=1)
        i_atoms = np.flatnonzero(inside)
        if len(i_atoms) == 0:
            continue
        neighbor_cell = np.ravel_multi_index(shifted[inside].T, dims)
        n_cand = counts[neighbor_cell]
        total = int(n_cand.sum())
        if total == 0:
            continue
        ii = np.repeat(i_atoms, n_cand)
        within = np.arange(total) - np.repeat(np.cumsum(n_cand) - n_cand, n_cand)
        jj = order[np.repeat(starts[neighbor_cell], n_cand) + within]
        d = np.linalg.norm(positions[jj] - positions[ii], axis=1)
        keep = (d < r_cut) & (ii != jj)
        yield ii[keep], jj[keep], d[keep]


def build_neighbors(system, k: int, r_cut: float = 6.0) -> NeighborIndex:
    """Up to ``k`` nearest neighbors within ``r_cut`` per atom, ordered by distance then index.

    Args:
        system: a ``SyntheticSystem`` or an ``(N, 3)`` position array.
    """
    if k < 1:
        raise PreconditionError(f'neighbor slots must be positive, got {k}')
    positions = system.positions if isinstance(system, SyntheticSystem) else np.asarray(system, dtype=np.float64)
    n = positions.shape[0]
    table = np.full((n, k), gm.SENTINEL, dtype=np.int64)
    distances = np.zeros((n, k))
    parts = list(_candidate_pairs(positions, r_cut)) if n > 1 else []
    if parts:
        ii = np.concatenate([p[0] for p in parts])
        jj = np.concatenate([p[1] for p in parts])
        dd = np.concatenate([p[2] for p in parts])
        order = np.lexsort((jj, dd, ii))
        ii, jj, dd = ii[order], jj[order], dd[order]
        first = np.searchsorted(ii, np.arange(n))
        rank = np.arange(len(ii)) - first[ii]
        keep = rank < k
        table[ii[keep], rank[keep]] = jj[keep]
        distances[ii[keep], rank[keep]] = dd[keep]
    return NeighborIndex(table, distances)


def neighbor_counts(positions: np.ndarray, r_cut: float) -> np.ndarray:
    """Number of atoms within ``r_cut`` of each atom, without the slot limit."""
    counts = np.zeros(len(positions), dtype=np.int64)
    for ii, _, _ in _candidate_pairs(np.asarray(positions, dtype=np.float64), r_cut):
        counts += np.bincount(ii, minlength=len(positions))
    return counts


def save_system(path: str, system: SyntheticSystem, idx: NeighborIndex = None):
    """Write positions (and a neighbor table when given) as an ``.npz`` archive at ``path``."""
    arrays = {
        'positions': system.positions,
        'a': np.array(system.a),
        'seed': np.array(system.seed),
        'cells': np.array(system.cells),
    }
    if idx is not None:
        arrays['table'] = idx.table
        arrays['distances'] = idx.distances
        arrays['sentinel'] = np.array(idx.sentinel)
    with open(path, 'wb') as f:
        np.savez(f, **arrays)
