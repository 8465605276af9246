from dataclasses import dataclass
from typing import Optional

import numpy as np

from equistream.core.errors import PreconditionError, ShapeMismatchError
from equistream.macros import gm


@dataclass(frozen=True)
class NeighborIndex:
    """Padded neighbor table.

    Attributes:
        table (np.ndarray): ``(n_targets, K)`` source indices, ``sentinel`` marks an unused slot. Valid slots may
            sit anywhere in a row.
        distances (Optional[np.ndarray]): ``(n_targets, K)`` edge lengths with the same padding layout.
        sentinel (int): padding value.
        num_sources (Optional[int]): number of source atoms; defaults to the row count. A row subset of a
            table keeps the original source count.
    """

    table: np.ndarray
    distances: Optional[np.ndarray] = None
    sentinel: int = gm.SENTINEL
    num_sources: Optional[int] = None

    def __post_init__(self):
        table = np.asarray(self.table, dtype=np.int64)
        if table.ndim != 2:
            raise ShapeMismatchError(f'neighbor table must be 2-D, got shape {table.shape}')
        if self.num_sources is None:
            object.__setattr__(self, 'num_sources', table.shape[0])
        valid = table != self.sentinel
        if np.any(valid & ((table < 0) | (table >= self.num_sources))):
            raise PreconditionError(f'neighbor entries must lie in [0, {self.num_sources}) or equal the sentinel')
        table.setflags(write=False)
        object.__setattr__(self, 'table', table)
        if self.distances is not None:
            distances = np.asarray(self.distances, dtype=np.float64)
            if distances.shape != table.shape:
                raise ShapeMismatchError(f'distances {distances.shape} do not match table {table.shape}')
            distances.setflags(write=False)
            object.__setattr__(self, 'distances', distances)

    @property
    def n_targets(self) -> int:
        return self.table.shape[0]

    @property
    def k(self) -> int:
        return self.table.shape[1]

    @property
    def mask(self) -> np.ndarray:
        return self.table != self.sentinel

    @property
    def counts(self) -> np.ndarray:
        return self.mask.sum(axis=1)

    @property
    def num_edges(self) -> int:
        return int(self.mask.sum())

    def safe_table(self) -> np.ndarray:
        """Table with padding replaced by 0 so it can be used for gathers; mask the result."""
        return np.where(self.mask, self.table, 0)

    def pad(self, extra: int) -> 'NeighborIndex':
        """Append ``extra`` sentinel columns (distance 0)."""
        table = np.concatenate([self.table, np.full((self.n_targets, extra), self.sentinel)], axis=1)
        distances = None
        if self.distances is not None:
            distances = np.concatenate([self.distances, np.zeros((self.n_targets, extra))], axis=1)
        return NeighborIndex(table, distances, self.sentinel, self.num_sources)

    def permute_rows(self, rng: np.random.Generator) -> 'NeighborIndex':
        """Shuffle slot order independently in every row."""
        order = np.argsort(rng.random(self.table.shape), axis=1)
        table = np.take_along_axis(self.table, order, axis=1)
        distances = None if self.distances is None else np.take_along_axis(self.distances, order, axis=1)
        return NeighborIndex(table, distances, self.sentinel, self.num_sources)

    def rows(self, rows) -> 'NeighborIndex':
        rows = np.asarray(rows, dtype=np.int64)
        distances = None if self.distances is None else self.distances[rows]
        return NeighborIndex(self.table[rows], distances, self.sentinel, self.num_sources)
