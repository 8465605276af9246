from dataclasses import dataclass

import numpy as np

from equistream.core.attention.neighbors import NeighborIndex
from equistream.core.errors import PreconditionError, ShapeMismatchError
from equistream.core.so3.irreps import IrrepsFeature, IrrepsSpec
from equistream.core.so3.rotation import Rotation, rotate_feature


@dataclass(frozen=True)
class MessageProblem:
    """Inputs of ``m_i = sum_j alpha_ij (h_j (x) R_l(r_j - r_i))``.

    Attributes:
        positions (np.ndarray): ``(N, 3)``.
        features (IrrepsFeature): node features with batch shape ``(N,)``.
        idx (NeighborIndex): neighbor table, one row per atom.
        alpha (np.ndarray): ``(N, K)`` edge weights, zero on padding.
        l_out (int): requested output degree.
        softmax (bool): ``alpha`` came from a softmax; rows with neighbors then sum to one.
    """

    positions: np.ndarray
    features: IrrepsFeature
    idx: NeighborIndex
    alpha: np.ndarray
    l_out: int = 0
    softmax: bool = False

    def __post_init__(self):
        n = self.positions.shape[0]
        if self.positions.shape != (n, 3):
            raise ShapeMismatchError(f'positions must be (N, 3), got {self.positions.shape}')
        if self.features.batch_shape != (n,):
            raise ShapeMismatchError(f'features have batch {self.features.batch_shape}, expected ({n},)')
        if self.idx.n_targets != n or self.idx.num_sources != n:
            raise ShapeMismatchError(f'neighbor table covers {self.idx.n_targets} rows, expected {n}')
        if self.alpha.shape != self.idx.table.shape:
            raise ShapeMismatchError(f'alpha {self.alpha.shape} does not match the table {self.idx.table.shape}')
        if np.any(self.alpha[~self.idx.mask] != 0.0):
            raise PreconditionError('alpha must be zero on padding slots')
        if self.softmax:
            rows = self.idx.counts > 0
            sums = self.alpha.sum(axis=1)[rows]
            if np.any(np.abs(sums - 1.0) > 1e-10):
                raise PreconditionError(f'softmax weights do not sum to one, worst row sum {sums.min():.12g}')

    @property
    def n_atoms(self) -> int:
        return self.positions.shape[0]

    def translated(self, shift) -> 'MessageProblem':
        return MessageProblem(
            self.positions + np.asarray(shift, dtype=np.float64),
            self.features,
            self.idx,
            self.alpha,
            self.l_out,
            self.softmax,
        )

    def rotated(self, rotation: Rotation) -> 'MessageProblem':
        return MessageProblem(
            rotation.apply(self.positions),
            rotate_feature(self.features, rotation),
            self.idx,
            self.alpha,
            self.l_out,
            self.softmax,
        )


def random_problem(
    n_atoms: int, spec: IrrepsSpec, rng: np.random.Generator, l_out: int = 0, k: int = None, box: float = 3.0
) -> MessageProblem:
    """Atoms uniform in a cube of side ``box``, each connected to up to ``k`` random others with softmax weights."""
    k = n_atoms - 1 if k is None else k
    positions = rng.uniform(-box / 2, box / 2, size=(n_atoms, 3))
    table = np.full((n_atoms, max(k, 1)), -1, dtype=np.int64)
    for i in range(n_atoms):
        others = np.delete(np.arange(n_atoms), i)
        chosen = rng.permutation(others)[:k]
        table[i, : len(chosen)] = chosen
    safe = np.where(table >= 0, table, np.arange(n_atoms)[:, None])
    distances = np.linalg.norm(positions[safe] - positions[:, None, :], axis=-1)
    idx = NeighborIndex(table, np.where(table >= 0, distances, 0.0))
    logits = np.where(idx.mask, rng.standard_normal(table.shape), -np.inf)
    with np.errstate(invalid='ignore'):
        weights = np.exp(logits - logits.max(axis=1, keepdims=True))
        alpha = np.where(idx.mask, weights / weights.sum(axis=1, keepdims=True), 0.0)
    alpha = np.nan_to_num(alpha)
    return MessageProblem(positions, IrrepsFeature.random(spec, rng, (n_atoms,)), idx, alpha, l_out, softmax=True)
