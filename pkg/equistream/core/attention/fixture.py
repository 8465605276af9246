from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence

import numpy as np

from equistream.core.attention.neighbors import NeighborIndex
from equistream.core.errors import PreconditionError


@dataclass
class AttentionFixture:
    """Serializable aggregation instance; ``positions`` and ``alpha`` are present for message problems."""

    q: np.ndarray
    k: np.ndarray
    values: np.ndarray
    idx: NeighborIndex
    seed: int
    positions: Optional[np.ndarray] = None
    alpha: Optional[np.ndarray] = None
    extra: Dict[str, np.ndarray] = field(default_factory=dict)

    @property
    def shape(self):
        n, heads, d = self.q.shape
        return {'N': n, 'K': self.idx.k, 'H': heads, 'd': d, 'C': self.values.shape[-1]}


def save_fixture(path: str, fixture: AttentionFixture):
    """Write an ``.npz`` archive to ``path`` as given (no suffix is appended)."""
    arrays = {
        'q': fixture.q,
        'k': fixture.k,
        'values': fixture.values,
        'table': fixture.idx.table,
        'sentinel': np.array(fixture.idx.sentinel),
        'num_sources': np.array(fixture.idx.num_sources),
        'seed': np.array(fixture.seed),
    }
    if fixture.idx.distances is not None:
        arrays['distances'] = fixture.idx.distances
    if fixture.positions is not None:
        arrays['positions'] = fixture.positions
    if fixture.alpha is not None:
        arrays['alpha'] = fixture.alpha
    for key, value in fixture.extra.items():
        arrays[f'extra_{key}'] = value
    with open(path, 'wb') as f:
        np.savez(f, **arrays)


def load_fixture(path: str) -> AttentionFixture:
    with np.load(path) as data:
        missing = {'q', 'k', 'values', 'table', 'seed'} - set(data.files)
        if missing:
            raise PreconditionError(f'{path} is not an attention fixture, missing {sorted(missing)}')
        idx = NeighborIndex(
            table=data['table'],
            distances=data['distances'] if 'distances' in data.files else None,
            sentinel=int(data['sentinel']) if 'sentinel' in data.files else -1,
            num_sources=int(data['num_sources']) if 'num_sources' in data.files else None,
        )
        return AttentionFixture(
            q=data['q'],
            k=data['k'],
            values=data['values'],
            idx=idx,
            seed=int(data['seed']),
            positions=data['positions'] if 'positions' in data.files else None,
            alpha=data['alpha'] if 'alpha' in data.files else None,
            extra={key[len('extra_') :]: data[key] for key in data.files if key.startswith('extra_')},
        )


def random_fixture(
    n: int,
    k: int,
    heads: int,
    d: int,
    channels: int,
    seed: int,
    fill: Sequence[int] = None,
    r_cut: float = 6.0,
    dtype=np.float64,
) -> AttentionFixture:
    """Random instance with per-row valid counts drawn from ``fill`` (default ``{0, 1, K}`` plus uniform).

    Valid slots are scattered within each row; distances are uniform in ``(0.5, r_cut)``.
    """
    rng = np.random.default_rng(seed)
    if fill is None:
        fill = rng.integers(0, k + 1, size=n)
        fill[: min(n, 3)] = [0, 1, k][: min(n, 3)]
    fill = np.asarray(fill)
    table = np.full((n, k), -1, dtype=np.int64)
    distances = np.zeros((n, k))
    for i in range(n):
        slots = rng.permutation(k)[: fill[i]]
        table[i, slots] = rng.integers(0, n, size=len(slots))
        distances[i, slots] = rng.uniform(0.5, r_cut, size=len(slots))
    return AttentionFixture(
        q=rng.standard_normal((n, heads, d)).astype(dtype),
        k=rng.standard_normal((n, heads, d)).astype(dtype),
        values=rng.standard_normal((n, heads, channels)).astype(dtype),
        idx=NeighborIndex(table, distances),
        seed=seed,
    )
