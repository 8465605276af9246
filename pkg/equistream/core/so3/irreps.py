from typing import Dict, Iterator, List, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator

from equistream.core.errors import (
    PreconditionError,
    ShapeMismatchError,
    UnsupportedDegreeError,
)
from equistream.macros import gm


def check_degree(l: int):
    if l < 0 or l > gm.L_MAX:
        raise UnsupportedDegreeError(f'degree {l} is outside [0, {gm.L_MAX}]')


class IrrepsSpec(BaseModel):
    """
    Layout of a node feature as a direct sum of degree blocks.

    Attributes:
        entries (Tuple[Tuple[int, int], ...]): ``(degree, channels)`` pairs, degrees strictly increasing.

    Example Usage:
    ```python
    spec = IrrepsSpec.parse('8x0+4x1+2x2')
    spec.dim  # 8 + 12 + 10
    ```
    """

    model_config = ConfigDict(frozen=True)

    entries: Tuple[Tuple[int, int], ...]

    @field_validator('entries')
    @classmethod
    def _check_entries(cls, entries):
        last = -1
        for l, c in entries:
            check_degree(l)
            if l <= last:
                raise PreconditionError(f'degrees must be strictly increasing, got {[e[0] for e in entries]}')
            if c <= 0:
                raise PreconditionError(f'channel count of degree {l} must be positive, got {c}')
            last = l
        return entries

    @classmethod
    def parse(cls, text: str) -> 'IrrepsSpec':
        entries = []
        for part in text.replace(' ', '').split('+'):
            c, l = part.split('x')
            entries.append((int(l), int(c)))
        return cls(entries=tuple(entries))

    @classmethod
    def uniform(cls, lmax: int, channels: int) -> 'IrrepsSpec':
        return cls(entries=tuple((l, channels) for l in range(lmax + 1)))

    @property
    def degrees(self) -> List[int]:
        return [l for l, _ in self.entries]

    @property
    def lmax(self) -> int:
        return self.entries[-1][0]

    @property
    def dim(self) -> int:
        return sum(c * (2 * l + 1) for l, c in self.entries)

    def channels(self, l: int) -> int:
        for degree, c in self.entries:
            if degree == l:
                return c
        raise KeyError(f'degree {l} is not part of {self}')

    def __str__(self):
        return '+'.join(f'{c}x{l}' for l, c in self.entries)


class IrrepsFeature:
    """A feature laid out by an ``IrrepsSpec``.

    Each block has shape ``(*batch, C_l, 2l+1)``; all blocks share the same leading batch shape.
    Blocks are stored read-only; operations return new features.
    """

    def __init__(self, spec: IrrepsSpec, blocks: Dict[int, np.ndarray]):
        if set(blocks) != set(spec.degrees):
            raise ShapeMismatchError(f'blocks {sorted(blocks)} do not match degrees {spec.degrees}')
        batch = None
        checked = {}
        for l, c in spec.entries:
            block = np.asarray(blocks[l], dtype=np.float64)
            if block.ndim < 2 or block.shape[-2:] != (c, 2 * l + 1):
                raise ShapeMismatchError(
                    f'block of degree {l} has shape {block.shape}, expected (..., {c}, {2 * l + 1})'
                )
            if batch is None:
                batch = block.shape[:-2]
            elif block.shape[:-2] != batch:
                raise ShapeMismatchError(f'block of degree {l} has batch shape {block.shape[:-2]}, expected {batch}')
            if not np.all(np.isfinite(block)):
                raise PreconditionError(f'block of degree {l} has non-finite entries')
            block = block.copy()
            block.setflags(write=False)
            checked[l] = block
        self.spec = spec
        self.blocks = checked
        self.batch_shape = batch

    def __getitem__(self, l: int) -> np.ndarray:
        return self.blocks[l]

    def items(self) -> Iterator[Tuple[int, np.ndarray]]:
        for l in self.spec.degrees:
            yield l, self.blocks[l]

    def map(self, fn) -> 'IrrepsFeature':
        """Apply ``fn(l, block)`` to every block; the spec is kept."""
        return IrrepsFeature(self.spec, {l: fn(l, block) for l, block in self.items()})

    def flatten(self) -> np.ndarray:
        return np.concatenate([b.reshape(*self.batch_shape, -1) for _, b in self.items()], axis=-1)

    @classmethod
    def unflatten(cls, spec: IrrepsSpec, flat: np.ndarray) -> 'IrrepsFeature':
        flat = np.asarray(flat)
        if flat.shape[-1] != spec.dim:
            raise ShapeMismatchError(f'flat feature has width {flat.shape[-1]}, expected {spec.dim}')
        blocks, start = {}, 0
        for l, c in spec.entries:
            width = c * (2 * l + 1)
            blocks[l] = flat[..., start : start + width].reshape(*flat.shape[:-1], c, 2 * l + 1)
            start += width
        return cls(spec, blocks)

    @classmethod
    def zeros(cls, spec: IrrepsSpec, batch: Tuple[int, ...] = ()) -> 'IrrepsFeature':
        return cls(spec, {l: np.zeros((*batch, c, 2 * l + 1)) for l, c in spec.entries})

    @classmethod
    def random(cls, spec: IrrepsSpec, rng: np.random.Generator, batch: Tuple[int, ...] = ()) -> 'IrrepsFeature':
        return cls(spec, {l: rng.standard_normal((*batch, c, 2 * l + 1)) for l, c in spec.entries})

    def allclose(self, other: 'IrrepsFeature', atol: float) -> bool:
        return self.spec == other.spec and all(
            np.max(np.abs(self[l] - other[l]), initial=0.0) <= atol for l in self.spec.degrees
        )

    def __repr__(self):
        return f'IrrepsFeature({self.spec}, batch={self.batch_shape})'
