"""Invariant query/key projection and per-degree value mixing.

Each degree block ``(C_l, 2l+1)`` is mixed on its channel axis only, so every projected block still rotates
by ``D_l`` and the flat dot product of two projected features is rotation invariant.
"""
from dataclasses import dataclass
from typing import Dict, Tuple

import numpy as np

from equistream.core.errors import ShapeMismatchError
from equistream.core.so3.irreps import IrrepsFeature, IrrepsSpec


@dataclass(frozen=True)
class QKProjection:
    """Per-degree weight pairs, each of shape ``(H, D_l, C_l)``.

    ``d_k = sum_l 2 * D_l * (2l+1)``: the first copy of ``W1 h`` is flattened channel-major, the second copy
    ``W2 h`` is transposed (order-major) before flattening.
    """

    spec: IrrepsSpec
    wq1: Dict[int, np.ndarray]
    wq2: Dict[int, np.ndarray]
    wk1: Dict[int, np.ndarray]
    wk2: Dict[int, np.ndarray]

    def __post_init__(self):
        heads = None
        for name in ('wq1', 'wq2', 'wk1', 'wk2'):
            weights = getattr(self, name)
            if set(weights) != set(self.spec.degrees):
                raise ShapeMismatchError(f'{name} covers degrees {sorted(weights)}, expected {self.spec.degrees}')
            for l, w in weights.items():
                if w.ndim != 3 or w.shape[2] != self.spec.channels(l):
                    raise ShapeMismatchError(
                        f'{name}[{l}] has shape {w.shape}, expected (H, D, {self.spec.channels(l)})'
                    )
                if not np.all(np.isfinite(w)):
                    raise ShapeMismatchError(f'{name}[{l}] has non-finite weights')
                if heads is not None and w.shape[0] != heads:
                    raise ShapeMismatchError(f'{name}[{l}] has {w.shape[0]} heads, expected {heads}')
                heads = w.shape[0]
            if name != 'wq1':
                for l in self.spec.degrees:
                    if weights[l].shape != self.wq1[l].shape:
                        raise ShapeMismatchError(f'{name}[{l}] shape {weights[l].shape} != wq1 {self.wq1[l].shape}')

    @property
    def heads(self) -> int:
        return next(iter(self.wq1.values())).shape[0]

    @property
    def d_k(self) -> int:
        return sum(2 * w.shape[1] * (2 * l + 1) for l, w in self.wq1.items())

    @classmethod
    def random(cls, spec: IrrepsSpec, rng: np.random.Generator, heads: int = 1, width: int = None):
        """Gaussian weights scaled by ``1/sqrt(C_l)``; ``width`` is ``D_l`` (defaults to ``C_l``)."""

        def draw():
            return {
                l: rng.standard_normal((heads, width or c, c)) / np.sqrt(c)
                for l, c in spec.entries
            }

        return cls(spec, draw(), draw(), draw(), draw())

    @classmethod
    def identity(cls, spec: IrrepsSpec):
        eye = {l: np.eye(c)[None] for l, c in spec.entries}
        return cls(spec, eye, eye, eye, eye)


def _mix(w: np.ndarray, block: np.ndarray) -> np.ndarray:
    # (H, D, C) x (..., C, M) -> (..., H, D, M)
    return np.einsum('hdc,...cm->...hdm', w, block)


def _flatten_pair(w1, w2, block) -> Tuple[np.ndarray, np.ndarray]:
    first = _mix(w1, block)
    second = np.swapaxes(_mix(w2, block), -1, -2)
    shape = first.shape[:-2] + (-1,)
    return first.reshape(shape), second.reshape(shape)


def project_qk(h: IrrepsFeature, proj: QKProjection) -> Tuple[np.ndarray, np.ndarray]:
    """Queries and keys of shape ``(..., H, d_k)``, built per degree as ``W1 h || (W2 h)^T``."""
    if h.spec != proj.spec:
        raise ShapeMismatchError(f'feature spec {h.spec} does not match projection spec {proj.spec}')
    qs, ks = [], []
    for l, block in h.items():
        qs.extend(_flatten_pair(proj.wq1[l], proj.wq2[l], block))
        ks.extend(_flatten_pair(proj.wk1[l], proj.wk2[l], block))
    return np.concatenate(qs, axis=-1), np.concatenate(ks, axis=-1)


@dataclass(frozen=True)
class ValueProjection:
    """Per-degree value mixing ``W_H`` with weights ``(C_out_l, C_l)``."""

    spec: IrrepsSpec
    weights: Dict[int, np.ndarray]

    @property
    def out_spec(self) -> IrrepsSpec:
        return IrrepsSpec(entries=tuple((l, self.weights[l].shape[0]) for l in self.spec.degrees))

    @classmethod
    def random(cls, spec: IrrepsSpec, rng: np.random.Generator, width: int = None):
        return cls(spec, {l: rng.standard_normal((width or c, c)) / np.sqrt(c) for l, c in spec.entries})

    @classmethod
    def identity(cls, spec: IrrepsSpec):
        return cls(spec, {l: np.eye(c) for l, c in spec.entries})


def project_values(h: IrrepsFeature, proj: ValueProjection) -> IrrepsFeature:
    if h.spec != proj.spec:
        raise ShapeMismatchError(f'feature spec {h.spec} does not match value projection spec {proj.spec}')
    blocks = {l: np.einsum('dc,...cm->...dm', proj.weights[l], block) for l, block in h.items()}
    return IrrepsFeature(proj.out_spec, blocks)
