from dataclasses import dataclass
from typing import List

import numpy as np

from equistream.core.errors import PreconditionError
from equistream.core.so3.clebsch_gordan import cg_real
from equistream.core.so3.irreps import IrrepsFeature, check_degree

# Cartesian (x, y, z) -> real l=1 components (y, z, -x).
L1_AXIS_MAP = np.array([[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [-1.0, 0.0, 0.0]])


@dataclass(frozen=True)
class Rotation:
    """Proper rotation matrix of shape ``(..., 3, 3)``, acting on column vectors."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=np.float64)
        if m.shape[-2:] != (3, 3):
            raise PreconditionError(f'rotation matrix must have shape (..., 3, 3), got {m.shape}')
        ortho = np.max(np.abs(np.swapaxes(m, -1, -2) @ m - np.eye(3)), initial=0.0)
        det = np.max(np.abs(np.linalg.det(m) - 1.0), initial=0.0)
        if ortho > 1e-12 or det > 1e-12:
            raise PreconditionError(f'not a proper rotation: |R^T R - I| = {ortho:.2e}, |det R - 1| = {det:.2e}')
        m = m.copy()
        m.setflags(write=False)
        object.__setattr__(self, 'matrix', m)

    @classmethod
    def identity(cls) -> 'Rotation':
        return cls(np.eye(3))

    @classmethod
    def from_axis_angle(cls, axis, angle: float) -> 'Rotation':
        axis = np.asarray(axis, dtype=np.float64)
        axis = axis / np.linalg.norm(axis)
        k = cross_matrix(axis)
        return cls(np.eye(3) + np.sin(angle) * k + (1.0 - np.cos(angle)) * (k @ k))

    @classmethod
    def random(cls, rng: np.random.Generator, batch=()) -> 'Rotation':
        """Haar-uniform rotations via QR of a Gaussian matrix with the sign of ``diag(R)`` fixed."""
        g = rng.standard_normal((*batch, 3, 3))
        q, r = np.linalg.qr(g)
        q = q * np.sign(np.diagonal(r, axis1=-2, axis2=-1))[..., None, :]
        # Reflections flip to rotations.
        det = np.linalg.det(q)
        q[..., :, 0] *= det[..., None]
        return cls(q)

    def inv(self) -> 'Rotation':
        return Rotation(np.swapaxes(self.matrix, -1, -2))

    def __matmul__(self, other: 'Rotation') -> 'Rotation':
        return Rotation(self.matrix @ other.matrix)

    def apply(self, v) -> np.ndarray:
        """Rotate points of shape ``(..., 3)``."""
        return np.einsum('...ij,...j->...i', self.matrix, np.asarray(v, dtype=np.float64))


def cross_matrix(v: np.ndarray) -> np.ndarray:
    """``[v]x`` for ``v`` of shape ``(..., 3)``."""
    out = np.zeros(v.shape[:-1] + (3, 3))
    out[..., 0, 1], out[..., 0, 2] = -v[..., 2], v[..., 1]
    out[..., 1, 0], out[..., 1, 2] = v[..., 2], -v[..., 0]
    out[..., 2, 0], out[..., 2, 1] = -v[..., 1], v[..., 0]
    return out


@dataclass(frozen=True)
class WignerD:
    degree: int
    matrix: np.ndarray


def wigner_d_all(lmax: int, rotation: Rotation) -> List[np.ndarray]:
    """Real-basis Wigner-D matrices for degrees 0..lmax, shape ``(..., 2l+1, 2l+1)`` each.

    Degree ``l`` is built from ``l - 1`` and ``1`` through the stretched coupling ``(l-1, 1 -> l)``,
    whose table is an isometry onto the degree-``l`` block. Exact identity rotations map to exact identities.
    """
    check_degree(lmax)
    r = rotation.matrix
    batch = r.shape[:-2]
    ds = [np.ones(batch + (1, 1))]
    if lmax == 0:
        return ds
    d1 = L1_AXIS_MAP @ r @ L1_AXIS_MAP.T
    ds.append(d1)
    for l in range(2, lmax + 1):
        p = cg_real(l - 1, 1, l).coeffs
        ds.append(np.einsum('ija,...ik,...jn,knb->...ab', p, ds[-1], d1, p, optimize=True))
    identity = np.all(r == np.eye(3), axis=(-2, -1))[..., None, None]
    if np.any(identity):
        ds = [np.where(identity, np.eye(2 * l + 1), d) for l, d in enumerate(ds)]
    return ds


def wigner_d(l: int, rotation: Rotation) -> WignerD:
    """``D`` such that ``solid_harmonics(l, R r) = D @ solid_harmonics(l, r)``."""
    return WignerD(degree=l, matrix=wigner_d_all(l, rotation)[l])


def rotate_block(block: np.ndarray, d: np.ndarray) -> np.ndarray:
    """Right-multiply the order axis of ``(..., C, 2l+1)`` by ``D^T``."""
    return np.einsum('...cm,...nm->...cn', block, d)


def rotate_feature(h: IrrepsFeature, rotation: Rotation) -> IrrepsFeature:
    """Rotate every block; ``rotation`` may carry the feature's batch shape or broadcast against it."""
    ds = wigner_d_all(h.spec.lmax, rotation)
    return h.map(lambda l, block: rotate_block(block, ds[l]))
