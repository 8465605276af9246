from dataclasses import dataclass

import numpy as np

from equistream.core.errors import DegenerateDirectionError, PreconditionError
from equistream.core.so3.harmonics import solid_harmonics
from equistream.core.so3.rotation import Rotation, cross_matrix
from equistream.macros import gm

FLIP_X = np.diag([1.0, -1.0, -1.0])


@dataclass(frozen=True)
class AlignmentRotation:
    """``rotation @ r == |r| e_z`` for every item of ``r`` (shape ``(..., 3)``)."""

    r: np.ndarray
    rotation: Rotation
    azimuth: float = 0.0


def _rz(angle: float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def alignment_rotation(r, azimuth: float = 0.0, eps_r: float = None) -> AlignmentRotation:
    """Deterministic rotation taking ``r`` onto the positive z axis.

    Gauge: the minimal rotation ``I + [v]x + [v]x^2 / (1 + c)`` with ``v = r_hat x e_z`` and ``c = r_hat . e_z``.
    For ``c < 0`` a half turn about ``e_x`` is applied first so ``1 + c`` never falls below 1.
    ``r = (0, 0, s)`` with ``s > 0`` gives the identity, ``s < 0`` the half turn about ``e_x``.
    An optional ``azimuth`` rotates about ``e_z`` afterwards; it leaves ``R r`` unchanged.

    Raises:
        DegenerateDirectionError: some ``|r| <= eps_r`` (default ``gm.EPS_R``).
    """
    eps_r = gm.EPS_R if eps_r is None else eps_r
    r = np.asarray(r, dtype=np.float64)
    if r.shape[-1] != 3:
        raise PreconditionError(f'expected vectors of shape (..., 3), got {r.shape}')
    norm = np.linalg.norm(r, axis=-1, keepdims=True)
    if np.any(norm <= eps_r):
        raise DegenerateDirectionError(f'direction with norm {float(norm.min()):.3e} <= eps_r={eps_r:.1e}')
    u = r / norm
    south = u[..., 2] < 0.0
    u = np.where(south[..., None], u @ FLIP_X, u)
    v = np.stack([u[..., 1], -u[..., 0], np.zeros_like(u[..., 0])], axis=-1)
    k = cross_matrix(v)
    c = u[..., 2][..., None, None]
    mat = np.eye(3) + k + (k @ k) / (1.0 + c)
    mat = np.where(south[..., None, None], mat @ FLIP_X, mat)
    if azimuth:
        mat = _rz(azimuth) @ mat
    return AlignmentRotation(r=r, rotation=Rotation(mat), azimuth=azimuth)


def pole_residual(l: int, r, **kwargs) -> float:
    """Largest ``|m != 0|`` component of the solid harmonic of the aligned vectors."""
    aligned = alignment_rotation(r, **kwargs).rotation.apply(r)
    y = solid_harmonics(l, aligned)
    off = np.delete(y, l, axis=-1)
    return float(np.max(np.abs(off), initial=0.0))
