"""Real solid and spherical harmonics in the orthonormal, m-ascending basis.

Components are evaluated as Cartesian polynomials, so ``r = 0`` needs no special case and
homogeneity ``R_l(s r) = s^l R_l(r)`` holds to rounding.

The real basis is the unitary transform of the Condon-Shortley complex harmonics::

    m > 0:  sqrt(2) Re Y_l^m
    m = 0:  Y_l^0
    m < 0:  sqrt(2) (-1)^m Im Y_l^|m|

For ``l = 1`` this gives ``sqrt(3 / 4pi) * (y, z, -x)``.
"""
import math
from functools import lru_cache
from typing import List

import numpy as np

from equistream.core.errors import PreconditionError
from equistream.core.so3.irreps import check_degree

Y00 = 0.5 / math.sqrt(math.pi)


@lru_cache(maxsize=None)
def _normalization(l: int, m: int) -> float:
    return math.sqrt((2 * l + 1) / (4 * math.pi) * math.factorial(l - m) / math.factorial(l + m))


def _legendre_polynomials(l: int, z: np.ndarray, r2: np.ndarray) -> List[np.ndarray]:
    """``Pi_l^m(z, r^2)`` for m = 0..l, the polar part with ``r^l P_l^m(cos t) = Pi_l^m * rho^m``."""
    pis = []
    for m in range(l + 1):
        # (2m - 1)!!
        p_mm = np.full_like(z, float(math.prod(range(1, 2 * m, 2))))
        if l == m:
            pis.append(p_mm)
            continue
        p_prev, p_curr = p_mm, (2 * m + 1) * z * p_mm
        for k in range(m + 2, l + 1):
            p_prev, p_curr = p_curr, ((2 * k - 1) * z * p_curr - (k + m - 1) * r2 * p_prev) / (k - m)
        pis.append(p_curr)
    return pis


def _azimuthal_polynomials(l: int, x: np.ndarray, y: np.ndarray):
    """Real and imaginary parts of ``(x + iy)^m`` for m = 0..l."""
    cos_m, sin_m = [np.ones_like(x)], [np.zeros_like(x)]
    for _ in range(l):
        c, s = cos_m[-1], sin_m[-1]
        cos_m.append(x * c - y * s)
        sin_m.append(x * s + y * c)
    return cos_m, sin_m


def solid_harmonics(l: int, r) -> np.ndarray:
    """Evaluate ``|r|^l Y_l(r / |r|)``.

    Args:
        l (int): degree, at most ``gm.L_MAX``.
        r (array_like): points of shape ``(..., 3)``.

    Returns:
        np.ndarray: shape ``(..., 2l+1)``, m ascending. At ``r = 0`` the value is zero for ``l >= 1``
        and ``Y00`` for ``l = 0``.
    """
    check_degree(l)
    r = np.asarray(r, dtype=np.float64)
    if r.shape[-1] != 3:
        raise PreconditionError(f'expected points of shape (..., 3), got {r.shape}')
    x, y, z = r[..., 0], r[..., 1], r[..., 2]
    r2 = x * x + y * y + z * z
    pis = _legendre_polynomials(l, z, r2)
    cos_m, sin_m = _azimuthal_polynomials(l, x, y)

    out = np.empty(r.shape[:-1] + (2 * l + 1,))
    out[..., l] = _normalization(l, 0) * pis[0]
    for m in range(1, l + 1):
        scale = math.sqrt(2.0) * _normalization(l, m)
        out[..., l + m] = (-1) ** m * scale * pis[m] * cos_m[m]
        out[..., l - m] = scale * pis[m] * sin_m[m]
    return out


def real_spherical_harmonics(l: int, u, atol: float = 1e-9) -> np.ndarray:
    """Evaluate ``Y_l`` on unit vectors ``u`` of shape ``(..., 3)``."""
    u = np.asarray(u, dtype=np.float64)
    norms = np.linalg.norm(u, axis=-1)
    if np.any(np.abs(norms - 1.0) > atol):
        raise PreconditionError(f'expected unit vectors, got norms in [{norms.min()}, {norms.max()}]')
    return solid_harmonics(l, u)


def solid_harmonics_all(lmax: int, r) -> List[np.ndarray]:
    return [solid_harmonics(l, r) for l in range(lmax + 1)]
