import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Tuple

import numpy as np

from equistream.core.errors import (
    ConventionError,
    PreconditionError,
    SelectionRuleError,
)
from equistream.core.so3.irreps import check_degree
from equistream.core.util import log


def triangle(l1: int, l2: int, l3: int) -> bool:
    return abs(l1 - l2) <= l3 <= l1 + l2


def _as_int(value, name: str) -> int:
    if isinstance(value, (int, np.integer)):
        return int(value)
    if float(value).is_integer():
        return int(value)
    raise PreconditionError(f'{name}={value} is not an integer; half-integer spins are not supported')


@lru_cache(maxsize=None)
def _complex_cg(j1: int, m1: int, j2: int, m2: int, J: int, M: int) -> float:
    if M != m1 + m2 or not triangle(j1, j2, J) or abs(M) > J:
        return 0.0
    f = math.factorial
    prefactor = Fraction(
        (2 * J + 1) * f(J + j1 - j2) * f(J - j1 + j2) * f(j1 + j2 - J),
        f(j1 + j2 + J + 1),
    ) * (f(J + M) * f(J - M) * f(j1 - m1) * f(j1 + m1) * f(j2 - m2) * f(j2 + m2))
    k_min = max(0, j2 - J - m1, j1 - J + m2)
    k_max = min(j1 + j2 - J, j1 - m1, j2 + m2)
    total = Fraction(0)
    for k in range(k_min, k_max + 1):
        denom = f(k) * f(j1 + j2 - J - k) * f(j1 - m1 - k) * f(j2 + m2 - k) * f(J - j2 + m1 + k) * f(J - j1 - m2 + k)
        total += Fraction((-1) ** k, denom)
    # Keep the sign outside the square root.
    sign = 1.0 if total >= 0 else -1.0
    return sign * math.sqrt(prefactor * total * total)


def complex_cg(j1, m1, j2, m2, J, M) -> float:
    """Condon-Shortley coefficient ``<j1 m1; j2 m2 | J M>`` (Racah sum, exact integer arithmetic).

    Returns 0 when ``M != m1 + m2`` or the triangle rule fails.
    """
    j1, m1, j2, m2, J, M = (
        _as_int(v, n) for v, n in zip((j1, m1, j2, m2, J, M), ('j1', 'm1', 'j2', 'm2', 'J', 'M'))
    )
    for j, m, name in ((j1, m1, 'm1'), (j2, m2, 'm2'), (J, M, 'M')):
        if j < 0 or abs(m) > j:
            raise PreconditionError(f'{name}={m} is outside [-{j}, {j}]')
    return _complex_cg(j1, m1, j2, m2, J, M)


@lru_cache(maxsize=None)
def complex_to_real(l: int) -> np.ndarray:
    """Unitary ``Q`` with ``real = Q @ complex``; rows are real orders, columns complex orders."""
    q = np.zeros((2 * l + 1, 2 * l + 1), dtype=np.complex128)
    s = 1.0 / math.sqrt(2.0)
    q[l, l] = 1.0
    for m in range(1, l + 1):
        q[l + m, l + m] = s
        q[l + m, l - m] = (-1) ** m * s
        q[l - m, l - m] = 1j * s
        q[l - m, l + m] = -1j * (-1) ** m * s
    q.setflags(write=False)
    return q


@dataclass(frozen=True)
class CGTable:
    """Real-basis coupling coefficients of one path, indexed ``coeffs[m1, m2, m_out]``.

    Normalization is unitary: the squares sum to 1 for each ``m_out`` and to ``2*l_out + 1`` per path.
    """

    path: Tuple[int, int, int]
    coeffs: np.ndarray
    imag_residue: float

    @property
    def normalization(self) -> float:
        return float(np.sum(self.coeffs**2))


def _complex_table(l1: int, l2: int, lout: int) -> np.ndarray:
    table = np.zeros((2 * lout + 1, 2 * l1 + 1, 2 * l2 + 1))
    for M in range(-lout, lout + 1):
        for m1 in range(-l1, l1 + 1):
            m2 = M - m1
            if abs(m2) <= l2:
                table[M + lout, m1 + l1, m2 + l2] = _complex_cg(l1, m1, l2, m2, lout, M)
    return table


@lru_cache(maxsize=None)
def _cg_real(l1: int, l2: int, lout: int, tol: float) -> CGTable:
    q1, q2, qo = complex_to_real(l1), complex_to_real(l2), complex_to_real(lout)
    raw = np.einsum('aM,Mij,bi,cj->bca', qo, _complex_table(l1, l2, lout), q1.conj(), q2.conj())
    # Without this phase the conjugated table is purely imaginary when l1 + l2 + lout is odd.
    raw = raw * (1j) ** (l1 + l2 - lout)
    residue = float(np.max(np.abs(raw.imag), initial=0.0))
    if residue > tol:
        raise ConventionError(f'real CG table {(l1, l2, lout)} keeps an imaginary residue {residue:.3e}')
    coeffs = np.ascontiguousarray(raw.real)
    coeffs[np.abs(coeffs) < 1e-15] = 0.0
    coeffs.setflags(write=False)
    return CGTable(path=(l1, l2, lout), coeffs=coeffs, imag_residue=residue)


def cg_real(l1: int, l2: int, lout: int, tol: float = 1e-12) -> CGTable:
    """Real-basis table for the path ``(l1, l2 -> lout)``, built once and cached read-only."""
    for l in (l1, l2, lout):
        check_degree(l)
    if not triangle(l1, l2, lout):
        raise SelectionRuleError(f'path {(l1, l2, lout)} violates the triangle rule')
    return _cg_real(l1, l2, lout, tol)


def valid_paths(lmax: int, lf_max: int = None, lo_max: int = None):
    """All triangle-valid ``(l_in, l_f, l_out)`` with every degree bounded as given."""
    lf_max = lmax if lf_max is None else lf_max
    lo_max = lmax if lo_max is None else lo_max
    for l1 in range(lmax + 1):
        for l2 in range(lf_max + 1):
            for lo in range(abs(l1 - l2), min(l1 + l2, lo_max) + 1):
                yield l1, l2, lo


def wigner_6j(j1, j2, j3, j4, j5, j6) -> float:
    """Racah closed form of ``{j1 j2 j3; j4 j5 j6}``; zero if any triad breaks the triangle rule."""
    js = [_as_int(v, f'j{i + 1}') for i, v in enumerate((j1, j2, j3, j4, j5, j6))]
    if min(js) < 0:
        raise PreconditionError(f'6j arguments must be non-negative, got {js}')
    return _wigner_6j(*js)


@lru_cache(maxsize=None)
def _wigner_6j(j1: int, j2: int, j3: int, j4: int, j5: int, j6: int) -> float:
    triads = ((j1, j2, j3), (j1, j5, j6), (j4, j2, j6), (j4, j5, j3))
    if not all(triangle(*t) for t in triads):
        return 0.0
    f = math.factorial

    def delta(a, b, c):
        return Fraction(f(a + b - c) * f(a - b + c) * f(-a + b + c), f(a + b + c + 1))

    prefactor = Fraction(1)
    for t in triads:
        prefactor *= delta(*t)
    sums = [sum(t) for t in triads]
    tops = (j1 + j2 + j4 + j5, j2 + j3 + j5 + j6, j3 + j1 + j6 + j4)
    total = Fraction(0)
    for t in range(max(sums), min(tops) + 1):
        denom = f(tops[0] - t) * f(tops[1] - t) * f(tops[2] - t)
        for a in sums:
            denom *= f(t - a)
        total += Fraction((-1) ** t * f(t + 1), denom)
    if total == 0:
        return 0.0
    sign = 1.0 if total > 0 else -1.0
    value = sign * math.sqrt(prefactor * total * total)
    log.debug(f'6j{(j1, j2, j3, j4, j5, j6)} = {value}')
    return value
