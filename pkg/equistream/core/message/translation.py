"""Translation of solid harmonics and the recoupling that moves the edge harmonic onto node positions.

Addition theorem in the orthonormal basis::

    R_l(a + b) = sum_u w(l, u) (R_u(a) (x) R_{l-u}(b))^l
    w(l, u) = sqrt(4 pi (2l+1) binom(2l, 2u) / ((2u+1) (2l-2u+1)))

With ``a = -r_i`` and ``b = r_j`` the edge coupling ``(h (x) R_l(r_j - r_i))^L`` expands into node-centric terms
``((h (x) R_{l-u}(r_j))^k (x) R_u(r_i))^L`` with weights

    W[u, k] = (-1)^u w(l, u) (-1)^(l_h + l + L) sqrt((2k+1)(2l+1)) {l_h, l-u, k; u, L, l}

Both weight sets are solved by least squares on random samples; the closed forms are kept as cross-checks.
"""
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, Iterable, Iterator, Tuple

import numpy as np

from equistream.core.config import FactorizationCfg
from equistream.core.errors import ConventionError, UnsupportedPathError
from equistream.core.so3.clebsch_gordan import triangle, wigner_6j
from equistream.core.so3.harmonics import solid_harmonics
from equistream.core.so3.irreps import check_degree
from equistream.core.so3.product import tensor_product_dense
from equistream.core.util import log
from equistream.macros import gm


def binomial_weight(l: int, u: int) -> float:
    return math.sqrt(
        4.0 * math.pi * (2 * l + 1) * math.comb(2 * l, 2 * u) / ((2 * u + 1) * (2 * l - 2 * u + 1))
    )


def recoupling_weight(l: int, l_in: int, l_out: int, u: int, k: int) -> float:
    phase = (-1) ** (u + l_in + l + l_out)
    return (
        phase
        * binomial_weight(l, u)
        * math.sqrt((2 * k + 1) * (2 * l + 1))
        * wigner_6j(l_in, l - u, k, u, l_out, l)
    )


@dataclass(frozen=True)
class TranslationCoefficients:
    """``R_l(a + b) = sum_u weights[u] (R_u(a) (x) R_{l-u}(b))^l``."""

    l: int
    weights: Dict[int, float]
    closed_form: Dict[int, float]
    residual: float

    @property
    def discrepancy(self) -> float:
        return max(abs(self.weights[u] - self.closed_form[u]) for u in self.weights)


@dataclass(frozen=True)
class RecouplingCoefficients:
    """``(h (x) R_l(r_j - r_i))^L = sum_{u,k} weights[(u, k)] ((h (x) R_{l-u}(r_j))^k (x) R_u(r_i))^L``."""

    l: int
    l_in: int
    l_out: int
    weights: Dict[Tuple[int, int], float]
    closed_form: Dict[Tuple[int, int], float]
    residual: float

    @property
    def discrepancy(self) -> float:
        return max((abs(self.weights[t] - self.closed_form[t]) for t in self.weights), default=0.0)


def _solve(columns, target, what: str, tol: float):
    a = np.stack([c.reshape(-1) for c in columns], axis=1)
    t = target.reshape(-1)
    solution, _, rank, _ = np.linalg.lstsq(a, t, rcond=None)
    if rank < a.shape[1]:
        raise ConventionError(f'{what}: least-squares system has rank {rank} < {a.shape[1]} unknowns')
    residual = float(np.linalg.norm(a @ solution - t) / max(np.linalg.norm(t), 1e-300))
    if residual > tol:
        raise ConventionError(f'{what}: reconstruction residual {residual:.3e} exceeds {tol:.1e}')
    return solution, residual


def _sample_count(unknowns: int, rows_per_sample: int, oversample: int) -> int:
    return max(2, math.ceil(oversample * unknowns / rows_per_sample) + 1)


def _pair_coupling(ya, yb, l):
    return tensor_product_dense(ya[:, None, :], yb[:, None, :], l)[:, 0, :]


@lru_cache(maxsize=None)
def _translation(l: int, paths: Tuple[int, ...], oversample: int, tol: float, seed: int):
    rng = np.random.default_rng((seed, l))
    n = _sample_count(len(paths), 2 * l + 1, oversample)
    a, b = rng.standard_normal((n, 3)), rng.standard_normal((n, 3))
    columns = [_pair_coupling(solid_harmonics(u, a), solid_harmonics(l - u, b), l) for u in paths]
    solution, residual = _solve(columns, solid_harmonics(l, a + b), f'translation l={l}', tol)
    return TranslationCoefficients(
        l=l,
        weights={u: float(w) for u, w in zip(paths, solution)},
        closed_form={u: binomial_weight(l, u) for u in paths},
        residual=residual,
    )


def translation_coefficients(l: int, paths: Iterable[int] = None, cfg: FactorizationCfg = None):
    """Weights of the addition theorem for degree ``l``, one per split ``u`` in ``paths`` (default ``0..l``).

    Raises:
        ConventionError: the solve is rank deficient or does not reconstruct ``R_l(a + b)``.
    """
    check_degree(l)
    cfg = cfg or FactorizationCfg()
    paths = tuple(range(l + 1)) if paths is None else tuple(sorted(set(paths)))
    if any(u < 0 or u > l for u in paths):
        raise UnsupportedPathError(f'splits {paths} are not all in [0, {l}]')
    return _translation(l, paths, cfg.oversample, cfg.solve_tol, cfg.seed)


def recoupling_terms(l: int, l_in: int, l_out: int):
    """``(u, k)`` pairs with both couplings triangle-valid."""
    terms = []
    for u in range(l + 1):
        for k in range(abs(l_in - (l - u)), l_in + (l - u) + 1):
            if triangle(k, u, l_out):
                terms.append((u, k))
    return terms


def intermediate_degree(l: int, l_in: int, l_out: int) -> int:
    """Highest degree ``k`` carried between the source and the target coupling of the path."""
    return max((k for _, k in recoupling_terms(l, l_in, l_out)), default=0)


def table_paths(lmax: int) -> Iterator[Tuple[int, int, int, bool]]:
    """``(l, l_in, l_out, supported)`` with every degree at most ``lmax``.

    ``supported`` is False when some intermediate degree of the path exceeds ``gm.L_MAX``.
    """
    check_degree(lmax)
    for l in range(lmax + 1):
        for l_in in range(lmax + 1):
            for l_out in range(abs(l_in - l), min(l_in + l, lmax) + 1):
                yield l, l_in, l_out, intermediate_degree(l, l_in, l_out) <= gm.L_MAX


@lru_cache(maxsize=None)
def _recoupling(l: int, l_in: int, l_out: int, oversample: int, tol: float, seed: int):
    terms = recoupling_terms(l, l_in, l_out)
    rng = np.random.default_rng((seed, l, l_in, l_out))
    n = _sample_count(len(terms), 2 * l_out + 1, oversample)
    h = rng.standard_normal((n, 1, 2 * l_in + 1))
    r_i, r_j = rng.standard_normal((n, 3)), rng.standard_normal((n, 3))
    target = tensor_product_dense(h, solid_harmonics(l, r_j - r_i)[:, None, :], l_out)
    columns = []
    for u, k in terms:
        inner = tensor_product_dense(h, solid_harmonics(l - u, r_j)[:, None, :], k)
        columns.append(tensor_product_dense(inner, solid_harmonics(u, r_i)[:, None, :], l_out))
    solution, residual = _solve(columns, target, f'recoupling {(l, l_in, l_out)}', tol)
    coeffs = RecouplingCoefficients(
        l=l,
        l_in=l_in,
        l_out=l_out,
        weights={t: float(w) for t, w in zip(terms, solution)},
        closed_form={(u, k): recoupling_weight(l, l_in, l_out, u, k) for u, k in terms},
        residual=residual,
    )
    if coeffs.discrepancy > 1e-8:
        log.warning(f'recoupling {(l, l_in, l_out)}: closed form differs from the solve by {coeffs.discrepancy:.3e}')
    return coeffs


def recoupling_coefficients(l: int, l_in: int, l_out: int, cfg: FactorizationCfg = None) -> RecouplingCoefficients:
    """Node-centric weights for the edge path ``(l_in, l -> l_out)``, cached per path.

    Raises:
        UnsupportedPathError: the edge path itself violates the triangle rule.
    """
    for degree in (l, l_in, l_out):
        check_degree(degree)
    if not triangle(l_in, l, l_out):
        raise UnsupportedPathError(f'no translation path for (l_in={l_in}, l={l} -> l_out={l_out})')
    cfg = cfg or FactorizationCfg()
    return _recoupling(l, l_in, l_out, cfg.oversample, cfg.solve_tol, cfg.seed)


def translation_manifest(lmax: int) -> Dict:
    """Weights and closed-form discrepancies for every degree up to ``lmax``; all path degrees stay within it."""
    check_degree(lmax)
    out = {'weights': 'least squares, closed forms as cross-check'}
    for l in range(lmax + 1):
        coeffs = translation_coefficients(l)
        out[f'l{l}'] = {
            'weights': [coeffs.weights[u] for u in range(l + 1)],
            'closed_form_discrepancy': coeffs.discrepancy,
            'residual': coeffs.residual,
            'recoupling_discrepancy': 0.0,
        }
    for l, l_in, l_out, supported in table_paths(lmax):
        if supported:
            entry = out[f'l{l}']
            entry['recoupling_discrepancy'] = max(
                entry['recoupling_discrepancy'], recoupling_coefficients(l, l_in, l_out).discrepancy
            )
    return out


def dump_translation_tables(lmax: int) -> str:
    lines = ['# l l_in l_out u k weight closed_form']
    for l, l_in, l_out, supported in table_paths(lmax):
        if not supported:
            lines.append(
                f'# {l} {l_in} {l_out} skipped: intermediate degree '
                f'{intermediate_degree(l, l_in, l_out)} exceeds {gm.L_MAX}'
            )
            continue
        coeffs = recoupling_coefficients(l, l_in, l_out)
        for (u, k), w in coeffs.weights.items():
            lines.append(f'{l} {l_in} {l_out} {u} {k} {w:.17g} {coeffs.closed_form[(u, k)]:.17g}')
    return '\n'.join(lines) + '\n'
