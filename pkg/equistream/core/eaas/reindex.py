from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, List, Optional, Tuple

import numpy as np

from equistream.core.errors import ConventionError
from equistream.core.so3.clebsch_gordan import (
    cg_real,
    complex_cg,
    triangle,
    valid_paths,
)
from equistream.core.so3.irreps import check_degree


@dataclass(frozen=True)
class ReindexEntry:
    m_out: int
    m_in: int
    coeff: float
    # Odd paths: -2(-1)^m_out times the complex coefficient at matching orders; even paths: that coefficient.
    printed: float
    correction: Optional[float]


@dataclass(frozen=True)
class ReindexRule:
    """Sparse aligned-frame coupling of one path: each output order reads at most one input order."""

    path: Tuple[int, int, int]
    parity: int
    entries: Tuple[ReindexEntry, ...]

    @property
    def src(self) -> np.ndarray:
        return np.array([e.m_in + self.path[0] for e in self.entries], dtype=np.int64)

    @property
    def dst(self) -> np.ndarray:
        return np.array([e.m_out + self.path[2] for e in self.entries], dtype=np.int64)

    @property
    def coeffs(self) -> np.ndarray:
        return np.array([e.coeff for e in self.entries])

    def entry(self, m_out: int) -> Optional[ReindexEntry]:
        for e in self.entries:
            if e.m_out == m_out:
                return e
        return None


def pole_column(li: int, lf: int, lo: int) -> np.ndarray:
    """``C[m_i, m_f = 0, m_o]`` as a ``(2li+1, 2lo+1)`` matrix."""
    return cg_real(li, lf, lo).coeffs[:, lf, :]


def survivors(li: int, lf: int, lo: int, tol: float = 1e-14) -> List[Tuple[int, int]]:
    """All ``(m_i, m_o)`` with a nonzero pole-column coefficient, by brute-force scan."""
    col = pole_column(li, lf, lo)
    mi, mo = np.nonzero(np.abs(col) > tol)
    return [(int(a) - li, int(b) - lo) for a, b in zip(mi, mo)]


@lru_cache(maxsize=None)
def _build(li: int, lf: int, lo: int, tol: float) -> ReindexRule:
    parity = (li + lf + lo) % 2
    col = pole_column(li, lf, lo)
    entries = []
    for m_out in range(-lo, lo + 1):
        m_in = m_out if parity == 0 else -m_out
        if abs(m_in) > li:
            continue
        coeff = float(col[m_in + li, m_out + lo])
        if abs(coeff) <= tol:
            continue
        reference = complex_cg(li, m_out, lf, 0, lo, m_out) if abs(m_out) <= li else 0.0
        printed = reference * (-2.0 * (-1) ** m_out if parity else 1.0)
        correction = coeff / printed if printed != 0.0 else None
        entries.append(ReindexEntry(m_out, m_in, coeff, printed, correction))
    kept = {(e.m_in, e.m_out) for e in entries}
    stray = [p for p in survivors(li, lf, lo, tol) if p not in kept]
    if stray:
        raise ConventionError(f'path {(li, lf, lo)} has pole coefficients off the parity pattern at {stray}')
    return ReindexRule(path=(li, lf, lo), parity=parity, entries=tuple(entries))


def build_reindex_rule(li: int, lf: int, lo: int, tol: float = 1e-14) -> ReindexRule:
    """Read the re-index rule of ``(li, lf -> lo)`` off the real CG table at ``m_f = 0``.

    Even ``li + lf + lo`` keeps ``m_i = m_o``, odd keeps ``m_i = -m_o``. The coefficient is the real-basis
    table entry itself, so applying the rule reproduces the dense product exactly. A triangle violation gives
    an empty rule.
    """
    for l in (li, lf, lo):
        check_degree(l)
    if not triangle(li, lf, lo):
        return ReindexRule(path=(li, lf, lo), parity=(li + lf + lo) % 2, entries=())
    return _build(li, lf, lo, tol)


def dump_reindex_rules(lmax: int) -> str:
    lines = ['# path parity m_out m_in coeff printed_factor correction']
    for path in valid_paths(lmax):
        rule = build_reindex_rule(*path)
        if not rule.entries:
            lines.append(f'{path[0]},{path[1]},{path[2]} {rule.parity} - - - - -')
        for e in rule.entries:
            correction = 'nan' if e.correction is None else f'{e.correction:.12g}'
            lines.append(
                f'{path[0]},{path[1]},{path[2]} {rule.parity} {e.m_out} {e.m_in} {e.coeff:.17g} '
                f'{e.printed:.17g} {correction}'
            )
    return '\n'.join(lines) + '\n'


def reindex_manifest(lmax: int) -> Dict:
    """Per-path entry counts and the spread of the correction ratio against the printed odd factor."""
    out = {'coefficient_source': 'real CG table at m_f = 0', 'printed_odd_factor': '-2(-1)^m_o'}
    for path in valid_paths(lmax):
        rule = build_reindex_rule(*path)
        ratios = [abs(e.correction) for e in rule.entries if e.correction is not None]
        out[f'{path[0]}_{path[1]}_{path[2]}'] = {
            'parity': rule.parity,
            'entries': len(rule.entries),
            'abs_correction_min': min(ratios) if ratios else 0.0,
            'abs_correction_max': max(ratios) if ratios else 0.0,
        }
    return out
