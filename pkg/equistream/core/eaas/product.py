import math

import numpy as np

from equistream.core.config import EAASCfg
from equistream.core.eaas.alignment import alignment_rotation
from equistream.core.eaas.reindex import ReindexRule, build_reindex_rule
from equistream.core.errors import SelectionRuleError, ShapeMismatchError
from equistream.core.so3.clebsch_gordan import triangle
from equistream.core.so3.harmonics import solid_harmonics
from equistream.core.so3.product import degree_of, float_dtype, tensor_product_dense
from equistream.core.so3.rotation import wigner_d_all
from equistream.core.util import log
from equistream.core.util.stats import OpStats
from equistream.macros import gm


def r_mag_factor(r, lf: int) -> np.ndarray:
    """``|r|^lf * Y_{lf,0}(e_z)``, the only nonzero component of the aligned edge harmonic."""
    norm = np.linalg.norm(np.asarray(r, dtype=np.float64), axis=-1)
    return norm**lf * math.sqrt((2 * lf + 1) / (4.0 * math.pi))


def apply_reindex(rule: ReindexRule, h_tilde, factor=1.0, stats: OpStats = None) -> np.ndarray:
    """Sparse coupling in the aligned frame: ``out[m_o] = coeff(m_o) * h_tilde[m_i(m_o)] * factor``.

    Args:
        rule (ReindexRule): path rule.
        h_tilde: aligned block ``(..., C, 2li+1)``.
        factor: scalar or array broadcasting against the batch axes of ``h_tilde``.
    """
    li, _, lo = rule.path
    h_tilde = np.asarray(h_tilde)
    dtype = float_dtype(h_tilde)
    if degree_of(h_tilde) != li:
        raise ShapeMismatchError(f'block of degree {degree_of(h_tilde)} does not match rule {rule.path}')
    out = np.zeros(h_tilde.shape[:-1] + (2 * lo + 1,), dtype=dtype)
    if rule.entries:
        factor = np.asarray(factor, dtype=dtype)[..., None, None]
        out[..., rule.dst] = h_tilde[..., rule.src] * (rule.coeffs.astype(dtype, copy=False) * factor)
    if stats is not None:
        items = int(np.prod(h_tilde.shape[:-1], dtype=np.int64))
        stats.add_madds(len(rule.entries) * items, 'eaas_tp')
    return out


def eaas_madds(li: int, lf: int, lo: int, channels: int) -> int:
    return len(build_reindex_rule(li, lf, lo).entries) * channels


def eaas_tensor_product(h, r, lf: int, lo: int, cfg: EAASCfg = None, stats: OpStats = None) -> np.ndarray:
    """``h (x) R_lf(r) -> lo`` computed as align, sparse re-index, inverse-align.

    ``h`` has shape ``(..., C, 2li+1)`` and ``r`` shape ``(..., 3)`` with matching batch axes, each item
    using its own alignment. Items with ``|r| <= eps_r`` take the dense product instead.
    """
    cfg = cfg or EAASCfg()
    eps_r = gm.EPS_R if cfg.eps_r is None else cfg.eps_r
    h = np.asarray(h)
    dtype = float_dtype(h)
    h = h.astype(dtype, copy=False)
    r = np.asarray(r, dtype=np.float64)
    li = degree_of(h)
    if not triangle(li, lf, lo):
        raise SelectionRuleError(f'path {(li, lf, lo)} violates the triangle rule')
    if h.shape[:-2] != r.shape[:-1]:
        raise ShapeMismatchError(f'feature batch {h.shape[:-2]} does not match vector batch {r.shape[:-1]}')
    rule = build_reindex_rule(li, lf, lo, cfg.coeff_tol)

    norm = np.linalg.norm(r, axis=-1)
    degenerate = norm <= eps_r
    if r.ndim == 1 and degenerate:
        log.info(f'degenerate direction in path {(li, lf, lo)}, using the dense product')
        return tensor_product_dense(h, solid_harmonics(lf, r).astype(dtype), lo)
    if np.any(degenerate):
        log.info(f'{int(degenerate.sum())} degenerate direction(s) in path {(li, lf, lo)}, using the dense product')
        out = np.empty(h.shape[:-1] + (2 * lo + 1,), dtype=dtype)
        y = solid_harmonics(lf, r[degenerate]).astype(dtype)
        out[degenerate] = tensor_product_dense(h[degenerate], y[..., None, :], lo)
        keep = ~degenerate
        if np.any(keep):
            out[keep] = eaas_tensor_product(h[keep], r[keep], lf, lo, cfg, stats)
        return out

    align = alignment_rotation(r, azimuth=cfg.azimuth, eps_r=eps_r)
    ds = wigner_d_all(max(li, lo), align.rotation)
    d_in, d_out = ds[li].astype(dtype, copy=False), ds[lo].astype(dtype, copy=False)
    h_tilde = np.einsum('...cm,...nm->...cn', h, d_in)
    out_tilde = apply_reindex(rule, h_tilde, r_mag_factor(r, lf), stats)
    # Inverse alignment: right-multiply by D^T of the inverse, i.e. by D.
    return np.einsum('...cn,...nm->...cm', out_tilde, d_out)
