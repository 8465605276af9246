"""Neighbor aggregation: single-pass online softmax and the materializing two-pass reference.

Shapes: ``q, k`` are ``(N, H, d)`` or ``(N, d)``; values ``(N, H, C)`` or ``(N, C)``; the neighbor table has one
row per target atom. Scores are ``s_ij = tau * q_i . k_j + b(r_ij)`` and each value is gated by ``phi(r_ij)``.
"""
import numpy as np

from equistream.core.attention.neighbors import NeighborIndex
from equistream.core.attention.radial import RadialScalars, slot_scalars
from equistream.core.attention.stats import AggregationStats
from equistream.core.errors import ShapeMismatchError
from equistream.core.util import log


def _with_heads(q, k, values, idx: NeighborIndex):
    q, k, values = np.asarray(q), np.asarray(k), np.asarray(values)
    squeeze = q.ndim == 2
    if squeeze:
        q, k, values = q[:, None, :], k[:, None, :], values[:, None, :]
    if q.ndim != 3 or k.shape[1:] != q.shape[1:] or values.shape[1] != q.shape[1]:
        raise ShapeMismatchError(f'incompatible shapes q={q.shape} k={k.shape} values={values.shape}')
    if q.shape[0] != idx.n_targets:
        raise ShapeMismatchError(f'{q.shape[0]} query rows for {idx.n_targets} neighbor rows')
    if k.shape[0] != idx.num_sources or values.shape[0] != idx.num_sources:
        raise ShapeMismatchError(f'{k.shape[0]} key rows / {values.shape[0]} value rows for {idx.num_sources} sources')
    return q, k, values, squeeze


def _tau(tau, d: int) -> float:
    return 1.0 / np.sqrt(d) if tau is None else tau


def _record_isolated(idx: NeighborIndex, stats: AggregationStats):
    isolated = np.flatnonzero(idx.counts == 0)
    if len(isolated):
        log.info(f'{len(isolated)} atom(s) without neighbors receive a zero message')
    if stats is not None:
        stats.isolated = [int(i) for i in isolated]


def _stream_pass(q, k, values, idx: NeighborIndex, b, phi, tau: float, stats: AggregationStats = None):
    """One pass over the slots keeping ``(mu, z, A)`` per target and head, in double precision."""
    n, heads, d = q.shape
    channels = values.shape[-1]
    mu = np.full((n, heads), -np.inf)
    z = np.zeros((n, heads))
    acc = np.zeros((n, heads, channels))
    state_elems = 2 * n * heads + n * heads * channels
    slot_elems = n * heads * (d + channels)
    if stats is not None:
        stats.alloc(state_elems)
    table, mask = idx.safe_table(), idx.mask
    for slot in range(idx.k):
        j, valid = table[:, slot], mask[:, slot]
        if not np.any(valid):
            continue
        if stats is not None:
            stats.alloc(slot_elems)
        s = tau * np.einsum('nhd,nhd->nh', q, k[j].astype(np.float64)) + b[:, slot, None]
        s = np.where(valid[:, None], s, -np.inf)
        mu_new = np.maximum(mu, s)
        with np.errstate(invalid='ignore'):
            scale = np.where(valid[:, None], np.exp(mu - mu_new), 1.0)
            p = np.where(valid[:, None], np.exp(s - mu_new), 0.0)
        gate = np.where(valid, phi[:, slot], 0.0)
        z = z * scale + p
        acc = acc * scale[..., None] + (p * gate[:, None])[..., None] * values[j].astype(np.float64)
        mu = mu_new
        if stats is not None:
            stats.free(slot_elems)
            stats.add_madds(int(valid.sum()) * heads * (d + 2 * channels), 'stream')
    if stats is not None:
        stats.free(state_elems)
    return mu, z, acc


def _normalize(z, acc):
    with np.errstate(invalid='ignore', divide='ignore'):
        return np.where(z[..., None] > 0, acc / z[..., None], 0.0)


def stream_aggregate(
    q, k, values, idx: NeighborIndex, radial: RadialScalars = None, tau: float = None, stats: AggregationStats = None
) -> np.ndarray:
    """Online-softmax aggregation ``m_i = sum_j softmax_j(s_ij) phi(r_ij) v_j`` in a single pass over slots.

    Auxiliary storage is the per-atom state ``(mu, z, A)`` plus one gathered slot at a time; it never grows
    with ``K``. Atoms without valid neighbors get a zero message and are listed in ``stats.isolated``.
    Inputs may be single precision; the state is always double.
    """
    q, k, values, squeeze = _with_heads(q, k, values, idx)
    b, phi = slot_scalars(idx, radial)
    _, z, acc = _stream_pass(q.astype(np.float64), k, values, idx, b, phi, _tau(tau, q.shape[-1]), stats)
    out = _normalize(z, acc)
    _record_isolated(idx, stats)
    return out[:, 0, :] if squeeze else out


def stream_aggregate_backward(
    grad_m, q, k, values, idx: NeighborIndex, radial: RadialScalars = None, tau: float = None
):
    """Gradients of ``sum <grad_m, m>`` with respect to ``q``, ``k`` and the values.

    The forward state is recomputed, then a second slot pass forms
    ``ds_ij = alpha_ij (<g_i, phi_ij v_j> - <g_i, m_i>)``; nothing of size ``n * K * C`` is allocated.

    Returns:
        tuple: ``(grad_q, grad_k, grad_values)`` shaped like the inputs.
    """
    q, k, values, squeeze = _with_heads(q, k, values, idx)
    grad_m = np.asarray(grad_m, dtype=np.float64)
    if squeeze:
        grad_m = grad_m[:, None, :]
    if grad_m.shape != (q.shape[0],) + values.shape[1:]:
        raise ShapeMismatchError(f'grad_m has shape {grad_m.shape}, expected {(q.shape[0],) + values.shape[1:]}')
    tau = _tau(tau, q.shape[-1])
    b, phi = slot_scalars(idx, radial)
    q = q.astype(np.float64)
    k = k.astype(np.float64)
    values = values.astype(np.float64)
    mu, z, acc = _stream_pass(q, k, values, idx, b, phi, tau)
    m = _normalize(z, acc)
    g_dot_m = np.einsum('nhc,nhc->nh', grad_m, m)

    grad_q = np.zeros_like(q)
    grad_k = np.zeros_like(k)
    grad_v = np.zeros_like(values)
    table, mask = idx.safe_table(), idx.mask
    for slot in range(idx.k):
        j, valid = table[:, slot], mask[:, slot]
        if not np.any(valid):
            continue
        rows = np.flatnonzero(valid)
        jv = j[rows]
        s = tau * np.einsum('nhd,nhd->nh', q[rows], k[jv]) + b[rows, slot, None]
        alpha = np.exp(s - mu[rows]) / z[rows]
        gate = phi[rows, slot][:, None]
        c = np.einsum('nhc,nhc->nh', grad_m[rows], gate[..., None] * values[jv])
        ds = alpha * (c - g_dot_m[rows])
        grad_q[rows] += tau * ds[..., None] * k[jv]
        np.add.at(grad_k, jv, tau * ds[..., None] * q[rows])
        np.add.at(grad_v, jv, (alpha * gate)[..., None] * grad_m[rows])
    if squeeze:
        return grad_q[:, 0, :], grad_k[:, 0, :], grad_v[:, 0, :]
    return grad_q, grad_k, grad_v


def _dense_weights(q, k, idx, b, tau, stats):
    """Materialized ``(n, K, H)`` softmax weights, two-pass with a per-row max."""
    n, heads, d = q.shape
    kk = idx.k
    table, mask = idx.safe_table(), idx.mask
    if stats is not None:
        stats.alloc(n * kk * heads * (d + 2))
    k_gathered = k[table].astype(np.float64)
    scores = tau * np.einsum('nhd,nkhd->nkh', q.astype(np.float64), k_gathered) + b[:, :, None]
    scores = np.where(mask[:, :, None], scores, -np.inf)
    row_max = np.max(scores, axis=1, initial=-np.inf)
    row_max = np.where(np.isfinite(row_max), row_max, 0.0)
    e = np.where(mask[:, :, None], np.exp(scores - row_max[:, None, :]), 0.0)
    # Sequential sum over slots: a padding column adds an exact zero.
    z = np.zeros((n, heads))
    for slot in range(kk):
        z = z + e[:, slot]
    with np.errstate(invalid='ignore', divide='ignore'):
        alpha = np.where(z[:, None, :] > 0, e / z[:, None, :], 0.0)
    if stats is not None:
        stats.add_madds(idx.num_edges * heads * (d + 2), 'dense_score')
    return alpha


def attention_weights(q, k, idx: NeighborIndex, radial: RadialScalars = None, tau: float = None) -> np.ndarray:
    """Explicit softmax weights ``alpha`` of shape ``(n, K, H)`` (``(n, K)`` without a head axis), zero on padding."""
    if np.asarray(q).ndim == 2:
        q, k = np.asarray(q)[:, None, :], np.asarray(k)[:, None, :]
        squeeze = True
    else:
        squeeze = False
    b, _ = slot_scalars(idx, radial)
    alpha = _dense_weights(np.asarray(q), np.asarray(k), idx, b, _tau(tau, q.shape[-1]), None)
    return alpha[..., 0] if squeeze else alpha


def dense_reference_aggregate(
    q, k, values, idx: NeighborIndex, radial: RadialScalars = None, tau: float = None, stats: AggregationStats = None
) -> np.ndarray:
    """Materializing oracle: gathers every edge into ``(n, K, H, .)`` arrays, then reduces over ``K``."""
    q, k, values, squeeze = _with_heads(q, k, values, idx)
    n, heads, d = q.shape
    channels = values.shape[-1]
    b, phi = slot_scalars(idx, radial)
    alpha = _dense_weights(q, k, idx, b, _tau(tau, d), stats)
    if stats is not None:
        stats.alloc(2 * n * idx.k * heads * channels)
    gathered = values[idx.safe_table()].astype(np.float64)
    weighted = (alpha * phi[:, :, None])[..., None] * gathered
    out = np.zeros((n, heads, channels))
    for slot in range(idx.k):
        out = out + weighted[:, slot]
    if stats is not None:
        stats.add_madds(idx.num_edges * heads * 2 * channels, 'dense_aggregate')
        stats.free(2 * n * idx.k * heads * channels + n * idx.k * heads * (d + 2))
    _record_isolated(idx, stats)
    return out[:, 0, :] if squeeze else out


def weighted_aggregate(values, alpha, idx: NeighborIndex, stats: AggregationStats = None) -> np.ndarray:
    """``m_i = sum_k alpha[i, k] * values[table[i, k]]`` with externally supplied weights.

    ``values`` may have any trailing shape; one slot is gathered at a time.
    """
    values = np.asarray(values, dtype=np.float64)
    alpha = np.asarray(alpha, dtype=np.float64)
    if alpha.shape != idx.table.shape:
        raise ShapeMismatchError(f'weights {alpha.shape} do not match neighbor table {idx.table.shape}')
    if values.shape[0] != idx.num_sources:
        raise ShapeMismatchError(f'{values.shape[0]} value rows for {idx.num_sources} sources')
    trailing = values.shape[1:]
    width = int(np.prod(trailing, dtype=np.int64))
    out = np.zeros((idx.n_targets,) + trailing)
    weights = np.where(idx.mask, alpha, 0.0)
    table = idx.safe_table()
    expand = (slice(None),) + (None,) * len(trailing)
    if stats is not None:
        stats.alloc(2 * idx.n_targets * width)
    for slot in range(idx.k):
        out = out + weights[:, slot][expand] * values[table[:, slot]]
    if stats is not None:
        stats.add_madds(idx.num_edges * width, 'weighted_aggregate')
        stats.free(2 * idx.n_targets * width)
    return out
