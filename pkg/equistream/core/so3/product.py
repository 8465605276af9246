import numpy as np

from equistream.core.errors import SelectionRuleError, ShapeMismatchError
from equistream.core.so3.clebsch_gordan import cg_real, triangle
from equistream.core.util import log
from equistream.core.util.stats import OpStats


def degree_of(block: np.ndarray) -> int:
    width = block.shape[-1]
    if width % 2 == 0:
        raise ShapeMismatchError(f'order axis has even width {width}')
    return (width - 1) // 2


def float_dtype(*arrays) -> np.dtype:
    """Floating dtype of a product of ``arrays``; integers promote to double, float32 stays float32."""
    return np.result_type(*arrays, np.float32)


def _as_block(x) -> np.ndarray:
    x = np.asarray(x)
    if not np.issubdtype(x.dtype, np.floating):
        x = x.astype(np.float64)
    # A bare harmonic vector is a single-channel block.
    return x[None, :] if x.ndim == 1 else x


def dense_madds(l1: int, l2: int, lout: int, channels: int) -> int:
    return (2 * l1 + 1) * (2 * l2 + 1) * (2 * lout + 1) * channels


def tensor_product_dense(u, v, lout: int, strict: bool = True, stats: OpStats = None) -> np.ndarray:
    """Full Clebsch-Gordan product ``out[c, M] = sum_{m1, m2} C[m1, m2, M] u[c, m1] v[c, m2]``.

    Channels pair element-wise; a single-channel leg broadcasts. Leading batch axes broadcast.

    Args:
        u: block ``(..., C, 2l1+1)``.
        v: block ``(..., C, 2l2+1)`` or a bare vector ``(2l2+1,)``.
        lout (int): output degree.
        strict (bool): raise ``SelectionRuleError`` on a triangle violation; otherwise return zeros and warn.
        stats (OpStats, optional): receives the multiply-add count.

    Returns:
        np.ndarray: block ``(..., C, 2lout+1)`` in the promoted floating dtype of ``u`` and ``v``.
    """
    u, v = _as_block(u), _as_block(v)
    dtype = float_dtype(u, v)
    l1, l2 = degree_of(u), degree_of(v)
    cu, cv = u.shape[-2], v.shape[-2]
    if cu != cv and 1 not in (cu, cv):
        raise ShapeMismatchError(f'channel counts {cu} and {cv} neither match nor broadcast')
    channels = max(cu, cv)
    batch = np.broadcast_shapes(u.shape[:-2], v.shape[:-2])
    if not triangle(l1, l2, lout):
        if strict:
            raise SelectionRuleError(f'path {(l1, l2, lout)} violates the triangle rule')
        log.warning(f'path {(l1, l2, lout)} violates the triangle rule, returning a zero block')
        return np.zeros(batch + (channels, 2 * lout + 1), dtype=dtype)
    u = np.broadcast_to(u, u.shape[:-2] + (channels, u.shape[-1]))
    v = np.broadcast_to(v, v.shape[:-2] + (channels, v.shape[-1]))
    table = cg_real(l1, l2, lout).coeffs.astype(dtype, copy=False)
    if stats is not None:
        stats.add_madds(dense_madds(l1, l2, lout, channels) * int(np.prod(batch, dtype=np.int64)), 'dense_tp')
    return np.einsum('ija,...ci,...cj->...ca', table, u, v, optimize=True)
