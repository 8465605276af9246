from typing import Dict, List, Sequence, Tuple

import numpy as np

from equistream.core.attention.aggregate import attention_weights, weighted_aggregate
from equistream.core.attention.neighbors import NeighborIndex
from equistream.core.attention.projection import (
    QKProjection,
    ValueProjection,
    project_qk,
    project_values,
)
from equistream.core.attention.radial import RadialScalars, slot_scalars
from equistream.core.config import EAASCfg, FactorizationCfg
from equistream.core.eaas.product import eaas_tensor_product
from equistream.core.errors import ShapeMismatchError, UnsupportedPathError
from equistream.core.message.problem import MessageProblem
from equistream.core.message.translation import recoupling_coefficients
from equistream.core.so3.clebsch_gordan import triangle
from equistream.core.so3.harmonics import solid_harmonics
from equistream.core.so3.irreps import IrrepsFeature, check_degree
from equistream.core.so3.product import tensor_product_dense
from equistream.core.util import log
from equistream.core.util.stats import OpStats


def _reachable(prob: MessageProblem, l: int, l_out: int) -> List[int]:
    degrees = [l_in for l_in in prob.features.spec.degrees if triangle(l_in, l, l_out)]
    if not degrees:
        raise UnsupportedPathError(
            f'l_out={l_out} is not reachable from degrees {prob.features.spec.degrees} with l={l}'
        )
    return degrees


def edge_centric_message(
    prob: MessageProblem, l: int, l_out: int = None, stats: OpStats = None
) -> Dict[int, np.ndarray]:
    """Oracle ``m_i = sum_j alpha_ij (h_j (x) R_l(r_j - r_i))^{l_out}``: one dense product per edge.

    Returns:
        Dict[int, np.ndarray]: per input degree ``l_in``, the ``(N, C, 2 l_out + 1)`` message block.
    """
    l_out = prob.l_out if l_out is None else l_out
    check_degree(l)
    idx = prob.idx
    table, mask = idx.safe_table(), idx.mask
    out = {}
    for l_in in _reachable(prob, l, l_out):
        h = prob.features[l_in]
        acc = np.zeros((prob.n_atoms, h.shape[1], 2 * l_out + 1))
        for slot in range(idx.k):
            rows = np.flatnonzero(mask[:, slot])
            if len(rows) == 0:
                continue
            j = table[rows, slot]
            y = solid_harmonics(l, prob.positions[j] - prob.positions[rows])
            edge = tensor_product_dense(h[j], y[:, None, :], l_out, stats=stats)
            acc[rows] += prob.alpha[rows, slot][:, None, None] * edge
        out[l_in] = acc
    return out


def source_term(h_j, r_j, l_s: int, l_k: int, cfg: EAASCfg = None, stats: OpStats = None) -> np.ndarray:
    """``(h_j (x) R_{l_s}(r_j))^{l_k}`` per node, via the axis-aligned sparse product.

    Nodes sitting at the origin fall back to the dense product inside ``eaas_tensor_product``.
    """
    return eaas_tensor_product(h_j, r_j, l_s, l_k, cfg, stats)


def target_couple(m_i, r_i, l_t: int, l_out: int, cfg: EAASCfg = None, stats: OpStats = None) -> np.ndarray:
    """``(m_i (x) R_{l_t}(r_i))^{l_out}`` per node."""
    return eaas_tensor_product(m_i, r_i, l_t, l_out, cfg, stats)


def factorized_message(
    prob: MessageProblem,
    l: int,
    l_out: int = None,
    cfg: FactorizationCfg = None,
    eaas_cfg: EAASCfg = None,
    stats: OpStats = None,
) -> Dict[int, np.ndarray]:
    """Node-centric evaluation of the same messages as ``edge_centric_message``.

    For every recoupling term ``(u, k)``: couple each source with ``R_{l-u}(r_j)`` once, aggregate with the
    edge weights (scalar work only per edge), couple each target with ``R_u(r_i)``, and sum with the
    translation weights. Positions are shifted to their centroid first unless ``cfg.recenter`` is off.
    """
    cfg = cfg or FactorizationCfg()
    l_out = prob.l_out if l_out is None else l_out
    check_degree(l)
    positions = prob.positions
    if cfg.recenter:
        positions = positions - positions.mean(axis=0)
    out = {}
    for l_in in _reachable(prob, l, l_out):
        coeffs = recoupling_coefficients(l, l_in, l_out, cfg)
        if not coeffs.weights:
            raise UnsupportedPathError(f'no translation terms for (l_in={l_in}, l={l} -> l_out={l_out})')
        h = prob.features[l_in]
        acc = np.zeros((prob.n_atoms, h.shape[1], 2 * l_out + 1))
        sources: Dict[Tuple[int, int], np.ndarray] = {}
        for (u, k), weight in coeffs.weights.items():
            if (u, k) not in sources:
                sources[(u, k)] = source_term(h, positions, l - u, k, eaas_cfg, stats)
            aggregated = weighted_aggregate(sources[(u, k)], prob.alpha, prob.idx, stats)
            acc += weight * target_couple(aggregated, positions, u, l_out, eaas_cfg, stats)
        out[l_in] = acc
    return out


def translation_stress(
    prob: MessageProblem, shifts: Sequence[float], l: int, l_out: int = None, recenter: bool = False, seed: int = 0
) -> List[Tuple[float, float]]:
    """Worst factorized-vs-edge residual after translating by vectors of each length in ``shifts``.

    Returns ``(|t|, residual)`` pairs; the growth is reported, not asserted.
    """
    rng = np.random.default_rng(seed)
    cfg = FactorizationCfg(recenter=recenter)
    reference = edge_centric_message(prob, l, l_out)
    curve = []
    for length in shifts:
        direction = rng.standard_normal(3)
        moved = prob.translated(length * direction / np.linalg.norm(direction))
        got = factorized_message(moved, l, l_out, cfg)
        residual = max(float(np.max(np.abs(got[d] - reference[d]))) for d in reference)
        log.info(f'translation stress |t|={length:g}: residual {residual:.3e}')
        curve.append((float(length), residual))
    return curve


def attention_message(
    h: IrrepsFeature,
    positions,
    idx: NeighborIndex,
    qk: QKProjection,
    value: ValueProjection,
    l: int,
    l_out: int,
    radial: RadialScalars = None,
    tau: float = None,
    cfg: FactorizationCfg = None,
) -> Dict[int, np.ndarray]:
    """Full single-head attention block: invariant scores, softmax weights gated by ``phi``, then the
    node-centric message of the projected values."""
    if qk.heads != 1:
        raise ShapeMismatchError(f'attention_message is single-head, projection has {qk.heads} heads')
    q, k = project_qk(h, qk)
    alpha = attention_weights(q[:, 0, :], k[:, 0, :], idx, radial, tau)
    _, phi = slot_scalars(idx, radial)
    prob = MessageProblem(
        positions=np.asarray(positions, dtype=np.float64),
        features=project_values(h, value),
        idx=idx,
        alpha=alpha * phi,
        l_out=l_out,
    )
    return factorized_message(prob, l, l_out, cfg)
