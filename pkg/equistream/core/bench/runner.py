"""Benchmark drivers: the attention sweep (latency protocol) and the tensor-product sweep (throughput protocol).

Both follow the same discipline: build inputs, pass the correctness gate, warm up, then time with a
synchronization point before each clock read. Counters come from a separate instrumented call so the timed
loop runs uninstrumented code.
"""
import sys
from functools import partial
from typing import Dict, List, Tuple

import numpy as np
import tqdm

from equistream.core.attention.aggregate import dense_reference_aggregate
from equistream.core.attention.radial import create_radial
from equistream.core.bench.report import BenchReport, BenchRow
from equistream.core.bench.system import build_neighbors, gen_fcc_system
from equistream.core.bench.variant import AttentionWorkload, BaseVariant, create_variant
from equistream.core.config.bench import BenchCfg, TPBenchCfg
from equistream.core.eaas.product import eaas_madds, eaas_tensor_product
from equistream.core.errors import CorrectnessGateError, PreconditionError
from equistream.core.so3.clebsch_gordan import valid_paths
from equistream.core.so3.harmonics import solid_harmonics
from equistream.core.so3.irreps import check_degree
from equistream.core.so3.product import dense_madds, tensor_product_dense
from equistream.core.util import log, timed_loop
from equistream.core.util.stats import OpStats

DTYPES = {'f32': np.float32, 'f64': np.float64}


def attention_workload(cfg: BenchCfg, n: int) -> AttentionWorkload:
    """FCC geometry, neighbor table and random ``q, k, v`` for one sweep point; deterministic in ``cfg.seed``."""
    system = gen_fcc_system(n, cfg.a, cfg.seed)
    idx = build_neighbors(system, cfg.k, cfg.radial.r_cut)
    rng = np.random.default_rng([cfg.seed, n])
    dtype = DTYPES[cfg.precision]
    q = rng.standard_normal((n, cfg.heads, cfg.d_k)).astype(dtype)
    k = rng.standard_normal((n, cfg.heads, cfg.d_k)).astype(dtype)
    values = rng.standard_normal((n, cfg.heads, cfg.value_width)).astype(dtype)
    return AttentionWorkload(q, k, values, idx, create_radial(cfg.radial), 1.0 / np.sqrt(cfg.d_k))


def _reference_rows(cfg: BenchCfg, w: AttentionWorkload) -> np.ndarray:
    """All rows when the materializing reference fits the budget, otherwise a seeded sample."""
    full = w.n * w.idx.k * w.heads * (w.d_k + 2 + 2 * w.channels)
    if full <= cfg.max_elements or w.n <= cfg.gate_rows:
        return np.arange(w.n)
    rng = np.random.default_rng([cfg.seed, w.n, 1])
    return np.sort(rng.choice(w.n, size=cfg.gate_rows, replace=False))


def correctness_gate(cfg: BenchCfg, w: AttentionWorkload, outputs: Dict[str, np.ndarray]) -> float:
    """Compare every variant output to the double-precision materializing reference.

    Raises:
        CorrectnessGateError: on the first variant whose worst deviation exceeds ``cfg.tolerance``.

    Returns:
        float: worst deviation over all variants.
    """
    rows = _reference_rows(cfg, w)
    reference = dense_reference_aggregate(
        w.q[rows].astype(np.float64),
        w.k.astype(np.float64),
        w.values.astype(np.float64),
        w.idx.rows(rows),
        w.radial,
        w.tau,
    )
    worst = 0.0
    for name, out in outputs.items():
        err = float(np.max(np.abs(out[rows] - reference))) if reference.size else 0.0
        if err > cfg.tolerance:
            raise CorrectnessGateError(
                f'variant {name} deviates from the reference by {err:.3e} at N={w.n} '
                f'(tolerance {cfg.tolerance:.1e}); replay with --seed {cfg.seed}'
            )
        worst = max(worst, err)
    log.info(f'correctness gate N={w.n}: worst deviation {worst:.3e} over {len(rows)} rows')
    return worst


def _row(cfg: BenchCfg, name: str, n: int) -> BenchRow:
    return BenchRow(
        variant=name,
        n=n,
        k=cfg.k,
        heads=cfg.heads,
        channels=cfg.channels,
        lmax=cfg.lmax,
        precision=cfg.precision,
        seed=cfg.seed,
    )


def run_attention_bench(cfg: BenchCfg = None, progress: bool = True) -> BenchReport:
    """Time every configured aggregation variant at every ``N`` of the sweep.

    A variant whose predicted peak exceeds the element budget (or the masked-dense size cap) gets an OOM row.
    """
    cfg = cfg or BenchCfg()
    report = BenchReport()
    variants: List[BaseVariant] = [create_variant(name, cfg) for name in cfg.timed_variants]
    for n in tqdm.tqdm(cfg.sweep_n, desc='bench-attn', file=sys.stderr, disable=not progress):
        if n < 1:
            raise PreconditionError(f'sweep sizes must be positive, got {n}')
        w = attention_workload(cfg, n)
        runnable, outputs = [], {}
        for variant in variants:
            reason = variant.skip_reason(n, cfg.k, cfg.heads, cfg.d_k, cfg.value_width)
            if reason is not None:
                log.warning(f'{variant.name} at N={n} reported as OOM: {reason}')
                row = _row(cfg, variant.name, n)
                row.oom = reason
                row.peak_elems = variant.predicted_peak_elems(n, cfg.k, cfg.heads, cfg.d_k, cfg.value_width)
                report.add(row)
                continue
            variant.prepare(w)
            outputs[variant.name] = variant.run()
            runnable.append(variant)
        correctness_gate(cfg, w, outputs)
        for variant in runnable:
            stats = variant.measure()
            row = _row(cfg, variant.name, n)
            row.times = timed_loop(variant.run, cfg.warmup, cfg.iters, cfg.point_budget_s)
            row.peak_elems = stats.peak_elems
            row.madds = stats.madds
            log.info(f'{variant.name} N={n}: {row.mean_time:.3e} s, peak {row.peak_elems} elements')
            report.add(row)
    return report


def tp_paths(lmax: int) -> List[Tuple[int, int, int]]:
    """Triangle-valid ``(li, lf, lo)`` with every degree at most ``lmax``."""
    check_degree(lmax)
    return list(valid_paths(lmax, lmax, lmax))


def tp_madds_ratio(li: int, lf: int, lo: int, channels: int = 1) -> float:
    """Dense over sparse multiply-adds of the coupling step for one path."""
    return dense_madds(li, lf, lo, channels) / eaas_madds(li, lf, lo, channels)


def run_tp_bench(cfg: TPBenchCfg = None, progress: bool = True) -> BenchReport:
    """Dense coupling against the axis-aligned sparse product over a sweep of batch sizes.

    Rows are named ``dense[li,lf,lo]`` and ``eaas[li,lf,lo]``; the ``N`` column is the number of products per call.
    """
    cfg = cfg or TPBenchCfg()
    report = BenchReport()
    dtype = DTYPES[cfg.precision]
    paths = tp_paths(cfg.lmax)
    for count in tqdm.tqdm(cfg.counts, desc='bench-tp', file=sys.stderr, disable=not progress):
        rng = np.random.default_rng([cfg.seed, count])
        r = rng.standard_normal((count, 3))
        for li, lf, lo in paths:
            h = rng.standard_normal((count, cfg.channels, 2 * li + 1)).astype(dtype)
            y = solid_harmonics(lf, r)[:, None, :].astype(dtype)
            dense = tensor_product_dense(h, y, lo)
            sparse = eaas_tensor_product(h, r, lf, lo)
            err = float(np.max(np.abs(dense - sparse)))
            tol = 1e-10 if cfg.precision == 'f64' else 1e-4
            if err > tol * max(1.0, float(np.max(np.abs(dense)))):
                raise CorrectnessGateError(
                    f'path ({li},{lf},{lo}) disagrees with the dense product by {err:.3e}; '
                    f'replay with --seed {cfg.seed}'
                )
            candidates = {
                f'dense[{li},{lf},{lo}]': partial(tensor_product_dense, h, y, lo),
                f'eaas[{li},{lf},{lo}]': partial(eaas_tensor_product, h, r, lf, lo),
            }
            for name, fn in candidates.items():
                stats = OpStats()
                fn(stats=stats)
                row = BenchRow(
                    variant=name,
                    n=count,
                    k=0,
                    heads=0,
                    channels=cfg.channels,
                    lmax=cfg.lmax,
                    precision=cfg.precision,
                    seed=cfg.seed,
                )
                row.times = timed_loop(fn, cfg.warmup, cfg.iters)
                row.peak_elems = stats.peak_elems
                row.madds = stats.madds
                report.add(row)
    return report
