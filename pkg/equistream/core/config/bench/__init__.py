from typing import List, Optional

from pydantic import field_validator

from equistream.core.config import BaseCfg, RadialCfg
from equistream.macros import gm

ATTENTION_VARIANTS = ('edge-materializing', 'masked-dense', 'streaming')
PARALLEL_VARIANT = 'streaming-parallel'
PRECISIONS = ('f32', 'f64')


class BenchCfg(BaseCfg):
    """
    Attention benchmark configuration (latency protocol: 10 warmup, 50 timed iterations).

    Attributes:
        sweep_n (List[int]): atom counts, one report row per (variant, N).
        k (int): neighbor slots per atom.
        heads (int): attention heads.
        channels (int): value channels per degree and head; ``value_width`` is the width actually aggregated.
        d_k (int): query/key width per head.
        lmax (int): highest degree of the value features; each head carries ``channels * (lmax + 1) ** 2``
            flattened irreps components.
        precision (str): ``f32`` or ``f64`` for the inputs; accumulators stay in double.
        variants (List[str]): subset of ``ATTENTION_VARIANTS``.
        a (float): FCC lattice constant in Angstrom.
        max_elements (int): per-variant element budget, configurations predicted above it are reported as OOM.
        masked_dense_max_n (int): the N x N baseline is skipped above this size.
        gate_rows (int): target rows checked by the correctness gate when the full reference exceeds the budget.
        workers (int): threads of the data-parallel streaming path; above 1 it is timed as an extra
            ``streaming-parallel`` row next to the single-threaded variants.
        point_budget_s (float): wall-time cap for the warmup and timed loop of one (variant, N) point; once
            spent, the remaining timed iterations are skipped. ``None`` runs every iteration.
    """

    sweep_n: List[int] = [128, 512, 2048, 8192, 32768]
    k: int = 64
    heads: int = 16
    channels: int = 1
    d_k: int = 4
    lmax: int = 1
    precision: str = 'f64'
    warmup: int = 10
    iters: int = 50
    seed: int = 0
    variants: List[str] = list(ATTENTION_VARIANTS)
    a: float = 3.8
    radial: RadialCfg = RadialCfg()
    max_elements: int = 2**27
    masked_dense_max_n: int = 8192
    gate_rows: int = 256
    gate_tol: Optional[float] = None
    workers: int = 1
    point_budget_s: Optional[float] = 20.0

    @field_validator('precision')
    @classmethod
    def _check_precision(cls, value):
        if value not in PRECISIONS:
            raise ValueError(f'precision must be one of {PRECISIONS}, got {value!r}')
        return value

    @field_validator('variants')
    @classmethod
    def _check_variants(cls, value):
        unknown = [v for v in value if v not in ATTENTION_VARIANTS]
        if unknown:
            raise ValueError(f'unknown variants {unknown}, expected a subset of {ATTENTION_VARIANTS}')
        return value

    @field_validator('workers', 'k', 'heads', 'channels', 'd_k', 'iters')
    @classmethod
    def _check_positive(cls, value):
        if value < 1:
            raise ValueError(f'expected a positive integer, got {value}')
        return value

    @field_validator('lmax')
    @classmethod
    def _check_lmax(cls, value):
        if value < 0 or value > gm.L_MAX:
            raise ValueError(f'lmax must be in [0, {gm.L_MAX}], got {value}')
        return value

    @field_validator('point_budget_s')
    @classmethod
    def _check_budget(cls, value):
        if value is not None and value <= 0:
            raise ValueError(f'time budget must be positive, got {value}')
        return value

    @property
    def value_width(self) -> int:
        """Flattened value components per head: ``channels`` copies of every degree up to ``lmax``."""
        return self.channels * (self.lmax + 1) ** 2

    @property
    def timed_variants(self) -> List[str]:
        if self.workers > 1:
            return list(self.variants) + [PARALLEL_VARIANT]
        return list(self.variants)

    @property
    def tolerance(self) -> float:
        if self.gate_tol is not None:
            return self.gate_tol
        return 1e-10 if self.precision == 'f64' else 1e-4


class TPBenchCfg(BaseCfg):
    """
    Tensor-product benchmark configuration (throughput protocol: 10 warmup, 10 timed iterations).

    ``counts`` is the sweep over the number of products evaluated per call.
    """

    lmax: int = 2
    channels: int = 128
    counts: List[int] = [1, 64, 1024]
    warmup: int = 10
    iters: int = 10
    seed: int = 0
    precision: str = 'f64'

    @field_validator('precision')
    @classmethod
    def _check_precision(cls, value):
        if value not in PRECISIONS:
            raise ValueError(f'precision must be one of {PRECISIONS}, got {value!r}')
        return value
