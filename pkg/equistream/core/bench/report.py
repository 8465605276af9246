import csv
import io
import sys
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

CSV_HEADER = ('variant', 'N', 'K', 'H', 'C', 'lmax', 'precision', 'mean_time_s', 'qps', 'peak_elems', 'madds', 'seed')


@dataclass
class BenchRow:
    variant: str
    n: int
    k: int
    heads: int
    channels: int
    lmax: int
    precision: str
    seed: int
    times: List[float] = field(default_factory=list)
    peak_elems: int = 0
    madds: int = 0
    oom: Optional[str] = None

    @property
    def mean_time(self) -> Optional[float]:
        return float(np.mean(self.times)) if self.times else None

    @property
    def qps(self) -> Optional[float]:
        """Forward steps per second."""
        mean = self.mean_time
        return 1.0 / mean if mean else None

    def as_csv(self) -> Tuple:
        if self.oom is not None:
            time_s, qps = 'OOM', 'OOM'
        else:
            time_s, qps = f'{self.mean_time:.6e}', f'{self.qps:.6e}'
        return (
            self.variant,
            self.n,
            self.k,
            self.heads,
            self.channels,
            self.lmax,
            self.precision,
            time_s,
            qps,
            self.peak_elems,
            self.madds,
            self.seed,
        )


@dataclass
class BenchReport:
    rows: List[BenchRow] = field(default_factory=list)

    def add(self, row: BenchRow):
        self.rows.append(row)

    def select(self, variant: str) -> List[BenchRow]:
        return [r for r in self.rows if r.variant == variant]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator='\n')
        writer.writerow(CSV_HEADER)
        for row in self.rows:
            writer.writerow(row.as_csv())
        return buf.getvalue()

    def write(self, path: str = None):
        """CSV to ``path``, or to stdout when no path is given."""
        text = self.to_csv()
        if path is None:
            sys.stdout.write(text)
            sys.stdout.flush()
        else:
            with open(path, 'w', encoding='utf-8') as f:
                f.write(text)


def fit_linear(xs: Sequence[float], ys: Sequence[float]):
    """Least-squares line through ``(xs, ys)``.

    Returns:
        tuple: ``(slope, intercept, r2)``; ``r2`` is 1 when ``ys`` is constant and fitted exactly.
    """
    xs, ys = np.asarray(xs, dtype=np.float64), np.asarray(ys, dtype=np.float64)
    slope, intercept = np.polyfit(xs, ys, 1)
    residual = np.sum((ys - (slope * xs + intercept)) ** 2)
    total = np.sum((ys - ys.mean()) ** 2)
    r2 = 1.0 - residual / total if total > 0 else (1.0 if residual < 1e-12 else 0.0)
    return float(slope), float(intercept), float(r2)
