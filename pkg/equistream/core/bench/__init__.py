from equistream.core.bench.report import CSV_HEADER, BenchReport, BenchRow, fit_linear
from equistream.core.bench.runner import (
    attention_workload,
    correctness_gate,
    run_attention_bench,
    run_tp_bench,
    tp_madds_ratio,
    tp_paths,
)
from equistream.core.bench.system import (
    SyntheticSystem,
    build_neighbors,
    gen_fcc_system,
    neighbor_counts,
    save_system,
)
from equistream.core.bench.variant import AttentionWorkload, BaseVariant, create_variant
