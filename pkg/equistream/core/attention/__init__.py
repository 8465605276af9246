from equistream.core.attention.aggregate import (
    attention_weights,
    dense_reference_aggregate,
    stream_aggregate,
    stream_aggregate_backward,
    weighted_aggregate,
)
from equistream.core.attention.fixture import (
    AttentionFixture,
    load_fixture,
    random_fixture,
    save_fixture,
)
from equistream.core.attention.neighbors import NeighborIndex
from equistream.core.attention.projection import (
    QKProjection,
    ValueProjection,
    project_qk,
    project_values,
)
from equistream.core.attention.radial import (
    RadialScalars,
    create_radial,
    register_bias,
    register_gate,
)
from equistream.core.attention.score import score
from equistream.core.attention.stats import AggregationStats
