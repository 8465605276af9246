from equistream_extension.variants import (
    edge_materializing,
    masked_dense,
    streaming,
    streaming_parallel,
)
