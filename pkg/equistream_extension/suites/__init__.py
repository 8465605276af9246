from equistream_extension.suites import (
    accounting,
    attention,
    eaas,
    factorization,
    geometry,
    gradient,
    pole_sparsity,
    so3,
)
