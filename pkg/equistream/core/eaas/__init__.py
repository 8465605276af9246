from equistream.core.eaas.alignment import (
    AlignmentRotation,
    alignment_rotation,
    pole_residual,
)
from equistream.core.eaas.product import (
    apply_reindex,
    eaas_madds,
    eaas_tensor_product,
    r_mag_factor,
)
from equistream.core.eaas.reindex import (
    ReindexEntry,
    ReindexRule,
    build_reindex_rule,
    dump_reindex_rules,
    survivors,
)
