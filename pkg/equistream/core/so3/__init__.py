from equistream.core.so3.clebsch_gordan import (
    CGTable,
    cg_real,
    complex_cg,
    complex_to_real,
    triangle,
    valid_paths,
    wigner_6j,
)
from equistream.core.so3.harmonics import (
    Y00,
    real_spherical_harmonics,
    solid_harmonics,
    solid_harmonics_all,
)
from equistream.core.so3.irreps import IrrepsFeature, IrrepsSpec, check_degree
from equistream.core.so3.product import tensor_product_dense
from equistream.core.so3.rotation import (
    Rotation,
    WignerD,
    rotate_block,
    rotate_feature,
    wigner_d,
    wigner_d_all,
)
