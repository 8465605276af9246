import numpy as np

from equistream.core.attention.radial import RadialScalars, create_radial
from equistream.core.errors import PreconditionError


def score(q_i, k_j, r_ij, radial: RadialScalars = None, tau: float = None):
    """``tau * q_i . k_j + b(r_ij)``; ``tau`` defaults to ``1/sqrt(d)``.

    Works elementwise over leading axes, so a row of keys scores in one call.
    """
    q_i, k_j = np.asarray(q_i, dtype=np.float64), np.asarray(k_j, dtype=np.float64)
    r_ij = np.asarray(r_ij, dtype=np.float64)
    if np.any(r_ij <= 0):
        raise PreconditionError('edge length must be positive')
    radial = radial or create_radial()
    tau = 1.0 / np.sqrt(q_i.shape[-1]) if tau is None else tau
    value = tau * np.sum(q_i * k_j, axis=-1) + radial.bias(r_ij)
    return float(value) if np.ndim(value) == 0 else value
