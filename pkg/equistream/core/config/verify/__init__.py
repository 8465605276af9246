from typing import List

from pydantic import BaseModel, field_validator

from equistream.core.config import BaseCfg

SUITES = ('so3', 'pole-sparsity', 'eaas', 'attention', 'gradient', 'factorization', 'accounting', 'geometry')


class ToleranceCfg(BaseModel, extra='forbid'):
    equivariance: float = 1e-10
    composite_equivariance: float = 1e-9
    realness: float = 1e-12
    homogeneity: float = 1e-12
    pole: float = 1e-12
    eaas: float = 1e-10
    stream: float = 1e-12
    shift: float = 1e-10
    gradient: float = 1e-4
    factorization: float = 1e-9
    r2: float = 0.999


class VerifyCfg(BaseCfg):
    """
    Attributes:
        suites (List[str]): suites to run, in order.
        seed (int): base seed; every failure message echoes it.
        tolerances (ToleranceCfg): per-property thresholds, overridable with ``--tol key=value``.
        draws (int): random draws for the EAAS exactness sweep.
        rotations (int): random rotations for composite equivariance checks.
    """

    suites: List[str] = list(SUITES)
    seed: int = 0
    tolerances: ToleranceCfg = ToleranceCfg()
    draws: int = 10000
    rotations: int = 100

    @field_validator('suites')
    @classmethod
    def _check_suites(cls, value):
        unknown = [s for s in value if s not in SUITES]
        if unknown:
            raise ValueError(f'unknown suites {unknown}, expected a subset of {SUITES}')
        return value
