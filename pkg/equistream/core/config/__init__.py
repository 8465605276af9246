from typing import Optional

from pydantic import BaseModel


class BaseCfg(BaseModel):
    def update(self, **kwargs):
        return self.model_copy(update=kwargs, deep=True)


class EAASCfg(BaseCfg):
    """
    Settings of the axis-aligned sparse tensor product.

    Attributes:
        eps_r (Optional[float]): directions shorter than this are degenerate. Defaults to ``gm.EPS_R`` when None.
        azimuth (float): extra rotation about the z axis applied after alignment (gauge choice). Defaults to 0.
        coeff_tol (float): re-index coefficients below this magnitude are treated as absent.
    """

    eps_r: Optional[float] = None
    azimuth: float = 0.0
    coeff_tol: float = 1e-14


class RadialCfg(BaseCfg):
    """
    Distance-dependent score bias ``b(r)`` and value gate ``phi(r)``.

    ``bias`` and ``gate`` name functions registered in ``equistream.core.attention.radial``.
    """

    bias: str = 'zero'
    gate: str = 'cosine'
    r_cut: float = 6.0


class FactorizationCfg(BaseCfg):
    """
    Attributes:
        recenter (bool): shift positions to their centroid before the node-centric factorization.
        oversample (int): least-squares rows per unknown when solving for translation weights.
        solve_tol (float): largest accepted relative residual of the translation solve.
        seed (int): seed of the least-squares sample points; independent of the global seed so caches agree.
    """

    recenter: bool = True
    oversample: int = 10
    solve_tol: float = 1e-10
    seed: int = 20240607
