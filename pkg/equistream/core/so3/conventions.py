import math
from typing import Dict

import toml

from equistream.core.so3.clebsch_gordan import cg_real, valid_paths
from equistream.core.so3.harmonics import Y00
from equistream.macros import gm


def conventions_manifest(lmax: int = None, include_eaas: bool = True, include_translation: bool = True) -> Dict:
    """Machine-readable statement of every basis, sign and normalization choice.

    The ``eaas`` and ``translation`` sections are derived from the cached rule and coefficient tables.
    """
    lmax = gm.L_MAX if lmax is None else lmax
    manifest = {
        'so3': {
            'group': 'SO(3), no parity',
            'm_ordering': 'ascending, m = -l..l',
            'harmonic_normalization': 'orthonormal, integral of Y^2 over the sphere = 1',
            'y00': Y00,
            'complex_basis': 'Condon-Shortley',
            'complex_to_real': 'm<0: i/sqrt2 (z_m - (-1)^m z_-m); m=0: z_0; m>0: 1/sqrt2 (z_m + (-1)^m z_-m)',
            'l1_components': 'sqrt(3/(4 pi)) * (y, z, -x)',
            'l1_scale': math.sqrt(3.0 / (4.0 * math.pi)),
            'transformation_side': 'solid_harmonics(l, R r) = D(R) @ solid_harmonics(l, r); blocks map h -> h @ D.T',
            'cg_phase': 'i^(l1 + l2 - l_out) applied after the basis change',
            'cg_normalization': 'sum over (m1, m2) of C^2 = 1 per m_out',
            'lmax': lmax,
        },
        'cg_path_norm': {
            f'{l1}_{l2}_{lo}': round(cg_real(l1, l2, lo).normalization, 12) for l1, l2, lo in valid_paths(lmax)
        },
    }
    if include_eaas:
        from equistream.core.eaas.reindex import reindex_manifest

        manifest['eaas'] = reindex_manifest(lmax)
    if include_translation:
        from equistream.core.message.translation import translation_manifest

        manifest['translation'] = translation_manifest(min(lmax, 2))
    return manifest


def dump_conventions(lmax: int = None, **kwargs) -> str:
    """The manifest as TOML ``key = value`` text."""
    return toml.dumps(conventions_manifest(lmax, **kwargs))
