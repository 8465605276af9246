import math

import numpy as np
import pytest

from equistream.core.errors import PreconditionError, UnsupportedDegreeError
from equistream.core.so3.clebsch_gordan import complex_to_real
from equistream.core.so3.harmonics import (
    Y00,
    real_spherical_harmonics,
    solid_harmonics,
    solid_harmonics_all,
)
from equistream.macros import gm


def sphere_quadrature(n_theta=24, n_phi=48):
    """Gauss-Legendre in cos(theta) times a uniform azimuth grid; exact for the products checked here."""
    z, wz = np.polynomial.legendre.leggauss(n_theta)
    phi = np.arange(n_phi) * 2 * np.pi / n_phi
    zz, pp = np.meshgrid(z, phi, indexing='ij')
    s = np.sqrt(1 - zz**2)
    points = np.stack([s * np.cos(pp), s * np.sin(pp), zz], axis=-1).reshape(-1, 3)
    weights = np.repeat(wz, n_phi) * (2 * np.pi / n_phi)
    return points, weights


@pytest.mark.P0
def test_degree_zero_is_constant():
    r = np.array([[0.0, 0.0, 0.0], [1.0, 2.0, 3.0]])
    np.testing.assert_allclose(solid_harmonics(0, r)[:, 0], [Y00, Y00], rtol=0, atol=1e-15)


@pytest.mark.P0
def test_degree_one_is_signed_axis_permutation():
    r = np.array([0.3, -1.2, 2.0])
    c = math.sqrt(3 / (4 * math.pi))
    np.testing.assert_allclose(solid_harmonics(1, r), c * np.array([r[1], r[2], -r[0]]), atol=1e-15)


@pytest.mark.P0
def test_degree_two_zonal_component():
    r = np.array([[0.4, -0.7, 1.3]])
    x, y, z = r[0]
    expected = math.sqrt(5 / (16 * math.pi)) * (3 * z * z - (x * x + y * y + z * z))
    assert solid_harmonics(2, r)[0, 2] == pytest.approx(expected, abs=1e-14)


@pytest.mark.P0
def test_origin_vanishes_above_degree_zero():
    for l in range(1, gm.L_MAX + 1):
        assert np.all(solid_harmonics(l, np.zeros(3)) == 0.0)


@pytest.mark.P0
def test_orthonormal_on_sphere():
    points, weights = sphere_quadrature()
    ys = np.concatenate(solid_harmonics_all(gm.L_MAX, points), axis=-1)
    gram = np.einsum('p,pa,pb->ab', weights, ys, ys)
    np.testing.assert_allclose(gram, np.eye(ys.shape[1]), atol=1e-12)


@pytest.mark.P0
def test_homogeneity(rng):
    r = rng.standard_normal((50, 3))
    s = 2.5
    for l in range(gm.L_MAX + 1):
        np.testing.assert_allclose(solid_harmonics(l, s * r), s**l * solid_harmonics(l, r), rtol=1e-12, atol=1e-12)


@pytest.mark.P0
def test_batch_shapes(rng):
    r = rng.standard_normal((4, 5, 3))
    assert solid_harmonics(3, r).shape == (4, 5, 7)
    np.testing.assert_array_equal(solid_harmonics(3, r)[2, 1], solid_harmonics(3, r[2, 1]))


@pytest.mark.P0
def test_unit_vectors_required():
    with pytest.raises(PreconditionError):
        real_spherical_harmonics(2, np.array([1.0, 1.0, 0.0]))
    u = np.array([0.0, 0.6, 0.8])
    np.testing.assert_allclose(real_spherical_harmonics(2, u), solid_harmonics(2, u))


@pytest.mark.P0
def test_degree_above_limit_rejected():
    with pytest.raises(UnsupportedDegreeError):
        solid_harmonics(gm.L_MAX + 1, np.ones(3))
    with pytest.raises(UnsupportedDegreeError):
        solid_harmonics(-1, np.ones(3))


@pytest.mark.P0
def test_degree_two_matches_cartesian_table(rng):
    for r in [np.array([1.0, 1.0, 0.0]), rng.standard_normal(3)]:
        x, y, z = r
        a, b = math.sqrt(15 / (4 * math.pi)), math.sqrt(15 / (16 * math.pi))
        expected = [
            a * x * y,
            a * y * z,
            math.sqrt(5 / (16 * math.pi)) * (3 * z * z - r @ r),
            -a * x * z,
            b * (x * x - y * y),
        ]
        np.testing.assert_allclose(solid_harmonics(2, r), expected, atol=1e-14)


@pytest.mark.P0
def test_pole_has_only_zonal_component():
    for l in range(gm.L_MAX + 1):
        y = real_spherical_harmonics(l, np.array([0.0, 0.0, 1.0]))
        assert np.count_nonzero(np.abs(y) > 1e-15) == 1
        assert y[l] == pytest.approx(math.sqrt((2 * l + 1) / (4 * math.pi)))


def legendre_table(lmax, x):
    """Unnormalized associated Legendre ``P_l^m(x)`` without the Condon-Shortley sign, ``m >= 0``."""
    s = np.sqrt(1.0 - x * x)
    p = {(0, 0): np.ones_like(x)}
    for m in range(1, lmax + 1):
        p[m, m] = (2 * m - 1) * s * p[m - 1, m - 1]
    for m in range(lmax + 1):
        if m + 1 <= lmax:
            p[m + 1, m] = (2 * m + 1) * x * p[m, m]
        for l in range(m + 2, lmax + 1):
            p[l, m] = ((2 * l - 1) * x * p[l - 1, m] - (l + m - 1) * p[l - 2, m]) / (l - m)
    return p


@pytest.mark.P0
def test_degree_three_matches_legendre_oracle(rng):
    u = rng.standard_normal((200, 3))
    u /= np.linalg.norm(u, axis=-1, keepdims=True)
    theta = np.arccos(np.clip(u[:, 2], -1.0, 1.0))
    phi = np.arctan2(u[:, 1], u[:, 0])
    x, s = np.cos(theta), np.sin(theta)
    p = legendre_table(3, x)
    closed = {0: (5 * x**3 - 3 * x) / 2, 1: 1.5 * (5 * x**2 - 1) * s, 2: 15 * x * s**2, 3: 15 * s**3}
    for m, want in closed.items():
        np.testing.assert_allclose(p[3, m], want, atol=1e-12)
    l = 3
    y = np.zeros((2 * l + 1, len(u)), dtype=np.complex128)
    for m in range(l + 1):
        norm = math.sqrt((2 * l + 1) / (4 * math.pi) * math.factorial(l - m) / math.factorial(l + m))
        y[l + m] = norm * (-1) ** m * p[l, m] * np.exp(1j * m * phi)
        y[l - m] = (-1) ** m * np.conj(y[l + m])
    oracle = complex_to_real(l) @ y
    np.testing.assert_allclose(oracle.imag, 0.0, atol=1e-12)
    np.testing.assert_allclose(real_spherical_harmonics(l, u), oracle.real.T, atol=1e-12)
