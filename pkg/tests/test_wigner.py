import numpy as np
import pytest

from equistream.core.errors import PreconditionError
from equistream.core.so3.harmonics import solid_harmonics
from equistream.core.so3.irreps import IrrepsFeature, IrrepsSpec
from equistream.core.so3.product import tensor_product_dense
from equistream.core.so3.rotation import (
    L1_AXIS_MAP,
    Rotation,
    rotate_block,
    rotate_feature,
    wigner_d,
    wigner_d_all,
)
from equistream.macros import gm


@pytest.mark.P0
def test_identity_gives_identity():
    for l, d in enumerate(wigner_d_all(gm.L_MAX, Rotation.identity())):
        np.testing.assert_array_equal(d, np.eye(2 * l + 1))


@pytest.mark.P0
def test_identity_inside_a_batch(rng):
    rot = Rotation.random(rng)
    mixed = Rotation(np.stack([np.eye(3), rot.matrix]))
    for l, d in enumerate(wigner_d_all(gm.L_MAX, mixed)):
        np.testing.assert_array_equal(d[0], np.eye(2 * l + 1))
        np.testing.assert_allclose(d[1], wigner_d(l, rot).matrix, atol=1e-14)


@pytest.mark.P0
def test_degree_one_is_permuted_rotation(rng):
    rot = Rotation.random(rng)
    np.testing.assert_allclose(wigner_d(1, rot).matrix, L1_AXIS_MAP @ rot.matrix @ L1_AXIS_MAP.T, atol=1e-15)


@pytest.mark.P0
def test_harmonics_transform_by_wigner_d(rng):
    r = rng.standard_normal((100, 3))
    for _ in range(3):
        rot = Rotation.random(rng)
        for l, d in enumerate(wigner_d_all(gm.L_MAX, rot)):
            np.testing.assert_allclose(solid_harmonics(l, rot.apply(r)), solid_harmonics(l, r) @ d.T, atol=1e-10)


@pytest.mark.P0
def test_representation_and_orthogonality(rng):
    r1, r2 = Rotation.random(rng), Rotation.random(rng)
    d1, d2, d12 = (wigner_d_all(gm.L_MAX, r) for r in (r1, r2, r1 @ r2))
    for l in range(gm.L_MAX + 1):
        np.testing.assert_allclose(d12[l], d1[l] @ d2[l], atol=1e-10)
        np.testing.assert_allclose(d1[l] @ d1[l].T, np.eye(2 * l + 1), atol=1e-12)
        np.testing.assert_allclose(wigner_d(l, r1.inv()).matrix, d1[l].T, atol=1e-12)


@pytest.mark.P0
def test_batched_rotations(rng):
    rot = Rotation.random(rng, batch=(4,))
    ds = wigner_d_all(2, rot)
    assert ds[2].shape == (4, 5, 5)
    np.testing.assert_allclose(ds[2][1], wigner_d(2, Rotation(rot.matrix[1])).matrix, atol=1e-14)


@pytest.mark.P0
def test_rotation_rejects_non_rotations():
    with pytest.raises(PreconditionError):
        Rotation(np.diag([1.0, 1.0, -1.0]))
    with pytest.raises(PreconditionError):
        Rotation(2 * np.eye(3))
    with pytest.raises(PreconditionError):
        Rotation(np.eye(2))


@pytest.mark.P0
def test_axis_angle_quarter_turn():
    rot = Rotation.from_axis_angle([0.0, 0.0, 1.0], np.pi / 2)
    np.testing.assert_allclose(rot.apply([1.0, 0.0, 0.0]), [0.0, 1.0, 0.0], atol=1e-15)


@pytest.mark.P0
def test_rotate_feature_round_trip(rng):
    spec = IrrepsSpec.parse('3x0+2x1+2x2+1x4')
    h = IrrepsFeature.random(spec, rng, (5,))
    rot = Rotation.random(rng)
    assert rotate_feature(h, Rotation.identity()).allclose(h, 0.0)
    assert rotate_feature(rotate_feature(h, rot), rot.inv()).allclose(h, 1e-12)


@pytest.mark.P0
def test_rotating_vectors_block(rng):
    vectors = rng.standard_normal((6, 3))
    rot = Rotation.random(rng)
    block = vectors @ L1_AXIS_MAP.T
    rotated = rotate_block(block, wigner_d(1, rot).matrix)
    np.testing.assert_allclose(rotated, rot.apply(vectors) @ L1_AXIS_MAP.T, atol=1e-13)


@pytest.mark.P0
def test_dense_product_is_equivariant(rng):
    u, v = rng.standard_normal((4, 5)), rng.standard_normal((4, 3))
    rot = Rotation.random(rng)
    ds = wigner_d_all(3, rot)
    rotated_out = tensor_product_dense(rotate_block(u, ds[2]), rotate_block(v, ds[1]), 3)
    np.testing.assert_allclose(rotated_out, rotate_block(tensor_product_dense(u, v, 3), ds[3]), atol=1e-10)


@pytest.mark.P0
def test_dense_product_examples(rng):
    v = rng.standard_normal(5)
    out = tensor_product_dense(np.array([[2.0]]), v, 2)
    np.testing.assert_allclose(out[0], 2.0 * v, atol=1e-14)
    w = rng.standard_normal(3)
    np.testing.assert_allclose(tensor_product_dense(w, w, 1), np.zeros((1, 3)), atol=1e-15)
