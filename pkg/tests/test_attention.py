import numpy as np
import pytest

from equistream.core.attention import (
    AggregationStats,
    NeighborIndex,
    QKProjection,
    RadialScalars,
    ValueProjection,
    attention_weights,
    create_radial,
    dense_reference_aggregate,
    load_fixture,
    project_qk,
    project_values,
    random_fixture,
    save_fixture,
    score,
    stream_aggregate,
    weighted_aggregate,
)
from equistream.core.config import RadialCfg
from equistream.core.errors import PreconditionError, ShapeMismatchError
from equistream.core.so3.irreps import IrrepsFeature, IrrepsSpec
from equistream.core.so3.rotation import Rotation, rotate_feature

FLAT = RadialScalars(bias=lambda r: np.zeros_like(r), gate=lambda r: np.ones_like(r))


def fixture_args(f):
    return f.q, f.k, f.values, f.idx


@pytest.mark.P0
def test_matches_dense_reference():
    for seed in range(5):
        f = random_fixture(64, 16, 4, 8, 5, seed)
        radial = create_radial(RadialCfg(bias='distance', gate='cosine'))
        stream = stream_aggregate(*fixture_args(f), radial=radial)
        dense = dense_reference_aggregate(*fixture_args(f), radial=radial)
        np.testing.assert_allclose(stream, dense, rtol=0, atol=1e-12)


@pytest.mark.P0
def test_single_precision_inputs():
    f = random_fixture(64, 16, 4, 8, 5, 3, dtype=np.float32)
    stream = stream_aggregate(*fixture_args(f))
    dense = dense_reference_aggregate(*[a.astype(np.float64) for a in (f.q, f.k, f.values)], f.idx)
    assert stream.dtype == np.float64
    np.testing.assert_allclose(stream, dense, rtol=1e-5, atol=1e-6)


@pytest.mark.P0
def test_single_neighbor_takes_gated_value():
    table = np.array([[-1, 1, -1], [0, -1, -1]])
    distances = np.array([[0.0, 2.0, 0.0], [3.0, 0.0, 0.0]])
    idx = NeighborIndex(table, distances)
    rng = np.random.default_rng(0)
    q, k = 1e3 * rng.standard_normal((2, 4)), rng.standard_normal((2, 4))
    values = rng.standard_normal((2, 3))
    radial = create_radial(RadialCfg(r_cut=6.0))
    out = stream_aggregate(q, k, values, idx, radial)
    np.testing.assert_allclose(out[0], radial.gate(np.array(2.0)) * values[1], atol=1e-15)
    np.testing.assert_allclose(out[1], radial.gate(np.array(3.0)) * values[0], atol=1e-15)


@pytest.mark.P0
def test_uniform_scores_give_mean():
    idx = NeighborIndex(np.array([[1, 2, 3], [0, -1, -1], [0, -1, -1], [0, -1, -1]]))
    values = np.arange(12, dtype=np.float64).reshape(4, 3)
    zeros = np.zeros((4, 2))
    out = stream_aggregate(zeros, zeros, values, idx, FLAT)
    np.testing.assert_allclose(out[0], values[1:].mean(axis=0), atol=1e-14)


@pytest.mark.P0
def test_isolated_rows_get_zero():
    f = random_fixture(16, 4, 2, 3, 2, 1, fill=[0, 4] * 8)
    stats = AggregationStats()
    out = stream_aggregate(*fixture_args(f), stats=stats)
    assert stats.isolated == list(range(0, 16, 2))
    assert not np.any(out[::2])
    assert np.all(np.isfinite(out))


@pytest.mark.P0
def test_padding_and_slot_order_are_neutral(rng):
    f = random_fixture(32, 8, 2, 4, 3, 7)
    base = stream_aggregate(*fixture_args(f))
    padded = stream_aggregate(f.q, f.k, f.values, f.idx.pad(5))
    np.testing.assert_allclose(padded, base, rtol=0, atol=1e-15)
    dense = dense_reference_aggregate(*fixture_args(f))
    np.testing.assert_array_equal(dense_reference_aggregate(f.q, f.k, f.values, f.idx.pad(5)), dense)
    shuffled = stream_aggregate(f.q, f.k, f.values, f.idx.permute_rows(rng))
    np.testing.assert_allclose(shuffled, base, atol=1e-12)


@pytest.mark.P0
def test_large_score_shift_is_stable():
    f = random_fixture(32, 8, 2, 4, 3, 11)
    shifted = RadialScalars(bias=lambda r: np.full_like(r, 1e4), gate=lambda r: np.ones_like(r))
    base = stream_aggregate(*fixture_args(f), radial=FLAT)
    out = stream_aggregate(*fixture_args(f), radial=shifted)
    assert np.all(np.isfinite(out))
    np.testing.assert_allclose(out, base, atol=1e-10)


@pytest.mark.P0
def test_weights_are_a_softmax():
    f = random_fixture(32, 8, 3, 4, 2, 5)
    alpha = attention_weights(f.q, f.k, f.idx)
    assert alpha.shape == (32, 8, 3)
    assert np.all(alpha[~f.idx.mask] == 0.0)
    sums = alpha.sum(axis=1)
    rows = f.idx.counts > 0
    np.testing.assert_allclose(sums[rows], 1.0, atol=1e-14)
    assert np.all(sums[~rows] == 0.0)


@pytest.mark.P0
def test_weighted_aggregate_matches_reference():
    f = random_fixture(32, 8, 1, 4, 2, 9)
    radial = FLAT
    alpha = attention_weights(f.q[:, 0], f.k[:, 0], f.idx, radial)
    out = weighted_aggregate(f.values[:, 0], alpha, f.idx)
    reference = dense_reference_aggregate(f.q[:, 0], f.k[:, 0], f.values[:, 0], f.idx, radial)
    np.testing.assert_allclose(out, reference, atol=1e-13)


@pytest.mark.P0
def test_streaming_memory_does_not_grow_with_k():
    peaks = []
    for k in (4, 16, 64):
        f = random_fixture(32, k, 2, 4, 3, 0, fill=[k] * 32)
        stats = AggregationStats()
        stream_aggregate(*fixture_args(f), stats=stats)
        peaks.append(stats.peak_elems)
    assert peaks[0] == peaks[1] == peaks[2]
    stats = AggregationStats()
    dense_reference_aggregate(*fixture_args(f), stats=stats)
    assert stats.peak_elems > peaks[-1]


@pytest.mark.P0
def test_score_examples():
    e1 = np.array([1.0, 0.0, 0.0])
    linear = RadialScalars(bias=lambda r: r, gate=lambda r: np.ones_like(r))
    assert score(e1, e1, 2.0, linear, tau=1.0) == pytest.approx(3.0)
    assert score(e1, np.array([0.0, 1.0, 0.0]), 1.0, create_radial()) == 0.0
    with pytest.raises(PreconditionError):
        score(e1, e1, 0.0)


@pytest.mark.P0
def test_unknown_radial_function():
    with pytest.raises(KeyError):
        create_radial(RadialCfg(bias='unknown'))
    with pytest.raises(KeyError):
        create_radial(RadialCfg(gate='unknown'))


@pytest.mark.P0
def test_neighbor_index_validation():
    with pytest.raises(PreconditionError):
        NeighborIndex(np.array([[0, 5]]))
    with pytest.raises(ShapeMismatchError):
        NeighborIndex(np.array([0, 1]))
    with pytest.raises(ShapeMismatchError):
        NeighborIndex(np.array([[0, -1]]), np.zeros((1, 3)))
    idx = NeighborIndex(np.array([[1, -1], [-1, -1]]))
    assert idx.counts.tolist() == [1, 0]
    assert idx.rows([1]).num_sources == 2


@pytest.mark.P0
def test_shape_mismatch_is_reported():
    f = random_fixture(8, 4, 2, 3, 2, 0)
    with pytest.raises(ShapeMismatchError):
        stream_aggregate(f.q[:4], f.k, f.values, f.idx)


@pytest.mark.P0
def test_identity_projection_concatenates_blocks(rng):
    spec = IrrepsSpec.parse('1x0+1x1')
    h = IrrepsFeature.random(spec, rng)
    proj = QKProjection.identity(spec)
    q, k = project_qk(h, proj)
    expected = np.concatenate([h[0][0], h[0][0], h[1][0], h[1][0]])
    assert proj.d_k == 8
    np.testing.assert_allclose(q[0], expected)
    np.testing.assert_allclose(k[0], expected)


@pytest.mark.P0
def test_projected_scores_are_invariant(rng):
    spec = IrrepsSpec.parse('4x0+3x1+2x2')
    proj = QKProjection.random(spec, rng, heads=3, width=2)
    h = IrrepsFeature.random(spec, rng, (6,))
    rot = Rotation.random(rng)
    q, k = project_qk(h, proj)
    qr, kr = project_qk(rotate_feature(h, rot), proj)
    np.testing.assert_allclose(np.einsum('ihd,jhd->ijh', qr, kr), np.einsum('ihd,jhd->ijh', q, k), atol=1e-10)


@pytest.mark.P0
def test_value_projection_commutes_with_rotation(rng):
    spec = IrrepsSpec.parse('2x0+3x1')
    proj = ValueProjection.random(spec, rng, width=4)
    h = IrrepsFeature.random(spec, rng, (5,))
    rot = Rotation.random(rng)
    left = project_values(rotate_feature(h, rot), proj)
    right = rotate_feature(project_values(h, proj), rot)
    assert str(left.spec) == '4x0+4x1'
    assert left.allclose(right, 1e-12)


@pytest.mark.P0
def test_projection_spec_mismatch(rng):
    h = IrrepsFeature.random(IrrepsSpec.parse('1x0'), rng)
    with pytest.raises(ShapeMismatchError):
        project_qk(h, QKProjection.identity(IrrepsSpec.parse('2x0')))


@pytest.mark.P0
def test_fixture_round_trip(tmp_path):
    f = random_fixture(10, 4, 2, 3, 2, 42)
    path = str(tmp_path / 'fixture.npz')
    save_fixture(path, f)
    loaded = load_fixture(path)
    assert loaded.seed == 42
    assert loaded.shape == f.shape
    np.testing.assert_array_equal(loaded.idx.table, f.idx.table)
    np.testing.assert_array_equal(stream_aggregate(*fixture_args(loaded)), stream_aggregate(*fixture_args(f)))
