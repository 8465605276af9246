import numpy as np
import pytest

from equistream.core.config import EAASCfg
from equistream.core.eaas import (
    alignment_rotation,
    apply_reindex,
    build_reindex_rule,
    dump_reindex_rules,
    eaas_madds,
    eaas_tensor_product,
    pole_residual,
    r_mag_factor,
    survivors,
)
from equistream.core.eaas.reindex import reindex_manifest
from equistream.core.errors import DegenerateDirectionError, SelectionRuleError
from equistream.core.so3.clebsch_gordan import valid_paths
from equistream.core.so3.harmonics import Y00, solid_harmonics
from equistream.core.so3.product import dense_madds, tensor_product_dense
from equistream.core.so3.rotation import L1_AXIS_MAP, rotate_block, wigner_d
from equistream.core.util.stats import OpStats
from equistream.macros import gm


def dense(h, r, lf, lo):
    return tensor_product_dense(h, solid_harmonics(lf, r)[..., None, :], lo)


@pytest.mark.P0
def test_alignment_on_axis():
    up = alignment_rotation([0.0, 0.0, 5.0])
    np.testing.assert_array_equal(up.rotation.matrix, np.eye(3))
    down = alignment_rotation([0.0, 0.0, -1.0])
    np.testing.assert_allclose(down.rotation.apply([0.0, 0.0, -1.0]), [0.0, 0.0, 1.0], atol=1e-15)
    assert np.trace(down.rotation.matrix) == pytest.approx(-1.0)


@pytest.mark.P0
def test_alignment_maps_onto_positive_z(rng):
    r = rng.standard_normal((500, 3))
    r[:5] = [[1e-9, 0, -1], [0, 1e-12, 1], [1, 0, 0], [0, 0, -3], [-1e-7, 1e-7, -2]]
    aligned = alignment_rotation(r).rotation.apply(r)
    norms = np.linalg.norm(r, axis=-1)
    np.testing.assert_allclose(aligned, np.stack([0 * norms, 0 * norms, norms], axis=-1), atol=1e-12)


@pytest.mark.P0
def test_aligned_harmonics_are_zonal(rng):
    r = rng.standard_normal((200, 3))
    for l in range(gm.L_MAX + 1):
        assert pole_residual(l, r) < 1e-12


@pytest.mark.P0
def test_alignment_round_trip(rng):
    r = rng.standard_normal(3)
    rot = alignment_rotation(r).rotation
    h = rng.standard_normal((3, 7))
    d = wigner_d(3, rot).matrix
    np.testing.assert_allclose(rotate_block(rotate_block(h, d), d.T), h, atol=1e-12)


@pytest.mark.P0
def test_degenerate_direction():
    with pytest.raises(DegenerateDirectionError):
        alignment_rotation([0.0, 0.0, 1e-10])
    with pytest.raises(DegenerateDirectionError):
        alignment_rotation(np.zeros((2, 3)))


@pytest.mark.P0
def test_worked_rules():
    rule = build_reindex_rule(1, 1, 0)
    assert [(e.m_out, e.m_in) for e in rule.entries] == [(0, 0)]
    odd = build_reindex_rule(1, 1, 1)
    assert odd.parity == 1
    assert odd.entry(0) is None
    assert sorted((e.m_out, e.m_in) for e in odd.entries) == [(-1, 1), (1, -1)]


@pytest.mark.P0
def test_rules_cover_every_pole_coefficient():
    for path in valid_paths(gm.L_MAX):
        rule = build_reindex_rule(*path)
        assert sorted((e.m_in, e.m_out) for e in rule.entries) == sorted(survivors(*path))
        for e in rule.entries:
            assert e.m_in == (e.m_out if rule.parity == 0 else -e.m_out)


@pytest.mark.P0
def test_triangle_violation_gives_empty_rule():
    assert build_reindex_rule(1, 1, 3).entries == ()


@pytest.mark.P0
def test_apply_reindex_examples(rng):
    rule = build_reindex_rule(1, 1, 1)
    assert not np.any(apply_reindex(rule, np.zeros((2, 3))))
    only_zonal = np.zeros((2, 3))
    only_zonal[:, 1] = rng.standard_normal(2)
    assert not np.any(apply_reindex(rule, only_zonal, 3.0))


@pytest.mark.P0
def test_apply_reindex_matches_on_axis_dense(rng):
    for li, lf, lo in valid_paths(gm.L_MAX):
        h = rng.standard_normal((3, 2 * li + 1))
        on_axis = np.array([0.0, 0.0, 1.7])
        out = apply_reindex(build_reindex_rule(li, lf, lo), h, r_mag_factor(on_axis, lf))
        np.testing.assert_allclose(out, tensor_product_dense(h, solid_harmonics(lf, on_axis), lo), atol=1e-12)


@pytest.mark.P0
def test_matches_dense_product(rng):
    for li, lf, lo in valid_paths(gm.L_MAX):
        h = rng.standard_normal((40, 2, 2 * li + 1))
        r = rng.standard_normal((40, 3))
        np.testing.assert_allclose(eaas_tensor_product(h, r, lf, lo), dense(h, r, lf, lo), atol=1e-10)


@pytest.mark.P0
def test_scalar_filter_is_identity_coupling(rng):
    h = rng.standard_normal((2, 5))
    for r in rng.standard_normal((3, 3)):
        np.testing.assert_allclose(eaas_tensor_product(h, r, 0, 2), Y00 * h, atol=1e-14)


@pytest.mark.P0
def test_dot_product_invariant(rng):
    ratios = []
    for r in rng.standard_normal((5, 3)):
        h = (L1_AXIS_MAP @ r)[None, :]
        out = eaas_tensor_product(h, r, 1, 0)
        ratios.append(out[0, 0] / (r @ r))
    np.testing.assert_allclose(ratios, ratios[0], rtol=1e-12)
    assert ratios[0] == pytest.approx(float(dense((L1_AXIS_MAP @ [0, 0, 1.0])[None], [0, 0, 1.0], 1, 0)[0, 0]))


@pytest.mark.P0
def test_zero_direction_falls_back_to_dense(rng):
    h = rng.standard_normal((2, 3))
    np.testing.assert_array_equal(eaas_tensor_product(h, np.zeros(3), 2, 1), np.zeros((2, 3)))
    np.testing.assert_allclose(eaas_tensor_product(h, np.zeros(3), 0, 1), Y00 * h, atol=1e-15)
    hb = rng.standard_normal((4, 2, 3))
    r = rng.standard_normal((4, 3))
    r[2] = 0.0
    np.testing.assert_allclose(eaas_tensor_product(hb, r, 1, 2), dense(hb, r, 1, 2), atol=1e-10)


@pytest.mark.P0
def test_south_pole_directions(rng):
    h = rng.standard_normal((3, 5))
    for r in ([0.0, 0.0, -2.0], [0.0, 0.0, 2.0], [1e-9, -1e-9, -1.0]):
        r = np.array(r)
        np.testing.assert_allclose(eaas_tensor_product(h, r, 2, 3), dense(h, r, 2, 3), atol=1e-10)


@pytest.mark.P0
def test_gauge_independence(rng):
    h = rng.standard_normal((10, 2, 7))
    r = rng.standard_normal((10, 3))
    base = eaas_tensor_product(h, r, 2, 2)
    for azimuth in (0.3, 2.0, -1.1):
        np.testing.assert_allclose(eaas_tensor_product(h, r, 2, 2, EAASCfg(azimuth=azimuth)), base, atol=1e-10)


@pytest.mark.P0
def test_selection_rule_and_shapes(rng):
    with pytest.raises(SelectionRuleError):
        eaas_tensor_product(rng.standard_normal((1, 3)), rng.standard_normal(3), 1, 3)


@pytest.mark.P0
def test_sparse_coupling_does_less_work(rng):
    for li, lf, lo in valid_paths(gm.L_MAX):
        assert eaas_madds(li, lf, lo, 4) <= dense_madds(li, lf, lo, 4)
    stats = OpStats()
    eaas_tensor_product(rng.standard_normal((8, 4, 5)), rng.standard_normal((8, 3)), 2, 2, stats=stats)
    assert stats.by_kind['eaas_tp'] == 8 * eaas_madds(2, 2, 2, 4)


@pytest.mark.P0
def test_correction_reports():
    manifest = reindex_manifest(2)
    assert manifest['1_1_0']['entries'] == 1
    assert manifest['1_1_1']['parity'] == 1
    text = dump_reindex_rules(2)
    assert text.startswith('# path parity')
    assert '1,1,0 0 0 0' in text
