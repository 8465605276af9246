import functools
import itertools
import math

import numpy as np
import pytest

from equistream.core.errors import PreconditionError, SelectionRuleError, UnsupportedDegreeError
from equistream.core.so3.clebsch_gordan import (
    cg_real,
    complex_cg,
    complex_to_real,
    triangle,
    valid_paths,
    wigner_6j,
)
from equistream.core.so3.harmonics import solid_harmonics
from equistream.macros import gm


@pytest.mark.P0
def test_known_complex_values():
    assert complex_cg(1, 0, 1, 0, 2, 0) == pytest.approx(math.sqrt(2 / 3), abs=1e-15)
    assert complex_cg(1, 1, 1, -1, 0, 0) == pytest.approx(1 / math.sqrt(3), abs=1e-15)
    assert complex_cg(1, 0, 1, 0, 1, 0) == 0.0
    assert complex_cg(1, 1, 1, 1, 2, 1) == 0.0


@pytest.mark.P0
def test_complex_rejects_half_integers_and_bad_orders():
    with pytest.raises(PreconditionError):
        complex_cg(0.5, 0.5, 0.5, -0.5, 0, 0)
    with pytest.raises(PreconditionError):
        complex_cg(1, 2, 1, 0, 2, 2)


@pytest.mark.P0
def test_real_table_zonal_entry():
    table = cg_real(1, 1, 2)
    assert table.coeffs.shape == (3, 3, 5)
    assert table.coeffs[1, 1, 2] == pytest.approx(math.sqrt(2 / 3), abs=1e-15)


@pytest.mark.P0
def test_real_table_selection_rules():
    with pytest.raises(SelectionRuleError):
        cg_real(1, 1, 3)
    with pytest.raises(UnsupportedDegreeError):
        cg_real(gm.L_MAX + 1, 1, gm.L_MAX)


@pytest.mark.P0
def test_complex_to_real_is_unitary():
    for l in range(gm.L_MAX + 1):
        q = complex_to_real(l)
        np.testing.assert_allclose(q @ q.conj().T, np.eye(2 * l + 1), atol=1e-15)


@pytest.mark.P0
def test_real_tables_are_real_and_unitary():
    for l1, l2, lo in valid_paths(gm.L_MAX):
        table = cg_real(l1, l2, lo)
        assert table.imag_residue < 1e-12
        c = table.coeffs.reshape(-1, 2 * lo + 1)
        np.testing.assert_allclose(c.T @ c, np.eye(2 * lo + 1), atol=1e-12)
        assert table.normalization == pytest.approx(2 * lo + 1, abs=1e-11)


@pytest.mark.P0
def test_tables_are_read_only():
    table = cg_real(2, 1, 2)
    with pytest.raises(ValueError):
        table.coeffs[0, 0, 0] = 1.0


@pytest.mark.P0
def test_stretched_coupling_of_harmonics_is_proportional(rng):
    """Coupling two harmonics of the same vector to the top degree gives a fixed multiple of that harmonic."""
    r = rng.standard_normal((40, 3))
    for l1, l2 in [(1, 1), (1, 2), (2, 2), (1, 3)]:
        table = cg_real(l1, l2, l1 + l2).coeffs
        coupled = np.einsum('pi,pj,ijk->pk', solid_harmonics(l1, r), solid_harmonics(l2, r), table)
        target = solid_harmonics(l1 + l2, r)
        ratio = np.sum(coupled * target, axis=-1) / np.sum(target * target, axis=-1)
        assert np.ptp(ratio) < 1e-12
        np.testing.assert_allclose(coupled, ratio[:, None] * target, atol=1e-11)


@pytest.mark.P0
def test_valid_paths_respect_triangle():
    paths = list(valid_paths(2))
    assert (1, 1, 2) in paths and (1, 1, 0) in paths
    assert all(triangle(*p) for p in paths)
    assert all(lo <= 1 for _, _, lo in valid_paths(2, 2, 1))


@pytest.mark.P0
def test_6j_known_values():
    assert wigner_6j(1, 1, 1, 1, 1, 1) == pytest.approx(1 / 6, abs=1e-15)
    assert wigner_6j(2, 2, 2, 2, 2, 2) == pytest.approx(-3 / 70, abs=1e-15)
    assert wigner_6j(1, 1, 3, 1, 1, 1) == 0.0


@pytest.mark.P0
def test_6j_symmetries():
    js = (1, 2, 2, 2, 1, 2)
    base = wigner_6j(*js)
    upper, lower = js[:3], js[3:]
    for perm in itertools.permutations(range(3)):
        assert wigner_6j(*[upper[p] for p in perm], *[lower[p] for p in perm]) == pytest.approx(base, abs=1e-14)
    swapped = (lower[0], lower[1], upper[2], upper[0], upper[1], lower[2])
    assert wigner_6j(*swapped) == pytest.approx(base, abs=1e-14)


@pytest.mark.P0
def test_6j_orthogonality():
    for j6, j6p in itertools.product(range(3), repeat=2):
        total = sum(
            (2 * x + 1) * (2 * j6 + 1) * wigner_6j(1, 2, x, 2, 1, j6) * wigner_6j(1, 2, x, 2, 1, j6p) for x in range(5)
        )
        assert total == pytest.approx(1.0 if j6 == j6p else 0.0, abs=1e-12)


@pytest.mark.P0
def test_6j_rejects_negative_and_half_integer():
    with pytest.raises(PreconditionError):
        wigner_6j(-1, 1, 1, 1, 1, 1)
    with pytest.raises(PreconditionError):
        wigner_6j(0.5, 0.5, 1, 0.5, 0.5, 1)


def spin_operators(j):
    """``J_z`` and ``J_+`` of spin ``j`` in the m-descending basis."""
    m = np.arange(j, -j - 1, -1, dtype=np.float64)
    raise_op = np.zeros((2 * j + 1, 2 * j + 1))
    for i in range(1, 2 * j + 1):
        raise_op[i - 1, i] = math.sqrt(j * (j + 1) - m[i] * (m[i] + 1))
    return np.diag(m), raise_op


@functools.lru_cache(maxsize=None)
def coupled_states(j1, j2, J):
    """States ``|J M>`` in the product basis, by diagonalizing ``J^2`` at ``M = J`` and lowering.

    The sign is fixed by ``<j1 j1; j2 J-j1 | J J> > 0``. Product index is ``(j1 - m1) * (2 j2 + 1) + (j2 - m2)``.
    """
    z1, p1 = spin_operators(j1)
    z2, p2 = spin_operators(j2)
    e1, e2 = np.eye(2 * j1 + 1), np.eye(2 * j2 + 1)
    jz = np.kron(z1, e2) + np.kron(e1, z2)
    jp = np.kron(p1, e2) + np.kron(e1, p2)
    jm = jp.T
    total = jz @ jz + (jp @ jm + jm @ jp) / 2
    m1s = np.repeat(np.arange(j1, -j1 - 1, -1), 2 * j2 + 1)
    m2s = np.tile(np.arange(j2, -j2 - 1, -1), 2 * j1 + 1)
    top = np.flatnonzero(m1s + m2s == J)
    values, vectors = np.linalg.eigh(total[np.ix_(top, top)])
    state = np.zeros(len(m1s))
    state[top] = vectors[:, np.argmin(np.abs(values - J * (J + 1)))]
    anchor = np.flatnonzero((m1s == j1) & (m2s == J - j1))[0]
    if state[anchor] < 0:
        state = -state
    states = {J: state}
    for M in range(J, -J, -1):
        states[M - 1] = jm @ states[M] / math.sqrt(J * (J + 1) - M * (M - 1))
    return states


def brute_force_cg(j1, m1, j2, m2, J, M):
    if m1 + m2 != M or abs(M) > J:
        return 0.0
    return float(coupled_states(j1, j2, J)[M][(j1 - m1) * (2 * j2 + 1) + (j2 - m2)])


@pytest.mark.P0
def test_complex_cg_matches_diagonalization():
    assert brute_force_cg(1, 0, 1, 0, 0, 0) == pytest.approx(-1 / math.sqrt(3), abs=1e-12)
    assert complex_cg(1, 0, 1, 0, 0, 0) == pytest.approx(brute_force_cg(1, 0, 1, 0, 0, 0), abs=1e-12)
    for j1, j2 in [(1, 1), (2, 1), (1, 2), (2, 2), (3, 1)]:
        for J in range(abs(j1 - j2), j1 + j2 + 1):
            for m1, m2 in itertools.product(range(-j1, j1 + 1), range(-j2, j2 + 1)):
                M = m1 + m2
                if abs(M) > J:
                    continue
                want = brute_force_cg(j1, m1, j2, m2, J, M)
                assert complex_cg(j1, m1, j2, m2, J, M) == pytest.approx(want, abs=1e-12)


@pytest.mark.P0
def test_coupling_with_scalar_is_identity():
    for j in range(gm.L_MAX + 1):
        assert complex_cg(j, 0, 0, 0, j, 0) == pytest.approx(1.0, abs=1e-15)
        for m in range(-j, j + 1):
            assert complex_cg(j, m, 0, 0, j, m) == pytest.approx(1.0, abs=1e-15)


@pytest.mark.P0
def test_real_table_is_symmetric_traceless_projection():
    """``(a (x) b)^2`` of two vectors is the symmetric traceless part of ``a b^T`` in the degree-2 basis."""
    c = math.sqrt(3 / (4 * math.pi))
    s = np.array([[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [-1.0, 0.0, 0.0]])
    a, b = math.sqrt(15 / (4 * math.pi)) / 2, math.sqrt(15 / (16 * math.pi))
    z = math.sqrt(5 / (16 * math.pi))
    forms = np.array(
        [
            [[0, a, 0], [a, 0, 0], [0, 0, 0]],
            [[0, 0, 0], [0, 0, a], [0, a, 0]],
            [[-z, 0, 0], [0, -z, 0], [0, 0, 2 * z]],
            [[0, 0, -a], [0, 0, 0], [-a, 0, 0]],
            [[b, 0, 0], [0, -b, 0], [0, 0, 0]],
        ]
    )
    table = cg_real(1, 1, 2).coeffs
    cartesian = np.einsum('pi,ijM,jq->Mpq', s.T, table, s) * c * c
    for m in range(5):
        np.testing.assert_allclose(cartesian[m], cartesian[m].T, atol=1e-15)
        assert np.trace(cartesian[m]) == pytest.approx(0.0, abs=1e-15)
    kappa = np.sum(cartesian * forms) / np.sum(forms * forms)
    np.testing.assert_allclose(cartesian, kappa * forms, atol=1e-14)
    np.testing.assert_allclose(np.linalg.norm(table.reshape(9, 5), axis=0), 1.0, atol=1e-14)
    eye = np.eye(3)
    projector = (np.einsum('pr,qs->pqrs', eye, eye) + np.einsum('ps,qr->pqrs', eye, eye)) / 2
    projector -= np.einsum('pq,rs->pqrs', eye, eye) / 3
    unit = table.transpose(2, 0, 1)
    basis = np.einsum('pi,Mij,jq->Mpq', s.T, unit, s)
    np.testing.assert_allclose(np.einsum('Mpq,Mrs->pqrs', basis, basis), projector, atol=1e-14)


def brute_force_6j(j1, j2, j12, j3, J, j23):
    """``{j1 j2 j12; j3 J j23}`` from the overlap of the two coupling orders of three spins at ``M = J``."""
    overlap = 0.0
    for m1, m2 in itertools.product(range(-j1, j1 + 1), range(-j2, j2 + 1)):
        m3 = J - m1 - m2
        if abs(m3) > j3:
            continue
        left = brute_force_cg(j1, m1, j2, m2, j12, m1 + m2) * brute_force_cg(j12, m1 + m2, j3, m3, J, J)
        right = brute_force_cg(j2, m2, j3, m3, j23, m2 + m3) * brute_force_cg(j1, m1, j23, m2 + m3, J, J)
        overlap += left * right
    return (-1) ** (j1 + j2 + j3 + J) * overlap / math.sqrt((2 * j12 + 1) * (2 * j23 + 1))


@pytest.mark.P0
def test_6j_matches_cg_contraction():
    assert brute_force_6j(1, 1, 1, 1, 1, 1) == pytest.approx(1 / 6, abs=1e-12)
    for j1, j2, j3, J in itertools.product(range(3), repeat=4):
        for j12 in range(abs(j1 - j2), j1 + j2 + 1):
            for j23 in range(abs(j2 - j3), j2 + j3 + 1):
                if not (triangle(j12, j3, J) and triangle(j1, j23, J)):
                    continue
                want = brute_force_6j(j1, j2, j12, j3, J, j23)
                assert wigner_6j(j1, j2, j12, j3, J, j23) == pytest.approx(want, abs=1e-12)


@pytest.mark.P0
def test_6j_with_a_zero_entry():
    for j, jp, J in itertools.product(range(4), repeat=3):
        want = (-1) ** (j + jp + J) / math.sqrt((2 * j + 1) * (2 * J + 1)) if triangle(jp, j, J) else 0.0
        assert wigner_6j(0, j, j, jp, J, J) == pytest.approx(want, abs=1e-14)
        for other in range(4):
            if other != J:
                assert wigner_6j(0, j, j, jp, J, other) == 0.0
