"""Sanity checks for the test oracles themselves."""

import numpy as np
import pytest

from oracles import jacobi_eigh, jacobi_largest, naive_total_harvest


def random_hermitian_psd(rng, m, rank=None):
    rank = m if rank is None else rank
    b = rng.standard_normal((m, rank)) + 1j * rng.standard_normal((m, rank))
    a = b @ b.conj().T
    return 0.5 * (a + a.conj().T)


def test_jacobi_2x2_analytic():
    # [[2, i], [-i, 2]] has eigenvalues 1 and 3 with known eigenvectors.
    a = np.array([[2.0, 1j], [-1j, 2.0]])
    values, vectors = jacobi_eigh(a)
    assert values == pytest.approx([1.0, 3.0], abs=1e-12)
    for i in range(2):
        res = a @ vectors[:, i] - values[i] * vectors[:, i]
        assert np.linalg.norm(res) < 1e-12


def test_jacobi_diagonal_matrix():
    a = np.diag([3.0, 1.0, 2.0]).astype(complex)
    values, vectors = jacobi_eigh(a)
    assert values == pytest.approx([1.0, 2.0, 3.0])
    assert np.allclose(np.abs(vectors), np.eye(3)[:, [1, 2, 0]])


def test_jacobi_matches_lapack_on_random_matrices():
    rng = np.random.default_rng(7)
    for m in (1, 2, 3, 5, 8):
        for _ in range(20):
            a = random_hermitian_psd(rng, m)
            values, vectors = jacobi_eigh(a)
            expected = np.linalg.eigvalsh(a)
            assert values == pytest.approx(expected, rel=1e-10, abs=1e-10)
            recon = vectors @ np.diag(values) @ vectors.conj().T
            assert np.linalg.norm(recon - a) < 1e-10 * max(1.0, np.linalg.norm(a))
            assert np.linalg.norm(vectors.conj().T @ vectors - np.eye(m)) < 1e-12


def test_jacobi_largest_orders_correctly():
    rng = np.random.default_rng(11)
    a = random_hermitian_psd(rng, 4)
    lam, vec = jacobi_largest(a)
    assert lam == pytest.approx(float(np.max(np.linalg.eigvalsh(a))), rel=1e-11)
    assert np.linalg.norm(a @ vec - lam * vec) < 1e-10


def test_naive_harvest_single_term():
    # One AP, one device, hand-computed |w^T h|^2.
    beams = [[[1.0 + 0j, 2.0 + 0j]]]
    selection = [[1]]
    channels = [[[0.5 + 0j, 0.25 + 0j]]]
    # w^T h = 0.5 + 0.5 = 1.0, harvest = 0.7 * 1.0
    assert naive_total_harvest(beams, selection, channels, [0.7]) == pytest.approx(0.7)


def test_naive_harvest_selection_masks_terms():
    beams = [[[1.0 + 0j], [3.0 + 0j]]]
    channels = [[[1.0 + 0j], [1.0 + 0j]]]
    on = naive_total_harvest(beams, [[1, 1]], channels, [1.0, 1.0])
    off = naive_total_harvest(beams, [[1, 0]], channels, [1.0, 1.0])
    # Each device receives both beams when enabled: 2 * (1 + 9) vs 2 * 1.
    assert on == pytest.approx(20.0)
    assert off == pytest.approx(2.0)
