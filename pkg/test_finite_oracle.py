"""
Tests for the finite-dimensional ground truth: unitary parts, splittings and limit sampling
"""
import math
from typing import Tuple

import numpy as np
import pytest
from scipy import linalg
from scipy.stats import unitary_group

from app.spectral.claims import EMPIRICAL
from app.spectral.finite_oracle import (
    DECAY_STEPS,
    SCOPE_NOTE,
    analyze_batch,
    classify_finite,
    decay_oracle,
    sample_limit_operators,
    unitary_part,
)
from app.validation import LabError


def rotation_plus_half() -> np.ndarray:
    angle = 2.0 * math.pi * 0.3
    matrix = np.zeros((3, 3))
    matrix[:2, :2] = [[math.cos(angle), -math.sin(angle)], [math.sin(angle), math.cos(angle)]]
    matrix[2, 2] = 0.5
    return matrix


def planted(rng, dimension: int, rank: int) -> Tuple[np.ndarray, np.ndarray]:
    """Q (U + C) Q* with a unitary block of size ``rank`` and a strict contraction block, and Q[:, :rank]"""
    blocks = []
    if rank:
        blocks.append(unitary_group.rvs(rank, random_state=rng) if rank > 1
                      else np.array([[np.exp(2j * np.pi * rng.uniform())]]))
    rest = dimension - rank
    if rest:
        c = rng.normal(size=(rest, rest)) + 1j * rng.normal(size=(rest, rest))
        blocks.append(0.9 * c / np.linalg.norm(c, 2))
    q = unitary_group.rvs(dimension, random_state=rng) if dimension > 1 else np.eye(1)
    return q @ linalg.block_diag(*blocks) @ q.conj().T, q[:, :rank]


def test_rotation_plus_half_splits():
    analysis = unitary_part(rotation_plus_half())
    assert analysis.unitary_rank == 2
    assert analysis.unitary_defect <= 1e-9
    np.testing.assert_allclose(np.abs(analysis.unitary_eigenvalues), [1.0, 1.0], atol=1e-9)
    splitting = classify_finite(rotation_plus_half())
    assert splitting.flight_basis.shape[1] == 1
    assert splitting.h_m_basis.shape[1] == 0
    assert splitting.decay <= 1e-100
    report = splitting.to_report()
    assert report["analysis"]["scope"] == SCOPE_NOTE
    assert report["h_w_rank"] == 1


def test_jordan_block_has_no_unitary_part():
    jordan = np.array([[0.9, 0.1], [0.0, 0.9]])
    splitting = classify_finite(jordan)
    assert splitting.analysis.unitary_rank == 0
    assert splitting.flight_basis.shape[1] == 2
    assert splitting.decay <= 1e-10


def test_planted_unitary_parts_are_recovered():
    rng = np.random.default_rng(21)
    cases = []
    for _ in range(200):
        dimension = int(rng.integers(1, 5))
        rank = int(rng.integers(0, dimension + 1))
        cases.append((planted(rng, dimension, rank)[0], rank))
    results = analyze_batch([m for m, _ in cases], n_jobs=1)
    for (matrix, rank), splitting in zip(cases, results):
        analysis = splitting.analysis
        assert analysis.unitary_rank == rank
        assert analysis.unitary_defect <= 1e-8
        np.testing.assert_allclose(np.abs(analysis.unitary_eigenvalues), np.ones(rank), atol=1e-8)
        assert splitting.flight_basis.shape[1] == matrix.shape[0] - rank
        assert splitting.decay <= 1e-10
        if rank and rank < matrix.shape[0]:
            # the two parts are orthogonal
            overlap = analysis.unitary_basis.conj().T @ analysis.cnu_basis
            assert np.abs(overlap).max() <= 1e-8


def test_decay_oracle_on_empty_basis():
    assert decay_oracle(np.eye(2), np.zeros((2, 0))) == 0.0


def test_finite_oracle_rejects_expansions():
    with pytest.raises(LabError):
        unitary_part(np.array([[1.1]]))


def test_periodic_limit_sample():
    matrix = np.diag([1j, -1.0])
    sample = sample_limit_operators(matrix, 64)
    # powers repeat with period 4, so each residue class is one cluster
    assert sorted(int(p) % 4 for p in sample.powers) == [0, 1, 2, 3]
    assert np.abs(sample.radii).max() <= 1e-9
    for power, representative in zip(sample.powers, sample.representatives):
        np.testing.assert_allclose(representative, np.linalg.matrix_power(matrix, int(power)), atol=1e-10)
    assert sample.to_report()["clusters"] == 4


def test_irrational_rotation_limit_sample_covers_the_circle():
    alpha = math.sqrt(2.0) - 1.0
    sample = sample_limit_operators(np.array([[np.exp(2j * np.pi * alpha)]]), 200, threshold=0.1)
    assert len(sample.representatives) > 4
    assert sample.coverage() <= 0.1


def test_limit_sampling_needs_a_unitary():
    with pytest.raises(LabError):
        sample_limit_operators(np.diag([0.5, 1.0]), 10)
    with pytest.raises(LabError):
        sample_limit_operators(np.eye(2), 0)


def test_eight_dimensional_contractions_against_the_decay_oracle():
    rng = np.random.default_rng(500)
    cases = []
    for _ in range(100):
        rank = int(rng.integers(0, 9))
        matrix, basis = planted(rng, 8, rank)
        cases.append((matrix, basis, rank))
    results = analyze_batch([m for m, _, _ in cases], n_jobs=1)
    for (matrix, basis, rank), splitting in zip(cases, results):
        assert splitting.analysis.unitary_rank == rank
        assert splitting.h_w_basis.shape[1] == 8 - rank
        assert decay_oracle(matrix, splitting.h_w_basis, DECAY_STEPS) <= 1e-6
        if 0 < rank:
            angles = linalg.subspace_angles(splitting.analysis.unitary_basis, basis)
            assert angles.max() <= 1e-7


def test_decay_is_reported_as_an_observation():
    splitting = classify_finite(rotation_plus_half(), steps=40)
    report = splitting.to_report()
    assert report["decay"]["tier"] == EMPIRICAL
    assert report["decay"]["bound"] is None
    assert report["parameters"]["decay_steps"] == 40
