"""
Tests for the Cayley bridge between the cogenerator and the unitary group
"""
import cmath

import numpy as np
import pytest
from scipy import linalg

from app.spectral.cayley import (
    CayleyAngleMap,
    apply_group,
    cogenerator_from_line,
    generator_difference_quotient,
    group_polynomial,
    group_values,
    pushforward_to_line,
    resolvent_powers,
    resolvent_two_ways,
)
from app.spectral.measures import AtomicMeasure, SelfSimilarMeasure
from app.spectral.operators import CyclicUnitary, SparseVector, UnilateralShift
from app.validation import ExcludedPointError, LabError, PrecisionUnreachableError, ShapeMismatchError


def test_angle_map_inverts_and_lands_on_the_circle():
    rng = np.random.default_rng(17)
    angle_map = CayleyAngleMap()
    back = angle_map.inverse()
    assert back.direction == "line_to_circle"
    for _ in range(200):
        theta = float(rng.uniform(0.01, 0.49) if rng.uniform() < 0.5 else rng.uniform(0.51, 0.99))
        lam = angle_map(theta)
        assert float(back(lam)) == pytest.approx(theta, abs=1e-9)
        point = complex(CayleyAngleMap.cayley_point(lam))
        assert abs(point - cmath.exp(2j * cmath.pi * theta)) <= 1e-9
    with pytest.raises(LabError):
        CayleyAngleMap("sideways")


def test_atom_at_one_half_is_refused():
    with pytest.raises(ExcludedPointError):
        pushforward_to_line(AtomicMeasure((("1/2", 1.0),)))
    with pytest.raises(ExcludedPointError):
        pushforward_to_line(AtomicMeasure(((0.5, 0.25), (0.1, 0.75))))


def test_cogenerator_atoms_come_back():
    measure = AtomicMeasure((("1/4", 0.5), ("1/8", 0.5)))
    line = pushforward_to_line(measure)
    assert line.pole_mass == 0.0
    atoms = cogenerator_from_line(line)
    assert abs(atoms[0][0] - 1j) <= 1e-12
    assert abs(atoms[1][0] - cmath.exp(2j * cmath.pi / 8)) <= 1e-12
    assert [w for _, w in atoms] == [0.5, 0.5]


def test_characteristic_function_of_point_masses():
    still = pushforward_to_line(AtomicMeasure(((0.0, 1.0),)))
    assert abs(still.characteristic(5.0, 1e-10).value - 1.0) <= 1e-10
    quarter = pushforward_to_line(AtomicMeasure((("1/4", 1.0),)))
    for t in (0.5, 2.0):
        assert abs(quarter.characteristic(t, 1e-10).value - cmath.exp(1j * t)) <= 1e-9


def test_group_acts_on_an_atom_by_a_phase():
    model = CyclicUnitary(AtomicMeasure((("1/4", 1.0),)))
    e0 = SparseVector.basis(0)
    for t in (0.0, 0.5, 2.0, -3.0):
        value = apply_group(model, t, e0, 1e-10)(e0)
        # lambda = tan(pi / 4) = 1
        assert abs(value.value - cmath.exp(1j * t)) <= 1e-12


def test_group_values_on_cantor():
    line = pushforward_to_line(SelfSimilarMeasure.cantor())
    assert line.pole_mass == 0.0
    values = group_values(line, {0: 1.0}, [0.0, 1.0, 5.0], 1e-8)
    assert abs(values[0].value - 1.0) <= 1e-8
    for value in values:
        assert abs(value.value) <= 1.0 + value.error_bound + 1e-12
        assert value.error_bound <= 1e-8


def test_resolvent_agrees_both_ways_on_cantor():
    cantor = SelfSimilarMeasure.cantor()
    model = CyclicUnitary(cantor)
    e0 = SparseVector.basis(0)
    tol = 1e-6
    comparison = resolvent_two_ways(model, e0, e0, tol)
    expected = 0.5 * (1.0 + cantor.fourier(1, 1e-12).value)
    assert abs(comparison.spectral.value - expected) <= 1e-6
    allowed = comparison.spectral.error_bound + comparison.laplace.error_bound + tol
    assert comparison.discrepancy <= allowed
    assert comparison.horizon > 0
    assert comparison.simpson_points >= 128


def test_resolvent_needs_a_cyclic_unitary():
    e0 = SparseVector.basis(0)
    with pytest.raises(ShapeMismatchError):
        resolvent_two_ways(UnilateralShift(), e0, e0, 1e-6)


def test_generator_quotients_approach_the_target():
    model = CyclicUnitary(SelfSimilarMeasure.cantor())
    e0 = SparseVector.basis(0)
    times = [10.0 ** -k for k in range(9)]
    result = generator_difference_quotient(model, e0, e0, times, 1e-12)
    errors = result.errors
    # |lambda| <= tan(pi / 3) on the Cantor set, so the error is at most t * 3 / 2
    for t, error in zip(times, errors):
        assert error <= 1.5 * t + 1e-10
    assert all(b < a for a, b in zip(errors, errors[1:]))


def test_generator_quotients_reject_bad_times():
    model = CyclicUnitary(SelfSimilarMeasure.cantor())
    e0 = SparseVector.basis(0)
    with pytest.raises(LabError):
        generator_difference_quotient(model, e0, e0, [0.01, 0.1], 1e-8)
    with pytest.raises(LabError):
        generator_difference_quotient(model, e0, e0, [0.0], 1e-8)


@pytest.mark.parametrize("theta, expected", [(0.0, 1.0), ("1/4", 0.5 * (1.0 + 1.0j))], ids=["zero", "quarter"])
def test_resolvent_closed_forms_on_atoms(theta, expected):
    model = CyclicUnitary(AtomicMeasure(((theta, 1.0),)))
    e0 = SparseVector.basis(0)
    comparison = resolvent_two_ways(model, e0, e0, 1e-6)
    assert abs(comparison.spectral.value - expected) <= 1e-6
    assert abs(comparison.laplace.value - expected) <= 1e-6
    assert comparison.discrepancy <= 1e-5


@pytest.mark.parametrize("measure", [SelfSimilarMeasure.cantor(),
                                     AtomicMeasure(((0.1, 0.5), ("1/4", 0.3), (0.7, 0.2)))],
                         ids=["cantor", "atoms"])
def test_group_gram_is_positive_semidefinite(measure):
    tol = 1e-8
    line = pushforward_to_line(measure)
    values = np.array([v.value for v in group_values(line, {0: 1.0}, 0.5 * np.arange(12), tol)])
    # <U_(bh) x, U_(ah) x> = nu^((b - a) h)
    gram = linalg.toeplitz(values.conj(), values)
    np.testing.assert_allclose(gram, gram.conj().T, atol=1e-15)
    assert linalg.eigvalsh(gram).min() >= -12 * tol


def test_resolvent_powers_reproduce_cogenerator_powers():
    # a single atom at theta = 1/4 sits at lambda = 1 and z = i
    powers = resolvent_powers(4, 1.0)
    assert powers.max_power == 4
    rows = powers.values(np.array([1.0]))
    assert abs(rows[1][0] - 0.5 * (1.0 + 1.0j)) <= powers.bounds[0]
    for n in range(-4, 5):
        value, bound = powers.cogenerator_power(n, rows)
        assert bound <= 1e-10
        assert abs(value[0] - 1j ** n) <= bound
    assert powers.group_vectors(0) == 1
    assert powers.group_vectors(2) > powers.group_vectors(1)
    with pytest.raises(LabError):
        powers.cogenerator_power(5, rows)
    with pytest.raises(PrecisionUnreachableError):
        resolvent_powers(2, np.inf)


def test_group_polynomials_reproduce_group_phases():
    sine = np.sin(np.pi / 4)
    for t in (0.0, 0.5, 2.0, -1.5):
        polynomial = group_polynomial(t, sine, 1e-10)
        assert polynomial.bound <= 2e-10
        assert abs(polynomial(np.array([0.25]))[0] - cmath.exp(1j * t)) <= polynomial.bound
    assert group_polynomial(0.0, sine, 1e-10).degree == 0
    assert group_polynomial(2.0, sine, 1e-12).degree > group_polynomial(2.0, sine, 1e-6).degree
    with pytest.raises(PrecisionUnreachableError):
        group_polynomial(1.0, 1.0, 1e-8)
