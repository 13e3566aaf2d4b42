"""
Tests for the circle measures and their Fourier-Stieltjes oracles
"""
import cmath
import math
from fractions import Fraction

import numpy as np
import pytest

from app.spectral.measures import (
    AtomicMeasure,
    ExponentRule,
    InfiniteConvolutionMeasure,
    LebesgueMeasure,
    MixtureMeasure,
    SelfSimilarMeasure,
    TrigDensityMeasure,
    build_adaptive_rule,
    fourier_stieltjes,
    quadrature,
    wiener_atom_index,
)
from app.validation import BudgetExceededError, LabError, PrecisionUnreachableError


def cantor_reference(depth: int = 60) -> complex:
    value = 1.0 + 0j
    for j in range(1, depth + 1):
        value *= 0.5 * (1.0 + cmath.exp(2j * math.pi * 2.0 / 3.0 ** j))
    return value


def dirichlet() -> InfiniteConvolutionMeasure:
    return InfiniteConvolutionMeasure(2, ExponentRule("power", 2))


def test_lebesgue_integer_coefficients_vanish():
    measure = LebesgueMeasure()
    for xi in range(1, 11):
        value = fourier_stieltjes(measure, xi, 1e-12)
        assert value.value == 0
        assert value.error_bound == 0


def test_cantor_constant_along_powers_of_three():
    cantor = SelfSimilarMeasure.cantor()
    first = fourier_stieltjes(cantor, 1, 1e-13)
    assert abs(first.value - cantor_reference()) <= 1e-10
    for k in range(1, 9):
        value = fourier_stieltjes(cantor, 3 ** k, 1e-13)
        assert abs(value.value - first.value) <= 2e-12


def test_self_similar_refinement_identity():
    rng = np.random.default_rng(7)
    tol = 1e-10
    for _ in range(200):
        base = int(rng.integers(2, 6))
        digits = sorted(rng.choice(base, size=2, replace=False).tolist())
        p = float(rng.uniform(0.1, 0.9))
        measure = SelfSimilarMeasure(base, tuple(digits), (p, 1.0 - p))
        xi = float(rng.uniform(-50.0, 50.0))
        whole = measure.fourier(xi, tol)
        part = measure.fourier(xi / base, tol)
        factor = measure.refinement_factor(xi)
        assert abs(whole.value - factor * part.value) <= whole.error_bound + part.error_bound + 1e-12


def test_atomic_rational_angles_are_exact():
    measure = AtomicMeasure((("1/3", 0.5), (Fraction(1, 4), 0.5)))
    assert measure.fourier(12, 1e-12).value == pytest.approx(1.0, abs=1e-15)
    expected = 0.5 * cmath.exp(2j * math.pi / 3) + 0.5 * 1j
    assert abs(measure.fourier(1, 1e-12).value - expected) <= 1e-15
    # huge frequencies stay exact for rational angles
    assert measure.fourier(12 * 10 ** 30, 1e-12).value == pytest.approx(1.0, abs=1e-15)


def test_toeplitz_matrices_are_positive_semidefinite():
    rng = np.random.default_rng(11)
    for _ in range(200):
        count = int(rng.integers(1, 5))
        weights = rng.dirichlet(np.ones(count))
        measure = AtomicMeasure(tuple(zip(rng.uniform(0.0, 1.0, count).tolist(), weights.tolist())))
        if rng.uniform() < 0.5:
            measure = MixtureMeasure(((measure, 0.5), (SelfSimilarMeasure.cantor(), 0.5)))
        size = 6
        values = {d: measure.fourier(d, 1e-12).value for d in range(-size + 1, size)}
        toeplitz = np.array([[values[j - k] for k in range(size)] for j in range(size)])
        np.testing.assert_allclose(toeplitz, toeplitz.conj().T, atol=1e-12)
        assert np.linalg.eigvalsh(toeplitz).min() >= -1e-9


def test_dirichlet_recurrence_bound():
    measure = dirichlet()
    moduli = []
    for k in range(1, 6):
        n_k = measure.exponent(k)
        value = measure.fourier(2 ** n_k, 1e-13)
        bound = 2.0 * math.pi * measure.tail_sum(k, shift=n_k)
        assert 1.0 - value.value.real <= bound + value.error_bound
        moduli.append(abs(value.value))
    assert all(a <= b + 1e-15 for a, b in zip(moduli, moduli[1:]))
    assert moduli[-1] == pytest.approx(1.0, abs=1e-12)


def test_dirichlet_transform_needs_enough_factors():
    short = InfiniteConvolutionMeasure(2, ExponentRule("power", 2), j_max=3)
    with pytest.raises(PrecisionUnreachableError) as excinfo:
        short.fourier(10 ** 6, 1e-10)
    assert excinfo.value.best_bound > 1e-10


def test_explicit_exponents_give_finite_convolution():
    measure = InfiniteConvolutionMeasure(2, ExponentRule("explicit", values=(1, 3)))
    # atoms at 0, 1/2, 1/8, 5/8 with mass 1/4
    expected = 0.25 * sum(cmath.exp(2j * math.pi * 3 * theta) for theta in (0.0, 0.5, 0.125, 0.625))
    assert abs(measure.fourier(3, 1e-12).value - expected) <= 1e-12
    assert measure.fourier(8, 1e-12).value == pytest.approx(1.0)


def test_wiener_index():
    atom = AtomicMeasure(((math.sqrt(2) - 1, 1.0),))
    assert wiener_atom_index(atom, 1000) == pytest.approx(1.0, abs=1e-9)
    assert wiener_atom_index(LebesgueMeasure(), 100) == 0.0
    cantor = SelfSimilarMeasure.cantor()
    values = [wiener_atom_index(cantor, n) for n in (512, 1024, 2048, 4096)]
    assert values[-1] <= 0.05
    assert all(b < a for a, b in zip(values, values[1:]))


@pytest.mark.parametrize("measure", [
    LebesgueMeasure(),
    TrigDensityMeasure((1.0, 0.25 + 0.1j, -0.1j)),
    dirichlet(),
    SelfSimilarMeasure.cantor(),
    AtomicMeasure(((math.sqrt(2) - 1, 0.5), ("1/3", 0.5))),
    MixtureMeasure(((LebesgueMeasure(), 0.5), (SelfSimilarMeasure.cantor(), 0.5))),
], ids=["lebesgue", "trig_density", "dirichlet", "cantor", "atomic", "mixture"])
def test_transforms_are_hermitian(measure):
    tol = 1e-12
    for xi in (1, 2, 5, 17, 0.5, 3.25):
        forward = measure.fourier(xi, tol)
        backward = measure.fourier(-xi, tol)
        assert abs(backward.value - forward.value.conjugate()) <= 2 * tol


def test_wiener_index_counts_only_the_atoms_of_a_mixture():
    atoms = AtomicMeasure(((0.25, 0.6), (0.1234, 0.4)))
    mixture = MixtureMeasure(((LebesgueMeasure(), 0.5), (atoms, 0.5)))
    # squared atom masses 0.3^2 + 0.2^2
    assert wiener_atom_index(mixture, 4096) == pytest.approx(0.13, abs=0.02)


def test_trig_density_coefficients():
    measure = TrigDensityMeasure((1.0, 0.25 + 0.1j))
    assert measure.fourier(1, 1e-12).value == pytest.approx(0.25 - 0.1j)
    assert measure.fourier(-1, 1e-12).value == pytest.approx(0.25 + 0.1j)
    assert measure.fourier(2, 1e-12).value == 0
    assert measure.is_absolutely_continuous
    with pytest.raises(LabError):
        TrigDensityMeasure((1.0, 0.8))


def test_mixture_is_linear():
    cantor = SelfSimilarMeasure.cantor()
    atom = AtomicMeasure((("1/5", 1.0),))
    mixture = MixtureMeasure(((cantor, 0.25), (atom, 0.75)))
    for xi in (1, 2, 7, 0.5):
        expected = 0.25 * cantor.fourier(xi, 1e-12).value + 0.75 * atom.fourier(xi, 1e-12).value
        value = mixture.fourier(xi, 1e-12)
        assert abs(value.value - expected) <= 2e-12
    assert mixture.atoms() == [(Fraction(1, 5), 0.75)]


def test_quadrature_matches_fourier():
    cantor = SelfSimilarMeasure.cantor()
    rule = quadrature(cantor, 12)
    assert rule.weights.sum() == pytest.approx(1.0)
    rng = np.random.default_rng(3)
    for n in rng.integers(-20, 21, size=200):
        n = int(n)
        approximate = rule.integrate(lambda theta: np.exp(2j * np.pi * n * theta))
        exact = cantor.fourier(n, 1e-13)
        assert abs(approximate - exact.value) <= rule.lipschitz_error(2 * math.pi * abs(n)) + exact.error_bound + 1e-12


def test_adaptive_rule_meets_its_bound():
    measure = dirichlet()

    def bounds(lo, hi):
        shape = np.shape(lo)
        return np.full(shape, 1.0), np.full(shape, 2 * np.pi * 3), np.full(shape, (2 * np.pi * 3) ** 2)

    rule = build_adaptive_rule(measure, bounds, 1e-9)
    assert rule.error_bound <= 1e-9
    approximate = rule.integrate(lambda theta: np.exp(2j * np.pi * 3 * theta))
    assert abs(approximate - measure.fourier(3, 1e-12).value) <= rule.error_bound + 1e-12


def test_node_budget_is_enforced():
    with pytest.raises(BudgetExceededError):
        quadrature(SelfSimilarMeasure.cantor(), 30, node_budget=1000)


def test_invalid_measures_are_rejected():
    with pytest.raises(LabError):
        AtomicMeasure(((0.1, 0.4), (0.2, 0.4)))
    with pytest.raises(LabError):
        SelfSimilarMeasure(3, (0, 3), (0.5, 0.5))
    with pytest.raises(LabError):
        ExponentRule("explicit", values=(2, 2))
