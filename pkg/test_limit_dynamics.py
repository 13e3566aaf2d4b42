"""
Tests for orbits, limit operators, certificates and classification of single components
"""
import numpy as np
import pytest

from app.spectral.claims import CERTIFIED, EMPIRICAL
from app.spectral.dynamics import (
    H_M,
    H_W,
    UNKNOWN,
    Empirical,
    Policy,
    PoissonRecurrence,
    ScalarLimit,
    SequenceSpec,
    WanderingFailure,
    WeakStabilityByClass,
    WeaklyWandering,
    classify_component,
    continuous_pairings,
    continuous_recurrence_scan,
    limit_cycle_check,
    limit_operator_estimate,
    recurrence_certificate,
    trajectory,
    weakly_wandering_search,
)
from app.spectral.measures import (
    AtomicMeasure,
    ExponentRule,
    InfiniteConvolutionMeasure,
    LebesgueMeasure,
    MixtureMeasure,
    SelfSimilarMeasure,
)
from app.spectral.operators import (
    CyclicUnitary,
    DirectSum,
    FiniteContraction,
    SparseVector,
    UnilateralShift,
)
from app.validation import LabError

E0 = SparseVector.basis(0)


def cantor_model() -> CyclicUnitary:
    return CyclicUnitary(SelfSimilarMeasure.cantor())


def dirichlet_model() -> CyclicUnitary:
    return CyclicUnitary(InfiniteConvolutionMeasure(2, ExponentRule("power", 2)))


def test_sequence_forms():
    assert SequenceSpec.powers(3, 4).terms() == [3, 9, 27, 81]
    assert SequenceSpec.tower(2, ExponentRule("power", 2), 3).terms() == [4, 16, 256]
    assert SequenceSpec.arithmetic(4, 4, 3).terms() == [4, 8, 12]
    assert SequenceSpec.explicit([1, 2, 5]).length == 3
    grid = SequenceSpec.grid([0.5, 1.5])
    assert grid.is_continuous
    assert grid.describe() == {"form": "grid", "length": 2, "values": [0.5, 1.5]}
    with pytest.raises(LabError):
        SequenceSpec.explicit([3, 3])
    with pytest.raises(LabError):
        SequenceSpec("spiral")
    with pytest.raises(LabError):
        SequenceSpec.powers(1, 3)
    with pytest.raises(LabError):
        SequenceSpec.tower(2, ExponentRule("explicit", values=(1, 2)), 3)
    with pytest.raises(LabError):
        SequenceSpec.powers(2, 3).term(4)


def test_cantor_trajectory_is_constant_along_powers_of_three():
    model = cantor_model()
    first = model.measure.fourier(1, 1e-12).value
    values = trajectory(model, E0, E0, SequenceSpec.powers(3, 8), 1e-12)
    for value in values:
        assert abs(value.value - first) <= 1e-11
    adjoint = trajectory(model, E0, E0, SequenceSpec.powers(3, 3), 1e-12, adjoint=True)
    for value in adjoint:
        assert abs(value.value - first.conjugate()) <= 1e-11


def test_cantor_limit_estimate_is_certified():
    model = cantor_model()
    estimate = limit_operator_estimate(model, SequenceSpec.powers(3, 20), None, 1e-12)
    assert estimate.tier == CERTIFIED
    assert estimate.indices == (3 ** 19, 3 ** 20)
    assert estimate.matrix_elements.shape == (5, 5)
    assert estimate.prediction_error <= estimate.rate_bound + 1e-12
    assert estimate.prediction_error <= 1e-8
    assert estimate.contraction_violations == 0
    scalar = estimate.limit_scalars[0]
    assert abs(scalar - model.measure.fourier(1, 1e-12).value) <= 1e-11
    report = estimate.to_report()
    assert report["tier"] == CERTIFIED
    assert report["cauchy_residual"]["tier"] == EMPIRICAL


def test_dirichlet_tower_limit_is_the_identity():
    model = dirichlet_model()
    rule = model.measure.rule
    estimate = limit_operator_estimate(model, SequenceSpec.tower(2, rule, 4), None, 1e-12)
    assert estimate.tier == CERTIFIED
    assert estimate.limit_scalars == (1.0 + 0j,)
    assert estimate.prediction_error <= estimate.rate_bound + 1e-12


def test_shift_and_stable_matrix_limits_vanish():
    shift = UnilateralShift(16)
    estimate = limit_operator_estimate(shift, SequenceSpec.arithmetic(1, 1, 10), None, 1e-12)
    assert estimate.tier == CERTIFIED
    assert estimate.prediction_error == 0.0
    assert estimate.rate_bound == 0.0

    finite = FiniteContraction(np.diag([0.5, 0.25]))
    estimate = limit_operator_estimate(finite, SequenceSpec.powers(2, 5), None, 1e-12)
    assert estimate.tier == CERTIFIED
    assert estimate.prediction_error <= estimate.rate_bound + 1e-12
    assert estimate.rate_bound <= 0.5 ** 32 + 1e-12


def test_lebesgue_estimate_has_no_prediction():
    model = CyclicUnitary(LebesgueMeasure())
    estimate = limit_operator_estimate(model, SequenceSpec.powers(2, 3), None, 1e-12)
    assert estimate.tier == EMPIRICAL
    assert estimate.prediction is None
    np.testing.assert_allclose(estimate.matrix_elements, np.zeros((5, 5)), atol=1e-15)
    with pytest.raises(LabError):
        limit_cycle_check(model, estimate, E0, E0, (1,), 1e-12)


def test_rational_atom_recurrence():
    model = CyclicUnitary(AtomicMeasure((("1/4", 0.5), ("1/6", 0.5))))
    certificate = recurrence_certificate(model)
    assert isinstance(certificate, PoissonRecurrence)
    assert certificate.sequence.terms() == [12, 24, 36, 48, 60]
    assert certificate.epsilons == (0.0,) * 5
    assert certificate.verify(model, E0, 1e-12)


def test_irrational_atom_recurrence_uses_continued_fractions():
    alpha = 2 ** 0.5 - 1
    model = CyclicUnitary(AtomicMeasure(((alpha, 1.0),)))
    certificate = recurrence_certificate(model)
    assert isinstance(certificate, PoissonRecurrence)
    assert certificate.sequence.terms()[:4] == [1, 2, 5, 12]
    assert all(b < a for a, b in zip(certificate.epsilons, certificate.epsilons[1:]))
    assert certificate.verify(model, E0, 1e-12)


def test_float_rational_atom_gets_the_exact_period():
    model = CyclicUnitary(AtomicMeasure(((0.1, 1.0),)))
    certificate = recurrence_certificate(model)
    assert isinstance(certificate, PoissonRecurrence)
    assert certificate.sequence.terms() == [10, 20, 30, 40, 50]
    assert certificate.epsilons == (0.0,) * 5
    assert certificate.verify(model, E0, 1e-12)


def test_dirichlet_recurrence_certificate():
    model = dirichlet_model()
    certificate = recurrence_certificate(model)
    assert isinstance(certificate, PoissonRecurrence)
    assert certificate.sequence.form == "tower"
    assert all(b < a for a, b in zip(certificate.epsilons, certificate.epsilons[1:]))
    for value, eps in zip(certificate.observed, certificate.epsilons):
        assert value.value.real >= 1.0 - eps - value.error_bound
    with pytest.raises(LabError):
        recurrence_certificate(UnilateralShift())


def test_component_labels():
    assert classify_component(UnilateralShift()).label == H_W
    lebesgue = classify_component(CyclicUnitary(LebesgueMeasure()))
    assert lebesgue.label == H_W
    assert isinstance(lebesgue.certificate, WeakStabilityByClass)
    assert lebesgue.certificate.reason == "riemann_lebesgue"

    cantor = classify_component(cantor_model())
    assert cantor.label == H_M
    assert isinstance(cantor.certificate, ScalarLimit)

    assert classify_component(dirichlet_model()).label == H_M
    assert classify_component(FiniteContraction(np.diag([0.5, 0.25]))).label == H_W
    assert classify_component(FiniteContraction(np.eye(2))).label == UNKNOWN

    mixed = CyclicUnitary(MixtureMeasure(((SelfSimilarMeasure.cantor(), 0.5), (AtomicMeasure((("1/3", 1.0),)), 0.5))))
    result = classify_component(mixed, Policy(search_max=64))
    assert result.label == UNKNOWN
    assert isinstance(result.certificate, Empirical)

    with pytest.raises(LabError):
        classify_component(DirectSum((UnilateralShift(),)))
    with pytest.raises(LabError):
        classify_component(UnilateralShift(), side="sideways")


def test_certificates_re_verify():
    shift = UnilateralShift()
    label = classify_component(shift)
    assert label.certificate.verify(shift, SparseVector.basis(2), 1e-12)
    model = cantor_model()
    assert classify_component(model).certificate.verify(model, E0, 1e-12)


def test_group_side_labels():
    policy = Policy(scan_windows=(1, 2), scan_points=64)
    still = classify_component(CyclicUnitary(AtomicMeasure(((0.0, 1.0),))), policy, side="continuous")
    assert still.label == H_M
    assert isinstance(still.certificate, PoissonRecurrence)

    lebesgue = classify_component(CyclicUnitary(LebesgueMeasure()), policy, side="continuous")
    assert lebesgue.label == H_W

    rotating = classify_component(CyclicUnitary(AtomicMeasure((("1/4", 1.0),))), policy, side="continuous")
    assert rotating.label == H_M
    assert rotating.certificate.tier == EMPIRICAL


def test_continuous_scan_on_an_atom():
    policy = Policy(scan_windows=(1, 3), scan_points=64)
    scan = continuous_recurrence_scan(CyclicUnitary(AtomicMeasure((("1/4", 1.0),))), policy=policy)
    assert scan.nondecaying
    assert [a for a, _, _ in scan.windows] == [1, 2, 3]
    for _, maximum, _ in scan.windows:
        assert maximum == pytest.approx(1.0, abs=1e-9)
    report = scan.to_report()
    assert report["parameters"]["threshold"] == policy.nondecay_threshold
    assert report["candidates"] == []


def test_shift_translations_need_nonnegative_times():
    with pytest.raises(LabError):
        continuous_pairings(UnilateralShift(), E0, E0, [-1.0], 1e-8)


def test_weakly_wandering_vectors():
    found = weakly_wandering_search(UnilateralShift(), E0, 4, 0.1, 100)
    assert isinstance(found, WeaklyWandering)
    assert found.indices == (0, 1, 2, 3)
    assert found.verify(UnilateralShift(), E0, 1e-12)

    lebesgue = weakly_wandering_search(CyclicUnitary(LebesgueMeasure()), E0, 3, 0.1, 100)
    assert isinstance(lebesgue, WeaklyWandering)

    periodic = weakly_wandering_search(CyclicUnitary(AtomicMeasure((("1/4", 1.0),))), E0, 3, 0.1, 50)
    assert isinstance(periodic, WanderingFailure)
    assert periodic.best_epsilon == pytest.approx(1.0)

    with pytest.raises(LabError):
        weakly_wandering_search(FiniteContraction(np.eye(2)), None, 3, 0.1, 10)
    with pytest.raises(LabError):
        weakly_wandering_search(UnilateralShift(), E0, 1, 0.1, 10)


def test_cantor_weakly_wandering_indices():
    model = cantor_model()
    found = weakly_wandering_search(model, E0, 4, 0.1, 3 ** 9)
    assert isinstance(found, WeaklyWandering)
    # greedy picks from |cantor^(d)| = prod_j |cos(2 pi d / 3^j)|
    assert found.indices == (0, 2, 8, 19)
    assert found.max_pairing <= 0.09
    assert found.verify(model, E0, 1e-12)


def test_cantor_limit_cycle():
    model = cantor_model()
    estimate = limit_operator_estimate(model, SequenceSpec.powers(3, 12), [E0], 1e-12)
    report = limit_cycle_check(model, estimate, E0, E0, (1, 2, 3), 1e-12)
    assert report.tier == CERTIFIED
    assert report.passed
    assert len(report.entries) == 3
