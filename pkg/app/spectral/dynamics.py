"""
Limit dynamics of contraction models.

Orbits are observed weakly, through pairings <T^n x, y> (or <U_t x, y> on the group side), along
subsequences. Limit claims come in three tiers: certified (closed-form limit with a certified rate),
predicted (closed-form limit, empirical rate) and empirical (Cauchy residual only).
"""
import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from app.config import settings
from app.spectral.cayley import GroupPhase, group_values, pushforward_to_line
from app.spectral.claims import CERTIFIED, EMPIRICAL, PREDICTED, claim, fourier_claim
from app.spectral.measures import (
    AtomicMeasure,
    ExponentRule,
    FourierValue,
    InfiniteConvolutionMeasure,
    SelfSimilarMeasure,
)
from app.spectral.operators import (
    CyclicUnitary,
    DirectSum,
    FiniteContraction,
    OperatorModel,
    SparseVector,
    UnilateralShift,
    VectorRep,
    component_vector,
    cyclic_components,
    frame_of,
    pairing_coefficients,
)
from app.validation import LabError, ShapeMismatchError, validate_tol

logger = logging.getLogger(__name__)

H_M = "H_m"
H_W = "H_w"
UNKNOWN = "unknown"

SEQUENCE_FORMS = ("powers", "tower", "arithmetic", "explicit", "grid")
# float angles within RATIONAL_MATCH_TOL of a fraction with denominator up to this size are treated as rational
RATIONAL_DENOMINATOR_LIMIT = 2 ** 20
RATIONAL_MATCH_TOL = 1e-15


@dataclass(frozen=True)
class SequenceSpec:
    """Strictly increasing times n_1 < n_2 < ... < n_K (integers, or reals for ``grid``)"""
    form: str
    length: int = 1
    base: Optional[int] = None
    rule: Optional[ExponentRule] = None
    start: int = 1
    step: int = 1
    values: Tuple = ()

    def __post_init__(self):
        if self.form not in SEQUENCE_FORMS:
            raise LabError(f"unknown sequence form {self.form!r}")
        if self.form == "explicit":
            object.__setattr__(self, "values", tuple(int(v) for v in self.values))
            object.__setattr__(self, "length", len(self.values))
        elif self.form == "grid":
            object.__setattr__(self, "values", tuple(float(v) for v in self.values))
            object.__setattr__(self, "length", len(self.values))
        if self.length < 1:
            raise LabError("sequences need at least one term")
        if self.form in ("powers", "tower") and (self.base is None or self.base < 2):
            raise LabError(f"{self.form} sequences need base >= 2")
        if self.form == "tower" and self.rule is None:
            raise LabError("tower sequences need an exponent rule")
        if self.form == "tower" and self.rule.length is not None and self.length > self.rule.length:
            raise LabError("tower sequence is longer than its explicit exponent list")
        if self.form == "arithmetic" and (self.step < 1 or self.start < 0):
            raise LabError("arithmetic sequences need start >= 0 and step >= 1")
        terms = self.terms()
        if any(b <= a for a, b in zip(terms, terms[1:])):
            raise LabError("sequence terms must be strictly increasing")
        if not self.is_continuous and terms[0] < 0:
            raise LabError("discrete sequence terms must be >= 0")

    @classmethod
    def powers(cls, base: int, length: int) -> "SequenceSpec":
        return cls("powers", length, base=base)

    @classmethod
    def tower(cls, base: int, rule: ExponentRule, length: int) -> "SequenceSpec":
        return cls("tower", length, base=base, rule=rule)

    @classmethod
    def arithmetic(cls, start: int, step: int, length: int) -> "SequenceSpec":
        return cls("arithmetic", length, start=start, step=step)

    @classmethod
    def explicit(cls, values: Sequence[int]) -> "SequenceSpec":
        return cls("explicit", values=tuple(values))

    @classmethod
    def grid(cls, values: Sequence[float]) -> "SequenceSpec":
        return cls("grid", values=tuple(values))

    @property
    def is_continuous(self) -> bool:
        return self.form == "grid"

    def term(self, k: int):
        """k-th term, counted from 1"""
        if not 1 <= k <= self.length:
            raise LabError(f"sequence index {k} outside 1..{self.length}")
        if self.form == "powers":
            return self.base ** k
        if self.form == "tower":
            return self.base ** self.rule(k)
        if self.form == "arithmetic":
            return self.start + self.step * (k - 1)
        return self.values[k - 1]

    def terms(self) -> List:
        return [self.term(k) for k in range(1, self.length + 1)]

    def describe(self) -> Dict:
        description: Dict = {"form": self.form, "length": self.length}
        if self.form in ("powers", "tower"):
            description["base"] = self.base
        if self.form == "tower":
            description["exponents"] = self.rule.describe()
        if self.form == "arithmetic":
            description.update(start=self.start, step=self.step)
        if self.form in ("explicit", "grid"):
            description["values"] = list(self.values)
        return description


@dataclass(frozen=True)
class Policy:
    """Knobs for certificate search and classification"""
    length: int = 5
    scalar_power: int = 16
    search_max: int = field(default_factory=lambda: settings.recurrence_search_max)
    tol: float = 1e-12
    scan_tol: float = 1e-3
    scan_windows: Tuple[int, int] = field(default_factory=lambda: tuple(settings.scan_windows))
    scan_points: int = field(default_factory=lambda: settings.scan_points_per_window)
    continuous_grid: Optional[Tuple[float, ...]] = None
    nondecay_threshold: float = field(default_factory=lambda: settings.nondecay_threshold)

    def describe(self) -> Dict:
        return {
            "length": self.length, "scalar_power": self.scalar_power, "search_max": self.search_max,
            "tol": self.tol, "scan_tol": self.scan_tol, "scan_windows": list(self.scan_windows),
            "scan_points": self.scan_points, "nondecay_threshold": self.nondecay_threshold,
            "continuous_grid": None if self.continuous_grid is None else list(self.continuous_grid),
        }


def _shift_pairing(model: UnilateralShift, t: float, x: SparseVector, y: SparseVector, tol: float) -> FourierValue:
    if y.indices and max(y.indices) >= model.truncation:
        raise ShapeMismatchError("test vector lies outside the shift reporting window")
    result = model.semigroup_element(t, x, tol)
    image = result.vector.as_dict()
    value = sum(image.get(k, 0j) * v.conjugate() for k, v in y.coeffs)
    return FourierValue(complex(value), tol / 2 * y.l1_norm)


def continuous_pairings(model: OperatorModel, x: VectorRep, y: VectorRep, times: Sequence[float],
                        tol: float) -> List[FourierValue]:
    """<U_t x, y> over a time grid: the unitary group on cyclic parts, translations on shift parts"""
    parts = cyclic_components(model)
    each_tol = tol / len(parts)
    totals = [FourierValue(0j, 0.0) for _ in times]
    for index, component in parts:
        xc, yc = component_vector(model, x, index), component_vector(model, y, index)
        if isinstance(component, CyclicUnitary):
            line = pushforward_to_line(component.group_measure)
            values = group_values(line, pairing_coefficients(xc, yc), times, each_tol)
        elif isinstance(component, UnilateralShift):
            if any(t < 0 for t in times):
                raise LabError("the translation semigroup is only defined for t >= 0")
            values = [_shift_pairing(component, t, xc, yc, each_tol) for t in times]
        else:
            raise LabError(f"no continuous-time dynamics for {component.kind} components")
        totals = [a + b for a, b in zip(totals, values)]
    return totals


def trajectory(model: OperatorModel, x: VectorRep, y: VectorRep, seq: SequenceSpec, tol: float,
               adjoint: bool = False) -> List[FourierValue]:
    """<T^{n_k} x, y> (or <T*^{n_k} x, y>, or <U_{t_k} x, y> on a grid) for every term"""
    validate_tol(tol)
    if seq.is_continuous:
        times = [-t for t in seq.terms()] if adjoint else seq.terms()
        return continuous_pairings(model, x, y, times, tol)
    power = model.apply_adjoint_power if adjoint else model.apply_power
    return [model.inner_product(power(n, x), y, tol) for n in seq.terms()]


# -- closed-form limit predictions ------------------------------------------------------------

RateFn = Callable[[VectorRep, VectorRep, int], Optional[float]]


@dataclass(frozen=True)
class _Prediction:
    scalar: complex
    tier: str
    rate: RateFn = field(compare=False, repr=False)


def _rational_angle(theta) -> Optional[Fraction]:
    if isinstance(theta, Fraction):
        return theta
    exact = Fraction(float(theta))
    nearest = exact.limit_denominator(RATIONAL_DENOMINATOR_LIMIT)
    return nearest if abs(exact - nearest) < RATIONAL_MATCH_TOL else None


def _rational_period(atoms: Sequence[Tuple]) -> Optional[int]:
    """lcm of the atom denominators when every angle is rational"""
    period = 1
    for theta, _ in atoms:
        rational = _rational_angle(theta)
        if rational is None:
            return None
        period = period * rational.denominator // math.gcd(period, rational.denominator)
    return period


def _is_power_of(value: int, base: int) -> bool:
    while value % base == 0 and value > 1:
        value //= base
    return value == 1


def tower_grid(measure: InfiniteConvolutionMeasure, length: int) -> List[float]:
    """Candidate group times 2 pi b^(n_k)"""
    return [2.0 * math.pi * float(measure.base) ** measure.exponent(k) for k in range(1, length + 1)]


def _on_tower_grid(measure: InfiniteConvolutionMeasure, t: float) -> bool:
    """t = 2 pi b^(n_j) for some j <= j_max"""
    if t <= 0:
        return False
    exponent = round(math.log(t / (2.0 * math.pi), measure.base))
    for j in range(1, measure.j_max + 1):
        n = measure.exponent(j)
        if n > exponent:
            return False
        if n == exponent:
            return math.isclose(t, 2.0 * math.pi * float(measure.base) ** n, rel_tol=1e-12)
    return False


def _cyclic_prediction(component: CyclicUnitary, seq: SequenceSpec, tol: float) -> Optional[_Prediction]:
    measure = component.group_measure if seq.is_continuous else component.measure
    terms = seq.terms()
    if isinstance(measure, AtomicMeasure):
        if seq.is_continuous:
            if all(float(theta) == 0.0 for theta, _ in measure.atoms()):
                return _Prediction(1.0 + 0j, CERTIFIED, lambda x, y, k: 0.0)
            return None
        period = _rational_period(measure.atoms())
        if period is not None and all(n % period == 0 for n in terms):
            return _Prediction(1.0 + 0j, CERTIFIED, lambda x, y, k: 0.0)
        return None
    if isinstance(measure, SelfSimilarMeasure) and seq.form == "powers" and _is_power_of(seq.base, measure.base):
        scalar = measure.fourier(1, tol)
        spread = measure.support_diameter

        def rate(x, y, k):
            n = seq.term(k)
            return sum(abs(a) * (4.0 * math.pi * abs(q) * spread / n + scalar.error_bound)
                       for q, a in pairing_coefficients(x, y).items())

        return _Prediction(scalar.value, CERTIFIED, rate)
    if isinstance(measure, InfiniteConvolutionMeasure):
        if seq.form == "tower" and seq.base == measure.base and seq.rule == measure.rule:
            def rate(x, y, k):
                tail = math.pi * measure.tail_sum(k, shift=measure.exponent(k))
                return sum(abs(a) for a in pairing_coefficients(x, y).values()) * tail

            return _Prediction(1.0 + 0j, CERTIFIED, rate)
        if seq.is_continuous and all(_on_tower_grid(measure, t) for t in terms):
            return _Prediction(1.0 + 0j, PREDICTED, lambda x, y, k: None)
    return None


def _component_prediction(component: OperatorModel, seq: SequenceSpec, tol: float) -> Optional[_Prediction]:
    if isinstance(component, CyclicUnitary):
        return _cyclic_prediction(component, seq, tol)
    if isinstance(component, UnilateralShift):
        if seq.is_continuous:
            return _Prediction(0j, PREDICTED, lambda x, y, k: None)

        def rate(x, y, k):
            if x.is_zero() or y.is_zero():
                return 0.0
            if seq.term(k) + min(x.indices) > max(y.indices):
                return 0.0
            return math.sqrt(sum(abs(v) ** 2 for _, v in x.coeffs) * sum(abs(v) ** 2 for _, v in y.coeffs))

        return _Prediction(0j, CERTIFIED, rate)
    if isinstance(component, FiniteContraction) and not seq.is_continuous:
        if component.spectral_radius < 1.0:
            def rate(x, y, k):
                power = np.linalg.matrix_power(component.matrix, int(seq.term(k)))
                return float(np.linalg.norm(power, 2) * np.linalg.norm(x.array) * np.linalg.norm(y.array))

            return _Prediction(0j, CERTIFIED, rate)
    return None


@dataclass(frozen=True)
class LimitPrediction:
    """V = direct sum of scalars s_c I over the components"""
    scalars: Tuple[complex, ...]
    tier: str
    rates: Tuple[RateFn, ...] = field(compare=False, repr=False)

    def pairing(self, model: OperatorModel, x: VectorRep, y: VectorRep, tol: float,
                adjoint: bool = False) -> FourierValue:
        """<V x, y> (or <V* x, y>)"""
        total = FourierValue(0j, 0.0)
        parts = cyclic_components(model)
        for (index, component), scalar in zip(parts, self.scalars):
            if scalar == 0:
                continue
            xc, yc = component_vector(model, x, index), component_vector(model, y, index)
            factor = scalar.conjugate() if adjoint else scalar
            total = total + component.inner_product(xc, yc, tol / len(parts)).scale(factor)
        return total

    def rate(self, model: OperatorModel, x: VectorRep, y: VectorRep, k: int) -> Optional[float]:
        total = 0.0
        for (index, _), rate in zip(cyclic_components(model), self.rates):
            value = rate(component_vector(model, x, index), component_vector(model, y, index), k)
            if value is None:
                return None
            total += value
        return total


def predict_limit(model: OperatorModel, seq: SequenceSpec, tol: float) -> Optional[LimitPrediction]:
    """Closed-form limit operator along ``seq`` when every component's measure class supports one"""
    predictions = [_component_prediction(c, seq, tol) for _, c in cyclic_components(model)]
    if any(p is None for p in predictions):
        return None
    tiers = [p.tier for p in predictions]
    tier = CERTIFIED if all(t == CERTIFIED for t in tiers) else PREDICTED
    return LimitPrediction(tuple(p.scalar for p in predictions), tier, tuple(p.rate for p in predictions))


# -- limit operator estimates -----------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class LimitOperatorEstimate:
    """Frame Gram data <T^n f_i, f_j> at the last two terms of a sequence; evidence, not a proof"""
    sequence: SequenceSpec
    frame: Tuple[VectorRep, ...]
    indices: Tuple
    matrix_elements: np.ndarray
    previous_elements: Optional[np.ndarray]
    cauchy_residual: float
    oracle_bound: float
    tier: str
    prediction: Optional[LimitPrediction] = None
    predicted: Optional[np.ndarray] = None
    rate_bound: Optional[float] = None
    adjoint: bool = False
    contraction_violations: int = 0

    @property
    def prediction_error(self) -> Optional[float]:
        if self.predicted is None:
            return None
        return float(np.abs(self.matrix_elements - self.predicted).max())

    @property
    def limit_scalars(self) -> Optional[Tuple[complex, ...]]:
        return None if self.prediction is None else self.prediction.scalars

    def to_report(self) -> Dict:
        report = {
            "sequence": self.sequence.describe(),
            "adjoint": self.adjoint,
            "indices": list(self.indices),
            "tier": self.tier,
            "matrix_elements": [[claim(complex(v), self.oracle_bound, CERTIFIED) for v in row]
                                for row in self.matrix_elements],
            "cauchy_residual": claim(self.cauchy_residual, None, EMPIRICAL),
            "contraction_violations": self.contraction_violations,
        }
        if self.predicted is not None:
            if self.tier == CERTIFIED:
                bound = self.rate_bound
            else:
                # observed distance stands in for the missing rate
                bound = max(self.cauchy_residual, self.prediction_error)
            report["limit_scalars"] = [claim(complex(s), 0.0, self.tier) for s in self.limit_scalars]
            report["predicted"] = [[claim(complex(v), bound, self.tier) for v in row] for row in self.predicted]
            report["prediction_error"] = claim(self.prediction_error, bound, self.tier)
        return report


def _frame_gram(model: OperatorModel, frame: Sequence[VectorRep], when, tol: float,
                continuous: bool, adjoint: bool) -> Tuple[np.ndarray, float]:
    size = len(frame)
    matrix = np.zeros((size, size), dtype=complex)
    bound = 0.0
    for i, fi in enumerate(frame):
        if continuous:
            t = -when if adjoint else when
            values = [continuous_pairings(model, fi, fj, [t], tol)[0] for fj in frame]
        else:
            image = model.apply_adjoint_power(when, fi) if adjoint else model.apply_power(when, fi)
            values = [model.inner_product(image, fj, tol) for fj in frame]
        for j, value in enumerate(values):
            matrix[i, j] = value.value
            bound = max(bound, value.error_bound)
    return matrix, bound


def limit_operator_estimate(model: OperatorModel, seq: SequenceSpec, frame: Optional[Sequence[VectorRep]] = None,
                            tol: Optional[float] = None, adjoint: bool = False) -> LimitOperatorEstimate:
    tol = validate_tol(tol if tol is not None else settings.default_tol)
    frame = tuple(frame_of(model, frame))
    if not frame:
        raise LabError("frame must be nonempty")
    terms = seq.terms()
    last = terms[-1]
    matrix, bound = _frame_gram(model, frame, last, tol, seq.is_continuous, adjoint)
    previous = None
    residual = 0.0
    indices: Tuple = (last,)
    if len(terms) >= 2:
        previous, previous_bound = _frame_gram(model, frame, terms[-2], tol, seq.is_continuous, adjoint)
        bound = max(bound, previous_bound)
        residual = float(np.abs(matrix - previous).max())
        indices = (terms[-2], last)

    norms = np.array([model.norm(f, tol) for f in frame])
    violations = int((np.abs(matrix) > np.outer(norms, norms) + bound + tol).sum())
    if violations:
        logger.warning("%d frame pairings exceed the contraction bound", violations)

    prediction = predict_limit(model, seq, tol)
    predicted = None
    rate_bound = None
    tier = EMPIRICAL
    if prediction is not None:
        values = [[prediction.pairing(model, fi, fj, tol, adjoint) for fj in frame] for fi in frame]
        predicted = np.array([[v.value for v in row] for row in values])
        predicted_bound = max(v.error_bound for row in values for v in row)
        # <T*^n f_i, f_j> = conj <T^n f_j, f_i>
        rates = [prediction.rate(model, fj, fi, seq.length) if adjoint else prediction.rate(model, fi, fj, seq.length)
                 for fi in frame for fj in frame]
        if prediction.tier == CERTIFIED and all(r is not None for r in rates):
            rate_bound = max(rates) + bound + predicted_bound
            tier = CERTIFIED
        else:
            tier = PREDICTED
    logger.info("limit estimate along %s (K=%d): tier %s, residual %.3e", seq.form, seq.length, tier, residual)
    return LimitOperatorEstimate(seq, frame, indices, matrix, previous, residual, bound, tier,
                                 prediction, predicted, rate_bound, adjoint, violations)


# -- certificates -----------------------------------------------------------------------------

class Certificate(ABC):
    kind: str = ""
    tier: str = CERTIFIED

    @abstractmethod
    def verify(self, model: OperatorModel, x: VectorRep, tol: float) -> bool:
        """Re-derive the certified statement from fresh oracle evaluations"""

    @abstractmethod
    def to_report(self) -> Dict:
        ...


@dataclass(frozen=True)
class PoissonRecurrence(Certificate):
    """<T^{n_k} x, x> >= ||x||^2 - eps_k with eps_k -> 0"""
    sequence: SequenceSpec
    epsilons: Tuple[float, ...]
    observed: Tuple[FourierValue, ...]
    strong_residuals: Tuple[FourierValue, ...]
    norm_squared: float
    bound_formula: str
    kind: str = field(default="poisson_recurrence", init=False)

    def verify(self, model: OperatorModel, x: VectorRep, tol: float) -> bool:
        values = trajectory(model, x, x, self.sequence, tol)
        for value, eps in zip(values, self.epsilons):
            if value.value.real < self.norm_squared - eps - value.error_bound - tol:
                return False
        if self.sequence.is_continuous:
            return True
        for n, eps in zip(self.sequence.terms(), self.epsilons):
            moved = model.apply_power(n, x) - x
            residual = model.inner_product(moved, moved, tol)
            if residual.value.real > 2.0 * eps + residual.error_bound + tol:
                return False
        return True

    def to_report(self) -> Dict:
        terms = self.sequence.terms()
        return {
            "kind": self.kind,
            "sequence": self.sequence.describe(),
            "bound_formula": self.bound_formula,
            "norm_squared": claim(self.norm_squared, 0.0, CERTIFIED),
            "entries": [
                {
                    "n": n,
                    "epsilon": claim(eps, 0.0, CERTIFIED),
                    "pairing": fourier_claim(value),
                    "strong_residual": fourier_claim(strong) if strong is not None else None,
                }
                for n, eps, value, strong in zip(
                    terms, self.epsilons, self.observed,
                    self.strong_residuals or (None,) * len(terms))
            ],
        }


@dataclass(frozen=True)
class WeakStabilityByClass(Certificate):
    reason: str
    evidence: Tuple[Tuple[str, float], ...] = ()
    side: str = "discrete"
    kind: str = field(default="weak_stability_by_class", init=False)

    REASONS = ("riemann_lebesgue", "shift_structure", "spectral_radius_lt_1")

    def __post_init__(self):
        if self.reason not in self.REASONS:
            raise LabError(f"unknown weak-stability reason {self.reason!r}")

    def verify(self, model: OperatorModel, x: VectorRep, tol: float) -> bool:
        if self.reason == "riemann_lebesgue":
            if not isinstance(model, CyclicUnitary):
                return False
            measure = model.group_measure if self.side == "continuous" else model.measure
            return measure.is_absolutely_continuous
        if self.reason == "spectral_radius_lt_1":
            return isinstance(model, FiniteContraction) and model.spectral_radius < 1.0
        if not isinstance(model, UnilateralShift):
            return False
        if x.is_zero():
            return True
        # powers beyond the support spread are orthogonal to x
        spread = max(x.indices) - min(x.indices) + 1
        return model.inner_product(model.apply_power(spread, x), x, tol).value == 0

    def to_report(self) -> Dict:
        return {"kind": self.kind, "reason": self.reason,
                "evidence": {name: claim(value, 0.0, CERTIFIED) for name, value in self.evidence}}


@dataclass(frozen=True)
class WeaklyWandering(Certificate):
    """|<T^{k_j} x, T^{k_l} x>| <= epsilon for j != l"""
    indices: Tuple[int, ...]
    epsilon: float
    max_pairing: float
    kind: str = field(default="weakly_wandering", init=False)

    def __post_init__(self):
        if self.max_pairing > self.epsilon:
            raise LabError("weakly wandering epsilon is below the observed pairing")

    def verify(self, model: OperatorModel, x: VectorRep, tol: float) -> bool:
        images = [model.apply_power(k, x) for k in self.indices]
        for j in range(len(images)):
            for l in range(j + 1, len(images)):
                value = model.inner_product(images[j], images[l], tol)
                if abs(value.value) + value.error_bound > self.epsilon + tol:
                    return False
        return True

    def to_report(self) -> Dict:
        return {"kind": self.kind, "indices": list(self.indices),
                "epsilon": claim(self.epsilon, 0.0, CERTIFIED),
                "max_pairing": claim(self.max_pairing, 0.0, CERTIFIED)}


@dataclass(frozen=True)
class ScalarLimit(Certificate):
    """V = c I along ``sequence`` with c != 0, so x = c^(-1) V x lies in M(x, S)"""
    sequence: SequenceSpec
    scalar: FourierValue
    rate_formula: str
    kind: str = field(default="scalar_limit", init=False)

    def verify(self, model: OperatorModel, x: VectorRep, tol: float) -> bool:
        if abs(self.scalar.value) <= self.scalar.error_bound:
            return False
        estimate = limit_operator_estimate(model, self.sequence, [x], tol)
        if estimate.tier != CERTIFIED or estimate.prediction_error is None:
            return False
        return estimate.prediction_error <= estimate.rate_bound + tol

    def to_report(self) -> Dict:
        return {"kind": self.kind, "sequence": self.sequence.describe(), "rate_formula": self.rate_formula,
                "scalar": fourier_claim(self.scalar)}


@dataclass(frozen=True)
class Empirical(Certificate):
    note: str
    data: Tuple[Tuple[str, float], ...] = ()
    sequence: Optional[SequenceSpec] = None
    kind: str = field(default="empirical", init=False)
    tier: str = field(default=EMPIRICAL, init=False)

    def verify(self, model: OperatorModel, x: VectorRep, tol: float) -> bool:
        return False

    def to_report(self) -> Dict:
        report = {"kind": self.kind, "note": self.note,
                  "data": {name: claim(value, None, EMPIRICAL) for name, value in self.data}}
        if self.sequence is not None:
            report["sequence"] = self.sequence.describe()
        return report


@dataclass(frozen=True)
class ComponentClassification:
    label: str
    certificate: Certificate
    side: str = "discrete"

    def to_report(self) -> Dict:
        return {"label": self.label, "side": self.side, "certificate": self.certificate.to_report()}


# -- recurrence -------------------------------------------------------------------------------

def _cyclic_vector() -> SparseVector:
    return SparseVector.basis(0)


def _poisson_certificate(model: CyclicUnitary, seq: SequenceSpec, epsilons: Sequence[float], tol: float,
                         formula: str) -> PoissonRecurrence:
    x = _cyclic_vector()
    observed = trajectory(model, x, x, seq, tol)
    strong = []
    for n in seq.terms():
        moved = SparseVector.from_dict({n: 1.0, 0: -1.0})
        strong.append(model.inner_product(moved, moved, tol))
    certificate = PoissonRecurrence(seq, tuple(float(e) for e in epsilons), tuple(observed), tuple(strong),
                                    1.0, formula)
    if not certificate.verify(model, x, tol):
        raise LabError(f"recurrence certificate along {seq.form} failed its own verification")
    logger.info("Poisson recurrence certified along %s, eps_K = %.3e", seq.form, epsilons[-1])
    return certificate


def _continued_fraction_denominators(alpha: float, limit: int = 10 ** 7) -> List[int]:
    """Distinct convergent denominators q_0 = 1 < q_1 < ... of alpha, up to ``limit``"""
    denominators = []
    value = Fraction(alpha)
    q_prev, q = 1, 0
    while True:
        a = math.floor(value)
        q_prev, q = q, a * q + q_prev
        if q > limit:
            break
        if not denominators or q > denominators[-1]:
            denominators.append(q)
        fractional = value - a
        if fractional == 0:
            break
        value = 1 / fractional
    return denominators


def _atomic_recurrence(model: CyclicUnitary, measure: AtomicMeasure, policy: "Policy") -> Optional[Certificate]:
    atoms = measure.atoms()
    period = _rational_period(atoms)
    if period is not None:
        seq = SequenceSpec.arithmetic(period, period, policy.length)
        return _poisson_certificate(model, seq, [0.0] * policy.length, policy.tol,
                                    f"eps_k = 0 (all angles have denominators dividing {period})")
    irrational = [i for i, (theta, _) in enumerate(atoms) if _rational_angle(theta) is None]
    if len(irrational) != 1:
        return None
    alpha, weight = atoms[irrational[0]]
    period = _rational_period([atom for i, atom in enumerate(atoms) if i != irrational[0]])
    denominators = _continued_fraction_denominators(float(alpha))
    count = min(policy.length, len(denominators) - 1)
    if count < 1:
        return None
    seq = SequenceSpec.explicit([period * q for q in denominators[:count]])
    epsilons = [weight * 2.0 * math.pi ** 2 * period ** 2 / denominators[k + 1] ** 2 for k in range(count)]
    return _poisson_certificate(model, seq, epsilons, policy.tol,
                                "eps_k = w 2 pi^2 L^2 / q_(k+1)^2 over continued-fraction denominators q_k")


def _greedy_recurrence(model: CyclicUnitary, policy: "Policy") -> Empirical:
    """Running maxima of Re mu^(n) over n <= search_max"""
    measure = model.measure
    best = -np.inf
    record = []
    for n in range(1, policy.search_max + 1):
        value = measure.fourier(n, policy.tol).value.real
        if value > best + policy.tol:
            best = value
            record.append(n)
    seq = SequenceSpec.explicit(record)
    logger.warning("no certified recurrence family for %s; greedy search max Re mu^(n) = %.6f",
                   measure.kind, best)
    return Empirical("greedy running maxima of Re mu^(n)",
                     (("max_real_part", float(best)), ("argmax", float(record[-1])),
                      ("search_max", float(policy.search_max))), seq)


def recurrence_certificate(model: CyclicUnitary, policy: Optional["Policy"] = None) -> Certificate:
    """Poisson recurrence of the cyclic vector e_0 when a sequence family yields certified eps_k -> 0"""
    if not isinstance(model, CyclicUnitary):
        raise LabError("recurrence certificates are issued for cyclic unitary components")
    policy = policy or Policy()
    measure = model.measure
    if isinstance(measure, InfiniteConvolutionMeasure):
        length = min(policy.length, measure.j_max)
        seq = SequenceSpec.tower(measure.base, measure.rule, length)
        epsilons = [2.0 * math.pi * measure.tail_sum(k, shift=measure.exponent(k)) for k in range(1, length + 1)]
        return _poisson_certificate(model, seq, epsilons, policy.tol,
                                    "eps_k = 2 pi sum_{j>k} b^(n_k - n_j)")
    if isinstance(measure, AtomicMeasure):
        certificate = _atomic_recurrence(model, measure, policy)
        if certificate is not None:
            return certificate
    return _greedy_recurrence(model, policy)


# -- classification ---------------------------------------------------------------------------

def _scalar_limit(model: CyclicUnitary, policy: "Policy") -> Optional[ScalarLimit]:
    measure = model.measure
    seq = SequenceSpec.powers(measure.base, policy.scalar_power)
    prediction = predict_limit(model, seq, policy.tol)
    scalar = measure.fourier(1, policy.tol)
    if prediction is None or abs(scalar.value) <= 10.0 * scalar.error_bound + policy.tol:
        return None
    certificate = ScalarLimit(seq, scalar, "|mu^(b^k + q) - mu^(q) mu^(1)| <= 4 pi |q| s / b^k")
    if not certificate.verify(model, _cyclic_vector(), policy.tol):
        return None
    logger.info("scalar limit V = %.6f%+.6fi I certified along powers of %d",
                scalar.value.real, scalar.value.imag, measure.base)
    return certificate


def _shift_decay_evidence(component: UnilateralShift) -> Tuple[Tuple[str, float], ...]:
    evidence = []
    for t in (10.0, 50.0):
        result = component.semigroup_element(t, SparseVector.basis(0), 1e-8)
        largest = max(abs(v) for _, v in result.vector.coeffs) if result.vector.coeffs else 0.0
        evidence.append((f"max_coefficient_t{int(t)}", float(largest)))
    return tuple(evidence)


def _finite_label(component: FiniteContraction) -> ComponentClassification:
    if component.spectral_radius < 1.0:
        return ComponentClassification(
            H_W, WeakStabilityByClass("spectral_radius_lt_1", (("spectral_radius", component.spectral_radius),)))
    return ComponentClassification(
        UNKNOWN, Empirical("unimodular eigenvalues; use the finite oracle for the reversible part",
                           (("spectral_radius", component.spectral_radius),)))


def classify_component(component: OperatorModel, policy: Optional["Policy"] = None,
                       side: str = "discrete") -> ComponentClassification:
    """Label a direct summand H_m, H_w or unknown; closed-form classes first, certificates next"""
    policy = policy or Policy()
    if side not in ("discrete", "continuous"):
        raise LabError(f"unknown side {side!r}")
    if isinstance(component, DirectSum):
        raise LabError("classify_component takes a single direct summand")
    if isinstance(component, UnilateralShift):
        evidence = _shift_decay_evidence(component) if side == "continuous" else ()
        return ComponentClassification(H_W, WeakStabilityByClass("shift_structure", evidence), side)
    if isinstance(component, FiniteContraction):
        result = _finite_label(component)
        return ComponentClassification(result.label, result.certificate, side)
    if not isinstance(component, CyclicUnitary):
        raise LabError(f"cannot classify {component.kind} components")
    if side == "continuous":
        return _classify_group_side(component, policy)
    measure = component.measure
    if measure.is_absolutely_continuous:
        return ComponentClassification(H_W, WeakStabilityByClass("riemann_lebesgue"), side)
    if isinstance(measure, (AtomicMeasure, InfiniteConvolutionMeasure)):
        certificate = recurrence_certificate(component, policy)
        if isinstance(certificate, PoissonRecurrence):
            return ComponentClassification(H_M, certificate, side)
        return ComponentClassification(UNKNOWN, certificate, side)
    if isinstance(measure, SelfSimilarMeasure):
        certificate = _scalar_limit(component, policy)
        if certificate is not None:
            return ComponentClassification(H_M, certificate, side)
    return ComponentClassification(UNKNOWN, _greedy_recurrence(component, policy), side)


def _classify_group_side(component: CyclicUnitary, policy: "Policy") -> ComponentClassification:
    measure = component.group_measure
    if measure.is_absolutely_continuous:
        certificate = WeakStabilityByClass("riemann_lebesgue", side="continuous")
        return ComponentClassification(H_W, certificate, "continuous")
    atoms = measure.atoms()
    if isinstance(measure, AtomicMeasure) and all(float(theta) == 0.0 for theta, _ in atoms):
        seq = SequenceSpec.grid([float(k) for k in range(1, policy.length + 1)])
        x = _cyclic_vector()
        observed = trajectory(component, x, x, seq, policy.scan_tol)
        certificate = PoissonRecurrence(seq, (0.0,) * policy.length, tuple(observed), (), 1.0,
                                        "eps_k = 0 (U_t fixes the atom at lambda = 0)")
        return ComponentClassification(H_M, certificate, "continuous")
    scan = continuous_recurrence_scan(component, policy=policy)
    data = tuple((f"window_{a}_max", m) for a, m, _ in scan.windows)
    if scan.nondecaying:
        grid = SequenceSpec.grid(scan.kept_candidates) if scan.kept_candidates else None
        return ComponentClassification(
            H_M, Empirical("group pairings do not decay on any scanned window", data, grid), "continuous")
    return ComponentClassification(
        UNKNOWN, Empirical("group pairings fall below the non-decay threshold", data), "continuous")


# -- continuous-time scan -----------------------------------------------------------------------

@dataclass(frozen=True)
class ContinuousScan:
    """Window maxima of |<U_t x, x>| over t in [2^a, 2^(a+1)] and values on the candidate grid"""
    windows: Tuple[Tuple[int, float, float], ...]
    candidates: Tuple[Tuple[float, FourierValue], ...]
    dropped_candidates: Tuple[float, ...]
    threshold: float
    bound: float

    @property
    def nondecaying(self) -> bool:
        return all(maximum >= self.threshold for _, maximum, _ in self.windows)

    @property
    def kept_candidates(self) -> List[float]:
        return [t for t, _ in self.candidates]

    def to_report(self) -> Dict:
        return {
            "parameters": {"threshold": self.threshold},
            "nondecaying": self.nondecaying,
            "windows": [{"exponent": a, "max_modulus": claim(m, self.bound, CERTIFIED),
                         "argmax": claim(t, None, EMPIRICAL)} for a, m, t in self.windows],
            "candidates": [{"t": claim(t, None, EMPIRICAL), "pairing": fourier_claim(v)}
                           for t, v in self.candidates],
            "dropped_candidates": [claim(t, None, EMPIRICAL) for t in self.dropped_candidates],
        }


def continuous_recurrence_scan(model: CyclicUnitary, x: Optional[SparseVector] = None,
                               policy: Optional["Policy"] = None) -> ContinuousScan:
    """Evaluate <U_t x, x> on dyadic windows and on candidate return times t_k = 2 pi b^(n_k)"""
    policy = policy or Policy()
    x = x if x is not None else _cyclic_vector()
    measure = model.group_measure
    line = pushforward_to_line(measure)
    coefficients = pairing_coefficients(x, x)
    windows = []
    bound = 0.0
    low, high = policy.scan_windows
    for a in range(low, high + 1):
        times = np.linspace(2.0 ** a, 2.0 ** (a + 1), policy.scan_points)
        values = group_values(line, coefficients, times, policy.scan_tol)
        moduli = np.array([abs(v.value) for v in values])
        best = int(np.argmax(moduli))
        bound = max(bound, values[0].error_bound)
        windows.append((a, float(moduli[best]), float(times[best])))

    grid = policy.continuous_grid
    if grid is None and isinstance(measure, InfiniteConvolutionMeasure):
        grid = tuple(tower_grid(measure, policy.length))
    kept, dropped = [], []
    nodes = line.rule(GroupPhase(1.0), policy.scan_tol).nodes
    lam_max = float(np.abs(line.angle_map.to_line(nodes)).max()) if len(nodes) else 0.0
    for t in grid or ():
        # double precision phases t * lambda must stay below the scan tolerance
        if abs(t) * max(lam_max, 1.0) * np.finfo(float).eps > policy.scan_tol:
            logger.warning("candidate t = %.6e exceeds double-precision phase accuracy; skipped", t)
            dropped.append(float(t))
            continue
        value = group_values(line, coefficients, [t], policy.scan_tol)[0]
        kept.append((float(t), value))
    scan = ContinuousScan(tuple(windows), tuple(kept), tuple(dropped), policy.nondecay_threshold, bound)
    logger.warning("continuous-time recurrence is empirical: window maxima %s",
                   ", ".join(f"{m:.3f}" for _, m, _ in windows))
    return scan


# -- weakly wandering vectors -------------------------------------------------------------------

@dataclass(frozen=True)
class WanderingFailure:
    requested: int
    epsilon: float
    best_indices: Tuple[int, ...]
    best_epsilon: float

    def to_report(self) -> Dict:
        return {"kind": "weakly_wandering_failure", "requested": self.requested,
                "epsilon": claim(self.epsilon, 0.0, CERTIFIED), "best_indices": list(self.best_indices),
                "best_epsilon": claim(self.best_epsilon, 0.0, CERTIFIED)}


def weakly_wandering_search(model: OperatorModel, x: VectorRep, m: int, epsilon: float, n_max: int,
                            tol: float = 1e-12) -> Union[WeaklyWandering, WanderingFailure]:
    """Greedy search for k_0 < ... < k_{m-1} <= n_max with |<T^{k_j} x, T^{k_l} x>| <= epsilon.

    Models must be isometric, so pairings depend only on k_j - k_l; the smallest admissible index is
    taken at every step.
    """
    if m < 2:
        raise LabError("weakly wandering search needs m >= 2")
    if not all(isinstance(c, (CyclicUnitary, UnilateralShift)) for _, c in cyclic_components(model)):
        raise LabError("weakly wandering search needs an isometric model")
    cache: Dict[int, float] = {}

    def pairing(d: int) -> float:
        if d not in cache:
            value = model.inner_product(model.apply_power(d, x), x, tol)
            cache[d] = abs(value.value) + value.error_bound
        return cache[d]

    indices = [0]
    for k in range(1, n_max + 1):
        if len(indices) == m:
            break
        if all(pairing(k - j) <= epsilon for j in indices):
            indices.append(k)
    if len(indices) == m:
        largest = max(pairing(b - a) for i, a in enumerate(indices) for b in indices[i + 1:])
        certificate = WeaklyWandering(tuple(indices), float(epsilon), float(largest))
        if not certificate.verify(model, x, tol):
            raise LabError("weakly wandering certificate failed its own verification")
        logger.info("weakly wandering indices %s at epsilon %.3e", indices, epsilon)
        return certificate

    best = [0]
    worst = 0.0
    for _ in range(m - 1):
        start = best[-1] + 1
        if start > n_max:
            break
        scores = [(max(pairing(k - j) for j in best), k) for k in range(start, n_max + 1)]
        score, k = min(scores)
        best.append(k)
        worst = max(worst, score)
    logger.info("weakly wandering search failed; best epsilon %.3e", worst)
    return WanderingFailure(m, float(epsilon), tuple(best), float(worst))


# -- limit cycles -------------------------------------------------------------------------------

@dataclass(frozen=True)
class LimitCycleEntry:
    shift: float
    orbit: FourierValue
    limit_cycle: FourierValue
    difference: float
    allowed: Optional[float]


@dataclass(frozen=True)
class LimitCycleReport:
    tier: str
    entries: Tuple[LimitCycleEntry, ...]

    @property
    def passed(self) -> bool:
        return all(e.allowed is not None and e.difference <= e.allowed for e in self.entries)

    def to_report(self) -> Dict:
        rows = []
        for e in self.entries:
            bound = e.allowed if self.tier == CERTIFIED else None
            tier = self.tier if bound is not None else EMPIRICAL
            rows.append({"shift": claim(e.shift, None, EMPIRICAL) if isinstance(e.shift, float) else e.shift,
                         "orbit": fourier_claim(e.orbit), "limit_cycle": fourier_claim(e.limit_cycle),
                         "difference": claim(e.difference, bound, tier)})
        return {"tier": self.tier, "passed": self.passed, "entries": rows}


def limit_cycle_check(model: OperatorModel, estimate: LimitOperatorEstimate, x: VectorRep, y: VectorRep,
                      shifts: Sequence, tol: float) -> LimitCycleReport:
    """Compare <T^{m + n_K} x, y> with <T^m V x, y> for the predicted limit operator V"""
    validate_tol(tol)
    prediction = estimate.prediction
    if prediction is None:
        raise LabError("limit cycle checks need an estimate with a closed-form prediction")
    seq = estimate.sequence
    last = seq.term(seq.length)
    entries = []
    for shift in shifts:
        if seq.is_continuous:
            orbit = continuous_pairings(model, x, y, [shift + last], tol)[0]
            moved_pairs = FourierValue(0j, 0.0)
            for (index, component), scalar in zip(cyclic_components(model), prediction.scalars):
                if scalar == 0:
                    continue
                xc, yc = component_vector(model, x, index), component_vector(model, y, index)
                moved_pairs = moved_pairs + continuous_pairings(component, xc, yc, [shift], tol)[0].scale(scalar)
            difference = abs(orbit.value - moved_pairs.value)
            allowed = tol + estimate.cauchy_residual + orbit.error_bound + moved_pairs.error_bound
            entries.append(LimitCycleEntry(float(shift), orbit, moved_pairs, difference, allowed))
            continue
        shift = int(shift)
        moved = model.apply_power(shift, x)
        orbit = model.inner_product(model.apply_power(last, moved), y, tol)
        cycle = prediction.pairing(model, moved, y, tol)
        rate = prediction.rate(model, moved, y, seq.length)
        difference = abs(orbit.value - cycle.value)
        allowed = None if rate is None else tol + rate + orbit.error_bound + cycle.error_bound
        entries.append(LimitCycleEntry(shift, orbit, cycle, difference, allowed))
    tier = prediction.tier if not seq.is_continuous else PREDICTED
    report = LimitCycleReport(tier, tuple(entries))
    logger.info("limit cycle check along %s: %s", seq.form, "passed" if report.passed else "not passed")
    return report
