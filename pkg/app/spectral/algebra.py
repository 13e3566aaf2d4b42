"""
The limit algebra at frame scale.

On a cyclic component the limit algebra acts through the bounded functional calculus of the
cogenerator, so it is exercised here through Fourier polynomials w(U), least-squares membership in
spans of orbit vectors, the H_m / H_w splitting with its flight decomposition, and the comparison of
the discrete and continuous splittings across the Cayley bridge.
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy import linalg

from app.config import settings
from app.spectral.cayley import (
    CayleyAngleMap,
    Integrand,
    TrigPolynomial,
    group_polynomial,
    group_values,
    pushforward_to_line,
    resolvent_powers,
)
from app.spectral.claims import CERTIFIED, EMPIRICAL, claim, fourier_claim
from app.spectral.dynamics import H_M, H_W, UNKNOWN, ComponentClassification, Policy, classify_component
from app.spectral.measures import FourierValue, QuadratureRule
from app.spectral.operators import (
    CyclicUnitary,
    DirectSum,
    OperatorModel,
    SparseVector,
    SumVector,
    VectorRep,
    component_vector,
    cyclic_components,
    pairing_coefficients,
)
from app.validation import LabError, RefusalError, ShapeMismatchError, validate_tol

logger = logging.getLogger(__name__)

ENTANGLED = "entangled"
DECOUPLED = "decoupled"
UNDETERMINED = "undetermined"


@dataclass(frozen=True)
class CalculusElement:
    """Fourier polynomial w(z) = sum_k c_k z^k, acting as w(U) = int w(e(theta)) dF_theta"""
    coefficients: Tuple[Tuple[int, complex], ...]

    def __post_init__(self):
        merged: Dict[int, complex] = {}
        for k, c in self.coefficients:
            merged[int(k)] = merged.get(int(k), 0j) + complex(c)
        object.__setattr__(self, "coefficients", tuple(sorted((k, c) for k, c in merged.items() if c != 0)))

    @classmethod
    def from_dict(cls, mapping: Mapping[int, complex]) -> "CalculusElement":
        return cls(tuple(mapping.items()))

    @classmethod
    def constant(cls, value: complex = 1.0) -> "CalculusElement":
        return cls(((0, value),))

    @classmethod
    def monomial(cls, power: int, value: complex = 1.0) -> "CalculusElement":
        return cls(((power, value),))

    def as_dict(self) -> Dict[int, complex]:
        return dict(self.coefficients)

    def __mul__(self, other: "CalculusElement") -> "CalculusElement":
        return CalculusElement(tuple((j + k, a * b) for j, a in self.coefficients for k, b in other.coefficients))

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        values = np.zeros(z.shape, dtype=complex)
        for k, c in self.coefficients:
            values += c * z ** k
        return values

    @property
    def l1_norm(self) -> float:
        return float(sum(abs(c) for _, c in self.coefficients))

    def sup_estimate(self, points: Optional[int] = None) -> float:
        """max |w(e(theta))| over an equispaced grid"""
        points = points or settings.sup_grid_points
        grid = np.exp(2j * np.pi * np.arange(points) / points)
        return float(np.abs(self(grid)).max()) if self.coefficients else 0.0

    def describe(self) -> Dict:
        return {"coefficients": [[k, c.real, c.imag] for k, c in self.coefficients]}


@dataclass(frozen=True)
class CalculusResult:
    vector: SparseVector
    sup_estimate: float
    norm_bound: float


def apply_calculus(model: CyclicUnitary, w: CalculusElement, x: VectorRep) -> CalculusResult:
    """w(U) x by exact frequency convolution; ||w(U)|| <= sup |w| <= sum |c_k|"""
    if not isinstance(model, CyclicUnitary):
        raise ShapeMismatchError("the functional calculus acts on cyclic unitary components")
    if not isinstance(x, SparseVector):
        raise ShapeMismatchError("cyclic vectors are sparse frequency maps")
    image = SparseVector()
    for k, c in w.coefficients:
        image = image + x.shift(k).scale(c)
    return CalculusResult(image, w.sup_estimate(), w.l1_norm)


class CalculusIntegrand(Integrand):
    """u(lambda(theta)) with u(lambda) = w((i - lambda) / (i + lambda))"""

    def __init__(self, w: CalculusElement):
        self.w = w
        self.trig = TrigPolynomial(w.as_dict())

    def __call__(self, theta):
        return self.w(CayleyAngleMap.cayley_point(CayleyAngleMap.to_line(theta)))

    def bounds(self, lo, hi):
        # u(lambda(theta)) equals w(e(theta)), so its derivatives are those of the trig polynomial
        return self.trig.bounds(lo, hi)


@dataclass(frozen=True)
class CalculusComparison:
    frequency: FourierValue
    line: FourierValue

    @property
    def discrepancy(self) -> float:
        return abs(self.frequency.value - self.line.value)

    @property
    def allowed(self) -> float:
        return self.frequency.error_bound + self.line.error_bound

    def to_report(self) -> Dict:
        return {"frequency": fourier_claim(self.frequency), "line": fourier_claim(self.line),
                "discrepancy": claim(self.discrepancy, self.allowed, CERTIFIED)}


def calculus_two_ways(model: CyclicUnitary, w: CalculusElement, x: SparseVector, y: SparseVector,
                      tol: float) -> CalculusComparison:
    """<w(U) x, y> by frequency convolution and by integrating u(lambda) against the line measure"""
    validate_tol(tol)
    result = apply_calculus(model, w, x)
    frequency = model.inner_product(result.vector, y, tol / 2)
    weight = TrigPolynomial(pairing_coefficients(x, y))
    if not weight.coefficients or not w.coefficients:
        return CalculusComparison(frequency, FourierValue(0j, 0.0))
    line = pushforward_to_line(model.group_measure)
    integrand = CalculusIntegrand(w) * weight
    return CalculusComparison(frequency, line.integrate(integrand, tol / 2))


# -- membership in orbit spans ------------------------------------------------------------------

@dataclass(frozen=True)
class MembershipResult:
    """Least-squares distance of targets from the span of generators, after Gram truncation"""
    residuals: Tuple[float, ...]
    rank: int
    size: int
    condition: float
    floor: float

    @property
    def residual(self) -> float:
        return max(self.residuals) if self.residuals else 0.0

    @property
    def truncated(self) -> bool:
        return self.rank < self.size

    def to_report(self) -> Dict:
        return {"residuals": [claim(r, None, EMPIRICAL) for r in self.residuals],
                "rank": self.rank, "size": self.size, "truncated": self.truncated,
                "condition": claim(self.condition, None, EMPIRICAL),
                "parameters": {"gram_floor": self.floor}}


def _truncated_eigh(gram: np.ndarray, floor: float) -> Tuple[np.ndarray, np.ndarray, float]:
    """Eigenpairs of a Hermitian Gram matrix above ``floor`` and the condition number they keep"""
    eigenvalues, eigenvectors = linalg.eigh(gram)
    keep = eigenvalues > floor
    condition = float(eigenvalues[keep].max() / eigenvalues[keep].min()) if keep.any() else np.inf
    return eigenvalues[keep], eigenvectors[:, keep], condition


def gram_rank(gram: np.ndarray, floor: Optional[float] = None) -> MembershipResult:
    """Rank and truncation of a frame from its Gram matrix alone"""
    floor = floor if floor is not None else settings.gram_floor
    kept, _, condition = _truncated_eigh(gram, floor)
    return MembershipResult((), len(kept), len(gram), condition, floor)


def span_residuals(model: OperatorModel, generators: Sequence[VectorRep], targets: Sequence[VectorRep],
                   tol: float, floor: Optional[float] = None) -> MembershipResult:
    """dist(y, span generators) for every target y, using the Gram matrix truncated below ``floor``.

    The residual is measured on the vector y - sum_b c_b g_b itself rather than through
    ||y||^2 - ||P y||^2, which loses half the digits to cancellation.
    """
    validate_tol(tol)
    floor = floor if floor is not None else settings.gram_floor
    size = len(generators)
    if size == 0:
        raise LabError("membership needs at least one generator")
    gram = np.zeros((size, size), dtype=complex)
    for a, va in enumerate(generators):
        for b in range(a, size):
            value = model.inner_product(generators[b], va, tol).value
            gram[a, b] = value
            gram[b, a] = np.conj(value)
    kept, kept_vectors, condition = _truncated_eigh(gram, floor)
    rank = len(kept)
    if rank < size:
        logger.warning("Gram matrix regularized: rank %d of %d at floor %.1e", rank, size, floor)
    residuals = []
    for y in targets:
        rhs = np.array([model.inner_product(y, v, tol).value for v in generators])
        weights = kept_vectors @ ((kept_vectors.conj().T @ rhs) / kept)
        remainder = y
        for c, g in zip(weights, generators):
            remainder = remainder - g.scale(complex(c))
        # absolute accuracy below the squared residuals of interest
        norm_squared = model.inner_product(remainder, remainder, min(tol, 1e-16)).value.real
        residuals.append(float(np.sqrt(max(norm_squared, 0.0))))
    return MembershipResult(tuple(residuals), rank, size, condition, floor)


def _orbit(model: OperatorModel, x: VectorRep, window: int) -> List[VectorRep]:
    return [model.apply_power(n, x) for n in range(-window, window + 1)]


def limit_space_membership(model: CyclicUnitary, x: VectorRep, y: VectorRep, window: int,
                           tol: Optional[float] = None) -> MembershipResult:
    """Distance of y from span{U^n x : |n| <= window}, the frame-scale shadow of M(x, S)"""
    if not isinstance(model, CyclicUnitary):
        raise ShapeMismatchError("limit-space membership is computed on cyclic unitary components")
    if window < 0:
        raise LabError("window must be >= 0")
    tol = tol if tol is not None else settings.default_tol
    return span_residuals(model, _orbit(model, x, window), [y], tol)


@dataclass(frozen=True)
class FuturePastResiduals:
    forward_in_backward: MembershipResult
    backward_in_forward: MembershipResult

    def to_report(self) -> Dict:
        return {"forward_in_backward": self.forward_in_backward.to_report(),
                "backward_in_forward": self.backward_in_forward.to_report()}


def future_past_residuals(model: CyclicUnitary, x: VectorRep, window: int,
                          tol: Optional[float] = None) -> FuturePastResiduals:
    """Forward orbit vectors against the adjoint-orbit span and the other way round"""
    if not isinstance(model, CyclicUnitary):
        raise ShapeMismatchError("future and past spans are compared on cyclic unitary components")
    tol = tol if tol is not None else settings.default_tol
    forward = [model.apply_power(n, x) for n in range(window + 1)]
    backward = [model.apply_adjoint_power(n, x) for n in range(window + 1)]
    # two-sided spans: U^(-n) = U*^n and U*^(-n) = U^n on a unitary
    forward_span = forward + [model.apply_power(-n, x) for n in range(1, window + 1)]
    backward_span = backward + [model.apply_power(n, x) for n in range(1, window + 1)]
    return FuturePastResiduals(span_residuals(model, backward_span, forward, tol),
                               span_residuals(model, forward_span, backward, tol))


# -- splitting ----------------------------------------------------------------------------------

@dataclass(frozen=True)
class SplittingReport:
    classifications: Tuple[ComponentClassification, ...]
    side: str = "discrete"

    @property
    def labels(self) -> List[str]:
        return [c.label for c in self.classifications]

    def indices(self, label: str) -> List[int]:
        return [i for i, value in enumerate(self.labels) if value == label]

    @property
    def h_m(self) -> List[int]:
        return self.indices(H_M)

    @property
    def h_w(self) -> List[int]:
        return self.indices(H_W)

    @property
    def unknown(self) -> List[int]:
        return self.indices(UNKNOWN)

    def to_report(self) -> Dict:
        return {"side": self.side, "h_m": self.h_m, "h_w": self.h_w, "unknown": self.unknown,
                "components": [c.to_report() for c in self.classifications]}

    def to_frame(self) -> pd.DataFrame:
        """Per-component label table"""
        return pd.DataFrame({
            "component": range(len(self.classifications)),
            "side": [c.side for c in self.classifications],
            "label": self.labels,
            "certificate": [c.certificate.kind for c in self.classifications],
            "tier": [c.certificate.tier for c in self.classifications],
        })


def split_model(model: OperatorModel, policy: Optional[Policy] = None, side: str = "discrete") -> SplittingReport:
    """Classify every direct summand of ``model``"""
    policy = policy or Policy()
    classifications = tuple(classify_component(c, policy, side) for _, c in cyclic_components(model))
    report = SplittingReport(classifications, side)
    logger.info("%s splitting: H_m %s, H_w %s, unknown %s", side, report.h_m, report.h_w, report.unknown)
    return report


def _check_splitting(model: OperatorModel, splitting: SplittingReport) -> List[Tuple[int, OperatorModel]]:
    parts = cyclic_components(model)
    if len(parts) != len(splitting.classifications):
        raise ShapeMismatchError(
            f"splitting has {len(splitting.classifications)} components, model has {len(parts)}")
    return parts


def _assemble(model: OperatorModel, parts: List[VectorRep]) -> VectorRep:
    return SumVector(tuple(parts)) if isinstance(model, DirectSum) else parts[0]


def projection_P_m(model: OperatorModel, splitting: SplittingReport, x: VectorRep) -> Tuple[VectorRep, VectorRep]:
    """x = x_m + x_w by copying each component to its side of the splitting"""
    parts = _check_splitting(model, splitting)
    kept, rest = [], []
    for (index, component), label in zip(parts, splitting.labels):
        piece = component_vector(model, x, index)
        zero = component.zero_vector()
        if label == UNKNOWN:
            if not piece.is_zero():
                raise RefusalError(f"component {index} has an unknown label and carries mass")
            kept.append(zero)
            rest.append(zero)
        elif label == H_M:
            kept.append(piece)
            rest.append(zero)
        else:
            kept.append(zero)
            rest.append(piece)
    return _assemble(model, kept), _assemble(model, rest)


@dataclass(frozen=True)
class FlightDecomposition:
    """x = sum_tau T_tau x_tau + x_w with T_tau in the calculus and x_tau the cyclic vectors"""
    terms: Tuple[Tuple[int, CalculusElement], ...]
    x_w: VectorRep

    def recompose(self, model: OperatorModel) -> VectorRep:
        parts = [component_vector(model, self.x_w, i) for i, _ in cyclic_components(model)]
        components = dict(cyclic_components(model))
        for index, element in self.terms:
            image = apply_calculus(components[index], element, SparseVector.basis(0)).vector
            parts[index] = parts[index] + image
        return _assemble(model, parts)

    def to_report(self) -> Dict:
        return {"terms": [{"component": i, "element": e.describe()} for i, e in self.terms]}


def flight_decomposition(model: OperatorModel, splitting: SplittingReport, x: VectorRep) -> FlightDecomposition:
    x_m, x_w = projection_P_m(model, splitting, x)
    terms = []
    for index, component in _check_splitting(model, splitting):
        if splitting.labels[index] != H_M:
            continue
        if not isinstance(component, CyclicUnitary):
            raise LabError(f"H_m component {index} is not cyclic; no calculus element is available")
        piece = component_vector(model, x_m, index)
        if not piece.is_zero():
            # T_tau e_0 = sum_k c_k e_k, so the coefficients are the polynomial itself
            terms.append((index, CalculusElement(piece.coeffs)))
    return FlightDecomposition(tuple(terms), x_w)


def recurrent_spanning_set(model: OperatorModel, splitting: SplittingReport) -> List[VectorRep]:
    """One unit cyclic vector per H_m component; pairwise orthogonal across the direct sum"""
    vectors = []
    for index, component in _check_splitting(model, splitting):
        if splitting.labels[index] != H_M:
            continue
        if not isinstance(component, CyclicUnitary):
            raise LabError(f"H_m component {index} is not cyclic")
        vector = SparseVector.basis(0)
        vectors.append(model.embed(index, vector) if isinstance(model, DirectSum) else vector)
    return vectors


# -- entanglement -------------------------------------------------------------------------------

@dataclass(frozen=True)
class TargetResidual:
    """Distance of one frame vector from the other frame's span: measured on the rule, certified in sup norm"""
    index: int
    residual: float
    bound: float
    spanning: int
    order: int


@dataclass(frozen=True)
class WindowWitness:
    """{U^n x : |n| <= N} and {U_(jh) x : |j| <= N}, each approximated inside the other's span"""
    window: int
    discrete_in_group: Tuple[TargetResidual, ...]
    group_in_discrete: Tuple[TargetResidual, ...]
    discrete_gram: MembershipResult
    group_gram: MembershipResult

    @property
    def bounds(self) -> Tuple[float, float]:
        return (max(r.bound for r in self.discrete_in_group), max(r.bound for r in self.group_in_discrete))

    def to_report(self) -> Dict:
        return {
            "window": self.window,
            "discrete_in_group": [{"power": r.index, "residual": claim(r.residual, r.bound, CERTIFIED),
                                   "group_vectors": r.spanning, "laguerre_nodes": r.order}
                                  for r in self.discrete_in_group],
            "group_in_discrete": [{"step": r.index, "residual": claim(r.residual, r.bound, CERTIFIED),
                                   "discrete_vectors": r.spanning, "degree": r.order}
                                  for r in self.group_in_discrete],
            "discrete_gram": self.discrete_gram.to_report(),
            "group_gram": self.group_gram.to_report(),
        }


@dataclass(frozen=True)
class LimitSpaceWitness:
    """M(x, C) = M(x, U) at frame scale on one H_m component"""
    component: int
    windows: Tuple[WindowWitness, ...]
    bridge: Tuple[Tuple[int, CalculusComparison], ...]
    tol: float
    residual_tol: float
    time_step: float
    reason: str = ""

    @property
    def residual_bound(self) -> float:
        return max(max(w.bounds) for w in self.windows) if self.windows else np.inf

    @property
    def passed(self) -> bool:
        within = all(c.discrepancy <= c.allowed + self.tol for _, c in self.bridge)
        return within and not self.reason and self.residual_bound <= self.residual_tol

    def to_report(self) -> Dict:
        return {"component": self.component, "passed": self.passed, "reason": self.reason,
                "windows": [w.to_report() for w in self.windows],
                "bridge": [{"power": n, **c.to_report()} for n, c in self.bridge],
                "parameters": {"residual_tol": self.residual_tol, "time_step": self.time_step}}


def _rule_residual(rule: QuadratureRule, exact: np.ndarray, approx: np.ndarray) -> float:
    return float(np.sqrt(np.dot(rule.weights, np.abs(exact - approx) ** 2)))


def _toeplitz_gram(values: Sequence[complex]) -> np.ndarray:
    """Gram matrix with entries values[b - a] above the diagonal"""
    values = np.asarray(values, dtype=complex)
    return linalg.toeplitz(values.conj(), values)


def limit_space_witness(model: CyclicUnitary, index: int, tol: float, max_window: Optional[int] = None,
                        time_step: Optional[float] = None) -> LimitSpaceWitness:
    """Powers U^n e_0 and group vectors U_t e_0 approximate each other for every window N <= max_window.

    U^n x is matched by a finite combination of group vectors (resolvent powers on Gauss-Laguerre nodes)
    and U_(jh) x by a cogenerator polynomial. Both approximants carry sup-norm bounds over the support
    hulls, which bound the L^2 residuals; the residuals themselves are measured on the measure's
    quadrature rule. The Gram ranks of both frames are reported per window.
    """
    if not isinstance(model, CyclicUnitary):
        raise ShapeMismatchError("limit-space witnesses are built on cyclic unitary components")
    validate_tol(tol)
    max_window = max_window if max_window is not None else settings.witness_max_window
    step = time_step if time_step is not None else settings.witness_time_step
    residual_tol = settings.witness_residual_tol
    if max_window < 1 or step <= 0:
        raise LabError("witness windows need max_window >= 1 and a positive time step")
    x = SparseVector.basis(0)
    keys = range(-max_window, max_window + 1)
    bridge = tuple((n, calculus_two_ways(model, CalculusElement.monomial(n), x, x, tol)) for n in keys)

    line = pushforward_to_line(model.measure)
    lam_max, sine_max = line.extent(settings.witness_extent_depth)
    if not np.isfinite(lam_max) or sine_max >= 1.0:
        reason = "support hulls reach theta = 1/2, so the frame approximants have no certified bound"
        logger.warning("component %d: %s", index, reason)
        return LimitSpaceWitness(index, (), bridge, tol, residual_tol, step, reason)

    rule = model.measure.quadrature(settings.witness_rule_depth)
    lam = line.angle_map.to_line(rule.nodes)
    powers = resolvent_powers(max_window, lam_max)
    rows = powers.values(lam)
    discrete = {}
    for n in keys:
        approx, bound = powers.cogenerator_power(n, rows)
        exact = np.exp(2j * np.pi * n * rule.nodes)
        discrete[n] = TargetResidual(n, _rule_residual(rule, exact, approx), bound,
                                     powers.group_vectors(n), powers.nodes)
    group = {}
    for j in keys:
        polynomial = group_polynomial(j * step, sine_max, residual_tol / 4)
        exact = np.exp(1j * j * step * lam)
        group[j] = TargetResidual(j, _rule_residual(rule, exact, polynomial(rule.nodes)), polynomial.bound,
                                  polynomial.degree + 1, polynomial.degree)

    lags = range(2 * max_window + 1)
    discrete_gram = _toeplitz_gram([model.inner_product(SparseVector.basis(d), x, tol).value for d in lags])
    group_gram = _toeplitz_gram([v.value for v in group_values(line, {0: 1.0}, [d * step for d in lags], tol)])
    windows = []
    for window in range(1, max_window + 1):
        span = slice(max_window - window, max_window + window + 1)
        inner = range(-window, window + 1)
        windows.append(WindowWitness(window, tuple(discrete[n] for n in inner), tuple(group[j] for j in inner),
                                     gram_rank(discrete_gram[span, span]), gram_rank(group_gram[span, span])))
    witness = LimitSpaceWitness(index, tuple(windows), bridge, tol, residual_tol, step)
    logger.info("component %d witness over windows 1..%d: residual bound %.2e, group ranks %s", index,
                max_window, witness.residual_bound, [w.group_gram.rank for w in windows])
    return witness


@dataclass(frozen=True)
class EntanglementVerdict:
    verdict: str
    discrete: SplittingReport
    continuous: SplittingReport
    witnesses: Tuple[LimitSpaceWitness, ...] = ()
    reason: str = ""
    synthetic: Tuple[int, ...] = field(default=())

    @property
    def pairs(self) -> List[Tuple[str, str]]:
        return list(zip(self.discrete.labels, self.continuous.labels))

    @property
    def mismatched(self) -> List[int]:
        return [i for i, (a, b) in enumerate(self.pairs) if a != b]

    def to_report(self) -> Dict:
        return {
            "verdict": self.verdict,
            "reason": self.reason,
            "pairs": [{"component": i, "discrete": a, "continuous": b, "agree": a == b}
                      for i, (a, b) in enumerate(self.pairs)],
            "mismatched": self.mismatched,
            "synthetic_components": list(self.synthetic),
            "discrete": self.discrete.to_report(),
            "continuous": self.continuous.to_report(),
            "witnesses": [w.to_report() for w in self.witnesses],
        }


def _verdict(pairs: Sequence[Tuple[str, str]]) -> Tuple[str, str]:
    labels = [label for pair in pairs for label in pair]
    if UNKNOWN in labels:
        unknown = [i for i, pair in enumerate(pairs) if UNKNOWN in pair]
        return UNDETERMINED, f"components {unknown} have unknown labels"
    if all(a == b for a, b in pairs):
        return ENTANGLED, "discrete and continuous splittings agree on every component"
    both = [i for i, (a, b) in enumerate(pairs) if a == b == H_M]
    one = [i for i, (a, b) in enumerate(pairs) if (a == H_M) != (b == H_M)]
    if not both and one:
        return DECOUPLED, f"H_m parts meet only in zero; components {one} are H_m on one side"
    return UNDETERMINED, f"components {both} are H_m on both sides while {one} disagree"


def entanglement_check(model: OperatorModel, policy: Optional[Policy] = None, tol: Optional[float] = None,
                       max_window: Optional[int] = None) -> EntanglementVerdict:
    """Compare the H_m / H_w splittings of the cogenerator powers and of the unitary group"""
    policy = policy or Policy()
    tol = validate_tol(tol if tol is not None else settings.default_tol)
    discrete = split_model(model, policy, "discrete")
    continuous = split_model(model, policy, "continuous")
    verdict, reason = _verdict(list(zip(discrete.labels, continuous.labels)))
    witnesses = []
    synthetic = []
    for index, component in cyclic_components(model):
        if isinstance(component, CyclicUnitary) and component.synthetic_group_measure is not None:
            synthetic.append(index)
        if discrete.labels[index] == continuous.labels[index] == H_M and isinstance(component, CyclicUnitary):
            witnesses.append(limit_space_witness(component, index, tol, max_window))
    failed = [w.component for w in witnesses if not w.passed]
    if verdict == ENTANGLED and failed:
        verdict, reason = UNDETERMINED, f"limit-space witnesses failed on components {failed}"
    if synthetic:
        logger.warning("verdict uses synthetic group measures on components %s", synthetic)
    logger.info("entanglement verdict: %s (%s)", verdict, reason)
    return EntanglementVerdict(verdict, discrete, continuous, tuple(witnesses), reason, tuple(synthetic))
