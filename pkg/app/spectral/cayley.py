"""
Bridge between the unitary cogenerator U (spectral family on the circle) and the unitary group
U_t = exp(itA) (spectral family on the line).

The angle map is lambda(theta) = tan(pi theta), the closed form of
theta = arg((i - lambda) / (i + lambda)) / 2 pi mod 1, so that (iI - A)(iI + A)^(-1) = U holds at
the spectral level. theta = 1/2 is the image of lambda = infinity and must carry no mass.
"""
import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import comb, eval_genlaguerre, gammaln, roots_genlaguerre

from app.config import settings
from app.spectral.measures import (
    AdaptiveRule,
    CircleMeasure,
    FourierValue,
    build_adaptive_rule,
)
from app.spectral.operators import CyclicUnitary, SparseVector, VectorRep, pairing_coefficients
from app.validation import (
    ExcludedPointError,
    LabError,
    PrecisionUnreachableError,
    ShapeMismatchError,
    validate_tol,
)

logger = logging.getLogger(__name__)

EXCLUDED_ANGLE = Fraction(1, 2)
TWO_PI = 2.0 * math.pi
# product of t-grid size and rule size evaluated at once
EVALUATION_BLOCK = 2 ** 22


@dataclass(frozen=True)
class CayleyAngleMap:
    """lambda(theta) = tan(pi theta) and its inverse theta(lambda) = arctan(lambda) / pi mod 1"""
    direction: str = "circle_to_line"

    def __post_init__(self):
        if self.direction not in ("circle_to_line", "line_to_circle"):
            raise LabError(f"unknown Cayley direction {self.direction!r}")

    def __call__(self, value):
        if self.direction == "circle_to_line":
            return self.to_line(value)
        return self.to_circle(value)

    def inverse(self) -> "CayleyAngleMap":
        flipped = "line_to_circle" if self.direction == "circle_to_line" else "circle_to_line"
        return CayleyAngleMap(flipped)

    @staticmethod
    def to_line(theta):
        return np.tan(np.pi * np.asarray(theta, dtype=float))

    @staticmethod
    def to_circle(lam):
        return np.mod(np.arctan(np.asarray(lam, dtype=float)) / np.pi, 1.0)

    @staticmethod
    def cayley_point(lam):
        """z = (i - lambda) / (i + lambda), the point of the unit circle over lambda"""
        lam = np.asarray(lam, dtype=float)
        return (1j - lam) / (1j + lam)

    @staticmethod
    def line_bounds(lo: np.ndarray, hi: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """sup |lambda|, sup |lambda'|, sup |lambda''| over [lo, hi]; infinite when the hull meets 1/2"""
        crosses = (lo <= 0.5) & (hi >= 0.5)
        with np.errstate(over="ignore", invalid="ignore"):
            edge = np.maximum(np.abs(np.tan(np.pi * lo)), np.abs(np.tan(np.pi * hi)))
        sup0 = np.where(crosses, np.inf, edge)
        sup1 = np.pi * (1.0 + sup0 ** 2)
        sup2 = 2.0 * np.pi ** 2 * sup0 * (1.0 + sup0 ** 2)
        return sup0, sup1, sup2


@dataclass(frozen=True)
class GroupElementRequest:
    t: float
    tol: float
    max_depth: Optional[int] = None

    def __post_init__(self):
        validate_tol(self.tol)
        if not np.isfinite(self.t):
            raise LabError("group time must be finite")


class Integrand(ABC):
    """Function of theta with derivative bounds over cylinder hulls"""

    @abstractmethod
    def __call__(self, theta: np.ndarray) -> np.ndarray:
        ...

    @abstractmethod
    def bounds(self, lo: np.ndarray, hi: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        ...

    def __mul__(self, other: "Integrand") -> "Integrand":
        return Product(self, other)


class TrigPolynomial(Integrand):
    def __init__(self, coefficients: Dict[int, complex]):
        self.coefficients = {k: complex(v) for k, v in coefficients.items() if v != 0}
        amplitudes = np.array([abs(v) for v in self.coefficients.values()])
        frequencies = np.array([TWO_PI * abs(k) for k in self.coefficients])
        self.sup = float(amplitudes.sum())
        self.first = float((amplitudes * frequencies).sum())
        self.second = float((amplitudes * frequencies ** 2).sum())

    def __call__(self, theta):
        theta = np.asarray(theta, dtype=float)
        values = np.zeros(theta.shape, dtype=complex)
        for k, a in self.coefficients.items():
            values += a * np.exp(1j * TWO_PI * k * theta)
        return values

    def bounds(self, lo, hi):
        shape = np.shape(lo)
        return np.full(shape, self.sup), np.full(shape, self.first), np.full(shape, self.second)


class GroupPhase(Integrand):
    """exp(i t lambda(theta))"""

    def __init__(self, t: float):
        self.t = float(t)

    def __call__(self, theta):
        return np.exp(1j * self.t * CayleyAngleMap.to_line(theta))

    def _derivative_bounds(self, lo, hi):
        if self.t == 0:
            return np.zeros(np.shape(lo)), np.zeros(np.shape(lo)), np.zeros(np.shape(lo))
        sup0, sup1, sup2 = CayleyAngleMap.line_bounds(lo, hi)
        speed = abs(self.t)
        return sup0, speed * sup1, speed ** 2 * sup1 ** 2 + speed * sup2

    def bounds(self, lo, hi):
        _, d1, d2 = self._derivative_bounds(lo, hi)
        return np.ones(np.shape(lo)), d1, d2


class GroupIncrement(GroupPhase):
    """exp(i t lambda(theta)) - 1"""

    def __call__(self, theta):
        return np.expm1(1j * self.t * CayleyAngleMap.to_line(theta))

    def bounds(self, lo, hi):
        sup0, d1, d2 = self._derivative_bounds(lo, hi)
        return np.minimum(2.0, abs(self.t) * sup0), d1, d2


class CayleyFactor(Integrand):
    """(1 + sign * e(theta)) / 2: sign +1 gives (1 - i lambda)^(-1), sign -1 gives -i lambda (1 - i lambda)^(-1)"""

    def __init__(self, sign: int = 1):
        self.sign = sign

    def __call__(self, theta):
        return 0.5 * (1.0 + self.sign * np.exp(1j * TWO_PI * np.asarray(theta, dtype=float)))

    def bounds(self, lo, hi):
        if self.sign > 0:
            sup = np.maximum(np.abs(np.cos(np.pi * lo)), np.abs(np.cos(np.pi * hi)))
        else:
            sup = np.ones(np.shape(lo))
        return sup, np.full(np.shape(lo), np.pi), np.full(np.shape(lo), 2.0 * np.pi ** 2)


class Product(Integrand):
    def __init__(self, left: Integrand, right: Integrand):
        self.left = left
        self.right = right

    def __call__(self, theta):
        return self.left(theta) * self.right(theta)

    def bounds(self, lo, hi):
        f0, f1, f2 = self.left.bounds(lo, hi)
        g0, g1, g2 = self.right.bounds(lo, hi)
        with np.errstate(invalid="ignore"):
            return f0 * g0, f1 * g0 + f0 * g1, f2 * g0 + 2.0 * f1 * g1 + f0 * g2


@dataclass(frozen=True)
class LineMeasure:
    """Pushforward of a circle measure under the Cayley angle map (the spectral measure of A)"""
    source: CircleMeasure
    angle_map: CayleyAngleMap
    pole_mass: float

    def atoms(self) -> List[Tuple[float, float]]:
        return [(float(self.angle_map.to_line(float(theta))), w) for theta, w in self.source.atoms()]

    def rule(self, integrand: Integrand, tol: float, max_depth: Optional[int] = None) -> AdaptiveRule:
        return build_adaptive_rule(self.source, integrand.bounds, tol, max_depth=max_depth)

    def integrate(self, integrand: Integrand, tol: float, max_depth: Optional[int] = None) -> FourierValue:
        """int integrand(theta) dmu(theta), refusing results whose certified bound misses ``tol``"""
        rule = self.rule(integrand, tol, max_depth)
        if rule.error_bound > tol:
            raise PrecisionUnreachableError("near-pole mass dominates the quadrature bound", rule.error_bound)
        return FourierValue(rule.integrate(integrand), rule.error_bound)

    def characteristic(self, t: float, tol: float, max_depth: Optional[int] = None) -> FourierValue:
        """nu^(t) = int exp(i t lambda) dnu(lambda)"""
        return self.integrate(GroupPhase(t), tol, max_depth)

    def extent(self, depth: int) -> Tuple[float, float]:
        """sup |lambda| and sup |sin(pi theta)| over the depth-``depth`` cylinder hulls that carry mass"""
        lam_max, sine_max = 0.0, 0.0
        for part, _ in self.source.components():
            cells = part.root_cylinders()
            for _ in range(depth):
                children = part.split(cells)
                if children is None:
                    break
                cells = children.take(children.mass > 0)
            lo, hi = cells.left, cells.left + cells.span
            lam_max = max(lam_max, float(self.angle_map.line_bounds(lo, hi)[0].max()))
            crosses = (lo <= 0.5) & (hi >= 0.5)
            edge = np.maximum(np.abs(np.sin(np.pi * lo)), np.abs(np.sin(np.pi * hi)))
            sine_max = max(sine_max, float(np.where(crosses, 1.0, edge).max()))
        return lam_max, sine_max


def pushforward_to_line(measure: CircleMeasure, angle_map: Optional[CayleyAngleMap] = None) -> LineMeasure:
    """E_lambda as the image of the circle measure; rejects atoms at the excluded angle 1/2"""
    angle_map = angle_map or CayleyAngleMap()
    for theta, weight in measure.atoms():
        if theta == EXCLUDED_ANGLE or float(theta) == 0.5:
            raise ExcludedPointError(f"atom of mass {weight} at theta = 1/2 (lambda = infinity)")
    pole_mass = measure.mass_near(0.5, settings.pole_check_depth)
    if pole_mass > settings.pole_mass_limit:
        logger.warning("depth-%d cylinders around theta = 1/2 carry mass %.3e; it enters quadrature bounds",
                       settings.pole_check_depth, pole_mass)
    return LineMeasure(measure, angle_map, pole_mass)


def cogenerator_from_line(line: LineMeasure) -> List[Tuple[complex, float]]:
    """Atoms of U = (iI - A)(iI + A)^(-1) recovered from the atoms of A"""
    return [(complex(CayleyAngleMap.cayley_point(lam)), w) for lam, w in line.atoms()]


def _cyclic_pair(model, x: VectorRep, y: VectorRep) -> Tuple[CyclicUnitary, Dict[int, complex]]:
    if not isinstance(model, CyclicUnitary):
        raise ShapeMismatchError("the Cayley bridge acts on cyclic unitary components")
    if not isinstance(x, SparseVector) or not isinstance(y, SparseVector):
        raise ShapeMismatchError("cyclic vectors are sparse frequency maps")
    return model, pairing_coefficients(x, y)


def spectral_pairing(measure: CircleMeasure, coefficients: Dict[int, complex], tol: float,
                     shift: int = 0) -> FourierValue:
    """sum_k a_k mu^(k + shift) with total bound <= tol"""
    mass = sum(abs(a) for a in coefficients.values())
    total = FourierValue(0j, 0.0)
    if mass == 0:
        return total
    for k in sorted(coefficients):
        total = total + measure.fourier(k + shift, tol / mass).scale(coefficients[k])
    return total


class GroupFunctional:
    """y -> <U_t x, y>; U_t x has no finite frequency support and is only available weakly"""

    def __init__(self, model: CyclicUnitary, x: SparseVector, tol: float, max_depth: Optional[int] = None):
        validate_tol(tol)
        self.model = model
        self.x = x
        self.tol = tol
        self.max_depth = max_depth
        self.line = pushforward_to_line(model.group_measure)

    def values(self, times: Sequence[float], y: VectorRep) -> List[FourierValue]:
        _, coefficients = _cyclic_pair(self.model, self.x, y)
        return group_values(self.line, coefficients, times, self.tol, self.max_depth)

    def __call__(self, y: VectorRep, t: float) -> FourierValue:
        return self.values([t], y)[0]


def group_values(line: LineMeasure, coefficients: Dict[int, complex], times: Sequence[float],
                 tol: float, max_depth: Optional[int] = None) -> List[FourierValue]:
    """int exp(i t lambda) G(theta) dmu for every t on one rule built for max |t|"""
    times = np.asarray(times, dtype=float)
    if len(times) == 0:
        return []
    weight_poly = TrigPolynomial(coefficients)
    if not weight_poly.coefficients:
        return [FourierValue(0j, 0.0) for _ in times]
    horizon = float(np.abs(times).max())
    rule = line.rule(GroupPhase(horizon) * weight_poly, tol, max_depth)
    if rule.error_bound > tol:
        raise PrecisionUnreachableError(f"group element at |t| = {horizon:g} misses tol", rule.error_bound)
    lam = line.angle_map.to_line(rule.nodes)
    weighted = rule.weights * weight_poly(rule.nodes)
    values = _phase_sums(times, lam, weighted)
    return [FourierValue(complex(v), rule.error_bound) for v in values]


def _phase_sums(times: np.ndarray, lam: np.ndarray, weighted: np.ndarray) -> np.ndarray:
    values = np.empty(len(times), dtype=complex)
    block = max(1, EVALUATION_BLOCK // max(1, len(lam)))
    for start in range(0, len(times), block):
        chunk = times[start:start + block]
        values[start:start + block] = np.exp(1j * np.outer(chunk, lam)) @ weighted
    return values


def apply_group(model: CyclicUnitary, t: float, x: VectorRep, tol: float,
                max_depth: Optional[int] = None) -> Callable[[VectorRep], FourierValue]:
    """The weak evaluation map y -> <U_t x, y>"""
    request = GroupElementRequest(t, tol, max_depth)
    if not isinstance(x, SparseVector):
        raise ShapeMismatchError("cyclic vectors are sparse frequency maps")
    functional = GroupFunctional(model, x, request.tol, request.max_depth)
    return lambda y: functional(y, request.t)


@dataclass(frozen=True)
class ResolventComparison:
    spectral: FourierValue
    laplace: FourierValue
    discrepancy: float
    horizon: float
    simpson_points: int


def resolvent_two_ways(model: CyclicUnitary, x: VectorRep, y: VectorRep, tol: float,
                       max_points: int = 2 ** 16) -> ResolventComparison:
    """<(I - iA)^(-1) x, y> spectrally and as the Laplace integral int_0^inf e^(-t) <U_t x, y> dt.

    The spectral side is closed form: (1 - i lambda)^(-1) = (1 + e(theta)) / 2. The Laplace side is
    truncated at T = ln(4 A / tol) (A bounds |<U_t x, y>|) and integrated with composite Simpson,
    doubling the panel count until successive sums differ by less than tol / 4.
    """
    validate_tol(tol)
    model, coefficients = _cyclic_pair(model, x, y)
    measure = model.group_measure
    line = pushforward_to_line(measure)
    spectral = (spectral_pairing(measure, coefficients, tol / 2) +
                spectral_pairing(measure, coefficients, tol / 2, shift=1)).scale(0.5)

    weight_poly = TrigPolynomial(coefficients)
    amplitude = weight_poly.sup
    if amplitude == 0:
        zero = FourierValue(0j, 0.0)
        return ResolventComparison(zero, zero, 0.0, 0.0, 0)
    horizon = max(math.log(4.0 * amplitude / tol), 1.0)
    rule = line.rule(GroupPhase(horizon) * weight_poly, tol / 4)
    lam = line.angle_map.to_line(rule.nodes)
    weighted = rule.weights * weight_poly(rule.nodes)
    # nodes far out on the line oscillate too fast for Simpson; their mass goes into the bound
    order = np.argsort(-np.abs(lam))
    dropped = np.cumsum(np.abs(weighted[order])) <= tol / 8
    keep = np.ones(len(lam), dtype=bool)
    keep[order[dropped]] = False
    dropped_bound = float(np.abs(weighted[~keep]).sum())
    lam, weighted = lam[keep], weighted[keep]

    def simpson(panels: int) -> complex:
        grid = np.linspace(0.0, horizon, panels + 1)
        samples = np.exp(-grid) * _phase_sums(grid, lam, weighted)
        step = horizon / panels
        return complex(step / 3.0 * (samples[0] + samples[-1] + 4.0 * samples[1:-1:2].sum()
                                     + 2.0 * samples[2:-1:2].sum()))

    panels = 64
    previous = simpson(panels)
    while True:
        panels *= 2
        current = simpson(panels)
        change = abs(current - previous)
        if change < tol / 4:
            break
        if panels >= max_points:
            raise PrecisionUnreachableError("Laplace side did not settle", change)
        previous = current
    bound = amplitude * math.exp(-horizon) + rule.error_bound + dropped_bound + change
    laplace = FourierValue(current, bound)
    discrepancy = abs(spectral.value - laplace.value)
    logger.debug("resolvent: %d rule nodes, %d Simpson panels, discrepancy %.3e", rule.size, panels, discrepancy)
    return ResolventComparison(spectral, laplace, discrepancy, horizon, panels)


@dataclass(frozen=True)
class GeneratorQuotients:
    times: Tuple[float, ...]
    quotients: Tuple[FourierValue, ...]
    target: FourierValue

    @property
    def errors(self) -> List[float]:
        return [abs(q.value - self.target.value) for q in self.quotients]


def generator_difference_quotient(model: CyclicUnitary, x: VectorRep, y: VectorRep,
                                  t_list: Sequence[float], tol: float) -> GeneratorQuotients:
    """<(1/t)(U_t - I) r, y> with r = (I - iA)^(-1) x, and the limit <iA (I - iA)^(-1) x, y>"""
    validate_tol(tol)
    times = [float(t) for t in t_list]
    if not times or any(t <= 0 for t in times) or any(b >= a for a, b in zip(times, times[1:])):
        raise LabError("t_list must be positive and strictly decreasing")
    model, coefficients = _cyclic_pair(model, x, y)
    measure = model.group_measure
    line = pushforward_to_line(measure)
    target = (spectral_pairing(measure, coefficients, tol / 2, shift=1) +
              spectral_pairing(measure, coefficients, tol / 2).scale(-1.0)).scale(0.5)
    weight_poly = TrigPolynomial(coefficients)
    quotients = []
    for t in times:
        value = line.integrate(GroupIncrement(t) * CayleyFactor(1) * weight_poly, tol * t)
        quotients.append(value.scale(1.0 / t))
    return GeneratorQuotients(tuple(times), tuple(quotients), target)


# -- frames across the bridge -------------------------------------------------------------------

ROUNDING = float(np.finfo(float).eps)


@dataclass(frozen=True)
class ResolventPowers:
    """(I - iA)^(-m) x = Gamma(m)^(-1) int_0^inf t^(m-1) e^(-t) U_t x dt for m = 1..M on Gauss-Laguerre nodes.

    Each rule carries the generalized Gauss-Laguerre remainder for exp(i t lambda) at |lambda| <= lam_max,
    so every combination below is a finite sum of group vectors U_t x within a sup-norm bound of its
    target on the support.
    """
    nodes: int
    lam_max: float
    times: Tuple[np.ndarray, ...]
    coefficients: Tuple[np.ndarray, ...]
    bounds: Tuple[float, ...]

    @property
    def max_power(self) -> int:
        return len(self.times)

    def values(self, lam) -> np.ndarray:
        """Row m approximates (1 - i lambda)^(-m) at ``lam``; row 0 is the constant 1"""
        lam = np.asarray(lam, dtype=float)
        rows = [np.ones(lam.shape, dtype=complex)]
        for times, coefficients in zip(self.times, self.coefficients):
            rows.append(np.exp(1j * np.outer(lam, times)) @ coefficients)
        return np.array(rows)

    def cogenerator_power(self, n: int, rows: np.ndarray) -> Tuple[np.ndarray, float]:
        """U^n x = (2 (I - iA)^(-1) - I)^n x from resolvent rows; negative powers reverse every time"""
        power = abs(int(n))
        if power > self.max_power:
            raise LabError(f"power {n} needs resolvent powers beyond {self.max_power}")
        value = np.zeros(rows.shape[1], dtype=complex)
        bound = ROUNDING * 3.0 ** power
        for m in range(power + 1):
            weight = comb(power, m, exact=True) * 2 ** m * (-1) ** (power - m)
            value = value + weight * rows[m]
            if m:
                bound += abs(weight) * self.bounds[m - 1]
        return (value if n >= 0 else value.conj()), bound

    def group_vectors(self, n: int) -> int:
        """Group vectors U_t x with a nonzero coefficient in the combination for U^n x"""
        return 1 + sum(int(np.count_nonzero(c)) for c in self.coefficients[:abs(int(n))])


def resolvent_powers(max_power: int, lam_max: float, nodes: Optional[int] = None) -> ResolventPowers:
    nodes = nodes or settings.witness_laguerre_nodes
    if max_power < 1:
        raise LabError("max_power must be >= 1")
    if not np.isfinite(lam_max):
        raise PrecisionUnreachableError("the support reaches lambda = infinity", np.inf)
    times, coefficients, bounds = [], [], []
    for m in range(1, max_power + 1):
        t, w = roots_genlaguerre(nodes, m - 1)
        if not (np.isfinite(t).all() and np.isfinite(w).all()):
            raise PrecisionUnreachableError(f"generalized Laguerre rule with {nodes} nodes is not finite", np.inf)
        remainder = 0.0
        if lam_max > 0:
            # K! Gamma(K + m) / (2K)! sup |lambda|^(2K) per real part, over Gamma(m)
            log_remainder = (gammaln(nodes + 1) + gammaln(nodes + m) - gammaln(2 * nodes + 1) - gammaln(m)
                             + 2 * nodes * math.log(lam_max))
            remainder = math.sqrt(2.0) * math.exp(min(log_remainder, 700.0))
        # summation plus phase rounding; the rule's mean time is m
        rounding = ROUNDING * (nodes + m * lam_max + 1.0)
        times.append(np.asarray(t, dtype=float))
        coefficients.append(np.asarray(w, dtype=float) / math.gamma(m))
        bounds.append(remainder + rounding)
    logger.debug("resolvent powers up to %d on %d nodes: bounds %s", max_power, nodes,
                 ", ".join(f"{b:.1e}" for b in bounds))
    return ResolventPowers(nodes, float(lam_max), tuple(times), tuple(coefficients), tuple(bounds))


@dataclass(frozen=True)
class GroupPolynomial:
    """U_t x as sum_n c_n ((U - I) / 2)^n x, with U* in place of U for t < 0"""
    t: float
    coefficients: np.ndarray
    bound: float

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    def __call__(self, theta) -> np.ndarray:
        z = np.exp(1j * TWO_PI * np.asarray(theta, dtype=float))
        if self.t < 0:
            z = z.conj()
        u = (z - 1.0) / 2.0
        value = np.zeros(u.shape, dtype=complex)
        for c in self.coefficients[::-1]:
            value = value * u + c
        return value


def group_polynomial(t: float, sine_max: float, tol: float, max_degree: int = 4096) -> GroupPolynomial:
    """Cogenerator polynomial within ``tol`` of U_t x in sup norm where |sin(pi theta)| <= sine_max < 1.

    exp(i t lambda) = exp(t u / (1 + u)) with u = (z - 1) / 2, whose Taylor coefficients are
    (-1)^n L_n^(-1)(t). Since |u| = |sin(pi theta)| and |L_n^(-1)(t)| <= t e^(t/2), the tail past
    degree W is at most t e^(t/2) s^(W+1) / (1 - s).
    """
    validate_tol(tol)
    if not 0.0 <= sine_max < 1.0:
        raise PrecisionUnreachableError("the support reaches theta = 1/2, where the series diverges", np.inf)
    speed = abs(float(t))
    scale = speed * math.exp(speed / 2.0)
    degree, tail = 0, 0.0
    if scale > 0 and sine_max > 0:
        degree = max(0, math.ceil(math.log(tol * (1.0 - sine_max) / scale) / math.log(sine_max)) - 1)
        if degree > max_degree:
            raise PrecisionUnreachableError(f"U_{t:g} x needs a polynomial of degree {degree}", np.inf)
        tail = scale * sine_max ** (degree + 1) / (1.0 - sine_max)
    n = np.arange(1, degree + 1)
    coefficients = np.concatenate([[1.0], (-1.0) ** (n + 1) * speed / n * eval_genlaguerre(n - 1, 1, speed)])
    rounding = ROUNDING * (degree + 1) * (1.0 + scale / (1.0 - sine_max))
    return GroupPolynomial(float(t), coefficients, tail + rounding)
