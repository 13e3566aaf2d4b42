"""
Computable probability measures on the circle [0, 1) with certified Fourier-Stieltjes oracles.

Every measure answers three kinds of questions:

* ``fourier(xi, tol)`` -- the transform ``mu^(xi) = int exp(2 pi i xi theta) dmu`` with a
  certified absolute error bound,
* ``quadrature(depth)`` -- a refinement rule (nodes, weights) with the cylinder diameter that
  bounds the error for Lipschitz integrands,
* cylinder refinement (``root_cylinders`` / ``split``), which the adaptive rule builder uses to
  integrate integrands with known derivative bounds (the Cayley bridge relies on this).
"""
import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from app.config import settings
from app.validation import (
    Angle,
    BudgetExceededError,
    LabError,
    PrecisionUnreachableError,
    as_exact_integer,
    parse_angle,
    validate_probability,
    validate_strictly_increasing,
    validate_tol,
)

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi

# (sup |g|, sup |g'|, sup |g''|) over the hull [lo, hi] of each cylinder
BoundsFn = Callable[[np.ndarray, np.ndarray], Tuple[np.ndarray, np.ndarray, np.ndarray]]


@dataclass(frozen=True)
class FourierValue:
    """A complex number with a certified absolute error bound"""
    value: complex
    error_bound: float = 0.0

    def __add__(self, other: "FourierValue") -> "FourierValue":
        return FourierValue(self.value + other.value, self.error_bound + other.error_bound)

    def scale(self, factor: complex) -> "FourierValue":
        return FourierValue(self.value * factor, self.error_bound * abs(factor))

    def conjugate(self) -> "FourierValue":
        return FourierValue(self.value.conjugate(), self.error_bound)


@dataclass(frozen=True)
class QuadratureRule:
    nodes: np.ndarray
    weights: np.ndarray
    cylinder_diameter: float

    def integrate(self, func: Callable[[np.ndarray], np.ndarray]) -> complex:
        return complex(np.dot(self.weights, func(self.nodes)))

    def lipschitz_error(self, lipschitz: float) -> float:
        """Error bound for integrands with Lipschitz constant ``lipschitz``"""
        return lipschitz * self.cylinder_diameter


@dataclass(frozen=True)
class AdaptiveRule:
    """Nodes accepted by the adaptive cylinder refinement, plus the mass set aside near singularities"""
    nodes: np.ndarray
    weights: np.ndarray
    error_bound: float
    pole_mass: float
    depth: int

    def integrate(self, func: Callable[[np.ndarray], np.ndarray]) -> complex:
        return complex(np.dot(self.weights, func(self.nodes))) if len(self.nodes) else 0j

    @property
    def size(self) -> int:
        return len(self.nodes)


@dataclass(frozen=True)
class CylinderSet:
    """A batch of cylinders at one refinement level.

    ``span`` is the diameter of the convex hull ``[left, left + span]`` carrying the cylinder's
    mass, ``center`` the barycenter estimate and ``center_error`` its absolute error.
    """
    left: np.ndarray
    span: np.ndarray
    mass: np.ndarray
    center: np.ndarray
    center_error: np.ndarray
    level: int

    def __len__(self) -> int:
        return len(self.left)

    def take(self, mask: np.ndarray) -> "CylinderSet":
        return CylinderSet(
            self.left[mask], self.span[mask], self.mass[mask],
            self.center[mask], self.center_error[mask], self.level,
        )


def _cylinders(left, span, mass, center, center_error, level) -> CylinderSet:
    n = len(left)
    as_array = lambda v: np.broadcast_to(np.asarray(v, dtype=float), (n,)).copy()
    return CylinderSet(as_array(left), as_array(span), as_array(mass),
                       as_array(center), as_array(center_error), level)


class CircleMeasure(ABC):
    """Probability measure on [0, 1) with a certified Fourier oracle"""

    kind: str = ""

    @abstractmethod
    def fourier(self, xi, tol: float) -> FourierValue:
        ...

    @abstractmethod
    def quadrature(self, depth: int, node_budget: Optional[int] = None) -> QuadratureRule:
        ...

    @abstractmethod
    def describe(self) -> Dict:
        """Schema dictionary of the measure"""

    def root_cylinders(self) -> CylinderSet:
        raise LabError(f"{self.kind} measures are integrated through their components")

    def split(self, cylinders: CylinderSet) -> Optional[CylinderSet]:
        """Children of ``cylinders``; None when the cylinders cannot be refined further"""
        return None

    def atoms(self) -> List[Tuple[Angle, float]]:
        return []

    def components(self) -> List[Tuple["CircleMeasure", float]]:
        return [(self, 1.0)]

    @property
    def is_absolutely_continuous(self) -> bool:
        return False

    @property
    def support_diameter(self) -> float:
        return 1.0

    def mass_near(self, point: float, depth: int) -> float:
        """Mass of the depth-``depth`` cylinders whose hull contains ``point``"""
        total = 0.0
        for part, weight in self.components():
            if part is not self:
                total += weight * part.mass_near(point, depth)
                continue
            active = part.root_cylinders()
            for _ in range(depth):
                inside = (active.left <= point) & (point <= active.left + active.span)
                active = active.take(inside)
                if len(active) == 0:
                    break
                children = part.split(active)
                if children is None:
                    break
                active = children
            inside = (active.left <= point) & (point <= active.left + active.span)
            total += weight * float(active.mass[inside].sum())
        return total


def _check_budget(count: int, node_budget: Optional[int]) -> None:
    budget = node_budget if node_budget is not None else settings.quadrature_node_budget
    if count > budget:
        raise BudgetExceededError(count, budget)


def _phase_fraction(n: int, numerator: int, modulus: int) -> float:
    """Fractional part of n * numerator / modulus, computed exactly before rounding"""
    return ((n * numerator) % modulus) / modulus


def _lebesgue_transform(xi) -> complex:
    n = as_exact_integer(xi)
    if n is not None:
        return 1.0 + 0j if n == 0 else 0j
    z = TWO_PI * float(xi)
    return complex((np.exp(1j * z) - 1.0) / (1j * z))


@dataclass(frozen=True)
class AtomicMeasure(CircleMeasure):
    points: Tuple[Tuple[Angle, float], ...]
    kind: str = field(default="atomic", init=False)

    def __post_init__(self):
        parsed = tuple((parse_angle(theta), float(w)) for theta, w in self.points)
        validate_probability([w for _, w in parsed], "atomic weights")
        object.__setattr__(self, "points", parsed)

    def fourier(self, xi, tol: float) -> FourierValue:
        validate_tol(tol)
        n = as_exact_integer(xi)
        total = 0j
        bound = 0.0
        for theta, weight in self.points:
            if n is not None and isinstance(theta, Fraction):
                phase = float((n * theta) % 1)
            else:
                product = float(xi) * float(theta)
                phase = product % 1.0
                # rounding of the float product, not of the measure
                bound += weight * TWO_PI * abs(product) * 2.0 ** -52
            total += weight * complex(np.exp(1j * TWO_PI * phase))
        return FourierValue(total, bound)

    def quadrature(self, depth: int, node_budget: Optional[int] = None) -> QuadratureRule:
        if depth < 1:
            raise LabError("depth must be >= 1")
        _check_budget(len(self.points), node_budget)
        nodes = np.array([float(theta) for theta, _ in self.points])
        weights = np.array([w for _, w in self.points])
        return QuadratureRule(nodes, weights, 0.0)

    def root_cylinders(self) -> CylinderSet:
        nodes = np.array([float(theta) for theta, _ in self.points])
        weights = np.array([w for _, w in self.points])
        return _cylinders(nodes, 0.0, weights, nodes, 0.0, 0)

    def atoms(self) -> List[Tuple[Angle, float]]:
        return list(self.points)

    @property
    def support_diameter(self) -> float:
        return 0.0 if len(self.points) == 1 else 1.0

    def describe(self) -> Dict:
        return {"kind": self.kind,
                "atoms": [[str(t) if isinstance(t, Fraction) else t, w] for t, w in self.points]}


class _DyadicCells:
    """Dyadic cell refinement shared by the absolutely continuous measures"""

    def _cell_moments(self, lo: np.ndarray, hi: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError

    def root_cylinders(self) -> CylinderSet:
        return self._cells(np.array([0.0]), 1.0, 0)

    def split(self, cylinders: CylinderSet) -> Optional[CylinderSet]:
        half = cylinders.span[0] / 2.0
        left = np.concatenate([cylinders.left, cylinders.left + half])
        return self._cells(np.sort(left), half, cylinders.level + 1)

    def _cells(self, left: np.ndarray, width: float, level: int) -> CylinderSet:
        mass, first_moment = self._cell_moments(left, left + width)
        center = np.where(mass > 1e-300, first_moment / np.where(mass > 1e-300, mass, 1.0), left + width / 2)
        center = np.clip(center, left, left + width)
        return _cylinders(left, width, mass, center, 0.0, level)

    def _cell_rule(self, depth: int, node_budget: Optional[int]) -> QuadratureRule:
        if depth < 1:
            raise LabError("depth must be >= 1")
        count = 2 ** depth
        _check_budget(count, node_budget)
        width = 1.0 / count
        cells = self._cells(np.arange(count) * width, width, depth)
        return QuadratureRule(cells.left + width / 2.0, cells.mass, width)


@dataclass(frozen=True)
class LebesgueMeasure(_DyadicCells, CircleMeasure):
    kind: str = field(default="lebesgue", init=False)

    def fourier(self, xi, tol: float) -> FourierValue:
        validate_tol(tol)
        return FourierValue(_lebesgue_transform(xi), 0.0)

    def quadrature(self, depth: int, node_budget: Optional[int] = None) -> QuadratureRule:
        return self._cell_rule(depth, node_budget)

    def _cell_moments(self, lo, hi):
        return hi - lo, (hi ** 2 - lo ** 2) / 2.0

    @property
    def is_absolutely_continuous(self) -> bool:
        return True

    def describe(self) -> Dict:
        return {"kind": self.kind}


@dataclass(frozen=True)
class TrigDensityMeasure(_DyadicCells, CircleMeasure):
    """Density ``c_0 + sum_{k>=1} 2 Re(c_k e(k theta))`` given by its nonnegative-frequency coefficients"""
    coefficients: Tuple[complex, ...]
    kind: str = field(default="trig_density", init=False)

    def __post_init__(self):
        coeffs = tuple(complex(c) for c in self.coefficients)
        if not coeffs or abs(coeffs[0] - 1.0) > 1e-12:
            raise LabError("trig density needs c_0 = 1 (total mass one)")
        object.__setattr__(self, "coefficients", coeffs)
        grid = np.arange(settings.sup_grid_points) / settings.sup_grid_points
        minimum = float(self.density(grid).min())
        if minimum < settings.trig_density_min:
            raise LabError(f"trig density is negative on the sample grid (min {minimum:.3e})")

    def _full_coefficients(self) -> Dict[int, complex]:
        full = {0: self.coefficients[0].real + 0j}
        for k, c in enumerate(self.coefficients[1:], start=1):
            full[k] = c
            full[-k] = c.conjugate()
        return full

    def density(self, theta: np.ndarray) -> np.ndarray:
        values = np.zeros_like(theta, dtype=complex)
        for k, c in self._full_coefficients().items():
            values += c * np.exp(1j * TWO_PI * k * theta)
        return values.real

    def fourier(self, xi, tol: float) -> FourierValue:
        validate_tol(tol)
        n = as_exact_integer(xi)
        full = self._full_coefficients()
        if n is not None:
            return FourierValue(full.get(-n, 0j), 0.0)
        value = sum(c * _lebesgue_transform(float(xi) + k) for k, c in full.items())
        return FourierValue(complex(value), 0.0)

    def quadrature(self, depth: int, node_budget: Optional[int] = None) -> QuadratureRule:
        return self._cell_rule(depth, node_budget)

    def _cell_moments(self, lo, hi):
        mass = np.zeros_like(lo)
        moment = np.zeros_like(lo)
        for k, c in self._full_coefficients().items():
            if k == 0:
                mass += (c * (hi - lo)).real
                moment += (c * (hi ** 2 - lo ** 2) / 2.0).real
                continue
            a = 1j * TWO_PI * k
            antiderivative = lambda t: np.exp(a * t) / a
            moment_antiderivative = lambda t: np.exp(a * t) * (t / a - 1.0 / a ** 2)
            mass += (c * (antiderivative(hi) - antiderivative(lo))).real
            moment += (c * (moment_antiderivative(hi) - moment_antiderivative(lo))).real
        return np.maximum(mass, 0.0), moment

    @property
    def is_absolutely_continuous(self) -> bool:
        return True

    def describe(self) -> Dict:
        return {"kind": self.kind, "coefficients": [[c.real, c.imag] for c in self.coefficients]}


@dataclass(frozen=True)
class SelfSimilarMeasure(CircleMeasure):
    """Invariant measure of the maps S_d(theta) = (theta + d) / base chosen with probabilities p_d"""
    base: int
    digits: Tuple[int, ...]
    weights: Tuple[float, ...]
    kind: str = field(default="self_similar", init=False)

    def __post_init__(self):
        digits = tuple(int(d) for d in self.digits)
        weights = tuple(float(p) for p in self.weights)
        if int(self.base) < 2:
            raise LabError("self-similar base must be >= 2")
        if len(set(digits)) != len(digits) or len(digits) < 2:
            raise LabError("self-similar digit set needs at least two distinct digits")
        if any(d < 0 or d >= self.base for d in digits):
            raise LabError(f"digits must lie in 0..{self.base - 1}")
        if len(weights) != len(digits):
            raise LabError("one weight per digit")
        validate_probability(weights, "digit weights")
        order = np.argsort(digits)
        object.__setattr__(self, "base", int(self.base))
        object.__setattr__(self, "digits", tuple(digits[i] for i in order))
        object.__setattr__(self, "weights", tuple(weights[i] for i in order))

    @classmethod
    def cantor(cls) -> "SelfSimilarMeasure":
        return cls(3, (0, 2), (0.5, 0.5))

    @property
    def support_diameter(self) -> float:
        return max(self.digits) / (self.base - 1)

    @property
    def mean(self) -> float:
        return sum(p * d for d, p in zip(self.digits, self.weights)) / (self.base - 1)

    def mask(self, t) -> complex:
        """m(t) = sum_d p_d e(t d)"""
        return complex(sum(p * np.exp(1j * TWO_PI * t * d) for d, p in zip(self.digits, self.weights)))

    def refinement_factor(self, xi) -> complex:
        """m(xi / b): the factor in mu^(xi) = m(xi / b) mu^(xi / b)"""
        n = as_exact_integer(xi)
        if n is not None:
            return self._exact_mask(n, self.base)
        return self.mask(float(xi) / self.base)

    def _exact_mask(self, n: int, modulus: int) -> complex:
        total = 0j
        for d, p in zip(self.digits, self.weights):
            total += p * complex(np.exp(1j * TWO_PI * _phase_fraction(n, d, modulus)))
        return total

    def truncation_depth(self, xi, tol: float) -> int:
        """Least J with 2 pi |xi| / b^J <= tol"""
        scale = TWO_PI * abs(float(xi)) / tol
        depth = max(0, math.ceil(math.log(scale, self.base))) if scale > 1 else 0
        while TWO_PI * abs(float(xi)) / float(self.base) ** depth > tol:
            depth += 1
        while depth > 0 and TWO_PI * abs(float(xi)) / float(self.base) ** (depth - 1) <= tol:
            depth -= 1
        return depth

    def fourier(self, xi, tol: float) -> FourierValue:
        validate_tol(tol)
        n = as_exact_integer(xi)
        if n == 0:
            return FourierValue(1.0 + 0j, 0.0)
        depth = self.truncation_depth(xi, tol)
        value = 1.0 + 0j
        for j in range(1, depth + 1):
            if n is not None:
                value *= self._exact_mask(n % self.base ** j, self.base ** j)
            else:
                value *= self.mask(float(xi) / float(self.base) ** j)
        bound = TWO_PI * abs(float(xi)) / float(self.base) ** depth
        logger.debug("self-similar transform at %s: depth %d, bound %.3e", xi, depth, bound)
        return FourierValue(value, bound)

    def root_cylinders(self) -> CylinderSet:
        return _cylinders([0.0], self.support_diameter, [1.0], [self.mean], 0.0, 0)

    def split(self, cylinders: CylinderSet) -> Optional[CylinderSet]:
        level = cylinders.level + 1
        step = float(self.base) ** -level
        digits = np.array(self.digits, dtype=float)
        probs = np.array(self.weights)
        left = (cylinders.left[:, None] + digits[None, :] * step).ravel()
        mass = (cylinders.mass[:, None] * probs[None, :]).ravel()
        return _cylinders(left, self.support_diameter * step, mass, left + step * self.mean, 0.0, level)

    def quadrature(self, depth: int, node_budget: Optional[int] = None) -> QuadratureRule:
        if depth < 1:
            raise LabError("depth must be >= 1")
        _check_budget(len(self.digits) ** depth, node_budget)
        cells = self.root_cylinders()
        for _ in range(depth):
            cells = self.split(cells)
        return QuadratureRule(cells.left, cells.mass, self.support_diameter * float(self.base) ** -depth)

    def describe(self) -> Dict:
        return {"kind": self.kind, "base": self.base, "digits": list(self.digits), "weights": list(self.weights)}


@dataclass(frozen=True)
class ExponentRule:
    """Strictly increasing exponents n_1 < n_2 < ...: ``power`` gives n_j = base**j, ``explicit`` a finite list"""
    form: str
    base: Optional[int] = None
    values: Tuple[int, ...] = ()

    def __post_init__(self):
        if self.form == "power":
            if self.base is None or int(self.base) < 2:
                raise LabError("power exponent rule needs base >= 2")
            object.__setattr__(self, "base", int(self.base))
        elif self.form == "explicit":
            values = tuple(int(v) for v in self.values)
            if not values or values[0] < 1:
                raise LabError("explicit exponents must be a nonempty list starting at >= 1")
            validate_strictly_increasing(values, "exponents")
            object.__setattr__(self, "values", values)
        else:
            raise LabError(f"unknown exponent rule form {self.form!r}")

    @property
    def length(self) -> Optional[int]:
        return len(self.values) if self.form == "explicit" else None

    def __call__(self, j: int) -> int:
        if j < 1:
            raise LabError("exponents are indexed from 1")
        if self.form == "power":
            return self.base ** j
        return self.values[j - 1]

    def describe(self) -> Dict:
        if self.form == "power":
            return {"form": "power", "base": self.base}
        return {"form": "explicit", "values": list(self.values)}


@dataclass(frozen=True)
class InfiniteConvolutionMeasure(CircleMeasure):
    """Law of sum_j eps_j b^(-n_j) with independent fair bits eps_j (Dirichlet-type for lacunary n_j)"""
    base: int
    rule: ExponentRule
    j_max: int = 64
    kind: str = field(default="infinite_convolution", init=False)

    # explicit terms summed before the geometric remainder bound
    TAIL_TERMS = 8

    def __post_init__(self):
        if int(self.base) < 2:
            raise LabError("infinite convolution base must be >= 2")
        object.__setattr__(self, "base", int(self.base))
        cap = int(self.j_max)
        if self.rule.length is not None:
            cap = self.rule.length
        if cap < 1:
            raise LabError("j_max must be >= 1")
        object.__setattr__(self, "j_max", cap)

    @property
    def is_finite(self) -> bool:
        return self.rule.length is not None

    def exponent(self, j: int) -> int:
        return self.rule(j)

    def _power(self, exponent: int) -> float:
        return float(self.base) ** exponent

    def tail_parts(self, count: int, shift: int = 0) -> Tuple[float, float]:
        """(explicit part, remainder bound) of sum_{j > count} b^(shift - n_j)"""
        if self.is_finite:
            explicit = sum(self._power(shift - self.exponent(j)) for j in range(count + 1, self.j_max + 1))
            return explicit, 0.0
        last = count + self.TAIL_TERMS
        explicit = sum(self._power(shift - self.exponent(j)) for j in range(count + 1, last + 1))
        remainder = self._power(shift - self.exponent(last + 1)) * self.base / (self.base - 1)
        return explicit, remainder

    def tail_sum(self, count: int, shift: int = 0) -> float:
        """Upper bound of sum_{j > count} b^(shift - n_j)"""
        explicit, remainder = self.tail_parts(count, shift)
        return explicit + remainder

    def factor_count(self, xi, tol: float) -> Tuple[int, float]:
        """Least J <= j_max with pi |xi| tail(J) <= tol, and the bound reached"""
        scale = math.pi * abs(float(xi))
        for count in range(0, self.j_max + 1):
            bound = scale * self.tail_sum(count)
            if bound <= tol:
                return count, bound
        raise PrecisionUnreachableError(
            f"infinite convolution transform at xi={xi} needs more than j_max={self.j_max} factors", bound)

    def fourier(self, xi, tol: float) -> FourierValue:
        validate_tol(tol)
        n = as_exact_integer(xi)
        if n == 0:
            return FourierValue(1.0 + 0j, 0.0)
        count, bound = self.factor_count(xi, tol)
        value = 1.0 + 0j
        for j in range(1, count + 1):
            if n is not None:
                modulus = self.base ** self.exponent(j)
                phase = _phase_fraction(n, 1, modulus)
            else:
                phase = (float(xi) * self._power(-self.exponent(j))) % 1.0
            value *= 0.5 * (1.0 + complex(np.exp(1j * TWO_PI * phase)))
        logger.debug("infinite convolution transform at %s: %d factors, bound %.3e", xi, count, bound)
        return FourierValue(value, bound)

    def _level(self, left: np.ndarray, mass: np.ndarray, level: int) -> CylinderSet:
        explicit, remainder = self.tail_parts(level)
        return _cylinders(left, explicit + remainder, mass, left + explicit / 2.0, remainder / 2.0, level)

    def root_cylinders(self) -> CylinderSet:
        return self._level(np.array([0.0]), np.array([1.0]), 0)

    def split(self, cylinders: CylinderSet) -> Optional[CylinderSet]:
        level = cylinders.level + 1
        if level > self.j_max:
            return None
        step = self._power(-self.exponent(level))
        left = np.concatenate([cylinders.left, cylinders.left + step])
        mass = np.concatenate([cylinders.mass, cylinders.mass]) / 2.0
        return self._level(left, mass, level)

    def quadrature(self, depth: int, node_budget: Optional[int] = None) -> QuadratureRule:
        if depth < 1:
            raise LabError("depth must be >= 1")
        levels = min(depth, self.j_max)
        _check_budget(2 ** levels, node_budget)
        cells = self.root_cylinders()
        for _ in range(levels):
            cells = self.split(cells)
        order = np.argsort(cells.left, kind="stable")
        return QuadratureRule(cells.left[order], cells.mass[order], float(cells.span[0]))

    @property
    def support_diameter(self) -> float:
        return self.tail_sum(0)

    def describe(self) -> Dict:
        return {"kind": self.kind, "base": self.base, "exponents": self.rule.describe(), "j_max": self.j_max}


@dataclass(frozen=True)
class MixtureMeasure(CircleMeasure):
    parts: Tuple[Tuple[CircleMeasure, float], ...]
    kind: str = field(default="mixture", init=False)

    def __post_init__(self):
        parts = tuple((m, float(w)) for m, w in self.parts)
        validate_probability([w for _, w in parts], "mixture weights")
        object.__setattr__(self, "parts", parts)

    def fourier(self, xi, tol: float) -> FourierValue:
        validate_tol(tol)
        total = FourierValue(0j, 0.0)
        for measure, weight in self.parts:
            total = total + measure.fourier(xi, tol).scale(weight)
        return total

    def quadrature(self, depth: int, node_budget: Optional[int] = None) -> QuadratureRule:
        rules = [(m.quadrature(depth, node_budget), w) for m, w in self.parts]
        _check_budget(sum(len(r.nodes) for r, _ in rules), node_budget)
        return QuadratureRule(
            np.concatenate([r.nodes for r, _ in rules]),
            np.concatenate([w * r.weights for r, w in rules]),
            max(r.cylinder_diameter for r, _ in rules),
        )

    def components(self) -> List[Tuple[CircleMeasure, float]]:
        flat = []
        for measure, weight in self.parts:
            flat.extend((m, weight * w) for m, w in measure.components())
        return flat

    def atoms(self) -> List[Tuple[Angle, float]]:
        return [(theta, weight * w) for measure, weight in self.parts for theta, w in measure.atoms()]

    @property
    def is_absolutely_continuous(self) -> bool:
        return all(m.is_absolutely_continuous for m, _ in self.parts)

    def describe(self) -> Dict:
        return {"kind": self.kind, "components": [[m.describe(), w] for m, w in self.parts]}


def fourier_stieltjes(measure: CircleMeasure, xi, tol: float) -> FourierValue:
    """mu^(xi) = int e(xi theta) dmu(theta) with a certified error bound <= tol"""
    return measure.fourier(xi, tol)


def wiener_atom_index(measure: CircleMeasure, n_terms: int, tol: Optional[float] = None) -> float:
    """W_N = (1/N) sum_{n=1}^{N} |mu^(n)|^2, which tends to the sum of squared atom masses"""
    if n_terms < 1:
        raise LabError("N must be >= 1")
    tol = tol if tol is not None else settings.wiener_tol
    total = 0.0
    for n in range(1, n_terms + 1):
        total += abs(measure.fourier(n, tol).value) ** 2
    return total / n_terms


def quadrature(measure: CircleMeasure, depth: int, node_budget: Optional[int] = None) -> QuadratureRule:
    return measure.quadrature(depth, node_budget)


def build_adaptive_rule(
    measure: CircleMeasure,
    bounds: BoundsFn,
    tol: float,
    max_depth: Optional[int] = None,
    node_budget: Optional[int] = None,
) -> AdaptiveRule:
    """Refine cylinders until every node meets the second-order error bound.

    A cylinder with barycenter c, hull diameter s and mass m is accepted when
    ``|g'| * (barycenter error) * m + 1/2 sup|g''| s^2 m <= tol * m``. Cylinders on which the
    integrand bounds are infinite (singular points such as the Cayley pole) are refined until
    ``max_depth`` and then set aside: their mass times ``sup |g|`` enters the error bound.
    """
    validate_tol(tol)
    max_depth = max_depth if max_depth is not None else settings.max_quadrature_depth
    budget = node_budget if node_budget is not None else settings.quadrature_node_budget
    nodes, weights = [], []
    error = 0.0
    pole_mass = 0.0
    depth = 0
    accepted = 0
    for part, part_weight in measure.components():
        active: Optional[CylinderSet] = part.root_cylinders()
        while active is not None and len(active):
            depth = max(depth, active.level)
            sup, d1, d2 = bounds(active.left, active.left + active.span)
            point_like = (active.span == 0) & (active.center_error == 0)
            with np.errstate(invalid="ignore", over="ignore"):
                local = np.where(
                    point_like, 0.0,
                    d1 * active.center_error * active.mass + 0.5 * d2 * active.span ** 2 * active.mass,
                )
            finite = np.isfinite(local)
            accept = finite & (local <= tol * active.mass)
            children = None
            if active.level < max_depth and not accept.all():
                children = part.split(active.take(~accept))
            if children is None:
                # no further refinement: keep finite cylinders with their bound, set singular ones aside
                accept = finite
                singular = ~finite
                pole_mass += part_weight * float(active.mass[singular].sum())
                error += part_weight * float((sup[singular] * active.mass[singular]).sum())
            nodes.append(active.center[accept])
            weights.append(part_weight * active.mass[accept])
            error += part_weight * float(local[accept].sum())
            accepted += int(accept.sum())
            if children is not None and accepted + len(children) > budget:
                raise BudgetExceededError(accepted + len(children), budget)
            active = children
    nodes_arr = np.concatenate(nodes) if nodes else np.zeros(0)
    weights_arr = np.concatenate(weights) if weights else np.zeros(0)
    logger.debug("adaptive rule: %d nodes, depth %d, bound %.3e", len(nodes_arr), depth, error)
    return AdaptiveRule(nodes_arr, weights_arr, error, pole_mass, depth)
