"""
Structured contraction models and their finite vectors.

Vectors are finite linear combinations over a model-specific frame, so powers and adjoints are
exact index arithmetic; floating error only enters through Fourier-Stieltjes evaluation.
"""
import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.special import eval_laguerre, roots_laguerre

from app.config import settings
from app.spectral.measures import CircleMeasure, FourierValue
from app.validation import (
    LabError,
    NonInvertibleError,
    PrecisionUnreachableError,
    ShapeMismatchError,
    validate_contraction,
    validate_tol,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SparseVector:
    """Finitely supported coefficients over integer frequencies (cyclic) or basis indices (shift)"""
    coeffs: Tuple[Tuple[int, complex], ...] = ()

    def __post_init__(self):
        merged: Dict[int, complex] = {}
        for index, value in self.coeffs:
            merged[int(index)] = merged.get(int(index), 0j) + complex(value)
        object.__setattr__(self, "coeffs", tuple(sorted((k, v) for k, v in merged.items() if v != 0)))

    @classmethod
    def from_dict(cls, mapping: Mapping[int, complex]) -> "SparseVector":
        return cls(tuple(mapping.items()))

    @classmethod
    def basis(cls, index: int) -> "SparseVector":
        return cls(((index, 1.0 + 0j),))

    def as_dict(self) -> Dict[int, complex]:
        return dict(self.coeffs)

    @property
    def indices(self) -> List[int]:
        return [k for k, _ in self.coeffs]

    @property
    def l1_norm(self) -> float:
        return float(sum(abs(v) for _, v in self.coeffs))

    def shift(self, n: int) -> "SparseVector":
        return SparseVector(tuple((k + n, v) for k, v in self.coeffs))

    def scale(self, factor: complex) -> "SparseVector":
        return SparseVector(tuple((k, v * factor) for k, v in self.coeffs))

    def __add__(self, other: "SparseVector") -> "SparseVector":
        return SparseVector(self.coeffs + other.coeffs)

    def __sub__(self, other: "SparseVector") -> "SparseVector":
        return self + other.scale(-1.0)

    def is_zero(self) -> bool:
        return not self.coeffs


@dataclass(frozen=True)
class DenseVector:
    values: Tuple[complex, ...]

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(complex(v) for v in self.values))

    @classmethod
    def from_array(cls, array: np.ndarray) -> "DenseVector":
        return cls(tuple(np.asarray(array, dtype=complex).ravel()))

    @property
    def array(self) -> np.ndarray:
        return np.array(self.values, dtype=complex)

    def scale(self, factor: complex) -> "DenseVector":
        return DenseVector.from_array(self.array * factor)

    def __add__(self, other: "DenseVector") -> "DenseVector":
        return DenseVector.from_array(self.array + other.array)

    def __sub__(self, other: "DenseVector") -> "DenseVector":
        return DenseVector.from_array(self.array - other.array)

    def is_zero(self) -> bool:
        return not np.any(self.array)


@dataclass(frozen=True)
class SumVector:
    parts: Tuple["VectorRep", ...]

    def scale(self, factor: complex) -> "SumVector":
        return SumVector(tuple(p.scale(factor) for p in self.parts))

    def __add__(self, other: "SumVector") -> "SumVector":
        if len(self.parts) != len(other.parts):
            raise ShapeMismatchError("direct-sum vectors have different component counts")
        return SumVector(tuple(a + b for a, b in zip(self.parts, other.parts)))

    def __sub__(self, other: "SumVector") -> "SumVector":
        return self + other.scale(-1.0)

    def is_zero(self) -> bool:
        return all(p.is_zero() for p in self.parts)


VectorRep = Union[SparseVector, DenseVector, SumVector]


def pairing_coefficients(x: SparseVector, y: SparseVector) -> Dict[int, complex]:
    """a_k = sum_{n - m = k} c_n conj(d_m), so that <x, y> = sum_k a_k mu^(k) on a cyclic model"""
    by_difference: Dict[int, complex] = {}
    for n, c in x.coeffs:
        for m, d in y.coeffs:
            by_difference[n - m] = by_difference.get(n - m, 0j) + c * d.conjugate()
    return by_difference


@dataclass(frozen=True)
class ShiftSemigroupResult:
    """Coefficients of W_t x on the reporting window and the mass translated past it"""
    vector: SparseVector
    tail_mass: float
    nodes: int


class OperatorModel(ABC):
    kind: str = ""

    @abstractmethod
    def inner_product(self, x: VectorRep, y: VectorRep, tol: float) -> FourierValue:
        ...

    @abstractmethod
    def apply_power(self, n: int, x: VectorRep) -> VectorRep:
        ...

    @abstractmethod
    def apply_adjoint_power(self, n: int, x: VectorRep) -> VectorRep:
        ...

    @abstractmethod
    def zero_vector(self) -> VectorRep:
        ...

    @abstractmethod
    def default_frame(self) -> List[VectorRep]:
        ...

    @abstractmethod
    def describe(self) -> Dict:
        ...

    def norm(self, x: VectorRep, tol: Optional[float] = None) -> float:
        tol = tol if tol is not None else settings.default_tol
        return float(np.sqrt(max(self.inner_product(x, x, tol).value.real, 0.0)))

    @property
    def is_unitary(self) -> bool:
        return False


def _expect(x, kind, model: OperatorModel):
    if not isinstance(x, kind):
        raise ShapeMismatchError(f"{model.kind} model expects {kind.__name__}, got {type(x).__name__}")
    return x


@dataclass(frozen=True)
class CyclicUnitary(OperatorModel):
    """Multiplication by e(theta) on the closed span of the characters e_n in L^2(measure)"""
    measure: CircleMeasure
    # group side of a deliberately mismatched fixture; None means the bridge of ``measure``
    synthetic_group_measure: Optional[CircleMeasure] = None
    kind: str = field(default="cyclic_unitary", init=False)

    def __post_init__(self):
        if self.synthetic_group_measure is not None:
            logger.warning("cyclic component carries a synthetic group measure (%s)",
                           self.synthetic_group_measure.kind)

    @property
    def group_measure(self) -> CircleMeasure:
        if self.synthetic_group_measure is not None:
            return self.synthetic_group_measure
        return self.measure

    @property
    def is_unitary(self) -> bool:
        return True

    def inner_product(self, x: VectorRep, y: VectorRep, tol: float) -> FourierValue:
        validate_tol(tol)
        x = _expect(x, SparseVector, self)
        y = _expect(y, SparseVector, self)
        mass = x.l1_norm * y.l1_norm
        if mass == 0:
            return FourierValue(0j, 0.0)
        by_difference = pairing_coefficients(x, y)
        each_tol = tol / mass
        total = FourierValue(0j, 0.0)
        for difference in sorted(by_difference):
            total = total + self.measure.fourier(difference, each_tol).scale(by_difference[difference])
        return total

    def apply_power(self, n: int, x: VectorRep) -> VectorRep:
        return _expect(x, SparseVector, self).shift(int(n))

    def apply_adjoint_power(self, n: int, x: VectorRep) -> VectorRep:
        if n < 0:
            raise LabError("adjoint power must be >= 0")
        return _expect(x, SparseVector, self).shift(-int(n))

    def zero_vector(self) -> VectorRep:
        return SparseVector()

    def default_frame(self) -> List[VectorRep]:
        return [SparseVector.basis(k) for k in range(-2, 3)]

    def describe(self) -> Dict:
        description = {"kind": self.kind, "measure": self.measure.describe()}
        if self.synthetic_group_measure is not None:
            description["synthetic_group_measure"] = self.synthetic_group_measure.describe()
        return description


@dataclass(frozen=True)
class UnilateralShift(OperatorModel):
    """Forward shift on l^2_+; ``truncation`` is only a reporting window"""
    truncation: int = 16
    kind: str = field(default="shift", init=False)

    def __post_init__(self):
        if int(self.truncation) < 1:
            raise LabError("shift truncation must be >= 1")

    def _check(self, x: VectorRep) -> SparseVector:
        x = _expect(x, SparseVector, self)
        if any(k < 0 for k in x.indices):
            raise ShapeMismatchError("shift basis indices must be >= 0")
        return x

    def inner_product(self, x: VectorRep, y: VectorRep, tol: float) -> FourierValue:
        validate_tol(tol)
        x, y = self._check(x), self._check(y)
        ys = y.as_dict()
        return FourierValue(complex(sum(c * ys.get(k, 0j).conjugate() for k, c in x.coeffs)), 0.0)

    def apply_power(self, n: int, x: VectorRep) -> VectorRep:
        if n < 0:
            raise NonInvertibleError("the unilateral shift has no negative powers")
        return self._check(x).shift(int(n))

    def apply_adjoint_power(self, n: int, x: VectorRep) -> VectorRep:
        if n < 0:
            raise LabError("adjoint power must be >= 0")
        shifted = self._check(x).shift(-int(n))
        return SparseVector(tuple((k, v) for k, v in shifted.coeffs if k >= 0))

    def zero_vector(self) -> VectorRep:
        return SparseVector()

    def default_frame(self) -> List[VectorRep]:
        return [SparseVector.basis(k) for k in range(min(4, self.truncation))]

    def semigroup_element(self, t: float, x: VectorRep, tol: float) -> ShiftSemigroupResult:
        """W_t x in the Laguerre model of l^2_+, reported on indices below the truncation.

        Basis vector k is the Laguerre function l_k(s) = e^(-s/2) L_k(s) on the half line and W_t is
        right translation, so <W_t l_k, l_j> = e^(-t/2) int_0^inf e^(-u) L_k(u) L_j(u + t) du. The
        integrand is a polynomial against e^(-u); Gauss-Laguerre rules are doubled until two
        successive results agree within tol / 2.
        """
        validate_tol(tol)
        x = self._check(x)
        if t < 0:
            raise LabError("the translation semigroup is defined for t >= 0")
        if x.indices and max(x.indices) >= self.truncation:
            raise ShapeMismatchError(f"vector support exceeds the truncation {self.truncation}")
        if t == 0 or x.is_zero():
            return ShiftSemigroupResult(x, 0.0, 0)
        source = np.array(x.indices)
        coeffs = np.array([v for _, v in x.coeffs])
        window = np.arange(self.truncation)

        def coefficients(count: int) -> np.ndarray:
            nodes, weights = roots_laguerre(count)
            left = eval_laguerre(source[:, None], nodes[None, :])
            right = eval_laguerre(window[:, None], nodes[None, :] + t)
            pairing = np.exp(-t / 2.0) * (left * weights[None, :]) @ right.T
            return coeffs @ pairing

        count = max(8, (int(source.max()) + self.truncation) // 2 + 1)
        previous = coefficients(count)
        difference = np.inf
        while True:
            if 2 * count > settings.laguerre_max_nodes:
                raise PrecisionUnreachableError(
                    f"Laguerre quadrature did not settle within {settings.laguerre_max_nodes} nodes", difference)
            count *= 2
            current = coefficients(count)
            difference = float(np.abs(current - previous).max())
            if difference < tol / 2.0:
                break
            previous = current
        norm_squared = float(np.sum(np.abs(coeffs) ** 2))
        reported = float(np.sum(np.abs(current) ** 2))
        logger.debug("W_%g: %d Laguerre nodes, tail mass %.3e", t, count, norm_squared - reported)
        vector = SparseVector(tuple(zip(window.tolist(), current.tolist())))
        return ShiftSemigroupResult(vector, norm_squared - reported, count)

    def describe(self) -> Dict:
        return {"kind": self.kind, "truncation": int(self.truncation)}


@dataclass(frozen=True, eq=False)
class FiniteContraction(OperatorModel):
    matrix: np.ndarray
    kind: str = field(default="finite", init=False)

    def __post_init__(self):
        matrix = np.atleast_2d(np.asarray(self.matrix, dtype=complex))
        validate_contraction(matrix, settings.contraction_tol)
        matrix.setflags(write=False)
        object.__setattr__(self, "matrix", matrix)

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    @property
    def spectral_radius(self) -> float:
        return float(np.abs(np.linalg.eigvals(self.matrix)).max()) if self.dimension else 0.0

    @property
    def is_unitary(self) -> bool:
        identity = np.eye(self.dimension)
        return bool(np.allclose(self.matrix.conj().T @ self.matrix, identity, atol=settings.rank_tol))

    def _check(self, x: VectorRep) -> np.ndarray:
        x = _expect(x, DenseVector, self)
        if len(x.values) != self.dimension:
            raise ShapeMismatchError(f"expected a vector of length {self.dimension}, got {len(x.values)}")
        return x.array

    def inner_product(self, x: VectorRep, y: VectorRep, tol: float) -> FourierValue:
        validate_tol(tol)
        return FourierValue(complex(np.vdot(self._check(y), self._check(x))), 0.0)

    def apply_power(self, n: int, x: VectorRep) -> VectorRep:
        if n < 0:
            if not self.is_unitary:
                raise NonInvertibleError("negative powers need a unitary matrix")
            return self.apply_adjoint_power(-n, x)
        return DenseVector.from_array(np.linalg.matrix_power(self.matrix, int(n)) @ self._check(x))

    def apply_adjoint_power(self, n: int, x: VectorRep) -> VectorRep:
        if n < 0:
            raise LabError("adjoint power must be >= 0")
        return DenseVector.from_array(np.linalg.matrix_power(self.matrix.conj().T, int(n)) @ self._check(x))

    def zero_vector(self) -> VectorRep:
        return DenseVector((0j,) * self.dimension)

    def default_frame(self) -> List[VectorRep]:
        return [DenseVector.from_array(row) for row in np.eye(self.dimension, dtype=complex)]

    def describe(self) -> Dict:
        return {"kind": self.kind,
                "matrix": [[[float(v.real), float(v.imag)] for v in row] for row in self.matrix]}


@dataclass(frozen=True)
class DirectSum(OperatorModel):
    components: Tuple[OperatorModel, ...]
    kind: str = field(default="direct_sum", init=False)

    def __post_init__(self):
        if not self.components:
            raise LabError("direct sum needs at least one component")
        object.__setattr__(self, "components", tuple(self.components))

    def _check(self, x: VectorRep) -> SumVector:
        x = _expect(x, SumVector, self)
        if len(x.parts) != len(self.components):
            raise ShapeMismatchError(
                f"expected {len(self.components)} component vectors, got {len(x.parts)}")
        return x

    @property
    def is_unitary(self) -> bool:
        return all(c.is_unitary for c in self.components)

    def inner_product(self, x: VectorRep, y: VectorRep, tol: float) -> FourierValue:
        validate_tol(tol)
        x, y = self._check(x), self._check(y)
        each_tol = tol / len(self.components)
        total = FourierValue(0j, 0.0)
        for model, xi, yi in zip(self.components, x.parts, y.parts):
            total = total + model.inner_product(xi, yi, each_tol)
        return total

    def apply_power(self, n: int, x: VectorRep) -> VectorRep:
        x = self._check(x)
        return SumVector(tuple(m.apply_power(n, p) for m, p in zip(self.components, x.parts)))

    def apply_adjoint_power(self, n: int, x: VectorRep) -> VectorRep:
        x = self._check(x)
        return SumVector(tuple(m.apply_adjoint_power(n, p) for m, p in zip(self.components, x.parts)))

    def zero_vector(self) -> VectorRep:
        return SumVector(tuple(m.zero_vector() for m in self.components))

    def embed(self, index: int, vector: VectorRep) -> SumVector:
        """The direct-sum vector equal to ``vector`` on component ``index`` and zero elsewhere"""
        parts = [m.zero_vector() for m in self.components]
        parts[index] = vector
        return SumVector(tuple(parts))

    def default_frame(self) -> List[VectorRep]:
        return [self.embed(i, v) for i, m in enumerate(self.components) for v in m.default_frame()]

    def describe(self) -> Dict:
        return {"kind": self.kind, "components": [m.describe() for m in self.components]}


def inner_product(model: OperatorModel, x: VectorRep, y: VectorRep, tol: float) -> FourierValue:
    """<x, y> with a certified bound; cyclic pairings are sums of Fourier coefficients mu^(n - m)"""
    return model.inner_product(x, y, tol)


def apply_power(model: OperatorModel, n: int, x: VectorRep) -> VectorRep:
    return model.apply_power(n, x)


def apply_adjoint_power(model: OperatorModel, n: int, x: VectorRep) -> VectorRep:
    return model.apply_adjoint_power(n, x)


def shift_semigroup_element(model: UnilateralShift, t: float, x: VectorRep, tol: float) -> ShiftSemigroupResult:
    return model.semigroup_element(t, x, tol)


def cyclic_components(model: OperatorModel) -> List[Tuple[int, OperatorModel]]:
    """Direct summands with their positions (a single model is its own summand)"""
    if isinstance(model, DirectSum):
        return list(enumerate(model.components))
    return [(0, model)]


def component_vector(model: OperatorModel, x: VectorRep, index: int) -> VectorRep:
    if isinstance(model, DirectSum):
        return model._check(x).parts[index]
    return x


def frame_of(model: OperatorModel, frame: Optional[Sequence[VectorRep]]) -> List[VectorRep]:
    return list(frame) if frame else model.default_frame()
