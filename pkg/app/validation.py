"""
Error types and input validation for the laboratory
"""
from fractions import Fraction
from typing import Iterable, Optional, Sequence, Union

import numpy as np


class LabError(ValueError):
    """Base class for every error raised by the laboratory"""


class PrecisionUnreachableError(LabError):
    """A certified bound cannot reach the requested tolerance within the configured caps"""

    def __init__(self, message: str, best_bound: float):
        super().__init__(f"{message} (best achievable bound {best_bound:.3e})")
        self.best_bound = best_bound


class BudgetExceededError(LabError):
    """Quadrature refinement would exceed the node budget"""

    def __init__(self, requested: int, budget: int):
        super().__init__(f"quadrature needs {requested} nodes, budget is {budget}")
        self.requested = requested
        self.budget = budget


class ShapeMismatchError(LabError):
    pass


class NonInvertibleError(LabError):
    pass


class ExcludedPointError(LabError):
    """Positive mass at theta = 1/2, the image of lambda = infinity"""


class RefusalError(LabError):
    pass


class SchemaError(LabError):
    def __init__(self, message: str, location: Optional[str] = None):
        text = f"{location}: {message}" if location else message
        super().__init__(text)
        self.location = location


Angle = Union[Fraction, float]


def validate_tol(tol: float, name: str = "tol") -> float:
    """Tolerances must be finite and strictly positive"""
    if not np.isfinite(tol) or tol <= 0:
        raise LabError(f"{name} must be > 0, got {tol}")
    return float(tol)


def validate_probability(weights: Sequence[float], name: str, atol: float = 1e-12) -> None:
    """Weights must be positive and sum to one"""
    if len(weights) == 0:
        raise LabError(f"{name}: empty weight list")
    if any(w <= 0 for w in weights):
        raise LabError(f"{name}: weights must be > 0")
    total = float(sum(weights))
    if abs(total - 1.0) > atol:
        raise LabError(f"{name}: weights sum to {total}, expected 1")


def validate_strictly_increasing(values: Iterable[int], name: str) -> None:
    values = list(values)
    if any(b <= a for a, b in zip(values, values[1:])):
        raise LabError(f"{name} must be strictly increasing")


def validate_contraction(matrix: np.ndarray, tol: float) -> float:
    """Return the largest singular value; reject matrices above 1 + tol"""
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise ShapeMismatchError(f"contraction must be square, got shape {matrix.shape}")
    norm = float(np.linalg.norm(matrix, 2)) if matrix.size else 0.0
    if norm > 1.0 + tol:
        raise LabError(f"operator norm {norm:.15f} exceeds 1 + {tol:g}")
    return norm


def parse_angle(value) -> Angle:
    """Angles modulo 1; rationals stay exact, everything else becomes a float"""
    if isinstance(value, Fraction):
        angle = value
    elif isinstance(value, (int, np.integer)):
        angle = Fraction(int(value))
    elif isinstance(value, str):
        try:
            angle = Fraction(value)
        except (ValueError, ZeroDivisionError) as exc:
            raise LabError(f"cannot parse angle {value!r}") from exc
    else:
        angle = float(value)
        if not np.isfinite(angle):
            raise LabError(f"angle must be finite, got {value}")
        return angle % 1.0
    return angle % 1


def as_exact_integer(xi) -> Optional[int]:
    """Integers (including integral floats below 2**53) are returned as Python ints"""
    if isinstance(xi, (int, np.integer)):
        return int(xi)
    if isinstance(xi, Fraction):
        return int(xi) if xi.denominator == 1 else None
    value = float(xi)
    if value.is_integer() and abs(value) < 2.0 ** 53:
        return int(value)
    return None
