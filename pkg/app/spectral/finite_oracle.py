"""
Brute-force ground truth on finite-dimensional contractions.

In finite dimensions the unitary part is spanned by the unimodular eigenvectors and everything else
is strongly stable, so the oracle checks the splitting machinery where the answer is known: the
reversible part carries all recurrence and H_m inside the flight space is always zero.
"""
import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence

import numpy as np
from joblib import Parallel, delayed
from scipy import linalg
from sklearn.cluster import Birch

from app.config import settings
from app.spectral.claims import EMPIRICAL, claim
from app.validation import LabError, validate_contraction

logger = logging.getLogger(__name__)

DECAY_STEPS = 500
SCOPE_NOTE = ("finite-dimensional oracle: point spectrum only, so every flight vector is strongly "
              "stable and H_m inside the flight space is {0}")


def _kernel(matrix: np.ndarray, tol: float) -> np.ndarray:
    """Orthonormal basis of the singular vectors with singular value <= tol (absolute)"""
    columns = matrix.shape[1]
    if columns == 0:
        return np.zeros((columns, 0), dtype=complex)
    _, singular, vh = linalg.svd(matrix)
    rank = int((singular > tol).sum())
    return vh[rank:].conj().T


def _complement(basis: np.ndarray, dimension: int) -> np.ndarray:
    if basis.shape[1] == 0:
        return np.eye(dimension, dtype=complex)
    if basis.shape[1] == dimension:
        return np.zeros((dimension, 0), dtype=complex)
    return linalg.null_space(basis.conj().T)


@dataclass(frozen=True, eq=False)
class FiniteAnalysis:
    matrix: np.ndarray
    unitary_basis: np.ndarray
    cnu_basis: np.ndarray
    unitary_eigenvalues: np.ndarray
    unitary_defect: float
    rank_tol: float

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    @property
    def unitary_rank(self) -> int:
        return self.unitary_basis.shape[1]

    def restriction(self) -> np.ndarray:
        """T restricted to the unitary subspace, in the basis ``unitary_basis``"""
        q = self.unitary_basis
        return q.conj().T @ self.matrix @ q

    def to_report(self) -> Dict:
        return {
            "dimension": self.dimension,
            "unitary_rank": self.unitary_rank,
            "unitary_eigenvalues": [{"re": claim(float(v.real), None, EMPIRICAL),
                                     "im": claim(float(v.imag), None, EMPIRICAL)}
                                    for v in self.unitary_eigenvalues],
            "unitary_defect": claim(self.unitary_defect, None, EMPIRICAL),
            "parameters": {"rank_tol": self.rank_tol},
            "scope": SCOPE_NOTE,
        }


def unitary_part(matrix, rank_tol: Optional[float] = None) -> FiniteAnalysis:
    """H_u = intersection over n <= d of ker(I - T*^n T^n) and ker(I - T^n T*^n)"""
    rank_tol = rank_tol if rank_tol is not None else settings.rank_tol
    t = np.atleast_2d(np.asarray(matrix, dtype=complex))
    validate_contraction(t, settings.contraction_tol)
    d = t.shape[0]
    identity = np.eye(d, dtype=complex)
    basis = identity
    power = identity
    for _ in range(d):
        if basis.shape[1] == 0:
            break
        power = power @ t
        defects = np.vstack([identity - power.conj().T @ power, identity - power @ power.conj().T])
        basis = basis @ _kernel(defects @ basis, rank_tol)
        if basis.shape[1]:
            basis, _ = linalg.qr(basis, mode="economic")
    restriction = basis.conj().T @ t @ basis
    r = basis.shape[1]
    defect = float(np.abs(restriction.conj().T @ restriction - np.eye(r)).max()) if r else 0.0
    if defect > rank_tol:
        logger.warning("restriction to the unitary subspace misses unitarity by %.3e", defect)
    eigenvalues = np.linalg.eigvals(restriction) if r else np.zeros(0, dtype=complex)
    logger.debug("unitary part: rank %d of %d, defect %.3e", r, d, defect)
    return FiniteAnalysis(t, basis, _complement(basis, d), eigenvalues, defect, rank_tol)


@dataclass(frozen=True, eq=False)
class FiniteSplitting:
    analysis: FiniteAnalysis
    reversible_basis: np.ndarray
    flight_basis: np.ndarray
    h_m_basis: np.ndarray
    h_w_basis: np.ndarray
    decay: float
    decay_steps: int

    def to_report(self) -> Dict:
        return {
            "analysis": self.analysis.to_report(),
            "reversible_rank": self.reversible_basis.shape[1],
            "flight_rank": self.flight_basis.shape[1],
            "h_m_rank": self.h_m_basis.shape[1],
            "h_w_rank": self.h_w_basis.shape[1],
            "decay": claim(self.decay, None, EMPIRICAL),
            "parameters": {"decay_steps": self.decay_steps},
        }


def decay_oracle(matrix: np.ndarray, basis: np.ndarray, steps: int = DECAY_STEPS) -> float:
    """max |<T^n x, e_j>| over columns x of ``basis`` and the standard frame, at n = steps"""
    if basis.shape[1] == 0:
        return 0.0
    power = np.linalg.matrix_power(np.asarray(matrix, dtype=complex), steps)
    return float(np.abs(power @ basis).max())


def classify_finite(matrix, rank_tol: Optional[float] = None, steps: int = DECAY_STEPS) -> FiniteSplitting:
    """Reversible part = unitary part; flight part = its complement, all of it H_w"""
    analysis = unitary_part(matrix, rank_tol)
    flight = analysis.cnu_basis
    d = analysis.dimension
    decay = decay_oracle(analysis.matrix, flight, steps)
    logger.info("finite splitting: reversible %d, flight %d, decay %.3e at n=%d",
                analysis.unitary_rank, flight.shape[1], decay, steps)
    return FiniteSplitting(analysis, analysis.unitary_basis, flight, np.zeros((d, 0), dtype=complex),
                           flight, decay, steps)


def analyze_batch(matrices: Sequence, n_jobs: Optional[int] = None, rank_tol: Optional[float] = None,
                  steps: int = DECAY_STEPS) -> List[FiniteSplitting]:
    """classify_finite over a batch; results come back in input order"""
    n_jobs = n_jobs if n_jobs is not None else settings.n_jobs
    return Parallel(n_jobs=n_jobs)(delayed(classify_finite)(m, rank_tol, steps) for m in matrices)


@dataclass(frozen=True, eq=False)
class LimitSample:
    """Representatives U^n of the clusters formed by the visited powers"""
    powers: np.ndarray
    representatives: List[np.ndarray]
    radii: np.ndarray
    phases: np.ndarray
    threshold: float

    @property
    def representative_phases(self) -> np.ndarray:
        """Eigen-phases of every representative, one row each"""
        return np.mod(np.outer(self.powers, self.phases), 1.0)

    def coverage(self, grid_points: int = 32) -> float:
        """Largest torus distance from a grid point to the nearest representative phase vector"""
        r = len(self.phases)
        axes = [np.arange(grid_points) / grid_points] * r
        grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, r)
        reps = self.representative_phases
        difference = np.abs(grid[:, None, :] - reps[None, :, :])
        distance = np.minimum(difference, 1.0 - difference).max(axis=2)
        return float(distance.min(axis=1).max())

    def to_report(self) -> Dict:
        return {
            "clusters": len(self.representatives),
            "powers": [int(n) for n in self.powers],
            "radii": [claim(float(r), None, EMPIRICAL) for r in self.radii],
            "parameters": {"threshold": self.threshold},
            "scope": SCOPE_NOTE,
        }


def sample_limit_operators(matrix, budget: int, threshold: float = 0.1) -> LimitSample:
    """Cluster the powers U^n, n <= budget, by their eigen-phases and return one power per cluster"""
    u = np.atleast_2d(np.asarray(matrix, dtype=complex))
    d = u.shape[0]
    if not np.allclose(u.conj().T @ u, np.eye(d), atol=settings.rank_tol):
        raise LabError("limit-operator sampling needs a unitary matrix")
    if budget < 1:
        raise LabError("budget must be >= 1")
    schur_form, vectors = linalg.schur(u, output="complex")
    phases = np.mod(np.angle(np.diag(schur_form)) / (2.0 * np.pi), 1.0)
    powers = np.arange(budget + 1)
    angles = 2.0 * np.pi * np.outer(powers, phases)
    features = np.hstack([np.cos(angles), np.sin(angles)])
    labels = Birch(threshold=threshold, n_clusters=None).fit_predict(features)
    chosen, radii = [], []
    for label in np.unique(labels):
        members = np.flatnonzero(labels == label)
        center = features[members].mean(axis=0)
        best = members[np.argmin(np.linalg.norm(features[members] - center, axis=1))]
        # operator-norm distance between diagonal unitaries
        spread = np.abs(np.exp(1j * angles[members]) - np.exp(1j * angles[best])).max()
        chosen.append(int(powers[best]))
        radii.append(float(spread))
    order = np.argsort(chosen)
    chosen = np.array(chosen)[order]
    radii = np.array(radii)[order]
    representatives = [vectors @ np.diag(np.exp(2j * np.pi * n * phases)) @ vectors.conj().T for n in chosen]
    logger.info("limit sampling: %d clusters from %d powers", len(chosen), budget + 1)
    return LimitSample(chosen, representatives, radii, phases, threshold)
