"""
The universal NOT (|Psi> -> |Psi_perp> for every |Psi>) is not a physical map.

Its action on density matrices, rho -> I tr(rho) - rho, is positive (it sends
every state to a state) but not completely positive, which shows up as a
negative eigenvalue of its Choi matrix.
"""
import typing as tp
from dataclasses import dataclass

import numpy as np

from core import qmath
from core.errors import DimensionError, DomainError


@dataclass(frozen=True, eq=False)
class ChoiMatrix:
    """sum_ij |i><j| (x) Lambda(|i><j|), input factor first."""
    matrix: np.ndarray
    normalized: bool = False

    def __post_init__(self):
        matrix = np.array(self.matrix, dtype=complex)
        if matrix.shape != (4, 4):
            raise DimensionError(f"a qubit-map Choi matrix is 4x4, got {matrix.shape}")
        if np.max(np.abs(matrix - matrix.conj().T)) > qmath.ATOL:
            raise DomainError("Choi matrix is not Hermitian")
        matrix.setflags(write=False)
        object.__setattr__(self, "matrix", matrix)

    @property
    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)

    @property
    def is_completely_positive(self) -> bool:
        return bool(self.eigenvalues[0] >= -qmath.EIG_TOL)


@dataclass
class UniversalNotResult:
    choi: ChoiMatrix
    min_eigenvalue: float
    eigenvalues: tp.Tuple[float, ...]


def complement_map(rho: np.ndarray) -> np.ndarray:
    """I tr(rho) - rho; on states, the Bloch inversion n -> -n."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (2, 2):
        raise DimensionError(f"complement_map acts on 2x2 matrices, got {rho.shape}")
    return np.trace(rho) * qmath.IDENTITY_2 - rho


def complement_antiunitary(rho: np.ndarray) -> np.ndarray:
    """sigma_y rho* sigma_y, the same map written as an anti-unitary conjugation."""
    rho = np.asarray(rho, dtype=complex)
    return qmath.SIGMA_Y @ rho.conj() @ qmath.SIGMA_Y


def choi_of(channel: tp.Callable[[np.ndarray], np.ndarray], normalized: bool = False) -> ChoiMatrix:
    matrix = np.zeros((4, 4), dtype=complex)
    for i in range(2):
        for j in range(2):
            unit = np.zeros((2, 2), dtype=complex)
            unit[i, j] = 1.0
            matrix += np.kron(unit, channel(unit))
    if normalized:
        matrix = matrix / 2
    return ChoiMatrix(matrix, normalized)


def universal_not_choi(normalized: bool = False) -> UniversalNotResult:
    """
    Choi matrix of the ideal complement and its minimum eigenvalue:
    -1 unnormalized (eigenvalues {1, 1, 1, -1}), -1/2 normalized.
    """
    choi = choi_of(complement_map, normalized)
    eigenvalues = choi.eigenvalues
    return UniversalNotResult(
        choi=choi,
        min_eigenvalue=float(eigenvalues[0]),
        eigenvalues=tuple(float(value) for value in eigenvalues),
    )
