"""
Small dense complex linear algebra for one- and two-photon polarization states.

Conventions used throughout the package:

* basis ordering is (H, V) for one photon and (HH, HV, VH, VV) for two;
* on the Poincare sphere |H> sits at +z and |V> at -z;
* the canonical global phase makes the |H> amplitude real and non-negative
  (or, when it vanishes, the |V> amplitude);
* state equality is always judged with `fidelity`, never componentwise.
"""
import cmath
import logging
import math
import typing as tp
from dataclasses import dataclass, field

import numpy as np

from core.errors import DimensionError, DomainError, NormalizationError
from utils.rng import SeededStream

logger = logging.getLogger(__name__)

# algebraic identities
ATOL = 1e-12
# round trips through transcendental functions
ROUND_TRIP_TOL = 1e-9
# lowest eigenvalue still accepted as non-negative
EIG_TOL = 1e-10

ComplexAmplitude = complex

IDENTITY_2 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (SIGMA_X, SIGMA_Y, SIGMA_Z)


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array, dtype=complex)
    array.setflags(write=False)
    return array


def _check_finite(values, what: str):
    if not np.all(np.isfinite(np.asarray(values))):
        raise DomainError(f"{what} must be finite, got {values}")


def amplitude(re: float, im: float = 0.0) -> ComplexAmplitude:
    value = complex(re, im)
    _check_finite([value], "amplitude")
    return value


@dataclass(frozen=True)
class PoincareVector:
    """Real 3-vector on or inside the Poincare sphere."""
    x: float
    y: float
    z: float

    def __post_init__(self):
        _check_finite([self.x, self.y, self.z], "Poincare vector")
        if self.norm > 1.0 + ATOL:
            raise DomainError(f"Poincare vector norm {self.norm} exceeds 1")

    @classmethod
    def from_array(cls, values: tp.Sequence[float]) -> "PoincareVector":
        values = np.asarray(values, dtype=float).reshape(-1)
        if values.shape != (3,):
            raise DimensionError(f"expected 3 components, got {values.shape[0]}")
        return cls(float(values[0]), float(values[1]), float(values[2]))

    @classmethod
    def from_angles(cls, theta: float, phi: float) -> "PoincareVector":
        return cls(
            math.sin(theta) * math.cos(phi),
            math.sin(theta) * math.sin(phi),
            math.cos(theta),
        )

    @property
    def array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z], dtype=float)

    @property
    def norm(self) -> float:
        return math.sqrt(self.x * self.x + self.y * self.y + self.z * self.z)

    @property
    def is_unit(self) -> bool:
        return abs(self.norm - 1.0) <= ATOL

    def dot(self, other: "PoincareVector") -> float:
        return self.x * other.x + self.y * other.y + self.z * other.z

    def sigma(self) -> np.ndarray:
        """n . sigma as a 2x2 matrix."""
        return self.x * SIGMA_X + self.y * SIGMA_Y + self.z * SIGMA_Z

    def __neg__(self) -> "PoincareVector":
        return PoincareVector(-self.x, -self.y, -self.z)


@dataclass(frozen=True)
class PureQubit:
    """Polarization state aH|H> + aV|V>."""
    aH: ComplexAmplitude
    aV: ComplexAmplitude

    def __post_init__(self):
        object.__setattr__(self, "aH", complex(self.aH))
        object.__setattr__(self, "aV", complex(self.aV))
        _check_finite([self.aH, self.aV], "qubit amplitudes")
        norm = abs(self.aH) ** 2 + abs(self.aV) ** 2
        if abs(norm - 1.0) > ATOL:
            raise NormalizationError(f"|aH|^2 + |aV|^2 = {norm!r}, expected 1")

    @classmethod
    def from_vector(cls, vector, normalize: bool = False) -> "PureQubit":
        vector = np.asarray(vector, dtype=complex).reshape(-1)
        if vector.shape != (2,):
            raise DimensionError(f"a qubit has 2 amplitudes, got {vector.shape[0]}")
        if normalize:
            norm = np.linalg.norm(vector)
            if norm == 0:
                raise NormalizationError("cannot normalize the zero vector")
            vector = vector / norm
        return cls(complex(vector[0]), complex(vector[1]))

    @property
    def vector(self) -> np.ndarray:
        return np.array([self.aH, self.aV], dtype=complex)

    def canonical(self) -> "PureQubit":
        """Same ray with aH real >= 0 (aV real >= 0 when aH vanishes)."""
        if abs(self.aH) <= ATOL:
            return PureQubit.from_vector([0.0, abs(self.aV)], normalize=True)
        phase = cmath.exp(-1j * cmath.phase(self.aH))
        return PureQubit.from_vector([abs(self.aH), self.aV * phase], normalize=True)

    def orthogonal(self) -> "PureQubit":
        """
        -aV*|H> + aH*|V>, antipodal on the Poincare sphere.

        For canonical states (aH real) this is the partner U(aH, aV)|V>.
        """
        return PureQubit(-self.aV.conjugate(), self.aH.conjugate())

    def density(self) -> "DensityMatrix":
        return DensityMatrix(np.outer(self.vector, self.vector.conj()))


H_STATE = PureQubit(1, 0)
V_STATE = PureQubit(0, 1)


@dataclass(frozen=True, eq=False)
class Unitary2:
    matrix: np.ndarray
    label: str = ""

    def __post_init__(self):
        matrix = _frozen(self.matrix)
        if matrix.shape != (2, 2):
            raise DimensionError(f"expected a 2x2 matrix, got {matrix.shape}")
        _check_finite(matrix, "unitary entries")
        deviation = np.max(np.abs(matrix.conj().T @ matrix - IDENTITY_2))
        if deviation > ATOL:
            raise DomainError(f"matrix is not unitary (max |U^dag U - I| = {deviation:.3e})")
        object.__setattr__(self, "matrix", matrix)

    def dagger(self) -> "Unitary2":
        label = f"{self.label}^dag" if self.label else ""
        return Unitary2(self.matrix.conj().T, label)

    def apply(self, psi: PureQubit) -> PureQubit:
        return PureQubit.from_vector(self.matrix @ psi.vector, normalize=True)

    @property
    def determinant(self) -> complex:
        return complex(np.linalg.det(self.matrix))


IDENTITY = Unitary2(IDENTITY_2, "I")
I_SIGMA_Y = Unitary2(1j * SIGMA_Y, "i*sigma_y")
PAULI_X = Unitary2(SIGMA_X, "sigma_x")
PAULI_Z = Unitary2(SIGMA_Z, "sigma_z")


@dataclass(frozen=True, eq=False)
class TwoQubitState:
    """Amplitudes in (HH, HV, VH, VV) order."""
    amplitudes: np.ndarray

    def __post_init__(self):
        amplitudes = _frozen(np.asarray(self.amplitudes).reshape(-1))
        if amplitudes.shape != (4,):
            raise DimensionError(f"a two-photon state has 4 amplitudes, got {amplitudes.shape[0]}")
        _check_finite(amplitudes, "two-photon amplitudes")
        norm = float(np.vdot(amplitudes, amplitudes).real)
        if abs(norm - 1.0) > ATOL:
            raise NormalizationError(f"two-photon state norm^2 = {norm!r}, expected 1")
        object.__setattr__(self, "amplitudes", amplitudes)

    def density(self) -> "DensityMatrix":
        return DensityMatrix(np.outer(self.amplitudes, self.amplitudes.conj()))

    def overlap(self, other: "TwoQubitState") -> complex:
        return complex(np.vdot(self.amplitudes, other.amplitudes))


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    matrix: np.ndarray

    def __post_init__(self):
        matrix = _frozen(self.matrix)
        if matrix.shape not in ((2, 2), (4, 4)):
            raise DimensionError(f"density matrices are 2x2 or 4x4, got {matrix.shape}")
        _check_finite(matrix, "density matrix entries")
        if np.max(np.abs(matrix - matrix.conj().T)) > ATOL:
            raise DomainError("density matrix is not Hermitian")
        trace = complex(np.trace(matrix))
        if abs(trace - 1.0) > ATOL:
            raise NormalizationError(f"density matrix trace = {trace!r}, expected 1")
        if np.min(np.linalg.eigvalsh(matrix)) < -EIG_TOL:
            raise DomainError("density matrix has a negative eigenvalue")
        object.__setattr__(self, "matrix", matrix)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def expectation(self, operator: np.ndarray) -> float:
        """tr(operator . rho), real part (operator assumed Hermitian)."""
        return float(np.trace(operator @ self.matrix).real)


def density_from_bloch(n: PoincareVector) -> DensityMatrix:
    """(I + n.sigma) / 2, valid for |n| <= 1."""
    return DensityMatrix((IDENTITY_2 + n.sigma()) / 2)


def bloch_from_density(rho: DensityMatrix) -> PoincareVector:
    if rho.dim != 2:
        raise DimensionError(f"Bloch vectors need a 2x2 density matrix, got dim {rho.dim}")
    return PoincareVector.from_array([rho.expectation(p) for p in PAULIS])


def make_su2(alpha: float, beta: ComplexAmplitude) -> Unitary2:
    """
    The SU(2) rotation taking |H> to alpha|H> + beta|V>
    and |V> to alpha|V> - beta*|H>.
    """
    if isinstance(alpha, complex):
        if abs(alpha.imag) > ATOL:
            raise DomainError(f"alpha must be real, got {alpha}")
        alpha = alpha.real
    alpha = float(alpha)
    beta = complex(beta)
    _check_finite([alpha, beta], "SU(2) parameters")
    norm = alpha * alpha + abs(beta) ** 2
    if abs(norm - 1.0) > ATOL:
        raise NormalizationError(f"alpha^2 + |beta|^2 = {norm!r}, expected 1")
    matrix = np.array([[alpha, -beta.conjugate()], [beta, alpha]], dtype=complex)
    return Unitary2(matrix, f"U({alpha:.6g}, {beta:.6g})")


def su2_for_state(psi: PureQubit) -> Unitary2:
    """U(alpha, beta) built from the canonical form of `psi`."""
    canonical = psi.canonical()
    return make_su2(canonical.aH.real, canonical.aV)


def bloch_from_state(psi: PureQubit) -> PoincareVector:
    cross = psi.aH.conjugate() * psi.aV
    z = abs(psi.aH) ** 2 - abs(psi.aV) ** 2
    return PoincareVector.from_array(
        np.clip([2 * cross.real, 2 * cross.imag, z], -1.0, 1.0)
    )


def state_from_bloch(n: PoincareVector) -> PureQubit:
    if abs(n.norm - 1.0) > ATOL:
        raise DomainError(f"state_from_bloch needs a unit vector, got norm {n.norm}")
    aH = math.sqrt(max(0.0, (1.0 + n.z) / 2.0))
    if aH > ROUND_TRIP_TOL:
        aV = complex(n.x, n.y) / (2.0 * aH)
    else:
        aH, aV = 0.0, 1.0
    return PureQubit.from_vector([aH, aV], normalize=True)


def tensor(a, b):
    """
    Kronecker product in (HH, HV, VH, VV) order.

    PureQubit x PureQubit -> TwoQubitState,
    DensityMatrix x DensityMatrix -> DensityMatrix,
    Unitary2 / 2x2 arrays -> 4x4 array.
    """
    if isinstance(a, PureQubit) and isinstance(b, PureQubit):
        return TwoQubitState(np.kron(a.vector, b.vector))
    if isinstance(a, DensityMatrix) and isinstance(b, DensityMatrix):
        if a.dim != 2 or b.dim != 2:
            raise DimensionError(f"tensor expects 2x2 factors, got {a.dim} and {b.dim}")
        return DensityMatrix(np.kron(a.matrix, b.matrix))

    def as_operator(value):
        if isinstance(value, Unitary2):
            return value.matrix
        if isinstance(value, DensityMatrix):
            return value.matrix
        array = np.asarray(value, dtype=complex)
        if array.shape != (2, 2):
            raise DimensionError(f"tensor expects 2x2 operators, got shape {array.shape}")
        return array

    if isinstance(a, (PureQubit, TwoQubitState)) or isinstance(b, (PureQubit, TwoQubitState)):
        raise DimensionError("cannot tensor a state vector with an operator")
    return np.kron(as_operator(a), as_operator(b))


def partial_trace(rho: DensityMatrix, keep: int) -> DensityMatrix:
    """Reduce a two-photon density matrix to subsystem `keep` (0 = A, 1 = B)."""
    if rho.dim != 4:
        raise DimensionError(f"partial_trace needs a 4x4 density matrix, got dim {rho.dim}")
    blocks = rho.matrix.reshape(2, 2, 2, 2)
    if keep == 0:
        reduced = np.einsum("ijkj->ik", blocks)
    elif keep == 1:
        reduced = np.einsum("ijil->jl", blocks)
    else:
        raise DomainError(f"subsystem index must be 0 or 1, got {keep}")
    return DensityMatrix(reduced)


def fidelity(a: PureQubit, b: PureQubit) -> float:
    """|<a|b>|^2, insensitive to global phase."""
    value = abs(np.vdot(a.vector, b.vector)) ** 2
    return float(min(1.0, value))


def state_fidelity(a: np.ndarray, b: np.ndarray) -> float:
    """|<a|b>|^2 for normalized vectors of any (equal) dimension."""
    a = np.asarray(a, dtype=complex).reshape(-1)
    b = np.asarray(b, dtype=complex).reshape(-1)
    if a.shape != b.shape:
        raise DimensionError(f"state dimensions differ: {a.shape} vs {b.shape}")
    return float(min(1.0, abs(np.vdot(a, b)) ** 2))


def branch_probability(vector: np.ndarray, n_qubits: int, index: int, outcome: int) -> float:
    """Probability that photon `index` of an n-photon vector is found in H (0) or V (1)."""
    psi = np.asarray(vector).reshape([2] * n_qubits)
    branch = np.take(psi, outcome, axis=index)
    return float(np.sum(np.abs(branch) ** 2))


def collapse(vector: np.ndarray, n_qubits: int, index: int, outcome: int) -> np.ndarray:
    psi = np.array(vector, dtype=complex).reshape([2] * n_qubits)
    slicer = [slice(None)] * n_qubits
    slicer[index] = 1 - outcome
    psi[tuple(slicer)] = 0.0
    psi = psi.reshape(-1)
    return psi / np.linalg.norm(psi)


def draw_outcome(p_h: float, rng: SeededStream, forced: tp.Optional[int] = None) -> int:
    """0 (H) with probability p_h, else 1 (V); `forced` pins a branch of non-zero weight."""
    if forced is not None:
        if forced not in (0, 1):
            raise DomainError(f"outcome must be 0 (H) or 1 (V), got {forced}")
        weight = p_h if forced == 0 else 1.0 - p_h
        if weight <= ATOL:
            raise DomainError(f"forced outcome {forced} has zero probability")
        return forced
    return 0 if rng.uniform() < p_h else 1


def measure_computational(
    psi: tp.Union[PureQubit, TwoQubitState],
    rng: SeededStream,
    subsystem: int = 0,
    forced: tp.Optional[int] = None,
) -> tp.Tuple[int, tp.Union[PureQubit, TwoQubitState]]:
    """
    Von Neumann measurement in the {H, V} basis.

    Returns (outcome, collapsed state) with outcome 0 for H and 1 for V.
    For a two-photon state `subsystem` selects the measured photon.
    """
    if isinstance(psi, PureQubit):
        if subsystem != 0:
            raise DomainError(f"a single photon has only subsystem 0, got {subsystem}")
        vector, n_qubits = psi.vector, 1
    elif isinstance(psi, TwoQubitState):
        if subsystem not in (0, 1):
            raise DomainError(f"subsystem index must be 0 or 1, got {subsystem}")
        vector, n_qubits = psi.amplitudes, 2
    else:
        raise DimensionError(f"cannot measure object of type {type(psi).__name__}")

    p_h = branch_probability(vector, n_qubits, subsystem, 0)
    outcome = draw_outcome(p_h, rng, forced)
    collapsed = collapse(vector, n_qubits, subsystem, outcome)
    if n_qubits == 1:
        return outcome, PureQubit.from_vector(collapsed, normalize=True)
    return outcome, TwoQubitState(collapsed)


def apply_operator(vector: np.ndarray, operator: np.ndarray, targets: tp.Sequence[int],
                   n_qubits: int) -> np.ndarray:
    """Apply a 2^k x 2^k operator to photons `targets` of an n-photon vector."""
    k = len(targets)
    operator = np.asarray(operator, dtype=complex)
    if operator.shape != (2 ** k, 2 ** k):
        raise DimensionError(f"operator shape {operator.shape} does not act on {k} photon(s)")
    psi = np.asarray(vector, dtype=complex).reshape([2] * n_qubits)
    op = operator.reshape([2] * (2 * k))
    psi = np.tensordot(op, psi, axes=(list(range(k, 2 * k)), list(targets)))
    psi = np.moveaxis(psi, list(range(k)), list(targets))
    return psi.reshape(-1)


def reduced_density(vector: np.ndarray, n_qubits: int, index: int) -> np.ndarray:
    """2x2 reduced density matrix of photon `index`."""
    psi = np.asarray(vector, dtype=complex).reshape([2] * n_qubits)
    others = [axis for axis in range(n_qubits) if axis != index]
    return np.tensordot(psi, psi.conj(), axes=(others, others))


def pure_state_of(rho: np.ndarray, tolerance: float = ROUND_TRIP_TOL) -> PureQubit:
    """Pure state whose projector is `rho`; fails for mixed input."""
    values, vectors = np.linalg.eigh(rho)
    if values[-1] < 1.0 - tolerance:
        raise DomainError(f"state is mixed (largest eigenvalue {values[-1]:.12f})")
    return PureQubit.from_vector(vectors[:, -1], normalize=True).canonical()


def random_pure_state(rng: SeededStream) -> PureQubit:
    """Haar-random qubit."""
    raw = rng.normal(4)
    return PureQubit.from_vector([complex(raw[0], raw[1]), complex(raw[2], raw[3])],
                                 normalize=True)


def random_unit_vector(rng: SeededStream) -> PoincareVector:
    raw = rng.normal(3)
    return PoincareVector.from_array(raw / np.linalg.norm(raw))


def random_su2(rng: SeededStream) -> Unitary2:
    canonical = random_pure_state(rng).canonical()
    return make_su2(canonical.aH.real, canonical.aV)


@dataclass
class InvariantCheck:
    """Outcome of a numerical identity check over a batch of trials."""
    name: str
    trials: int
    max_deviation: float
    threshold: float
    details: tp.Dict[str, float] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.max_deviation < self.threshold
