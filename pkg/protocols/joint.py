"""
Joint measurements on (prepared photon, Bob's own photon).

With Pi = (I.I + r.sigma x I + I x s.sigma + sum t_ij sigma_i x sigma_j)/4 the
two branches of the preparation give

    P(Psi)      = (1 + r.n + s.m + n.t.m) / 4
    P(Psi_perp) = (1 - r.n + s.m - n.t.m) / 4

and no choice of signs on r and s alone removes the n.t.m difference. When
Bob knows his own photon he can re-prepare it as its complement and use the
spin-flipped device (sigma_y x sigma_y) Pi* (sigma_y x sigma_y), which
negates r and s and keeps t.
"""
import itertools
import logging
import typing as tp
from dataclasses import dataclass, field

import numpy as np

from core import qmath
from core.errors import DimensionError, InvalidEffectError
from core.qmath import PAULIS, PoincareVector

logger = logging.getLogger(__name__)

SPIN_FLIP = np.kron(qmath.SIGMA_Y, qmath.SIGMA_Y)


@dataclass(frozen=True, eq=False)
class JointOperator:
    r: PoincareVector
    s: PoincareVector
    t: np.ndarray
    # check 0 <= Pi <= I on construction
    is_effect: bool = True

    def __post_init__(self):
        t = np.array(self.t, dtype=float)
        if t.shape != (3, 3):
            raise DimensionError(f"t must be 3x3, got shape {t.shape}")
        if not np.all(np.isfinite(t)):
            raise InvalidEffectError("t has non-finite entries")
        t.setflags(write=False)
        object.__setattr__(self, "t", t)
        if self.is_effect:
            eigenvalues = np.linalg.eigvalsh(self.matrix)
            if eigenvalues[0] < -qmath.EIG_TOL or eigenvalues[-1] > 1 + qmath.EIG_TOL:
                raise InvalidEffectError(
                    f"eigenvalues of Pi lie in [{eigenvalues[0]:.6g}, {eigenvalues[-1]:.6g}], "
                    "expected within [0, 1]"
                )

    @classmethod
    def from_matrix(cls, matrix: np.ndarray, is_effect: bool = True) -> "JointOperator":
        """Read (r, s, t) back from a 4x4 Hermitian operator."""
        matrix = np.asarray(matrix, dtype=complex)
        if matrix.shape != (4, 4):
            raise DimensionError(f"expected a 4x4 operator, got {matrix.shape}")
        if np.max(np.abs(matrix - matrix.conj().T)) > qmath.ATOL:
            raise InvalidEffectError("operator is not Hermitian")
        scale = 4 * np.trace(matrix).real
        if abs(scale - 4.0) > qmath.ATOL:
            # Pi is normalized so that its identity coefficient is 1/4
            raise InvalidEffectError(f"tr(Pi) = {scale / 4:.6g}, expected 1")

        def coefficient(a, b):
            return float(np.trace(matrix @ np.kron(a, b)).real)

        r = [coefficient(p, qmath.IDENTITY_2) for p in PAULIS]
        s = [coefficient(qmath.IDENTITY_2, p) for p in PAULIS]
        t = [[coefficient(a, b) for b in PAULIS] for a in PAULIS]
        return cls(PoincareVector.from_array(r), PoincareVector.from_array(s), np.array(t),
                   is_effect=is_effect)

    @classmethod
    def from_flat(cls, values: tp.Sequence[float], is_effect: bool = True) -> "JointOperator":
        """15 numbers: r (3), s (3), t row-major (9)."""
        values = [float(v) for v in values]
        if len(values) != 15:
            raise DimensionError(f"Pi takes 15 numbers (r: 3, s: 3, t: 9), got {len(values)}")
        return cls(PoincareVector.from_array(values[:3]), PoincareVector.from_array(values[3:6]),
                   np.array(values[6:]).reshape(3, 3), is_effect=is_effect)

    @property
    def matrix(self) -> np.ndarray:
        total = np.kron(qmath.IDENTITY_2, qmath.IDENTITY_2)
        total = total + np.kron(self.r.sigma(), qmath.IDENTITY_2)
        total = total + np.kron(qmath.IDENTITY_2, self.s.sigma())
        for i, a in enumerate(PAULIS):
            for j, b in enumerate(PAULIS):
                total = total + self.t[i, j] * np.kron(a, b)
        return total / 4

    def with_signs(self, sign_r: int, sign_s: int) -> "JointOperator":
        return JointOperator(
            PoincareVector.from_array(sign_r * self.r.array),
            PoincareVector.from_array(sign_s * self.s.array),
            self.t, is_effect=False,
        )

    def flat(self) -> tp.List[float]:
        return list(self.r.array) + list(self.s.array) + list(self.t.reshape(-1))


def singlet_projector() -> JointOperator:
    """|Psi-><Psi-| = (I - sum sigma_i x sigma_i) / 4."""
    return JointOperator(PoincareVector(0, 0, 0), PoincareVector(0, 0, 0), -np.eye(3))


def identity_effect() -> JointOperator:
    """(I x I) / 4."""
    return JointOperator(PoincareVector(0, 0, 0), PoincareVector(0, 0, 0), np.zeros((3, 3)))


def joint_probability(pi: JointOperator, n: PoincareVector, m: PoincareVector) -> float:
    """(1 + r.n + s.m + sum t_ij n_i m_j) / 4."""
    return (1 + pi.r.dot(n) + pi.s.dot(m) + float(n.array @ pi.t @ m.array)) / 4


def joint_probability_matrix(pi: JointOperator, n: PoincareVector, m: PoincareVector) -> float:
    """tr(Pi rho(n) x rho(m)) on 4x4 matrices."""
    state = qmath.tensor(qmath.density_from_bloch(n), qmath.density_from_bloch(m))
    return state.expectation(pi.matrix)


def joint_discrepancy(pi: JointOperator, n: PoincareVector, m: PoincareVector) -> float:
    """|P(rho_Psi x rho_Phi) - P(rho_Psi_perp x rho_Phi)| = |r.n + n.t.m| / 2."""
    return abs(joint_probability(pi, n, m) - joint_probability(pi, -n, m))


@dataclass
class SignFlipRow:
    sign_r: int
    sign_s: int
    discrepancy: float


def joint_sign_flip_scan(pi: JointOperator, n: PoincareVector, m: PoincareVector) -> tp.List[SignFlipRow]:
    """
    For every device (+/-r, +/-s, t), how far Bob's statistics on the complement
    branch are from the desired ones on the target branch.
    """
    desired = joint_probability(pi, n, m)
    rows = []
    for sign_r, sign_s in itertools.product((1, -1), repeat=2):
        device = pi.with_signs(sign_r, sign_s)
        rows.append(SignFlipRow(sign_r, sign_s, abs(joint_probability(device, -n, m) - desired)))
    return rows


def sphere_grid(size: int) -> tp.List[PoincareVector]:
    """size x size unit vectors on a (theta midpoint, phi) grid."""
    thetas = (np.arange(size) + 0.5) * np.pi / size
    phis = np.arange(size) * 2 * np.pi / size
    return [PoincareVector.from_angles(theta, phi) for theta in thetas for phi in phis]


@dataclass
class EqualizationCertificate:
    strategy: str
    grid_points: int
    max_deviation: float
    max_deviation_matrix: float
    # probability terms and how each one transforms under the strategy
    terms: tp.Dict[str, str] = field(default_factory=dict)
    failures: tp.List[PoincareVector] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.max_deviation < qmath.ATOL and self.max_deviation_matrix < qmath.ATOL


def _certify(strategy: str, pi: JointOperator, flipped: JointOperator, m: PoincareVector,
             m_flipped: PoincareVector, grid_size: int, terms: tp.Dict[str, str]) -> EqualizationCertificate:
    deviation = deviation_matrix = 0.0
    failures = []
    grid = sphere_grid(grid_size)
    for n in grid:
        desired = joint_probability(pi, n, m)
        simulated = joint_probability(flipped, -n, m_flipped)
        gap = abs(simulated - desired)
        deviation = max(deviation, gap)
        deviation_matrix = max(
            deviation_matrix, abs(joint_probability_matrix(flipped, -n, m_flipped) - desired)
        )
        if gap > qmath.ATOL:
            failures.append(n)
    certificate = EqualizationCertificate(strategy, len(grid), deviation, deviation_matrix,
                                          terms, failures)
    logger.info("%s equalization: max deviation %.3e over %d directions, %d failures",
                strategy, deviation, len(grid), len(failures))
    return certificate


def joint_equalize_known_phi(pi: JointOperator, m: PoincareVector, grid_size: int = 10
                             ) -> tp.Tuple[JointOperator, PoincareVector, EqualizationCertificate]:
    """
    Exact strategy for a known second photon: re-prepare it as its complement
    (m -> -m) and use the spin-flipped device (r, s, t) -> (-r, -s, t).
    """
    flipped = JointOperator.from_matrix(SPIN_FLIP @ pi.matrix.conj() @ SPIN_FLIP)
    m_flipped = -m
    terms = {
        "1": "1 -> 1",
        "r.n": "(-r).(-n) = r.n",
        "s.m": "(-s).(-m) = s.m",
        "n.t.m": "(-n).t.(-m) = n.t.m",
    }
    return flipped, m_flipped, _certify("exact", pi, flipped, m, m_flipped, grid_size, terms)


def joint_equalize_literal(pi: JointOperator, m: PoincareVector, grid_size: int = 10
                           ) -> tp.Tuple[JointOperator, PoincareVector, EqualizationCertificate]:
    """
    Flip only m and r. Works iff s.m = 0; the certificate lists the grid
    directions where it fails (all of them when s.m != 0).
    """
    flipped = pi.with_signs(-1, 1)
    m_flipped = -m
    terms = {
        "1": "1 -> 1",
        "r.n": "(-r).(-n) = r.n",
        "s.m": "s.(-m) = -s.m",
        "n.t.m": "(-n).t.(-m) = n.t.m",
    }
    return flipped, m_flipped, _certify("literal", pi, flipped, m, m_flipped, grid_size, terms)
