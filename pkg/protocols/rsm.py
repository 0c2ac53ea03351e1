"""
Remote state measurement: Bob reproduces the statistics of a measurement on
Alice's state even in the runs where he holds its complement, by reversing
his apparatus (b -> -b, or f_mu -> -f_mu for a POVM).
"""
import math
import typing as tp
from dataclasses import dataclass

import numpy as np

from core import qmath
from core.errors import CompletenessError, DomainError
from core.qmath import PoincareVector
from protocols.rsp import BIT_COMPLEMENT_HELD, BIT_TARGET_HELD
from utils.rng import SeededStream


def _sign(sign: tp.Union[int, str]) -> int:
    if sign in (1, "+"):
        return 1
    if sign in (-1, "-"):
        return -1
    raise DomainError(f"sign must be + or -, got {sign!r}")


def _check_bit(alice_outcome: int):
    if alice_outcome not in (BIT_TARGET_HELD, BIT_COMPLEMENT_HELD):
        raise DomainError(f"Alice's outcome is 0 (H) or 1 (V), got {alice_outcome!r}")


def projector(b: PoincareVector, sign: tp.Union[int, str]) -> np.ndarray:
    """P_(+/-)(b) = (I +/- b.sigma) / 2."""
    return (qmath.IDENTITY_2 + _sign(sign) * b.sigma()) / 2


def projective_probability(b: PoincareVector, n: PoincareVector, sign: tp.Union[int, str]) -> float:
    """(1 +/- b.n) / 2."""
    if not b.is_unit:
        raise DomainError(f"measurement direction must be a unit vector, got norm {b.norm}")
    return (1 + _sign(sign) * b.dot(n)) / 2


def projective_probability_matrix(b: PoincareVector, n: PoincareVector,
                                  sign: tp.Union[int, str]) -> float:
    """tr(P_(+/-)(b) rho(n)), evaluated on 2x2 matrices."""
    return qmath.density_from_bloch(n).expectation(projector(b, sign))


@dataclass
class RsmProjectiveResult:
    effective_b: PoincareVector
    held_n: PoincareVector
    probabilities: tp.Tuple[float, float]


def rsm_projective(target_n: PoincareVector, b: PoincareVector, alice_outcome: int) -> RsmProjectiveResult:
    """
    Bob's (+, -) distribution when he measures the photon he holds after the
    preparation step, flipping b whenever Alice's bit says he holds the complement.
    """
    _check_bit(alice_outcome)
    if not target_n.is_unit or not b.is_unit:
        raise DomainError("remote measurement needs unit vectors for n and b")
    if alice_outcome == BIT_TARGET_HELD:
        held_n, effective_b = target_n, b
    else:
        held_n, effective_b = -target_n, -b
    probabilities = (
        projective_probability(effective_b, held_n, "+"),
        projective_probability(effective_b, held_n, "-"),
    )
    return RsmProjectiveResult(effective_b, held_n, probabilities)


@dataclass(frozen=True)
class PovmSet:
    """
    Qubit POVM with elements F_mu = (|f_mu| I + f_mu.sigma) / 2.
    Complete iff sum |f_mu| = 2 and sum f_mu = 0.
    """
    elements: tp.Tuple[PoincareVector, ...]
    name: str = "custom"

    def __post_init__(self):
        object.__setattr__(self, "elements", tuple(self.elements))
        if len(self.elements) < 2:
            raise CompletenessError(f"a POVM needs at least 2 elements, got {len(self.elements)}")
        weight = sum(self.weights)
        if abs(weight - 2.0) > qmath.ATOL:
            raise CompletenessError(f"sum of |f_mu| is {weight!r}, expected 2")
        drift = np.linalg.norm(np.sum([f.array for f in self.elements], axis=0))
        if drift > qmath.ATOL:
            raise CompletenessError(f"sum of f_mu has norm {drift:.3e}, expected 0")
        for index, effect in enumerate(self.effects()):
            if np.min(np.linalg.eigvalsh(effect)) < -qmath.EIG_TOL:
                raise CompletenessError(f"element {index} is not positive semidefinite")

    @property
    def weights(self) -> tp.Tuple[float, ...]:
        return tuple(f.norm for f in self.elements)

    def effects(self) -> tp.List[np.ndarray]:
        return [(f.norm * qmath.IDENTITY_2 + f.sigma()) / 2 for f in self.elements]

    def flipped(self) -> "PovmSet":
        return PovmSet(tuple(-f for f in self.elements), name=f"{self.name} (flipped)")

    def probabilities(self, n: PoincareVector) -> tp.Tuple[float, ...]:
        """(|f_mu| + f_mu.n) / 2 for every element."""
        return tuple((f.norm + f.dot(n)) / 2 for f in self.elements)

    def probabilities_matrix(self, n: PoincareVector) -> tp.Tuple[float, ...]:
        rho = qmath.density_from_bloch(n)
        return tuple(rho.expectation(effect) for effect in self.effects())

    def __len__(self):
        return len(self.elements)


def trine_povm() -> PovmSet:
    """Three coplanar elements of weight 2/3 at 120 degrees in the x-z plane."""
    return PovmSet(tuple(
        PoincareVector(
            2 / 3 * math.sin(2 * math.pi * k / 3), 0.0, 2 / 3 * math.cos(2 * math.pi * k / 3)
        )
        for k in range(3)
    ), name="trine")


def projective_povm(b: PoincareVector) -> PovmSet:
    return PovmSet((b, -b), name="projective")


def random_povm(rng: SeededStream, size: int = 4) -> PovmSet:
    """Random complete POVM with `size` elements (size >= 3 keeps them generic)."""
    raw = rng.normal(3 * size).reshape(size, 3)
    raw -= raw.mean(axis=0)
    raw *= 2.0 / np.sum(np.linalg.norm(raw, axis=1))
    # re-centre to kill the rounding left by the scaling
    raw -= raw.mean(axis=0)
    return PovmSet(tuple(PoincareVector.from_array(row) for row in raw), name="random")


def rsm_povm(target_n: PoincareVector, povm: PovmSet, alice_outcome: int) -> tp.Tuple[float, ...]:
    """
    Bob's outcome distribution over mu after the preparation step, with every
    f_mu negated when he holds the complement.
    """
    _check_bit(alice_outcome)
    if not target_n.is_unit:
        raise DomainError(f"remote measurement needs a pure state, got |n| = {target_n.norm}")
    if alice_outcome == BIT_TARGET_HELD:
        held_n, device = target_n, povm
    else:
        held_n, device = -target_n, povm.flipped()
    distribution = device.probabilities(held_n)
    total = sum(distribution)
    if abs(total - 1.0) > qmath.ATOL:
        raise CompletenessError(f"distribution sums to {total!r}")
    return distribution
