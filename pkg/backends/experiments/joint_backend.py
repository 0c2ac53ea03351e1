import logging
import typing as tp
from enum import Enum

import numpy as np

from .base import AnalyticTable, ExperimentBackend
from core import qmath
from core.engine import PartyId, Session
from core.errors import DomainError, InvalidEffectError
from core.qmath import PoincareVector, PureQubit, Unitary2
from protocols.joint import (
    JointOperator, joint_equalize_known_phi, joint_equalize_literal,
    joint_probability, joint_probability_matrix, joint_sign_flip_scan,
)
from protocols.rsp import BIT_TARGET_HELD, prepare_remote
from utils.dataclasses import ShotResult, ShotTotals

logger = logging.getLogger(__name__)

OUTCOMES = ("click", "no-click")


class JointStrategy(str, Enum):
    NONE = "none"
    LITERAL = "literal"
    EXACT = "exact"


def flip_rotation(m: PoincareVector) -> Unitary2:
    """k.sigma for a unit k orthogonal to m: a pi rotation taking m to -m."""
    axis = np.cross(m.array, [1.0, 0.0, 0.0])
    if np.linalg.norm(axis) < 0.5:
        axis = np.cross(m.array, [0.0, 0.0, 1.0])
    k = PoincareVector.from_array(axis / np.linalg.norm(axis))
    return Unitary2(k.sigma(), "flip Phi")


class JointBackend(ExperimentBackend):
    """
    Bob measures the effect Pi on (his half of the preparation, his own photon Phi).
    The strategy decides what he does when Alice's bit says he holds the complement.
    """
    name = "joint"

    def __init__(self, target: PureQubit, pi: JointOperator, m: PoincareVector,
                 strategy: JointStrategy = JointStrategy.NONE):
        super().__init__(target)
        if not m.is_unit:
            raise DomainError(f"Bob's photon must be pure, got |m| = {m.norm}")
        self.pi = pi
        self.m = m
        self.strategy = JointStrategy(strategy)
        self.certificate = None
        if self.strategy is JointStrategy.EXACT:
            self.complement_device, self.complement_m, self.certificate = joint_equalize_known_phi(pi, m)
        elif self.strategy is JointStrategy.LITERAL:
            device, self.complement_m, self.certificate = joint_equalize_literal(pi, m)
            # Bob has to be able to build it
            try:
                self.complement_device = JointOperator.from_matrix(device.matrix)
            except InvalidEffectError as err:
                raise InvalidEffectError(f"literal strategy device is not an effect: {err}") from err
        else:
            self.complement_device, self.complement_m = pi, m

    def labels(self) -> tp.List[str]:
        return [f"{party}:{outcome}" for party in "HV" for outcome in OUTCOMES]

    def _branch_setup(self, branch: int) -> tp.Tuple[JointOperator, PoincareVector, PoincareVector]:
        if branch == BIT_TARGET_HELD:
            return self.pi, self.n, self.m
        return self.complement_device, -self.n, self.complement_m

    def run_shot(self, session: Session, forced_branch: tp.Optional[int] = None) -> ShotResult:
        phi = session.prepare_local(PartyId.BOB, qmath.state_from_bloch(self.m), "Phi")
        bit, b_half = prepare_remote(session, self.target, forced_branch)
        device, _, _ = self._branch_setup(bit)
        if bit != BIT_TARGET_HELD and self.strategy is not JointStrategy.NONE:
            session.apply_correction(PartyId.BOB, phi, flip_rotation(self.m))
            session.apply_correction(PartyId.BOB, b_half, None, label=f"switch to {self.strategy.value} device")
        else:
            session.apply_correction(PartyId.BOB, b_half, None, label="keep device")
        outcome = session.measure_effects(
            PartyId.BOB, [b_half, phi], [device.matrix, np.eye(4) - device.matrix],
            list(OUTCOMES), reads=session.received(PartyId.BOB),
        )
        session.close()
        return ShotResult(f"{'HV'[bit]}:{OUTCOMES[outcome]}", bit)

    def click_probability(self, branch: int) -> tp.Tuple[float, float]:
        device, n, m = self._branch_setup(branch)
        return joint_probability(device, n, m), joint_probability_matrix(device, n, m)

    def analytic(self) -> AnalyticTable:
        table = {}
        for branch in (0, 1):
            bloch, matrix = self.click_probability(branch)
            party = "HV"[branch]
            table[f"{party}:click"] = (bloch / 2, matrix / 2)
            table[f"{party}:no-click"] = ((1 - bloch) / 2, (1 - matrix) / 2)
        return table

    def summarize(self, totals: ShotTotals, tolerance_sigma: float):
        target, _ = self.click_probability(BIT_TARGET_HELD)
        complement, _ = self.click_probability(1 - BIT_TARGET_HELD)
        discrepancy = abs(target - complement)
        metrics = {
            "probability_target_branch": target,
            "probability_complement_branch": complement,
            "discrepancy": discrepancy,
            # best any (+/-r, +/-s) device can do without touching Phi
            "sign_flip_min_discrepancy": min(
                row.discrepancy for row in joint_sign_flip_scan(self.pi, self.n, self.m)
            ),
        }
        checks = {}
        if self.certificate is not None:
            metrics["certificate_max_deviation"] = self.certificate.max_deviation
            metrics["certificate_failures"] = len(self.certificate.failures)
        if self.strategy is JointStrategy.EXACT:
            checks["equalized"] = discrepancy < qmath.ATOL and self.certificate.passed
        logger.info("joint %s: P(target) %.6f, P(complement) %.6f",
                    self.strategy.value, target, complement)
        return metrics, checks

    def describe(self):
        payload = super().describe()
        payload.update({
            "m": self.m.array.tolist(),
            "pi": [float(value) for value in self.pi.flat()],
            "strategy": self.strategy.value,
        })
        return payload
