import typing as tp

from .base import AnalyticTable, ExperimentBackend
from core.engine import PartyId, Session
from core.errors import DomainError
from core.qmath import PoincareVector, PureQubit
from protocols.rsm import (
    PovmSet, projective_probability_matrix, projector, rsm_povm, rsm_projective,
)
from protocols.rsp import BIT_TARGET_HELD, prepare_remote
from utils.dataclasses import ShotResult, ShotTotals


class _RemoteMeasurementBackend(ExperimentBackend):
    """
    Shared shot logic: Alice runs the preparation step, Bob turns his
    apparatus around when the bit says he holds the complement, then measures.
    """

    def _effects(self, branch: int):
        raise NotImplementedError("must be implemented in the child class")

    def _apparatus_label(self, branch: int) -> str:
        raise NotImplementedError("must be implemented in the child class")

    def run_shot(self, session: Session, forced_branch: tp.Optional[int] = None) -> ShotResult:
        bit, b_half = prepare_remote(session, self.target, forced_branch)
        session.apply_correction(PartyId.BOB, b_half, None, label=self._apparatus_label(bit))
        labels = self.labels()
        outcome = session.measure_effects(
            PartyId.BOB, [b_half], self._effects(bit), labels, reads=session.received(PartyId.BOB)
        )
        session.close()
        return ShotResult(labels[outcome], bit)

    def analytic(self) -> AnalyticTable:
        # Alice's bit is a fair coin and both branches give the same distribution
        return self.branch_analytic(BIT_TARGET_HELD)

    def branch_deviation(self) -> float:
        complement = self.branch_analytic(1 - BIT_TARGET_HELD)
        target = self.branch_analytic(BIT_TARGET_HELD)
        return max(abs(complement[label][0] - target[label][0]) for label in self.labels())

    def summarize(self, totals: ShotTotals, tolerance_sigma: float):
        deviation = self.branch_deviation()
        metrics = {"branch_analytic_deviation": deviation}
        for branch in (0, 1):
            shots = sum(totals.branch_count(branch, label) for label in self.labels())
            metrics[f"branch_{branch}_shots"] = shots
        return metrics, {"branch_analytic_equal": deviation == 0.0}


class RsmProjectiveBackend(_RemoteMeasurementBackend):
    name = "rsm-projective"

    def __init__(self, target: PureQubit, b: PoincareVector):
        super().__init__(target)
        if not b.is_unit:
            raise DomainError(f"measurement direction must be a unit vector, got norm {b.norm}")
        self.b = b

    def labels(self) -> tp.List[str]:
        return ["+", "-"]

    def _effects(self, branch: int):
        effective_b = rsm_projective(self.n, self.b, branch).effective_b
        return [projector(effective_b, "+"), projector(effective_b, "-")]

    def _apparatus_label(self, branch: int) -> str:
        return "keep apparatus b" if branch == BIT_TARGET_HELD else "reverse apparatus b -> -b"

    def branch_analytic(self, branch: int) -> AnalyticTable:
        result = rsm_projective(self.n, self.b, branch)
        return {
            label: (probability, projective_probability_matrix(result.effective_b, result.held_n, label))
            for label, probability in zip(self.labels(), result.probabilities)
        }

    def describe(self):
        payload = super().describe()
        payload["b"] = self.b.array.tolist()
        return payload


class RsmPovmBackend(_RemoteMeasurementBackend):
    name = "rsm-povm"

    def __init__(self, target: PureQubit, povm: PovmSet):
        super().__init__(target)
        self.povm = povm

    def labels(self) -> tp.List[str]:
        return [f"f{index}" for index in range(len(self.povm))]

    def _device(self, branch: int) -> PovmSet:
        return self.povm if branch == BIT_TARGET_HELD else self.povm.flipped()

    def _effects(self, branch: int):
        return self._device(branch).effects()

    def _apparatus_label(self, branch: int) -> str:
        return "keep POVM" if branch == BIT_TARGET_HELD else "reverse POVM f -> -f"

    def branch_analytic(self, branch: int) -> AnalyticTable:
        probabilities = rsm_povm(self.n, self.povm, branch)
        held_n = self.n if branch == BIT_TARGET_HELD else -self.n
        matrix = self._device(branch).probabilities_matrix(held_n)
        return {
            label: (probability, matrix_probability)
            for label, probability, matrix_probability in zip(self.labels(), probabilities, matrix)
        }

    def describe(self):
        payload = super().describe()
        payload["povm"] = self.povm.name
        payload["elements"] = [f.array.tolist() for f in self.povm.elements]
        return payload
