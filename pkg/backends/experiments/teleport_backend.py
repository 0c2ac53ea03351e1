import itertools
import typing as tp

import numpy as np

from .base import AnalyticTable, ExperimentBackend
from core import qmath
from core.engine import SINGLET_AMPLITUDES, Session
from protocols.teleport import CNOT, HADAMARD, teleport
from utils.dataclasses import ShotResult, ShotTotals

LABELS = ["".join(bits) for bits in itertools.product("01", repeat=2)]


def bell_outcome_probabilities(psi: qmath.PureQubit) -> tp.Dict[str, float]:
    """P(m0, m1) read off the amplitudes after Alice's CNOT and Hadamard."""
    state = np.kron(psi.vector, SINGLET_AMPLITUDES)
    state = qmath.apply_operator(state, CNOT, [0, 1], 3)
    state = qmath.apply_operator(state, HADAMARD, [0], 3)
    weights = np.sum(np.abs(state.reshape(2, 2, 2)) ** 2, axis=2)
    return {f"{m0}{m1}": float(weights[m0, m1]) for m0, m1 in itertools.product((0, 1), repeat=2)}


class TeleportBackend(ExperimentBackend):
    name = "teleport"
    expected_ledger = (1, 2, 0)

    def labels(self) -> tp.List[str]:
        return list(LABELS)

    def run_shot(self, session: Session, forced_branch: tp.Optional[int] = None) -> ShotResult:
        result = teleport(self.target, session)
        label = "".join(str(bit) for bit in result.outcome)
        return ShotResult(label, result.outcome[1], {"fidelity": result.fidelity})

    def analytic(self) -> AnalyticTable:
        matrix = bell_outcome_probabilities(self.target)
        return {label: (0.25, matrix[label]) for label in LABELS}

    def summarize(self, totals: ShotTotals, tolerance_sigma: float):
        metrics = {
            "fidelity_mean": totals.mean("fidelity"),
            "fidelity_min": totals.minimum("fidelity"),
        }
        return metrics, {"fidelity_exact": metrics["fidelity_min"] > 1 - qmath.ROUND_TRIP_TOL}
