import math
import typing as tp

from .base import AnalyticTable, ExperimentBackend
from core import qmath
from core.engine import Session
from core.qmath import PureQubit
from protocols.rsp import EnsembleKind, rsp_run, validate_ensemble
from protocols.singlet import epr_singlet
from utils.dataclasses import ShotResult, ShotTotals


def alice_outcome_probabilities(target: PureQubit) -> tp.Tuple[float, float]:
    """(P(H), P(V)) for Alice's measurement after U^dag, read off the 4x4 density matrix."""
    rotation = qmath.su2_for_state(target).dagger()
    rotated = qmath.tensor(rotation, qmath.IDENTITY) @ epr_singlet().amplitudes
    alice = qmath.partial_trace(qmath.TwoQubitState(rotated).density(), keep=0)
    return float(alice.matrix[0, 0].real), float(alice.matrix[1, 1].real)


class RspBackend(ExperimentBackend):
    """Remote preparation of `target` declared as a member of `kind`."""
    name = "rsp"

    def __init__(self, target: PureQubit, kind: EnsembleKind = EnsembleKind.ARBITRARY):
        super().__init__(target)
        self.kind = EnsembleKind(kind)
        validate_ensemble(self.target, self.kind)

    def labels(self) -> tp.List[str]:
        return ["H", "V"]

    def run_shot(self, session: Session, forced_branch: tp.Optional[int] = None) -> ShotResult:
        result = rsp_run(self.target, self.kind, session, forced_outcome=forced_branch)
        return ShotResult("HV"[result.alice_outcome], result.alice_outcome,
                          {"fidelity": result.fidelity})

    def analytic(self) -> AnalyticTable:
        p_h, p_v = alice_outcome_probabilities(self.target)
        return {"H": (0.5, p_h), "V": (0.5, p_v)}

    def expected_fidelity(self) -> float:
        return 0.5 if self.kind is EnsembleKind.ARBITRARY else 1.0

    def summarize(self, totals: ShotTotals, tolerance_sigma: float):
        mean = totals.mean("fidelity")
        expected = self.expected_fidelity()
        metrics = {
            "fidelity_mean": mean,
            "fidelity_min": totals.minimum("fidelity"),
            "fidelity_expected": expected,
        }
        if self.kind is EnsembleKind.ARBITRARY:
            # fidelity is 1 on V and 0 on H, a fair coin
            std_error = 0.5 / math.sqrt(totals.shots)
            metrics["fidelity_std_error"] = std_error
            metrics["fidelity_z"] = (mean - expected) / std_error
            checks = {"fidelity_half": abs(metrics["fidelity_z"]) <= tolerance_sigma}
        else:
            checks = {"fidelity_exact": metrics["fidelity_min"] > 1 - qmath.ROUND_TRIP_TOL}
        return metrics, checks

    def describe(self):
        payload = super().describe()
        payload["kind"] = self.kind.value
        return payload
