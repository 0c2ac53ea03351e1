import typing as tp

import numpy as np

from .base import AnalyticTable, ExperimentBackend
from .rsp_backend import alice_outcome_probabilities
from core import qmath
from core.engine import Session
from protocols.nogo import complement_antiunitary, complement_map, universal_not_choi
from protocols.rsp import BIT_TARGET_HELD, EnsembleKind, rsp_run
from utils.dataclasses import ShotResult, ShotTotals


class NoGoBackend(ExperimentBackend):
    """
    One-bit preparation of a generic state: without a physical universal NOT
    Bob holds the target only when Alice's bit says so.
    """
    name = "nogo"

    def labels(self) -> tp.List[str]:
        return ["failure", "success"]

    def run_shot(self, session: Session, forced_branch: tp.Optional[int] = None) -> ShotResult:
        result = rsp_run(self.target, EnsembleKind.ARBITRARY, session, forced_outcome=forced_branch)
        label = "success" if result.alice_outcome == BIT_TARGET_HELD else "failure"
        return ShotResult(label, result.alice_outcome, {"fidelity": result.fidelity})

    def analytic(self) -> AnalyticTable:
        p_h, p_v = alice_outcome_probabilities(self.target)
        return {"failure": (0.5, p_h), "success": (0.5, p_v)}

    def summarize(self, totals: ShotTotals, tolerance_sigma: float):
        choi = universal_not_choi()
        normalized = universal_not_choi(normalized=True)
        rho = self.target.density().matrix
        antiunitary_gap = float(np.max(np.abs(complement_map(rho) - complement_antiunitary(rho))))
        metrics = {
            "fidelity_mean": totals.mean("fidelity"),
            "choi_min_eigenvalue": choi.min_eigenvalue,
            "choi_min_eigenvalue_normalized": normalized.min_eigenvalue,
            "antiunitary_deviation": antiunitary_gap,
        }
        checks = {
            "choi_not_positive": abs(choi.min_eigenvalue + 1) < qmath.ATOL,
            "complement_is_antiunitary": antiunitary_gap < qmath.ATOL,
        }
        return metrics, checks
