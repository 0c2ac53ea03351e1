import typing as tp
from abc import ABC, abstractmethod

from core import qmath
from core.engine import Session
from core.errors import DomainError
from core.qmath import PoincareVector, PureQubit
from utils.dataclasses import ShotTotals, ShotResult

# (label -> (Bloch-formula probability, matrix-trace probability))
AnalyticTable = tp.Dict[str, tp.Tuple[float, float]]


class ExperimentBackend(ABC):
    name = ""
    # per-shot (ebits, cbits Alice->Bob, cbits Bob->Alice)
    expected_ledger = (1, 1, 0)

    def __init__(self, target: tp.Union[PureQubit, PoincareVector]):
        if isinstance(target, PoincareVector):
            if not target.is_unit:
                raise DomainError(f"target must be a pure state (|n| = 1), got |n| = {target.norm}")
            target = qmath.state_from_bloch(target)
        self.target = target.canonical()
        self.n: PoincareVector = qmath.bloch_from_state(self.target)

    @abstractmethod
    def labels(self) -> tp.List[str]:
        raise NotImplementedError("must be implemented in the child class")

    @abstractmethod
    def run_shot(self, session: Session, forced_branch: tp.Optional[int] = None) -> ShotResult:
        raise NotImplementedError("must be implemented in the child class")

    @abstractmethod
    def analytic(self) -> AnalyticTable:
        raise NotImplementedError("must be implemented in the child class")

    def branch_analytic(self, branch: int) -> AnalyticTable:
        """Outcome distribution conditioned on Alice's bit; only remote measurements have one."""
        raise NotImplementedError(f"{self.name} has no per-branch distribution")

    def summarize(self, totals: ShotTotals, tolerance_sigma: float
                  ) -> tp.Tuple[tp.Dict[str, float], tp.Dict[str, bool]]:
        return {}, {}

    def describe(self) -> tp.Dict[str, tp.Any]:
        return {
            "target": [_complex_pair(self.target.aH), _complex_pair(self.target.aV)],
            "n": self.n.array.tolist(),
        }


def _complex_pair(value: complex) -> tp.List[float]:
    return [float(value.real), float(value.imag)]
