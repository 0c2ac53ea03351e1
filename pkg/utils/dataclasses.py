import math
import typing as tp
from dataclasses import asdict, dataclass, field
from enum import Enum

DEFAULT_SHOTS = 100_000
DEFAULT_SIGMA = 4.0


class ProtocolName(str, Enum):
    RSP = "rsp"
    RSM_PROJECTIVE = "rsm-projective"
    RSM_POVM = "rsm-povm"
    JOINT = "joint"
    TELEPORT = "teleport"
    NOGO = "nogo"


@dataclass
class ExperimentSpec:
    """What to run, how often and how strictly to judge it."""
    protocol: ProtocolName
    parameters: tp.Dict[str, tp.Any] = field(default_factory=dict)
    shots: int = DEFAULT_SHOTS
    seed: int = 0
    tolerance_sigma: float = DEFAULT_SIGMA
    jobs: int = 0

    def __post_init__(self):
        self.protocol = ProtocolName(self.protocol)
        if self.shots < 1:
            raise ValueError(f"shots must be >= 1, got {self.shots}")
        if not self.tolerance_sigma > 0:
            raise ValueError(f"tolerance_sigma must be > 0, got {self.tolerance_sigma}")
        if self.seed < 0:
            raise ValueError(f"seed must be non-negative, got {self.seed}")


@dataclass
class ShotResult:
    """One protocol run as seen by the harness."""
    label: str
    branch: int
    values: tp.Dict[str, float] = field(default_factory=dict)


@dataclass
class OutcomeRow:
    label: str
    count: int
    frequency: float
    probability: float
    probability_matrix: float
    std_error: float
    z_score: float
    passed: bool


@dataclass
class FrequencyReport:
    protocol: str
    seed: int
    shots: int
    tolerance_sigma: float
    parameters: tp.Dict[str, tp.Any]
    outcomes: tp.List[OutcomeRow]
    ledger: tp.Dict[str, int]
    metrics: tp.Dict[str, float] = field(default_factory=dict)
    checks: tp.Dict[str, bool] = field(default_factory=dict)
    literature: tp.Dict[str, float] = field(default_factory=dict)
    transcript: tp.Optional[str] = None

    @property
    def passed(self) -> bool:
        return all(row.passed for row in self.outcomes) and all(self.checks.values())

    def to_dict(self) -> tp.Dict[str, tp.Any]:
        payload = asdict(self)
        payload.pop("transcript")
        payload["passed"] = self.passed
        return payload

    @classmethod
    def from_dict(cls, payload: tp.Dict[str, tp.Any]) -> "FrequencyReport":
        payload = dict(payload)
        payload.pop("passed", None)
        payload["outcomes"] = [OutcomeRow(**row) for row in payload["outcomes"]]
        return cls(**payload)


@dataclass
class BranchComparison:
    """Both of Alice's branches run with the flip rule, side by side."""
    protocol: str
    seed: int
    shots_per_branch: int
    tolerance_sigma: float
    labels: tp.List[str]
    analytic_complement: tp.List[float]
    analytic_target: tp.List[float]
    analytic_max_deviation: float
    empirical_complement: tp.List[float]
    empirical_target: tp.List[float]
    z_scores: tp.List[float]

    @property
    def analytic_equal(self) -> bool:
        return self.analytic_max_deviation == 0.0

    @property
    def passed(self) -> bool:
        return self.analytic_equal and all(abs(z) <= self.tolerance_sigma for z in self.z_scores)

    def to_dict(self) -> tp.Dict[str, tp.Any]:
        payload = asdict(self)
        payload["analytic_equal"] = self.analytic_equal
        payload["passed"] = self.passed
        return payload


@dataclass
class ShotTotals:
    """Running aggregate of a block of shots; blocks merge with `+`."""
    shots: int = 0
    counts: tp.Dict[str, int] = field(default_factory=dict)
    branch_counts: tp.Dict[str, int] = field(default_factory=dict)
    samples: tp.Dict[str, tp.List[float]] = field(default_factory=dict)
    ledger: tp.Tuple[int, int, int] = (0, 0, 0)
    locality_failures: int = 0
    first_transcript: tp.Optional[str] = None

    def add(self, shot: ShotResult, ledger: tp.Tuple[int, int, int], local: bool):
        self.shots += 1
        self.counts[shot.label] = self.counts.get(shot.label, 0) + 1
        key = f"{shot.branch}:{shot.label}"
        self.branch_counts[key] = self.branch_counts.get(key, 0) + 1
        for name, value in shot.values.items():
            self.samples.setdefault(name, []).append(value)
        self.ledger = tuple(a + b for a, b in zip(self.ledger, ledger))
        self.locality_failures += 0 if local else 1

    def __add__(self, other: "ShotTotals") -> "ShotTotals":
        merged = ShotTotals(
            shots=self.shots + other.shots,
            ledger=tuple(a + b for a, b in zip(self.ledger, other.ledger)),
            locality_failures=self.locality_failures + other.locality_failures,
            first_transcript=self.first_transcript or other.first_transcript,
        )
        for target, left, right in [
            (merged.counts, self.counts, other.counts),
            (merged.branch_counts, self.branch_counts, other.branch_counts),
        ]:
            for key in sorted(set(left) | set(right)):
                target[key] = left.get(key, 0) + right.get(key, 0)
        for key in sorted(set(self.samples) | set(other.samples)):
            merged.samples[key] = self.samples.get(key, []) + other.samples.get(key, [])
        return merged

    def branch_count(self, branch: int, label: str) -> int:
        return self.branch_counts.get(f"{branch}:{label}", 0)

    def mean(self, name: str) -> float:
        # fsum is exactly rounded, so the mean does not depend on how shots were chunked
        values = self.samples.get(name, [])
        return math.fsum(values) / len(values) if values else float("nan")

    def minimum(self, name: str) -> float:
        values = self.samples.get(name, [])
        return min(values) if values else float("nan")
