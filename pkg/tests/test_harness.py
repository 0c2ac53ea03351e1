import math
from concurrent.futures import CancelledError

import pytest

from backends import get_experiment_backend
from backends.experiments.joint_backend import JointStrategy
from core import qmath
from core.errors import DomainError
from core.harness import compare_branches, resource_summary, run_experiment
from core.qmath import PoincareVector, PureQubit
from protocols.joint import singlet_projector
from protocols.rsm import trine_povm
from protocols.rsp import EnsembleKind
from utils.dataclasses import ExperimentSpec, ProtocolName
from utils.executor import InlinePoolExecutor, get_pool, split_range
from utils.report_writer import format_structured, read_structured

Z = PoincareVector(0.0, 0.0, 1.0)
EQUATORIAL = PureQubit(1 / math.sqrt(2), 1j / math.sqrt(2))
GENERIC = PureQubit(0.6, 0.8 * complex(math.cos(0.7), math.sin(0.7)))


def _spec(protocol, shots=2000, seed=7, **parameters):
    return ExperimentSpec(protocol, parameters, shots=shots, seed=seed)


def test_spec_validation():
    with pytest.raises(ValueError, match="shots"):
        ExperimentSpec(ProtocolName.RSP, {}, shots=0)
    with pytest.raises(ValueError, match="tolerance_sigma"):
        ExperimentSpec(ProtocolName.RSP, {}, tolerance_sigma=0.0)
    with pytest.raises(ValueError):
        ExperimentSpec("bogus", {})


def test_unknown_backend():
    with pytest.raises(ValueError, match="Unknown experiment"):
        get_experiment_backend("superdense")


def test_split_range_covers_everything():
    chunks = list(split_range(10, 3))
    assert chunks == [(0, 4), (4, 7), (7, 10)]
    assert list(split_range(2, 8)) == [(0, 1), (1, 2)]


def test_inline_pool_runs_on_result_and_cancels_on_shutdown():
    calls = []
    with get_pool(0) as pool:
        assert isinstance(pool, InlinePoolExecutor)
        future = pool.submit(calls.append, 1)
        assert calls == []
        future.result()
        assert calls == [1]
        pending = pool.submit(calls.append, 2)
    with pytest.raises(CancelledError):
        pending.result()
    assert calls == [1]
    with pytest.raises(ValueError, match="jobs"):
        get_pool(-1)


def test_equatorial_rsp_is_exact():
    report = run_experiment(_spec(ProtocolName.RSP, target=EQUATORIAL, kind=EnsembleKind.EQUATORIAL))
    assert report.passed
    assert report.metrics["fidelity_min"] > 1 - 1e-9
    assert report.ledger == {"ebits": 1, "cbits_alice_to_bob": 1, "cbits_bob_to_alice": 0}
    assert report.metrics["total_ebits"] == 2000
    assert sum(row.frequency for row in report.outcomes) == pytest.approx(1.0)
    assert all(row.probability == 0.5 for row in report.outcomes)
    assert report.transcript.startswith("# seed=")


def test_arbitrary_rsp_fidelity_is_one_half():
    report = run_experiment(_spec(ProtocolName.RSP, shots=4000, target=GENERIC, kind=EnsembleKind.ARBITRARY))
    assert report.passed
    assert abs(report.metrics["fidelity_z"]) <= 4
    assert report.checks["fidelity_half"]


def test_projective_rsm_along_target_is_deterministic():
    report = run_experiment(_spec(ProtocolName.RSM_PROJECTIVE, shots=500, target=Z, b=Z))
    rows = {row.label: row for row in report.outcomes}
    assert rows["+"].count == 500 and rows["-"].count == 0
    assert rows["+"].z_score == 0.0
    assert report.passed
    assert report.checks["branch_analytic_equal"]


def test_povm_rsm_report():
    report = run_experiment(_spec(ProtocolName.RSM_POVM, target=GENERIC, povm=trine_povm()))
    assert report.passed
    assert [row.label for row in report.outcomes] == ["f0", "f1", "f2"]
    assert report.literature["quantum_povm_saving_bits"] == 5.38


def test_joint_singlet_projector_discrepancy():
    report = run_experiment(_spec(ProtocolName.JOINT, target=Z, pi=singlet_projector(), m=Z))
    assert report.metrics["probability_target_branch"] == pytest.approx(0.0, abs=1e-12)
    assert report.metrics["probability_complement_branch"] == pytest.approx(0.5, abs=1e-12)
    assert report.metrics["discrepancy"] == pytest.approx(0.5, abs=1e-12)
    assert report.metrics["sign_flip_min_discrepancy"] == pytest.approx(0.5, abs=1e-12)
    assert report.passed


def test_joint_exact_strategy_equalizes():
    report = run_experiment(_spec(ProtocolName.JOINT, target=GENERIC, pi=singlet_projector(),
                                  m=PoincareVector(1.0, 0.0, 0.0), strategy=JointStrategy.EXACT))
    assert report.checks["equalized"]
    assert report.metrics["discrepancy"] < 1e-12
    assert report.checks["locality"]
    assert report.passed


def test_teleport_report():
    report = run_experiment(_spec(ProtocolName.TELEPORT, shots=1000, target=GENERIC))
    assert report.passed
    assert report.ledger["cbits_alice_to_bob"] == 2
    assert report.checks["ledger_exact"]
    assert report.metrics["fidelity_min"] > 1 - 1e-9


def test_nogo_report():
    report = run_experiment(_spec(ProtocolName.NOGO, shots=1000, target=GENERIC))
    assert report.passed
    assert report.metrics["choi_min_eigenvalue"] == pytest.approx(-1.0, abs=1e-12)
    assert report.metrics["choi_min_eigenvalue_normalized"] == pytest.approx(-0.5, abs=1e-12)


def test_reports_are_reproducible():
    spec = _spec(ProtocolName.RSP, shots=300, target=GENERIC, kind=EnsembleKind.ARBITRARY)
    assert format_structured(run_experiment(spec)) == format_structured(run_experiment(spec))


def test_reports_do_not_depend_on_worker_count():
    serial = _spec(ProtocolName.RSM_POVM, shots=200, target=GENERIC, povm=trine_povm())
    parallel = ExperimentSpec(serial.protocol, serial.parameters, shots=200, seed=serial.seed, jobs=2)
    assert format_structured(run_experiment(serial)) == format_structured(run_experiment(parallel))


def test_structured_report_round_trips():
    report = run_experiment(_spec(ProtocolName.TELEPORT, shots=200, target=GENERIC))
    text = format_structured(report)
    assert format_structured(read_structured(text)) == text


def test_compare_branches_projective_grid():
    for n in (Z, PoincareVector.from_angles(1.1, 0.4)):
        for b in (Z, PoincareVector.from_angles(2.0, 3.0)):
            comparison = compare_branches(_spec(ProtocolName.RSM_PROJECTIVE, shots=1000, target=n, b=b))
            assert comparison.analytic_equal
            assert comparison.passed


def test_compare_branches_trine():
    n = PoincareVector.from_array(trine_povm().elements[0].array * 1.5)
    comparison = compare_branches(_spec(ProtocolName.RSM_POVM, shots=2000, target=n, povm=trine_povm()))
    assert comparison.analytic_complement == pytest.approx([2 / 3, 1 / 6, 1 / 6], abs=1e-12)
    assert comparison.analytic_complement == comparison.analytic_target
    assert comparison.passed


def test_compare_branches_rejects_mixed_target():
    with pytest.raises(DomainError, match="pure state"):
        compare_branches(_spec(ProtocolName.RSM_PROJECTIVE, target=PoincareVector(0.0, 0.0, 0.0), b=Z))


def test_compare_branches_needs_remote_measurement():
    with pytest.raises(DomainError, match="remote-measurement"):
        compare_branches(_spec(ProtocolName.TELEPORT, target=GENERIC))


def test_resource_summary():
    reports = [
        run_experiment(_spec(ProtocolName.RSP, shots=100, target=EQUATORIAL, kind=EnsembleKind.EQUATORIAL)),
        run_experiment(_spec(ProtocolName.TELEPORT, shots=100, target=GENERIC)),
        run_experiment(_spec(ProtocolName.RSM_POVM, shots=100, target=GENERIC, povm=trine_povm())),
    ]
    table = resource_summary(reports).set_index("protocol")
    assert tuple(table.loc["rsp", ["ebits", "cbits_forward", "cbits_backward"]]) == (1, 1, 0)
    assert tuple(table.loc["teleport", ["ebits", "cbits_forward", "cbits_backward"]]) == (1, 2, 0)
    assert table.loc["rsm-povm", "note"] == "saves 5.38 bits vs cited classical protocol"
    assert table.loc["classical rsm (projective)", "cbits_forward"] == 2.19
    assert table.loc["classical rsm (povm)", "note"] == "cited, not simulated"
    assert table.loc["classical description", "cbits_forward"] == "unbounded"


def test_resource_summary_needs_reports():
    with pytest.raises(DomainError):
        resource_summary([])


def test_analytic_crosscheck_recorded():
    report = run_experiment(_spec(ProtocolName.RSM_PROJECTIVE, shots=100, target=GENERIC,
                                  b=PoincareVector.from_angles(0.3, 0.2)))
    assert report.metrics["analytic_max_difference"] <= qmath.ATOL
    for row in report.outcomes:
        assert row.probability == pytest.approx(row.probability_matrix, abs=1e-12)
