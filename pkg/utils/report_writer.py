import io
import json
import logging
import sys
import typing as tp

import pandas as pd

from .dataclasses import BranchComparison, FrequencyReport

logger = logging.getLogger(__name__)

FORMATS = ("text", "structured", "csv")
CSV_COLUMNS = [
    "protocol", "seed", "shots", "label", "count", "frequency",
    "probability", "std_error", "z_score", "passed",
]


def _format_float(value: float) -> str:
    return f"{value:.6g}"


def _status(passed: bool) -> str:
    return "PASS" if passed else "FAIL"


def format_text(report: FrequencyReport) -> str:
    """Human-readable report: header, outcome table, ledger, metrics and checks."""
    lines = [
        f"protocol: {report.protocol}",
        f"seed: {report.seed}",
        f"shots: {report.shots}",
        f"tolerance: {_format_float(report.tolerance_sigma)} sigma",
        f"parameters: {json.dumps(report.parameters, sort_keys=True)}",
        "",
    ]
    table = pd.DataFrame(
        [{
            "label": row.label,
            "count": row.count,
            "frequency": row.frequency,
            "probability": row.probability,
            "std_error": row.std_error,
            "z_score": row.z_score,
            "passed": _status(row.passed),
        } for row in report.outcomes]
    )
    lines.append(table.to_string(index=False, float_format=_format_float))
    lines.append("")
    ledger = report.ledger
    lines.append(
        f"ledger per run: {ledger['ebits']} ebit, {ledger['cbits_alice_to_bob']} cbit Alice->Bob, "
        f"{ledger['cbits_bob_to_alice']} cbit Bob->Alice"
    )
    for name in sorted(report.metrics):
        value = report.metrics[name]
        shown = _format_float(value) if isinstance(value, float) else value
        lines.append(f"metric {name}: {shown}")
    for name in sorted(report.checks):
        lines.append(f"check {name}: {_status(report.checks[name])}")
    for name in sorted(report.literature):
        lines.append(f"literature {name}: {report.literature[name]} (cited, not simulated)")
    lines.append(f"result: {_status(report.passed)}")
    return "\n".join(lines) + "\n"


def format_structured(report: tp.Union[FrequencyReport, BranchComparison]) -> str:
    return json.dumps(report.to_dict(), sort_keys=True, indent=2) + "\n"


def format_csv(report: FrequencyReport) -> str:
    """One row per outcome."""
    frame = pd.DataFrame(
        [{
            "protocol": report.protocol,
            "seed": report.seed,
            "shots": report.shots,
            "label": row.label,
            "count": row.count,
            "frequency": row.frequency,
            "probability": row.probability,
            "std_error": row.std_error,
            "z_score": row.z_score,
            "passed": row.passed,
        } for row in report.outcomes],
        columns=CSV_COLUMNS,
    )
    buffer = io.StringIO()
    frame.to_csv(buffer, index=False, lineterminator="\n")
    return buffer.getvalue()


def comparison_frame(comparison: BranchComparison) -> pd.DataFrame:
    return pd.DataFrame({
        "label": comparison.labels,
        "analytic_complement": comparison.analytic_complement,
        "analytic_target": comparison.analytic_target,
        "empirical_complement": comparison.empirical_complement,
        "empirical_target": comparison.empirical_target,
        "z_score": comparison.z_scores,
    })


def format_comparison(comparison: BranchComparison, fmt: str) -> str:
    if fmt == "structured":
        return format_structured(comparison)
    frame = comparison_frame(comparison)
    if fmt == "csv":
        frame.insert(0, "protocol", comparison.protocol)
        buffer = io.StringIO()
        frame.to_csv(buffer, index=False, lineterminator="\n")
        return buffer.getvalue()
    lines = [
        f"protocol: {comparison.protocol} (branch comparison)",
        f"seed: {comparison.seed}",
        f"shots per branch: {comparison.shots_per_branch}",
        f"tolerance: {_format_float(comparison.tolerance_sigma)} sigma",
        "",
        frame.to_string(index=False, float_format=_format_float),
        "",
        f"analytic max deviation: {comparison.analytic_max_deviation!r}",
        f"analytic equal: {_status(comparison.analytic_equal)}",
        f"result: {_status(comparison.passed)}",
    ]
    return "\n".join(lines) + "\n"


def render_report(report: FrequencyReport, fmt: str) -> str:
    if fmt == "text":
        return format_text(report)
    elif fmt == "structured":
        return format_structured(report)
    elif fmt == "csv":
        return format_csv(report)
    else:
        raise ValueError(f"Unknown report format: {fmt}")


def render_table(frame: pd.DataFrame, fmt: str) -> str:
    """Tables that have no per-outcome rows (resource summary, identity checks)."""
    if fmt == "structured":
        return json.dumps(frame.to_dict(orient="records"), sort_keys=True, indent=2) + "\n"
    if fmt == "csv":
        buffer = io.StringIO()
        frame.to_csv(buffer, index=False, lineterminator="\n")
        return buffer.getvalue()
    return frame.to_string(index=False, float_format=_format_float) + "\n"


def read_structured(text: str) -> FrequencyReport:
    """Parse a report written by `format_structured`."""
    return FrequencyReport.from_dict(json.loads(text))


def save_report(text: str, output_path: tp.Optional[str] = None) -> tp.Optional[str]:
    """Write to `output_path`, or to stdout when it is None."""
    if output_path is None:
        sys.stdout.write(text)
        sys.stdout.flush()
        return None
    with open(output_path, "w", encoding="utf-8") as output_file:
        output_file.write(text)
    logger.info("report written to %s", output_path)
    return output_path
