import pytest

from cli import SEED_ENV, main
from utils.report_writer import CSV_COLUMNS, read_structured

EQUATORIAL = ["rsp", "--kind", "equatorial", "--phi", "1.5707963267948966", "--shots", "500"]


def test_equatorial_rsp_passes(capsys):
    assert main(EQUATORIAL) == 0
    out = capsys.readouterr().out
    assert "protocol: rsp" in out
    assert "check fidelity_exact: PASS" in out
    assert out.rstrip().endswith("result: PASS")


def test_equatorial_rejects_amplitudes(capsys):
    assert main(["rsp", "--kind", "equatorial", "--alpha", "0.9", "--phi", "0.3"]) == 2
    assert "--alpha" in capsys.readouterr().err


def test_phi_alone_needs_equatorial_kind(capsys):
    assert main(["rsp", "--phi", "0.3"]) == 2
    assert "--phi" in capsys.readouterr().err


def test_polar_rejects_complex_beta(capsys):
    assert main(["rsp", "--kind", "polar", "--alpha", "0.6", "--beta=0.8j"]) == 2
    assert "--beta" in capsys.readouterr().err


def test_state_is_required(capsys):
    assert main(["teleport", "--shots", "10"]) == 2
    assert "target state is required" in capsys.readouterr().err


def test_unknown_flag_is_a_usage_error(capsys):
    assert main(["rsp", "--bogus"]) == 2


def test_negative_seed_is_a_usage_error(capsys):
    assert main(EQUATORIAL + ["--seed", "-1"]) == 2
    assert "--seed" in capsys.readouterr().err


def test_identities(capsys):
    assert main(["identities", "--trials", "100", "--seed", "1"]) == 0
    out = capsys.readouterr().out
    assert "choi_negativity" in out
    assert "min_eigenvalue=-1" in out


def test_structured_output_is_reproducible(capsys):
    args = ["teleport", "--theta", "1.2", "--phi", "0.4", "--shots", "300", "--seed", "9",
            "--format", "structured"]
    assert main(args) == 0
    first = capsys.readouterr().out
    assert main(args) == 0
    assert capsys.readouterr().out == first
    report = read_structured(first)
    assert report.protocol == "teleport"
    assert report.seed == 9
    assert report.ledger["cbits_alice_to_bob"] == 2


def test_seed_from_environment(capsys, monkeypatch):
    monkeypatch.setenv(SEED_ENV, "42")
    assert main(EQUATORIAL + ["--format", "structured"]) == 0
    assert read_structured(capsys.readouterr().out).seed == 42


def test_bad_seed_in_environment(capsys, monkeypatch):
    monkeypatch.setenv(SEED_ENV, "abc")
    assert main(EQUATORIAL) == 2
    assert SEED_ENV in capsys.readouterr().err


def test_csv_header(capsys):
    assert main(EQUATORIAL + ["--format", "csv"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS)
    assert len(lines) == 3


def test_transcript_inline(capsys):
    assert main(EQUATORIAL + ["--seed", "3", "--transcript"]) == 0
    out = capsys.readouterr().out
    assert "# seed=" in out


def test_transcript_beside_structured_output(tmp_path, capsys):
    output = tmp_path / "report.json"
    assert main(EQUATORIAL + ["--format", "structured", "--transcript", "--output", str(output)]) == 0
    assert capsys.readouterr().out == ""
    assert read_structured(output.read_text(encoding="utf-8")).protocol == "rsp"
    transcript = (tmp_path / "report.json.transcript.txt").read_text(encoding="utf-8")
    assert transcript.startswith("# seed=")


def test_rsm_compare_trine(capsys):
    assert main(["rsm", "--mode", "povm", "--povm", "trine", "--theta", "0.8", "--phi", "0.2",
                 "--compare", "--shots", "1000"]) == 0
    out = capsys.readouterr().out
    assert "branch comparison" in out
    assert "analytic equal: PASS" in out


def test_rsm_projective_needs_b(capsys):
    assert main(["rsm", "--theta", "0.8"]) == 2
    assert "--b" in capsys.readouterr().err


def test_compare_only_for_rsm(capsys):
    assert main(EQUATORIAL + ["--compare"]) == 2


def test_joint_preset(capsys):
    assert main(["joint", "--preset", "singlet", "--m", "0,0,1", "--theta", "0", "--shots", "400"]) == 0
    out = capsys.readouterr().out
    assert "metric discrepancy: 0.5" in out


def test_joint_exact_strategy(capsys):
    assert main(["joint", "--preset", "singlet", "--m", "1,0,0", "--theta", "1.1", "--phi", "0.5",
                 "--strategy", "exact", "--shots", "400"]) == 0
    assert "check equalized: PASS" in capsys.readouterr().out


def test_joint_needs_m(capsys):
    assert main(["joint", "--preset", "singlet", "--theta", "0"]) == 2
    assert "--m" in capsys.readouterr().err


def test_report_subcommand(capsys):
    assert main(["report", "--shots", "200"]) == 0
    out = capsys.readouterr().out
    assert "saves 5.38 bits" in out
    assert "classical rsm (projective)" in out
    assert "unbounded" in out


def test_output_file(tmp_path, capsys):
    output = tmp_path / "nogo.txt"
    assert main(["nogo", "--alpha", "0.6", "--beta", "0.8j", "--shots", "200", "--output", str(output)]) == 0
    assert capsys.readouterr().out == ""
    text = output.read_text(encoding="utf-8")
    assert "check choi_not_positive: PASS" in text
    assert "metric choi_min_eigenvalue: -1" in text


@pytest.mark.parametrize("flag, value", [("--shots", "0"), ("--sigma", "0"), ("--jobs", "-1")])
def test_out_of_range_numbers(flag, value, capsys):
    assert main(EQUATORIAL + [flag, value]) == 2
    assert flag in capsys.readouterr().err


def test_unnormalized_beta_names_beta(capsys):
    assert main(["rsp", "--beta=1.2"]) == 2
    err = capsys.readouterr().err
    assert "--beta:" in err
    assert "--alpha:" not in err
