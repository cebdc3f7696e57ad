"""Command-line surface: exit codes, artifacts, config merging.

Subcommands print a human summary on stdout; the machine-readable CSV or
JSON artifact only exists when --out is given, so these tests route
everything through tmp_path files.
"""

import csv
import io
import json
import math

import pytest

from intergrow.cli import DecayFit, fit_decay, main

EXPSUM_COLS = ["N", "re", "im", "modulus_over_N", "precision_bits", "wall_ms"]


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def read_csv(path):
    return list(csv.DictReader(io.StringIO(path.read_text())))


def last_stderr_json(err: str) -> dict:
    return json.loads(err.strip().splitlines()[-1])


@pytest.fixture(autouse=True)
def clean_env(monkeypatch):
    monkeypatch.delenv("INTERGROW_PRECISION_OVERRIDE", raising=False)


def test_expsum_csv_columns(tmp_path, capsys):
    out = tmp_path / "sums.csv"
    code, text, _ = run_cli(
        capsys,
        "expsum", "--kind", "smooth", "--c", "0.3",
        "--alphas", "1,-1", "--shifts", "1,0", "--N", "2000",
        "--out", str(out),
    )
    assert code == 0
    assert "|S(2000)|/N" in text
    rows = read_csv(out)
    assert list(rows[0].keys()) == EXPSUM_COLS
    assert rows[-1]["N"] == "2000"
    assert 0.0 <= float(rows[-1]["modulus_over_N"]) <= 1.0


def test_expsum_dyadic_checkpoints(tmp_path, capsys):
    out = tmp_path / "sums.csv"
    code, _, _ = run_cli(
        capsys,
        "expsum", "--kind", "floor", "--c", "0.3",
        "--alphas", "sqrt2-1", "--shifts", "0", "--dyadic", "8..11",
        "--out", str(out),
    )
    assert code == 0
    assert [r["N"] for r in read_csv(out)] == ["256", "512", "1024", "2048"]


def test_expsum_json_embeds_config(tmp_path, capsys):
    target = tmp_path / "sums.json"
    code, _, _ = run_cli(
        capsys,
        "expsum", "--kind", "smooth", "--c", "0.3",
        "--alphas", "1", "--shifts", "0", "--N", "500",
        "--out", str(target), "--format", "json",
    )
    assert code == 0
    doc = json.loads(target.read_text())
    assert doc["command"] == "expsum"
    assert doc["rows"][-1]["N"] == 500
    assert doc["config"]["kind"] == "smooth"
    assert doc["config"]["c"] == 0.3


def test_weyl_threshold_failure_exits_2(capsys):
    code, out, _ = run_cli(
        capsys,
        "weyl", "--c", "0.3", "--shifts", "0", "--kvec", "1",
        "--N", "4096", "--threshold", "1e-9",
    )
    assert code == 2
    assert "FAILED" in out


def test_weyl_passes_generous_threshold(tmp_path, capsys):
    out = tmp_path / "weyl.csv"
    code, text, _ = run_cli(
        capsys,
        "weyl", "--c", "0.3", "--shifts", "0,1", "--kvec", "1,-1",
        "--N", "4096", "--threshold", "0.5", "--out", str(out),
    )
    assert code == 0
    assert "worst |S|/N" in text
    assert list(read_csv(out)[0].keys()) == EXPSUM_COLS


def test_weyl_floor_mode_needs_alpha(capsys):
    code, _, err = run_cli(
        capsys,
        "weyl", "--c", "0.3", "--shifts", "0", "--kvec", "1",
        "--N", "100", "--floor",
    )
    assert code == 1
    assert last_stderr_json(err)["command"] == "weyl"


def test_goodness_columns_and_exit(tmp_path, capsys):
    out = tmp_path / "scan.csv"
    code, text, _ = run_cli(
        capsys,
        "goodness", "--c", "0.3", "--alphas", "1", "--shifts", "0",
        "--N", "400", "--count", "3", "--out", str(out),
    )
    assert code == 0
    assert "flagged 0" in text
    rows = read_csv(out)
    assert list(rows[0].keys())[:6] == EXPSUM_COLS
    assert {"alpha_log2", "negative", "flagged", "error"} <= set(rows[0].keys())
    assert len(rows) == 6  # 3 magnitudes, both signs


def test_goodness_tiny_threshold_flags_everything(capsys):
    code, text, _ = run_cli(
        capsys,
        "goodness", "--c", "0.3", "--alphas", "1", "--shifts", "0",
        "--N", "400", "--count", "2", "--threshold", "1e-12",
    )
    assert code == 2
    assert "flagged 4" in text


def test_equi_zero_kind_exits_2_with_dstar_rows(tmp_path, capsys):
    out = tmp_path / "equi.csv"
    code, text, _ = run_cli(
        capsys, "equi", "--kind", "zero", "--N", "500", "--K", "1",
        "--out", str(out),
    )
    assert code == 2
    assert "FAILED" in text
    rows = read_csv(out)
    assert list(rows[0].keys()) == ["N", "Dstar"]
    assert float(rows[0]["Dstar"]) == pytest.approx(1.0)


def test_equi_floor_passes_and_writes_histograms(tmp_path, capsys):
    hist_path = tmp_path / "hist.csv"
    code, text, _ = run_cli(
        capsys,
        "equi", "--kind", "floor", "--c", "0.3", "--alpha", "sqrt2-1",
        "--shifts", "0", "--N", "3000", "--K", "2",
        "--weyl-threshold", "0.3", "--disc-threshold", "0.3",
        "--moduli", "2,5", "--res-tolerance", "0.2",
        "--hist-out", str(hist_path),
    )
    assert code == 0
    assert "passed" in text
    hrows = read_csv(hist_path)
    assert list(hrows[0].keys()) == ["q", "residue", "count", "freq"]
    totals: dict = {}
    for r in hrows:
        totals[r["q"]] = totals.get(r["q"], 0) + int(r["count"])
    assert totals == {"2": 3000, "5": 3000}


def test_decompose_reports_difference_coefficients(tmp_path, capsys):
    out = tmp_path / "poly.json"
    code, text, _ = run_cli(
        capsys,
        "decompose", "--alphas", "1,-2,1", "--shifts", "2,1,0",
        "--out", str(out), "--format", "json",
    )
    assert code == 0
    assert "tau=2" in text
    doc = json.loads(out.read_text())
    assert doc["coeffs"] == ["0", "0", "1"]
    assert doc["exact"] is True
    assert doc["shift_offset"] == 0


def test_decompose_check_x_residual(tmp_path, capsys):
    out = tmp_path / "poly.json"
    code, text, _ = run_cli(
        capsys,
        "decompose", "--alphas", "1,-3,3", "--shifts", "2,1,0",
        "--c", "0.3", "--check-x", "1000",
        "--out", str(out), "--format", "json",
    )
    assert code == 0
    assert "identity residual" in text
    doc = json.loads(out.read_text())
    assert float(doc["identity_residual"]) < 1e-20


def test_certify_all_passes_at_small_scale(tmp_path, capsys):
    out = tmp_path / "certs.json"
    code, text, _ = run_cli(
        capsys,
        "certify", "--c", "0.3", "--N", "10000", "--s-max", "2",
        "--grid", "32", "--lemma", "all",
        "--alphas", "1,-3,3", "--shifts", "2,1,0",
        "--out", str(out), "--format", "json",
    )
    assert code == 0
    doc = json.loads(out.read_text())
    names = {c["lemma_id"] for c in doc["certificates"]}
    assert names == {"G_lower", "G_upper", "F_lower", "F_upper", "sandwich_delta"}
    assert all(c["passed"] for c in doc["certificates"])
    assert text.count("passed") == 5


def test_certify_combination_without_alphas_is_an_error(capsys):
    code, _, err = run_cli(
        capsys, "certify", "--c", "0.3", "--N", "1000", "--lemma", "combination"
    )
    assert code == 1
    assert "--alphas" in last_stderr_json(err)["error"]


def test_fingerprint_rejects_rotation_with_exit_2(tmp_path, capsys):
    out = tmp_path / "tensor.json"
    code, text, _ = run_cli(
        capsys,
        "fingerprint", "--seq", "rotation", "--alpha", "sqrt2-1",
        "--H", "1", "--E", "1", "--N", "8192", "--threshold", "0.2",
        "--out", str(out), "--format", "json",
    )
    assert code == 2
    assert "REJECTED" in text
    doc = json.loads(out.read_text())
    assert doc["max_modulus"] > 0.99
    assert doc["consistent_with_bernoulli"] is False
    assert all({"shifts", "exponents", "re", "im", "modulus"} <= set(r) for r in doc["rows"])


def test_fingerprint_smooth_passes(capsys):
    code, text, _ = run_cli(
        capsys,
        "fingerprint", "--seq", "smooth", "--c", "0.3",
        "--H", "1", "--E", "1", "--N", "16384", "--threshold", "0.2",
        "--no-stability",
    )
    assert code == 0
    assert "consistent" in text


def test_vn_invariant_character_is_zero(tmp_path, capsys):
    out = tmp_path / "vn.csv"
    code, _, _ = run_cli(
        capsys,
        "vn", "--betas", "1/2", "--kvec", "2", "--shifts", "0",
        "--c", "0.3", "--N", "2048", "--threshold", "1e-15",
        "--out", str(out),
    )
    assert code == 0
    rows = read_csv(out)
    assert list(rows[0].keys()) == ["N", "norm_or_modulus"]
    assert [r["N"] for r in rows] == ["1024", "2048"]
    assert all(float(r["norm_or_modulus"]) == 0.0 for r in rows)


def test_vn_moving_character_misses_tiny_threshold(capsys):
    code, out, _ = run_cli(
        capsys,
        "vn", "--betas", "sqrt2-1", "--kvec", "1", "--shifts", "0",
        "--c", "0.3", "--N", "4096", "--threshold", "1e-12",
    )
    assert code == 2
    assert "FAILED" in out


def test_zeroentropy_rotation_runs(tmp_path, capsys):
    out = tmp_path / "ze.csv"
    code, text, _ = run_cli(
        capsys,
        "zeroentropy", "--system", "rotation", "--betas", "sqrt2-1",
        "--kvec", "1", "--x0", "0", "--seq", "smooth", "--c", "0.3",
        "--N", "2048", "--out", str(out),
    )
    assert code == 0
    assert "modulus" in text
    assert list(read_csv(out)[0].keys()) == ["N", "norm_or_modulus"]


def test_skewdemo_space_average_vanishes(tmp_path, capsys):
    out = tmp_path / "skew.json"
    code, _, _ = run_cli(
        capsys,
        "skewdemo", "--alpha", "sqrt2", "--freq", "1", "--shifts", "0",
        "--N", "4096", "--out", str(out), "--format", "json",
    )
    assert code == 0
    doc = json.loads(out.read_text())
    assert doc["space_re"] == 0.0
    assert doc["space_im"] == 0.0
    assert doc["deviation"] < 0.1


def test_config_file_merge_flags_win(tmp_path, capsys):
    cfg = tmp_path / "run.json"
    cfg.write_text(
        json.dumps({"kind": "smooth", "c": 0.3, "alphas": "1", "shifts": "0", "N": 100})
    )
    code, text, _ = run_cli(capsys, "expsum", "--config", str(cfg), "--N", "200")
    assert code == 0
    assert "|S(200)|/N" in text


def test_config_file_unknown_key_rejected(tmp_path, capsys):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"kind": "smooth", "c": 0.3, "N": 100, "turbo": True}))
    code, _, err = run_cli(capsys, "expsum", "--config", str(cfg))
    assert code == 1
    assert "turbo" in last_stderr_json(err)["error"]


def test_env_precision_override_warns_and_applies(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("INTERGROW_PRECISION_OVERRIDE", "256")
    out = tmp_path / "sums.csv"
    code, _, err = run_cli(
        capsys,
        "expsum", "--kind", "smooth", "--c", "0.3",
        "--alphas", "1", "--shifts", "0", "--N", "300",
        "--precision", "128", "--out", str(out),
    )
    assert code == 0
    assert "INTERGROW_PRECISION_OVERRIDE" in err
    assert read_csv(out)[-1]["precision_bits"] == "256"


def test_bad_growth_exponent_is_machine_readable(capsys):
    code, _, err = run_cli(
        capsys,
        "expsum", "--kind", "smooth", "--c", "0.6",
        "--alphas", "1", "--shifts", "0", "--N", "100",
    )
    assert code == 1
    payload = last_stderr_json(err)
    assert payload["type"] == "ValueError"
    assert "0 < c < 1/2" in payload["error"]


def test_atomic_write_leaves_no_temp_files(tmp_path, capsys):
    target = tmp_path / "out.csv"
    code, _, _ = run_cli(
        capsys,
        "expsum", "--kind", "smooth", "--c", "0.3",
        "--alphas", "1", "--shifts", "0", "--N", "200",
        "--out", str(target),
    )
    assert code == 0
    assert [p.name for p in tmp_path.iterdir()] == ["out.csv"]


def test_csv_output_is_byte_stable_across_threads(tmp_path, capsys):
    out1 = tmp_path / "a.csv"
    out2 = tmp_path / "b.csv"
    base = [
        "expsum", "--kind", "floor", "--c", "0.3", "--alphas", "sqrt2-1",
        "--shifts", "0", "--N", "20000",
    ]
    assert main(base + ["--out", str(out1), "--threads", "1"]) == 0
    assert main(base + ["--out", str(out2), "--threads", "4"]) == 0
    capsys.readouterr()
    for ra, rb in zip(read_csv(out1), read_csv(out2)):
        for col in ("N", "re", "im", "modulus_over_N", "precision_bits"):
            assert ra[col] == rb[col]


def test_fit_decay_recovers_planted_exponent():
    c = 0.3
    kappa = 0.5
    series = [
        (n, math.exp(-kappa * math.log(n) ** (1 - 2 * c)))
        for n in [2**k for k in range(8, 20)]
    ]
    fit = fit_decay(series, c)
    assert isinstance(fit, DecayFit)
    assert fit.kappa_hat == pytest.approx(kappa, abs=1e-12)
    assert fit.residual < 1e-12
    assert fit.points_used == len(series)


def test_fit_decay_constant_series_has_zero_slope():
    series = [(2**k, 0.25) for k in range(8, 16)]
    fit = fit_decay(series, 0.3)
    assert abs(fit.kappa_hat) < 1e-12


def test_fit_decay_needs_four_points():
    with pytest.raises(ValueError):
        fit_decay([(10, 0.1), (20, 0.05), (40, 0.02)], 0.3)


def test_fit_decay_drops_nonpositive_with_warning(capsys):
    series = [(2**k, 0.5 / k) for k in range(8, 16)] + [(2**20, 0.0)]
    fit = fit_decay(series, 0.3)
    err = capsys.readouterr().err
    assert fit.dropped == 1
    assert "dropped" in err


def test_fitdecay_command_roundtrip(tmp_path, capsys):
    rows = "\n".join(
        ["N,norm_or_modulus"]
        + [
            f"{2**k},{math.exp(-0.4 * math.log(2**k) ** 0.4):.17g}"
            for k in range(8, 20)
        ]
    )
    path = tmp_path / "curve.csv"
    path.write_text(rows + "\n")
    out = tmp_path / "fit.json"
    code, text, _ = run_cli(
        capsys,
        "fitdecay", "--c", "0.3", "--in", str(path),
        "--out", str(out), "--format", "json",
    )
    assert code == 0
    assert "kappa_hat" in text
    doc = json.loads(out.read_text())
    assert doc["kappa_hat"] == pytest.approx(0.4, abs=1e-10)
    assert doc["model_exponent"] == pytest.approx(0.4)


def test_fitdecay_inline_series(capsys):
    pts = ",".join(
        f"{2**k}:{math.exp(-0.4 * math.log(2**k) ** 0.4):.17g}" for k in range(8, 14)
    )
    code, text, _ = run_cli(capsys, "fitdecay", "--c", "0.3", "--series", pts)
    assert code == 0
    assert "kappa_hat = 0.4" in text
