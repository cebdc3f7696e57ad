"""Command-line front end: run one experiment, write one report.

Every subcommand follows the same discipline: resolve the configuration
(JSON config file merged under explicit flags, flags winning), validate,
run the underlying module, then emit a summary line on stdout plus an
optional CSV or JSON artifact written atomically.  JSON reports embed the
resolved configuration so a run can be reproduced from its own output.

Exit codes: 0 success, 2 a requested threshold failed, 1 any error
(reported as one JSON object on stderr).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Sequence

import numpy as np

from .certificates import (
    admissible_s_set,
    certify_combination,
    certify_sandwich,
    certify_single,
    karacuba_params,
)
from .diffcalc import change_of_basis, verify_identity
from .dynamics import (
    ModelSystem,
    ObservableSpec,
    skew_demo,
    vn_average,
    zero_entropy_correlation,
)
from .equidist import EquiConfig, equi_report
from .expsums import (
    SequenceSpec,
    goodness_scan,
    partial_sum,
    weyl_vector_test,
)
from .furstenberg import SequenceId, bernoulli_fingerprint
from .growth import GrowthParams, ShiftedCombination
from .reals import parse_real

PRECISION_ENV = "INTERGROW_PRECISION_OVERRIDE"


# ---- shared plumbing --------------------------------------------------------


def _parse_ints(text: str) -> list[int]:
    return [int(tok) for tok in str(text).split(",") if tok.strip() != ""]


def _parse_reals(text: str) -> list:
    return [parse_real(tok) for tok in str(text).split(",") if tok.strip() != ""]


def _atomic_write(path: str, data: str) -> None:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=target.parent, prefix=target.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(data)
        os.replace(tmp, target)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _csv_text(rows: Sequence[dict]) -> str:
    if not rows:
        return ""
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(rows[0].keys()), lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow(row)
    return buf.getvalue()


def _emit(cfg: dict, doc: dict, rows: Sequence[dict]) -> None:
    """Write the artifact (if requested) in the configured format."""
    out = cfg.get("out")
    fmt = cfg.get("format", "csv")
    if out is None:
        return
    if fmt == "json":
        _atomic_write(out, json.dumps(doc, indent=2, sort_keys=True) + "\n")
    elif fmt == "csv":
        _atomic_write(out, _csv_text(rows))
    else:
        raise ValueError(f"unknown output format {fmt!r}")


def _precision(cfg: dict):
    """Flag value unless the environment override is set (with a warning)."""
    env = os.environ.get(PRECISION_ENV)
    if env is not None:
        print(
            f"warning: {PRECISION_ENV}={env} overrides --precision",
            file=sys.stderr,
        )
        return env if env == "auto" else int(env)
    p = cfg.get("precision", "auto")
    return p if p == "auto" else int(p)


def _merged(args: argparse.Namespace, defaults: dict) -> dict:
    """defaults < JSON config file < explicit flags."""
    explicit = {k: v for k, v in vars(args).items() if k not in ("func", "config")}
    cfg = dict(defaults)
    path = getattr(args, "config", None)
    if path is not None:
        with open(path) as fh:
            loaded = json.load(fh)
        if not isinstance(loaded, dict):
            raise ValueError("config file must hold a JSON object")
        unknown = set(loaded) - set(defaults) - {"command"}
        if unknown:
            raise ValueError(f"config keys {sorted(unknown)} not valid here")
        cfg.update(loaded)
    cfg.update(explicit)
    return cfg


def _dyadic_Ns(cfg: dict) -> list[int]:
    """Checkpoints: either the single N or the dyadic range 2^k1..2^k2."""
    rng = cfg.get("dyadic")
    if rng:
        lo, hi = (int(x) for x in str(rng).split("..", 1))
        if not (1 <= lo <= hi <= 62):
            raise ValueError("dyadic exponents must satisfy 1 <= k1 <= k2 <= 62")
        return [1 << k for k in range(lo, hi + 1)]
    if cfg.get("N") is None:
        raise ValueError("need --N or --dyadic")
    return [int(cfg["N"])]


def _comb_from(cfg: dict) -> ShiftedCombination:
    alphas = _parse_reals(cfg["alphas"])
    shifts = _parse_ints(cfg["shifts"])
    return ShiftedCombination.make(alphas, shifts)


# ---- decay-law fitting ------------------------------------------------------


@dataclass(frozen=True)
class DecayFit:
    """Least-squares fit of ln(modulus) against -log^(1-2c) N."""

    kappa_hat: float
    intercept: float
    residual: float
    model_exponent: float
    points_used: int
    dropped: int

    def summary(self) -> str:
        return (
            f"kappa_hat = {self.kappa_hat:.6g}, intercept {self.intercept:.4g}, "
            f"RMS residual {self.residual:.3e} "
            f"({self.points_used} points, {self.dropped} dropped)"
        )


def fit_decay(series: Sequence[tuple[int, float]], c: float) -> DecayFit:
    """Fit modulus ~ exp(-kappa * log^(1-2c) N) over dyadic checkpoints.

    Nonpositive moduli carry no log information and are dropped with a
    warning; at least 4 usable points are required.
    """
    usable = [(int(n), float(m)) for n, m in series if m > 0]
    dropped = len(list(series)) - len(usable)
    if dropped:
        print(f"warning: dropped {dropped} nonpositive moduli", file=sys.stderr)
    if len(usable) < 4:
        raise ValueError(f"decay fit needs >= 4 positive points, got {len(usable)}")
    expo = 1.0 - 2.0 * float(c)
    xs = np.array([-math.log(n) ** expo for n, _ in usable])
    ys = np.array([math.log(m) for _, m in usable])
    slope, intercept = np.polyfit(xs, ys, 1)
    resid = float(np.sqrt(np.mean((ys - (slope * xs + intercept)) ** 2)))
    return DecayFit(
        kappa_hat=float(slope),
        intercept=float(intercept),
        residual=resid,
        model_exponent=expo,
        points_used=len(usable),
        dropped=dropped,
    )


# ---- subcommands ------------------------------------------------------------

_COMMON_DEFAULTS = {
    "precision": "auto",
    "threads": 1,
    "out": None,
    "format": "csv",
}


def _result_row(N: int, res) -> dict:
    return {
        "N": N,
        "re": res.sum.real,
        "im": res.sum.imag,
        "modulus_over_N": res.normalized,
        "precision_bits": res.precision_bits,
        "wall_ms": res.wall_time_ms,
    }


def _cmd_expsum(args) -> int:
    defaults = dict(
        _COMMON_DEFAULTS,
        kind="smooth", c=None, alphas="1", shifts="0", N=None, dyadic=None,
    )
    cfg = _merged(args, defaults)
    if cfg["c"] is None:
        raise ValueError("expsum needs --c")
    params = GrowthParams(float(cfg["c"]))
    comb = _comb_from(cfg)
    if cfg["kind"] == "smooth":
        spec = SequenceSpec.smooth(params, comb)
    elif cfg["kind"] == "floor":
        spec = SequenceSpec.floor(params, comb)
    else:
        raise ValueError(f"expsum kind must be smooth or floor, not {cfg['kind']!r}")
    prec = _precision(cfg)
    rows = []
    for n in _dyadic_Ns(cfg):
        res = partial_sum(spec, n, precision=prec, threads=int(cfg["threads"]))
        rows.append(_result_row(n, res))
    doc = {"command": "expsum", "config": cfg, "rows": rows}
    _emit(cfg, doc, rows)
    last = rows[-1]
    print(
        f"expsum {spec.describe()}: |S({last['N']})|/N = "
        f"{last['modulus_over_N']:.6g} at {last['precision_bits']} bits"
    )
    return 0


def _cmd_weyl(args) -> int:
    defaults = dict(
        _COMMON_DEFAULTS,
        c=None, shifts="0", kvec="1", N=None, dyadic=None,
        floor=False, alpha=None, threshold=None,
    )
    cfg = _merged(args, defaults)
    if cfg["c"] is None:
        raise ValueError("weyl needs --c")
    params = GrowthParams(float(cfg["c"]))
    shifts = _parse_ints(cfg["shifts"])
    kvec = _parse_ints(cfg["kvec"])
    alpha = parse_real(cfg["alpha"]) if cfg.get("alpha") else None
    prec = _precision(cfg)
    rows = []
    for n in _dyadic_Ns(cfg):
        res = weyl_vector_test(
            params, shifts, kvec, n,
            floor_mode=bool(cfg["floor"]), alpha=alpha,
            precision=prec, threads=int(cfg["threads"]),
        )
        rows.append(_result_row(n, res))
    doc = {"command": "weyl", "config": cfg, "rows": rows}
    _emit(cfg, doc, rows)
    worst = max(r["modulus_over_N"] for r in rows)
    print(f"weyl k={tuple(kvec)} h={tuple(shifts)}: worst |S|/N = {worst:.6g}")
    thresh = cfg.get("threshold")
    if thresh is not None and worst >= float(thresh):
        print(f"threshold {float(thresh):g} FAILED")
        return 2
    return 0


def _cmd_goodness(args) -> int:
    defaults = dict(
        _COMMON_DEFAULTS,
        c=None, alphas="1", shifts="0", N=None, gamma=0.5,
        big_exp=1.0, count=9, threshold=None, positive_only=False,
    )
    cfg = _merged(args, defaults)
    if cfg["c"] is None or cfg["N"] is None:
        raise ValueError("goodness needs --c and --N")
    params = GrowthParams(float(cfg["c"]))
    comb = _comb_from(cfg)
    scan = goodness_scan(
        params, comb, int(cfg["N"]),
        gamma=float(cfg["gamma"]), big_exp=float(cfg["big_exp"]),
        count=int(cfg["count"]),
        include_negative=not cfg["positive_only"],
        threshold=None if cfg["threshold"] is None else float(cfg["threshold"]),
        precision=_precision(cfg), threads=int(cfg["threads"]),
    )
    rows = []
    for e in scan.entries:
        res = e.result
        rows.append(
            {
                "N": scan.N,
                "re": "" if res is None else res.sum.real,
                "im": "" if res is None else res.sum.imag,
                "modulus_over_N": "" if res is None else res.normalized,
                "precision_bits": "" if res is None else res.precision_bits,
                "wall_ms": "" if res is None else res.wall_time_ms,
                "alpha_log2": e.alpha_log2,
                "negative": e.negative,
                "flagged": e.flagged,
                "error": e.error or "",
            }
        )
    doc = {"command": "goodness", "config": cfg, "rows": rows, "worst": scan.worst}
    _emit(cfg, doc, rows)
    flagged = sum(1 for e in scan.entries if e.flagged)
    print(
        f"goodness scan N={scan.N}: {len(scan.entries)} multipliers, "
        f"worst |S|/N = {scan.worst:.6g}, flagged {flagged}"
    )
    return 2 if flagged else 0


def _cmd_equi(args) -> int:
    defaults = dict(
        _COMMON_DEFAULTS,
        kind="floor", c=None, alpha=None, shifts="0", N=None, K=3,
        weyl_threshold=0.5, disc_threshold=0.5, moduli="",
        res_tolerance=0.05, disc_points=1 << 20, hist_out=None,
    )
    cfg = _merged(args, defaults)
    if cfg["N"] is None:
        raise ValueError("equi needs --N")
    config = EquiConfig(
        N=int(cfg["N"]),
        kind=cfg["kind"],
        c=None if cfg["c"] is None else float(cfg["c"]),
        alpha=parse_real(cfg["alpha"]) if cfg.get("alpha") else None,
        shifts=tuple(_parse_ints(cfg["shifts"])),
        K=int(cfg["K"]),
        weyl_threshold=float(cfg["weyl_threshold"]),
        disc_threshold=float(cfg["disc_threshold"]),
        moduli=tuple(_parse_ints(cfg["moduli"])) if cfg["moduli"] else (),
        res_tolerance=float(cfg["res_tolerance"]),
        threads=int(cfg["threads"]),
        disc_points=int(cfg["disc_points"]),
    )
    report = equi_report(config)
    rows = [{"N": n, "Dstar": d} for _, n, d, _ in report.discrepancies]
    weyl_rows = [
        {
            "kvec": ",".join(str(k) for k in e.kvec),
            "modulus_over_N": e.normalized,
            "passed": e.passed,
            "error": e.error,
        }
        for e in report.weyl
    ]
    doc = {
        "command": "equi",
        "config": cfg,
        "weyl": weyl_rows,
        "discrepancies": [
            {"shift": s, "points": n, "dstar": d, "passed": ok}
            for s, n, d, ok in report.discrepancies
        ],
        "histograms": [
            {
                "q": q,
                "counts": list(h.counts),
                "max_deviation": dev,
                "passed": ok,
            }
            for q, h, dev, ok in report.histograms
        ],
        "passed": report.passed,
    }
    _emit(cfg, doc, rows)
    if cfg.get("hist_out"):
        hist_rows = [
            {"q": q, "residue": res, "count": cnt, "freq": freq}
            for q, h, _, _ in report.histograms
            for res, cnt, freq in h.rows()
        ]
        _atomic_write(cfg["hist_out"], _csv_text(hist_rows))
    print(report.summary())
    return 0 if report.passed else 2


def _cmd_decompose(args) -> int:
    defaults = dict(
        _COMMON_DEFAULTS, alphas="1", shifts="0", c=None, check_x=None, s_max=4,
    )
    cfg = _merged(args, defaults)
    comb = _comb_from(cfg)
    poly = change_of_basis(comb)
    doc = {
        "command": "decompose",
        "config": cfg,
        "coeffs": [str(d) for d in poly.coeffs],
        "exact": poly.exact,
        "tau": poly.tau,
        "d_tau": str(poly.d_tau),
        "coeff_sum": str(poly.coeff_sum),
        "shift_offset": poly.shift_offset,
        "sign_flipped": poly.sign_flipped,
        "zeroed": list(poly.zeroed),
    }
    rows = [
        {"order": i, "coefficient": str(d)}
        for i, d in enumerate(poly.coeffs)
        if d != 0
    ]
    if cfg["check_x"] is not None:
        if cfg["c"] is None:
            raise ValueError("--check-x needs --c for the derivative identity")
        resid = verify_identity(
            GrowthParams(float(cfg["c"])), comb, int(cfg["check_x"]),
            s_max=int(cfg["s_max"]),
        )
        doc["identity_residual"] = resid
        print(f"identity residual at x={cfg['check_x']}: {resid:.3e}")
    _emit(cfg, doc, rows)
    print(f"p(D) = {poly}  (tau={poly.tau}, leading {poly.d_tau})")
    return 0


def _cmd_certify(args) -> int:
    defaults = dict(
        _COMMON_DEFAULTS,
        c=None, N=None, s_max=2, grid=256, lemma="all",
        alphas=None, shifts=None, k_max=3,
    )
    cfg = _merged(args, defaults)
    if cfg["c"] is None or cfg["N"] is None:
        raise ValueError("certify needs --c and --N")
    params = GrowthParams(float(cfg["c"]))
    N = int(cfg["N"])
    s_max = int(cfg["s_max"])
    grid = int(cfg["grid"])
    which = cfg["lemma"]
    certs = []
    if which in ("single", "all"):
        certs.extend(certify_single(params, N, s_max, grid_density=grid))
    if which in ("sandwich", "all"):
        certs.append(
            certify_sandwich(
                params, N, s_max=s_max, k_max=int(cfg["k_max"]),
                grid_density=min(grid, 64),
            )
        )
    if cfg["alphas"] is not None and which in ("combination", "all"):
        comb = _comb_from(cfg)
        certs.extend(certify_combination(params, comb, N, s_max, grid_density=grid))
    elif which == "combination":
        raise ValueError("certify --lemma combination needs --alphas and --shifts")
    rows = [c.as_dict() for c in certs]
    doc = {"command": "certify", "config": cfg, "certificates": rows}
    _emit(cfg, doc, rows)
    for c in certs:
        print(c.summary())
    return 0 if all(c.passed for c in certs) else 2


def _seq_from(cfg: dict) -> SequenceId:
    name = cfg["seq"]
    if name in ("a", "smooth"):
        if cfg["c"] is None:
            raise ValueError("the smooth sequence needs --c")
        return SequenceId.smooth(float(cfg["c"]))
    if name in ("b", "floor"):
        if cfg["c"] is None or cfg.get("alpha") is None:
            raise ValueError("the floor sequence needs --c and --alpha")
        return SequenceId.floor(float(cfg["c"]), parse_real(cfg["alpha"]))
    if name == "rotation":
        if cfg.get("alpha") is None:
            raise ValueError("the rotation sequence needs --alpha")
        return SequenceId.rotation(parse_real(cfg["alpha"]))
    if name == "constant":
        return SequenceId.constant()
    if name == "iid":
        return SequenceId.iid(int(cfg.get("seed", 0)))
    raise ValueError(f"unknown sequence {name!r}")


def _cmd_fingerprint(args) -> int:
    defaults = dict(
        _COMMON_DEFAULTS,
        seq="a", c=None, alpha=None, seed=0, H=2, E=2, N=None,
        threshold=0.05, budget=10_000, stability=True,
    )
    cfg = _merged(args, defaults)
    if cfg["N"] is None:
        raise ValueError("fingerprint needs --N")
    seq = _seq_from(cfg)
    tensor = bernoulli_fingerprint(
        seq, int(cfg["H"]), int(cfg["E"]), int(cfg["N"]),
        threshold=float(cfg["threshold"]), budget=int(cfg["budget"]),
        threads=int(cfg["threads"]), probe_stability=bool(cfg["stability"]),
    )
    rows = tensor.rows()
    doc = {
        "command": "fingerprint",
        "config": cfg,
        "sequence": seq.label(),
        "max_modulus": tensor.max_modulus,
        "stability": tensor.stability,
        "computed": tensor.computed,
        "consistent_with_bernoulli": tensor.consistent_with_bernoulli,
        "rows": rows,
    }
    _emit(cfg, doc, rows)
    worst = tensor.worst_query()
    print(
        f"fingerprint {seq.label()} H={cfg['H']} E={cfg['E']} N={cfg['N']}: "
        f"max |corr| = {tensor.max_modulus:.6g} at shifts {worst.shifts} "
        f"exponents {worst.exponents} -> "
        f"{'consistent' if tensor.consistent_with_bernoulli else 'REJECTED'}"
    )
    return 0 if tensor.consistent_with_bernoulli else 2


def _cmd_vn(args) -> int:
    defaults = dict(
        _COMMON_DEFAULTS,
        betas="sqrt2", kvec=None, shifts="0", c=None, N=None,
        curve_from=1024, threshold=None,
    )
    cfg = _merged(args, defaults)
    if cfg["c"] is None or cfg["N"] is None:
        raise ValueError("vn needs --c and --N")
    betas = _parse_reals(cfg["betas"])
    r = len(betas)
    vecs = [[0] * r for _ in range(r)]
    for i, b in enumerate(betas):
        vecs[i][i] = b
    sys_ = ModelSystem.torus(vecs)
    kvec = _parse_ints(cfg["kvec"]) if cfg["kvec"] else [1] * r
    f = ObservableSpec.character(kvec)
    res = vn_average(
        sys_, f, _parse_ints(cfg["shifts"]), float(cfg["c"]), int(cfg["N"]),
        precision=_precision(cfg), threads=int(cfg["threads"]),
        curve_from=int(cfg["curve_from"]),
    )
    rows = [{"N": n, "norm_or_modulus": v} for n, v in res.curve]
    doc = {
        "command": "vn",
        "config": cfg,
        "system": sys_.describe(),
        "observable": f.describe(),
        "norm": res.norm,
        "invariant_mass": res.invariant_mass,
        "curve": rows,
        "precision_bits": res.precision_bits,
    }
    _emit(cfg, doc, rows)
    print(res.summary())
    thresh = cfg.get("threshold")
    if thresh is not None and res.norm >= float(thresh):
        print(f"threshold {float(thresh):g} FAILED")
        return 2
    return 0


def _cmd_zeroentropy(args) -> int:
    defaults = dict(
        _COMMON_DEFAULTS,
        system="rotation", betas="sqrt2", alpha_sys="sqrt2", kvec=None,
        x0="0", seq="a", c=None, alpha=None, N=None, dyadic=None,
        threshold=None,
    )
    cfg = _merged(args, defaults)
    seq = _seq_from(cfg)
    if cfg["system"] == "rotation":
        betas = _parse_reals(cfg["betas"])
        sys_ = ModelSystem.torus([betas])
        dim = len(betas)
    elif cfg["system"] == "skew":
        sys_ = ModelSystem.skew(parse_real(cfg["alpha_sys"]))
        dim = 2
    else:
        raise ValueError("zeroentropy --system must be rotation or skew")
    kvec = _parse_ints(cfg["kvec"]) if cfg["kvec"] else [1] * dim
    f = ObservableSpec.character(kvec)
    x0 = _parse_reals(cfg["x0"])
    if len(x0) == 1 and dim > 1:
        x0 = x0 * dim
    rows = []
    value = None
    for n in _dyadic_Ns(cfg):
        res = zero_entropy_correlation(
            sys_, f, x0, seq, n,
            precision=_precision(cfg), threads=int(cfg["threads"]),
        )
        rows.append({"N": n, "norm_or_modulus": res.modulus})
        value = res
    doc = {
        "command": "zeroentropy",
        "config": cfg,
        "system": sys_.describe(),
        "observable": f.describe(),
        "sequence": seq.label(),
        "value_re": value.value.real,
        "value_im": value.value.imag,
        "modulus": value.modulus,
        "curve": rows,
        "precision_bits": value.precision_bits,
    }
    _emit(cfg, doc, rows)
    print(value.summary())
    thresh = cfg.get("threshold")
    if thresh is not None and value.modulus >= float(thresh):
        print(f"threshold {float(thresh):g} FAILED")
        return 2
    return 0


def _cmd_skewdemo(args) -> int:
    defaults = dict(
        _COMMON_DEFAULTS,
        alpha="sqrt2", freq=1, shifts="0", N=None, dyadic=None, threshold=None,
    )
    cfg = _merged(args, defaults)
    rows = []
    last = None
    for n in _dyadic_Ns(cfg):
        res = skew_demo(
            parse_real(cfg["alpha"]), int(cfg["freq"]), _parse_ints(cfg["shifts"]),
            n, precision=_precision(cfg), threads=int(cfg["threads"]),
        )
        rows.append({"N": n, "norm_or_modulus": res.deviation})
        last = res
    doc = {
        "command": "skewdemo",
        "config": cfg,
        "time_re": last.time_average.real,
        "time_im": last.time_average.imag,
        "space_re": last.space_average.real,
        "space_im": last.space_average.imag,
        "deviation": last.deviation,
        "curve": rows,
    }
    _emit(cfg, doc, rows)
    print(last.summary())
    thresh = cfg.get("threshold")
    if thresh is not None and last.deviation >= float(thresh):
        print(f"threshold {float(thresh):g} FAILED")
        return 2
    return 0


def _cmd_fitdecay(args) -> int:
    defaults = dict(_COMMON_DEFAULTS, c=None, series=None, infile=None)
    cfg = _merged(args, defaults)
    if cfg["c"] is None:
        raise ValueError("fitdecay needs --c")
    series: list[tuple[int, float]] = []
    if cfg.get("infile"):
        with open(cfg["infile"]) as fh:
            reader = csv.DictReader(fh)
            for row in reader:
                mod = row.get("modulus_over_N") or row.get("norm_or_modulus")
                if mod is None:
                    raise ValueError(
                        "input CSV needs a modulus_over_N or norm_or_modulus column"
                    )
                series.append((int(row["N"]), float(mod)))
    elif cfg.get("series"):
        for tok in str(cfg["series"]).split(","):
            n, m = tok.split(":", 1)
            series.append((int(n), float(m)))
    else:
        raise ValueError("fitdecay needs --in or --series")
    fit = fit_decay(series, float(cfg["c"]))
    doc = {
        "command": "fitdecay",
        "config": cfg,
        "kappa_hat": fit.kappa_hat,
        "intercept": fit.intercept,
        "residual": fit.residual,
        "model_exponent": fit.model_exponent,
        "points_used": fit.points_used,
        "dropped": fit.dropped,
    }
    rows = [doc]
    _emit(cfg, doc, rows)
    print(fit.summary())
    return 0


# ---- parser -----------------------------------------------------------------


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON file with the same field names; flags win")
    p.add_argument("--precision", help="auto or a bit width", **_S)
    p.add_argument("--threads", type=int, **_S)
    p.add_argument("--out", help="artifact path", **_S)
    p.add_argument("--format", choices=("csv", "json"), **_S)


_S = {"default": argparse.SUPPRESS}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="intergrow",
        description="Exponential sums, certificates, and model systems "
        "for slowly growing integer sequences.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("expsum", help="partial sums of a growth phase")
    p.add_argument("--kind", choices=("smooth", "floor"), **_S)
    p.add_argument("--c", type=float, **_S)
    p.add_argument("--alphas", **_S)
    p.add_argument("--shifts", **_S)
    p.add_argument("--N", type=int, **_S)
    p.add_argument("--dyadic", metavar="K1..K2", **_S)
    _add_common(p)
    p.set_defaults(func=_cmd_expsum)

    p = sub.add_parser("weyl", help="one Weyl vector test")
    p.add_argument("--c", type=float, **_S)
    p.add_argument("--shifts", **_S)
    p.add_argument("--kvec", **_S)
    p.add_argument("--N", type=int, **_S)
    p.add_argument("--dyadic", metavar="K1..K2", **_S)
    p.add_argument("--floor", action="store_true", **_S)
    p.add_argument("--alpha", **_S)
    p.add_argument("--threshold", type=float, **_S)
    _add_common(p)
    p.set_defaults(func=_cmd_weyl)

    p = sub.add_parser("goodness", help="multiplier scan across the admissible range")
    p.add_argument("--c", type=float, **_S)
    p.add_argument("--alphas", **_S)
    p.add_argument("--shifts", **_S)
    p.add_argument("--N", type=int, **_S)
    p.add_argument("--gamma", type=float, **_S)
    p.add_argument("--big-exp", dest="big_exp", type=float, **_S)
    p.add_argument("--count", type=int, **_S)
    p.add_argument("--threshold", type=float, **_S)
    p.add_argument("--positive-only", dest="positive_only", action="store_true", **_S)
    _add_common(p)
    p.set_defaults(func=_cmd_goodness)

    p = sub.add_parser("equi", help="equidistribution batteries")
    p.add_argument("--kind", choices=("floor", "smooth", "linear", "zero"), **_S)
    p.add_argument("--c", type=float, **_S)
    p.add_argument("--alpha", **_S)
    p.add_argument("--shifts", **_S)
    p.add_argument("--N", type=int, **_S)
    p.add_argument("--K", type=int, **_S)
    p.add_argument("--weyl-threshold", dest="weyl_threshold", type=float, **_S)
    p.add_argument("--disc-threshold", dest="disc_threshold", type=float, **_S)
    p.add_argument("--moduli", **_S)
    p.add_argument("--res-tolerance", dest="res_tolerance", type=float, **_S)
    p.add_argument("--disc-points", dest="disc_points", type=int, **_S)
    p.add_argument(
        "--hist-out", dest="hist_out",
        help="residue histogram CSV (q, residue, count, freq)", **_S,
    )
    _add_common(p)
    p.set_defaults(func=_cmd_equi)

    p = sub.add_parser("decompose", help="shift basis to difference basis")
    p.add_argument("--alphas", **_S)
    p.add_argument("--shifts", **_S)
    p.add_argument("--c", type=float, **_S)
    p.add_argument("--check-x", dest="check_x", type=int, **_S)
    p.add_argument("--s-max", dest="s_max", type=int, **_S)
    _add_common(p)
    p.set_defaults(func=_cmd_decompose)

    p = sub.add_parser("certify", help="interval bound certificates")
    p.add_argument("--c", type=float, **_S)
    p.add_argument("--N", type=int, **_S)
    p.add_argument("--s-max", dest="s_max", type=int, **_S)
    p.add_argument("--grid", type=int, **_S)
    p.add_argument(
        "--lemma", choices=("single", "combination", "sandwich", "all"), **_S
    )
    p.add_argument("--alphas", **_S)
    p.add_argument("--shifts", **_S)
    p.add_argument("--k-max", dest="k_max", type=int, **_S)
    _add_common(p)
    p.set_defaults(func=_cmd_certify)

    p = sub.add_parser("fingerprint", help="correlation tensor over a query box")
    p.add_argument("--seq", **_S)
    p.add_argument("--c", type=float, **_S)
    p.add_argument("--alpha", **_S)
    p.add_argument("--seed", type=int, **_S)
    p.add_argument("--H", type=int, **_S)
    p.add_argument("--E", type=int, **_S)
    p.add_argument("--N", type=int, **_S)
    p.add_argument("--threshold", type=float, **_S)
    p.add_argument("--budget", type=int, **_S)
    p.add_argument("--no-stability", dest="stability", action="store_false", **_S)
    _add_common(p)
    p.set_defaults(func=_cmd_fingerprint)

    p = sub.add_parser("vn", help="ergodic average vs projection, torus model")
    p.add_argument("--betas", help="one rotation per transformation", **_S)
    p.add_argument("--kvec", **_S)
    p.add_argument("--shifts", **_S)
    p.add_argument("--c", type=float, **_S)
    p.add_argument("--N", type=int, **_S)
    p.add_argument("--curve-from", dest="curve_from", type=int, **_S)
    p.add_argument("--threshold", type=float, **_S)
    _add_common(p)
    p.set_defaults(func=_cmd_vn)

    p = sub.add_parser("zeroentropy", help="sequence against one orbit")
    p.add_argument("--system", choices=("rotation", "skew"), **_S)
    p.add_argument("--betas", **_S)
    p.add_argument("--alpha-sys", dest="alpha_sys", **_S)
    p.add_argument("--kvec", **_S)
    p.add_argument("--x0", **_S)
    p.add_argument("--seq", **_S)
    p.add_argument("--c", type=float, **_S)
    p.add_argument("--alpha", **_S)
    p.add_argument("--N", type=int, **_S)
    p.add_argument("--dyadic", metavar="K1..K2", **_S)
    p.add_argument("--threshold", type=float, **_S)
    _add_common(p)
    p.set_defaults(func=_cmd_zeroentropy)

    p = sub.add_parser("skewdemo", help="time vs space average on the skew product")
    p.add_argument("--alpha", **_S)
    p.add_argument("--freq", type=int, **_S)
    p.add_argument("--shifts", **_S)
    p.add_argument("--N", type=int, **_S)
    p.add_argument("--dyadic", metavar="K1..K2", **_S)
    p.add_argument("--threshold", type=float, **_S)
    _add_common(p)
    p.set_defaults(func=_cmd_skewdemo)

    p = sub.add_parser("fitdecay", help="fit the stretched-exponential decay law")
    p.add_argument("--c", type=float, **_S)
    p.add_argument("--in", dest="infile", help="CSV with N and modulus columns", **_S)
    p.add_argument("--series", help="inline N:modulus,N:modulus,...", **_S)
    _add_common(p)
    p.set_defaults(func=_cmd_fitdecay)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:
        err = {
            "error": str(exc),
            "type": type(exc).__name__,
            "command": getattr(args, "command", None),
        }
        print(json.dumps(err), file=sys.stderr)
        return 1


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
