"""Reproducible experiments: manifests in, tables and verdicts out.

Each experiment id names a fixed numerical study. A manifest pins the
fixture (grids, windows, signals), the parameter block, and the seed;
running it produces named tables, a summary, and a list of assertions.
Every assertion is a predicate over table columns, so a stored run can be
re-verified from its CSV files alone without redoing the numerics, and
two runs of the same manifest write byte-identical tables.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .forge import (
    assemble_pair,
    build_bumps,
    dichotomy_check,
    field_difference,
    field_instability_ratio,
    instability_ratio,
    lp_reduction_rows,
    normalize_seed,
    select_annulus_schedule,
    stft_instability_family,
    verified_window,
    verify_bump_bounds,
)
from .geometry import (
    DomainMask,
    cheeger_estimate,
    connectivity,
    gluing_bound,
    poincare_constant,
    stability_certificate,
)
from .grids import (
    Signal,
    TFField,
    TFGrid,
    gaussian,
    hermite,
    make_grid,
    modulate,
    tf_grid_of,
    translate,
)
from .norms import (
    LqNorm,
    NormSpec,
    SobolevNorm,
    XpSigmaNorm,
    disjointness_witness,
    japanese_bracket,
    masked_h1_norm,
    modulus_sobolev_ratio,
    phase_inf_distance,
    riemann_lp,
)
from .rng import SplitMix64
from .transforms import (
    WindowSpec,
    ambiguity,
    ambiguity_relation_residual,
    covariance_residual,
    fock_polynomial_field,
    parse_window,
    phaseless,
    recover,
    stft,
    window_comparison_ratio,
)

__all__ = [
    "CHECKS",
    "INVARIANTS",
    "ExperimentManifest",
    "ExperimentResult",
    "default_manifest",
    "experiment_ids",
    "list_experiments",
    "run",
    "verify_run",
    "write_result",
]


# ---------------------------------------------------------------------------
# invariants referenced by assertions

INVARIANTS = {
    "transforms.isometry":
        "the transform preserves the L2 norm up to grid rounding",
    "transforms.covariance":
        "lattice time-frequency shifts move the transform by the known "
        "phase twist",
    "transforms.ambiguity-relation":
        "the measurement spectrum factors through the windowed ambiguity "
        "product",
    "transforms.recovery":
        "division-based inversion returns the signal up to a global phase",
    "transforms.recovery-noisy":
        "inversion degrades gracefully at finite SNR (report only)",
    "transforms.window-comparison":
        "window-change ratio: exact for equal windows, finite or flagged "
        "otherwise",
    "forge.ratio-growth":
        "instability ratios clear their 2^n targets and grow along the "
        "verified window",
    "forge.window-pin":
        "the verified window of the gaussian ladder is pinned",
    "forge.far-phase-floor":
        "far phases cannot fake the modulus match",
    "forge.bump-estimates":
        "the four bump estimates hold with the implementation constant",
    "forge.tail-decay":
        "annulus tail masses decay at the scheduled rate",
    "forge.sobolev-ratio":
        "transform-side instability ratios clear per-rung targets",
    "forge.family-closeness":
        "the perturbed family stays inside its closeness budget",
    "norms.band-split":
        "band splitting controls the Sobolev norm with a pinned constant",
    "norms.modulus-contraction":
        "taking moduli does not increase smooth-field Sobolev mass below "
        "the threshold",
    "norms.modulus-threshold-sharp":
        "above the threshold, creased moduli outweigh their sources",
    "norms.disjointness-decay":
        "overlap witnesses decay geometrically along the ladder",
    "norms.disjointness-edge":
        "overlap witness edge cases are exact",
    "geometry.cheeger-closed-form":
        "gaussian Cheeger quotients match the closed form",
    "geometry.cheeger-refinement":
        "Cheeger estimates are stable under grid refinement",
    "geometry.cheeger-decay":
        "adding ladder rungs strangles the Cheeger constant",
    "geometry.gluing-soundness":
        "the glued stability bound dominates the measured whole-domain "
        "constant",
    "geometry.gluing-formula":
        "the gluing combination is computed exactly from its inputs",
    "geometry.lambda-range":
        "connectivity quotients stay in (0, 1/2]",
    "geometry.neumann-gap":
        "the spectral gap of the unit square matches pi^2",
    "geometry.disconnected-inf":
        "disconnected domains report an infinite constant",
    "geometry.certificate-soundness":
        "the certificate bound dominates the measured phase distance",
    "geometry.log-derivative-vanishes":
        "the coupling term vanishes for a constant holomorphic part",
}


# ---------------------------------------------------------------------------
# re-checkable predicates over table columns
#
# Each check receives the table as a list of row dicts plus its args and
# returns a bool. Checks must be computable from the stored CSV alone, so
# verification never reruns the numerics. Empty tables fail every check.


def _col(rows, name):
    return [row[name] for row in rows]


def _check_col_le_col(rows, args):
    scale = args.get("scale", 1.0)
    tol = args.get("tol", 0.0)
    return all(row[args["lhs"]] <= row[args["rhs"]] * scale + tol
               for row in rows)


def _check_col_ge_col(rows, args):
    return all(row[args["lhs"]] >= row[args["rhs"]] for row in rows)


def _check_col_close_col(rows, args):
    rel = args["rel"]
    return all(abs(row[args["lhs"]] - row[args["rhs"]])
               <= rel * abs(row[args["rhs"]]) for row in rows)


def _check_equals_col(rows, args):
    return all(row[args["lhs"]] == row[args["rhs"]] for row in rows)


def _check_equals_value(rows, args):
    return all(row[args["col"]] == args["value"] for row in rows)


def _check_approx_value(rows, args):
    return all(abs(row[args["col"]] - args["value"]) <= args["tol"]
               for row in rows)


def _check_all_le(rows, args):
    return all(v <= args["bound"] for v in _col(rows, args["col"]))


def _check_all_lt(rows, args):
    return all(v < args["bound"] for v in _col(rows, args["col"]))


def _check_all_ge(rows, args):
    return all(v >= args["bound"] for v in _col(rows, args["col"]))


def _check_all_gt(rows, args):
    return all(v > args["bound"] for v in _col(rows, args["col"]))


def _check_max_lt(rows, args):
    return max(_col(rows, args["col"])) < args["bound"]


def _check_max_gt(rows, args):
    return max(_col(rows, args["col"])) > args["bound"]


def _check_all_true(rows, args):
    return all(v == 1 for v in _col(rows, args["col"]))


def _check_all_inf(rows, args):
    return all(math.isinf(v) for v in _col(rows, args["col"]))


def _check_all_finite(rows, args):
    return all(math.isfinite(v) for v in _col(rows, args["col"]))


def _check_nonincreasing(rows, args):
    vals = _col(rows, args["col"])
    return all(b <= a for a, b in zip(vals, vals[1:]))


def _check_last_le_first_scaled(rows, args):
    vals = _col(rows, args["col"])
    return vals[-1] <= args["scale"] * vals[0]


def _check_geometric_decay(rows, args):
    vals = _col(rows, args["col"])
    return all(b <= args["factor"] * a for a, b in zip(vals, vals[1:]))


def _check_growth_ge(rows, args):
    """Consecutive ratios must grow by the given factor; a jump from a
    finite value to a saturated (infinite) one counts as growth."""
    vals = _col(rows, args["col"])
    if not vals:
        return False
    for a, b in zip(vals, vals[1:]):
        if math.isinf(b) and not math.isinf(a):
            continue
        if not b >= args["bound"] * a:
            return False
    return True


def _check_gluing_formula(rows, args):
    return all(row[args["bound"]]
               == gluing_bound(row[args["c_a"]], row[args["c_b"]],
                               row[args["lam"]])
               for row in rows)


CHECKS = {
    "col_le_col": _check_col_le_col,
    "col_ge_col": _check_col_ge_col,
    "col_close_col": _check_col_close_col,
    "equals_col": _check_equals_col,
    "equals_value": _check_equals_value,
    "approx_value": _check_approx_value,
    "all_le": _check_all_le,
    "all_lt": _check_all_lt,
    "all_ge": _check_all_ge,
    "all_gt": _check_all_gt,
    "max_lt": _check_max_lt,
    "max_gt": _check_max_gt,
    "all_true": _check_all_true,
    "all_inf": _check_all_inf,
    "all_finite": _check_all_finite,
    "nonincreasing": _check_nonincreasing,
    "geometric_decay": _check_geometric_decay,
    "last_le_first_scaled": _check_last_le_first_scaled,
    "growth_ge": _check_growth_ge,
    "gluing_formula": _check_gluing_formula,
}


def _assertion(invariant: str, description: str, table: str, check: str,
               args: dict, hard: bool = True) -> dict:
    if invariant not in INVARIANTS:
        raise KeyError(f"unknown invariant id {invariant!r}")
    if check not in CHECKS:
        raise KeyError(f"unknown check {check!r}")
    return {"invariant": invariant, "description": description,
            "table": table, "check": check, "args": args, "hard": hard}


def _evaluate(tables: dict, spec: dict) -> bool:
    header, rows = tables[spec["table"]]
    dicts = [dict(zip(header, row)) for row in rows]
    if not dicts:
        return False
    return bool(CHECKS[spec["check"]](dicts, spec["args"]))


# ---------------------------------------------------------------------------
# manifests and results


@dataclass(frozen=True)
class ExperimentManifest:
    """Complete description of one run: everything the runner may read.

    The same (id, fixture, params, seed) always produces byte-identical
    tables; out_dir only controls where they land.
    """

    id: str
    fixture: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)
    seed: int = 0
    out_dir: str | None = None

    def to_dict(self) -> dict:
        return {"id": self.id, "fixture": self.fixture,
                "params": self.params, "seed": self.seed,
                "out_dir": self.out_dir}


@dataclass
class ExperimentResult:
    id: str
    manifest: ExperimentManifest
    tables: dict
    assertions: list
    summary: dict
    passed: bool
    wallclock: float

    def summary_dict(self) -> dict:
        return {
            "id": self.id,
            "manifest": self.manifest.to_dict(),
            "passed": self.passed,
            "wallclock_s": self.wallclock,
            "tables": list(self.tables),
            "assertions": self.assertions,
            "summary": self.summary,
        }


# ---------------------------------------------------------------------------
# canonical CSV


def _fmt_cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    s = str(v)
    if "," in s or "\n" in s:
        raise ValueError(f"cell value {s!r} needs quoting; use plain tokens")
    return s


def _csv_text(header: list, rows: list) -> str:
    lines = [",".join(header)]
    for row in rows:
        if len(row) != len(header):
            raise ValueError("row width does not match header")
        lines.append(",".join(_fmt_cell(v) for v in row))
    return "\n".join(lines) + "\n"


def _parse_cell(s: str):
    try:
        return int(s)
    except ValueError:
        pass
    try:
        return float(s)
    except ValueError:
        return s


def _read_csv(path: Path) -> tuple:
    lines = path.read_text().splitlines()
    header = lines[0].split(",")
    rows = [[_parse_cell(c) for c in line.split(",")] for line in lines[1:]]
    return header, rows


def _long_rows(tables: dict) -> list:
    """Plot-ready (series, x, y) rows: first numeric column of each table
    is the abscissa, every other numeric column one series."""
    out = []
    for name, (header, rows) in tables.items():
        if not rows:
            continue
        numeric = [i for i, v in enumerate(rows[0])
                   if isinstance(v, (int, float, np.integer, np.floating))
                   and not isinstance(v, bool)]
        if len(numeric) < 2:
            continue
        xi = numeric[0]
        for ci in numeric[1:]:
            series = f"{name}.{header[ci]}"
            for row in rows:
                out.append([series, float(row[xi]), float(row[ci])])
    return out


def write_result(result: ExperimentResult, out_dir: str | Path) -> list:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for name, (header, rows) in result.tables.items():
        p = out / f"{name}.csv"
        p.write_text(_csv_text(header, rows))
        written.append(p)
    p = out / "plot.csv"
    p.write_text(_csv_text(["series", "x", "y"], _long_rows(result.tables)))
    written.append(p)
    p = out / "summary.json"
    p.write_text(json.dumps(result.summary_dict(), indent=2) + "\n")
    written.append(p)
    return written


def verify_run(out_dir: str | Path) -> dict:
    """Re-evaluate a stored run's assertions from its CSV files.

    Returns per-assertion stored vs rechecked verdicts; ok means every
    recheck reproduced the stored verdict and every hard assertion holds.
    """
    out = Path(out_dir)
    summary = json.loads((out / "summary.json").read_text())
    tables = {name: _read_csv(out / f"{name}.csv")
              for name in summary["tables"]}
    report = {"id": summary["id"], "ok": True, "assertions": []}
    for spec in summary["assertions"]:
        recheck = _evaluate(tables, spec)
        entry = {"invariant": spec["invariant"], "check": spec["check"],
                 "hard": spec["hard"], "stored": spec["passed"],
                 "recheck": recheck}
        if recheck != spec["passed"] or (spec["hard"] and not recheck):
            report["ok"] = False
        report["assertions"].append(entry)
    return report


# ---------------------------------------------------------------------------
# shared fixture helpers


def _grid(fx: dict):
    return make_grid(float(fx["length"]), int(fx["count"]))


def _require_square(grid, what: str) -> None:
    if not grid.is_self_dual:
        raise ValueError(
            f"infeasible grid for {what}: needs length^2 == count, got "
            f"length {grid.length:g} with {grid.count} samples")


def _random_signal(grid, rng: SplitMix64) -> Signal:
    re = np.array(rng.normals(grid.count))
    im = np.array(rng.normals(grid.count))
    return Signal(grid, (re + 1j * im) / math.sqrt(2.0))


def _smooth_signal(grid, rng: SplitMix64, kmax: int, decay: float) -> Signal:
    """Random trigonometric polynomial with geometrically damped modes."""
    x = grid.points()
    vals = np.zeros(grid.count, dtype=np.complex128)
    for k in range(-kmax, kmax + 1):
        c = rng.complex_normal() * math.exp(-decay * abs(k))
        vals += c * np.exp(2j * np.pi * k * x / grid.length)
    return Signal(grid, vals)


def _named_signal(name: str, grid, rng: SplitMix64 | None = None) -> Signal:
    if name == "random":
        if rng is None:
            raise ValueError("random signal needs a seeded stream")
        return _random_signal(grid, rng)
    return parse_window(name).build(grid)


def _signal_l2(sig: Signal) -> float:
    return riemann_lp(sig.values, sig.grid.dx, 2.0)


def _field_l2(fld: TFField) -> float:
    return riemann_lp(fld.values, fld.tfgrid.cell, 2.0)


def _modulus_field(fld: TFField) -> TFField:
    return TFField(fld.tfgrid, np.abs(fld.values).astype(np.complex128))


# ---------------------------------------------------------------------------
# runners
#
# Each runner returns (tables, assertion_specs, summary_extra). Tables map
# name -> (header, rows). Assertion specs are dicts from _assertion.


def _run_isometry(manifest, fx, pr):
    grid = _grid(fx)
    rng = SplitMix64(manifest.seed)
    tol = pr["tol"]
    rows = []
    for t in range(pr["trials"]):
        f = _random_signal(grid, rng.spawn(t + 1))
        nf = _signal_l2(f)
        nv = _field_l2(stft(f))
        rows.append([t, nf, nv, abs(nv - nf) / nf, tol])
    tables = {"isometry": (["trial", "signal_l2", "field_l2", "residual",
                            "tol"], rows)}
    specs = [_assertion(
        "transforms.isometry",
        f"relative L2 defect below {tol:g} on {pr['trials']} random signals",
        "isometry", "col_le_col", {"lhs": "residual", "rhs": "tol"})]
    return tables, specs, {}


def _run_covariance(manifest, fx, pr):
    grid = _grid(fx)
    f = _random_signal(grid, SplitMix64(manifest.seed))
    span, stride, tol = pr["span"], pr["stride"], pr["tol"]
    rows = []
    for wname in fx["windows"]:
        w = parse_window(wname)
        for k in range(-span, span + 1):
            for l in range(-span, span + 1):
                u = k * stride * grid.dx
                eta = l * stride * grid.dxi
                rows.append([wname, k, l, u, eta,
                             covariance_residual(f, w, u, eta), tol])
    tables = {"covariance": (["window", "k", "l", "u", "eta", "residual",
                              "tol"], rows)}
    specs = [_assertion(
        "transforms.covariance",
        f"shift defect below {tol:g} on a {2*span+1}x{2*span+1} lattice",
        "covariance", "col_le_col", {"lhs": "residual", "rhs": "tol"})]
    return tables, specs, {}


def _run_ambiguity(manifest, fx, pr):
    grid = _grid(fx)
    _require_square(grid, "the ambiguity relation")
    rng = SplitMix64(manifest.seed)
    tol = pr["tol"]
    rows = []
    for si, sname in enumerate(fx["signals"]):
        f = _named_signal(sname, grid, rng.spawn(si + 1))
        if sname == "random":
            f = Signal(grid, f.values / _signal_l2(f))
        for wname in fx["windows"]:
            res = ambiguity_relation_residual(f, parse_window(wname))
            rows.append([sname, wname, res, tol])
    tables = {"relation": (["signal", "window", "residual", "tol"], rows)}
    specs = [_assertion(
        "transforms.ambiguity-relation",
        f"spectrum-side residual below {tol:g} for every signal/window pair",
        "relation", "col_le_col", {"lhs": "residual", "rhs": "tol"})]
    return tables, specs, {}


def _recovery_rows(grid, signals, window, noise=None, threshold=None):
    rows = []
    for sname in signals:
        f = parse_window(sname).build(grid)
        m = phaseless(f, window)
        if noise is not None:
            m = noise(m, sname)
        rec = recover(m, window, threshold=threshold)
        err = phase_inf_distance(rec.signal, f, LqNorm(2.0)).distance
        rows.append([sname, err / _signal_l2(f), rec.masked_fraction,
                     rec.threshold])
    return rows


def _run_recover_noiseless(manifest, fx, pr):
    grid = _grid(fx)
    _require_square(grid, "recovery")
    w = parse_window(fx["window"])
    tol = pr["tol"]
    rows = [r + [tol] for r in _recovery_rows(grid, fx["signals"], w)]
    tables = {"recovery": (["signal", "rel_error", "masked_fraction",
                            "threshold", "tol"], rows)}
    specs = [_assertion(
        "transforms.recovery",
        f"phase-aligned relative error below {tol:g} without noise",
        "recovery", "col_le_col", {"lhs": "rel_error", "rhs": "tol"})]
    return tables, specs, {}


def _run_recover_noisy(manifest, fx, pr):
    grid = _grid(fx)
    _require_square(grid, "recovery")
    w = parse_window(fx["window"])
    tol, snr = pr["tol"], pr["snr_db"]
    rng = SplitMix64(manifest.seed)
    # noise passes through the masked division, so the mask must sit above
    # the amplified noise floor; the clean default would flip the peak sign
    wsig = w.build(grid)
    origin = grid.count // 2
    peak = abs(ambiguity(wsig).values[origin, origin])
    threshold = pr["tau_scale"] * peak
    rows = []
    for trial in range(pr["trials"]):
        def noisy(m, sname, _t=trial):
            stream = rng.spawn(1000 * _t + sum(map(ord, sname)))
            sigma = math.sqrt(float(np.mean(np.abs(m.values) ** 2)))
            sigma *= 10.0 ** (-snr / 20.0)
            noise = sigma * np.array(stream.normals(m.values.size))
            vals = np.maximum(m.values.real + noise.reshape(m.values.shape),
                              0.0)
            return TFField(m.tfgrid, vals.astype(np.complex128))

        for r in _recovery_rows(grid, fx["signals"], w, noise=noisy,
                                threshold=threshold):
            rows.append([trial] + r + [tol])
    tables = {"recovery_noisy": (["trial", "signal", "rel_error",
                                  "masked_fraction", "threshold", "tol"],
                                 rows)}
    specs = [_assertion(
        "transforms.recovery-noisy",
        f"phase-aligned relative error below {tol:g} at {snr:g} dB "
        "(report only)",
        "recovery_noisy", "col_le_col", {"lhs": "rel_error", "rhs": "tol"},
        hard=False)]
    return tables, specs, {"snr_db": snr}


def _ladder_schedule(fx, pr):
    grid = _grid(fx)
    p, q, sigma = pr["p"], pr["q"], fx["sigma"]
    seed_sig = normalize_seed(gaussian(grid), p, q)
    sched = select_annulus_schedule(seed_sig, sigma, p, q,
                                    n_max=pr["n_max"])
    return sched, build_bumps(sched)


def _run_gaussian_ratio(manifest, fx, pr):
    sched, bumps = _ladder_schedule(fx, pr)
    p, q, delta = pr["p"], pr["q"], pr["delta"]
    den = XpSigmaNorm(p, fx["sigma"])
    results = []
    dich_rows = []
    for n in range(pr["n_max"]):
        pair = assemble_pair(sched, bumps, delta, n)
        results.append(instability_ratio(pair, q, den))
        d = dichotomy_check(pair, sched, bumps)
        dich_rows.append([n, d["min_far_distance"], d["floor"],
                          int(d["passed"])])
    ratio_rows = [[r.n, sched.radii[r.n], r.ratio, r.target,
                   int(r.saturated), int(r.degenerate)] for r in results]
    win = verified_window(results)
    lo, hi = win if win is not None else (-1, -1)
    win_rows = [[lo, hi, pr["window_contains"][0], pr["window_contains"][1],
                 pr["window_pin"][0], pr["window_pin"][1]]]
    window_rows = [row for row in ratio_rows if lo <= row[0] <= hi]
    growth = pr["growth"]
    tables = {
        "ratios": (["n", "j", "ratio", "target", "saturated", "degenerate"],
                   ratio_rows),
        "window_ratios": (["n", "j", "ratio", "target", "saturated",
                           "degenerate"], window_rows),
        "window": (["start", "end", "contain_lo", "contain_hi", "pin_start",
                    "pin_end"], win_rows),
        "dichotomy": (["n", "min_far_distance", "floor", "passed"],
                      dich_rows),
    }
    specs = [
        _assertion("forge.ratio-growth",
                   "every rung in the verified window clears its 2^n target",
                   "window_ratios", "col_ge_col",
                   {"lhs": "ratio", "rhs": "target"}),
        _assertion("forge.ratio-growth",
                   f"consecutive window ratios grow by at least {growth:g}",
                   "window_ratios", "growth_ge",
                   {"col": "ratio", "bound": growth}),
        _assertion("forge.ratio-growth",
                   "the verified window covers the required rungs",
                   "window", "col_le_col",
                   {"lhs": "start", "rhs": "contain_lo"}),
        _assertion("forge.ratio-growth",
                   "the verified window reaches the required top rung",
                   "window", "col_ge_col",
                   {"lhs": "end", "rhs": "contain_hi"}),
        _assertion("forge.window-pin",
                   "window start matches the pinned regression value",
                   "window", "equals_col",
                   {"lhs": "start", "rhs": "pin_start"}),
        _assertion("forge.window-pin",
                   "window end matches the pinned regression value",
                   "window", "equals_col", {"lhs": "end", "rhs": "pin_end"}),
        _assertion("forge.far-phase-floor",
                   "the far-phase floor is positive and respected",
                   "dichotomy", "all_true", {"col": "passed"}),
    ]
    extra = {"ladder": [float(j) for j in sched.radii], "delta": delta,
             "window": [lo, hi]}
    return tables, specs, extra


def _run_bump_bounds(manifest, fx, pr):
    p, q = pr["p"], pr["q"]
    grid = _grid(fx)
    bound_rows, slope_rows, report_rows = [], [], []
    for sigma in fx["sigmas"]:
        seed_sig = normalize_seed(gaussian(grid), p, q)
        sched = select_annulus_schedule(seed_sig, sigma, p, q,
                                        n_max=pr["n_max"])
        bumps = build_bumps(sched)
        report = verify_bump_bounds(sched, bumps)
        for r in report.rows:
            bound_rows.append([sigma, r.n, r.j, r.gub_lp_ratio,
                               r.gub_x_scaled, r.mcb_product, r.mtb_ratio,
                               r.sob_ratio, report.c_impl])
        for step, slope in enumerate(report.mtb_slopes()):
            slope_rows.append([sigma, step, slope, pr["slope_cap"]])
        report_rows.append([sigma, int(report.all_pass()), report.c_impl])
    tables = {
        "bounds": (["sigma", "n", "j", "gub_lp_ratio", "gub_x_scaled",
                    "mcb_product", "mtb_ratio", "sob_ratio", "c_impl"],
                   bound_rows),
        "slopes": (["sigma", "step", "slope", "cap"], slope_rows),
        "reports": (["sigma", "all_pass", "c_impl"], report_rows),
    }
    specs = [
        _assertion("forge.bump-estimates",
                   "translation invariance of the bump mass is exact to "
                   "1e-10", "bounds", "approx_value",
                   {"col": "gub_lp_ratio", "value": 1.0, "tol": 1e-10}),
        _assertion("forge.bump-estimates",
                   "the unit-ball mass product stays above 1",
                   "bounds", "all_ge",
                   {"col": "mcb_product", "bound": 1.0 - 1e-9}),
        _assertion("forge.bump-estimates",
                   "weighted bump mass respects the implementation constant",
                   "bounds", "col_le_col",
                   {"lhs": "gub_x_scaled", "rhs": "c_impl"}),
        _assertion("forge.bump-estimates",
                   "tail masses respect the implementation constant",
                   "bounds", "col_le_col",
                   {"lhs": "mtb_ratio", "rhs": "c_impl"}),
        _assertion("forge.bump-estimates",
                   "Sobolev masses respect the implementation constant",
                   "bounds", "col_le_col",
                   {"lhs": "sob_ratio", "rhs": "c_impl"}),
        _assertion("forge.bump-estimates",
                   "every per-sigma report passes as a whole",
                   "reports", "all_true", {"col": "all_pass"}),
        _assertion("forge.tail-decay",
                   f"tail masses decay by at least {-pr['slope_cap']:g} "
                   "octaves per rung", "slopes", "col_le_col",
                   {"lhs": "slope", "rhs": "cap"}),
    ]
    return tables, specs, {}


def _run_sobolev_ratio(manifest, fx, pr):
    grid = _grid(fx)
    spec = NormSpec(s=pr["s"], p=pr["p"], r=pr["r"], q=pr["q"])
    w = parse_window(fx["window"])
    f = parse_window(fx["signal"]).build(grid)
    fam = stft_instability_family(f, w, pr["closeness"], spec,
                                  pr["n_max"], pr["delta"])
    den = SobolevNorm(pr["s"], pr["p"], pr["r"])
    va = stft(fam.perturbed, w)
    ratio_rows, lp_rows = [], []
    members = [("base", fam.base)] + [
        (f"flip{k}", fam.flipped[k]) for k in range(pr["n_max"])]
    for k in range(pr["n_max"]):
        vb = stft(fam.flipped[k], w)
        res = field_instability_ratio(va, vb, k, pr["q"], den)
        ratio_rows.append([k, fam.ladder[k], fam.scales[k], res.ratio,
                           res.target, int(res.saturated),
                           int(res.degenerate)])
    am = _modulus_field(va)
    for label, sig in members:
        bm = _modulus_field(stft(sig, w))
        for row in lp_reduction_rows(field_difference(bm, am), am, bm,
                                     pr["s"], pr["p"]):
            lp_rows.append([label, row["j"], row["lhs"], row["low_term"],
                            row["high_term"], row["constant_needed"],
                            pr["lp_cap"]])
    tables = {
        "ratios": (["k", "a", "scale", "ratio", "target", "saturated",
                    "degenerate"], ratio_rows),
        "closeness": (["closeness", "cap"],
                      [[fam.closeness, pr["closeness"]]]),
        "band_split": (["pair", "j", "lhs", "low_term", "high_term",
                        "constant_needed", "cap"], lp_rows),
    }
    specs = [
        _assertion("forge.sobolev-ratio",
                   "every transform-side rung clears its 2^k target",
                   "ratios", "col_ge_col", {"lhs": "ratio", "rhs": "target"}),
        _assertion("forge.family-closeness",
                   "the perturbed transform stays inside the closeness "
                   "budget", "closeness", "col_le_col",
                   {"lhs": "closeness", "rhs": "cap"}),
        _assertion("norms.band-split",
                   "band-split constants stay under the pinned cap",
                   "band_split", "col_le_col",
                   {"lhs": "constant_needed", "rhs": "cap"}),
    ]
    extra = {"delta": fam.delta, "ladder": [float(a) for a in fam.ladder]}
    return tables, specs, extra


def _run_lp_reduction(manifest, fx, pr):
    grid = _grid(fx)
    w = parse_window(fx["window"])
    base = gaussian(grid)
    others = [
        ("hermite1", hermite(grid, 1)),
        ("hermite2", hermite(grid, 2)),
        ("shifted", translate(base, pr["shift"])),
        ("modulated", modulate(base, pr["modulation"])),
    ]
    am = _modulus_field(stft(base, w))
    rows = []
    for label, sig in others:
        bm = _modulus_field(stft(sig, w))
        for row in lp_reduction_rows(field_difference(bm, am), am, bm,
                                     pr["s"], pr["p"]):
            rows.append([label, row["j"], row["lhs"], row["low_term"],
                         row["high_term"], row["constant_needed"],
                         pr["lp_cap"]])
    tables = {"band_split": (["pair", "j", "lhs", "low_term", "high_term",
                              "constant_needed", "cap"], rows)}
    specs = [_assertion(
        "norms.band-split",
        "band-split constants stay under the pinned cap on modulus pairs",
        "band_split", "col_le_col", {"lhs": "constant_needed", "rhs": "cap"})]
    return tables, specs, {}


def _gaussian_density(tg: TFGrid, rate: float) -> TFField:
    rr = tg.xmesh() ** 2 + tg.wmesh() ** 2
    return TFField(tg, np.exp(-rate * rr).astype(np.complex128))


def _run_cheeger_gaussian(manifest, fx, pr):
    sweep = pr["sweep"]
    value_rows, drift_rows = [], []
    densities = [("half_rate", 0.5 * math.pi, math.sqrt(2.0)),
                 ("unit_rate", math.pi, 2.0)]
    for label, rate, target in densities:
        values = []
        for count in fx["counts"]:
            g = make_grid(fx["length"], count)
            tg = TFGrid(g, g)
            rep = cheeger_estimate(_gaussian_density(tg, rate), **sweep)
            rel = abs(rep.value - target) / target
            value_rows.append([label, count, rep.value, target, rel,
                               pr["rel_tol"], rep.family])
            values.append(rep.value)
        drift = abs(values[-1] - values[0]) / values[-1]
        drift_rows.append([label, values[0], values[-1], drift,
                           pr["drift_tol"]])
    tables = {
        "closed_form": (["density", "count", "value", "target", "rel_err",
                         "tol", "family"], value_rows),
        "refinement": (["density", "coarse", "fine", "drift", "tol"],
                       drift_rows),
    }
    specs = [
        _assertion("geometry.cheeger-closed-form",
                   "estimates land within tolerance of 2*sqrt(rate/pi)",
                   "closed_form", "col_le_col",
                   {"lhs": "rel_err", "rhs": "tol"}),
        _assertion("geometry.cheeger-refinement",
                   "doubling the grid moves the estimate less than the "
                   "drift tolerance", "refinement", "col_le_col",
                   {"lhs": "drift", "rhs": "tol"}),
        _assertion("geometry.cheeger-closed-form",
                   "estimates are finite and positive",
                   "closed_form", "all_gt", {"col": "value", "bound": 0.0}),
    ]
    return tables, specs, {}


def _run_cheeger_trend(manifest, fx, pr):
    sched, bumps = _ladder_schedule(fx, pr)
    delta = pr["delta"]
    sweep = pr["sweep"]
    rows = []
    for n in range(pr["n_max"] + 1):
        sig = assemble_pair(sched, bumps, delta, n).core if n else sched.seed
        W = _modulus_field(stft(sig))
        rep = cheeger_estimate(W, **sweep)
        rows.append([n, rep.value, rep.family])
    tables = {"trend": (["n", "value", "family"], rows)}
    specs = [
        _assertion("geometry.cheeger-decay",
                   "the Cheeger value never increases along the ladder",
                   "trend", "nonincreasing", {"col": "value"}),
        _assertion("geometry.cheeger-decay",
                   f"the last rung sits at most {pr['drop']:g} of the first",
                   "trend", "last_le_first_scaled",
                   {"col": "value", "scale": pr["drop"]}),
    ]
    return tables, specs, {"ladder": [float(j) for j in sched.radii]}


_GLUE_TRIPLES = [
    ("disk", 2.5, "x", 0.5), ("disk", 2.5, "x", 1.0),
    ("disk", 2.5, "w", 0.5), ("disk", 2.5, "w", 1.0),
    ("disk", 3.0, "x", 0.5), ("disk", 3.0, "x", 1.0),
    ("disk", 3.0, "w", 0.5), ("disk", 3.0, "w", 1.0),
    ("disk", 3.5, "x", 1.0), ("disk", 3.5, "w", 1.0),
]


def _half_masks(tg: TFGrid, omega: DomainMask, axis: str, overlap: float):
    proj = tg.xmesh() if axis == "x" else tg.wmesh()
    lo = omega.inside & (np.broadcast_to(proj, omega.inside.shape)
                         <= overlap)
    hi = omega.inside & (np.broadcast_to(proj, omega.inside.shape)
                         >= -overlap)
    return DomainMask(tg, lo), DomainMask(tg, hi)


def _stability_lower_bound(vf, adversary_fields, mask, r):
    best = 0.0
    for vg in adversary_fields:
        num = phase_inf_distance(vf, vg, LqNorm(2.0),
                                 domain=mask.inside).distance
        diff = TFField(vf.tfgrid,
                       (np.abs(vf.values)
                        - np.abs(vg.values)).astype(np.complex128))
        den = masked_h1_norm(diff, mask.inside, r=r)
        if den > 0.0:
            best = max(best, num / den)
    return best


def _run_gluing(manifest, fx, pr):
    grid = _grid(fx)
    w = parse_window(fx["window"])
    f = parse_window(fx["signal"]).build(grid)
    vf = stft(f, w)
    tg = vf.tfgrid
    rng = SplitMix64(manifest.seed)
    adversaries = [
        Signal(grid, f.values + 0.05 * hermite(grid, k).values)
        for k in (1, 2, 3)
    ]
    adversaries.append(gaussian(grid, center=pr["shift"]))
    rough = _smooth_signal(grid, rng.spawn(99), kmax=8, decay=0.35)
    rough_scale = 0.05 / _signal_l2(rough)
    adversaries.append(Signal(grid, f.values + rough_scale * rough.values))
    fields = [stft(g, w) for g in adversaries]
    tol = pr["slack_tol"]
    rows = []
    for idx, (family, radius, axis, overlap) in enumerate(_GLUE_TRIPLES):
        omega = DomainMask.disk(tg, 0j, radius)
        a, b = _half_masks(tg, omega, axis, overlap)
        c_omega = _stability_lower_bound(vf, fields, omega, pr["r"])
        c_a = _stability_lower_bound(vf, fields, a, pr["r"])
        c_b = _stability_lower_bound(vf, fields, b, pr["r"])
        lam = connectivity(vf, a, b)
        bound = gluing_bound(c_a, c_b, lam)
        rows.append([idx, family, radius, axis, overlap, c_omega, c_a, c_b,
                     lam, bound, tol])
    tables = {"triples": (["idx", "family", "radius", "axis", "overlap",
                           "c_omega_lb", "c_a_lb", "c_b_lb", "lambda",
                           "bound", "slack_tol"], rows)}
    specs = [
        _assertion("geometry.gluing-soundness",
                   "the measured whole-domain constant never exceeds the "
                   "glued bound", "triples", "col_le_col",
                   {"lhs": "c_omega_lb", "rhs": "bound",
                    "scale": 1.0 + tol}),
        _assertion("geometry.gluing-formula",
                   "the stored bound equals the combination of its inputs",
                   "triples", "gluing_formula",
                   {"c_a": "c_a_lb", "c_b": "c_b_lb", "lam": "lambda",
                    "bound": "bound"}),
        _assertion("geometry.lambda-range",
                   "connectivity quotients are positive",
                   "triples", "all_ge", {"col": "lambda", "bound": 0.0}),
        _assertion("geometry.lambda-range",
                   "connectivity quotients stay at or below one half",
                   "triples", "all_le", {"col": "lambda", "bound": 0.5}),
    ]
    return tables, specs, {}


def _run_poincare_square(manifest, fx, pr):
    grid = _grid(fx)
    tg = TFGrid(grid, grid)
    h = grid.dx
    side = pr["cells"] * h
    mask = DomainMask.rectangle(tg, 0.0, side - h / 2, 0.0, side - h / 2)
    c, rep = poincare_constant(mask, return_report=True)
    target = math.pi ** 2 / side ** 2
    square_rows = [[mask.cell_count, pr["cells"] ** 2, rep["mu1"], target,
                    abs(rep["mu1"] - target) / target, pr["rel_tol"]]]
    left = DomainMask.rectangle(tg, 0.0, 1.0, 0.0, 1.0)
    right = DomainMask.rectangle(tg, 3.0, 4.0, 0.0, 1.0)
    split = DomainMask(tg, left.inside | right.inside)
    c2, rep2 = poincare_constant(split, return_report=True)
    disc_rows = [[int(math.isinf(c2)), rep2["mu1"]]]
    tables = {
        "square": (["cells", "expected_cells", "mu1", "target", "rel_err",
                    "tol"], square_rows),
        "disconnected": (["is_inf", "mu1"], disc_rows),
    }
    specs = [
        _assertion("geometry.neumann-gap",
                   "the unit-square spectral gap lands within tolerance of "
                   "pi^2", "square", "col_le_col",
                   {"lhs": "rel_err", "rhs": "tol"}),
        _assertion("geometry.neumann-gap",
                   "the mask resolves the intended lattice exactly",
                   "square", "equals_col",
                   {"lhs": "cells", "rhs": "expected_cells"}),
        _assertion("geometry.disconnected-inf",
                   "a split domain reports an infinite constant",
                   "disconnected", "all_true", {"col": "is_inf"}),
    ]
    return tables, specs, {"constant": c, "side": side}


def _run_certificate(manifest, fx, pr):
    grid = _grid(fx)
    _require_square(grid, "polynomial certificates")
    tg = tf_grid_of(grid)
    mask = DomainMask.disk(tg, 0j, pr["disk_radius"])
    rng = SplitMix64(manifest.seed)
    lo, hi = pr["pert_range"]

    def draw(r):
        # two or three roots each; isolated single roots sit right at the
        # edge of what the unit-constant bound covers, so they live in the
        # stress table below instead of the asserted family
        n_roots = 2 + r.next_u64() % 2
        roots, pert = [], []
        for _ in range(n_roots):
            root = complex(3.0 * r.uniform() - 1.5, 3.0 * r.uniform() - 1.5)
            mag = lo + (hi - lo) * r.uniform()
            ang = 2.0 * math.pi * r.uniform()
            roots.append(root)
            pert.append(root + mag * complex(math.cos(ang), math.sin(ang)))
        return roots, pert

    rows = []
    for i in range(pr["fixtures"]):
        roots, pert = draw(rng.spawn(i + 1))
        f1, _ = fock_polynomial_field(roots, tg)
        f2, _ = fock_polynomial_field(pert, tg)
        cert = stability_certificate(f1, f2, mask,
                                     excise_cells=pr["excise_cells"])
        rows.append([i, len(roots), cert.t1, cert.t2, cert.t3,
                     cert.poincare, cert.distance, cert.bound,
                     int(cert.sound), cert.excised_cells])
    f1, _ = fock_polynomial_field([], tg)
    f2, _ = fock_polynomial_field([0.3 + 0.2j], tg)
    cert = stability_certificate(f1, f2, mask,
                                 excise_cells=pr["excise_cells"])
    const_rows = [[cert.t1, cert.t2, cert.t3, pr["t3_rel_cap"] * cert.t1]]
    # display only: single-root pairs are the marginal case for the
    # unit-constant bound, and the slack column records where it dips
    # below parity as the perturbation grows
    stress_rows = []
    for i, mag in enumerate(pr["stress_magnitudes"]):
        r = rng.spawn(10_000 + i)
        root = complex(3.0 * r.uniform() - 1.5, 3.0 * r.uniform() - 1.5)
        ang = 2.0 * math.pi * r.uniform()
        f1, _ = fock_polynomial_field([root], tg)
        f2, _ = fock_polynomial_field(
            [root + mag * complex(math.cos(ang), math.sin(ang))], tg)
        cert = stability_certificate(f1, f2, mask,
                                     excise_cells=pr["excise_cells"])
        stress_rows.append([mag, cert.distance, cert.bound,
                            cert.bound / cert.distance
                            if cert.distance > 0 else float("inf")])
    tables = {
        "certificates": (["idx", "n_roots", "t1", "t2", "t3", "poincare",
                          "distance", "bound", "sound", "excised"], rows),
        "constant_field": (["t1", "t2", "t3", "t3_cap"], const_rows),
        "stress": (["pert", "distance", "bound", "slack"], stress_rows),
    }
    specs = [
        _assertion("geometry.certificate-soundness",
                   "the bound dominates the measured distance on every "
                   "fixture", "certificates", "col_ge_col",
                   {"lhs": "bound", "rhs": "distance"}),
        _assertion("geometry.certificate-soundness",
                   "every certificate reports itself sound",
                   "certificates", "all_true", {"col": "sound"}),
        _assertion("geometry.log-derivative-vanishes",
                   "the coupling term is machine zero for a constant "
                   "holomorphic part", "constant_field", "col_le_col",
                   {"lhs": "t3", "rhs": "t3_cap"}),
    ]
    slack = min(r[7] / r[6] for r in rows if r[6] > 0)
    stress_slack = min(r[3] for r in stress_rows)
    return tables, specs, {"min_slack": slack,
                           "stress_min_slack": stress_slack}


def _run_modulus_threshold(manifest, fx, pr):
    grid = _grid(fx)
    rng = SplitMix64(manifest.seed)
    s_lo, s_hi = pr["s_below"], pr["s_above"]
    cap = pr["contraction_cap"]
    random_rows = []
    for i in range(pr["fields"]):
        sig = _smooth_signal(grid, rng.spawn(i + 1), pr["kmax"],
                             pr["decay"])
        random_rows.append([i, modulus_sobolev_ratio(sig, s_lo, pr["p"]),
                            cap])
    below_rows, above_rows = [], []
    for m in pr["crease_modes"]:
        x = grid.points()
        crease = Signal(grid, np.sin(2.0 * np.pi * m * x / grid.length)
                        .astype(np.complex128))
        below_rows.append([m, modulus_sobolev_ratio(crease, s_lo, pr["p"])])
        above_rows.append([m, modulus_sobolev_ratio(crease, s_hi, pr["p"]),
                           cap])
    tables = {
        "random_fields": (["idx", "ratio", "cap"], random_rows),
        "crease_below": (["m", "ratio"], below_rows),
        "crease_above": (["m", "ratio", "floor"], above_rows),
    }
    specs = [
        _assertion("norms.modulus-contraction",
                   f"smooth-field modulus ratios stay under {cap:g} at "
                   f"s = {s_lo:g}", "random_fields", "max_lt",
                   {"col": "ratio", "bound": cap}),
        _assertion("norms.modulus-threshold-sharp",
                   f"the crease family exceeds {cap:g} at s = {s_hi:g}",
                   "crease_above", "max_gt", {"col": "ratio", "bound": cap}),
    ]
    return tables, specs, {}


def _run_disjointness(manifest, fx, pr):
    sched, bumps = _ladder_schedule(fx, pr)
    delta, c_link = pr["delta"], pr["c_link"]
    rows, gapless_rows = [], []
    # the witness regime needs an annulus gap between core and tail; at
    # n = 0 the tail starts right at the seed's bulk, so that rung is
    # reported but not held to the geometric cap
    for n in range(pr["n_max"]):
        pair = assemble_pair(sched, bumps, delta, n)
        rho = disjointness_witness(pair.k, pair.core, pair.tail)
        if n == 0:
            gapless_rows.append([n, rho])
        else:
            rows.append([n, rho, c_link * 4.0 ** (-n)])
    grid = sched.seed.grid
    g = gaussian(grid)
    half = grid.points() < 0.0
    left = Signal(grid, np.where(half, g.values, 0.0))
    right = Signal(grid, np.where(~half, g.values, 0.0))
    edge_rows = [
        ["disjoint_halves",
         disjointness_witness(Signal(grid, left.values + right.values),
                              left, right), 0.0],
        ["equal_parts",
         disjointness_witness(Signal(grid, 2.0 * g.values), g, g), 1.0],
    ]
    tables = {
        "decay": (["n", "rho", "cap"], rows),
        "gapless": (["n", "rho"], gapless_rows),
        "edges": (["case", "rho", "expected"], edge_rows),
    }
    specs = [
        _assertion("norms.disjointness-decay",
                   f"witnesses stay under {c_link:g} * 4^-n from the first "
                   "gapped rung", "decay", "col_le_col",
                   {"lhs": "rho", "rhs": "cap"}),
        _assertion("norms.disjointness-decay",
                   "witnesses decay at least geometrically rung to rung",
                   "decay", "geometric_decay",
                   {"col": "rho", "factor": 0.25}),
        _assertion("norms.disjointness-edge",
                   "disjoint supports give exactly 0 and equal parts "
                   "exactly 1", "edges", "equals_col",
                   {"lhs": "rho", "rhs": "expected"}),
    ]
    return tables, specs, {"ladder": [float(j) for j in sched.radii]}


def _run_window_ratio(manifest, fx, pr):
    grid = _grid(fx)
    _require_square(grid, "window comparison")
    tg = tf_grid_of(grid)
    bracket_max = float(japanese_bracket(
        np.hypot(tg.xmesh(), tg.wmesh())).max())
    same = window_comparison_ratio(parse_window("gaussian"),
                                   parse_window("gaussian"), grid)
    ident_rows = [["gaussian", "gaussian", same.sup, bracket_max,
                   len(same.zeros)]]
    bounded = window_comparison_ratio(parse_window(fx["other"]),
                                      parse_window("gaussian"), grid)
    bounded_rows = [[fx["other"], "gaussian", bounded.sup,
                     pr["bounded_cap"], len(bounded.zeros)]]
    flagged = window_comparison_ratio(parse_window("gaussian"),
                                      parse_window(fx["other"]), grid)
    flagged_rows = [["gaussian", fx["other"], flagged.sup,
                     len(flagged.zeros)]]
    tables = {
        "identical": (["phi", "big_phi", "sup", "expected", "n_zeros"],
                      ident_rows),
        "bounded": (["phi", "big_phi", "sup", "cap", "n_zeros"],
                    bounded_rows),
        "flagged": (["phi", "big_phi", "sup", "n_zeros"], flagged_rows),
    }
    specs = [
        _assertion("transforms.window-comparison",
                   "equal windows reproduce the bracket sup exactly",
                   "identical", "equals_col",
                   {"lhs": "sup", "rhs": "expected"}),
        _assertion("transforms.window-comparison",
                   "equal windows report no zero locus",
                   "identical", "equals_value", {"col": "n_zeros",
                                                 "value": 0}),
        _assertion("transforms.window-comparison",
                   "a faster-decaying reference gives a finite pinned sup "
                   "with no zeros", "bounded", "col_le_col",
                   {"lhs": "sup", "rhs": "cap"}),
        _assertion("transforms.window-comparison",
                   "the bounded case reports no zero locus",
                   "bounded", "equals_value", {"col": "n_zeros",
                                               "value": 0}),
        _assertion("transforms.window-comparison",
                   "a vanishing reference ambiguity is flagged by its zero "
                   "locus", "flagged", "all_ge",
                   {"col": "n_zeros", "bound": 1}),
        _assertion("transforms.window-comparison",
                   "the flagged sup stays finite on the lattice",
                   "flagged", "all_finite", {"col": "sup"}),
    ]
    return tables, specs, {}


# ---------------------------------------------------------------------------
# registry


@dataclass(frozen=True)
class _ExperimentDef:
    id: str
    description: str
    fixture: dict
    params: dict
    reduced: dict
    runner: object


_REGISTRY: dict = {}


def _register(id, description, fixture, params, runner, reduced=None):
    _REGISTRY[id] = _ExperimentDef(id, description, fixture, params,
                                   reduced or {}, runner)


_register(
    "isometry-sweep",
    "L2 norm preservation of the transform on random signals",
    {"length": 32.0, "count": 512},
    {"trials": 20, "tol": 1e-4},
    _run_isometry,
    reduced={"params": {"trials": 5}},
)

_register(
    "covariance-lattice",
    "shift covariance on an on-grid time-frequency lattice",
    {"length": 16.0, "count": 256, "windows": ["gaussian", "hermite:1"]},
    {"span": 2, "stride": 8, "tol": 1e-8},
    _run_covariance,
)

_register(
    "ambiguity-relation",
    "measurement spectrum versus windowed ambiguity product",
    {"length": 16.0, "count": 256,
     "windows": ["gaussian", "hermite:1", "hermite:2"],
     "signals": ["gaussian", "hermite:1", "hermite:2", "random"]},
    {"tol": 1e-3},
    _run_ambiguity,
)

_register(
    "recover-noiseless",
    "phase retrieval by ambiguity division without noise",
    {"length": 16.0, "count": 256, "window": "gaussian",
     "signals": ["gaussian", "hermite:1", "hermite:2"]},
    {"tol": 1e-2},
    _run_recover_noiseless,
)

_register(
    "recover-noisy",
    "phase retrieval by ambiguity division at finite SNR",
    {"length": 16.0, "count": 256, "window": "gaussian",
     "signals": ["gaussian", "hermite:1", "hermite:2"]},
    {"tol": 1e-1, "snr_db": 30.0, "trials": 2, "tau_scale": 1e-2},
    _run_recover_noisy,
    reduced={"params": {"trials": 1}},
)

_register(
    "prop21-gaussian-ratio",
    "instability ratio ladder of the gaussian seed",
    {"length": 256.0, "count": 2048, "sigma": 0.0},
    {"p": 2.0, "q": 2.0, "delta": 0.1, "n_max": 5, "growth": 1.8,
     "window_contains": [2, 4], "window_pin": [0, 4]},
    _run_gaussian_ratio,
    reduced={"fixture": {"length": 128.0, "count": 1024},
             "params": {"n_max": 4, "window_contains": [2, 3],
                        "window_pin": [0, 3]}},
)

_register(
    "lemma22-bounds",
    "the four bump estimates across weights",
    {"length": 256.0, "count": 2048, "sigmas": [0.0, 1.0]},
    {"p": 2.0, "q": 2.0, "n_max": 5, "slope_cap": -3.5},
    _run_bump_bounds,
    reduced={"fixture": {"length": 128.0, "count": 1024},
             "params": {"n_max": 4}},
)

_register(
    "thm15-sobolev-ratio",
    "transform-side instability family with Sobolev denominators",
    {"length": 16.0, "count": 2048, "window": "gaussian",
     "signal": "gaussian"},
    {"s": 1.0, "p": 2.0, "r": 1.0, "q": 2.0, "n_max": 3, "delta": 0.1,
     "closeness": 0.1, "lp_cap": 4.0},
    _run_sobolev_ratio,
    reduced={"fixture": {"count": 1024}, "params": {"n_max": 2}},
)

_register(
    "lp-reduction",
    "band-split control of modulus differences",
    {"length": 16.0, "count": 256, "window": "gaussian"},
    {"s": 1.0, "p": 2.0, "shift": 1.0, "modulation": 2.0, "lp_cap": 4.0},
    _run_lp_reduction,
)

_register(
    "cheeger-gaussian",
    "Cheeger quotients of gaussian densities against closed forms",
    {"length": 16.0, "counts": [256, 512]},
    {"rel_tol": 0.01, "drift_tol": 0.10, "sweep": {}},
    _run_cheeger_gaussian,
    reduced={"fixture": {"counts": [128, 256]},
             "params": {"sweep": {"thresholds": 128, "centers": 5,
                                  "radii": 8, "directions": 32,
                                  "offsets": 17}}},
)

_register(
    "cheeger-trend",
    "Cheeger decay along the instability ladder",
    {"length": 128.0, "count": 1024, "sigma": 0.0},
    {"p": 2.0, "q": 2.0, "delta": 0.1, "n_max": 4, "drop": 0.25,
     "sweep": {"thresholds": 64, "centers": 5, "radii": 8,
               "directions": 32, "offsets": 17}},
    _run_cheeger_trend,
    reduced={"params": {"n_max": 2}},
)

_register(
    "connectivity-gluing",
    "glued stability bounds on overlapping half-domains",
    {"length": 16.0, "count": 256, "window": "gaussian",
     "signal": "gaussian"},
    {"r": 0.0, "shift": 0.1, "slack_tol": 1e-6},
    _run_gluing,
    reduced={},
)

_register(
    "poincare-square",
    "Neumann spectral gap of the unit square",
    {"length": 16.0, "count": 2048},
    {"cells": 128, "rel_tol": 0.02},
    _run_poincare_square,
    reduced={"fixture": {"count": 1024}, "params": {"cells": 64}},
)

_register(
    "certificate-polynomial",
    "region stability certificates on polynomial holomorphic fields",
    {"length": 16.0, "count": 256},
    {"fixtures": 20, "disk_radius": 2.5, "excise_cells": 3,
     "pert_range": [0.02, 0.08], "t3_rel_cap": 1e-12,
     "stress_magnitudes": [0.05, 0.1, 0.15, 0.2, 0.3]},
    _run_certificate,
    reduced={"params": {"fixtures": 6}},
)

_register(
    "modulus-threshold",
    "modulus contraction below the Sobolev threshold and its failure above",
    {"length": 16.0, "count": 256},
    {"s_below": 1.0, "s_above": 1.6, "p": 2.0, "fields": 100, "kmax": 8,
     "decay": 0.35, "contraction_cap": 1.0,
     "crease_modes": [4, 8, 16, 32, 64]},
    _run_modulus_threshold,
    reduced={"params": {"fields": 25}},
)

_register(
    "disjointness-link",
    "geometric decay of overlap witnesses along the ladder",
    {"length": 256.0, "count": 2048, "sigma": 0.0},
    {"p": 2.0, "q": 2.0, "delta": 0.1, "n_max": 5, "c_link": 1e-9},
    _run_disjointness,
    reduced={"fixture": {"length": 128.0, "count": 1024},
             "params": {"n_max": 4}},
)

_register(
    "window-ratio",
    "window-comparison ratio fields: exact, bounded, and flagged cases",
    {"length": 16.0, "count": 256, "other": "hermite:1"},
    {"bounded_cap": 50000.0},
    _run_window_ratio,
)


def experiment_ids() -> list:
    return list(_REGISTRY)


def list_experiments() -> list:
    return [{"id": d.id, "description": d.description}
            for d in _REGISTRY.values()]


def default_manifest(id: str, seed: int = 0, out_dir: str | None = None,
                     reduced: bool = False) -> ExperimentManifest:
    if id not in _REGISTRY:
        known = ", ".join(_REGISTRY)
        raise ValueError(f"unknown experiment id {id!r}; known ids: {known}")
    d = _REGISTRY[id]
    fixture = dict(d.fixture)
    params = dict(d.params)
    if reduced:
        fixture.update(d.reduced.get("fixture", {}))
        params.update(d.reduced.get("params", {}))
    return ExperimentManifest(id=id, fixture=fixture, params=params,
                              seed=seed, out_dir=out_dir)


def run(manifest: ExperimentManifest) -> ExperimentResult:
    """Execute one experiment and evaluate its assertions.

    Writes tables, plot data, and the summary when the manifest carries an
    output directory. Raises ValueError for unknown ids or infeasible
    fixtures; assertion failures never raise, they are recorded.
    """
    if manifest.id not in _REGISTRY:
        known = ", ".join(_REGISTRY)
        raise ValueError(
            f"unknown experiment id {manifest.id!r}; known ids: {known}")
    d = _REGISTRY[manifest.id]
    start = time.perf_counter()
    tables, specs, extra = d.runner(manifest, manifest.fixture,
                                    manifest.params)
    wallclock = time.perf_counter() - start
    assertions = []
    for spec in specs:
        entry = dict(spec)
        entry["passed"] = _evaluate(tables, spec)
        assertions.append(entry)
    passed = all(a["passed"] for a in assertions if a["hard"])
    summary = {"description": d.description, **extra}
    result = ExperimentResult(id=manifest.id, manifest=manifest,
                              tables=tables, assertions=assertions,
                              summary=summary, passed=passed,
                              wallclock=wallclock)
    if manifest.out_dir is not None:
        write_result(result, manifest.out_dir)
    return result
