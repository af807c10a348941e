"""Command line front door.

Twelve subcommands split into fixture generation (gen), single operations
on dumped signals and fields (stft, norm, distance, instability, cheeger,
poincare, glue, recover), and the experiment harness (run, list, verify).

Exit codes: 0 success, 1 failed assertion or computation, 2 usage error.
Diagnostics go to stderr; data goes to stdout or to --out files. The only
environment variable read is STFTLAB_THREADS, an integer cap on BLAS
parallelism applied before the numerical modules load.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

_THREAD_VARS = (
    "OMP_NUM_THREADS",
    "OPENBLAS_NUM_THREADS",
    "MKL_NUM_THREADS",
    "VECLIB_MAXIMUM_THREADS",
    "NUMEXPR_NUM_THREADS",
)


class _Usage(Exception):
    """Bad invocation: malformed flag value, missing file, unknown key."""


def _apply_thread_cap() -> None:
    raw = os.environ.get("STFTLAB_THREADS")
    if raw is None:
        return
    try:
        n = int(raw)
    except ValueError:
        n = 0
    if n < 1:
        raise _Usage(f"STFTLAB_THREADS must be a positive integer, "
                     f"got {raw!r}")
    for var in _THREAD_VARS:
        os.environ[var] = str(n)


def _fail(msg: str) -> int:
    print(f"stftlab: {msg}", file=sys.stderr)
    return 1


def _jsonable(v):
    if isinstance(v, float) and not math.isfinite(v):
        return repr(v)
    if isinstance(v, complex):
        return [_jsonable(v.real), _jsonable(v.imag)]
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return v


def _emit(payload: dict, out: str | None) -> None:
    text = json.dumps(_jsonable(payload), indent=2) + "\n"
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _flag(name: str, convert, raw):
    try:
        return convert(raw)
    except ValueError as e:
        raise _Usage(f"argument {name}: {e}") from None


def _load_dump(path: str, flag: str):
    from . import io

    try:
        return io.load(path)
    except FileNotFoundError:
        raise _Usage(f"argument {flag}: no such file {path!r}") from None
    except ValueError as e:
        raise _Usage(f"argument {flag}: {e}") from None


def _load_operand(path: str, flag: str):
    obj = _load_dump(path, flag)
    if isinstance(obj, tuple):
        raise _Usage(f"argument {flag}: {path!r} holds a mask, "
                     f"expected a signal or field dump")
    return obj


def _load_mask(path: str, flag: str):
    from .geometry import DomainMask
    from .grids import TFGrid  # noqa: F401  (type of the second element)

    obj = _load_dump(path, flag)
    if not isinstance(obj, tuple):
        raise _Usage(f"argument {flag}: {path!r} is not a mask dump")
    values, tg = obj
    return DomainMask(tg, values)


# ---------------------------------------------------------------------------
# subcommand handlers


def _cmd_gen(args) -> int:
    from . import io
    from .grids import gaussian, hermite, make_grid, modulate, translate, Signal
    from .rng import SplitMix64

    grid = _flag("--L/--N", lambda _: make_grid(args.L, args.N), None)
    kind, _, arg = args.kind.partition(":")
    if kind == "gaussian" and not arg:
        sig = gaussian(grid, center=args.center, modulation=args.modulation)
    elif kind == "hermite":
        order = _flag("kind", int, arg or "0")
        sig = hermite(grid, order)
        if args.center:
            sig = translate(sig, args.center)
        if args.modulation:
            sig = modulate(sig, args.modulation)
    elif kind == "random" and not arg:
        rng = SplitMix64(args.seed)
        import numpy as np

        re = np.array(rng.normals(grid.count))
        im = np.array(rng.normals(grid.count))
        sig = Signal(grid, (re + 1j * im) / math.sqrt(2.0))
    else:
        raise _Usage(f"argument kind: unknown fixture {args.kind!r}; "
                     f"expected gaussian, hermite:N or random")
    if args.format == "bin":
        if args.out is None:
            raise _Usage("argument --out: required for binary output")
        io.dump_signal(sig, args.out)
    else:
        if args.out is None:
            raise _Usage("argument --out: required for csv output")
        io.signal_to_csv(sig, args.out)
    return 0


def _cmd_stft(args) -> int:
    from . import io
    from .transforms import parse_window, phaseless, stft

    sig = _load_operand(args.signal, "signal")
    from .grids import Signal

    if not isinstance(sig, Signal):
        raise _Usage(f"argument signal: {args.signal!r} is not a signal dump")
    window = _flag("--window", parse_window, args.window)
    field = phaseless(sig, window) if args.phaseless else stft(sig, window)
    io.dump_field(field, args.out)
    return 0


def _cmd_norm(args) -> int:
    from .norms import parse_norm

    obj = _load_operand(args.operand, "operand")
    norm = _flag("--norm", parse_norm, args.norm)
    _emit({"norm": norm(obj), "label": norm.label}, args.out)
    return 0


def _cmd_distance(args) -> int:
    from .norms import parse_norm, phase_inf_distance

    f = _load_operand(args.f, "f")
    g = _load_operand(args.g, "g")
    norm = _flag("--norm", parse_norm, args.norm)
    res = phase_inf_distance(f, g, norm)
    _emit({"distance": res.distance, "lambda": res.phase,
           "degenerate": res.degenerate, "method": res.method}, args.out)
    return 0


def _cmd_instability(args) -> int:
    from .forge import (assemble_pair, build_bumps, instability_ratio,
                        normalize_seed, select_annulus_schedule)
    from .grids import gaussian, make_grid
    from .norms import XpSigmaNorm

    grid = make_grid(args.L, args.N)
    seed_sig = normalize_seed(gaussian(grid), args.p, args.q)
    sched = select_annulus_schedule(seed_sig, args.sigma, args.p, args.q,
                                    n_max=args.n)
    bumps = build_bumps(sched)
    den = XpSigmaNorm(args.p, args.sigma)
    sys.stdout.write("n,j,ratio,target\n")
    for n in range(args.n):
        pair = assemble_pair(sched, bumps, args.delta, n)
        r = instability_ratio(pair, args.q, den)
        sys.stdout.write(f"{r.n},{sched.radii[r.n]},{r.ratio!r},"
                         f"{r.target!r}\n")
    return 0


def _cmd_cheeger(args) -> int:
    from .geometry import cheeger_estimate

    field = _load_operand(args.density, "density")
    from .grids import TFField

    if not isinstance(field, TFField):
        raise _Usage(f"argument density: {args.density!r} is not a "
                     f"field dump")
    report = cheeger_estimate(field, thresholds=args.thresholds,
                              centers=args.centers, radii=args.radii,
                              directions=args.directions,
                              offsets=args.offsets,
                              smoothing=args.smoothing)
    _emit({"value": report.value, "family": report.family,
           "params": report.params, "total_mass": report.total_mass},
          args.out)
    return 0


def _parse_disk(raw: str):
    parts = raw.split(",")
    if len(parts) != 3:
        raise ValueError(f"expected CX,CY,R, got {raw!r}")
    cx, cy, r = (float(t) for t in parts)
    return complex(cx, cy), r


def _cmd_poincare(args) -> int:
    from .geometry import DomainMask, poincare_constant
    from .grids import make_grid, tf_grid_of

    if (args.mask is None) == (args.disk is None):
        raise _Usage("argument mask: give a mask dump or --disk CX,CY,R "
                     "with --L/--N, not both")
    if args.mask is not None:
        mask = _load_mask(args.mask, "mask")
    else:
        center, radius = _flag("--disk", _parse_disk, args.disk)
        tg = tf_grid_of(make_grid(args.L, args.N))
        mask = DomainMask.disk(tg, center, radius)
    weight = None
    if args.weight is not None:
        weight = _load_operand(args.weight, "--weight")
    constant, report = poincare_constant(mask, weight, return_report=True)
    _emit({"constant": constant, "mu1": report["mu1"]}, args.out)
    return 0


def _cmd_glue(args) -> int:
    from .geometry import connectivity, gluing_bound

    if (args.lam is None) == (args.connectivity is None):
        raise _Usage("argument --lam: give --lam or --connectivity W A B, "
                     "not both")
    if args.lam is not None:
        lam = args.lam
    else:
        wpath, apath, bpath = args.connectivity
        field = _load_operand(wpath, "--connectivity")
        a = _load_mask(apath, "--connectivity")
        b = _load_mask(bpath, "--connectivity")
        lam = connectivity(field, a, b)
    bound = gluing_bound(args.ca, args.cb, lam)
    _emit({"lambda": lam, "bound": bound}, args.out)
    return 0


def _cmd_recover(args) -> int:
    from . import io
    from .grids import TFField
    from .norms import phase_inf_distance
    from .transforms import parse_window, recover

    meas = _load_operand(args.measurement, "measurement")
    if not isinstance(meas, TFField):
        raise _Usage(f"argument measurement: {args.measurement!r} is not "
                     f"a field dump")
    window = _flag("--window", parse_window, args.window)
    result = recover(meas, window, threshold=args.threshold)
    error = None
    if args.reference is not None:
        ref = _load_operand(args.reference, "--reference")
        from .grids import Signal

        if not isinstance(ref, Signal):
            raise _Usage(f"argument --reference: {args.reference!r} is not "
                         f"a signal dump")
        res = phase_inf_distance(ref, result.signal)
        import numpy as np

        scale = float(np.sqrt(np.sum(np.abs(ref.values) ** 2)
                              * ref.grid.dx))
        error = res.distance / scale if scale > 0 else float("inf")
    if args.out is not None:
        io.dump_signal(result.signal, args.out)
    _emit({"error": error, "masked_fraction": result.masked_fraction,
           "threshold": result.threshold}, None)
    return 0


_CONFIG_KEYS = ("fixture", "params", "seed")


def _manifest_from_args(args):
    import dataclasses

    from . import experiments

    try:
        manifest = experiments.default_manifest(args.id, seed=args.seed,
                                                out_dir=args.out,
                                                reduced=args.reduced)
    except ValueError as e:
        raise _Usage(f"argument id: {e}") from None
    if args.config is None:
        return manifest
    try:
        raw = json.loads(Path(args.config).read_text())
    except FileNotFoundError:
        raise _Usage(f"argument --config: no such file "
                     f"{args.config!r}") from None
    except json.JSONDecodeError as e:
        raise _Usage(f"argument --config: not valid JSON ({e})") from None
    if not isinstance(raw, dict):
        raise _Usage("argument --config: top level must be an object")
    for key in raw:
        if key not in _CONFIG_KEYS:
            raise _Usage(f"argument --config: unknown key {key!r} "
                         f"(allowed: {', '.join(_CONFIG_KEYS)})")
    for section in ("fixture", "params"):
        patch = raw.get(section, {})
        if not isinstance(patch, dict):
            raise _Usage(f"argument --config: {section} must be an object")
        base = getattr(manifest, section)
        for key in patch:
            if key not in base:
                raise _Usage(f"argument --config: unknown {section} key "
                             f"{key!r} (allowed: {', '.join(base)})")
    seed = raw.get("seed", manifest.seed)
    if not isinstance(seed, int) or isinstance(seed, bool):
        raise _Usage("argument --config: seed must be an integer")
    return dataclasses.replace(
        manifest,
        fixture={**manifest.fixture, **raw.get("fixture", {})},
        params={**manifest.params, **raw.get("params", {})},
        seed=seed)


def _cmd_run(args) -> int:
    from . import experiments

    manifest = _manifest_from_args(args)
    result = experiments.run(manifest)
    for a in result.assertions:
        verdict = "PASS" if a["passed"] else ("FAIL" if a["hard"]
                                              else "soft-fail")
        print(f"[{verdict}] {a['invariant']}: {a['description']}")
    print(f"{result.id}: {'PASS' if result.passed else 'FAIL'} "
          f"({result.wallclock:.2f}s)")
    if args.out is not None:
        print(f"tables written to {args.out}")
    return 0 if result.passed else 1


def _cmd_list(args) -> int:
    from . import experiments

    entries = experiments.list_experiments()
    width = max(len(e["id"]) for e in entries)
    for e in entries:
        print(f"{e['id']:<{width}}  {e['description']}")
    return 0


def _cmd_verify(args) -> int:
    from . import experiments

    try:
        report = experiments.verify_run(args.dir)
    except FileNotFoundError:
        raise _Usage(f"argument dir: {args.dir!r} is not a stored "
                     f"run") from None
    _emit(report, args.out)
    return 0 if report["ok"] else 1


# ---------------------------------------------------------------------------
# parser


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="stftlab",
        description="Numerical laboratory for phase retrieval from "
                    "short-time Fourier measurements.")
    sub = ap.add_subparsers(dest="command", required=True,
                            metavar="command")

    def add(name, help, handler):
        p = sub.add_parser(name, help=help, description=help)
        p.set_defaults(handler=handler)
        return p

    p = add("gen", "generate a signal fixture and dump it", _cmd_gen)
    p.add_argument("kind", help="gaussian, hermite:N or random")
    p.add_argument("--L", type=float, default=16.0,
                   help="period of the grid (default 16)")
    p.add_argument("--N", type=int, default=256,
                   help="sample count (default 256)")
    p.add_argument("--center", type=float, default=0.0)
    p.add_argument("--modulation", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0,
                   help="seed for kind random")
    p.add_argument("--format", choices=("bin", "csv"), default="bin")
    p.add_argument("--out", help="output path")

    p = add("stft", "transform a signal dump to a field dump", _cmd_stft)
    p.add_argument("signal", help="signal dump")
    p.add_argument("--window", default="gaussian",
                   help="gaussian or hermite:N (default gaussian)")
    p.add_argument("--phaseless", action="store_true",
                   help="store squared modulus instead of the transform")
    p.add_argument("--out", required=True, help="field dump to write")

    p = add("norm", "evaluate a norm of a dumped signal or field",
            _cmd_norm)
    p.add_argument("operand", help="signal or field dump")
    p.add_argument("--norm", default="l2",
                   help="norm spec: l2, lq:Q, x:P,SIGMA, w:S,P[,R], "
                        "'^' intersects (default l2)")
    p.add_argument("--out", help="write JSON here instead of stdout")

    p = add("distance", "phase-invariant distance between two dumps",
            _cmd_distance)
    p.add_argument("f", help="first dump")
    p.add_argument("g", help="second dump")
    p.add_argument("--norm", default="l2", help="norm spec (default l2)")
    p.add_argument("--out", help="write JSON here instead of stdout")

    p = add("instability", "print the instability ratio ladder of the "
            "gaussian seed", _cmd_instability)
    p.add_argument("--L", type=float, default=256.0)
    p.add_argument("--N", type=int, default=2048)
    p.add_argument("--sigma", type=float, default=0.0,
                   help="weight exponent of the denominator norm")
    p.add_argument("--p", type=float, default=2.0)
    p.add_argument("--q", type=float, default=2.0)
    p.add_argument("--delta", type=float, default=0.1)
    p.add_argument("--n", type=int, default=4, help="number of rungs")

    p = add("cheeger", "estimate the Cheeger quotient of a density dump",
            _cmd_cheeger)
    p.add_argument("density", help="field dump with nonnegative values")
    p.add_argument("--thresholds", type=int, default=256)
    p.add_argument("--centers", type=int, default=9)
    p.add_argument("--radii", type=int, default=16)
    p.add_argument("--directions", type=int, default=64)
    p.add_argument("--offsets", type=int, default=33)
    p.add_argument("--smoothing", type=float, default=2.0)
    p.add_argument("--out", help="write JSON here instead of stdout")

    p = add("poincare", "weighted Poincare constant of a domain",
            _cmd_poincare)
    p.add_argument("mask", nargs="?", help="mask dump")
    p.add_argument("--disk", help="CX,CY,R disk domain instead of a dump")
    p.add_argument("--L", type=float, default=16.0,
                   help="grid period for --disk")
    p.add_argument("--N", type=int, default=256,
                   help="grid count for --disk")
    p.add_argument("--weight", help="field dump with the weight")
    p.add_argument("--out", help="write JSON here instead of stdout")

    p = add("glue", "stability bound for a glued domain", _cmd_glue)
    p.add_argument("--ca", type=float, required=True,
                   help="stability constant of the first patch")
    p.add_argument("--cb", type=float, required=True,
                   help="stability constant of the second patch")
    p.add_argument("--lam", type=float,
                   help="connectivity of the overlap")
    p.add_argument("--connectivity", nargs=3,
                   metavar=("W", "A", "B"),
                   help="density dump and two mask dumps; computes lam")
    p.add_argument("--out", help="write JSON here instead of stdout")

    p = add("recover", "invert a phaseless measurement up to phase",
            _cmd_recover)
    p.add_argument("measurement", help="field dump of squared modulus")
    p.add_argument("--window", default="gaussian")
    p.add_argument("--threshold", type=float,
                   help="mask level for the window division")
    p.add_argument("--reference", help="signal dump to compare against")
    p.add_argument("--out", help="write the recovered signal dump here")

    p = add("run", "run one experiment and evaluate its assertions",
            _cmd_run)
    p.add_argument("id", help="experiment id, see 'stftlab list'")
    p.add_argument("--config", help="JSON patch: fixture, params, seed")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--reduced", action="store_true",
                   help="smaller fixture for quick checks")
    p.add_argument("--out", help="directory for tables and summary")

    add("list", "list experiment ids", _cmd_list)

    p = add("verify", "re-check a stored run from its tables", _cmd_verify)
    p.add_argument("dir", help="directory written by run --out")
    p.add_argument("--out", help="write JSON here instead of stdout")

    return ap


def main(argv=None) -> int:
    try:
        _apply_thread_cap()
    except _Usage as e:
        print(f"stftlab: {e}", file=sys.stderr)
        return 2
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        # argparse has already written its message
        return 0 if e.code in (0, None) else 2
    try:
        return args.handler(args)
    except _Usage as e:
        print(f"stftlab: {e}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as e:
        return _fail(str(e))


if __name__ == "__main__":
    sys.exit(main())
