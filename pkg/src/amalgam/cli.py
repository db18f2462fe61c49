"""Command-line front end: every operation as a manifest-logged command.

Exit codes: 0 success (a reject verdict is still a success), 1 when an
asserted invariant fails, 2 on usage errors.  The token ``inf`` denotes
infinity in every exponent flag; exponents parse as exact rationals
(``10``, ``10/3``, ``0.3``).  A config file of ``key = value`` lines may
supply any flag; explicit command-line flags override it.  The output
directory comes from --out, else $AMALGAM_OUT, else ./amalgam-out.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import exponents as expo
from . import verify
from .extreal import as_extended, fmt, to_float
from .grid import (
    GridSpec,
    SampledField,
    lebesgue_norm,
    read_field,
    write_spacetime,
)
from .propagator import (
    evolve_series,
    hsigma_norm,
    kernel_amalgam_profile,
    profile_times,
)
from .verify import finalize_manifest, write_csv, write_manifest
from .wiener import WindowSpec, amalgam_norm, unit_cube_partition

USAGE_ERROR = 2
CHECK_FAILED = 1


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _build_parser() -> _Parser:
    p = _Parser(prog="amalgam", description=__doc__,
                formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--config", help="key = value file supplying default flags")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, help_):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--out", help="output directory (default $AMALGAM_OUT or ./amalgam-out)")
        sp.add_argument("--seed", default="0")
        return sp

    sp = add("check-tuple", "run an admissibility predicate on one tuple")
    sp.add_argument("--set", default=None, dest="condition_set",
                    choices=["classical", "cn2", "theorem", "proposition", "corollary"])
    sp.add_argument("--n", default=None)
    sp.add_argument("--sigma", default="0")
    for f in ("qt", "rt", "q", "r"):
        sp.add_argument(f"--{f}", default=None)

    sp = add("region", "scan an admissibility region in reciprocal coordinates")
    sp.add_argument("--set", default=None, dest="condition_set",
                    choices=["classical", "cn2", "theorem", "proposition", "corollary"])
    sp.add_argument("--n", default=None)
    sp.add_argument("--sigma", default="0")
    sp.add_argument("--free", default=None, help="comma list, e.g. qt,q")
    sp.add_argument("--fixed", default="", help="comma list name=value")
    sp.add_argument("--resolution", default="64")

    sp = add("norm", "compute a norm of a generated or loaded field")
    sp.add_argument("--kind", default=None,
                    choices=["lebesgue", "hsigma", "amalgam"])
    _field_flags(sp)
    sp.add_argument("--p", default="2")
    sp.add_argument("--q", default="2")
    sp.add_argument("--sigma", default="0")
    _window_flags(sp)

    sp = add("evolve", "free evolution of a datum over a time list")
    _field_flags(sp)
    sp.add_argument("--sigma", default="0")
    sp.add_argument("--times", default="0.5", help="comma list of instants")
    sp.add_argument("--save-field", action="store_true",
                    help="also write the evolved slices as a binary container")

    sp = add("kernel-profile", "windowed kernel norm h(t) over log-spaced times")
    _profile_flags(sp)

    sp = add("fit-decay", "kernel profile plus two-regime slope fit")
    _profile_flags(sp)
    sp.add_argument("--tol", default="0.05")

    sp = add("ratio", "space-time amalgam norm over data norm for one tuple")
    _field_flags(sp)
    sp.set_defaults(gen="modulated")  # ratio needs zero-mode-free data
    sp.add_argument("--n", default="1")
    sp.add_argument("--sigma", default=None)
    for f in ("qt", "rt", "q", "r"):
        sp.add_argument(f"--{f}", default=None)
    sp.add_argument("--weak", action="store_true")
    sp.add_argument("--t-outer", default="32")

    sp = add("suite", "lattice identity / inequality property suite")
    sp.add_argument("--corpus-size", default="100")

    sp = add("hls", "1-D fractional-integration ratio check")
    sp.add_argument("--p", default=None)
    sp.add_argument("--alpha", default=None)
    sp.add_argument("--trials", default="200")

    sp = add("bilinear", "double-integral vs factorized bilinear form")
    sp.add_argument("--grid-n", default="1")
    sp.add_argument("--grid-l", default="8")
    sp.add_argument("--grid-npts", default="64")
    sp.add_argument("--sigma", default="0.3")
    sp.add_argument("--ntimes", default="9")
    sp.add_argument("--pairs", default="10")
    return p


def _field_flags(sp):
    sp.add_argument("--input", help="binary field container to load")
    sp.add_argument("--gen", default="gaussian",
                    choices=["gaussian", "modulated", "band-limited", "spike"])
    sp.add_argument("--width", default="1")
    sp.add_argument("--mode", default="40")
    sp.add_argument("--grid-n", default="1")
    sp.add_argument("--grid-l", default="16")
    sp.add_argument("--grid-npts", default="1024")


def _window_flags(sp):
    sp.add_argument("--window", default="cube",
                    choices=["cube", "gaussian", "bump"])
    sp.add_argument("--window-radius", default="0.5")
    sp.add_argument("--window-step", default="1")
    sp.add_argument("--window-norm", default="partition", choices=["l2", "partition"])


def _profile_flags(sp):
    sp.add_argument("--n", default="1")
    sp.add_argument("--sigma", default=None)
    sp.add_argument("--rt", default=None)
    sp.add_argument("--r", default=None)
    sp.add_argument("--grid-l", default="64")
    sp.add_argument("--grid-npts", default="4096")
    sp.add_argument("--tmin", default="0.02")
    sp.add_argument("--tmax", default="50")
    sp.add_argument("--per-decade", default="24")


def _load_config(path) -> dict:
    out = {}
    for line in Path(path).read_text().splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise _UsageError(f"config line without '=': {line!r}")
        key, val = (part.strip() for part in line.split("=", 1))
        out[key.replace("-", "_")] = val
    return out


def _outdir(args) -> Path:
    out = args.out or os.environ.get("AMALGAM_OUT") or "amalgam-out"
    return Path(out)


def _window_from(args) -> WindowSpec:
    kind = {"cube": "cube-indicator", "gaussian": "gaussian", "bump": "smooth-bump"}[args.window]
    return WindowSpec(kind=kind, radius=float(args.window_radius),
                      step=float(args.window_step), normalization=args.window_norm)


def _field_from(args) -> SampledField:
    if args.input:
        return read_field(args.input)
    grid = GridSpec(int(args.grid_n), float(args.grid_l), int(args.grid_npts))
    seed = int(args.seed)
    gen = args.gen
    if gen == "gaussian":
        return verify.gaussian_datum(grid, width=float(args.width))
    if gen == "modulated":
        return verify.modulated_gaussian(grid, width=float(args.width), mode=int(args.mode))
    if gen == "band-limited":
        return verify.band_limited_field(grid, seed)
    return verify.spike_field(grid, seed)


def _tuple_from(args) -> expo.ExponentTuple:
    def pick(name, default="2"):
        val = getattr(args, name, None)
        return as_extended(val if val is not None else default)

    return expo.ExponentTuple(
        n=int(args.n), sigma=as_extended(args.sigma),
        qt=pick("qt"), rt=pick("rt"), q=pick("q"), r=pick("r"))


# ---------------------------------------------------------------------------
# command handlers (each returns the exit code)
# ---------------------------------------------------------------------------

def _cmd_check_tuple(args) -> int:
    outdir = _outdir(args)
    started = time.time()
    manifest = write_manifest(outdir, "check-tuple", _params(args), int(args.seed))
    if args.condition_set == "classical":
        rep = expo.is_schrodinger_admissible(
            as_extended(args.q or "2"), as_extended(args.r or "2"), int(args.n))
    elif args.condition_set == "proposition":
        rep = expo.satisfies_prop_kernel(
            int(args.n), as_extended(args.sigma),
            as_extended(args.rt or "2"), as_extended(args.r or "2"))
    else:
        rep = expo.predicate_for(args.condition_set)(_tuple_from(args))
    (outdir / "report.json").write_text(json.dumps(rep.to_json_dict(), indent=2) + "\n")
    rows = [(c.name, int(c.passed), "" if c.slack is None else fmt(c.slack))
            for c in rep.constraints]
    write_csv(outdir / "results.csv", ["constraint", "passed", "slack"], rows)
    print(f"{args.condition_set}: {'accept' if rep.verdict else 'reject'}")
    for c in rep.constraints:
        mark = "ok " if c.passed else "VIOLATED"
        print(f"  [{mark}] {c.name}" + ("" if c.slack is None else f"  (slack {fmt(c.slack)})"))
    finalize_manifest(manifest, started, extra={"verdict": rep.verdict})
    return 0


def _cmd_region(args) -> int:
    outdir = _outdir(args)
    started = time.time()
    manifest = write_manifest(outdir, "region", _params(args), int(args.seed))
    free = tuple(s.strip() for s in args.free.split(",") if s.strip())
    fixed = {}
    if args.fixed:
        for item in args.fixed.split(","):
            name, val = item.split("=", 1)
            fixed[name.strip()] = as_extended(val.strip())
    scan = expo.sample_region(args.condition_set, n=int(args.n),
                              sigma=as_extended(args.sigma),
                              free=free, fixed=fixed,
                              resolution=int(args.resolution))
    rows = []
    bset = {tuple(sorted(c.items())) for c in scan.boundary}
    for coords, verdict in zip(scan.coords, scan.verdicts):
        row = [fmt(coords[a]) for a in scan.axes]
        row.append(int(verdict))
        row.append(int(tuple(sorted(coords.items())) in bset))
        rows.append(row)
    header = [f"recip_{a}" for a in scan.axes] + ["accept", "boundary"]
    write_csv(outdir / "mesh.csv", header, rows)
    accepted = sum(scan.verdicts)
    print(f"{args.condition_set}: {accepted}/{len(scan.verdicts)} accepted, "
          f"{len(bset)} boundary cells -> {outdir / 'mesh.csv'}")
    finalize_manifest(manifest, started, extra={"accepted": int(accepted)})
    return 0


def _cmd_norm(args) -> int:
    outdir = _outdir(args)
    started = time.time()
    manifest = write_manifest(outdir, "norm", _params(args), int(args.seed))
    fld = _field_from(args)
    if args.kind == "lebesgue":
        res = lebesgue_norm(fld, to_float(as_extended(args.p)))
    elif args.kind == "hsigma":
        res = hsigma_norm(fld, float(args.sigma))
    else:
        res = amalgam_norm(fld, to_float(as_extended(args.p)),
                           to_float(as_extended(args.q)), _window_from(args))
    (outdir / "report.json").write_text(json.dumps(res.to_json_dict(), indent=2) + "\n")
    write_csv(outdir / "results.csv", ["space", "value"], [(res.space, res.value)])
    print(f"{res.space}: {res.value:.12g}")
    finalize_manifest(manifest, started)
    return 0


def _cmd_evolve(args) -> int:
    outdir = _outdir(args)
    started = time.time()
    manifest = write_manifest(outdir, "evolve", _params(args), int(args.seed))
    fld = _field_from(args)
    times = np.array([float(s) for s in args.times.split(",")])
    stf = evolve_series(fld, times, float(args.sigma))
    rows = [(t, lebesgue_norm(s, 2).value, lebesgue_norm(s, np.inf).value)
            for t, s in zip(stf.times, stf.slices)]
    write_csv(outdir / "results.csv", ["t", "l2", "sup"], rows)
    if args.save_field:
        write_spacetime(stf, outdir / "evolved.bin")
    print(f"evolved {len(times)} slice(s) -> {outdir / 'results.csv'}")
    finalize_manifest(manifest, started)
    return 0


def _profile_from(args):
    grid = GridSpec(int(args.n), float(args.grid_l), int(args.grid_npts))
    times = profile_times(float(args.tmin), float(args.tmax), int(args.per_decade))
    return kernel_amalgam_profile(int(args.n), float(args.sigma),
                                  as_extended(args.rt), as_extended(args.r),
                                  unit_cube_partition(), times, grid)


def _cmd_kernel_profile(args) -> int:
    outdir = _outdir(args)
    started = time.time()
    manifest = write_manifest(outdir, "kernel-profile", _params(args), int(args.seed))
    prof = _profile_from(args)
    write_csv(outdir / "results.csv", ["t", "value", "est_error"],
              list(zip(prof.times, prof.values, prof.est_error)))
    (outdir / "profile.json").write_text(json.dumps(
        {"meta": prof.meta, "converged": prof.converged,
         "times": list(prof.times), "values": list(prof.values),
         "est_error": list(prof.est_error)}, indent=2, default=float) + "\n")
    print(f"profile over {len(prof.times)} instants -> {outdir / 'results.csv'}"
          + ("" if prof.converged else "  [kernel flags: not fully converged]"))
    finalize_manifest(manifest, started, extra={"converged": prof.converged})
    return 0


def _cmd_fit_decay(args) -> int:
    outdir = _outdir(args)
    started = time.time()
    manifest = write_manifest(outdir, "fit-decay", _params(args), int(args.seed))
    prof = _profile_from(args)
    small, large = verify.fit_decay(prof)
    write_csv(outdir / "results.csv",
              ["regime", "slope", "predicted", "abs_error", "r_squared"],
              [(f.regime, f.slope, f.predicted, f.abs_error, f.r_squared)
               for f in (small, large)])
    tol = float(args.tol)
    ok = True
    for f in (small, large):
        status = "ok" if (f.abs_error is not None and f.abs_error <= tol) else "FAIL"
        ok = ok and status == "ok"
        print(f"{f.regime}-time: slope {f.slope:+.4f}  predicted "
              f"{f.predicted:+.4f}  |err| {f.abs_error:.4f}  [{status}]")
    finalize_manifest(manifest, started, extra={"within_tolerance": ok})
    return 0 if ok else CHECK_FAILED


def _cmd_ratio(args) -> int:
    outdir = _outdir(args)
    started = time.time()
    manifest = write_manifest(outdir, "ratio", _params(args), int(args.seed))
    tup = _tuple_from(args)
    fld = _field_from(args)
    times = verify.default_ratio_times(t_outer=float(args.t_outer))
    res = verify.strichartz_ratio(fld, tup, unit_cube_partition(),
                                  unit_cube_partition(), times=times,
                                  weak=bool(args.weak))
    write_csv(outdir / "results.csv", ["ratio", "numerator", "denominator"],
              [(res.value, res.numerator, res.denominator)])
    print(f"ratio = {res.value:.6g}  (numerator {res.numerator:.6g}, "
          f"denominator {res.denominator:.6g})")
    finalize_manifest(manifest, started, extra={"ratio": res.value})
    return 0


def _cmd_suite(args) -> int:
    outdir = _outdir(args)
    started = time.time()
    manifest = write_manifest(outdir, "suite", _params(args), int(args.seed))
    rep = verify.property_suite(seed=int(args.seed), corpus_size=int(args.corpus_size))
    write_csv(outdir / "results.csv", ["property", "passed"],
              [(r.name, int(r.passed)) for r in rep.results])
    print(rep.summary())
    finalize_manifest(manifest, started, extra={"passed": rep.passed})
    return 0 if rep.passed else CHECK_FAILED


def _cmd_hls(args) -> int:
    outdir = _outdir(args)
    started = time.time()
    manifest = write_manifest(outdir, "hls", _params(args), int(args.seed))
    rep = verify.hls_check_1d(args.p, args.alpha, trials=int(args.trials),
                              seed=int(args.seed))
    if not rep.accepted:
        print(f"reject: {rep.reason}")
        write_csv(outdir / "results.csv", ["verdict", "reason"], [("reject", rep.reason)])
        finalize_manifest(manifest, started, extra={"verdict": "reject"})
        return 0
    write_csv(outdir / "results.csv", ["max_ratio", "median_ratio", "refined_max"],
              [(rep.max_ratio, float(np.median(rep.ratios)), rep.refined_max)])
    stable = rep.refinement_stable
    print(f"q = {fmt(rep.q)}; max ratio {rep.max_ratio:.6g}, refined {rep.refined_max:.6g}, "
          f"stable within x1.5: {stable}")
    finalize_manifest(manifest, started, extra={"stable": stable})
    return 0 if stable else CHECK_FAILED


def _cmd_bilinear(args) -> int:
    outdir = _outdir(args)
    started = time.time()
    manifest = write_manifest(outdir, "bilinear", _params(args), int(args.seed))
    grid = GridSpec(int(args.grid_n), float(args.grid_l), int(args.grid_npts))
    ntimes = int(args.ntimes)
    times = np.linspace(-1.0, 1.0, ntimes)
    rng_base = int(args.seed)
    sigma = float(args.sigma)
    worst = 0.0
    rows = []
    for k in range(int(args.pairs)):
        F = _random_stf(grid, times, rng_base + 2 * k)
        G = _random_stf(grid, times, rng_base + 2 * k + 1)
        direct = verify.bilinear_form(F, G, sigma)
        fact = verify.factorized_bilinear_form(F, G, sigma)
        rel = abs(direct - fact) / max(abs(direct), 1e-300)
        worst = max(worst, rel)
        rows.append((k, direct.real, direct.imag, rel))
    write_csv(outdir / "results.csv", ["pair", "re", "im", "rel_diff"], rows)
    ok = worst <= 1e-8
    print(f"max relative difference over {args.pairs} pairs: {worst:.3e}  "
          f"[{'ok' if ok else 'FAIL'}]")
    finalize_manifest(manifest, started, extra={"max_rel_diff": worst})
    return 0 if ok else CHECK_FAILED


def _random_stf(grid, times, seed):
    from .grid import SpaceTimeField
    slices = [verify.band_limited_field(grid, seed * 1000 + i) for i in range(len(times))]
    return SpaceTimeField(grid, times, slices)


def _params(args) -> dict:
    return {k: v for k, v in vars(args).items() if k not in ("command",) and v is not None}


_REQUIRED = {
    "check-tuple": ("condition_set", "n"),
    "region": ("condition_set", "n", "free"),
    "norm": ("kind",),
    "kernel-profile": ("sigma", "rt", "r"),
    "fit-decay": ("sigma", "rt", "r"),
    "ratio": ("sigma", "qt", "rt", "q", "r"),
    "hls": ("p", "alpha"),
}


_HANDLERS = {
    "check-tuple": _cmd_check_tuple,
    "region": _cmd_region,
    "norm": _cmd_norm,
    "evolve": _cmd_evolve,
    "kernel-profile": _cmd_kernel_profile,
    "fit-decay": _cmd_fit_decay,
    "ratio": _cmd_ratio,
    "suite": _cmd_suite,
    "hls": _cmd_hls,
    "bilinear": _cmd_bilinear,
}


def run(argv) -> int:
    parser = _build_parser()
    try:
        if "--config" in argv:
            idx = argv.index("--config")
            cfg = _load_config(argv[idx + 1])
            rest = argv[:idx] + argv[idx + 2:]
            args = parser.parse_args(rest)
            for key, val in cfg.items():
                explicit = f"--{key.replace('_', '-')}" in rest
                if hasattr(args, key) and not explicit:
                    setattr(args, key, val)
        else:
            args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return USAGE_ERROR
    for name in _REQUIRED.get(args.command, ()):
        if getattr(args, name, None) is None:
            flag = "--set" if name == "condition_set" else f"--{name.replace('_', '-')}"
            print(f"usage error: {flag} is required for {args.command}", file=sys.stderr)
            return USAGE_ERROR
    try:
        return _HANDLERS[args.command](args)
    except (ValueError, FileNotFoundError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return USAGE_ERROR


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
