"""Command-line entry point.

Exit status: 0 success, 1 a check or comparison failed, 2 bad usage.
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
from pathlib import Path

from . import __version__, special
from .endpoint import TimeHorizon
from .io import RunManifest, dumps, json_document, write_csv
from .pushforward import DEFAULT_GRID_POINTS, figure_grid, optimal_pointer
from .qubit import SIGMA_X, SIGMA_Z, BlochVector
from .reproduce import format_table, reproduce, rows_payload
from .simulate import (
    METHODS,
    SimConfig,
    empirical_quality,
    ks_against_q,
    simulate,
    state_variance,
)
from .verify import LEVELS, format_checks, run_suite

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

# the six figure inputs: eigenstates of sigma_x and sigma_z and the trace state
PRESETS = {
    "minus_x": BlochVector(-1.0, 0.0, 0.0),
    "trace": BlochVector(0.0, 0.0, 0.0),
    "plus_x": BlochVector(1.0, 0.0, 0.0),
    "up_z": BlochVector(0.0, 0.0, 1.0),
    "down_z": BlochVector(0.0, 0.0, -1.0),
    "ground": BlochVector(0.0, 0.0, -1.0),
    "excited": BlochVector(0.0, 0.0, 1.0),
}

DEFAULT_SIM_T = 8.0


class UsageError(Exception):
    pass


def _state(args) -> BlochVector:
    if args.preset is not None:
        return PRESETS[args.preset]
    try:
        return BlochVector.parse(args.bloch)
    except ValueError as exc:
        raise UsageError(f"--bloch: {exc}") from None


def _horizon(t: float | None) -> TimeHorizon:
    if t is None:
        return TimeHorizon.infinite()
    if not t > 0 or not math.isfinite(t):
        raise UsageError("--t must be a positive finite time")
    return TimeHorizon(t)


def _write_manifest(manifest: RunManifest, out: Path) -> Path:
    path = out.with_name(out.name + ".manifest.json")
    manifest.outputs.append(str(path))
    path.write_text(manifest.to_json(), encoding="ascii")
    return path


# --- commands ----------------------------------------------------------------


def cmd_reproduce(args) -> int:
    if args.beta is not None and not 0 < args.beta <= 1:
        raise UsageError("--beta must lie in (0, 1]")
    rows = reproduce(args.beta)
    if args.json:
        sys.stdout.write(dumps(json_document("reproduce", rows_payload(rows, args.beta))))
    else:
        print(format_table(rows, args.beta))
    if args.beta is None and not all(r.passed for r in rows):
        return EXIT_FAIL
    return EXIT_OK


def cmd_density(args) -> int:
    rho = _state(args)
    if args.n < 64:
        raise UsageError("--n must be at least 64")
    hz = _horizon(args.t)
    grid = figure_grid(args.which, rho, hz, args.n)
    out = Path(args.out)
    write_csv(out, {"x": grid.axis, "density": grid.values})
    manifest = RunManifest(
        "density",
        {"which": args.which, "bloch": rho.as_tuple(), "n": args.n, "beta": hz.beta,
         "support": grid.support, "mass": grid.integral()},
        outputs=[str(out)],
    )
    _write_manifest(manifest, out)
    print(f"{args.which}: {args.n} nodes on [{grid.support[0]:.6g}, {grid.support[1]:.6g}], "
          f"mass {grid.integral():.6f} -> {out}")
    return EXIT_OK


def simulation_summary(samples, rho: BlochVector) -> dict:
    hz = samples.config.horizon
    hx, hz_ptr = optimal_pointer("x", hz), optimal_pointer("z", hz)
    mean_x, var_x = empirical_quality(samples, hx, rho, SIGMA_X)
    mean_z, var_z = empirical_quality(samples, hz_ptr, rho, SIGMA_Z)
    n = len(samples)
    ks = ks_against_q(samples.y, hz, rho)
    return {
        "n": n,
        "beta": hz.beta,
        "mean_x": mean_x,
        "stderr_x": math.sqrt(var_x / n),
        "expected_x": rho.px,
        "added_variance_x": var_x - state_variance(rho, SIGMA_X),
        "mean_z": mean_z,
        "stderr_z": math.sqrt(var_z / n),
        "expected_z": rho.pz,
        "added_variance_z": var_z - state_variance(rho, SIGMA_Z),
        "ks_statistic": float(ks.statistic),
        "ks_pvalue": float(ks.pvalue),
        "step_rejections": samples.rejected_steps,
    }


def cmd_simulate(args) -> int:
    rho = _state(args)
    t = DEFAULT_SIM_T if args.t is None else args.t
    try:
        cfg = SimConfig(_horizon(t), args.n, args.seed, args.method, args.dt)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    samples = simulate(rho, cfg)
    hz = cfg.horizon
    hx, hz_ptr = optimal_pointer("x", hz), optimal_pointer("z", hz)
    out = Path(args.out)
    write_csv(out, {"y": samples.y, "pointer_x": hx(samples.y), "pointer_z": hz_ptr(samples.y)})
    summary = simulation_summary(samples, rho) if len(samples) >= 1000 else {"n": len(samples)}
    summary_path = out.with_name(out.name + ".summary.json")
    summary_path.write_text(dumps(json_document("simulation-summary", summary)), encoding="ascii")
    manifest = RunManifest(
        "simulate",
        {"method": args.method, "bloch": rho.as_tuple(), "n": args.n, "dt": args.dt, "t": t, "beta": hz.beta},
        seed=args.seed,
        outputs=[str(out), str(summary_path)],
    )
    _write_manifest(manifest, out)
    for key, value in summary.items():
        print(f"{key:18s} {value:.10g}" if isinstance(value, float) else f"{key:18s} {value}")
    return EXIT_OK


def cmd_verify(args) -> int:
    if args.perturb_integral_i:
        special._I_OFFSET = args.perturb_integral_i
    try:
        checks = run_suite(args.level)
    finally:
        special._I_OFFSET = 0.0
    if args.json:
        payload = {"level": args.level, "checks": [c.__dict__ for c in checks],
                   "all_passed": all(c.passed for c in checks)}
        sys.stdout.write(dumps(json_document("verify", payload)))
    else:
        print(format_checks(checks))
    failed = [c.name for c in checks if not c.passed]
    if failed:
        for name in failed:
            print(f"failed invariant: {name}", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


# --- parser ------------------------------------------------------------------


def _add_state(p: argparse.ArgumentParser) -> None:
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--bloch", metavar="PX,PY,PZ", help="Bloch vector of the initial state")
    g.add_argument("--preset", choices=sorted(PRESETS), help="named figure state")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="homodyne-pointer-lab",
        description="Minimax pointer functions for sigma_x and sigma_z read from a homodyne record.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("reproduce", help="headline constants with pass/fail")
    p.add_argument("--beta", type=float, help="finite-horizon beta in (0, 1]; disables comparison")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_reproduce)

    p = sub.add_parser("density", help="figure data for a density")
    p.add_argument("--which", required=True, choices=("endpoint", "pointer_x", "pointer_z"))
    _add_state(p)
    p.add_argument("--n", type=int, default=DEFAULT_GRID_POINTS)
    p.add_argument("--t", type=float, help="finite horizon (default: infinite)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_density)

    p = sub.add_parser("simulate", help="Monte Carlo endpoint samples")
    p.add_argument("--method", required=True, choices=METHODS)
    _add_state(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--dt", type=float, default=1e-3)
    p.add_argument("--t", type=float, help=f"horizon (default {DEFAULT_SIM_T})")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("verify", help="oracle suites")
    p.add_argument("--level", choices=LEVELS, default="fast")
    p.add_argument("--json", action="store_true")
    # negative control: shifts the closed-form I(eps) by the given amount
    p.add_argument("--perturb-integral-i", type=float, default=0.0, help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"{parser.prog}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
