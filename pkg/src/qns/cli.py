"""Command-line benchmark runner: `qns <benchmark> [flags]`."""
from __future__ import annotations

import argparse
import sys

from .bench import BENCHMARKS, resolve_seed, run_benchmark


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qns",
        description="Hybrid quantum-classical Navier-Stokes benchmarks "
                    "(HHL pressure solves with Chebyshev tomography readout).")
    parser.add_argument("benchmark", choices=BENCHMARKS)
    parser.add_argument("--grid", type=int, help="grid points (1D count or interior nodes per side)")
    parser.add_argument("--clock-qubits", type=int, dest="clock_qubits")
    parser.add_argument("--trotter-steps", type=int, dest="trotter_steps")
    parser.add_argument("--backend", choices=("spectral", "trotter"))
    parser.add_argument("--cheb-m", type=int, dest="cheb_m", help="Chebyshev polynomials per dimension")
    parser.add_argument("--shots", type=int, help="Hadamard-test shots per overlap")
    parser.add_argument("--beta", type=float, help="hyperbolic stretching parameter")
    parser.add_argument("--re", type=float, help="Reynolds number")
    parser.add_argument("--nu", type=float, help="kinematic viscosity (tgv)")
    parser.add_argument("--dt", type=float, help="time step")
    parser.add_argument("--steps", type=int, help="time steps")
    parser.add_argument("--readout", choices=("fullstate", "chebyshev"))
    parser.add_argument("--gradient", choices=("central", "analytic"))
    parser.add_argument("--seed", type=int, help="rng seed (falls back to QNS_SEED, then 0)")
    parser.add_argument("--out", default="qns-out", help="artifact directory")
    parser.add_argument("--check", action="store_true",
                        help="exit nonzero if any acceptance threshold is breached")
    parser.add_argument("--long", action="store_true",
                        help="run the full 2000-step cavity configuration")
    parser.add_argument("--jobs", type=int, default=1, help="parallel workers for sweep points")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    options = {"out": args.out, "seed": resolve_seed(args.seed), "long": args.long,
               "jobs": args.jobs}
    passthrough = ("grid", "clock_qubits", "trotter_steps", "backend", "cheb_m", "shots",
                   "beta", "re", "nu", "dt", "steps", "readout")
    for name in passthrough:
        value = getattr(args, name, None)
        if value is not None:
            options[name] = value
    if args.gradient is not None:
        options["gradient"] = "analytic-chebyshev" if args.gradient == "analytic" else "central"

    report = run_benchmark(args.benchmark, **options)
    sys.stdout.write(report.text())
    if args.check and not report.all_passed:
        failed = ", ".join(c.name for c in report.checks if not c.passed)
        sys.stderr.write(f"qns: acceptance threshold breached: {failed}\n")
        return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
