#!/usr/bin/env python3
"""Run every preset scenario and collect the output CSVs under runs/.

The torque-vs-Reynolds sweep rebuilds kernel tables per Reynolds number and
dominates the runtime; pass --skip-fig7 to leave it out.
"""
import argparse
import sys
import time


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--out-root", default="runs")
    p.add_argument("--skip-fig7", action="store_true")
    p.add_argument("--threads", type=int)
    args = p.parse_args()

    from couette_spectrum.cli import main as cli_main
    from couette_spectrum.presets import PRESET_BUILDERS

    failures = []
    for name in PRESET_BUILDERS:
        if args.skip_fig7 and name == "fig7":
            continue
        argv = ["run", "--preset", name, "--out", f"{args.out_root}/{name}"]
        if args.threads:
            argv += ["--threads", str(args.threads)]
        t0 = time.perf_counter()
        rc = cli_main(argv)
        print(f"{name}: exit {rc} ({time.perf_counter() - t0:.0f}s)", flush=True)
        if rc != 0:
            failures.append(name)
    if failures:
        print(f"failed: {failures}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
