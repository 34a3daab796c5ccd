#!/usr/bin/env python3
"""Build and cache the kernel tables for one flow configuration.

Usage:
    python scripts/build_tables.py [--reynolds 88.1] [--eta 0.5] [--mu 0.0]
                                   [--n-points 48] [--k-max 12] [--dk 0.25]
                                   [--force]
"""
import argparse
import time


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--eta", type=float, default=0.5)
    p.add_argument("--mu", type=float, default=0.0)
    p.add_argument("--reynolds", type=float, default=88.1)
    p.add_argument("--n-points", type=int, default=48)
    p.add_argument("--k-max", type=float, default=12.0)
    p.add_argument("--dk", type=float, default=0.25)
    p.add_argument("--force", action="store_true")
    args = p.parse_args()

    from couette_spectrum import FlowConfig, get_or_build_tables

    cfg = FlowConfig(eta=args.eta, mu=args.mu, reynolds=args.reynolds)
    t0 = time.perf_counter()
    tables, thash, hit = get_or_build_tables(
        cfg, n_points=args.n_points, k_max=args.k_max, dk=args.dk,
        force_rebuild=args.force, progress=lambda s: print(f"  {s}", flush=True))
    status = "cache hit" if hit else f"built in {time.perf_counter() - t0:.1f}s"
    print(f"tables {thash}: {status}; eps = {tables.eps:.4f}, "
          f"max mode residual = {tables.meta['max_mode_residual']:.2e}")


if __name__ == "__main__":
    main()
