"""Command-line entry point.

    couette-spectrum run --preset fig2 [--out DIR] [--force-rebuild]
                         [--resume SNAP] [--threads N]
    couette-spectrum run --config run.yaml
    couette-spectrum build-cache --preset fig2
    couette-spectrum presets [--write-examples DIR]

Exit codes: 0 success, 2 configuration error, 3 numerical error, 4 cache error.
Heavy imports happen after argument parsing so --threads can pin the BLAS
thread count through environment variables before numpy loads.
"""

import argparse
import json
import os
import sys
import time


def _build_parser():
    p = argparse.ArgumentParser(prog="couette-spectrum",
                                description="Continuous-spectrum Taylor-Couette dynamics")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a scenario")
    src = run.add_mutually_exclusive_group(required=True)
    src.add_argument("--config", help="YAML run configuration")
    src.add_argument("--preset", help="named preset scenario")
    run.add_argument("--out", help="output directory (overrides config)")
    run.add_argument("--force-rebuild", action="store_true",
                     help="rebuild kernel tables even on a cache hit")
    run.add_argument("--resume", help="continue from a snapshot file")
    run.add_argument("--threads", type=int, help="BLAS/compile thread count")

    build = sub.add_parser("build-cache", help="build kernel tables only")
    bsrc = build.add_mutually_exclusive_group(required=True)
    bsrc.add_argument("--config", help="YAML run configuration")
    bsrc.add_argument("--preset", help="named preset scenario")
    build.add_argument("--force-rebuild", action="store_true")
    build.add_argument("--threads", type=int)

    pr = sub.add_parser("presets", help="list presets")
    pr.add_argument("--write-examples", metavar="DIR",
                    help="write a commented YAML example per preset")
    return p


def _set_threads(n):
    if not n:
        return
    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS",
                "NUMBA_NUM_THREADS"):
        os.environ[var] = str(n)


def _load_config(args):
    from .presets import RunConfig, preset

    if getattr(args, "preset", None):
        cfg = preset(args.preset)
    else:
        with open(args.config) as fh:
            cfg = RunConfig.from_yaml(fh.read())
    if getattr(args, "out", None):
        cfg = RunConfig.from_dict({**cfg.to_dict(), "output_dir": args.out})
    return cfg


def _write_csv(path, header, rows, config_hash):
    with open(path, "w") as fh:
        fh.write(f"# config_hash={config_hash}\n")
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(repr(x) if isinstance(x, float) else str(x)
                              for x in row) + "\n")


def _trajectory_rows(samples, k_grid, dk):
    for s in samples:
        for k, a in zip(k_grid, s.amplitudes):
            yield (float(s.t), float(k), float(a.real), float(a.imag),
                   float(abs(a) * dk))


def _equilibrium_payload(report):
    return {
        "k_f": report.k_f,
        "abar": {repr(float(k)): float(a) for k, a in zip(report.k_grid, report.abar)},
        "harmonics": [[float(k), float(a)] for k, a in report.harmonics],
        "abar_mean_flow": report.abar_mean_flow,
        "mean_flow_amplitude": report.mean_flow_amplitude,
        "residual": report.residual,
        "reason": report.reason,
        "t_final": report.t_final,
    }


def _run_scenario(run_cfg, outdir, force_rebuild, resume):
    import numpy as np

    from . import __version__
    from .cache import (default_cache_dir, get_or_build_tables, load_snapshot,
                        save_snapshot)
    from .diagnostics import torque_ratio, torque_rows_for_seeds, torque_vs_reynolds
    from .errors import CacheError
    from .evolution import EvolutionParams, evolve, make_state, selection_sweep
    from .flow_config import FlowConfig
    from .reduced import landau_equilibrium_curve

    t_start = time.perf_counter()
    outdir.mkdir(parents=True, exist_ok=True)
    flow = FlowConfig(eta=run_cfg.flow.eta, mu=run_cfg.flow.mu,
                      reynolds=run_cfg.flow.reynolds)
    manifest = {
        "package_version": __version__,
        "config": run_cfg.to_dict(),
        "cache_dir": str(default_cache_dir()),
        "timings": {},
    }
    t0 = time.perf_counter()
    tables, thash, hit = get_or_build_tables(
        flow, n_points=run_cfg.grid.n_points, k_max=run_cfg.grid.k_max,
        dk=run_cfg.grid.dk, force_rebuild=force_rebuild)
    manifest["tables_hash"] = thash
    manifest["config_hash"] = thash
    manifest["cache_hit"] = hit
    manifest["timings"]["tables_s"] = time.perf_counter() - t0

    ev = run_cfg.evolution
    params = EvolutionParams(dt=ev.dt, picard_tol=ev.picard_tol,
                             picard_max=ev.picard_max, equil_tol=ev.equil_tol,
                             t_max=ev.t_max, snapshot_every=ev.snapshot_every)
    scenario = run_cfg.scenario

    if scenario == "fig1":
        curve = landau_equilibrium_curve(tables)
        _write_csv(outdir / "fig1_curve.csv", ["k", "abar_eq"],
                   [(float(k), float(a)) for k, a in zip(tables.k_grid, curve)],
                   thash)
        manifest["result"] = {"max_abar": float(curve.max())}
    elif scenario in ("fig4", "table1"):
        t0 = time.perf_counter()
        if scenario == "fig4":
            rows = selection_sweep(tables, run_cfg.sweep_seeds, params,
                                   seed_density=0.1,
                                   background=run_cfg.sweep_background)
            _write_csv(outdir / "fig4_table.csv",
                       ["k_seed", "k_f", "abar_kf", "outcome"],
                       [(r.k_seed, r.k_f, r.abar_kf, r.outcome) for r in rows],
                       thash)
            manifest["result"] = {"rows": [(r.k_seed, r.k_f, r.outcome) for r in rows]}
        else:
            rows = torque_rows_for_seeds(tables, flow, run_cfg.sweep_seeds, params)
            _write_csv(outdir / "table1_rows.csv",
                       ["k_f", "torque_ratio", "abar_kf", "reason"],
                       [(kf, tq.ratio, float(rep.abar[tables.index(rep.k_f)]),
                         rep.reason) for kf, rep, tq in rows],
                       thash)
            manifest["result"] = {"rows": [(kf, tq.ratio) for kf, _, tq in rows]}
        manifest["timings"]["sweep_s"] = time.perf_counter() - t0
    elif scenario == "fig7":
        t0 = time.perf_counter()

        def provider(cfg_r):
            tb, _, _ = get_or_build_tables(cfg_r, n_points=run_cfg.grid.n_points,
                                           k_max=run_cfg.grid.k_max,
                                           dk=run_cfg.grid.dk,
                                           force_rebuild=force_rebuild)
            return tb

        sweep = torque_vs_reynolds(flow.eta, flow.mu, run_cfg.reynolds_sweep,
                                   provider, params)
        _write_csv(outdir / "fig7_sweep.csv",
                   ["reynolds", "ratio_kc", "envelope_min", "envelope_max"],
                   [(s["reynolds"], s["ratio_kc"], s["envelope_min"],
                     s["envelope_max"]) for s in sweep], thash)
        manifest["result"] = {"sweep": [(s["reynolds"], s["ratio_kc"]) for s in sweep]}
        manifest["timings"]["sweep_s"] = time.perf_counter() - t0
    else:
        if resume:
            state, sparams, smeta = load_snapshot(resume)
            if smeta.get("tables_hash") != thash:
                raise CacheError(
                    f"snapshot tables hash {smeta.get('tables_hash')} does not "
                    f"match current tables {thash}; refusing to resume")
            params = EvolutionParams(**{**sparams, "t_max": params.t_max})
            manifest["resumed_from"] = str(resume)
        else:
            state = make_state(tables, seeds=run_cfg.initial.seeds,
                               uniform=run_cfg.initial.uniform,
                               background=run_cfg.initial.background)
        t0 = time.perf_counter()
        samples, report = evolve(state, tables, params)
        manifest["timings"]["evolve_s"] = time.perf_counter() - t0
        _write_csv(outdir / "trajectory.csv",
                   ["t", "k", "re_a", "im_a", "abar"],
                   _trajectory_rows(samples, tables.k_grid, tables.dk), thash)
        payload = _equilibrium_payload(report)
        tq = torque_ratio(report, tables, flow)
        payload["torque_ratio"] = tq.ratio
        with open(outdir / "equilibrium.json", "w") as fh:
            json.dump(payload, fh, indent=2)
        final = samples[-1]
        from .evolution import SpectrumState
        save_snapshot(outdir / "snapshot_final.npz",
                      SpectrumState(tables.k_grid, final.amplitudes, final.t),
                      params, thash)
        manifest["result"] = {"k_f": report.k_f, "reason": report.reason,
                              "residual": report.residual,
                              "t_final": report.t_final,
                              "torque_ratio": tq.ratio}

    manifest["timings"]["total_s"] = time.perf_counter() - t_start
    with open(outdir / "run_manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2)
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    _set_threads(getattr(args, "threads", None))

    from .errors import CacheError, ConfigError, NumericalError

    try:
        if args.command == "presets":
            from .presets import PRESET_NOTES, preset

            if args.write_examples:
                from pathlib import Path

                d = Path(args.write_examples)
                d.mkdir(parents=True, exist_ok=True)
                for name, note in PRESET_NOTES.items():
                    cfg = preset(name)
                    text = f"# preset: {name}\n# {note}\n" + cfg.to_yaml()
                    (d / f"{name}.yaml").write_text(text)
                print(f"wrote {len(PRESET_NOTES)} examples to {d}")
            else:
                for name, note in PRESET_NOTES.items():
                    print(f"{name:15s} {note}")
            return 0

        run_cfg = _load_config(args)
        from pathlib import Path

        if args.command == "build-cache":
            from .cache import get_or_build_tables
            from .flow_config import FlowConfig

            flow = FlowConfig(eta=run_cfg.flow.eta, mu=run_cfg.flow.mu,
                              reynolds=run_cfg.flow.reynolds)
            _, thash, hit = get_or_build_tables(
                flow, n_points=run_cfg.grid.n_points, k_max=run_cfg.grid.k_max,
                dk=run_cfg.grid.dk, force_rebuild=args.force_rebuild)
            print(f"tables {thash}: {'cache hit' if hit else 'built'}")
            return 0

        outdir = Path(args.out) if args.out else Path(run_cfg.output_dir)
        return _run_scenario(run_cfg, outdir, args.force_rebuild, args.resume)
    except ConfigError as exc:
        _error_record(args, exc)
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except CacheError as exc:
        _error_record(args, exc)
        print(f"cache error: {exc}", file=sys.stderr)
        return 4
    except NumericalError as exc:
        _error_record(args, exc)
        print(f"numerical error: {exc}", file=sys.stderr)
        return 3


def _error_record(args, exc):
    """Machine-readable error record next to the outputs when possible."""
    out = getattr(args, "out", None)
    if not out:
        return
    try:
        from pathlib import Path

        outdir = Path(out)
        outdir.mkdir(parents=True, exist_ok=True)
        with open(outdir / "run_manifest.json", "w") as fh:
            json.dump({"error": {"type": type(exc).__name__, "message": str(exc)}},
                      fh, indent=2)
    except OSError:
        pass


if __name__ == "__main__":
    sys.exit(main())
