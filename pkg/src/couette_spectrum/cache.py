"""Persistence of kernel tables, run snapshots, and config hashing.

Tables are stored as a compressed npz (versioned metadata embedded as JSON)
inside a cache directory keyed by the configuration hash; writes go through a
temporary file and an atomic rename so concurrent builders cannot corrupt the
cache.  Equality across platforms is tolerance-level, not bitwise.
"""

import hashlib
import json
import os
import tempfile
from pathlib import Path

import numpy as np

from .errors import CacheError
from .kernels import TABLE_FORMAT_VERSION, KernelTables

CACHE_ENV_VAR = "COUETTE_SPECTRUM_CACHE"

_ARRAY_FIELDS = [
    "k_grid", "a", "b", "b0", "b1", "c", "dv2_wall",
    "mode_u", "mode_v", "mode_w", "adj_u", "adj_v", "adj_w",
    "pair_index", "pair_u", "pair_v", "pair_w", "nodes", "quad_weights",
]


def default_cache_dir() -> Path:
    env = os.environ.get(CACHE_ENV_VAR)
    if env:
        return Path(env)
    return Path.home() / ".cache" / "couette-spectrum"


def table_config_hash(eta, mu, reynolds, n_points, k_max, dk) -> str:
    """Deterministic key for one kernel-table build."""
    payload = json.dumps({
        "format_version": TABLE_FORMAT_VERSION,
        "eta": float(eta), "mu": float(mu), "reynolds": float(reynolds),
        "n_points": int(n_points), "k_max": float(k_max), "dk": float(dk),
    }, sort_keys=True)
    return hashlib.sha256(payload.encode()).hexdigest()[:16]


def tables_path(cache_dir: Path, config_hash: str) -> Path:
    return Path(cache_dir) / f"tables-{config_hash}.npz"


def save_tables(tables: KernelTables, path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = {name: getattr(tables, name) for name in _ARRAY_FIELDS}
    payload["dv1_0_wall"] = np.array(tables.dv1_0_wall)
    payload["eps"] = np.array(tables.eps)
    payload["meta_json"] = np.array(json.dumps(tables.meta))
    fd, tmp = tempfile.mkstemp(dir=path.parent, suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            np.savez_compressed(fh, **payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def load_tables(path) -> KernelTables:
    path = Path(path)
    if not path.exists():
        raise CacheError(f"no cached tables at {path}")
    try:
        with np.load(path, allow_pickle=False) as data:
            meta = json.loads(str(data["meta_json"]))
            if meta.get("format_version") != TABLE_FORMAT_VERSION:
                raise CacheError(
                    f"cache format version {meta.get('format_version')} != "
                    f"{TABLE_FORMAT_VERSION} in {path}")
            kwargs = {name: data[name] for name in _ARRAY_FIELDS}
            return KernelTables(dv1_0_wall=float(data["dv1_0_wall"]),
                                eps=float(data["eps"]), meta=meta, **kwargs)
    except CacheError:
        raise
    except Exception as exc:
        raise CacheError(f"corrupt table cache {path}: {exc}") from exc


def get_or_build_tables(cfg, n_points=48, k_max=12.0, dk=0.25, cache_dir=None,
                        force_rebuild=False, progress=None):
    """Cache-backed table build; returns (tables, config_hash, cache_hit)."""
    from .kernels import assemble_tables
    from .radial import build_grid

    cache_dir = Path(cache_dir) if cache_dir else default_cache_dir()
    h = table_config_hash(cfg.eta, cfg.mu, cfg.reynolds, n_points, k_max, dk)
    path = tables_path(cache_dir, h)
    if path.exists() and not force_rebuild:
        try:
            return load_tables(path), h, True
        except CacheError:
            pass  # rebuild a corrupt entry
    grid = build_grid(n_points, cfg.r_i, cfg.r_o)
    tables = assemble_tables(cfg, grid, k_max=k_max, dk=dk, progress=progress)
    tables.meta["config_hash"] = h
    save_tables(tables, path)
    return tables, h, False


def save_snapshot(path, state, params, tables_hash: str, extra=None) -> None:
    """Full run snapshot sufficient for bit-identical resumption."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    meta = {"tables_hash": tables_hash, "t": float(state.t),
            "params": {k: getattr(params, k) for k in
                       ("dt", "picard_tol", "picard_max", "equil_tol",
                        "t_max", "snapshot_every")}}
    if extra:
        meta.update(extra)
    fd, tmp = tempfile.mkstemp(dir=path.parent, suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            np.savez_compressed(fh, k_grid=state.k_grid,
                                amplitudes=state.amplitudes,
                                meta_json=np.array(json.dumps(meta)))
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def load_snapshot(path):
    """Returns (state, params_dict, meta)."""
    from .evolution import SpectrumState

    path = Path(path)
    if not path.exists():
        raise CacheError(f"no snapshot at {path}")
    try:
        with np.load(path, allow_pickle=False) as data:
            meta = json.loads(str(data["meta_json"]))
            state = SpectrumState(k_grid=data["k_grid"],
                                  amplitudes=data["amplitudes"],
                                  t=float(meta["t"]))
            return state, meta.pop("params"), meta
    except Exception as exc:
        raise CacheError(f"corrupt snapshot {path}: {exc}") from exc
