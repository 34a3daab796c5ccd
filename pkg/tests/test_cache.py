import json

import numpy as np
import pytest

from couette_spectrum import (
    CacheError,
    EvolutionParams,
    FlowConfig,
    get_or_build_tables,
    load_snapshot,
    load_tables,
    make_state,
    save_snapshot,
    save_tables,
    table_config_hash,
)
from couette_spectrum.cache import tables_path


def test_hash_distinguishes_configs():
    h1 = table_config_hash(0.5, 0.0, 88.1, 48, 12.0, 0.25)
    h2 = table_config_hash(0.5, 0.0, 90.0, 48, 12.0, 0.25)
    h3 = table_config_hash(0.5, 0.0, 88.1, 48, 12.0, 0.25)
    assert h1 != h2
    assert h1 == h3


def test_tables_round_trip(tiny_tables, tmp_path):
    p = tmp_path / "t.npz"
    save_tables(tiny_tables, p)
    loaded = load_tables(p)
    assert np.array_equal(loaded.b, tiny_tables.b)
    assert np.array_equal(loaded.c, tiny_tables.c)
    assert loaded.eps == tiny_tables.eps
    assert loaded.dv1_0_wall == tiny_tables.dv1_0_wall
    assert loaded.meta["reynolds"] == tiny_tables.meta["reynolds"]
    # pair lookup still works after reload
    u2, v2, w2 = loaded.pair_field(2.0, -2.0)
    u2b, v2b, w2b = tiny_tables.pair_field(2.0, -2.0)
    assert np.array_equal(v2, v2b)


def test_missing_and_corrupt_tables(tmp_path):
    with pytest.raises(CacheError):
        load_tables(tmp_path / "absent.npz")
    bad = tmp_path / "bad.npz"
    bad.write_bytes(b"not an npz")
    with pytest.raises(CacheError):
        load_tables(bad)


def test_version_mismatch(tiny_tables, tmp_path):
    p = tmp_path / "t.npz"
    save_tables(tiny_tables, p)
    with np.load(p) as data:
        payload = {k: data[k] for k in data.files}
    meta = json.loads(str(payload["meta_json"]))
    meta["format_version"] = 999
    payload["meta_json"] = np.array(json.dumps(meta))
    np.savez_compressed(p, **payload)
    with pytest.raises(CacheError):
        load_tables(p)


def test_get_or_build_idempotent(tmp_path):
    cfg = FlowConfig(eta=0.5, mu=0.0, reynolds=88.1)
    t1, h1, hit1 = get_or_build_tables(cfg, n_points=24, k_max=2.0, dk=1.0,
                                       cache_dir=tmp_path)
    assert not hit1
    t2, h2, hit2 = get_or_build_tables(cfg, n_points=24, k_max=2.0, dk=1.0,
                                       cache_dir=tmp_path)
    assert hit2 and h1 == h2
    assert np.array_equal(t1.b, t2.b)
    # config change forces a rebuild under a new key
    cfg2 = FlowConfig(eta=0.5, mu=0.0, reynolds=90.0)
    _, h3, hit3 = get_or_build_tables(cfg2, n_points=24, k_max=2.0, dk=1.0,
                                      cache_dir=tmp_path)
    assert not hit3 and h3 != h1
    # force_rebuild ignores the hit
    _, _, hit4 = get_or_build_tables(cfg, n_points=24, k_max=2.0, dk=1.0,
                                     cache_dir=tmp_path, force_rebuild=True)
    assert not hit4


def test_corrupt_cache_rebuilds(tmp_path):
    cfg = FlowConfig(eta=0.5, mu=0.0, reynolds=88.1)
    _, h, _ = get_or_build_tables(cfg, n_points=24, k_max=2.0, dk=1.0,
                                  cache_dir=tmp_path)
    tables_path(tmp_path, h).write_bytes(b"garbage")
    _, _, hit = get_or_build_tables(cfg, n_points=24, k_max=2.0, dk=1.0,
                                    cache_dir=tmp_path)
    assert not hit  # rebuilt


def test_snapshot_round_trip(tiny_tables, tmp_path):
    state = make_state(tiny_tables, seeds=[(2.0, 0.1 + 0.05j)])
    state.t = 1.25
    params = EvolutionParams(dt=0.01, t_max=5.0)
    p = tmp_path / "snap.npz"
    save_snapshot(p, state, params, tables_hash="abc123")
    loaded, pdict, meta = load_snapshot(p)
    assert loaded.t == 1.25
    assert np.array_equal(loaded.amplitudes, state.amplitudes)
    assert meta["tables_hash"] == "abc123"
    assert pdict["dt"] == 0.01 and pdict["t_max"] == 5.0
