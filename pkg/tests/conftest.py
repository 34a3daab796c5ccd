import pathlib

import pytest

from couette_spectrum import FlowConfig, assemble_tables, build_grid, get_or_build_tables

REPO_CACHE = pathlib.Path(__file__).resolve().parent.parent / ".cache"


@pytest.fixture(scope="session")
def cfg881():
    return FlowConfig(eta=0.5, mu=0.0, reynolds=88.1)


@pytest.fixture(scope="session")
def grid48(cfg881):
    return build_grid(48, cfg881.r_i, cfg881.r_o)


@pytest.fixture(scope="session")
def tiny_tables(cfg881):
    """Coarse grid (K=4, dk=1, n=24): fast builds for algebraic/oracle tests."""
    grid = build_grid(24, cfg881.r_i, cfg881.r_o)
    return assemble_tables(cfg881, grid, k_max=4.0, dk=1.0)


@pytest.fixture(scope="session")
def mid_tables(cfg881):
    """Half-resolution physics grid (K=8, dk=0.5, n=32)."""
    grid = build_grid(32, cfg881.r_i, cfg881.r_o)
    return assemble_tables(cfg881, grid, k_max=8.0, dk=0.5)


@pytest.fixture(scope="session")
def full_tables(cfg881):
    """The production grid (K=12, dk=0.25, n=48); disk-cached across sessions."""
    tables, _, _ = get_or_build_tables(cfg881, n_points=48, k_max=12.0, dk=0.25,
                                       cache_dir=REPO_CACHE)
    return tables
