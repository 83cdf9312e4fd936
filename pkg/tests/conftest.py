"""Shared fixtures: planes are built once per session."""

from __future__ import annotations

import functools
import os
from collections.abc import Callable
from pathlib import Path

import numpy as np
import pytest

from percolator.core.galois_field import make_field
from percolator.core.plane import IncidencePlane, build_pg2, load_plane

DATA_DIR = Path(__file__).parent / "data"


@functools.cache
def _pg(q: int) -> IncidencePlane:
    return build_pg2(make_field(q))


@pytest.fixture(scope="session")
def pg() -> Callable[[int], IncidencePlane]:
    """PG(2, q) factory; each order is built once."""
    return _pg


@pytest.fixture(scope="session")
def pg3() -> IncidencePlane:
    return _pg(3)


@pytest.fixture(scope="session")
def pg5() -> IncidencePlane:
    return _pg(5)


@pytest.fixture(scope="session")
def fano() -> IncidencePlane:
    """The hand-written Fano plane file, no coordinates."""
    return load_plane(DATA_DIR / "fano.json")


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240611)


@pytest.fixture(autouse=True)
def _clean_env(monkeypatch: pytest.MonkeyPatch) -> None:
    for name in list(os.environ):
        if name.startswith("PERCOLATOR_"):
            monkeypatch.delenv(name)
