"""
Shared Utility Functions
========================

Seed handling, environment helpers and small combinatorial helpers used
across the engine and the CLI.

Public API:
    make_rng: Build a numpy Generator for (seed, *keys) over a named bit generator
    spawn_seed: Derive a child integer seed from (seed, *keys)
    env_int: Read an integer environment variable with a default
    env_float: Read a float environment variable with a default
    resolve_log_level: Resolve the logging level (CLI > env > WARNING)
    validate_threshold: Validate 1 <= r <= q+1
"""

from __future__ import annotations

import logging
import os

import numpy as np

from common.exceptions import BadRangeError

DEFAULT_BIT_GENERATOR = "PCG64"
SUPPORTED_BIT_GENERATORS = ("PCG64", "PCG64DXSM", "Philox", "SFC64", "MT19937")


def make_rng(seed: int, *keys: int, bit_generator: str | None = None) -> np.random.Generator:
    """Return an independent Generator for the stream keyed by (seed, *keys).

    Streams are hash-split through SeedSequence, so trial i draws the same
    numbers whether it runs first, last, or in another process.

    Args:
        seed: Master seed (non-negative)
        *keys: Stream keys, e.g. a trial index
        bit_generator: numpy bit generator name; defaults to PERCOLATOR_RNG or PCG64

    Raises:
        BadRangeError: If the seed is negative or the generator name is unknown
    """
    if seed < 0:
        raise BadRangeError(f"seed must be non-negative, got: {seed}")
    name = bit_generator or os.getenv("PERCOLATOR_RNG", DEFAULT_BIT_GENERATOR)
    if name not in SUPPORTED_BIT_GENERATORS:
        raise BadRangeError(f"Unknown bit generator '{name}', expected one of {', '.join(SUPPORTED_BIT_GENERATORS)}")
    sequence = np.random.SeedSequence([seed, *keys])
    return np.random.Generator(getattr(np.random, name)(sequence))


def spawn_seed(seed: int, *keys: int) -> int:
    """Derive a 63-bit child seed for the stream keyed by (seed, *keys)."""
    state = np.random.SeedSequence([seed, *keys]).generate_state(2, dtype=np.uint32)
    return (int(state[0]) << 31) ^ int(state[1])


def env_int(name: str, default: int) -> int:
    """Read an integer environment variable, falling back to `default` when unset or empty.

    Raises:
        BadRangeError: If the variable is set but not an integer
    """
    raw = os.getenv(name, "").strip()
    if not raw:
        return default
    try:
        return int(raw)
    except ValueError as e:
        raise BadRangeError(f"{name} must be an integer, got: {raw!r}") from e


def env_float(name: str, default: float) -> float:
    """Read a float environment variable, falling back to `default` when unset or empty.

    Raises:
        BadRangeError: If the variable is set but not a number
    """
    raw = os.getenv(name, "").strip()
    if not raw:
        return default
    try:
        return float(raw)
    except ValueError as e:
        raise BadRangeError(f"{name} must be a number, got: {raw!r}") from e


def resolve_log_level(cli_level: str | None) -> int:
    """Resolve the log level: --log-level > PERCOLATOR_LOG_LEVEL > WARNING."""
    name = (cli_level or os.getenv("PERCOLATOR_LOG_LEVEL") or "WARNING").upper()
    level = logging.getLevelName(name)
    return level if isinstance(level, int) else logging.WARNING


def validate_threshold(q: int, r: int) -> None:
    """Check the threshold range 1 <= r <= q+1.

    Raises:
        BadRangeError: If r is out of range
    """
    if not 1 <= r <= q + 1:
        raise BadRangeError(f"r must be in 1..{q + 1} for q={q}, got: {r}")
