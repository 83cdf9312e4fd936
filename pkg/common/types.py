"""
Shared Types and Data Classes
==============================

Common type definitions used across the engine and the CLI.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any

from common.exceptions import BadRangeError, MissingSeedError
from common.utils import env_float, env_int

# ============================================================================
# Search Types
# ============================================================================


class SearchTarget(str, Enum):
    """Extremal parameter a search optimises."""

    MIN_PERC = "min_perc"  # m_r: smallest percolating set
    MAX_NONPERC = "max_nonperc"  # M_r: largest non-percolating set
    MAX_TIME = "max_time"  # T_r: slowest percolating set


class Strategy(str, Enum):
    """How a search explores its space."""

    EXACT = "exact"
    RANDOM = "random"
    HILLCLIMB = "hillclimb"


class TrialModel(str, Enum):
    """Random point-set models."""

    BERNOULLI = "bernoulli"
    UNIFORM = "uniform"
    PERMUTATION = "permutation"


class OutputFormat(str, Enum):
    """Artifact encodings the CLI can write."""

    JSON = "json"
    CSV = "csv"
    TEXT = "text"


# Budgets are checked once every this many nodes
BUDGET_CHECK_INTERVAL = 1 << 16

DEFAULT_NODE_LIMIT = 5_000_000
DEFAULT_TIME_LIMIT = 600.0
DEFAULT_RNG = "PCG64"


@dataclass(frozen=True)
class Budget:
    """Node and wall-clock limits for a search.

    Attributes:
        node_limit: Maximum nodes (closures or subsets examined), None = unlimited
        time_limit: Maximum wall-clock seconds, None = unlimited
        symmetry: Fix the first chosen point to index 0 on point-transitive planes
    """

    node_limit: int | None = DEFAULT_NODE_LIMIT
    time_limit: float | None = DEFAULT_TIME_LIMIT
    symmetry: bool = True

    def __post_init__(self) -> None:
        if self.node_limit is not None and self.node_limit <= 0:
            raise BadRangeError(f"node_limit must be positive, got: {self.node_limit}")
        if self.time_limit is not None and self.time_limit <= 0:
            raise BadRangeError(f"time_limit must be positive, got: {self.time_limit}")

    @classmethod
    def unlimited(cls, symmetry: bool = True) -> Budget:
        return cls(node_limit=None, time_limit=None, symmetry=symmetry)

    def to_dict(self) -> dict[str, Any]:
        return {"node_limit": self.node_limit, "time_limit": self.time_limit, "symmetry": self.symmetry}


# ============================================================================
# Run Configuration
# ============================================================================

# Subcommands that draw random numbers and therefore need --seed
STOCHASTIC_COMMANDS = frozenset({"mc", "table"})
STOCHASTIC_STRATEGIES = frozenset({Strategy.RANDOM.value, Strategy.HILLCLIMB.value})


@dataclass
class RunConfig:  # pylint: disable=too-many-instance-attributes
    """
    Fully resolved configuration of one CLI run.

    Every artifact echoes this object so a run can be repeated exactly.

    Attributes:
        subcommand: CLI subcommand (plane, percolate, construct, bounds, search, mc, table)
        q: Plane order (None when a plane file is given)
        r: Infection threshold
        seed: Master seed; mandatory for stochastic commands
        node_limit: Search node budget
        time_limit: Search wall-clock budget in seconds
        symmetry: Whether searches may fix the first point to index 0
        output_format: json | csv | text
        output_path: Destination file, None = stdout
        threads: Worker processes (1 = serial)
        rng: numpy bit generator name, pinned for provenance
        options: Subcommand-specific resolved options (target, strategy, grid, ...)
    """

    subcommand: str
    q: int | None = None
    r: int | None = None
    seed: int | None = None
    node_limit: int | None = None
    time_limit: float | None = None
    symmetry: bool = True
    output_format: OutputFormat = OutputFormat.JSON
    output_path: Path | None = None
    threads: int = 0  # 0 = resolve from env in __post_init__
    rng: str = ""
    options: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        """
        Resolve environment defaults and validate.

        Precedence is CLI value > environment variable > built-in default.

        Raises:
            BadRangeError: If a numeric field is out of range
            MissingSeedError: If a stochastic command has no seed
        """
        if not self.threads:
            object.__setattr__(self, "threads", env_int("PERCOLATOR_THREADS", 1))
        if self.node_limit is None:
            object.__setattr__(self, "node_limit", env_int("PERCOLATOR_NODE_LIMIT", DEFAULT_NODE_LIMIT))
        if self.time_limit is None:
            object.__setattr__(self, "time_limit", env_float("PERCOLATOR_TIME_LIMIT", DEFAULT_TIME_LIMIT))
        if not self.rng:
            object.__setattr__(self, "rng", os.getenv("PERCOLATOR_RNG", DEFAULT_RNG))

        if self.threads < 1:
            raise BadRangeError(f"threads must be a positive integer, got: {self.threads}")
        if self.q is not None and self.q < 2:
            raise BadRangeError(f"q must be at least 2, got: {self.q}")
        if self.r is not None and self.r < 1:
            raise BadRangeError(f"r must be at least 1, got: {self.r}")
        if self.seed is not None and self.seed < 0:
            raise BadRangeError(f"seed must be non-negative, got: {self.seed}")

        if self.is_stochastic and self.seed is None:
            raise MissingSeedError(f"'{self.subcommand}' is stochastic and requires an explicit --seed")

    @property
    def is_stochastic(self) -> bool:
        """Check if this run draws random numbers."""
        if self.subcommand in STOCHASTIC_COMMANDS:
            return True
        if self.subcommand == "search":
            return self.options.get("strategy") in STOCHASTIC_STRATEGIES
        if self.subcommand == "construct":
            return bool(self.options.get("randomize"))
        return False

    @property
    def budget(self) -> Budget:
        """Search budget derived from this config."""
        return Budget(node_limit=self.node_limit, time_limit=self.time_limit, symmetry=self.symmetry)

    def to_dict(self) -> dict[str, Any]:
        """Convert to dictionary for JSON serialization.

        Returns:
            Dictionary with all fields, enum values and paths as strings.
        """
        return {
            "subcommand": self.subcommand,
            "q": self.q,
            "r": self.r,
            "seed": self.seed,
            "node_limit": self.node_limit,
            "time_limit": self.time_limit,
            "symmetry": self.symmetry,
            "output_format": self.output_format.value,
            "output_path": str(self.output_path) if self.output_path else None,
            "threads": self.threads,
            "rng": self.rng,
            "options": self.options,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> RunConfig:
        """Create a RunConfig from a previously echoed dictionary.

        Raises:
            KeyError: If 'subcommand' is missing.
        """
        if "subcommand" not in data:
            raise KeyError("Required key 'subcommand' missing from run config dict")
        output_path = data.get("output_path")
        return cls(
            subcommand=data["subcommand"],
            q=data.get("q"),
            r=data.get("r"),
            seed=data.get("seed"),
            node_limit=data.get("node_limit"),
            time_limit=data.get("time_limit"),
            symmetry=data.get("symmetry", True),
            output_format=OutputFormat(data.get("output_format", "json")),
            output_path=Path(output_path) if output_path else None,
            threads=data.get("threads", 0),
            rng=data.get("rng", ""),
            options=data.get("options", {}),
        )
