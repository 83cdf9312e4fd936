"""Common package - Shared types and utilities for the percolation engine and CLI.

Note: ValidationReport lives in percolator/core/plane.py since it is tightly
coupled with the axiom checker; AxiomViolationError only references it.
"""

# Explicit re-exports for proper package API
# pylint: disable=useless-import-alias
from .bitset import Bitset as Bitset
from .bitset import LineSet as LineSet
from .bitset import PointSet as PointSet
from .exceptions import BudgetExhaustedError as BudgetExhaustedError
from .exceptions import InputError as InputError
from .exceptions import InternalCheckError as InternalCheckError
from .exceptions import PercolatorError as PercolatorError
from .exceptions import VerificationError as VerificationError
from .state import FileArtifactRepository as FileArtifactRepository
from .types import Budget as Budget
from .types import OutputFormat as OutputFormat
from .types import RunConfig as RunConfig
from .types import SearchTarget as SearchTarget
from .types import Strategy as Strategy
from .types import TrialModel as TrialModel
from .utils import make_rng as make_rng
from .utils import validate_threshold as validate_threshold

# pylint: enable=useless-import-alias

__all__ = [
    # Bitsets
    "Bitset",
    "LineSet",
    "PointSet",
    # Exceptions
    "BudgetExhaustedError",
    "InputError",
    "InternalCheckError",
    "PercolatorError",
    "VerificationError",
    # State
    "FileArtifactRepository",
    # Types
    "Budget",
    "OutputFormat",
    "RunConfig",
    "SearchTarget",
    "Strategy",
    "TrialModel",
    # Utils
    "make_rng",
    "validate_threshold",
]
