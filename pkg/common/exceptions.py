"""
Percolator Exception Hierarchy
==============================

Structured exceptions for the line percolation toolkit.
All toolkit-specific exceptions inherit from PercolatorError.

Two families matter to callers:
- InputError: the request itself is invalid (bad parameters, bad files).
  The CLI maps these to exit code 2.
- InternalCheckError: an engine re-check rejected something the code
  produced itself. These indicate bugs and map to exit code 1.
"""

from __future__ import annotations

from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from percolator.core.plane import ValidationReport


class PercolatorError(Exception):
    """Base exception for all toolkit errors.

    All toolkit-specific exceptions should inherit from this class.
    This allows callers to catch all toolkit errors with a single except clause.
    """

    exit_code = 1


# ============================================================================
# Input Errors (exit code 2)
# ============================================================================


class InputError(PercolatorError):
    """A precondition on the caller's input does not hold."""

    exit_code = 2


class NotPrimePowerError(InputError):
    """Field order is not a prime power.

    Raised when:
    - make_field is asked for q = 6, 10, 12, ...
    - q < 2
    """


class DivisionByZeroError(InputError, ZeroDivisionError):
    """Inverse of the zero element was requested."""


class BadRangeError(InputError):
    """A numeric parameter is outside its admissible range.

    Raised when:
    - r is outside 1..q+1
    - a probability is outside [0, 1]
    - LP parameters j, N are out of range
    """


class BadArityError(InputError):
    """A broom was requested with a line count outside 1..q+1."""


class TooManyError(InputError):
    """More lines in general position were requested than the plane offers."""


class IdenticalArgumentsError(InputError):
    """line_through / meet called with the same point or line twice."""


class NotAPermutationError(InputError):
    """A one-by-one line sequence is not a permutation of all lines."""


class NoCoordinatesError(InputError):
    """A coordinate-dependent construction was run on a plane without coordinates."""


class OddOrderError(InputError):
    """A hyperoval construction was requested for odd q."""


class PreconditionUnmetError(InputError):
    """The (q, r) pair is outside the range a construction is proven for."""


class PlaneParseError(InputError):
    """Plane file is not valid JSON or does not follow the plane schema.

    Raised when:
    - File cannot be read or decoded
    - Required keys are missing or have the wrong type
    - Coordinates disagree with the listed incidences
    """


class AxiomViolationError(InputError):
    """An incidence structure fails the projective plane axioms."""

    def __init__(self, message: str, report: ValidationReport) -> None:
        super().__init__(message)
        self.report = report


class MissingSeedError(InputError):
    """A stochastic command was run without an explicit seed."""


# ============================================================================
# Internal Check Errors (exit code 1)
# ============================================================================


class InternalCheckError(PercolatorError):
    """Something the toolkit produced failed its own verification."""

    exit_code = 1


class VerificationError(InternalCheckError):
    """A witness or result failed its engine re-check.

    Raised when:
    - A search witness does not percolate / does percolate / has the wrong time
    - A construction's named claim fails
    """


class ConstructionFailedError(InternalCheckError):
    """No admissible choice was found for a construction's free parameters."""


class DegenerateSystemError(InternalCheckError):
    """A candidate LP vertex system is singular."""


# ============================================================================
# Control Flow
# ============================================================================


class BudgetExhaustedError(PercolatorError):
    """A search ran out of nodes or wall time.

    Searches catch this internally and report best-so-far with exact=False.
    """
