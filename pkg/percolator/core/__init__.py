"""Core engine - fields, planes, percolation, constructions, bounds, searches and Monte Carlo.

Exports:
    Fields and planes:
        Field, make_field: GF(q) arithmetic
        IncidencePlane, build_pg2, dual: Planes and PG(2, q)
        validate_axioms, load_plane, save_plane: Plane checks and files

    Percolation:
        closure, percolates, percolation_time: The spread process
        is_minimal_percolating: Inclusion-minimality check

    Searches:
        find_min_percolating, find_max_nonpercolating, find_max_time
"""

from .galois_field import Field, make_field
from .percolation import InfectionTrace, closure, is_minimal_percolating, percolates, percolation_time
from .plane import IncidencePlane, build_pg2, dual, load_plane, save_plane, validate_axioms
from .search import SearchOutcome, find_max_nonpercolating, find_max_time, find_min_percolating

__all__ = [
    # Fields and planes
    "Field",
    "IncidencePlane",
    "build_pg2",
    "dual",
    "load_plane",
    "make_field",
    "save_plane",
    "validate_axioms",
    # Percolation
    "InfectionTrace",
    "closure",
    "is_minimal_percolating",
    "percolates",
    "percolation_time",
    # Searches
    "SearchOutcome",
    "find_max_nonpercolating",
    "find_max_time",
    "find_min_percolating",
]
