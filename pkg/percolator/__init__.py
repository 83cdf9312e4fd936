"""Percolator package - r-neighbor line percolation on finite projective planes.

Structure:
    percolator/
    ├── cli.py               # CLI entry point (python -m percolator)
    └── core/
        ├── galois_field.py  # GF(q) arithmetic
        ├── plane.py         # Incidence planes, PG(2, q), axioms, plane files
        ├── percolation.py   # Spread rounds, closure, percolation time
        ├── constructions.py # Brooms, arcs, general position, slow and time-3 sets
        ├── bounds.py        # m_r / M_r / T_r bounds, LP bound, threshold
        ├── search.py        # Exact and heuristic extremal searches
        ├── random_models.py # Bernoulli, uniform and permutation Monte Carlo
        ├── workers.py       # Ordered process pool fan-out
        └── output.py        # JSON / CSV / text rendering

Public API:
- build_pg2, make_field: Build PG(2, q)
- closure, percolates, percolation_time: Run the spread
"""

from .core import build_pg2, closure, make_field, percolates, percolation_time

__all__ = [
    "build_pg2",
    "closure",
    "make_field",
    "percolates",
    "percolation_time",
]
