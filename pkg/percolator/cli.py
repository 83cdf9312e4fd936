"""
Percolator CLI
==============

Command-line entry point: build and validate planes, run closures,
constructions, bounds, extremal searches, Monte Carlo experiments and the
small-order percolation time table.

Example Usage:
    python -m percolator plane --q 5 --out pg25.json
    python -m percolator percolate --plane pg25.json --r 3 --points 0,1,2,6,7,12
    python -m percolator search min --q 5 --r 3
    python -m percolator construct t3 --q 11 --r 4
    python -m percolator mc threshold --q 101 --r 3 --trials 200 --seed 7
    python -m percolator table --qmax 5 --seed 1 --node-limit 1000000 --format text

Exit codes: 0 on success, 2 on bad input (usage, ranges, plane files,
missing seeds), 1 when an internal re-verification fails.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from collections.abc import Callable, Sequence
from pathlib import Path
from typing import Any

from dotenv import load_dotenv

from common.bitset import PointSet
from common.exceptions import BadRangeError, MissingSeedError, PercolatorError, PlaneParseError
from common.types import OutputFormat, RunConfig, Strategy
from common.utils import resolve_log_level, spawn_seed, validate_threshold
from percolator.core import bounds, constructions, random_models, search
from percolator.core.galois_field import is_prime_power, make_field
from percolator.core.output import Artifact, emit, format_key_values, format_time_table
from percolator.core.percolation import closure, greedy_percolating_sequence, is_minimal_percolating
from percolator.core.plane import (
    IncidencePlane,
    build_pg2,
    is_arc,
    lines_in_general_position,
    load_plane,
    plane_to_dict,
    validate_axioms,
)

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
ENV_FILE = Path(__file__).parent.parent / ".env"

CONSTRUCTIONS = (
    "broom",
    "oval",
    "hyperoval",
    "lines",
    "min",
    "t3",
    "slow",
    "dual-hyperoval",
    "hyperoval-complement",
)
SEARCH_TARGETS = ("min", "max", "time", "minimal")
MC_MODES = ("probability", "threshold", "bottleneck", "uniform")
TABLE_ORDERS = (3, 5, 7)

# Cells of the percolation time table, per plane order
TABLE_CELLS = {3: (2, 3), 5: (3, 4, 5), 7: (5, 6, 7)}

# Largest order whose table cells start with the exact minimal-set walk
EXACT_TABLE_QMAX = 5

# Default threshold grid, as multiples of the critical probability
THRESHOLD_FACTORS = (0.125, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0)

MC_DEFAULT_Q = 101
MC_DEFAULT_TRIALS = 200

# Keys of the parsed namespace that RunConfig carries as fields, not options
_CONFIG_KEYS = frozenset(
    {"command", "q", "r", "seed", "node_limit", "time_limit", "no_symmetry", "format", "out", "threads", "log_level"}
)


def main(argv: Sequence[str] | None = None) -> int:
    """Parse arguments, run one subcommand and return the exit code."""
    load_dotenv(ENV_FILE)
    args = _parse_args(argv)
    logging.basicConfig(level=resolve_log_level(args.log_level), format=LOG_FORMAT, stream=sys.stderr)

    try:
        config = _build_config(args)
        logger.info("Running %s with %s", config.subcommand, config.to_dict())
        artifact = COMMANDS[args.command](args, config)
        path = emit(artifact, config)
    except PercolatorError as e:
        _print_error(e)
        return e.exit_code
    except OSError as e:
        _print_error(e)
        return 2
    if path is not None:
        logger.info("Wrote %s", path)
    return 0


# ============================================================================
# Subcommands
# ============================================================================


def cmd_plane(args: argparse.Namespace, config: RunConfig) -> Artifact:
    """Build PG(2, q) or validate a plane file; the JSON artifact is itself a plane file."""
    plane = _acquire_plane(args)
    report = validate_axioms(plane)
    data = plane_to_dict(plane)
    data["validation"] = report.to_dict()
    summary = {
        "q": plane.order,
        "points": plane.num_points,
        "lines": plane.num_lines,
        "points_per_line": plane.order + 1,
        "coordinates": plane.has_coordinates,
        "axioms": "pass" if report.passed else "FAIL",
    }
    rows = [(line, " ".join(map(str, points))) for line, points in enumerate(plane.points_of_line)]
    return Artifact(data, header=("line", "points"), rows=rows, text=format_key_values(summary), flat=True)


def cmd_percolate(args: argparse.Namespace, config: RunConfig) -> Artifact:
    """Run the spread to its fixpoint from an explicit point set."""
    plane = _acquire_plane(args)
    r = _require_r(args, plane)
    points = _parse_points(args, plane)
    trace = closure(plane, points, r)
    data = trace.to_dict()
    data["q"] = plane.order
    data["minimal"] = trace.percolates and is_minimal_percolating(plane, points, r)
    data["line_sequence"] = greedy_percolating_sequence(plane, points, r)

    rows = [
        (delta.round, " ".join(map(str, delta.new_lines)), " ".join(map(str, delta.new_points)))
        for delta in trace.rounds
    ]
    summary = {key: data[key] for key in ("q", "r", "percolates", "time", "closure_rounds", "closure_size", "minimal")}
    text = format_key_values(summary)
    if rows:
        text += "\n" + "\n".join(f"round {k}: lines [{lines}] points [{pts}]" for k, lines, pts in rows)
    return Artifact(data, header=("round", "new_lines", "new_points"), rows=rows, text=text)


def cmd_construct(args: argparse.Namespace, config: RunConfig) -> Artifact:
    """Build one named construction and annotate it with its percolation behaviour."""
    plane = _acquire_plane(args)
    if args.r is not None:
        validate_threshold(plane.order, args.r)
    name = args.name
    if name in ("oval", "hyperoval"):
        points = constructions.conic_oval(plane) if name == "oval" else constructions.hyperoval(plane)
        data = {"name": name, "q": plane.order, "size": len(points), "point_indices": points.indices()}
        data["arc"] = is_arc(plane, points)
        return Artifact(data, text=format_key_values(data))
    if name == "lines":
        k = args.k if args.k is not None else plane.order + 1
        lines = constructions.general_position_lines(plane, k)
        data = {"name": name, "q": plane.order, "k": k, "lines": lines}
        data["general_position"] = lines_in_general_position(plane, lines)
        return Artifact(data, text=format_key_values(data))

    result = _build_construction(plane, args, config)
    data = result.to_dict()
    if result.r is not None:
        trace = closure(plane, result.points, result.r)
        data["percolates"] = trace.percolates
        data["time"] = trace.time
        data["minimal"] = trace.percolates and is_minimal_percolating(plane, result.points, result.r)
    rows = [(check.name, check.passed) for check in result.checks]
    shown = {key: value for key, value in data.items() if key not in ("checks", "lines")}
    return Artifact(data, header=("check", "pass"), rows=rows, text=format_key_values(shown))


def cmd_bounds(args: argparse.Namespace, config: RunConfig) -> Artifact:
    """Bound reports for m_r, M_r, T_r and the threshold, for one r or every r."""
    q = _require_q(args)
    thresholds = [args.r] if args.r is not None else list(range(1, q + 2))
    desarguesian = is_prime_power(q)
    reports = []
    for r in thresholds:
        reports.extend(
            [
                bounds.m_r_bounds(q, r, desarguesian),
                bounds.M_r_bounds(q, r, desarguesian),
                bounds.T_r_bounds(q, r),
                bounds.p_c_bounds(q, r),
            ]
        )
    data: dict[str, Any] = {"q": q, "desarguesian": desarguesian, "reports": [report.to_dict() for report in reports]}
    if args.p is not None:
        data["rich_lines"] = [
            {"r": r, "p": args.p, **bounds.expected_rich_lines(q, r, args.p).to_dict()} for r in thresholds
        ]

    header = ("parameter", "q", "r", "lower", "upper", "exact", "lower_key", "upper_key")
    rows = [
        (report.parameter, report.q, report.r, report.lower, report.upper, report.exact, report.lower_key,
         report.upper_key)
        for report in reports
    ]
    text = "\n".join(
        f"{row[0]:<4} r={row[2]:<3} {row[3]!s:>10} .. {row[4]!s:<10} {'exact' if row[5] else ''}".rstrip()
        for row in rows
    )
    return Artifact(data, header=header, rows=rows, text=text)


def cmd_search(args: argparse.Namespace, config: RunConfig) -> Artifact:
    """Run an extremal search and report the outcome with its witness."""
    plane = _acquire_plane(args)
    r = _require_r(args, plane)
    strategy = Strategy(args.strategy)
    if args.target != "time" and strategy is not Strategy.EXACT:
        raise BadRangeError(f"search {args.target} only supports --strategy exact")

    if args.target == "minimal":
        return _enumerate_minimal(plane, r, args, config)
    if args.target == "min":
        outcome = search.find_min_percolating(plane, r, config.budget, config.threads, args.start)
    elif args.target == "max" and args.brute_force:
        outcome = search.exhaustive_max_nonpercolating(plane, r)
    elif args.target == "max":
        outcome = search.find_max_nonpercolating(plane, r, config.budget)
    else:
        outcome = search.find_max_time(plane, r, strategy, config.budget, config.seed, args.patience)

    data = outcome.to_dict()
    return Artifact(data, text=format_key_values(data))


def cmd_mc(args: argparse.Namespace, config: RunConfig) -> Artifact:
    """Monte Carlo experiments on random point sets."""
    seed = _require_seed(config)
    plane = _acquire_plane(args, default_q=MC_DEFAULT_Q)
    r = _require_r(args, plane)
    trials = args.trials if args.trials is not None else MC_DEFAULT_TRIALS
    p_star = bounds.critical_p(plane.order, r)

    if args.mode == "bottleneck":
        records = random_models.run_bottleneck(plane, r, trials, seed, config.threads, config.rng)
        summary = random_models.summarize_bottleneck(records)
        rows = [(rec.trial, rec.tau_r, rec.tau_perc, rec.tau_r == rec.tau_perc) for rec in records]
        data = {"summary": summary.to_dict(), "trials": [rec.to_dict() for rec in records]}
        return Artifact(
            data, header=random_models.BOTTLENECK_COLUMNS, rows=rows, text=format_key_values(summary.to_dict())
        )

    if args.mode == "threshold":
        grid = args.grid if args.grid is not None else [factor * p_star for factor in THRESHOLD_FACTORS]
        estimates = random_models.threshold_scan(plane, r, grid, trials, seed, config.threads, config.rng)
    else:
        p = args.p if args.p is not None else args.factor * p_star
        if args.mode == "uniform":
            m = args.m if args.m is not None else round(p * plane.num_points)
            estimates = [
                random_models.uniform_percolation_probability(plane, r, m, trials, seed, config.threads, config.rng)
            ]
        else:
            estimates = [random_models.percolation_probability(plane, r, p, trials, seed, config.threads, config.rng)]

    data = {"q": plane.order, "r": r, "critical_p": p_star, "estimates": [estimate.to_dict() for estimate in estimates]}
    rows = [estimate.row() for estimate in estimates]
    text = "\n".join(
        f"p={e.p:.6g}  {e.percolated}/{e.trials}  estimate={e.estimate:.4f}  95% CI [{e.ci_low:.4f}, {e.ci_high:.4f}]"
        for e in estimates
    )
    return Artifact(data, header=random_models.ESTIMATE_COLUMNS, rows=rows, text=text)


def cmd_table(args: argparse.Namespace, config: RunConfig) -> Artifact:
    """
    Maximum percolation times for small planes.

    Orders up to EXACT_TABLE_QMAX walk the minimal percolating sets. A cell
    whose walk runs out of budget falls back to a seeded hill climb, and
    larger orders only hill climb, so those entries are lower bounds.
    """
    seed = _require_seed(config)
    published = {(entry.q, entry.r): entry for entry in bounds.reference_table()}
    cells = []
    for q in sorted(TABLE_CELLS):
        if q > args.qmax:
            break
        plane = build_pg2(make_field(q))
        for r in TABLE_CELLS[q]:
            cell_seed = spawn_seed(seed, q, r)
            outcome = _table_cell(plane, r, config, cell_seed)
            reference = published.get((q, r))
            cells.append(
                {
                    "q": q,
                    "r": r,
                    "value": outcome.value,
                    "exact": outcome.exact,
                    "budget_exhausted": outcome.budget_exhausted,
                    "strategy": outcome.strategy.value,
                    "seed": cell_seed,
                    "nodes": outcome.nodes,
                    "witness": outcome.witness.indices() if outcome.witness is not None else None,
                    "published": reference.time if reference else None,
                    "published_exact": reference.exact if reference else None,
                }
            )

    header = ("q", "r", "value", "exact", "budget_exhausted", "published", "published_exact")
    rows = [tuple(cell[key] for key in header) for cell in cells]
    return Artifact({"qmax": args.qmax, "cells": cells}, header=header, rows=rows, text=format_time_table(cells))


def _table_cell(plane: IncidencePlane, r: int, config: RunConfig, seed: int) -> search.SearchOutcome:
    outcome = None
    if plane.order <= EXACT_TABLE_QMAX:
        logger.info("table cell q=%d r=%d (exact)", plane.order, r)
        outcome = search.find_max_time(plane, r, Strategy.EXACT, config.budget)
        if outcome.exact:
            return outcome
    logger.info("table cell q=%d r=%d (hillclimb)", plane.order, r)
    climbed = search.find_max_time(plane, r, Strategy.HILLCLIMB, config.budget, seed)
    if outcome is not None and (climbed.value is None or (outcome.value or 0) >= climbed.value):
        return outcome
    return climbed


COMMANDS: dict[str, Callable[[argparse.Namespace, RunConfig], Artifact]] = {
    "plane": cmd_plane,
    "percolate": cmd_percolate,
    "construct": cmd_construct,
    "bounds": cmd_bounds,
    "search": cmd_search,
    "mc": cmd_mc,
    "table": cmd_table,
}


# ============================================================================
# Private Helper Functions
# ============================================================================


def _print_error(error: BaseException) -> None:
    """One-line diagnostic on stderr."""
    message = " ".join(str(error).split()) or type(error).__name__
    print(f"error: {message}", file=sys.stderr)


def _build_config(args: argparse.Namespace) -> RunConfig:
    options = {
        key: _plain(value) for key, value in sorted(vars(args).items()) if key not in _CONFIG_KEYS and value is not None
    }
    q = args.q
    if args.command == "mc" and q is None and args.plane is None:
        q = MC_DEFAULT_Q
    return RunConfig(
        subcommand=args.command,
        q=q,
        r=args.r,
        seed=args.seed,
        node_limit=args.node_limit,
        time_limit=args.time_limit,
        symmetry=not args.no_symmetry,
        output_format=OutputFormat(args.format),
        output_path=args.out,
        threads=args.threads or 0,
        options=options,
    )


def _plain(value: Any) -> Any:
    if isinstance(value, Path):
        return str(value)
    if isinstance(value, list):
        return [_plain(item) for item in value]
    return value


def _acquire_plane(args: argparse.Namespace, default_q: int | None = None) -> IncidencePlane:
    """Load --plane, or build PG(2, q) from --q (or the default order)."""
    if args.plane is not None:
        plane = load_plane(args.plane)
        if args.q is not None and args.q != plane.order:
            raise BadRangeError(f"--q {args.q} disagrees with the order {plane.order} of {args.plane}")
        return plane
    q = args.q if args.q is not None else default_q
    if q is None:
        raise BadRangeError(f"{args.command} needs --q or --plane")
    return build_pg2(make_field(q))


def _require_q(args: argparse.Namespace) -> int:
    if args.q is None:
        raise BadRangeError(f"{args.command} needs --q")
    return args.q


def _require_r(args: argparse.Namespace, plane: IncidencePlane) -> int:
    if args.r is None:
        raise BadRangeError(f"{args.command} needs --r")
    validate_threshold(plane.order, args.r)
    return args.r


def _require_seed(config: RunConfig) -> int:
    if config.seed is None:
        raise MissingSeedError(f"'{config.subcommand}' is stochastic and requires an explicit --seed")
    return config.seed


def _parse_points(args: argparse.Namespace, plane: IncidencePlane) -> PointSet:
    """Point set from --points "0,1,2" or --points-file (a JSON list or a previous artifact)."""
    if args.points is not None:
        try:
            indices = [int(token) for token in args.points.replace(",", " ").split()]
        except ValueError as e:
            raise BadRangeError(f"--points must be integers separated by commas, got: {args.points!r}") from e
    elif args.points_file is not None:
        indices = _read_points_file(args.points_file)
    else:
        raise BadRangeError("percolate needs --points or --points-file")
    try:
        return plane.point_set(indices)
    except ValueError as e:
        raise BadRangeError(f"point index outside 0..{plane.num_points - 1}: {e}") from e


def _read_points_file(path: Path) -> list[int]:
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, UnicodeDecodeError, json.JSONDecodeError) as e:
        raise PlaneParseError(f"Cannot read points file {path}: {e}") from e
    if isinstance(data, dict):
        result = data.get("result", data)
        data = result.get("point_indices", result.get("witness")) if isinstance(result, dict) else None
    if not isinstance(data, list) or not all(isinstance(item, int) and not isinstance(item, bool) for item in data):
        raise PlaneParseError(f"{path}: expected a list of point indices or an artifact with 'point_indices'")
    return data


def _build_construction(
    plane: IncidencePlane, args: argparse.Namespace, config: RunConfig
) -> constructions.ConstructionResult:
    name = args.name
    if name == "dual-hyperoval":
        return constructions.dual_hyperoval_union(plane, args.r)
    if name == "hyperoval-complement":
        return constructions.hyperoval_complement(plane, args.r)
    r = _require_r(args, plane)
    if name == "broom":
        return constructions.broom_construction(plane, r, args.m)
    if name == "min":
        seed = config.seed if args.randomize else None
        return constructions.min_percolating_from_general_position(plane, r, args.variant, seed)
    if name == "t3":
        return constructions.minimal_t3_set(plane, r)
    return constructions.slow_percolating_set(plane, r)


def _enumerate_minimal(plane: IncidencePlane, r: int, args: argparse.Namespace, config: RunConfig) -> Artifact:
    """Every inclusion-minimal percolating set (up to --max-size) with its percolation time."""
    enumeration = search.enumerate_minimal_percolating(plane, r, config.budget, args.max_size)
    found = []
    for points in enumeration:
        trace = closure(plane, points, r)
        found.append({"points": points.indices(), "size": len(points), "time": trace.time})
    times = [item["time"] for item in found]
    data = {
        "target": "minimal",
        "q": plane.order,
        "r": r,
        "count": len(found),
        "min_time": min(times) if times else None,
        "max_time": max(times) if times else None,
        "truncated": enumeration.truncated,
        "nodes": enumeration.nodes,
        "sets": found,
    }
    rows = [(" ".join(map(str, item["points"])), item["size"], item["time"]) for item in found]
    shown = {key: value for key, value in data.items() if key != "sets"}
    return Artifact(data, header=("points", "size", "time"), rows=rows, text=format_key_values(shown))


def _float_list(text: str) -> list[float]:
    try:
        return [float(token) for token in text.replace(",", " ").split()]
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"expected numbers separated by commas, got: {text!r}") from e


def _parse_args(argv: Sequence[str] | None = None) -> argparse.Namespace:
    """Parse command line arguments."""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=[f.value for f in OutputFormat], default=OutputFormat.JSON.value)
    common.add_argument("--out", type=Path, default=None, help="Write the artifact here instead of stdout")
    common.add_argument("--threads", type=int, default=None, help="Worker processes (env PERCOLATOR_THREADS, 1)")
    common.add_argument("--log-level", default=None, help="DEBUG, INFO, WARNING... (env PERCOLATOR_LOG_LEVEL)")
    common.add_argument("--node-limit", type=int, default=None, help="Search node budget (env PERCOLATOR_NODE_LIMIT)")
    common.add_argument("--time-limit", type=float, default=None, help="Search seconds (env PERCOLATOR_TIME_LIMIT)")
    common.add_argument("--no-symmetry", action="store_true", help="Do not fix the first point to index 0")
    common.add_argument("--seed", type=int, default=None, help="Master seed, required for stochastic runs")
    common.add_argument("--q", type=int, default=None, help="Plane order (builds PG(2, q))")
    common.add_argument("--r", type=int, default=None, help="Infection threshold")

    source = argparse.ArgumentParser(add_help=False)
    source.add_argument("--plane", type=Path, default=None, help="Plane JSON file instead of --q")

    parser = argparse.ArgumentParser(
        prog="percolator",
        description="r-neighbor line percolation on finite projective planes",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog=__doc__.split("Example Usage:")[1] if __doc__ else None,
    )
    commands = parser.add_subparsers(dest="command", required=True)

    commands.add_parser("plane", parents=[common, source], help="Build or validate a plane")

    percolate = commands.add_parser("percolate", parents=[common, source], help="Closure of a point set")
    percolate.add_argument("--points", default=None, help='Point indices, e.g. "0,1,2"')
    percolate.add_argument("--points-file", type=Path, default=None, help="JSON list or a construct/search artifact")

    construct = commands.add_parser("construct", parents=[common, source], help="Explicit constructions")
    construct.add_argument("name", choices=CONSTRUCTIONS)
    construct.add_argument("--m", type=int, default=None, help="Broom size (default r)")
    construct.add_argument("--k", type=int, default=None, help="Number of lines (default q+1)")
    construct.add_argument("--variant", choices=constructions.VARIANTS, default="auto")
    construct.add_argument("--randomize", action="store_true", help="Randomize free choices (needs --seed)")

    bounds_parser = commands.add_parser("bounds", parents=[common], help="Bounds on m_r, M_r, T_r and the threshold")
    bounds_parser.add_argument("--p", type=float, default=None, help="Also report expected r-rich lines at this p")

    search_parser = commands.add_parser("search", parents=[common, source], help="Extremal set searches")
    search_parser.add_argument("target", choices=SEARCH_TARGETS)
    search_parser.add_argument("--strategy", choices=[s.value for s in Strategy], default=Strategy.EXACT.value)
    search_parser.add_argument("--start", type=int, default=None, help="First size for search min")
    search_parser.add_argument("--patience", type=int, default=search.DEFAULT_PATIENCE, help="Hill climb restarts")
    search_parser.add_argument("--brute-force", action="store_true", help="search max over all 2^n subsets")
    search_parser.add_argument("--max-size", type=int, default=None, help="Largest set for search minimal")

    mc = commands.add_parser("mc", parents=[common, source], help="Monte Carlo on random point sets")
    mc.add_argument("mode", choices=MC_MODES)
    mc.add_argument("--p", type=float, default=None, help="Bernoulli probability (default factor * p*)")
    mc.add_argument("--factor", type=float, default=1.0, help="Multiple of the critical probability p*")
    mc.add_argument("--grid", type=_float_list, default=None, help="Comma-separated p values for threshold")
    mc.add_argument("--m", type=int, default=None, help="Set size for uniform (default round(p n))")
    mc.add_argument("--trials", type=int, default=None, help=f"Trials (default {MC_DEFAULT_TRIALS})")

    table = commands.add_parser("table", parents=[common], help="Maximum percolation time table")
    table.add_argument("--qmax", type=int, choices=TABLE_ORDERS, default=3)

    args = parser.parse_args(argv)
    for name in ("plane", "points", "points_file"):
        if not hasattr(args, name):
            setattr(args, name, None)
    return args
