"""
Ordered Worker Fan-Out
======================

Runs independent jobs either inline or on a process pool and yields their
results in job order, so a caller that merges results sequentially gets
the same answer for any worker count.

Public API:
    iter_ordered: Lazily yield fn(*job) for each job, in job order
    run_ordered: Eager list version of iter_ordered
"""

from __future__ import annotations

import logging
import multiprocessing
from collections.abc import Callable, Iterable, Iterator, Sequence
from concurrent.futures import Executor, ProcessPoolExecutor, ThreadPoolExecutor
from typing import Any, TypeVar

logger = logging.getLogger(__name__)

T = TypeVar("T")


def iter_ordered(fn: Callable[..., T], jobs: Iterable[Sequence[Any]], threads: int = 1) -> Iterator[T]:
    """
    Yield fn(*job) for every job, in the order the jobs were given.

    With threads == 1 each job runs only when its result is requested, so a
    caller that stops early skips the remaining jobs. With more threads all
    jobs are submitted up front; stopping early cancels the ones not started.

    Args:
        fn: Module-level callable (it must pickle)
        jobs: Argument tuples
        threads: Worker processes, 1 = inline
    """
    if threads <= 1:
        for job in jobs:
            yield fn(*job)
        return

    executor = _make_executor(threads)
    try:
        futures = [executor.submit(fn, *job) for job in jobs]
        logger.debug("Submitted %d jobs to %d workers", len(futures), threads)
        for future in futures:
            yield future.result()
    finally:
        executor.shutdown(wait=True, cancel_futures=True)


def run_ordered(fn: Callable[..., T], jobs: Iterable[Sequence[Any]], threads: int = 1) -> list[T]:
    return list(iter_ordered(fn, jobs, threads))


def _make_executor(threads: int) -> Executor:
    """Process pool with the fork context, falling back to threads where fork is unavailable."""
    try:
        context = multiprocessing.get_context("fork")
        return ProcessPoolExecutor(max_workers=threads, mp_context=context)
    except ValueError as e:
        logger.warning("Process pool unavailable (%s), using threads", e)
        return ThreadPoolExecutor(max_workers=threads)
