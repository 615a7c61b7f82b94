#! /usr/bin/env python

import concurrent.futures as cf
import logging
from typing import Callable, Iterator, Sequence, TypeVar


T = TypeVar("T")
R = TypeVar("R")


def map_candidates(fn:Callable[[T], R], items:Sequence[T],
                   parallel:bool = False) -> Iterator[R]:
    """ Evaluate candidates, optionally in a process pool.

    Results are yielded in the order of ``items`` regardless of when the
    workers finish, so the first acceptable result is the same for both
    modes. The sequential mode is lazy and stops evaluating as soon as
    the caller stops iterating.

    :param fn: picklable module-level function
    :type fn: Callable[[T], R]
    :param items: candidates
    :type items: Sequence[T]
    :param parallel: use one worker process per CPU core
    :type parallel: bool
    :rtype: Iterator[R]
    """
    if not parallel or len(items) <= 1:
        for item in items:
            yield fn(item)

        return

    logging.debug(f"evaluating {len(items)} candidates in parallel")
    with cf.ProcessPoolExecutor() as executor:
        futures = [executor.submit(fn, item) for item in items]
        for future in futures:
            yield future.result()
