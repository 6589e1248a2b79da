from typing import Any, Callable, Iterable, List, Optional

import os
import logging

from pathos.multiprocessing import ProcessingPool as Pool


logger = logging.getLogger(__name__)

THREADS_ENV = 'BISBM_THREADS'


def worker_count(requested: Optional[int]=None) -> int:
    """Requested worker count capped by $BISBM_THREADS; 1 means serial."""
    cap = os.environ.get(THREADS_ENV)
    count = requested if requested is not None else (int(cap) if cap else 1)
    if cap:
        count = min(count, int(cap))
    return max(int(count), 1)


def parallel_map(func: Callable[[Any], Any], items: Iterable[Any], processes: Optional[int]=None) -> List[Any]:
    items = list(items)
    processes = min(worker_count(processes), max(len(items), 1))
    if processes == 1:
        return list(map(func, items))

    logger.debug("mapping %d items over %d processes", len(items), processes)
    pool = Pool(processes)
    try:
        return pool.map(func, items)
    finally:
        pool.close()
        pool.join()
        pool.clear()
