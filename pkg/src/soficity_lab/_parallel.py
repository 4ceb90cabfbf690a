import os
from concurrent.futures import ProcessPoolExecutor

THREADS_ENV = "SOFICITY_LAB_THREADS"


def worker_count() -> int:
    """Parallelism cap from ``SOFICITY_LAB_THREADS`` (default 1, i.e. serial)."""
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def pmap(fn, items, initializer=None, initargs=()):
    """Order-preserving map; uses a process pool when more than one worker is allowed."""
    items = list(items)
    workers = min(worker_count(), len(items))
    if workers <= 1:
        if initializer is not None:
            initializer(*initargs)
        return [fn(x) for x in items]
    with ProcessPoolExecutor(workers, initializer=initializer, initargs=initargs) as ex:
        return list(ex.map(fn, items))
