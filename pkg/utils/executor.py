from concurrent import futures
from concurrent.futures import CancelledError


class InlineResult:
    """Deferred call; runs when the harness asks for its result."""

    def __init__(self, pool: "InlinePoolExecutor", func, *args, **kwargs):
        self.pool = pool
        self.func = func
        self.args = args
        self.kwargs = kwargs

    def result(self):
        if self.pool.closed:
            raise CancelledError()
        return self.func(*self.args, **self.kwargs)


class InlinePoolExecutor:
    """Stands in for a process pool when jobs == 0: work runs in the calling process."""

    def __init__(self):
        self.closed = False

    def submit(self, func, *args, **kwargs) -> InlineResult:
        return InlineResult(self, func, *args, **kwargs)

    def shutdown(self, wait: bool = True, cancel_futures: bool = False):
        self.closed = True

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc_value, exc_tb):
        self.shutdown()


def get_pool(jobs: int):
    """Process pool for jobs > 0, in-process execution otherwise."""
    if jobs < 0:
        raise ValueError(f"jobs must be >= 0, got {jobs}")
    return futures.ProcessPoolExecutor(jobs) if jobs else InlinePoolExecutor()


def split_range(total: int, parts: int):
    """Contiguous [start, stop) chunks covering range(total)."""
    parts = max(1, min(parts, total))
    step, extra = divmod(total, parts)
    start = 0
    for index in range(parts):
        stop = start + step + (1 if index < extra else 0)
        yield start, stop
        start = stop
