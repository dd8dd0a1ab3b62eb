import os


def worker_count(workers=None) -> int:
    """Worker processes to use: explicit argument, else $SLOPECI_THREADS, else CPU count."""
    if workers is not None:
        return max(1, int(workers))
    env = os.environ.get("SLOPECI_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1
