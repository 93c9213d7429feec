"""Operation counters used to check per-call cryptographic budgets."""

from __future__ import annotations

import threading
from collections import Counter
from contextlib import contextmanager

_local = threading.local()


def bump(name: str, n: int = 1) -> None:
    stack = getattr(_local, "stack", None)
    if stack:
        for counter in stack:
            counter[name] += n


@contextmanager
def count_ops():
    """Collect counts of instrumented operations made inside the block.

    >>> with count_ops() as ops:
    ...     bump("prf")
    >>> ops["prf"]
    1
    """
    counter: Counter = Counter()
    stack = getattr(_local, "stack", None)
    if stack is None:
        stack = _local.stack = []
    stack.append(counter)
    try:
        yield counter
    finally:
        stack.remove(counter)
