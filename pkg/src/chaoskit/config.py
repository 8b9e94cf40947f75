"""Process-wide knobs: the dense-tensor entry budget and the thread cap.

Intermediate tensors in k-th moment expansions can reach order ~kp/2+p,
so every routine that materializes a dense array checks the budget first
and fails loudly instead of thrashing memory.
"""

from __future__ import annotations

import os
from contextlib import contextmanager

from .errors import BudgetExceededError

DEFAULT_ENTRY_BUDGET = 10_000_000

_entry_budget = DEFAULT_ENTRY_BUDGET
_thread_count: int | None = None


def entry_budget() -> int:
    return _entry_budget


def set_entry_budget(n: int) -> None:
    global _entry_budget
    if n < 1:
        raise ValueError("entry budget must be positive")
    _entry_budget = int(n)


@contextmanager
def budget(n: int):
    """Temporarily override the entry budget."""
    global _entry_budget
    old = _entry_budget
    set_entry_budget(n)
    try:
        yield
    finally:
        _entry_budget = old


def check_entries(m: int, order: int) -> int:
    """Return m**order after verifying it fits in the budget."""
    entries = m**order
    if entries > _entry_budget:
        raise BudgetExceededError(order, entries, _entry_budget)
    return entries


def thread_count() -> int:
    """Worker cap for parallel sections; CHAOSKIT_THREADS is the fallback."""
    if _thread_count is not None:
        return _thread_count
    env = os.environ.get("CHAOSKIT_THREADS", "")
    try:
        return max(1, int(env))
    except ValueError:
        return 1


def set_thread_count(n: int | None) -> None:
    global _thread_count
    _thread_count = None if n is None else max(1, int(n))
