"""Integer search for the smallest n satisfying a monotone predicate."""
from __future__ import annotations

from typing import Callable

from biastol.errors import NoSolutionError

DEFAULT_CAP = 10_000_000


def smallest_n(
    ok: Callable[[int], bool],
    n_min: int,
    n_start: int | None = None,
    n_cap: int = DEFAULT_CAP,
) -> tuple[int, int]:
    """Smallest integer ``n >= n_min`` with ``ok(n)`` true.

    ``ok`` must be monotone (false then true).  Search brackets by doubling
    the distance from ``n_min`` starting at ``n_start``, then bisects.
    Returns ``(n, evaluations)``.
    """
    calls = 0

    def check(n: int) -> bool:
        nonlocal calls
        calls += 1
        return ok(n)

    n0 = max(n_min, n_start if n_start is not None else n_min)
    n0 = min(n0, n_cap)
    if check(n0):
        lo, hi = n_min - 1, n0
    else:
        lo = n0
        span = max(n0 - n_min, 1)
        while True:
            span *= 2
            hi = min(n_min + span, n_cap)
            if check(hi):
                break
            if hi >= n_cap:
                raise NoSolutionError(f"no n <= {n_cap} satisfies the design")
            lo = hi
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if check(mid):
            hi = mid
        else:
            lo = mid
    return hi, calls
