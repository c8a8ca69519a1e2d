"""Majority sets as an asymptotically invariant sequence for the Bernoulli shift.

``A_n = {x : x_0 + ... + x_{2n} >= n + 1}`` has measure exactly 1/2, and the
overlap of ``A_n`` with its translate by ``d`` reduces to binomial sums over
the shared part of the two windows.  Everything is computed with integer
counts; a Fraction is only built at the public boundary.
"""

from __future__ import annotations

from collections import OrderedDict
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import comb
from typing import Dict, List, Tuple

from .rigor import as_rational


class SearchCapExceeded(RuntimeError):
    """No n up to the configured cap met the requested slack."""

    def __init__(self, radius: int, slack: Fraction, cap: int):
        super().__init__(
            f"no majority set with n <= {cap} has symmetric difference <= {slack} "
            f"on the window of radius {radius}"
        )
        self.radius = radius
        self.slack = slack
        self.cap = cap


DEFAULT_SEARCH_CAP = 100_000


def binomial_row(w: int) -> List[int]:
    """Counts C(w, 0..w), built with the multiplicative recurrence."""
    row = [1] * (w + 1)
    for j in range(w):
        row[j + 1] = row[j] * (w - j) // (j + 1)
    return row


_COMB_CACHE: "OrderedDict[Tuple[int, int], int]" = OrderedDict()
_COMB_CACHE_SIZE = 64


def _comb_stepped(N: int, k: int) -> int:
    """C(N, k), stepped from a cached C(N-2, k-1) when possible.

    Scans over consecutive n ask for exactly that neighbour, and the step
    ``C(N,k) = C(N-2,k-1) (N-1) N / (k (N-k))`` is an exact division,
    which is far cheaper than a fresh ``math.comb`` at these sizes.
    """
    prev = _COMB_CACHE.get((N - 2, k - 1))
    if prev is not None and k >= 1:
        value = prev * (N - 1) * N // (k * (N - k))
    else:
        value = comb(N, k)
    _COMB_CACHE[(N, k)] = value
    if len(_COMB_CACHE) > _COMB_CACHE_SIZE:
        _COMB_CACHE.popitem(last=False)
    return value


def _cumulative(row: List[int]) -> List[int]:
    acc = []
    total = 0
    for c in row:
        total += c
        acc.append(total)
    return acc


@lru_cache(maxsize=4096)
def _leak_count(n: int, d: int) -> Tuple[int, int]:
    """Return ``(c, e)`` with ``nu(A_n minus d.A_n) = c / 2**e``.

    The two windows share ``L = 2n+1-w`` coordinates and each has ``w``
    private ones.  With ``s`` ones on the shared block, a point lies in
    ``A_n`` but not in the translate iff its private block for ``A_n`` has at
    least ``n+1-s`` ones while the other private block has at most ``n-s``.
    Only ``n+1-w <= s <= n`` contributes, so the sum has at most ``w`` terms.
    """
    w = min(d, 2 * n + 1)
    shared = 2 * n + 1 - w
    if w == 0:
        return 0, 0
    row = binomial_row(w)
    cum = _cumulative(row)
    total_w = cum[-1]
    acc = 0
    lo = max(0, n + 1 - w)
    hi = min(shared, n)
    if lo <= hi:
        c = _comb_stepped(shared, lo)
        for s in range(lo, hi + 1):
            need = n + 1 - s           # private ones needed to be in A_n
            at_least = total_w - (cum[need - 1] if need >= 1 else 0)
            at_most = cum[n - s]       # private ones allowed to stay out
            acc += c * at_least * at_most
            c = c * (shared - s) // (s + 1)
    return acc, shared + 2 * w


def majority_measure(n: int) -> Fraction:
    """Measure of ``A_n`` from the binomial tail sum (equals 1/2)."""
    if n < 1:
        raise ValueError("n must be positive")
    row = binomial_row(2 * n + 1)
    return Fraction(sum(row[n + 1:]), 2 ** (2 * n + 1))


def overlap(n: int, d: int) -> Fraction:
    """Exact ``nu(d.A_n & A_n)``; symmetric in the sign of ``d``."""
    if n < 1:
        raise ValueError("n must be positive")
    d = abs(d)
    c, e = _leak_count(n, d)
    return Fraction(1, 2) - Fraction(c, 2 ** e)


def symdiff_shift(n: int, d: int) -> Fraction:
    """Exact ``nu(d.A_n ^ A_n) = 1 - 2 * overlap(n, d)``."""
    if n < 1:
        raise ValueError("n must be positive")
    c, e = _leak_count(n, abs(d))
    return Fraction(2 * c, 2 ** e)


def symdiff_at_most(n: int, d: int, slack: Fraction) -> bool:
    """``symdiff_shift(n, d) <= slack`` decided on integers."""
    c, e = _leak_count(n, abs(d))
    # 2c / 2^e <= p/q  <=>  2c q <= p 2^e
    return 2 * c * slack.denominator <= slack.numerator << e


def max_symdiff(n: int, radius: int) -> Fraction:
    return max(symdiff_shift(n, d) for d in range(radius + 1))


def ai_find(radius: int, slack, *, start: int = 1, cap: int = DEFAULT_SEARCH_CAP) -> int:
    """Least ``n >= start`` with ``nu(d.A_n ^ A_n) <= slack`` for all ``|d| <= radius``.

    ``start`` is only a speed-up: callers may pass a value below which every
    n is already known to fail (e.g. the answer for a looser slack).
    """
    slack = as_rational(slack)
    if radius < 0:
        raise ValueError("radius must be nonnegative")
    if slack <= 0 and radius > 0:
        raise SearchCapExceeded(radius, slack, cap)
    # symdiff(n, 1) = C(2n, n) / 2^(2n+1) >= 1 / (4 sqrt(n)) >= 1 / (4 sqrt(cap))
    if radius > 0 and 16 * slack * slack * cap < 1:
        raise SearchCapExceeded(radius, slack, cap)
    n = max(1, start)
    while n <= cap:
        # large shifts fail first, so test them first
        if all(symdiff_at_most(n, d, slack) for d in range(radius, 0, -1)):
            return n
        n += 1
    raise SearchCapExceeded(radius, slack, cap)


@dataclass(frozen=True)
class OverlapTable:
    n: int
    entries: Dict[int, Fraction] = field(default_factory=dict)

    def __getitem__(self, d: int) -> Fraction:
        return self.entries[abs(d)]


def overlap_table(n: int, d_max: int) -> OverlapTable:
    return OverlapTable(n, {d: overlap(n, d) for d in range(d_max + 1)})
