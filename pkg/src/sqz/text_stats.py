"""Empirical entropy and structured test inputs (De Bruijn cycles, periodic strings)."""

from collections import Counter, defaultdict
from dataclasses import dataclass
from math import log2
from typing import Sequence

import numpy as np

DEBRUIJN_MAX_ORDER = 24
ENTROPY_TOL = 1e-9


@dataclass(frozen=True)
class FrequencyTable:
    sigma: int
    counts: tuple

    def __post_init__(self):
        if self.sigma < 1 or len(self.counts) != self.sigma:
            raise ValueError("counts must have one entry per alphabet symbol")
        if any(c < 0 for c in self.counts):
            raise ValueError("counts must be nonnegative")

    @property
    def n(self) -> int:
        return sum(self.counts)

    @property
    def used(self) -> int:
        return sum(1 for c in self.counts if c)

    @classmethod
    def from_sequence(cls, s: Sequence[int], sigma: int = None) -> "FrequencyTable":
        tally = Counter(s)
        if sigma is None:
            sigma = max(tally, default=0) + 1
        if tally and (min(tally) < 0 or max(tally) >= sigma):
            raise ValueError(f"symbols must lie in [0, {sigma})")
        return cls(sigma, tuple(tally.get(a, 0) for a in range(sigma)))


@dataclass(frozen=True)
class ContextTable:
    """Order-k successor tables: context tuple -> FrequencyTable of the symbols following it."""

    k: int
    sigma: int
    tables: dict

    @classmethod
    def from_sequence(cls, s: Sequence[int], k: int, sigma: int = None) -> "ContextTable":
        s = list(s)
        if sigma is None:
            sigma = max(s, default=0) + 1
        succ = defaultdict(Counter)
        for i in range(k, len(s)):
            succ[tuple(s[i - k : i])][s[i]] += 1
        tables = {
            w: FrequencyTable(sigma, tuple(c.get(a, 0) for a in range(sigma)))
            for w, c in succ.items()
        }
        return cls(k, sigma, tables)

    @property
    def total(self) -> int:
        return sum(t.n for t in self.tables.values())


def _h0_counts(counts) -> float:
    n = sum(counts)
    return sum(c * log2(n / c) for c in counts if c) / n


def h0(table: FrequencyTable) -> float:
    """Zeroth-order empirical entropy in bits per symbol (0 log 0 = 0)."""
    if table.n == 0:
        raise ValueError("entropy of an empty input is undefined")
    return _h0_counts(table.counts)


def hk(s: Sequence[int], k: int) -> float:
    """k-th order empirical entropy of ``s``: (1/n) sum over contexts w of |w_s| H0(w_s)."""
    n = len(s)
    if k < 0:
        raise ValueError("order must be nonnegative")
    if k >= n:
        raise ValueError(f"order {k} too large for a string of length {n}")
    if k == 0:
        return _h0_counts(Counter(s).values())
    succ = defaultdict(Counter)
    s = list(s)
    for i in range(k, n):
        succ[tuple(s[i - k : i])][s[i]] += 1
    total = 0.0
    for c in succ.values():
        counts = c.values()
        m = sum(counts)
        total += sum(x * log2(m / x) for x in counts)
    return total / n


def subadditivity_check(s1: Sequence[int], s2: Sequence[int], k: int, tol: float = ENTROPY_TOL) -> bool:
    """Whether |s1| Hk(s1) + |s2| Hk(s2) <= |s1 s2| Hk(s1 s2) holds within ``tol``."""
    s1, s2 = list(s1), list(s2)
    lhs = len(s1) * hk(s1, k) + len(s2) * hk(s2, k)
    joined = s1 + s2
    return lhs <= len(joined) * hk(joined, k) + tol


def _lyndon_words(alpha: int, k: int):
    # Duval's generation of Lyndon words of length <= k in lexicographic order
    w = [-1]
    while w:
        w[-1] += 1
        m = len(w)
        if k % m == 0:
            yield w
        while len(w) < k:
            w.append(w[-m])
        while w and w[-1] == alpha - 1:
            w.pop()


def gen_debruijn(k: int) -> bytes:
    """Lexicographically least binary De Bruijn cycle of order ``k``, as 0/1 byte values."""
    if not 1 <= k <= DEBRUIJN_MAX_ORDER:
        raise ValueError(f"order must be in [1, {DEBRUIJN_MAX_ORDER}]")
    out = bytearray()
    for w in _lyndon_words(2, k):
        out.extend(w)
    return bytes(out)


def gen_periodic(t: Sequence, n: int):
    """t repeated to exactly ``n`` symbols: t^(n // |t|) followed by a proper prefix of t."""
    if len(t) < 1:
        raise ValueError("period must be nonempty")
    if n < len(t):
        raise ValueError("target length shorter than one period")
    if isinstance(t, np.ndarray):
        return np.resize(t, n)
    q, rem = divmod(n, len(t))
    return t * q + t[:rem]
