"""Adaptive canonical Shannon coding.

Every symbol starts with a count of 1. The code in use is rebuilt from the
counts every R = max(1, floor(log2(n)**2)) symbols, so symbol i (1-based) is
coded with the snapshot taken after symbol R*floor((i-1)/R). When n is not
known up front the period is re-estimated at each rebuild from i + sigma.

Two encoders are provided: a streaming one (``AdaptiveEncoder``) that keeps
the counts in Gallager's frequency-ordered array and updates it in O(1) per
symbol, and a numpy batch path (``encode_stream``) that works one rebuild
segment at a time. They emit identical bits.
"""

import hashlib
from math import floor, log2
from typing import Sequence

import numpy as np

from .bitio import BitSink, BitSource, Bits
from .canonical import CanonicalCode, build_canonical, lengths_from_counts
from .errors import CorruptStreamError, ParameterError, TruncatedStreamError


def rebuild_period(m: int) -> int:
    """max(1, floor(log2(m)^2))."""
    if m < 2:
        return 1
    return max(1, floor(log2(m) ** 2))


def snapshot_code(counts: Sequence[int], order: Sequence[int] = None) -> CanonicalCode:
    """Shannon code for counts/sum(counts), ranks by count descending then symbol index."""
    if order is None:
        order = sorted(range(len(counts)), key=lambda a: (-counts[a], a))
    return build_canonical(lengths_from_counts(counts), order)


class FrequencyOrder:
    """Symbols kept sorted by nonincreasing count (Gallager's structure).

    ``order`` is the array, ``pos`` its inverse, and ``lead[c]`` the index of
    the first symbol whose count is c.
    """

    __slots__ = ("counts", "order", "pos", "lead")

    def __init__(self, sigma: int):
        self.counts = [1] * sigma
        self.order = list(range(sigma))
        self.pos = list(range(sigma))
        self.lead = {1: 0}

    def bump(self, a: int):
        counts, order, pos, lead = self.counts, self.order, self.pos, self.lead
        c = counts[a]
        p, first = pos[a], lead[c]
        if p != first:
            b = order[first]
            order[first], order[p] = a, b
            pos[a], pos[b] = first, p
        counts[a] = c + 1
        if c + 1 not in lead:
            lead[c + 1] = first
        nxt = first + 1
        if nxt < len(order) and counts[order[nxt]] == c:
            lead[c] = nxt
        else:
            del lead[c]

    def rank_order(self) -> list:
        """The array with each equal-count block sorted by symbol index."""
        out, order, counts = [], self.order, self.counts
        i = 0
        while i < len(order):
            j = i + 1
            while j < len(order) and counts[order[j]] == counts[order[i]]:
                j += 1
            out.extend(sorted(order[i:j]))
            i = j
        return out


class AdaptiveState:
    """Counts, schedule and active code shared by the streaming encoder and decoder."""

    def __init__(self, sigma: int, n: int = None):
        if sigma < 2:
            raise ParameterError("adaptive coding needs an alphabet of at least 2 symbols")
        self.sigma = sigma
        self.n = n
        self.freq = FrequencyOrder(sigma)
        self.i = 0
        self.period = rebuild_period(n) if n is not None else rebuild_period(sigma)
        self.next_rebuild = self.period
        self.code = snapshot_code(self.freq.counts, self.freq.rank_order())
        self.snapshot_at = 0

    @property
    def counts(self):
        return self.freq.counts

    def bump(self, a: int):
        self.freq.bump(a)
        self.i += 1

    def scheduled_rebuild(self):
        if self.i != self.next_rebuild:
            return
        self.code = snapshot_code(self.freq.counts, self.freq.rank_order())
        self.snapshot_at = self.i
        if self.n is None:
            self.period = rebuild_period(self.i + self.sigma)
        self.next_rebuild = self.i + self.period

    def state_hash(self) -> str:
        h = hashlib.blake2b(digest_size=16)
        h.update(repr((self.i, self.next_rebuild, self.snapshot_at, self.freq.counts, self.code.A2, self.code.lengths)).encode())
        return h.hexdigest()

    def state_size_bits(self) -> int:
        # counts and rank array at ceil(log2(n + sigma)) bits per entry, both code tables per length
        width = max(1, (max(self.i, self.n or 0) + self.sigma).bit_length())
        return 2 * self.sigma * width + 3 * len(self.code.d_lens) * width


class AdaptiveEncoder:
    def __init__(self, sigma: int, n: int = None, sink: BitSink = None):
        self.state = AdaptiveState(sigma, n)
        self.sink = sink if sink is not None else BitSink()

    def encode(self, a: int) -> int:
        """Code one symbol, returning the codeword length."""
        st = self.state
        if not 0 <= a < st.sigma:
            raise ParameterError(f"symbol {a} is outside [0, {st.sigma})")
        value, length = st.code.encode_symbol(a)
        self.sink.write(value, length)
        st.bump(a)
        st.scheduled_rebuild()
        return length

    # processor interface for the one-pass harness
    def on_symbol(self, a):
        self.encode(a)

    def finish(self) -> Bits:
        return self.sink.getbits()

    def state_size_bits(self) -> int:
        return self.state.state_size_bits()


class AdaptiveDecoder:
    def __init__(self, sigma: int, n: int = None, src: BitSource = None):
        self.state = AdaptiveState(sigma, n)
        self.src = src

    def decode(self) -> int:
        st, src = self.state, self.src
        if src.remaining <= 0:
            raise TruncatedStreamError("stream exhausted before all symbols were decoded")
        a, length = st.code.decode_symbol(src.peek(st.code.max_len))
        if length > src.remaining:
            raise TruncatedStreamError("final codeword runs past the end of the stream")
        src.cursor += length
        st.bump(a)
        st.scheduled_rebuild()
        return a


def _segments(n: int, sigma: int, known_n: bool):
    """Yield (start, end) of the spans coded with one snapshot."""
    j = 0
    period = rebuild_period(n) if known_n else rebuild_period(sigma)
    while j < n:
        end = min(n, j + period)
        yield j, end
        j = end
        if not known_n:
            period = rebuild_period(j + sigma)


def _check_symbols(s: np.ndarray, sigma: int):
    if sigma < 2:
        raise ParameterError("adaptive coding needs an alphabet of at least 2 symbols")
    if s.size and (s.min() < 0 or s.max() >= sigma):
        raise ParameterError(f"symbols must lie in [0, {sigma})")


def codeword_tables(s, sigma: int, known_n: bool = True) -> tuple:
    """Per-position codeword values (uint64) and lengths (uint8) for ``s``."""
    s = np.asarray(s, dtype=np.int64)
    _check_symbols(s, sigma)
    n = s.size
    values = np.zeros(n, dtype=np.uint64)
    lens = np.zeros(n, dtype=np.uint8)
    counts = np.ones(sigma, dtype=np.int64)
    for j, end in _segments(n, sigma, known_n):
        cl = counts.tolist()
        code = snapshot_code(cl)
        cv, ln = code.tables()
        seg = s[j:end]
        values[j:end] = np.asarray(cv, dtype=np.uint64)[seg]
        lens[j:end] = np.asarray(ln, dtype=np.uint8)[seg]
        counts += np.bincount(seg, minlength=sigma)
    return values, lens


def pack_codewords(values: np.ndarray, lens: np.ndarray) -> Bits:
    """Concatenate codewords MSB-first into a Bits value."""
    lens = lens.astype(np.int64)
    total = int(lens.sum())
    if total == 0:
        return Bits(b"", 0)
    starts = np.concatenate(([0], np.cumsum(lens)[:-1]))
    bitarr = np.zeros(total, dtype=np.uint8)
    for b in range(int(lens.max())):
        sel = lens > b
        shift = (lens[sel] - 1 - b).astype(np.uint64)
        bitarr[starts[sel] + b] = ((values[sel] >> shift) & np.uint64(1)).astype(np.uint8)
    return Bits(np.packbits(bitarr).tobytes(), total)


def encode_stream(s, sigma: int, known_n: bool = True) -> Bits:
    """Adaptively code ``s`` over [0, sigma); bit-identical to AdaptiveEncoder."""
    values, lens = codeword_tables(s, sigma, known_n)
    return pack_codewords(values, lens)


def decode_stream(bits, sigma: int, n: int, known_n: bool = True) -> list:
    src = bits if isinstance(bits, BitSource) else BitSource(bits)
    dec = AdaptiveDecoder(sigma, n if known_n else None, src)
    try:
        return [dec.decode() for _ in range(n)]
    except CorruptStreamError:
        raise
    except ValueError as exc:
        raise CorruptStreamError(str(exc), stage="adaptive") from exc


def per_position_bound(s: Sequence[int], sigma: int, n: int = None) -> list:
    """ceil(log2((i + sigma) / max(occ(s[i], s[1..i]) - R, 1))) for every position i."""
    n = len(s) if n is None else n
    R = rebuild_period(n)
    seen = [0] * sigma
    out = []
    for i, a in enumerate(s, 1):
        seen[a] += 1
        m = max(seen[a] - R, 1)
        out.append((-(-(i + sigma) // m) - 1).bit_length())
    return out
