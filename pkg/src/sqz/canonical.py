"""Canonical Shannon codes with rank/length tables.

Ranks are 0-based. A1 maps symbol -> rank, A2 maps rank -> symbol. D1 holds,
for every distinct length, the rank of its first codeword together with that
codeword; D2 holds the same first codewords left-aligned to ``max_len`` bits so
that a predecessor search on the decoder's lookahead window is a plain integer
comparison. Both dictionaries are sorted arrays searched with bisect.
"""

from bisect import bisect_right
from fractions import Fraction
from typing import Sequence

from .bitio import BitSink, BitSource
from .errors import CorruptStreamError, ParameterError


def ceil_log2_ratio(num: int, den: int) -> int:
    """Smallest l >= 0 with 2**l * den >= num, i.e. ceil(log2(num / den))."""
    if num <= 0 or den <= 0:
        raise ValueError("ratio terms must be positive")
    return (-(-num // den) - 1).bit_length()


def shannon_length(p) -> int:
    """ceil(log2(1/p)), exact for floats and Fractions alike."""
    p = Fraction(p)
    if p <= 0:
        raise ParameterError("Shannon lengths need positive probabilities")
    if p > 1:
        raise ParameterError(f"probability {p} exceeds 1")
    return ceil_log2_ratio(p.denominator, p.numerator)


def shannon_lengths(probs: Sequence, tol: float = 1e-9) -> tuple:
    """Codeword lengths ceil(log2(1/p_i)) for a probability vector sorted nonincreasing."""
    if not probs:
        raise ParameterError("empty probability vector")
    if any(p <= 0 for p in probs):
        raise ParameterError("zero probability: the code is defined only for positive probabilities")
    if abs(float(sum(probs)) - 1.0) > tol:
        raise ParameterError(f"probabilities sum to {float(sum(probs))}, not 1")
    if any(probs[i] < probs[i + 1] for i in range(len(probs) - 1)):
        raise ParameterError("probabilities must be sorted nonincreasing")
    return tuple(shannon_length(p) for p in probs)


def lengths_from_counts(counts: Sequence[int], total: int = None) -> list:
    """Shannon lengths for probabilities counts[a] / total, in exact integer arithmetic."""
    if total is None:
        total = sum(counts)
    return [ceil_log2_ratio(total, c) for c in counts]


def kraft_ok(lengths: Sequence[int]) -> bool:
    top = max(lengths)
    return sum(1 << (top - l) for l in lengths) <= 1 << top


class CanonicalCode:
    __slots__ = ("lengths", "A1", "A2", "d1_ranks", "d1_codes", "d2_keys", "d2_ranks", "d_lens", "max_len")

    def __init__(self, lengths, order):
        self.lengths = tuple(lengths)
        self.A2 = tuple(order)
        a1 = [0] * len(order)
        for rank, a in enumerate(order):
            a1[a] = rank
        self.A1 = tuple(a1)
        self.max_len = max(self.lengths)
        self.d1_ranks, self.d1_codes, self.d_lens = [], [], []
        code, prev = -1, 0
        for rank, a in enumerate(order):
            l = self.lengths[a]
            code = (code + 1) << (l - prev) if rank else 0
            if l != prev or not rank:
                self.d1_ranks.append(rank)
                self.d1_codes.append(code)
                self.d_lens.append(l)
            prev = l
        if code >> prev:
            raise ParameterError("codeword overflow: lengths violate the Kraft inequality")
        # First codewords strictly increase left-aligned, so D2 shares D1's order.
        self.d2_keys = [c << (self.max_len - l) for c, l in zip(self.d1_codes, self.d_lens)]
        self.d2_ranks = self.d1_ranks

    def __len__(self):
        return len(self.A2)

    def encode_symbol(self, a: int) -> tuple:
        """(codeword value, length) for symbol ``a``."""
        if not 0 <= a < len(self.A1):
            raise ParameterError(f"symbol {a} is outside the alphabet of size {len(self.A1)}")
        rank = self.A1[a]
        k = bisect_right(self.d1_ranks, rank) - 1
        return self.d1_codes[k] + rank - self.d1_ranks[k], self.d_lens[k]

    def codeword(self, a: int) -> str:
        value, length = self.encode_symbol(a)
        return format(value, f"0{length}b")

    def decode_symbol(self, window: int) -> tuple:
        """(symbol, bits consumed) for a ``max_len``-bit lookahead window."""
        k = bisect_right(self.d2_keys, window) - 1
        if k < 0:
            raise CorruptStreamError("window precedes every codeword")
        l = self.d_lens[k]
        shift = self.max_len - l
        rank = self.d2_ranks[k] + (window >> shift) - (self.d2_keys[k] >> shift)
        end = self.d1_ranks[k + 1] if k + 1 < len(self.d1_ranks) else len(self.A2)
        if rank >= end:
            raise CorruptStreamError("window is not a codeword prefix")
        return self.A2[rank], l

    def tables(self) -> tuple:
        """Per-symbol (codeword values, lengths) lists, for table-driven batch encoding."""
        codes = [0] * len(self.A1)
        for a in range(len(self.A1)):
            codes[a] = self.encode_symbol(a)[0]
        return codes, list(self.lengths)


def build_canonical(lengths: Sequence[int], order: Sequence[int] = None) -> CanonicalCode:
    """Canonical code for per-symbol ``lengths``, with ranks assigned along ``order``.

    Without an explicit order, symbols are ranked by length with ties broken by
    symbol index. Lengths must be nondecreasing along the rank order.
    """
    lengths = list(lengths)
    if not lengths:
        raise ParameterError("empty code")
    if min(lengths) < 1:
        raise ParameterError("codeword length must be at least 1")
    if order is None:
        order = sorted(range(len(lengths)), key=lengths.__getitem__)
    elif sorted(order) != list(range(len(lengths))):
        raise ParameterError("rank order must be a permutation of the alphabet")
    if any(lengths[order[i]] > lengths[order[i + 1]] for i in range(len(order) - 1)):
        raise ParameterError("lengths must be nondecreasing in rank order")
    if not kraft_ok(lengths):
        raise ParameterError("lengths violate the Kraft inequality")
    return CanonicalCode(lengths, order)


def write_code(sink: BitSink, code: CanonicalCode):
    """Serialize as gamma(sigma) followed by gamma(length) per symbol."""
    sink.write_gamma(len(code.lengths))
    for l in code.lengths:
        sink.write_gamma(l)


def read_code(src: BitSource) -> CanonicalCode:
    sigma = src.read_gamma()
    lengths = [src.read_gamma() for _ in range(sigma)]
    try:
        return build_canonical(lengths)
    except ParameterError as exc:
        raise CorruptStreamError(str(exc), stage="code table") from exc
