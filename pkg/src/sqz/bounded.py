"""Memory-bounded order-k block coding.

Pieces, bottom up:

* ``quantize`` stores an approximation Q of a distribution P using only the
  heavy symbols (p >= 1/(r sigma^(1/lam))) and their weights floor(p r^2 sigma);
  every light symbol shares the remaining 1/r of the mass equally.
* ``BlockCodec`` is a Shannon-Fano-Elias code over blocks of L symbols drawn
  from Q, in exact fixed-point arithmetic. A block x gets the first
  ceil(log2(2/Pr[X=x])) fraction bits of Pr[X<x] + Pr[X=x]/2.
* ``encode_order0``/``encode_order_k`` apply that per context.
* ``one_pass_encode`` cuts the input into outer blocks whose length depends
  only on the parameters, so the working state never depends on n.

All probabilities are integers over 2**w, floored, never renormalized.
"""

from bisect import bisect_right
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from math import ceil, lcm, log2
from typing import Sequence

from .bitio import BitSink, BitSource, Bits, gamma_length
from .canonical import ceil_log2_ratio
from .errors import CorruptStreamError, ParameterError, TruncatedStreamError

GUARD_BITS = 16
R_FRACTION_BITS = 32
PARAM_FRACTION_BITS = 16
MAX_CONTEXTS = 1 << 20


def id_bits(sigma: int) -> int:
    """ceil(log2 sigma), at least 1."""
    return max(1, (sigma - 1).bit_length())


def r_param(mu) -> Fraction:
    """1 + 1/(2^(mu/2) - 1), rounded up to a multiple of 2^-32.

    Rounding up only shrinks r/(r-1), so the relative-entropy guarantee for
    ``mu`` still holds for the rounded value.
    """
    mu = float(mu)
    if mu <= 0:
        raise ParameterError("mu must be positive")
    r = 1.0 + 1.0 / (2.0 ** (mu / 2) - 1.0)
    scale = 1 << R_FRACTION_BITS
    return Fraction(ceil(r * scale), scale)


def fixed_width(r: Fraction, sigma: int) -> int:
    """w = ceil(log2(r^2 sigma)) + guard bits."""
    x = r * r * sigma
    return ceil_log2_ratio(x.numerator, x.denominator) + GUARD_BITS


def weight_width(r: Fraction, sigma: int) -> int:
    """Bits for a stored heavy weight; weights never exceed floor(r^2 sigma)."""
    return int(r * r * sigma).bit_length()


def fixed_point(x, bits: int = PARAM_FRACTION_BITS) -> Fraction:
    """Round a real parameter to the nearest multiple of 2^-bits."""
    return Fraction(round(Fraction(x) * (1 << bits)), 1 << bits)


def _is_heavy(c: int, m: int, r: Fraction, sigma: int, lam) -> bool:
    # p = c/m >= 1/(r sigma^(1/lam))  <=>  (c r)^lam sigma >= m^lam
    if Fraction(lam).denominator == 1:
        e = int(lam)
        return (c * r) ** e * sigma >= m**e
    return c * float(r) * sigma ** (1.0 / float(lam)) >= m


@dataclass(frozen=True)
class QuantizedDistribution:
    sigma: int
    lam: Fraction
    mu: Fraction
    r: Fraction
    heavy: tuple
    weights: tuple
    w: int = field(default=None)

    def __post_init__(self):
        if self.w is None:
            object.__setattr__(self, "w", fixed_width(self.r, self.sigma))
        if len(self.heavy) != len(self.weights):
            raise ParameterError("one weight per heavy symbol")
        if any(x < 1 for x in self.weights):
            raise ParameterError("heavy weights must be positive")
        if len(set(self.heavy)) != len(self.heavy) or any(not 0 <= a < self.sigma for a in self.heavy):
            raise ParameterError("heavy ids must be distinct alphabet symbols")

    @property
    def t(self) -> int:
        return len(self.heavy)

    @property
    def weight_sum(self) -> int:
        return sum(self.weights)

    def fixed(self) -> list:
        """q_i * 2^w, floored."""
        r, w, sigma = self.r, self.w, self.sigma
        t = self.t
        one = 1 << w
        light = (one * r.denominator) // (r.numerator * (sigma - t)) if t < sigma else 0
        q = [light] * sigma
        S = self.weight_sum
        for a, x in zip(self.heavy, self.weights):
            # (1 - 1/r) x / S = (r - 1) x / (r S)
            q[a] = ((r.numerator - r.denominator) * x * one) // (r.numerator * S)
        return q

    def exact(self) -> list:
        """q_i as exact fractions, before fixed-point flooring."""
        t, r = self.t, self.r
        q = [Fraction(1) / (r * (self.sigma - t)) if t < self.sigma else Fraction(0)] * self.sigma
        for a, x in zip(self.heavy, self.weights):
            q[a] = (1 - 1 / r) * x / self.weight_sum
        return q

    def probabilities(self) -> list:
        one = 1 << self.w
        return [v / one for v in self.fixed()]

    def header_bits(self) -> int:
        return gamma_length(self.t + 1) + self.t * (id_bits(self.sigma) + weight_width(self.r, self.sigma))

    def write(self, sink: BitSink):
        """gamma(t+1), then each heavy id in ceil(log2 sigma) bits and weight in weight_width bits."""
        sink.write_gamma(self.t + 1)
        ib, wb = id_bits(self.sigma), weight_width(self.r, self.sigma)
        for a, x in zip(self.heavy, self.weights):
            sink.write(a, ib)
            sink.write(x, wb)

    @classmethod
    def read(cls, src: BitSource, sigma: int, lam, mu, r: Fraction) -> "QuantizedDistribution":
        t = src.read_gamma() - 1
        if t > sigma:
            raise CorruptStreamError(f"{t} heavy symbols for an alphabet of {sigma}", stage="bounded")
        ib, wb = id_bits(sigma), weight_width(r, sigma)
        heavy, weights = [], []
        for _ in range(t):
            heavy.append(src.read(ib))
            weights.append(src.read(wb))
        try:
            return cls(sigma, Fraction(lam), Fraction(mu), r, tuple(heavy), tuple(weights))
        except ParameterError as exc:
            raise CorruptStreamError(str(exc), stage="bounded") from exc


def quantize(p: Sequence, lam, mu, r: Fraction = None) -> QuantizedDistribution:
    """Approximate ``p`` (counts or probabilities) so that D(P||Q) < (lam-1) H(P) + mu."""
    if hasattr(p, "counts"):
        p = p.counts
    lam = Fraction(lam)
    if lam < 1:
        raise ParameterError("lambda must be at least 1")
    sigma = len(p)
    if sigma < 1:
        raise ParameterError("empty distribution")
    if r is None:
        r = r_param(mu)
    if all(isinstance(x, int) for x in p):
        counts, m = list(p), sum(p)
    else:
        fr = [Fraction(x) for x in p]
        den = lcm(*(x.denominator for x in fr))
        counts = [int(x * den) for x in fr]
        m = sum(counts)
    if m <= 0:
        raise ParameterError("distribution has no mass")
    heavy, weights = [], []
    for a, c in enumerate(counts):
        if c and _is_heavy(c, m, r, sigma, lam):
            x = int(c * r * r * sigma / m)
            if x >= 1:
                heavy.append(a)
                weights.append(x)
    return QuantizedDistribution(sigma, lam, Fraction(mu), r, tuple(heavy), tuple(weights))


def relative_entropy(p: Sequence, q: Sequence) -> float:
    """D(P||Q) in bits by direct summation; ``p`` may be counts."""
    total = float(sum(p))
    d = 0.0
    for pi, qi in zip(p, q):
        if pi:
            pi = pi / total
            if qi <= 0:
                return float("inf")
            d += pi * log2(pi / qi)
    return d


def entropy(p: Sequence) -> float:
    total = float(sum(p))
    return sum((x / total) * log2(total / x) for x in p if x)


def misra_gries(stream, k: int) -> dict:
    """Misra-Gries summary with ``k`` counters: a superset of every item with frequency > n/(k+1)."""
    if k < 1:
        raise ParameterError("need at least one counter")
    counters = {}
    for x in stream:
        if x in counters:
            counters[x] += 1
        elif len(counters) < k:
            counters[x] = 1
        else:
            for y in list(counters):
                counters[y] -= 1
                if not counters[y]:
                    del counters[y]
    return counters


def heavy_hitters(stream: Sequence, theta) -> set:
    """Exactly the items with frequency >= theta * n: Misra-Gries candidates, then a counting pass."""
    theta = Fraction(theta)
    if not 0 < theta < 1:
        raise ParameterError("threshold must lie strictly between 0 and 1")
    candidates = misra_gries(stream, ceil(1 / theta))
    exact = Counter()
    n = 0
    for x in stream:
        n += 1
        if x in candidates:
            exact[x] += 1
    return {x for x, c in exact.items() if c >= theta * n}


class BlockCodec:
    """Shannon-Fano-Elias coding of L-symbol blocks under fixed-point Q."""

    def __init__(self, q_fixed: Sequence[int], w: int, L: int):
        if L < 1:
            raise ParameterError("block length must be positive")
        if any(x <= 0 for x in q_fixed):
            raise ParameterError("zero probability in Q")
        if sum(q_fixed) > 1 << w:
            raise ParameterError("Q sums to more than 1")
        self.q = list(q_fixed)
        self.w = w
        self.L = L
        self.cum = [0]
        for x in self.q:
            self.cum.append(self.cum[-1] + x)
        self.window = w * L + 1

    @classmethod
    def from_distribution(cls, qd: QuantizedDistribution, L: int) -> "BlockCodec":
        return cls(qd.fixed(), qd.w, L)

    def encode_block(self, block: Sequence[int]) -> tuple:
        """(codeword value, length) for one block of exactly L symbols."""
        if len(block) != self.L:
            raise ParameterError(f"block of {len(block)} symbols, expected {self.L}")
        F, P, w = 0, 1, self.w
        q, cum = self.q, self.cum
        for x in block:
            F = (F << w) + P * cum[x]
            P *= q[x]
        e = P.bit_length() - 1
        return (2 * F + P) >> e, self.window - e

    def code_length(self, block: Sequence[int]) -> int:
        P = 1
        for x in block:
            P *= self.q[x]
        return self.window - (P.bit_length() - 1)

    def decode_block(self, src: BitSource) -> list:
        W = src.peek(self.window)
        F, P, w = 0, 1, self.w
        q, cum = self.q, self.cum
        sigma = len(q)
        out = []
        for j in range(self.L):
            # F and P are over 2^(wj); W is over 2^(wL+1)
            scale = self.window - w * j
            rem = W - (F << scale)
            target = (rem << w) // (P << scale)
            if target < 0:
                raise CorruptStreamError("window below the coding interval", stage="bounded")
            c = bisect_right(cum, target) - 1
            if c >= sigma or target >= cum[c] + q[c]:
                raise CorruptStreamError("window falls in an unassigned gap", stage="bounded")
            out.append(c)
            F = (F << w) + P * cum[c]
            P *= q[c]
        e = P.bit_length() - 1
        length = self.window - e
        if length > src.remaining:
            raise TruncatedStreamError("block codeword runs past the end of the stream")
        if W >> (self.window - length) != (2 * F + P) >> e:
            raise CorruptStreamError("block codeword does not match its decoded interval", stage="bounded")
        src.cursor += length
        return out


def encode_block_order0(block: Sequence[int], codec: BlockCodec) -> str:
    value, length = codec.encode_block(block)
    return format(value, f"0{length}b")


def decode_block_order0(bits, codec: BlockCodec) -> list:
    src = bits if isinstance(bits, BitSource) else BitSource.from01(bits) if isinstance(bits, str) else BitSource(bits)
    return codec.decode_block(src)


@dataclass(frozen=True)
class Order0Config:
    """Everything an order-0 context coder needs; derived from (sigma, lambda, mu)."""

    sigma: int
    lam: Fraction
    mu: Fraction
    r: Fraction
    w: int
    L: int

    @classmethod
    def for_mu(cls, sigma: int, lam, mu, r: Fraction = None) -> "Order0Config":
        if sigma < 2:
            raise ParameterError("alphabet must have at least 2 symbols")
        lam, mu = Fraction(lam), Fraction(mu)
        if lam < 1 or mu <= 0:
            raise ParameterError("need lambda >= 1 and mu > 0")
        # Q is built for mu/2; the other mu/2 pays for the 2 extra bits per block of ceil(4/mu)
        if r is None:
            r = r_param(mu / 2)
        return cls(sigma, lam, mu, r, fixed_width(r, sigma), ceil(4 / mu))

    @property
    def id_bits(self) -> int:
        return id_bits(self.sigma)

    @property
    def weight_bits(self) -> int:
        return weight_width(self.r, self.sigma)

    @property
    def max_heavy(self) -> int:
        return min(self.sigma, ceil(float(self.r) * self.sigma ** (1.0 / float(self.lam))))


def _encode_context(sink: BitSink, seq: Sequence[int], cfg: Order0Config):
    m = len(seq)
    sink.write_gamma(m + 1)
    if not m:
        return
    counts = [0] * cfg.sigma
    for a in seq:
        counts[a] += 1
    qd = quantize(counts, cfg.lam, cfg.mu / 2, r=cfg.r)
    qd.write(sink)
    codec = BlockCodec.from_distribution(qd, cfg.L)
    full = m - m % cfg.L
    for i in range(0, full, cfg.L):
        value, length = codec.encode_block(seq[i : i + cfg.L])
        sink.write(value, length)
    ib = cfg.id_bits
    for a in seq[full:]:
        sink.write(a, ib)


def _decode_context(src: BitSource, cfg: Order0Config, limit: int) -> list:
    m = src.read_gamma() - 1
    if m > limit:
        raise CorruptStreamError(f"context holds {m} symbols, at most {limit} expected", stage="bounded")
    if not m:
        return []
    qd = QuantizedDistribution.read(src, cfg.sigma, cfg.lam, cfg.mu / 2, cfg.r)
    if qd.w != cfg.w:
        raise CorruptStreamError("fixed-point width mismatch", stage="bounded")
    try:
        codec = BlockCodec.from_distribution(qd, cfg.L)
    except ParameterError as exc:
        raise CorruptStreamError(str(exc), stage="bounded") from exc
    out = []
    full = m - m % cfg.L
    for _ in range(full // cfg.L):
        out.extend(codec.decode_block(src))
    ib = cfg.id_bits
    for _ in range(m - full):
        a = src.read(ib)
        if a >= cfg.sigma:
            raise CorruptStreamError(f"raw symbol {a} outside the alphabet", stage="bounded")
        out.append(a)
    return out


def _check(s: Sequence[int], sigma: int):
    for a in s:
        if not 0 <= a < sigma:
            raise ParameterError(f"symbol {a} outside [0, {sigma})")


def encode_order0(s: Sequence[int], sigma: int, lam, mu, sink: BitSink = None) -> Bits:
    """gamma(n+1), the Q header, full blocks as SFE codewords, the short tail raw."""
    cfg = Order0Config.for_mu(sigma, lam, mu)
    _check(s, sigma)
    out = BitSink() if sink is None else sink
    _encode_context(out, list(s), cfg)
    return out.getbits()


def decode_order0(bits, sigma: int, lam, mu, n: int = None) -> list:
    cfg = Order0Config.for_mu(sigma, lam, mu)
    src = bits if isinstance(bits, BitSource) else BitSource(bits)
    return _decode_context(src, cfg, n if n is not None else 1 << 62)


def _encode_order_k(sink: BitSink, s: Sequence[int], k: int, cfg: Order0Config, max_contexts: int):
    sigma = cfg.sigma
    nctx = sigma**k
    if nctx > max_contexts:
        raise ParameterError(f"{sigma}^{k} contexts exceed the cap of {max_contexts}")
    ib = cfg.id_bits
    head = min(k, len(s))
    for a in s[:head]:
        sink.write(a, ib)
    if len(s) <= k:
        return
    subs = [[] for _ in range(nctx)]
    ctx = 0
    for a in s[:k]:
        ctx = ctx * sigma + a
    for a in s[k:]:
        subs[ctx].append(a)
        ctx = (ctx * sigma + a) % nctx
    for seq in subs:
        _encode_context(sink, seq, cfg)


def _decode_order_k(src: BitSource, n: int, k: int, cfg: Order0Config, max_contexts: int) -> list:
    sigma = cfg.sigma
    nctx = sigma**k
    if nctx > max_contexts:
        raise ParameterError(f"{sigma}^{k} contexts exceed the cap of {max_contexts}")
    ib = cfg.id_bits
    head = [src.read(ib) for _ in range(min(k, n))]
    if any(a >= sigma for a in head):
        raise CorruptStreamError("raw symbol outside the alphabet", stage="bounded")
    if n <= k:
        return head
    subs = []
    left = n - k
    for _ in range(nctx):
        seq = _decode_context(src, cfg, left)
        left -= len(seq)
        subs.append(seq)
    if left:
        raise CorruptStreamError("context lengths do not add up to the block length", stage="bounded")
    out = list(head)
    ptr = [0] * nctx
    ctx = 0
    for a in head:
        ctx = ctx * sigma + a
    for _ in range(n - k):
        i = ptr[ctx]
        if i >= len(subs[ctx]):
            raise CorruptStreamError("context subsequence exhausted", stage="bounded")
        a = subs[ctx][i]
        ptr[ctx] = i + 1
        out.append(a)
        ctx = (ctx * sigma + a) % nctx
    return out


def encode_order_k(s: Sequence[int], sigma: int, lam, k: int, mu, max_contexts: int = MAX_CONTEXTS) -> Bits:
    """First k symbols raw, then an order-0 code for each of the sigma^k context subsequences."""
    cfg = Order0Config.for_mu(sigma, lam, mu)
    s = list(s)
    _check(s, sigma)
    sink = BitSink()
    _encode_order_k(sink, s, k, cfg, max_contexts)
    return sink.getbits()


def decode_order_k(bits, n: int, sigma: int, lam, k: int, mu, max_contexts: int = MAX_CONTEXTS) -> list:
    cfg = Order0Config.for_mu(sigma, lam, mu)
    src = bits if isinstance(bits, BitSource) else BitSource(bits)
    return _decode_order_k(src, n, k, cfg, max_contexts)


@dataclass(frozen=True)
class OnePassParams:
    """Parameters of the blockwise coder, normalized to the fixed-point values the container stores."""

    sigma: int
    lam: Fraction
    k: int
    mu: Fraction
    c: Fraction = None

    def __post_init__(self):
        if self.sigma < 2:
            raise ParameterError("alphabet must have at least 2 symbols")
        if self.k < 0:
            raise ParameterError("k must be nonnegative")
        lam, mu = fixed_point(self.lam), fixed_point(self.mu)
        if lam < 1 or mu <= 0:
            raise ParameterError("need lambda >= 1 and mu > 0")
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "mu", mu)
        if self.sigma**self.k > MAX_CONTEXTS:
            raise ParameterError(f"{self.sigma}^{self.k} contexts exceed the cap of {MAX_CONTEXTS}")
        if self.c is None:
            object.__setattr__(self, "c", overhead_constant(self.sigma, self.k, lam, mu))
        else:
            object.__setattr__(self, "c", fixed_point(self.c, R_FRACTION_BITS))

    @property
    def inner(self) -> Order0Config:
        """Each outer block is coded at order k with slack mu/2."""
        return Order0Config.for_mu(self.sigma, self.lam, self.mu / 2)

    @property
    def scale(self) -> float:
        """sigma^(k + 1/lambda) log2 sigma."""
        return self.sigma ** (self.k + 1.0 / float(self.lam)) * log2(self.sigma)

    @property
    def block_length(self) -> int:
        return outer_block_length(self.sigma, self.k, self.lam, self.mu, self.c)

    def state_size_bits(self) -> int:
        """Working state for one outer block, excluding the resident block itself.

        Heavy-hitter counters (id and count) and stored weights for one context
        at a time, the two SFE registers, the current context, and block
        position and length counters. Depends on the parameters only.
        """
        cfg = self.inner
        B = self.block_length
        cnt = max(1, B.bit_length())
        t = cfg.max_heavy
        return t * (cfg.id_bits + cnt + cfg.weight_bits) + 2 * (cfg.w * cfg.L + 1) + self.k * cfg.id_bits + 2 * cnt


def outer_block_length(sigma: int, k: int, lam, mu, c) -> int:
    """ceil((2c/mu) sigma^(k + 1/lam) log2 sigma)."""
    return max(1, ceil(2 * float(c) / float(mu) * sigma ** (k + 1.0 / float(lam)) * log2(sigma)))


def block_overhead_bound(sigma: int, k: int, lam, mu, B: int) -> float:
    """Upper bound on the bits an outer block of length <= B costs beyond (lam H_k + mu/2) |block|.

    Counts the block-length header, k raw symbols, and per context its
    length, Q header and raw tail, plus the per-symbol loss from flooring Q.
    """
    cfg = Order0Config.for_mu(sigma, lam, Fraction(mu) / 2)
    ib = cfg.id_bits
    t = cfg.max_heavy
    per_ctx = gamma_length(B + 1) + gamma_length(t + 1) + t * (ib + cfg.weight_bits) + (cfg.L - 1) * ib
    r = float(cfg.r)
    eps = r / (r - 1) * 2.0**-GUARD_BITS
    per_symbol = -log2(1 - eps)
    return gamma_length(B) + k * ib + sigma**k * per_ctx + per_symbol * B


def overhead_constant(sigma: int, k: int, lam, mu, rounds: int = 64) -> Fraction:
    """Smallest c (on a 2^-32 grid) for which blocks of ceil((2c/mu) sigma^(k+1/lam) log sigma)
    symbols never cost more than (lam H_k + mu/2)|block| + c sigma^(k+1/lam) log sigma bits."""
    scale = sigma ** (k + 1.0 / float(lam)) * log2(sigma)
    c = 1.0
    for _ in range(rounds):
        B = outer_block_length(sigma, k, lam, mu, c)
        nxt = block_overhead_bound(sigma, k, lam, mu, B) / scale
        if nxt <= c:
            break
        c = nxt
    return Fraction(ceil(c * (1 << R_FRACTION_BITS)), 1 << R_FRACTION_BITS)


def one_pass_encode(s: Sequence[int], params: OnePassParams, sink: BitSink = None) -> Bits:
    enc = OnePassEncoder(params, sink)
    for a in s:
        enc.on_symbol(a)
    return enc.finish()


def one_pass_decode(bits, params: OnePassParams, n: int) -> list:
    src = bits if isinstance(bits, BitSource) else BitSource(bits)
    cfg = params.inner
    B = params.block_length
    out = []
    while len(out) < n:
        m = src.read_gamma()
        if m > B or m > n - len(out):
            raise CorruptStreamError(f"outer block of {m} symbols is out of range", stage="bounded")
        out.extend(_decode_order_k(src, m, params.k, cfg, MAX_CONTEXTS))
    return out


class OnePassEncoder:
    """Streaming processor: buffers one outer block, codes it, drops it."""

    block_residency = True

    def __init__(self, params: OnePassParams, sink: BitSink = None):
        self.params = params
        self.cfg = params.inner
        self.B = params.block_length
        self.sink = BitSink() if sink is None else sink
        self.block = []
        self.blocks = 0
        self._state = params.state_size_bits()

    def on_symbol(self, a: int):
        if not 0 <= a < self.params.sigma:
            raise ParameterError(f"symbol {a} outside [0, {self.params.sigma})")
        self.block.append(a)
        if len(self.block) == self.B:
            self._flush()

    def _flush(self):
        if not self.block:
            return
        self.sink.write_gamma(len(self.block))
        _encode_order_k(self.sink, self.block, self.params.k, self.cfg, MAX_CONTEXTS)
        self.block = []
        self.blocks += 1

    def finish(self) -> Bits:
        self._flush()
        return self.sink.getbits()

    def state_size_bits(self) -> int:
        return self._state

    def resident_block_bits(self) -> int:
        return self.B * self.cfg.id_bits
