"""Burrows-Wheeler pipeline: BWT, move-to-front, zero-run coding, adaptive back end.

The sentinel is the out-of-band value ``sigma`` and sorts below every real
symbol. The compressed payload is gamma(primary + 1), gamma(tokens + 1), then
one adaptive codeword per token over the token alphabet, each run token
followed directly by gamma(run length).
"""

from typing import NamedTuple, Sequence

import numpy as np

from .adaptive import AdaptiveDecoder, AdaptiveEncoder
from .bitio import BitSink, BitSource, Bits
from .errors import CorruptStreamError, ParameterError


def suffix_array(x: np.ndarray) -> np.ndarray:
    """Suffix array by prefix doubling; ``x`` must end with a unique minimum."""
    n = len(x)
    rank = np.asarray(x, dtype=np.int64)
    if n <= 1:
        return np.zeros(n, dtype=np.int64)
    k = 1
    while True:
        second = np.full(n, -1, dtype=np.int64)
        second[: n - k] = rank[k:]
        sa = np.lexsort((second, rank))
        r1, r2 = rank[sa], second[sa]
        step = np.empty(n, dtype=np.int64)
        step[0] = 0
        step[1:] = np.cumsum((r1[1:] != r1[:-1]) | (r2[1:] != r2[:-1]))
        rank = np.empty(n, dtype=np.int64)
        rank[sa] = step
        if step[-1] == n - 1:
            return sa
        k <<= 1


def bwt(s: Sequence[int], sigma: int) -> np.ndarray:
    """Transform of s + sentinel; the sentinel appears as the value ``sigma``."""
    s = np.asarray(s, dtype=np.int64)
    if s.size and (s.min() < 0 or s.max() >= sigma):
        raise ParameterError(f"symbols must lie in [0, {sigma}); the sentinel {sigma} is reserved")
    x = np.concatenate((s + 1, [0]))
    sa = suffix_array(x)
    prev = sa - 1
    out = np.where(prev >= 0, np.concatenate((s, [sigma]))[prev], sigma)
    return out


def ibwt(t: Sequence[int], sigma: int) -> np.ndarray:
    """Invert by walking the successor (LF) mapping from the sentinel row."""
    t = np.asarray(t, dtype=np.int64)
    where = np.flatnonzero(t == sigma)
    if len(where) != 1:
        raise CorruptStreamError(f"transform holds {len(where)} sentinels, expected 1", stage="bwt")
    if t.size and (t.min() < 0 or t.max() > sigma):
        raise CorruptStreamError("symbol outside the alphabet", stage="bwt")
    n = t.size - 1
    key = np.where(t == sigma, -1, t)
    nxt = np.argsort(key, kind="stable").tolist()
    first = np.sort(key).tolist()
    out = [0] * n
    i = 0
    for j in range(n):
        i = nxt[i]
        if i == 0:
            raise CorruptStreamError("successor walk closed early", stage="bwt")
        out[j] = first[i]
    if nxt[i] != 0:
        raise CorruptStreamError("successor walk did not return to the sentinel", stage="bwt")
    return np.asarray(out, dtype=np.int64)


def mtf_encode(s: Sequence[int], sigma: int) -> list:
    table = list(range(sigma))
    out = []
    for a in s:
        i = table.index(a)
        out.append(i)
        if i:
            del table[i]
            table.insert(0, a)
    return out


def mtf_decode(indices: Sequence[int], sigma: int) -> list:
    table = list(range(sigma))
    out = []
    for i in indices:
        if not 0 <= i < sigma:
            raise CorruptStreamError(f"index {i} outside the recency list", stage="mtf")
        a = table[i]
        out.append(a)
        if i:
            del table[i]
            table.insert(0, a)
    return out


class Token(NamedTuple):
    """``symbol`` 0 is a run of ``run`` zero indices; any other symbol is that MTF index itself."""

    symbol: int
    run: int = 0


def rle0_encode(indices: Sequence[int]) -> list:
    out, run = [], 0
    for i in indices:
        if i == 0:
            run += 1
            continue
        if run:
            out.append(Token(0, run))
            run = 0
        out.append(Token(i))
    if run:
        out.append(Token(0, run))
    return out


def rle0_decode(tokens: Sequence[Token]) -> list:
    out = []
    for tok in tokens:
        if tok.symbol == 0:
            if tok.run < 1:
                raise CorruptStreamError("run token without a positive length", stage="rle0")
            out.extend([0] * tok.run)
        elif tok.symbol < 0 or tok.run:
            raise CorruptStreamError(f"malformed token {tok}", stage="rle0")
        else:
            out.append(tok.symbol)
    return out


class Stages(NamedTuple):
    transform: np.ndarray
    primary: int
    mtf: list
    tokens: list


def analyze_stages(s: Sequence[int], sigma: int) -> Stages:
    t = bwt(s, sigma)
    primary = int(np.flatnonzero(t == sigma)[0])
    body = np.delete(t, primary).tolist()
    m = mtf_encode(body, sigma)
    return Stages(t, primary, m, rle0_encode(m))


def pipeline_compress(s: Sequence[int], sigma: int, sink: BitSink = None, stages: Stages = None) -> Bits:
    if len(s) == 0:
        raise ParameterError("the pipeline needs a nonempty input")
    st = stages if stages is not None else analyze_stages(s, sigma)
    out = BitSink() if sink is None else sink
    out.write_gamma(st.primary + 1)
    out.write_gamma(len(st.tokens) + 1)
    enc = AdaptiveEncoder(max(sigma, 2), len(st.tokens), out)
    for tok in st.tokens:
        enc.encode(tok.symbol)
        if tok.symbol == 0:
            out.write_gamma(tok.run)
    return out.getbits()


def pipeline_decompress(bits, sigma: int, n: int) -> list:
    src = bits if isinstance(bits, BitSource) else BitSource(bits)
    try:
        primary = src.read_gamma() - 1
        ntok = src.read_gamma() - 1
        if primary > n or ntok > n:
            raise CorruptStreamError("stream header out of range", stage="entropy")
        dec = AdaptiveDecoder(max(sigma, 2), ntok, src)
        tokens, total = [], 0
        for _ in range(ntok):
            a = dec.decode()
            tok = Token(0, src.read_gamma()) if a == 0 else Token(a)
            total += tok.run or 1
            if total > n:
                raise CorruptStreamError("tokens expand past the declared length", stage="rle0")
            tokens.append(tok)
    except CorruptStreamError as exc:
        if exc.stage:
            raise
        raise CorruptStreamError(str(exc), stage="entropy") from exc
    body = mtf_decode(rle0_decode(tokens), sigma)
    if len(body) != n:
        raise CorruptStreamError(f"{len(body)} symbols decoded, {n} expected", stage="rle0")
    t = body[:primary] + [sigma] + body[primary:]
    return ibwt(t, sigma).tolist()
