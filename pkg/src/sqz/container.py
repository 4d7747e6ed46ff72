"""The SQZ1 container and the per-codec encode/decode entry points.

Layout, little-endian:

    b"SQZ1" | version u8 | codec u8 | sigma u32 | n u64 | param_len u32 | params | payload

``params`` is the codec's parameter block followed by a CRC32 of every other
byte of the file, so any flipped bit is reported as corruption rather than
decoded into the wrong text. The payload is a bit stream zero-padded to a
byte boundary.
"""

import struct
import zlib
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import adaptive, bounded, bwt, online_sorter
from .bitio import BitSink, BitSource
from .errors import CorruptStreamError, ParameterError

MAGIC = b"SQZ1"
VERSION = 1
ADAPTIVE, BOUNDED, BWT, GAPLISTS = 1, 2, 3, 4
CODECS = {"adaptive": ADAPTIVE, "bounded": BOUNDED, "bwt": BWT, "gaplists": GAPLISTS}
CODEC_NAMES = {v: k for k, v in CODECS.items()}

_HEAD = struct.Struct("<4sBBIQI")
_BOUNDED = struct.Struct("<IHIIQHQ")  # lambda 16.16, k, mu 16.16, sigma, c 32.32, w, r 32.32


@dataclass
class Container:
    codec: int
    sigma: int
    n: int
    params: bytes
    payload: bytes
    version: int = VERSION

    def pack(self) -> bytes:
        head = _HEAD.pack(MAGIC, self.version, self.codec, self.sigma, self.n, len(self.params) + 4)
        crc = zlib.crc32(self.payload, zlib.crc32(self.params, zlib.crc32(head)))
        return head + self.params + struct.pack("<I", crc) + self.payload

    @classmethod
    def unpack(cls, data: bytes) -> "Container":
        if len(data) < _HEAD.size:
            raise CorruptStreamError("file too short for a container header", stage="container")
        magic, version, codec, sigma, n, plen = _HEAD.unpack_from(data)
        if magic != MAGIC:
            raise CorruptStreamError("bad magic", stage="container")
        if version != VERSION:
            raise CorruptStreamError(f"unsupported container version {version}", stage="container")
        if codec not in CODEC_NAMES:
            raise CorruptStreamError(f"unknown codec id {codec}", stage="container")
        end = _HEAD.size + plen
        if plen < 4 or end > len(data):
            raise CorruptStreamError("parameter block overruns the file", stage="container")
        params, (crc,) = data[_HEAD.size : end - 4], struct.unpack_from("<I", data, end - 4)
        payload = data[end:]
        if zlib.crc32(payload, zlib.crc32(params, zlib.crc32(data[: _HEAD.size]))) != crc:
            raise CorruptStreamError("checksum mismatch", stage="container")
        return cls(codec, sigma, n, params, payload, version)


def _fixed(x: Fraction, bits: int) -> int:
    v = x * (1 << bits)
    if v.denominator != 1:
        raise ParameterError(f"{x} is not a multiple of 2^-{bits}")
    return int(v)


def _bounded_params(p: bounded.OnePassParams) -> bytes:
    cfg = p.inner
    return _BOUNDED.pack(_fixed(p.lam, 16), p.k, _fixed(p.mu, 16), p.sigma, _fixed(p.c, 32), cfg.w, _fixed(cfg.r, 32))


def _read_bounded_params(raw: bytes, sigma: int) -> bounded.OnePassParams:
    if len(raw) != _BOUNDED.size:
        raise CorruptStreamError("bounded parameter block has the wrong size", stage="container")
    lam, k, mu, psigma, c, w, r = _BOUNDED.unpack(raw)
    if psigma != sigma:
        raise CorruptStreamError("alphabet size disagrees with the header", stage="container")
    try:
        p = bounded.OnePassParams(sigma, Fraction(lam, 1 << 16), k, Fraction(mu, 1 << 16), Fraction(c, 1 << 32))
    except ParameterError as exc:
        raise CorruptStreamError(str(exc), stage="container") from exc
    cfg = p.inner
    if cfg.w != w or _fixed(cfg.r, 32) != r:
        raise CorruptStreamError("parameter mismatch: w or r disagree with lambda and mu", stage="container")
    return p


def _finish(src: BitSource):
    """Whatever follows the last codeword must be fewer than 8 zero bits."""
    rest = src.remaining
    if rest >= 8 or (rest and src.peek(rest)):
        raise CorruptStreamError("trailing data after the payload", stage="container")


def encode(data, codec: str = "adaptive", sigma: int = 256, lam=1, k: int = 0, mu=1, dumps: dict = None) -> bytes:
    """Compress a symbol sequence into container bytes."""
    s = np.frombuffer(data, dtype=np.uint8).astype(np.int64) if isinstance(data, (bytes, bytearray)) else np.asarray(data, dtype=np.int64)
    if sigma < 2:
        raise ParameterError("alphabet size must be at least 2")
    if s.size and (s.min() < 0 or s.max() >= sigma):
        raise ParameterError(f"input symbol {int(s.max())} outside the alphabet of size {sigma}")
    cid = CODECS.get(codec)
    if cid is None:
        raise ParameterError(f"unknown codec {codec!r}")
    n = int(s.size)
    params = b""
    sink = BitSink()
    if cid == ADAPTIVE:
        params = b"\x01"  # n known in advance
        sink.extend(adaptive.encode_stream(s, sigma))
    elif cid == BOUNDED:
        p = bounded.OnePassParams(sigma, lam, k, mu)
        params = _bounded_params(p)
        bounded.one_pass_encode(s.tolist(), p, sink)
    elif cid == BWT:
        if n:
            stages = bwt.analyze_stages(s, sigma)
            if dumps is not None:
                dumps["bwt"] = stages.transform
                dumps["mtf"] = stages.mtf
            bwt.pipeline_compress(s, sigma, sink, stages)
    else:
        gs = online_sorter.GapListSet().extend(s.tolist())
        gs.finalize()
        online_sorter.write_gaplists(sink, gs, sigma)
    return Container(cid, sigma, n, params, sink.getbits().data).pack()


def decode(blob: bytes) -> tuple:
    """(container, decoded symbols as a list of ints)."""
    c = Container.unpack(blob)
    src = BitSource(c.payload)
    try:
        if c.codec == ADAPTIVE:
            if c.params != b"\x01":
                raise CorruptStreamError("unsupported adaptive parameters", stage="container")
            out = adaptive.decode_stream(src, c.sigma, c.n) if c.n else []
        elif c.codec == BOUNDED:
            p = _read_bounded_params(c.params, c.sigma)
            out = bounded.one_pass_decode(src, p, c.n)
        elif c.codec == BWT:
            out = bwt.pipeline_decompress(src, c.sigma, c.n) if c.n else []
        else:
            keys, lists = online_sorter.read_gaplists(src, c.sigma, c.n)
            out = [None] * c.n
            for a, pos in zip(keys, lists):
                for j in pos:
                    if not 1 <= j <= c.n or out[j - 1] is not None:
                        raise CorruptStreamError("positions do not form a permutation", stage="gaplist")
                    out[j - 1] = a
            if any(x is None for x in out):
                raise CorruptStreamError("positions do not cover the input", stage="gaplist")
        _finish(src)
    except (ParameterError, IndexError) as exc:
        raise CorruptStreamError(str(exc), stage=CODEC_NAMES[c.codec]) from exc
    return c, out
