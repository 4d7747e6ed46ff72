"""Bit-level I/O and the Elias gamma code.

All multi-bit fields are written most-significant bit first, so comparing two
left-aligned codewords as integers is the same as comparing them
lexicographically.
"""

from dataclasses import dataclass

from .errors import CorruptStreamError, TruncatedStreamError

DEFAULT_MAX_GAMMA_ZEROS = 64


@dataclass(frozen=True)
class Bits:
    """An immutable bit string: ``length`` bits packed MSB-first into ``data``."""

    data: bytes
    length: int

    def __len__(self):
        return self.length

    def __str__(self):
        return self.to01()

    def to01(self) -> str:
        if not self.length:
            return ""
        return format(int.from_bytes(self.data, "big"), f"0{len(self.data) * 8}b")[: self.length]

    @classmethod
    def from01(cls, text: str) -> "Bits":
        sink = BitSink()
        for ch in text:
            sink.write_bit(ch == "1")
        return sink.getbits()


class BitSink:
    """Append-only bit buffer.

    ``capacity`` follows the doubling discipline of an expandable array: it
    starts at one bit and doubles whenever an append overflows it, so the
    allocated size is never more than twice the content.
    """

    __slots__ = ("_buf", "_nbytes", "_acc", "_nacc", "length", "capacity")

    def __init__(self):
        self._buf = bytearray(1)
        self._nbytes = 0  # whole bytes committed to _buf
        self._acc = 0  # pending low-order bits not yet committed
        self._nacc = 0
        self.length = 0
        self.capacity = 1

    def __len__(self):
        return self.length

    def write(self, value: int, width: int):
        """Append ``value`` as exactly ``width`` bits."""
        if value < 0 or value >> width:
            raise OverflowError(f"{value} does not fit in {width} bits")
        if not width:
            return
        self._acc = (self._acc << width) | value
        self._nacc += width
        self.length += width
        while self.length > self.capacity:
            self.capacity <<= 1
        if self._nacc >= 64:
            self._commit()

    def write_bit(self, bit):
        self.write(1 if bit else 0, 1)

    def write_gamma(self, x: int):
        # gamma(x) is x itself written in 2*floor(log x)+1 bits
        if x < 1:
            raise ValueError(f"gamma code is defined for positive integers, got {x}")
        self.write(x, 2 * x.bit_length() - 1)

    def extend(self, bits: Bits):
        nfull, rest = divmod(bits.length, 8)
        if self._nacc == 0 and nfull:
            self._commit_bytes(bits.data[:nfull], nfull * 8)
        else:
            for i in range(0, nfull, 8):
                chunk = bits.data[i : min(i + 8, nfull)]
                self.write(int.from_bytes(chunk, "big"), len(chunk) * 8)
        if rest:
            self.write(bits.data[nfull] >> (8 - rest), rest)

    def _commit_bytes(self, raw: bytes, nbits: int):
        need = self._nbytes + len(raw)
        if need > len(self._buf):
            size = len(self._buf)
            while size < need:
                size <<= 1
            self._buf.extend(bytes(size - len(self._buf)))
        self._buf[self._nbytes : need] = raw
        self._nbytes = need
        self.length += nbits
        while self.length > self.capacity:
            self.capacity <<= 1

    def _commit(self):
        nb = self._nacc >> 3
        if not nb:
            return
        keep = self._nacc & 7
        chunk = self._acc >> keep
        self._acc &= (1 << keep) - 1
        self._nacc = keep
        self.length -= nb * 8  # _commit_bytes re-adds them
        self._commit_bytes(chunk.to_bytes(nb, "big"), nb * 8)

    def getbits(self) -> Bits:
        self._commit()
        data = bytes(self._buf[: self._nbytes])
        if self._nacc:
            data += bytes([self._acc << (8 - self._nacc)])
        return Bits(data, self.length)

    def to01(self) -> str:
        return self.getbits().to01()


class BitSource:
    """Sequential reader over a :class:`Bits` value (or raw bytes)."""

    __slots__ = ("data", "length", "cursor")

    def __init__(self, bits, length=None):
        if isinstance(bits, Bits):
            self.data = bits.data
            self.length = bits.length if length is None else length
        else:
            self.data = bytes(bits)
            self.length = len(self.data) * 8 if length is None else length
        if self.length > len(self.data) * 8:
            raise ValueError("bit length exceeds the available bytes")
        self.cursor = 0

    @classmethod
    def from01(cls, text: str) -> "BitSource":
        return cls(Bits.from01(text))

    @property
    def remaining(self) -> int:
        return self.length - self.cursor

    def peek(self, width: int) -> int:
        """Next ``width`` bits as an integer, zero-padded past the end. Does not advance."""
        if width <= 0:
            return 0
        pos = self.cursor
        end = min(pos + width, self.length)
        if end <= pos:
            return 0
        sb = pos >> 3
        eb = (end + 7) >> 3
        chunk = int.from_bytes(self.data[sb:eb], "big")
        avail = end - pos
        chunk >>= (eb << 3) - end
        chunk &= (1 << avail) - 1
        return chunk << (width - avail)

    def skip(self, width: int):
        if width > self.remaining:
            raise TruncatedStreamError(f"need {width} bits, {self.remaining} left")
        self.cursor += width

    def read(self, width: int) -> int:
        if width > self.length - self.cursor:
            raise TruncatedStreamError(f"need {width} bits, {self.remaining} left")
        value = self.peek(width)
        self.cursor += width
        return value

    def read_bit(self) -> int:
        return self.read(1)

    def read_gamma(self, max_zeros: int = DEFAULT_MAX_GAMMA_ZEROS) -> int:
        return gamma_decode(self, max_zeros)


def gamma_length(x: int) -> int:
    return 2 * x.bit_length() - 1


def gamma_encode(x: int) -> str:
    """Elias gamma codeword of ``x`` as a '0'/'1' string."""
    if x < 1:
        raise ValueError(f"gamma code is defined for positive integers, got {x}")
    b = x.bit_length()
    return "0" * (b - 1) + format(x, "b")


def gamma_decode(src: BitSource, max_zeros: int = DEFAULT_MAX_GAMMA_ZEROS) -> int:
    """Consume one gamma codeword from ``src``.

    Raises TruncatedStreamError if the codeword runs past the end of the source
    and CorruptStreamError once ``max_zeros`` zeros are read with no terminating 1.
    """
    zeros = 0
    while True:
        rem = src.remaining
        if rem <= 0:
            raise TruncatedStreamError("stream ended inside a gamma codeword")
        width = min(rem, 64)
        window = src.peek(width)
        lead = width - window.bit_length() if window else width
        zeros += lead
        if zeros >= max_zeros:
            raise CorruptStreamError(f"{max_zeros} leading zeros in gamma codeword")
        src.cursor += lead
        if window:
            return src.read(zeros + 1)


def write_fixed(sink: BitSink, value: int, width: int):
    if value < 0 or value >> width:
        raise OverflowError(f"{value} does not fit in {width} bits")
    sink.write(value, width)


def read_fixed(src: BitSource, width: int) -> int:
    return src.read(width)
