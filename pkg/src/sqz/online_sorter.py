"""One-pass stable sorting permutation via gamma-coded gap lists in a splay tree.

Each distinct symbol owns a GapList: gamma(first position), then gamma(gap)
for every later occurrence. A run of gaps equal to 1 is stored as a single
gamma(1) followed by gamma(run length). Positions are 1-based.
"""

import heapq
from typing import Iterable

from .bitio import BitSink, BitSource, gamma_length
from .errors import CorruptStreamError, ParameterError


class GapList:
    __slots__ = ("symbol", "encoding", "last_pos", "run_pending", "count")

    def __init__(self, symbol, first: int):
        self.symbol = symbol
        self.encoding = BitSink()
        self.encoding.write_gamma(first)
        self.last_pos = first
        self.run_pending = 0
        self.count = 1

    def append(self, j: int):
        gap = j - self.last_pos
        if gap < 1:
            raise ParameterError(f"position {j} does not follow {self.last_pos}")
        if gap == 1:
            if not self.run_pending:
                self.encoding.write_gamma(1)
            self.run_pending += 1
        else:
            self.flush()
            self.encoding.write_gamma(gap)
        self.last_pos = j
        self.count += 1

    def flush(self):
        if self.run_pending:
            self.encoding.write_gamma(self.run_pending)
            self.run_pending = 0

    @property
    def bits(self) -> int:
        """Bits written so far, counting a pending run as already flushed."""
        return len(self.encoding) + (gamma_length(self.run_pending) if self.run_pending else 0)

    def positions(self) -> list:
        """Decode the absolute positions (partial sums of the gaps)."""
        self.flush()
        return list(decode_gaps(BitSource(self.encoding.getbits())))


def decode_gaps(src: BitSource):
    """Yield positions from one gap-list encoding until the source is exhausted."""
    if src.remaining <= 0:
        raise CorruptStreamError("empty gap list", stage="gaplist")
    pos = src.read_gamma()
    yield pos
    while src.remaining > 0:
        g = src.read_gamma()
        if g == 1:
            for _ in range(src.read_gamma()):
                pos += 1
                yield pos
        else:
            pos += g
            yield pos


class _Node:
    __slots__ = ("key", "left", "right", "parent", "item")

    def __init__(self, key, item, parent=None):
        self.key = key
        self.item = item
        self.left = self.right = None
        self.parent = parent


class SplayTree:
    """Bottom-up splay tree with parent pointers."""

    def __init__(self):
        self.root = None
        self.size = 0

    def _rotate(self, x):
        p = x.parent
        g = p.parent
        if p.left is x:
            p.left = x.right
            if x.right:
                x.right.parent = p
            x.right = p
        else:
            p.right = x.left
            if x.left:
                x.left.parent = p
            x.left = p
        p.parent = x
        x.parent = g
        if g is None:
            self.root = x
        elif g.left is p:
            g.left = x
        else:
            g.right = x

    def splay(self, x):
        while x.parent is not None:
            p = x.parent
            g = p.parent
            if g is None:
                self._rotate(x)
            elif (g.left is p) == (p.left is x):
                self._rotate(p)
                self._rotate(x)
            else:
                self._rotate(x)
                self._rotate(x)

    def find(self, key):
        x, last = self.root, None
        while x is not None:
            last = x
            if key < x.key:
                x = x.left
            elif x.key < key:
                x = x.right
            else:
                self.splay(x)
                return x
        if last is not None:
            self.splay(last)
        return None

    def find_or_insert(self, key, make):
        """Node for ``key``, inserting ``make()`` as its item if absent. Either way it ends at the root."""
        x, parent = self.root, None
        while x is not None:
            parent = x
            if key < x.key:
                x = x.left
            elif x.key < key:
                x = x.right
            else:
                self.splay(x)
                return x, False
        node = _Node(key, make(), parent)
        if parent is None:
            self.root = node
        elif key < parent.key:
            parent.left = node
        else:
            parent.right = node
        self.size += 1
        self.splay(node)
        return node, True

    def inorder(self):
        stack, x = [], self.root
        while stack or x is not None:
            while x is not None:
                stack.append(x)
                x = x.left
            x = stack.pop()
            yield x
            x = x.right

    def check(self) -> bool:
        """BST order, parent-pointer consistency and size."""
        if self.root is not None and self.root.parent is not None:
            return False
        prev, count = None, 0
        for node in self.inorder():
            for child in (node.left, node.right):
                if child is not None and child.parent is not node:
                    return False
            if prev is not None and not prev.key < node.key:
                return False
            prev = node
            count += 1
        return count == self.size


class GapListSet:
    """One-pass consumer producing the stable-sort permutation of its input."""

    def __init__(self):
        self.tree = SplayTree()
        self.processed = 0
        self.finalized = False

    def process(self, j: int, a):
        if j <= self.processed:
            raise ParameterError(f"position {j} is not after {self.processed}")
        if self.finalized:
            raise ParameterError("set already finalized")
        node, fresh = self.tree.find_or_insert(a, lambda: GapList(a, j))
        if not fresh:
            node.item.append(j)
        self.processed = j

    def extend(self, symbols: Iterable, start: int = 1):
        for j, a in enumerate(symbols, start):
            self.process(j, a)
        return self

    # processor interface for the one-pass harness
    def on_symbol(self, a):
        self.process(self.processed + 1, a)

    def finish(self):
        return self.finalize()

    def lists(self):
        return [node.item for node in self.tree.inorder()]

    def finalize(self) -> list:
        """pi as the concatenation of every list's positions, symbols in increasing order."""
        for gl in self.lists():
            gl.flush()
        self.finalized = True
        out = []
        for gl in self.lists():
            out.extend(gl.positions())
        return out

    def recover_input(self) -> list:
        """Replay the original sequence from the gap lists with a priority queue."""
        heap = []
        for rank, gl in enumerate(self.lists()):
            it = decode_gaps(BitSource(_flushed(gl)))
            heap.append((next(it), rank, gl.symbol, it))
        heapq.heapify(heap)
        out = []
        while heap:
            pos, rank, sym, it = heap[0]
            out.append(sym)
            nxt = next(it, None)
            if nxt is None:
                heapq.heappop(heap)
            else:
                heapq.heapreplace(heap, (nxt, rank, sym, it))
        return out

    def list_bits(self) -> int:
        return sum(gl.bits for gl in self.lists())

    def encoding_size_bits(self) -> int:
        """List bits plus gamma(n_i) per list, enough to delimit the concatenated lists."""
        return sum(gl.bits + gamma_length(gl.count) for gl in self.lists())

    def state_size_bits(self) -> int:
        """Allocated list capacity plus per-node bookkeeping.

        Each node is charged its key, last position and pending run length at
        ceil(log2(n+1)) bits apiece, and three child/parent pointers at
        ceil(log2(sigma+1)) bits apiece.
        """
        width = max(1, self.processed.bit_length())
        ptr = max(1, self.tree.size.bit_length())
        total = 0
        for node in self.tree.inorder():
            gl = node.item
            total += gl.encoding.capacity + 3 * width + 3 * ptr
        return total


def _flushed(gl: GapList):
    gl.flush()
    return gl.encoding.getbits()


def write_gaplists(sink: BitSink, gs: GapListSet, sigma: int):
    """gamma(lists + 1), then per list its symbol in ceil(log2 sigma) bits, gamma(bit length) and the bits."""
    sink.write_gamma(gs.tree.size + 1)
    ib = max(1, (sigma - 1).bit_length())
    for gl in gs.lists():
        bits = _flushed(gl)
        sink.write(gl.symbol, ib)
        sink.write_gamma(len(bits))
        sink.extend(bits)


def read_gaplists(src: BitSource, sigma: int, n: int) -> tuple:
    """(symbols, per-symbol position lists) from ``write_gaplists`` output."""
    m = src.read_gamma() - 1
    if m > min(n, sigma):
        raise CorruptStreamError(f"{m} lists for {n} symbols", stage="gaplist")
    ib = max(1, (sigma - 1).bit_length())
    keys, lists = [], []
    for _ in range(m):
        a = src.read(ib)
        length = src.read_gamma()
        if a >= sigma or (keys and a <= keys[-1]):
            raise CorruptStreamError("list symbols out of order", stage="gaplist")
        if length > src.remaining:
            raise CorruptStreamError("gap list runs past the end", stage="gaplist")
        sub = BitSource(src.data, src.cursor + length)
        sub.cursor = src.cursor
        lists.append(list(decode_gaps(sub)))
        src.cursor += length
        keys.append(a)
    return keys, lists


def stable_sort_permutation(s) -> list:
    """Oracle: 1-based positions ordered by (value, position)."""
    return [i + 1 for i in sorted(range(len(s)), key=lambda i: (s[i], i))]
