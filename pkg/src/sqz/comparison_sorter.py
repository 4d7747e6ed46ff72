"""Online stable multiset sorting with a periodically rebuilt Mehlhorn tree.

Distinct elements seen by the last rebuild sit in a weight-balanced search
tree; elements first seen since then go into AVL trees hanging off the
tree's extended leaves. Every node visited costs one ternary comparison, so
finding an element at depth d costs d + 1.
"""

from fractions import Fraction
from typing import Sequence

from .errors import ParameterError


class Node:
    __slots__ = ("key", "positions", "left", "right", "depth")

    def __init__(self, key, positions, depth):
        self.key = key
        self.positions = positions
        self.left = self.right = None
        self.depth = depth


def build_mehlhorn(keys: Sequence, weights: Sequence, items: Sequence = None):
    """Weight-bisection search tree over sorted ``keys``.

    ``weights`` are positive probabilities or counts. Each root splits its
    range so that neither side carries more than half the range's weight,
    which puts a key of probability p at depth at most log2(1/p).
    Returns the root; each node records its depth.
    """
    if len(keys) != len(weights):
        raise ParameterError("one weight per key")
    if any(w <= 0 for w in weights):
        raise ParameterError("zero probability: every key needs positive weight")
    if any(not keys[i] < keys[i + 1] for i in range(len(keys) - 1)):
        raise ParameterError("keys must be sorted and distinct")
    if not keys:
        return None
    ws = [w if isinstance(w, int) else Fraction(w) for w in weights]
    prefix = [0]
    for w in ws:
        prefix.append(prefix[-1] + w)

    def build(lo, hi, depth):
        if lo >= hi:
            return None
        total = prefix[hi] - prefix[lo]
        # first k whose prefix through k reaches half the range's weight
        a, b = lo, hi - 1
        while a < b:
            m = (a + b) // 2
            if 2 * (prefix[m + 1] - prefix[lo]) >= total:
                b = m
            else:
                a = m + 1
        best, best_cost = a, None
        for k in (a - 1, a):
            if lo <= k < hi:
                cost = max(prefix[k] - prefix[lo], prefix[hi] - prefix[k + 1])
                if best_cost is None or cost < best_cost:
                    best, best_cost = k, cost
        node = Node(keys[best], items[best] if items is not None else None, depth)
        node.left = build(lo, best, depth + 1)
        node.right = build(best + 1, hi, depth + 1)
        return node

    return build(0, len(keys), 0)


def tree_depths(root) -> dict:
    out, stack = {}, [root] if root else []
    while stack:
        x = stack.pop()
        out[x.key] = x.depth
        stack.extend(c for c in (x.left, x.right) if isinstance(c, Node))
    return out


class AVLNode:
    __slots__ = ("key", "positions", "left", "right", "height")

    def __init__(self, key, positions):
        self.key = key
        self.positions = positions
        self.left = self.right = None
        self.height = 1


def _h(x):
    return x.height if x else 0


def _fix(x):
    x.height = 1 + max(_h(x.left), _h(x.right))


def _rot_right(x):
    y = x.left
    x.left, y.right = y.right, x
    _fix(x)
    _fix(y)
    return y


def _rot_left(x):
    y = x.right
    x.right, y.left = y.left, x
    _fix(x)
    _fix(y)
    return y


def _balance(x):
    _fix(x)
    bf = _h(x.left) - _h(x.right)
    if bf > 1:
        if _h(x.left.left) < _h(x.left.right):
            x.left = _rot_left(x.left)
        return _rot_right(x)
    if bf < -1:
        if _h(x.right.right) < _h(x.right.left):
            x.right = _rot_right(x.right)
        return _rot_left(x)
    return x


class AVLTree:
    """AVL tree of elements first seen since the last rebuild; counts its own comparisons."""

    __slots__ = ("root", "size")

    def __init__(self):
        self.root = None
        self.size = 0

    def insert(self, key, j) -> int:
        """Record position ``j`` under ``key``; returns comparisons used."""
        # search first: a hit needs no restructuring
        x, cost = self.root, 0
        while x is not None:
            cost += 1
            if key < x.key:
                x = x.left
            elif x.key < key:
                x = x.right
            else:
                x.positions.append(j)
                return cost

        def ins(x):
            if x is None:
                return AVLNode(key, [j])
            if key < x.key:
                x.left = ins(x.left)
            else:
                x.right = ins(x.right)
            return _balance(x)

        self.root = ins(self.root)
        self.size += 1
        return cost

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
        def walk(x, lo, hi):
            if x is None:
                return 0
            if (lo is not None and not lo < x.key) or (hi is not None and not x.key < hi):
                raise AssertionError
            hl, hr = walk(x.left, lo, x.key), walk(x.right, x.key, hi)
            if abs(hl - hr) > 1 or x.height != 1 + max(hl, hr):
                raise AssertionError
            return x.height

        try:
            walk(self.root, None, None)
            return True
        except AssertionError:
            return False


class WeightedTree:
    """Online stable sorter; ``comparisons`` is the running ternary-comparison total."""

    def __init__(self):
        self.root = AVLTree()  # before the first rebuild the whole tree is one extended leaf
        self.comparisons = 0
        self.processed = 0
        self.processed_since_rebuild = 0
        self.distinct_at_last_rebuild = 0
        self.rebuilds = 0
        self.max_avl = 0

    def insert(self, j: int, a) -> int:
        if j <= self.processed:
            raise ParameterError(f"position {j} is not after {self.processed}")
        x, parent, side, cost = self.root, None, None, 0
        while type(x) is Node:
            cost += 1
            if a < x.key:
                parent, side, x = x, 0, x.left
            elif x.key < a:
                parent, side, x = x, 1, x.right
            else:
                x.positions.append(j)
                break
        else:
            cost += x.insert(a, j)
            if x.size > self.max_avl:
                self.max_avl = x.size
        self.comparisons += cost
        self.processed = j
        self.processed_since_rebuild += 1
        return cost

    def maybe_rebuild(self) -> bool:
        if self.processed_since_rebuild < max(self.distinct_at_last_rebuild, 1):
            return False
        self.rebuild()
        return True

    def entries(self):
        """(key, positions) for every distinct element, in increasing key order."""
        stack, x = [], self.root
        while stack or x is not None:
            while type(x) is Node:
                stack.append(x)
                x = x.left
            if x is not None:
                for v in x.inorder():
                    yield v.key, v.positions
            if not stack:
                return
            x = stack.pop()
            yield x.key, x.positions
            x = x.right

    def rebuild(self):
        keys, items = [], []
        for key, pos in self.entries():
            keys.append(key)
            items.append(pos)
        # p_a = occ(a) / i; integer counts give the same bisection exactly
        root = build_mehlhorn(keys, [len(p) for p in items], items)
        stack = [root]
        while stack:
            x = stack.pop()
            for attr in ("left", "right"):
                c = getattr(x, attr)
                if c is None:
                    setattr(x, attr, AVLTree())
                else:
                    stack.append(c)
        self.root = root
        self.distinct_at_last_rebuild = len(keys)
        self.processed_since_rebuild = 0
        self.rebuilds += 1

    def add(self, a) -> int:
        cost = self.insert(self.processed + 1, a)
        self.maybe_rebuild()
        return cost

    def sorted_output(self) -> list:
        out = []
        for _, pos in self.entries():
            out.extend(pos)
        return out

    def height(self) -> int:
        if type(self.root) is not Node:
            return 0
        return max(tree_depths(self.root).values())


def sort_online(s: Sequence) -> tuple:
    """(stable-sort permutation, comparison count) for ``s``, positions 1-based."""
    t = WeightedTree()
    for a in s:
        t.add(a)
    return t.sorted_output(), t.comparisons
