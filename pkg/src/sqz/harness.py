"""One-pass access discipline and working-state audit.

A processor exposes ``on_symbol(a)``, ``finish()`` and ``state_size_bits()``.
Processors that keep an input block resident may set ``block_residency = True``
and report the block separately through ``resident_block_bits()``; their
audited peak then excludes the block. For everyone else any reported
resident block is added to the audited state.
"""

import json
from dataclasses import asdict, dataclass
from math import ceil
from typing import Iterable


@dataclass
class StreamAccount:
    passes: int = 0
    peak_state_bits: int = 0
    n: int = 0
    polls: int = 0
    block_residency: bool = False
    peak_resident_bits: int = 0

    def to_json(self, **extra) -> str:
        return json.dumps({**asdict(self), **extra}, sort_keys=True)


class OnePassSource:
    """Iterates its input exactly once; asking for a second pass is an error."""

    def __init__(self, items: Iterable):
        self._items = items
        self._used = False

    def __iter__(self):
        if self._used:
            raise RuntimeError("input already consumed: only one pass is allowed")
        self._used = True
        return iter(self._items)


def run_one_pass(processor, source: Iterable, n: int = None) -> tuple:
    """Feed ``source`` to ``processor`` once, polling its state every ceil(n/1024) symbols.

    Returns (processor.finish() output, StreamAccount).
    """
    if n is None:
        n = len(source)
    interval = max(1, ceil(n / 1024))
    resident = bool(getattr(processor, "block_residency", False))
    block_bits = getattr(processor, "resident_block_bits", None)
    acct = StreamAccount(passes=1, block_residency=resident)

    def poll():
        state = processor.state_size_bits()
        rb = block_bits() if block_bits else 0
        if not resident:
            state += rb
        acct.peak_state_bits = max(acct.peak_state_bits, state)
        acct.peak_resident_bits = max(acct.peak_resident_bits, rb)
        acct.polls += 1

    on_symbol = processor.on_symbol
    count = 0
    for a in OnePassSource(source):
        on_symbol(a)
        count += 1
        if count % interval == 0:
            poll()
    if count % interval:
        poll()
    acct.n = count
    return processor.finish(), acct
