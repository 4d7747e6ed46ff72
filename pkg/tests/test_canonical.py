from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sqz.bitio import BitSink, BitSource
from sqz.canonical import (
    build_canonical,
    kraft_ok,
    lengths_from_counts,
    read_code,
    shannon_lengths,
    write_code,
)
from sqz.errors import CorruptStreamError, ParameterError

FIGURE_LENGTHS = [3, 3] + [4] * 6 + [5] * 8
FIGURE_CODEWORDS = [
    "000", "001", "0100", "0101", "0110", "0111", "1000", "1001",
    "10100", "10101", "10110", "10111", "11000", "11001", "11010", "11011",
]


def enumerate_canonical(lengths_in_rank_order):
    """Independent oracle: the rank-i codeword is the first l_i bits of sum_{j<i} 2^-l_j."""
    out, acc = [], Fraction(0)
    for l in lengths_in_rank_order:
        out.append(format(int(acc * 2**l), f"0{l}b"))
        acc += Fraction(1, 2**l)
    return out


def random_code(rng, sigma):
    counts = rng.integers(1, 1000, sigma).tolist()
    return build_canonical(lengths_from_counts(counts)), counts


def test_figure_code():
    code = build_canonical(FIGURE_LENGTHS)
    assert [code.codeword(a) for a in range(16)] == FIGURE_CODEWORDS
    # one dictionary entry per distinct length; ranks are 0-based here
    assert code.d1_ranks == [0, 2, 8]
    assert [format(c, f"0{l}b") for c, l in zip(code.d1_codes, code.d_lens)] == ["000", "0100", "10100"]


def test_rank_six_worked_example():
    code = build_canonical(FIGURE_LENGTHS)
    a = code.A2[5]  # the 6th codeword in 1-based rank order
    assert code.A1[a] == 5
    assert code.codeword(a) == "0111"
    window = 0b01110  # "0111" followed by lookahead
    assert code.decode_symbol(window) == (a, 4)


def test_rank_one_is_all_zeros():
    code = build_canonical(FIGURE_LENGTHS)
    assert code.codeword(code.A2[0]) == "000"
    assert code.decode_symbol(0) == (code.A2[0], 3)


def test_dyadic_and_uniform_lengths():
    assert shannon_lengths([0.5, 0.25, 0.125, 0.125]) == (1, 2, 3, 3)
    assert shannon_lengths([0.2] * 5) == (3,) * 5
    code = build_canonical([1, 2, 3, 3])
    assert [code.codeword(a) for a in range(4)] == ["0", "10", "110", "111"]


def test_shannon_length_preconditions():
    with pytest.raises(ParameterError):
        shannon_lengths([0.5, 0.5, 0.0])
    with pytest.raises(ParameterError):
        shannon_lengths([0.25, 0.75])
    with pytest.raises(ParameterError):
        shannon_lengths([0.5, 0.4])


def test_smallest_codes():
    with pytest.raises(ParameterError):
        build_canonical([0])
    code = build_canonical([1])
    assert code.codeword(0) == "0"
    with pytest.raises(CorruptStreamError):
        code.decode_symbol(1)


def test_kraft_violation_rejected():
    with pytest.raises(ParameterError):
        build_canonical([1, 1, 2])
    with pytest.raises(ParameterError):
        build_canonical([2, 1], order=[0, 1])


def test_dirichlet_kraft(rng):
    for _ in range(1000):
        sigma = int(rng.integers(1, 64))
        p = np.sort(rng.dirichlet(np.ones(sigma)))[::-1]
        p = [Fraction(x) for x in p]
        p[-1] = 1 - sum(p[:-1])  # exact normalization keeps the vector nonincreasing up to float noise
        if p[-1] <= 0 or any(p[i] < p[i + 1] for i in range(sigma - 1)):
            continue
        lengths = shannon_lengths(p)
        assert kraft_ok(lengths)
        assert sum(Fraction(1, 2**l) for l in lengths) <= 1
        assert list(lengths) == sorted(lengths)


def test_encode_matches_enumeration(rng):
    for _ in range(200):
        code, _ = random_code(rng, int(rng.integers(2, 80)))
        ranked = [code.lengths[a] for a in code.A2]
        expect = enumerate_canonical(ranked)
        assert [code.codeword(a) for a in code.A2] == expect


def test_prefix_free_pairwise(rng):
    for sigma in (2, 17, 100, 512):
        code, _ = random_code(rng, sigma)
        words = sorted(code.codeword(a) for a in range(sigma))
        # in sorted order a prefix would sit immediately before one of its extensions
        for u, v in zip(words, words[1:]):
            assert not v.startswith(u)


def test_decode_inverts_encode(rng):
    for _ in range(500):
        code, _ = random_code(rng, int(rng.integers(2, 40)))
        for a in range(len(code)):
            value, length = code.encode_symbol(a)
            pad = code.max_len - length
            window = (value << pad) | int(rng.integers(0, 1 << pad)) if pad else value
            assert code.decode_symbol(window) == (a, length)


def test_expected_length_below_entropy_plus_one(rng):
    for _ in range(100):
        counts = rng.integers(1, 500, int(rng.integers(2, 50))).tolist()
        total = sum(counts)
        lengths = lengths_from_counts(counts)
        expected = sum(c * l for c, l in zip(counts, lengths)) / total
        h = sum(c / total * np.log2(total / c) for c in counts)
        assert expected < h + 1


def test_dictionary_sizes(rng):
    code, _ = random_code(rng, 300)
    assert len(code.d1_ranks) == len(set(code.lengths)) <= code.max_len
    for key, rank, l in zip(code.d2_keys, code.d2_ranks, code.d_lens):
        a = code.A2[rank]
        value, length = code.encode_symbol(a)
        assert length == l and key == value << (code.max_len - l)


def test_unknown_symbol():
    code = build_canonical([1, 1])
    with pytest.raises(ParameterError):
        code.encode_symbol(2)


@given(st.lists(st.integers(1, 10_000), min_size=1, max_size=60))
def test_serialization_round_trip(counts):
    lengths = lengths_from_counts(counts) if len(counts) > 1 else [1]
    code = build_canonical(lengths)
    sink = BitSink()
    write_code(sink, code)
    back = read_code(BitSource(sink.getbits()))
    assert back.lengths == code.lengths
    assert all(back.codeword(a) == code.codeword(a) for a in range(len(counts)))
