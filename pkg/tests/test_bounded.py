import itertools
import math
from collections import Counter
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sqz.bitio import BitSink, BitSource, gamma_length
from sqz.bounded import (
    BlockCodec,
    OnePassEncoder,
    OnePassParams,
    Order0Config,
    QuantizedDistribution,
    block_overhead_bound,
    decode_block_order0,
    decode_order0,
    decode_order_k,
    encode_block_order0,
    encode_order0,
    encode_order_k,
    entropy,
    heavy_hitters,
    misra_gries,
    one_pass_decode,
    one_pass_encode,
    quantize,
    r_param,
    relative_entropy,
)
from sqz.errors import CorruptStreamError, ParameterError
from sqz.text_stats import gen_debruijn, gen_periodic, hk


def random_counts(rng, sigma, alpha=0.5, n=10_000):
    p = rng.dirichlet(np.ones(sigma) * alpha)
    return rng.multinomial(n, p).tolist()


def sfe_oracle(q, w, block):
    """Codeword from exact fractions: the first ceil(log2(2/P)) bits of F + P/2."""
    one = Fraction(1, 2**w)
    F, P = Fraction(0), Fraction(1)
    for x in block:
        F += P * sum(q[:x]) * one
        P *= q[x] * one
    f = F + P / 2
    length = 1
    while Fraction(2**length) < 2 / P:
        length += 1
    return format(math.floor(f * 2**length), f"0{length}b")


def test_r_parameter():
    assert r_param(2) == 2
    assert r_param(1) >= 1 + 1 / (2**0.5 - 1)
    assert r_param(1) - Fraction(1 + 1 / (2**0.5 - 1)) < Fraction(1, 2**31)
    with pytest.raises(ParameterError):
        r_param(0)


def test_uniform_lambda_one():
    counts = [7] * 16
    for mu in (0.5, 1, 2):
        qd = quantize(counts, 1, mu)
        assert relative_entropy(counts, qd.probabilities()) < mu


@pytest.mark.parametrize("lam", [1, 2])
@pytest.mark.parametrize("mu", [0.5, 2])
@pytest.mark.parametrize("sigma", [16, 256])
def test_relative_entropy_bound(rng, lam, mu, sigma):
    for _ in range(100):
        counts = random_counts(rng, sigma, alpha=float(rng.choice([0.05, 0.5, 5.0])))
        qd = quantize(counts, lam, mu)
        bound = (lam - 1) * entropy(counts) + mu
        assert relative_entropy(counts, qd.probabilities()) < bound
        assert relative_entropy(counts, [float(x) for x in qd.exact()]) < bound


def test_quantized_mass_and_heavy_count(rng):
    for sigma in (4, 16, 256):
        for lam in (1, 1.5, 2, 3):
            for mu in (0.5, 1, 2):
                counts = random_counts(rng, sigma, alpha=0.2)
                qd = quantize(counts, lam, mu)
                assert sum(qd.fixed()) <= 1 << qd.w
                exact = sum(qd.exact())
                assert exact <= 1
                if 0 < qd.t < sigma:
                    assert exact == 1
                assert qd.t <= math.ceil(float(qd.r) * sigma ** (1 / lam))
                m = sum(counts)
                thresh = 1 / (float(qd.r) * sigma ** (1 / lam))
                for a in qd.heavy:
                    assert counts[a] / m >= thresh * (1 - 1e-12)
                assert all(x > 0 for x in qd.fixed())


def test_quantize_accepts_probabilities():
    a = quantize([0.5, 0.25, 0.125, 0.125], 1, 1)
    b = quantize([4, 2, 1, 1], 1, 1)
    assert a.heavy == b.heavy and a.weights == b.weights


def test_empty_heavy_set_is_legal():
    qd = quantize([1] * 256, 2, 0.5)
    assert qd.t == 0
    assert set(qd.fixed()) == {math.floor(Fraction(1 << qd.w) / (qd.r * 256))}
    assert sum(qd.exact()) == 1 / qd.r  # only the light share of the mass is assigned


def test_distribution_header_round_trip(rng):
    counts = random_counts(rng, 64, alpha=0.1)
    qd = quantize(counts, 1, 1)
    sink = BitSink()
    qd.write(sink)
    assert len(sink) == qd.header_bits()
    back = QuantizedDistribution.read(BitSource(sink.getbits()), 64, 1, 1, qd.r)
    assert back.fixed() == qd.fixed()


def test_misra_gries_and_heavy_hitters(rng):
    assert heavy_hitters("aaab", Fraction(1, 2)) == {"a"}
    assert heavy_hitters(list(range(16)) * 10, Fraction(2, 16)) == set()
    for _ in range(200):
        sigma = int(rng.integers(2, 30))
        s = rng.choice(sigma, int(rng.integers(1, 500)), p=rng.dirichlet(np.ones(sigma) * 0.3)).tolist()
        theta = Fraction(int(rng.integers(1, 20)), 40)
        counts = Counter(s)
        assert heavy_hitters(s, theta) == {a for a, c in counts.items() if c >= theta * len(s)}
        k = int(rng.integers(1, 10))
        mg = misra_gries(s, k)
        assert all(a in mg for a, c in counts.items() if c > len(s) / (k + 1))


def test_two_symbol_block_examples():
    codec = BlockCodec([1, 1], w=1, L=1)
    assert encode_block_order0([0], codec) == "01"
    assert encode_block_order0([1], codec) == "11"
    assert decode_block_order0("01", codec) == [0]
    assert decode_block_order0("11", codec) == [1]


def test_block_round_trips(rng):
    for _ in range(10_000 // 50):
        sigma = int(rng.integers(2, 20))
        qd = quantize(random_counts(rng, sigma, alpha=0.3, n=1000), 1, float(rng.choice([0.5, 1, 2])))
        L = int(rng.integers(1, 9))
        codec = BlockCodec.from_distribution(qd, L)
        sink, blocks = BitSink(), []
        for _ in range(50):
            b = rng.integers(0, sigma, L).tolist()
            blocks.append(b)
            value, length = codec.encode_block(b)
            assert length == codec.code_length(b)
            sink.write(value, length)
        src = BitSource(sink.getbits())
        assert [codec.decode_block(src) for _ in blocks] == blocks
        assert src.remaining == 0


def test_code_length_is_exact(rng):
    for _ in range(300):
        sigma = int(rng.integers(2, 10))
        qd = quantize(random_counts(rng, sigma, n=200), 1, 1)
        q, w = qd.fixed(), qd.w
        L = int(rng.integers(1, 5))
        codec = BlockCodec(q, w, L)
        b = rng.integers(0, sigma, L).tolist()
        pr = Fraction(math.prod(q[x] for x in b), 2 ** (w * L))
        expect = next(l for l in itertools.count(1) if Fraction(2**l) >= 2 / pr)
        assert codec.code_length(b) == expect
        assert encode_block_order0(b, codec) == sfe_oracle(q, w, b)


@pytest.mark.parametrize("sigma", [2, 3, 4])
@pytest.mark.parametrize("L", [1, 2])
def test_brute_force_small_codes(rng, sigma, L):
    for _ in range(20):
        qd = quantize(random_counts(rng, sigma, n=50), 1, float(rng.choice([0.5, 2])))
        codec = BlockCodec.from_distribution(qd, L)
        words = {}
        for b in itertools.product(range(sigma), repeat=L):
            words[b] = encode_block_order0(list(b), codec)
            assert words[b] == sfe_oracle(qd.fixed(), qd.w, b)
        ws = sorted(words.values())
        assert all(not v.startswith(u) for u, v in zip(ws, ws[1:]))
        # decoding by exhaustive search agrees with interval descent
        for b, code in words.items():
            matches = [c for c, word in words.items() if word == code]
            assert matches == [b]
            assert decode_block_order0(code + "0110", codec) == list(b)


def test_block_codec_rejects_zero_and_excess():
    with pytest.raises(ParameterError):
        BlockCodec([0, 2], 1, 1)
    with pytest.raises(ParameterError):
        BlockCodec([2, 1], 1, 1)


def test_block_decode_detects_garbage():
    codec = BlockCodec([1, 1], w=2, L=2)  # half the code space is unassigned
    with pytest.raises(CorruptStreamError):
        decode_block_order0("11111", codec)


@pytest.mark.parametrize("mu", [0.5, 1, 2])
def test_order0_round_trip(rng, mu):
    for sigma in (2, 5, 16):
        for n in (0, 1, 7, 2000):
            s = rng.integers(0, sigma, n).tolist()
            bits = encode_order0(s, sigma, 1, mu)
            assert decode_order0(bits, sigma, 1, mu, n) == s


def test_order_k_zero_is_order0(rng):
    s = rng.integers(0, 6, 3000).tolist()
    assert encode_order_k(s, 6, 1, 0, 1) == encode_order0(s, 6, 1, 1)


@pytest.mark.parametrize("k", [0, 1, 2])
def test_order_k_round_trip(rng, k):
    for sigma in (2, 4):
        for n in (k, k + 1, 5000):
            s = gen_periodic(rng.integers(0, sigma, 13).tolist(), n) if n >= 13 else rng.integers(0, sigma, n).tolist()
            bits = encode_order_k(s, sigma, 2, k, 1)
            assert decode_order_k(bits, n, sigma, 2, k, 1) == s


@pytest.mark.parametrize("k", [3, 5])
def test_debruijn_power_costs_about_mu_per_symbol(k):
    d = list(gen_debruijn(k))
    s = gen_periodic(d, 2**k * 400)
    n = len(s)
    mu = 0.5
    assert hk(s, k) == 0.0
    bits = encode_order_k(s, 2, 1, k, mu)
    overhead = block_overhead_bound(2, k, 1, 2 * mu, n) - gamma_length(n)
    assert len(bits) <= mu * n + overhead
    assert decode_order_k(bits, n, 2, 1, k, mu) == s


def test_random_order1_within_bound(rng):
    s = rng.integers(0, 4, 20_000).tolist()
    n = len(s)
    bits = encode_order_k(s, 4, 1, 1, 1)
    overhead = block_overhead_bound(4, 1, 1, 2, n) - gamma_length(n)
    assert len(bits) <= (hk(s, 1) + 1) * n + overhead


def test_context_cap():
    with pytest.raises(ParameterError):
        encode_order_k([0, 1, 2, 3], 256, 1, 3, 1)
    with pytest.raises(ParameterError):
        OnePassParams(256, 1, 3, 1)


@pytest.mark.parametrize("lam", [1, 2])
@pytest.mark.parametrize("k", [0, 1])
@pytest.mark.parametrize("mu", [0.5, 1, 2])
def test_one_pass_grid_round_trip(rng, lam, k, mu):
    for sigma in (2, 4):
        for c in (None, 0.02):
            params = OnePassParams(sigma, lam, k, mu, c)
            n = min(3 * params.block_length + 5, 6000)
            s = rng.choice(sigma, n, p=rng.dirichlet(np.ones(sigma))).tolist()
            bits = one_pass_encode(s, params)
            assert one_pass_decode(bits, params, n) == s


def test_single_outer_block_degenerates():
    params = OnePassParams(4, 1, 1, 1)
    s = [0, 1, 2, 3, 3, 2, 1, 0] * 10
    assert len(s) < params.block_length
    bits = one_pass_encode(s, params)
    expect = BitSink()
    expect.write_gamma(len(s))
    expect.extend(encode_order_k(s, 4, 1, 1, Fraction(1, 2)))
    assert bits == expect.getbits()


def test_blockwise_additivity(rng):
    params = OnePassParams(4, 1, 1, 1, c=0.05)
    B = params.block_length
    s = rng.integers(0, 4, 5 * B + 3).tolist()
    bits = one_pass_encode(s, params)
    parts = [s[i : i + B] for i in range(0, len(s), B)]
    total = sum(gamma_length(len(p)) + len(encode_order_k(p, 4, 1, 1, Fraction(1, 2))) for p in parts)
    assert len(bits) == total


def test_state_size_depends_on_parameters_only():
    params = OnePassParams(16, 2, 1, 1)
    sizes = set()
    for n in (10, 1000, 50_000):
        enc = OnePassEncoder(params)
        for a in range(n):
            enc.on_symbol(a % 16)
            if a % 997 == 0:
                sizes.add(enc.state_size_bits())
        enc.finish()
    assert len(sizes) == 1


def test_parameter_normalization():
    p = OnePassParams(4, 1.00001, 0, 0.3)
    assert p.lam.denominator <= 1 << 16 and p.mu.denominator <= 1 << 16
    assert p.c > 0
    with pytest.raises(ParameterError):
        OnePassParams(4, 0.5, 0, 1)
    with pytest.raises(ParameterError):
        OnePassParams(1, 1, 0, 1)
    assert Order0Config.for_mu(4, 1, 1).L == 4


def test_truncated_one_pass_stream(rng):
    params = OnePassParams(4, 1, 0, 1)
    s = rng.integers(0, 4, 500).tolist()
    bits = one_pass_encode(s, params)
    with pytest.raises(CorruptStreamError):
        one_pass_decode(BitSource(bits.data, len(bits) - 9), params, len(s))


@given(st.lists(st.integers(0, 2), min_size=2, max_size=300), st.sampled_from([0.5, 1, 2]), st.integers(0, 2))
def test_order_k_property(s, mu, k):
    bits = encode_order_k(s, 3, 1, k, mu)
    assert decode_order_k(bits, len(s), 3, 1, k, mu) == s
