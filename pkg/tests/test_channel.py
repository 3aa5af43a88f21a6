import math
import statistics
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from groupkey.channel import ChannelError, ChannelModel, flip_positions, transmit, transmit_bits
from groupkey.ldpc import TannerGraph, build_stopping_set, bundled_matrix, decode, encode

S = build_stopping_set(TannerGraph(bundled_matrix()), 3)
CASE_INFO = (1, 1, 0, 1, 0, 0, 1, 1)


def test_zero_probability_is_identity():
    c = encode(S, CASE_INFO)
    for i in range(20):
        out, flips = transmit(c, ChannelModel("bsc", 0, seed=i), i)
        assert out == c and flips == ()


def test_explicit_x16_gives_the_reevaluated_case_word():
    c = encode(S, CASE_INFO)
    pos = S.transmit_order.index(15)
    out, flips = transmit(c, ChannelModel("explicit", positions=(pos,)))
    assert flips == (pos,)
    diff = [j for j in range(16) if out.bits[j] != c.bits[j]]
    assert diff == [15]
    res = decode(S, out)
    assert res.case == "reevaluated" and res.corrected == c


def test_bsc_half_mean_flips():
    m = ChannelModel("bsc", "0.5", seed=11)
    counts = [len(flip_positions(16, m, i)) for i in range(10000)]
    assert abs(statistics.fmean(counts) - 8) <= 0.3


@pytest.mark.parametrize("p", ["0.01", "0.2", "1/3", "0.5"])
def test_empirical_rate_within_three_sigma(p):
    q = Fraction(p)
    m = ChannelModel("bsc", p, seed=99)
    n_words, n = 1000, 128
    total = sum(len(flip_positions(n, m, i)) for i in range(n_words))
    bits = n_words * n
    sigma = math.sqrt(bits * q * (1 - q))
    assert abs(total - bits * q) <= 3 * sigma


def test_probability_one_flips_everything():
    assert flip_positions(16, ChannelModel("bsc", 1, seed=3)) == tuple(range(16))


@given(st.lists(st.integers(0, 1), min_size=1, max_size=200), st.integers(0, 2**64 - 1), st.integers(0, 1000))
@settings(max_examples=100, deadline=None)
def test_deterministic(bits, seed, index):
    m = ChannelModel("bsc", "0.3", seed=seed)
    assert transmit_bits(bits, m, index) == transmit_bits(bits, m, index)


@given(st.lists(st.integers(0, 1), min_size=16, max_size=16), st.sets(st.integers(0, 15)))
def test_explicit_pattern_is_an_involution(bits, positions):
    m = ChannelModel("explicit", positions=tuple(positions))
    once, flips = transmit_bits(bits, m)
    assert flips == tuple(sorted(positions))
    twice, _ = transmit_bits(once, m)
    assert twice == tuple(bits)


def test_single_mode_flips_one_bit_per_block():
    m = ChannelModel("single", seed=5, block=16)
    for i in range(200):
        flips = flip_positions(64, m, i)
        assert [j // 16 for j in flips] == [0, 1, 2, 3]
    # a short final block still takes a flip
    assert len(flip_positions(20, m)) == 2


def test_distinct_indices_give_distinct_realizations():
    m = ChannelModel("bsc", "0.5", seed=1)
    assert len({flip_positions(64, m, i) for i in range(50)}) == 50


def test_explicit_position_out_of_range():
    with pytest.raises(ChannelError):
        flip_positions(16, ChannelModel("explicit", positions=(16,)))


@pytest.mark.parametrize("bad", ["1.5", "-0.1", "abc"])
def test_bad_probability(bad):
    with pytest.raises(ChannelError):
        ChannelModel("bsc", bad)


def test_float_probability_is_read_as_its_decimal():
    assert ChannelModel("bsc", 0.1).flip_probability == Fraction(1, 10)


def test_dict_round_trip():
    for m in (ChannelModel("bsc", "0.2", 7), ChannelModel("explicit", 0, 1, (3, 4)), ChannelModel("single", 0, 2, block=8)):
        assert ChannelModel.from_dict(m.to_dict()) == m
    with pytest.raises(ChannelError):
        ChannelModel("burst")
