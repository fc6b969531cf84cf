import itertools
from functools import lru_cache

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from harqrelay.fec import (
    DECODE_FAILURE,
    MOTHER_CODE,
    RS_255_239,
    ConvCode,
    conv_encode,
    default_family,
    greedy_family,
    parse_masks,
    rs_decode,
    rs_encode,
    viterbi_decode,
)
from harqrelay.fec.reedsolomon import gf_tables

FAMILY = default_family()


@lru_cache(maxsize=None)
def all_codewords(k):
    infos = np.array(list(itertools.product([0, 1], repeat=k)), dtype=np.uint8).reshape(-1, k)
    return infos, np.array([conv_encode(u) for u in infos])


def brute_force_ml(llr, k):
    """Exhaustive ML: best correlation, lexicographically smallest info on ties."""
    infos, cws = all_codewords(k)
    metric = (1.0 - 2.0 * cws) @ llr
    return infos[np.flatnonzero(metric == metric.max())[0]]


# convolutional encoder ----------------------------------------------------------


def test_code_parameters():
    assert MOTHER_CODE.memory == 6
    assert MOTHER_CODE.constraint_length == 7
    assert MOTHER_CODE.generators == (0o145, 0o171, 0o133)
    assert MOTHER_CODE.n_states == 64


def test_all_zero_input():
    out = conv_encode(np.zeros(8, np.uint8))
    assert out.shape == (42,)
    assert not out.any()


def test_impulse_response_hand_trace():
    # 145 = 1100101, 171 = 1111001, 133 = 1011011; step t emits bit (6 - t) of each
    expected = [
        1, 1, 1,
        1, 1, 0,
        0, 1, 1,
        0, 1, 1,
        1, 0, 0,
        0, 0, 1,
        1, 1, 1,
    ]
    u = np.zeros(8, np.uint8)
    u[0] = 1
    out = conv_encode(u)
    assert out[:21].tolist() == expected
    assert not out[21:].any()


@given(st.lists(st.integers(0, 1), min_size=1, max_size=64), st.randoms(use_true_random=False))
def test_encoder_is_linear(a, rnd):
    a = np.array(a, np.uint8)
    b = np.array([rnd.randint(0, 1) for _ in a], np.uint8)
    np.testing.assert_array_equal(conv_encode(a ^ b), conv_encode(a) ^ conv_encode(b))


def test_generator_must_fit_register():
    with pytest.raises(ValueError):
        ConvCode(memory=2, generators=(0o17,))


# RCPC family --------------------------------------------------------------------


def test_family_rates_and_popcounts():
    assert FAMILY.period == 8
    assert FAMILY.popcounts() == [10, 12, 14, 16, 24]
    assert [str(r) for r in FAMILY.rates()] == ["4/5", "2/3", "4/7", "1/2", "1/3"]
    assert FAMILY.masks[-1].all()


def test_masks_nested_exhaustively():
    for j in range(FAMILY.n_rates):
        for l in range(j + 1, FAMILY.n_rates):
            assert np.all(FAMILY.masks[j] <= FAMILY.masks[l])


def test_greedy_rule_adds_row_major():
    base = np.zeros((3, 8), np.uint8)
    base[0] = 1
    base[1, 0] = base[1, 4] = 1
    fam = greedy_family(base, (10, 12, 16, 24))
    assert fam[1][1].tolist() == [1, 1, 1, 0, 1, 0, 0, 0]
    assert fam[2][1].tolist() == [1] * 8
    assert fam[3].all()


def test_mother_positions_cover_everything():
    k = 16
    np.testing.assert_array_equal(FAMILY.positions(5, k), np.arange(3 * (k + 6)))


def test_rate_one_positions_k8_enumerated():
    # default rate-4/5 mask column weights are 1,1,1,2,2,1,1,1 over the period;
    # 14 encoder steps cover columns 0..7 then 0..5
    column_weight = [1, 1, 1, 2, 2, 1, 1, 1]
    expected = sum(column_weight[t % 8] for t in range(14))
    pos = FAMILY.positions(1, 8)
    assert expected == 18
    assert pos.size == expected
    assert set(pos) < set(FAMILY.positions(2, 8))
    assert np.all(np.diff(pos) > 0)


@pytest.mark.parametrize("k", [8, 40, 2040])
def test_positions_nested(k):
    for j in range(1, FAMILY.n_rates):
        assert set(FAMILY.positions(j, k)) < set(FAMILY.positions(j + 1, k))


def test_incremental_positions_telescope_and_disjoint():
    k = 2040
    parts = [FAMILY.positions(1, k)] + [FAMILY.incremental_positions(j, k) for j in range(2, 6)]
    union = np.sort(np.concatenate(parts))
    np.testing.assert_array_equal(union, FAMILY.positions(5, k))
    assert union.size == len(set(union.tolist()))


def test_incremental_popcounts_per_period():
    k = 8 * 10 - 6  # k + M = 80 steps, exactly ten periods
    sizes = [FAMILY.incremental_positions(j, k).size for j in range(2, 6)]
    assert [s // 10 for s in sizes] == [2, 2, 2, 8]
    assert all(s % 10 == 0 for s in sizes)


def test_rate_index_out_of_range():
    with pytest.raises(IndexError):
        FAMILY.positions(0, 8)
    with pytest.raises(IndexError):
        FAMILY.positions(6, 8)
    with pytest.raises(IndexError):
        FAMILY.incremental_positions(6, 8)


def test_mask_text_round_trip(tmp_path):
    text = FAMILY.to_text()
    assert text.startswith("rate 4/5\n")
    again = parse_masks(text)
    for a, b in zip(again.masks, FAMILY.masks):
        np.testing.assert_array_equal(a, b)


@pytest.mark.parametrize(
    "text",
    [
        "rate a\n110\n000\n000\nrate b\n011\n111\n111\n",  # not nested
        "rate a\n10\n00\n00\nrate b\n11\n11\n11\n",  # rate above one
        "rate a\n1x1\n111\n111\n",
        "111\n111\n111\n",
        "rate a\n110\n111\n111\n",  # last mask punctured
    ],
)
def test_bad_mask_files(text):
    with pytest.raises(ValueError):
        parse_masks(text)


def test_single_mother_mask_is_valid():
    assert parse_masks("# comment\nrate 1/3\n111\n111\n111\n").n_rates == 1


# Viterbi --------------------------------------------------------------------------


@pytest.mark.parametrize("rate_index", range(1, 6))
def test_noiseless_round_trip_every_rate(rate_index):
    rng = np.random.default_rng(rate_index)
    k = 2040
    u = rng.integers(0, 2, k, dtype=np.uint8)
    c = conv_encode(u)
    llr = np.zeros(c.size)
    pos = FAMILY.positions(rate_index, k)
    llr[pos] = 1.0 - 2.0 * c[pos]
    np.testing.assert_array_equal(viterbi_decode(llr), u)


def test_all_zero_llrs_decode_to_zeros():
    assert not viterbi_decode(np.zeros(3 * (2040 + 6))).any()
    assert not viterbi_decode(np.zeros(3 * (5 + 6)), 5).any()


def test_viterbi_rejects_bad_length():
    with pytest.raises(ValueError):
        viterbi_decode(np.zeros(10))
    with pytest.raises(ValueError):
        viterbi_decode(np.zeros(42), k=9)


def test_viterbi_matches_brute_force_at_zero_db():
    rng = np.random.default_rng(11)
    k = 8
    infos, cws = all_codewords(k)
    es_n0 = 1.0
    mismatches = 0
    for _ in range(1000):
        idx = rng.integers(len(infos))
        c = cws[idx]
        y = np.sqrt(es_n0) * (1 - 2.0 * c) + rng.normal(0, np.sqrt(0.5), c.size)
        llr = 4 * np.sqrt(es_n0) * y
        mismatches += not np.array_equal(viterbi_decode(llr, k), brute_force_ml(llr, k))
    assert mismatches == 0


@settings(max_examples=150, deadline=None)
@given(
    st.integers(1, 12),
    st.integers(1, 5),
    st.integers(0, 2**32 - 1),
    st.sampled_from(["gauss", "small_ints", "sparse"]),
)
def test_viterbi_equals_exhaustive_ml(k, rate_index, seed, kind):
    rng = np.random.default_rng(seed)
    n = 3 * (k + 6)
    llr = np.zeros(n)
    pos = FAMILY.positions(rate_index, k)
    if kind == "gauss":
        llr[pos] = rng.normal(0, 2, pos.size)
    elif kind == "small_ints":
        llr[pos] = rng.integers(-2, 3, pos.size)
    else:
        llr[pos] = rng.integers(-1, 2, pos.size) * (rng.random(pos.size) < 0.3)
    np.testing.assert_array_equal(viterbi_decode(llr, k), brute_force_ml(llr, k))


# Reed-Solomon ----------------------------------------------------------------------


def test_field_and_generator():
    exp, log = gf_tables()
    assert len(set(exp[:255].tolist())) == 255
    g = RS_255_239.generator
    assert len(g) == 17 and g[0] == 1
    # generator vanishes at alpha^0 .. alpha^15
    for j in range(16):
        x = int(exp[j])
        acc = 0
        for coef in g:
            acc = (0 if acc == 0 else int(exp[(log[acc] + log[x]) % 255])) ^ coef
        assert acc == 0


def test_codewords_have_zero_syndromes_and_are_systematic():
    rng = np.random.default_rng(0)
    for _ in range(20):
        m = rng.integers(0, 256, 239, dtype=np.uint8)
        c = rs_encode(m)
        assert c.shape == (255,)
        np.testing.assert_array_equal(c[:239], m)
        assert not RS_255_239.syndromes(c).any()


def test_encode_accepts_bytes():
    payload = bytes(range(239))
    np.testing.assert_array_equal(rs_encode(payload)[:239], np.arange(239))


def test_encode_validates_length():
    with pytest.raises(ValueError):
        rs_encode(np.zeros(10, np.uint8))


def test_clean_word_decodes_to_payload():
    m = np.random.default_rng(1).integers(0, 256, 239, dtype=np.uint8)
    np.testing.assert_array_equal(rs_decode(rs_encode(m)), m)


def test_single_error_every_position():
    m = np.random.default_rng(2).integers(0, 256, 239, dtype=np.uint8)
    c = rs_encode(m)
    for pos in range(255):
        for value in (1, 0x80, 0xFF):
            w = c.copy()
            w[pos] ^= value
            np.testing.assert_array_equal(rs_decode(w), m)


@pytest.mark.parametrize("weight", range(1, 9))
def test_random_errors_up_to_t(weight):
    rng = np.random.default_rng(100 + weight)
    for _ in range(200):
        m = rng.integers(0, 256, 239, dtype=np.uint8)
        w = rs_encode(m)
        pos = rng.choice(255, weight, replace=False)
        w[pos] ^= rng.integers(1, 256, weight).astype(np.uint8)
        np.testing.assert_array_equal(rs_decode(w), m)


def test_heavy_corruption_mostly_fails():
    rng = np.random.default_rng(7)
    failures = wrong = 0
    trials = 2000
    for _ in range(trials):
        m = rng.integers(0, 256, 239, dtype=np.uint8)
        w = rs_encode(m)
        pos = rng.choice(255, 20, replace=False)
        w[pos] ^= rng.integers(1, 256, 20).astype(np.uint8)
        out = rs_decode(w)
        if out is DECODE_FAILURE:
            failures += 1
        elif not np.array_equal(out, m):
            wrong += 1
    assert failures > 0.99 * trials
    print(f"20-error miscorrection rate: {wrong / trials:.4g}")


def test_decode_failure_is_falsy_value():
    assert not DECODE_FAILURE
    assert repr(DECODE_FAILURE) == "DECODE_FAILURE"
