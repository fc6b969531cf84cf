import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from harqrelay.harq import CodeChain, DecodeOutcome, SoftBuffer, absorb, attempt_decode
from harqrelay.phy import SoftObservation

CHAIN = CodeChain()


def payload(seed):
    return np.random.default_rng(seed).integers(0, 256, 239, dtype=np.uint8)


def noiseless_llrs(codeword, positions):
    return 1.0 - 2.0 * codeword[positions].astype(float)


def test_chain_dimensions():
    assert CHAIN.k == 2040
    assert CHAIN.n_mother == 6138
    assert CHAIN.n_rates == 5
    # 2046 encoder steps: 255 full periods of 10 bits plus columns 0..5 (weights 1,1,1,2,2,1)
    assert CHAIN.positions(1).size == 255 * 10 + 8


def test_empty_observation_leaves_buffer_untouched():
    buf = SoftBuffer.empty(CHAIN.n_mother)
    absorb(buf, SoftObservation.empty())
    assert not buf.received_mask.any()
    assert not buf.llr_acc.any()


def test_absorb_rejects_out_of_range():
    buf = SoftBuffer.empty(10)
    with pytest.raises(ValueError):
        buf.absorb(SoftObservation(np.array([3, 10]), np.ones(2)))


def test_received_set_tracks_rate_positions():
    buf = SoftBuffer.empty(CHAIN.n_mother)
    for j in range(1, 6):
        pos = CHAIN.round_positions(j)
        buf.absorb(SoftObservation(pos, np.ones(pos.size)))
        np.testing.assert_array_equal(np.flatnonzero(buf.received_mask), CHAIN.positions(j))
    assert buf.received_mask.all()


def test_repeat_observation_doubles():
    buf = SoftBuffer.empty(20)
    obs = SoftObservation(np.array([1, 4, 7]), np.array([0.5, -1.0, 2.0]))
    buf.absorb(obs).absorb(obs)
    np.testing.assert_allclose(buf.llr_acc[[1, 4, 7]], [1.0, -2.0, 4.0])


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_absorb_order_invariant(seed):
    rng = np.random.default_rng(seed)
    obs = []
    for _ in range(4):
        pos = np.unique(rng.integers(0, 50, rng.integers(1, 20)))
        obs.append(SoftObservation(pos, rng.normal(size=pos.size)))
    a, b = SoftBuffer.empty(50), SoftBuffer.empty(50)
    for o in obs:
        a.absorb(o)
    for i in rng.permutation(4):
        b.absorb(obs[i])
    np.testing.assert_allclose(a.llr_acc, b.llr_acc, atol=1e-12)
    np.testing.assert_array_equal(a.received_mask, b.received_mask)


def test_noiseless_first_round_decodes():
    m = payload(1)
    c = CHAIN.encode(m)
    assert c.size == CHAIN.n_mother
    buf = SoftBuffer.empty(CHAIN.n_mother)
    pos = CHAIN.round_positions(1)
    buf.absorb(SoftObservation(pos, noiseless_llrs(c, pos)))
    out = attempt_decode(buf, CHAIN, m)
    assert out.success and not out.undetected_error
    np.testing.assert_array_equal(out.payload, m)


def test_missing_first_round_still_decodes_from_later_rounds():
    m = payload(2)
    c = CHAIN.encode(m)
    buf = SoftBuffer.empty(CHAIN.n_mother)
    for j in range(2, 6):
        pos = CHAIN.round_positions(j)
        buf.absorb(SoftObservation(pos, noiseless_llrs(c, pos)))
    out = attempt_decode(buf, CHAIN, m)
    assert out.success
    np.testing.assert_array_equal(out.payload, m)


def test_all_zero_buffer_is_an_undetected_error():
    # zero soft values decode to the all-zero codeword, which RS accepts
    buf = SoftBuffer.empty(CHAIN.n_mother)
    out = attempt_decode(buf, CHAIN, payload(3))
    assert out.success and out.undetected_error
    assert not out.payload.any()


def test_heavily_corrupted_buffer_fails():
    m = payload(4)
    c = CHAIN.encode(m)
    rng = np.random.default_rng(4)
    llr = (1.0 - 2.0 * c) + rng.normal(0, 3.0, c.size)
    buf = SoftBuffer(llr, np.ones(c.size, bool))
    assert attempt_decode(buf, CHAIN, m) == DecodeOutcome(False)


def test_undetected_requires_success():
    with pytest.raises(ValueError):
        DecodeOutcome(False, None, True)


def test_success_probability_grows_with_rounds():
    # per-bit Es/N0 of -1 dB: round 1 alone rarely decodes, the full mother code nearly always does
    rng = np.random.default_rng(5)
    es_n0 = 10 ** (-1 / 10)
    successes = np.zeros(5, int)
    for _ in range(120):
        m = rng.integers(0, 256, 239, dtype=np.uint8)
        c = CHAIN.encode(m)
        y = np.sqrt(es_n0) * (1.0 - 2.0 * c) + rng.normal(0, np.sqrt(0.5), c.size)
        llr = 4 * np.sqrt(es_n0) * y
        buf = SoftBuffer.empty(c.size)
        for j in range(1, 6):
            pos = CHAIN.round_positions(j)
            buf.absorb_llrs(pos, llr[pos])
            successes[j - 1] += attempt_decode(buf, CHAIN, m).success
    assert np.all(np.diff(successes) >= 0)
    assert successes[0] < 10
    assert successes[-1] > 110
