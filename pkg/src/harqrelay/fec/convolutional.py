"""Feedforward convolutional encoder and soft-decision Viterbi decoder.

Register convention: the newest input bit is the most significant bit of the
``memory + 1``-bit shift register, so a generator written in octal (e.g.
``0o145``) taps the current input with its leading bit. The decoder state is
the ``memory`` most recent inputs with the newest bit as MSB.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numba
import numpy as np


@dataclass(frozen=True)
class ConvCode:
    """Rate ``1/len(generators)`` feedforward convolutional code."""

    memory: int = 6
    generators: tuple[int, ...] = (0o145, 0o171, 0o133)

    def __post_init__(self):
        if self.memory < 1:
            raise ValueError("memory must be >= 1")
        limit = 1 << (self.memory + 1)
        for g in self.generators:
            if not 0 < g < limit:
                raise ValueError(f"generator {g:o} does not fit constraint length {self.memory + 1}")

    @property
    def constraint_length(self) -> int:
        return self.memory + 1

    @property
    def n_outputs(self) -> int:
        return len(self.generators)

    @property
    def n_states(self) -> int:
        return 1 << self.memory

    def output_table(self) -> np.ndarray:
        """Output bits for every register value, shape ``(2**(M+1), n_outputs)``."""
        regs = np.arange(1 << (self.memory + 1))
        table = np.empty((regs.size, self.n_outputs), dtype=np.uint8)
        for j, g in enumerate(self.generators):
            table[:, j] = [bin(r & g).count("1") & 1 for r in regs]
        return table

    def codeword_length(self, k: int) -> int:
        return self.n_outputs * (k + self.memory)


MOTHER_CODE = ConvCode()


@lru_cache(maxsize=None)
def _int_output_table(code: ConvCode) -> np.ndarray:
    table = code.output_table().astype(np.int64)
    table.setflags(write=False)
    return table


def conv_encode(info_bits, code: ConvCode = MOTHER_CODE) -> np.ndarray:
    """Zero-tail encode ``info_bits``.

    Returns the mother codeword of length ``n_outputs * (k + memory)`` with the
    generator outputs of each step interleaved in generator order.
    """
    u = np.asarray(info_bits, dtype=np.uint8).ravel()
    if u.size and u.max() > 1:
        raise ValueError("info_bits must be binary")
    m = code.memory
    padded = np.concatenate([np.zeros(m, np.int64), u.astype(np.int64), np.zeros(m, np.int64)])
    # register at step t = (u_t, u_{t-1}, ..., u_{t-M}) with u_t as MSB
    n_steps = u.size + m
    regs = np.zeros(n_steps, dtype=np.int64)
    for lag in range(m + 1):
        regs |= padded[m - lag : m - lag + n_steps] << (m - lag)
    out = _int_output_table(code)[regs]
    return out.reshape(-1).astype(np.uint8)


@numba.njit(cache=True)
def _first_divergent_bit(decisions, t, sa, sb, mem):
    """Compare the survivors ending in states ``sa`` and ``sb`` after step ``t``.

    Walks both paths back until they merge; returns -1 if the path into ``sa``
    is lexicographically smaller, +1 otherwise.
    """
    top = mem - 1
    mask = (1 << mem) - 1
    while True:
        pa = ((sa << 1) & mask) | decisions[t, sa]
        pb = ((sb << 1) & mask) | decisions[t, sb]
        if pa == pb or t == 0:
            ba = sa >> top
            bb = sb >> top
            if ba == bb:
                # paths merged at the previous state and take the same input:
                # impossible for distinct states, kept for safety
                return -1 if sa < sb else 1
            return -1 if ba < bb else 1
        sa, sb, t = pa, pb, t - 1


@numba.njit(cache=True)
def _viterbi_core(llr, out_table, mem, n_info):
    n_steps = llr.shape[0]
    n_out = llr.shape[1]
    n_states = 1 << mem
    half = n_states >> 1
    top = mem - 1
    mask = n_states - 1
    neg_inf = -np.inf

    # butterfly j: predecessors 2j, 2j+1 feed successors j (input 0) and j+half (input 1);
    # pat[j, b, x] is the output pattern leaving predecessor 2j+x with input b
    n_pat = 1 << n_out
    pat = np.empty((half, 2, 2), dtype=np.int64)
    for j in range(half):
        for b in range(2):
            for x in range(2):
                r = (b << mem) | (2 * j + x)
                p = 0
                for q in range(n_out):
                    p = (p << 1) | out_table[r, q]
                pat[j, b, x] = p

    pat0 = pat[:, 0, 0].copy()
    pat1 = pat[:, 0, 1].copy()
    pat2 = pat[:, 1, 0].copy()
    pat3 = pat[:, 1, 1].copy()
    pm = np.full(n_states, neg_inf)
    pm[0] = 0.0
    new_pm = np.empty(n_states)
    bm = np.empty(n_pat)
    decisions = np.zeros((n_steps, n_states), dtype=np.uint8)

    for t in range(n_steps):
        for p in range(n_pat):
            acc = 0.0
            for q in range(n_out):
                if (p >> (n_out - 1 - q)) & 1:
                    acc -= llr[t, q]
                else:
                    acc += llr[t, q]
            bm[p] = acc
        dec = decisions[t]
        n_ties = 0
        for j in range(half):
            a0 = pm[2 * j]
            a1 = pm[2 * j + 1]
            m0 = a0 + bm[pat0[j]]
            m1 = a1 + bm[pat1[j]]
            w0 = m1 > m0
            new_pm[j] = m1 if w0 else m0
            dec[j] = w0
            m2 = a0 + bm[pat2[j]]
            m3 = a1 + bm[pat3[j]]
            w1 = m3 > m2
            new_pm[j + half] = m3 if w1 else m2
            dec[j + half] = w1
            n_ties += (m0 == m1) + (m2 == m3)
        if n_ties and t > 0:
            # exact ties go to the lexicographically smaller survivor
            for s in range(n_states):
                j = s & (half - 1)
                x = s >> top
                ma = pm[2 * j] + bm[pat0[j] if x == 0 else pat2[j]]
                mb = pm[2 * j + 1] + bm[pat1[j] if x == 0 else pat3[j]]
                if ma == mb and ma != neg_inf:
                    dec[s] = 1 if _first_divergent_bit(decisions, t - 1, 2 * j, 2 * j + 1, mem) > 0 else 0
        if t >= n_info:
            for j in range(half, n_states):
                new_pm[j] = neg_inf
        pm, new_pm = new_pm, pm

    bits = np.zeros(n_steps, dtype=np.uint8)
    s = 0
    for t in range(n_steps - 1, -1, -1):
        bits[t] = s >> top
        s = ((s << 1) & mask) | decisions[t, s]
    return bits[:n_info]


def viterbi_decode(llrs, k: int | None = None, code: ConvCode = MOTHER_CODE) -> np.ndarray:
    """Maximum-likelihood decode a zero-tailed mother codeword from LLRs.

    Parameters
    ----------
    llrs : array_like
        Soft values for every mother-codeword position, positive meaning bit 0.
        Punctured or never-received positions must be exactly 0.
    k : int, optional
        Number of information bits; inferred from the length when omitted.

    Returns
    -------
    numpy.ndarray
        The ``k`` information bits whose codeword maximises
        ``sum(llr * (1 - 2 * c))``. Among equal metrics the lexicographically
        smallest information sequence wins.
    """
    llr = np.asarray(llrs, dtype=np.float64).ravel()
    n_out = code.n_outputs
    if llr.size % n_out:
        raise ValueError("LLR length is not a multiple of the number of code outputs")
    n_steps = llr.size // n_out
    if k is None:
        k = n_steps - code.memory
    if n_steps != k + code.memory or k < 0:
        raise ValueError(f"expected {code.codeword_length(k)} LLRs, got {llr.size}")
    return _viterbi_core(
        llr.reshape(n_steps, n_out), _int_output_table(code), code.memory, k
    )
