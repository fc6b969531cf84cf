"""Systematic Reed-Solomon codec over GF(2^8).

Codewords are ``payload || parity`` with the first byte as the highest-degree
coefficient. The generator polynomial has roots ``alpha^0 .. alpha^(2t-1)``.
Decoding uses Berlekamp-Massey, a Chien search and Forney's formula; a
decoder failure is returned as :data:`DECODE_FAILURE` rather than raised.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property, lru_cache

import numba
import numpy as np

PRIMITIVE_POLY = 0x11D


class _DecodeFailure:
    __slots__ = ()

    def __repr__(self):
        return "DECODE_FAILURE"

    def __bool__(self):
        return False


DECODE_FAILURE = _DecodeFailure()


@lru_cache(maxsize=None)
def gf_tables(prim: int = PRIMITIVE_POLY):
    """Return ``(exp, log)``; ``exp`` has 510 entries so sums of logs need no modulo."""
    exp = np.zeros(510, dtype=np.int64)
    log = np.zeros(256, dtype=np.int64)
    x = 1
    for i in range(255):
        exp[i] = x
        log[x] = i
        x <<= 1
        if x & 0x100:
            x ^= prim
    if len(set(exp[:255].tolist())) != 255:
        raise ValueError(f"{prim:#x} is not primitive over GF(2^8)")
    exp[255:] = exp[:255]
    exp.setflags(write=False)
    log.setflags(write=False)
    return exp, log


@lru_cache(maxsize=None)
def _mul_rows(prim: int) -> tuple[tuple[int, ...], ...]:
    exp, log = gf_tables(prim)
    rows = [tuple([0] * 256)]
    for a in range(1, 256):
        rows.append((0,) + tuple(int(exp[log[a] + log[b]]) for b in range(1, 256)))
    return tuple(rows)


def gf_mul(a: int, b: int, prim: int = PRIMITIVE_POLY) -> int:
    return _mul_rows(prim)[a][b]


def gf_inv(a: int, prim: int = PRIMITIVE_POLY) -> int:
    if a == 0:
        raise ZeroDivisionError("0 has no inverse in GF(2^8)")
    exp, log = gf_tables(prim)
    return int(exp[255 - log[a]])


def _poly_mul(p, q, prim):
    out = [0] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        if a:
            for j, b in enumerate(q):
                if b:
                    out[i + j] ^= gf_mul(a, b, prim)
    return out


@dataclass(frozen=True)
class RsCode:
    n_symbols: int = 255
    k_symbols: int = 239
    prim: int = PRIMITIVE_POLY

    def __post_init__(self):
        if not 0 < self.k_symbols < self.n_symbols <= 255:
            raise ValueError("need 0 < k < n <= 255")
        if (self.n_symbols - self.k_symbols) % 2:
            raise ValueError("n - k must be even")

    @property
    def n_parity(self) -> int:
        return self.n_symbols - self.k_symbols

    @property
    def t(self) -> int:
        return self.n_parity // 2

    @cached_property
    def generator(self) -> list[int]:
        """Generator coefficients, highest degree first (monic)."""
        exp, _ = gf_tables(self.prim)
        g = [1]
        for j in range(self.n_parity):
            g = _poly_mul(g, [1, int(exp[j])], self.prim)
        return g

    @cached_property
    def _syndrome_logs(self) -> np.ndarray:
        # (n_parity, n) table of j * (n - 1 - i) mod 255
        j = np.arange(self.n_parity)[:, None]
        deg = (self.n_symbols - 1 - np.arange(self.n_symbols))[None, :]
        return (j * deg) % 255

    def encode(self, payload) -> np.ndarray:
        msg = np.asarray(bytearray(payload) if isinstance(payload, (bytes, bytearray)) else payload, dtype=np.int64)
        if msg.shape != (self.k_symbols,):
            raise ValueError(f"payload must be {self.k_symbols} symbols")
        if msg.min(initial=0) < 0 or msg.max(initial=0) > 255:
            raise ValueError("payload symbols must be bytes")
        return np.concatenate([msg, _lfsr_remainder(msg, self._parity_table)]).astype(np.uint8)

    @cached_property
    def _parity_table(self) -> np.ndarray:
        # row c holds c * g_i for the non-leading generator coefficients
        mul = np.array(_mul_rows(self.prim), dtype=np.int64)
        return mul[:, self.generator[1:]]

    def syndromes(self, word) -> np.ndarray:
        c = np.asarray(word, dtype=np.int64)
        exp, log = gf_tables(self.prim)
        nz = c != 0
        if not nz.any():
            return np.zeros(self.n_parity, dtype=np.int64)
        terms = exp[(log[c[nz]][None, :] + self._syndrome_logs[:, nz]) % 255]
        return np.bitwise_xor.reduce(terms, axis=1)

    def decode(self, word):
        """Correct up to ``t`` symbol errors.

        Returns the ``k``-symbol payload as ``uint8`` or :data:`DECODE_FAILURE`.
        """
        c = np.array(word, dtype=np.int64)
        if c.shape != (self.n_symbols,):
            raise ValueError(f"word must be {self.n_symbols} symbols")
        exp, log = gf_tables(self.prim)
        if not _decode_in_place(c, self.n_parity, exp, log):
            return DECODE_FAILURE
        return c[: self.k_symbols].astype(np.uint8)


@numba.njit(cache=True)
def _gmul(a, b, exp, log):
    if a == 0 or b == 0:
        return 0
    return exp[log[a] + log[b]]


@numba.njit(cache=True)
def _syndromes(c, n_par, exp, log):
    n = c.shape[0]
    synd = np.zeros(n_par, dtype=np.int64)
    for i in range(n):
        if c[i] != 0:
            lc = log[c[i]]
            deg = n - 1 - i
            for j in range(n_par):
                synd[j] ^= exp[(lc + j * deg) % 255]
    return synd


@numba.njit(cache=True)
def _decode_in_place(c, n_par, exp, log):
    """Berlekamp-Massey, Chien search and Forney; False on decoder failure."""
    n = c.shape[0]
    t = n_par // 2
    synd = _syndromes(c, n_par, exp, log)
    if not synd.any():
        return True

    lam = np.zeros(n_par + 1, dtype=np.int64)
    prev = np.zeros(n_par + 1, dtype=np.int64)
    tmp = np.zeros(n_par + 1, dtype=np.int64)
    lam[0] = 1
    prev[0] = 1
    L = 0
    shift = 1
    b = 1
    for r in range(n_par):
        d = synd[r]
        for i in range(1, L + 1):
            d ^= _gmul(lam[i], synd[r - i], exp, log)
        if d == 0:
            shift += 1
            continue
        coef = _gmul(d, exp[255 - log[b]], exp, log)
        tmp[:] = lam
        for i in range(n_par + 1 - shift):
            lam[i + shift] ^= _gmul(coef, prev[i], exp, log)
        if 2 * L <= r:
            prev[:] = tmp
            L = r + 1 - L
            b = d
            shift = 1
        else:
            shift += 1
    deg = 0
    for i in range(n_par + 1):
        if lam[i] != 0:
            deg = i
    if L > t or deg != L:
        return False

    # Chien search over every codeword position
    positions = np.empty(L, dtype=np.int64)
    found = 0
    for i in range(n):
        xinv_log = (255 - (n - 1 - i) % 255) % 255
        acc = 0
        for p in range(L + 1):
            if lam[p] != 0:
                acc ^= exp[(log[lam[p]] + p * xinv_log) % 255]
        if acc == 0:
            if found == L:
                return False
            positions[found] = i
            found += 1
    if found != L:
        return False

    # Forney: e = X * Omega(X^-1) / Lambda'(X^-1) for first consecutive root alpha^0
    omega = np.zeros(n_par, dtype=np.int64)
    for i in range(n_par):
        for j in range(min(i, L) + 1):
            omega[i] ^= _gmul(synd[i - j], lam[j], exp, log)
    for e in range(L):
        pos = positions[e]
        x_log = (n - 1 - pos) % 255
        xinv_log = (255 - x_log) % 255
        om = 0
        for p in range(n_par):
            if omega[p] != 0:
                om ^= exp[(log[omega[p]] + p * xinv_log) % 255]
        der = 0
        for p in range(1, L + 1, 2):
            if lam[p] != 0:
                der ^= exp[(log[lam[p]] + (p - 1) * xinv_log) % 255]
        if der == 0:
            return False
        mag = _gmul(_gmul(exp[x_log], om, exp, log), exp[255 - log[der]], exp, log)
        c[pos] ^= mag
    return not _syndromes(c, n_par, exp, log).any()


@numba.njit(cache=True)
def _lfsr_remainder(msg, table):
    n_par = table.shape[1]
    rem = np.zeros(n_par, dtype=np.int64)
    for sym in msg:
        coef = sym ^ rem[0]
        for i in range(n_par - 1):
            rem[i] = rem[i + 1] ^ table[coef, i]
        rem[n_par - 1] = table[coef, n_par - 1]
    return rem


RS_255_239 = RsCode()


def rs_encode(payload, code: RsCode = RS_255_239) -> np.ndarray:
    return code.encode(payload)


def rs_decode(word, code: RsCode = RS_255_239):
    return code.decode(word)
