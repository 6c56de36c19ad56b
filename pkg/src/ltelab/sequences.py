"""Deterministic LTE physical-layer sequences: PSS Zadoff-Chu, simplified SSS,
and the length-31 Gold pseudo-random sequence used by the CRS."""

from __future__ import annotations

from functools import lru_cache

import numpy as np

PSS_ROOTS = (25, 29, 34)
PSS_LENGTH = 62
SSS_LENGTH = 62
GOLD_NC = 1600


def pss_sequence(n_id_2: int) -> np.ndarray:
    """Length-62 frequency-domain PSS for sector identity ``n_id_2``.

    The centre element of the length-63 Zadoff-Chu sequence (the DC position)
    is punctured, which is why the second half uses ``(n+1)(n+2)``.
    """
    if n_id_2 not in (0, 1, 2):
        raise ValueError(f"n_id_2 must be 0, 1 or 2, got {n_id_2!r}")
    u = PSS_ROOTS[n_id_2]
    n = np.arange(PSS_LENGTH)
    phase = np.where(n < 31, n * (n + 1), (n + 1) * (n + 2))
    return np.exp(-1j * np.pi * u * phase / 63)


def gold_sequence(c_init: int, length: int) -> np.ndarray:
    """Length-31 Gold sequence c(n), n = 0..length-1, as a uint8 bit array.

    x1 starts as 1 followed by 30 zeros, x2 is loaded with the bits of
    ``c_init`` (LSB first), and the first 1600 outputs are discarded.
    """
    if length < 1:
        raise ValueError(f"length must be >= 1, got {length}")
    if not 0 <= c_init < 2**31:
        raise ValueError(f"c_init must fit in 31 bits, got {c_init}")
    total = length + GOLD_NC + 31
    x1 = np.zeros(total, dtype=np.uint8)
    x2 = np.zeros(total, dtype=np.uint8)
    x1[0] = 1
    x2[:31] = (c_init >> np.arange(31)) & 1
    # x(n+31) only reaches back to x(n+3), so 28 new taps can be filled per step
    for i in range(0, total - 31, 28):
        j = min(i + 28, total - 31)
        x1[i + 31:j + 31] = x1[i + 3:j + 3] ^ x1[i:j]
        x2[i + 31:j + 31] = x2[i + 3:j + 3] ^ x2[i + 2:j + 2] ^ x2[i + 1:j + 1] ^ x2[i:j]
    return x1[GOLD_NC:GOLD_NC + length] ^ x2[GOLD_NC:GOLD_NC + length]


def qpsk_from_bits(bits: np.ndarray) -> np.ndarray:
    """Map bit pairs to unit-energy QPSK symbols."""
    b = np.asarray(bits, dtype=np.int8).reshape(-1, 2)
    return ((1 - 2 * b[:, 0]) + 1j * (1 - 2 * b[:, 1])) / np.sqrt(2)


@lru_cache(maxsize=None)
def _msequence(taps: tuple[int, ...]) -> np.ndarray:
    # x(i+5) = sum over taps of x(i+t) mod 2, initial state 0,0,0,0,1
    x = np.zeros(31, dtype=np.int8)
    x[4] = 1
    for i in range(26):
        x[i + 5] = np.bitwise_xor.reduce(x[[i + t for t in taps]])
    return x


def _sss_indices(n_id_1: int) -> tuple[int, int]:
    q_prime = n_id_1 // 30
    q = (n_id_1 + q_prime * (q_prime + 1) // 2) // 30
    m_prime = n_id_1 + q * (q + 1) // 2
    m0 = m_prime % 31
    m1 = (m0 + m_prime // 31 + 1) % 31
    return m0, m1


def sss_sequence(n_id_1: int, n_id_2: int, subframe: int) -> np.ndarray:
    """Length-62 antipodal SSS (simplified construction).

    Two cyclic shifts of a length-31 m-sequence, selected by ``n_id_1``, are
    interleaved on even/odd positions and scrambled by an ``n_id_2``-shifted
    code. Subframe 5 swaps the two halves. The second-stage scrambling of the
    odd half used by real eNBs is omitted.
    """
    if not 0 <= n_id_1 <= 167:
        raise ValueError(f"n_id_1 must be in [0, 167], got {n_id_1!r}")
    if n_id_2 not in (0, 1, 2):
        raise ValueError(f"n_id_2 must be 0, 1 or 2, got {n_id_2!r}")
    if subframe not in (0, 5):
        raise ValueError(f"SSS is only sent in subframes 0 and 5, got {subframe!r}")
    s_tilde = 1 - 2 * _msequence((0, 2)).astype(np.int8)
    c_tilde = 1 - 2 * _msequence((0, 3)).astype(np.int8)
    m0, m1 = _sss_indices(n_id_1)
    n = np.arange(31)
    s0 = s_tilde[(n + m0) % 31]
    s1 = s_tilde[(n + m1) % 31]
    c0 = c_tilde[(n + n_id_2) % 31]
    c1 = c_tilde[(n + n_id_2 + 3) % 31]
    if subframe == 5:
        s0, s1 = s1, s0
    d = np.empty(SSS_LENGTH, dtype=np.int8)
    d[0::2] = s0 * c0
    d[1::2] = s1 * c1
    return d
