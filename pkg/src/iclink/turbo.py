"""Rate-compatible turbo codec with a max-log-MAP (max-log BCJR) decoder.

Code structure
--------------
Two identical recursive systematic convolutional (RSC) constituents with
feedback polynomial 7 (octal, 1 + D + D^2) and feedforward polynomial 5
(1 + D^2), memory 2.  Constituent 1 encodes the K info bits and is driven
to the zero state with 2 tail bits; constituent 2 encodes the internally
interleaved info bits followed by the same 2 tail bits and is left
unterminated.  The mother code is rate 1/3 over the K + 2 trellis steps.

Rate matching
-------------
The transmitted block is always round(K / rate) bits: all K + 2 systematic
bits followed by parity bits picked evenly from each parity stream in
alternation.  Systematic bits are never punctured.  If the target length
exceeds the mother-code length (rate 0.33 with its fractional target), the
leading parity bits are transmitted twice and the decoder soft-combines
the copies.

LLR convention: L = ln P(b=+1)/P(b=-1) with b = 2c - 1, as in `modem`.
The decoder returns coded-bit (not just info-bit) a-posteriori and
extrinsic values because iterative receivers feed back beliefs about the
bits that were actually modulated.
"""

from dataclasses import dataclass

import numpy as np
from numba import njit

from .llr import DECODER_SIDE, LlrBlock
from .modem import Interleaver
from .numerics import clamp_llr

MEMORY = 2
_NEG = -1.0e30

# Trellis tables for the (7,5) RSC: state s = (a_{k-1} << 1) | a_{k-2},
# register input a = u ^ a_{k-1} ^ a_{k-2}, parity = a ^ a_{k-2}.
_NEXT = np.array([[0, 2], [2, 0], [3, 1], [1, 3]], dtype=np.int64)
_PARITY = np.array([[0, 1], [0, 1], [1, 0], [1, 0]], dtype=np.int64)


@njit(cache=True)
def _rsc_parity(bits, state):
    """Parity sequence of one RSC constituent; returns (parity, end state)."""
    out = np.empty(bits.size, dtype=np.int64)
    for k in range(bits.size):
        s1 = state >> 1
        s2 = state & 1
        a = bits[k] ^ s1 ^ s2
        out[k] = a ^ s2
        state = (a << 1) | s1
    return out, state


@njit(cache=True)
def _rsc_tail(state):
    """Tail inputs and parities that drive the register to zero."""
    tail_u = np.empty(MEMORY, dtype=np.int64)
    tail_p = np.empty(MEMORY, dtype=np.int64)
    for k in range(MEMORY):
        s1 = state >> 1
        s2 = state & 1
        tail_u[k] = s1 ^ s2
        tail_p[k] = s2  # a = 0, so parity = a ^ s2 = s2
        state = s1  # (0 << 1) | s1
    return tail_u, tail_p


@njit(cache=True)
def _bcjr_maxlog(sys_llr, par_llr, prior_llr, next_state, parity_out, terminated):
    """Max-log BCJR over one constituent trellis.

    Returns a-posteriori LLRs for the input bits and for the parity bits.
    `terminated` anchors the backward recursion at state 0; otherwise the
    end state is unknown and all states start equiprobable.
    """
    L = sys_llr.size
    alpha = np.full((L + 1, 4), _NEG)
    alpha[0, 0] = 0.0
    for k in range(L):
        lu = 0.5 * (sys_llr[k] + prior_llr[k])
        lp = 0.5 * par_llr[k]
        best = _NEG
        for s in range(4):
            a = alpha[k, s]
            if a <= _NEG:
                continue
            for u in range(2):
                g = (lu if u == 1 else -lu) + (lp if parity_out[s, u] == 1 else -lp)
                ns = next_state[s, u]
                cand = a + g
                if cand > alpha[k + 1, ns]:
                    alpha[k + 1, ns] = cand
        for s in range(4):
            if alpha[k + 1, s] > best:
                best = alpha[k + 1, s]
        for s in range(4):
            alpha[k + 1, s] -= best

    beta = np.zeros(4)
    if terminated:
        for s in range(1, 4):
            beta[s] = _NEG

    info_app = np.empty(L)
    par_app = np.empty(L)
    beta_prev = np.empty(4)
    for k in range(L - 1, -1, -1):
        lu = 0.5 * (sys_llr[k] + prior_llr[k])
        lp = 0.5 * par_llr[k]
        m_u1 = _NEG
        m_u0 = _NEG
        m_p1 = _NEG
        m_p0 = _NEG
        for s in range(4):
            beta_prev[s] = _NEG
        for s in range(4):
            a = alpha[k, s]
            for u in range(2):
                p = parity_out[s, u]
                g = (lu if u == 1 else -lu) + (lp if p == 1 else -lp)
                t = g + beta[next_state[s, u]]
                if a + t > (m_u1 if u == 1 else m_u0):
                    if u == 1:
                        m_u1 = a + t
                    else:
                        m_u0 = a + t
                if a + t > (m_p1 if p == 1 else m_p0):
                    if p == 1:
                        m_p1 = a + t
                    else:
                        m_p0 = a + t
                if t > beta_prev[s]:
                    beta_prev[s] = t
        info_app[k] = m_u1 - m_u0
        par_app[k] = m_p1 - m_p0
        best = _NEG
        for s in range(4):
            if beta_prev[s] > best:
                best = beta_prev[s]
        for s in range(4):
            beta[s] = beta_prev[s] - best
    return info_app, par_app


def _rate_match_indices(trellis_len: int, budget: int) -> np.ndarray:
    """Indices into the interleaved parity buffer [p1_0, p2_0, p1_1, ...].

    Splits the budget between the two parity streams and spaces each
    stream's picks evenly (staggered against each other).  A budget above
    the buffer size wraps around, repeating the leading bits.
    """
    picks = []
    for stream, share in enumerate(((budget + 1) // 2, budget // 2)):
        if share <= trellis_len:
            pos = (np.arange(share) + 0.5 * stream) * trellis_len // max(share, 1)
            pos = pos.astype(np.int64)
        else:
            pos = np.concatenate([np.arange(trellis_len), np.arange(share - trellis_len)])
        picks.append(2 * pos + stream)
    out = np.concatenate(picks)
    out.sort(kind="stable")
    return out


@dataclass(frozen=True)
class TurboCode:
    """Immutable code configuration plus precomputed rate-matching tables."""

    info_bits: int
    rate: float
    interleaver: Interleaver

    def __post_init__(self):
        if self.interleaver.length != self.info_bits:
            raise ValueError("internal interleaver length must equal info_bits")
        if not 0.0 < self.rate <= self.info_bits / (self.info_bits + MEMORY):
            raise ValueError(f"rate {self.rate} not achievable with {self.info_bits} info bits")
        L = self.info_bits + MEMORY
        T = round(self.info_bits / self.rate)
        kept = _rate_match_indices(L, T - L)
        perm_ext = np.concatenate([self.interleaver.perm, np.arange(self.info_bits, L)])
        sys_mask = np.zeros(T, dtype=bool)
        sys_mask[:L] = True
        for arr in (kept, perm_ext, sys_mask):
            arr.setflags(write=False)
        object.__setattr__(self, "trellis_len", L)
        object.__setattr__(self, "block_len", T)
        object.__setattr__(self, "_kept_parity", kept)
        object.__setattr__(self, "_perm_ext", perm_ext)
        object.__setattr__(self, "systematic_mask", sys_mask)

    @classmethod
    def make(cls, info_bits: int, rate: float, rng: np.random.Generator) -> "TurboCode":
        return cls(info_bits, rate, Interleaver.random(info_bits, rng))


def encode(info: np.ndarray, code: TurboCode) -> np.ndarray:
    """Encode K info bits (0/1) into round(K/rate) transmitted bits."""
    info = np.asarray(info, dtype=np.int64)
    if info.size != code.info_bits:
        raise ValueError(f"expected {code.info_bits} info bits, got {info.size}")
    p1, state = _rsc_parity(info, 0)
    tail_u, tail_p1 = _rsc_tail(state)
    sys_all = np.concatenate([info, tail_u])
    p1_all = np.concatenate([p1, tail_p1])
    p2_all, _ = _rsc_parity(sys_all[code._perm_ext], 0)
    parity = np.empty(2 * code.trellis_len, dtype=np.int64)
    parity[0::2] = p1_all
    parity[1::2] = p2_all
    return np.concatenate([sys_all, parity[code._kept_parity]])


def decode(channel: LlrBlock, code: TurboCode, iterations: int):
    """Iterative max-log turbo decoding.

    Returns (a-posteriori LlrBlock, extrinsic LlrBlock, decoded info bits).
    Both blocks cover every transmitted coded-bit position in transmit
    order; the extrinsic is a-posteriori minus the input a-priori,
    elementwise, clamped at the module boundary.
    """
    ch = channel.expect("apriori", DECODER_SIDE)
    if ch.size != code.block_len:
        raise ValueError(f"expected {code.block_len} channel LLRs, got {ch.size}")
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    L = code.trellis_len
    K = code.info_bits
    pe = code._perm_ext

    sys_ch = ch[:L]
    par_ch = np.zeros(2 * L)
    np.add.at(par_ch, code._kept_parity, ch[L:])
    p1_ch = par_ch[0::2]
    p2_ch = par_ch[1::2]

    le2 = np.zeros(L)
    for _ in range(iterations):
        app1, par1_app = _bcjr_maxlog(sys_ch, p1_ch, le2, _NEXT, _PARITY, True)
        le1 = app1 - sys_ch - le2
        app2, par2_app = _bcjr_maxlog(sys_ch[pe], p2_ch, le1[pe], _NEXT, _PARITY, False)
        le2 = np.zeros(L)
        le2[pe] = app2 - sys_ch[pe] - le1[pe]

    app_sys = sys_ch + le1 + le2
    info_hat = (app_sys[:K] > 0).astype(np.int64)

    par_app = np.empty(2 * L)
    par_app[0::2] = par1_app
    par_app[1::2] = par2_app
    app_coded = np.concatenate([app_sys, par_app[code._kept_parity]])

    ext_values = clamp_llr(app_coded - ch)
    app_values = ch + ext_values
    ext = LlrBlock(ext_values, "extrinsic", DECODER_SIDE, channel.signal)
    app = LlrBlock(app_values, "aposteriori", DECODER_SIDE, channel.signal)
    return app, ext, info_hat
