"""Soft-output detectors for the two-user MIMO interference channel.

Three detection families, all enumerating hypotheses exhaustively (worst
case 4^2 * 64^2 = 65536 joint hypotheses at the supported dimensions):

* `whiten` + `iw_llr`: treat interference as colored Gaussian noise,
  whiten it, and run point-to-point ML detection on the desired signal;
* `ia_llr`: marginalize the desired-bit LLRs over every interference
  constellation hypothesis (no priors);
* `prior_aware_llr` / `joint_llr`: same joint enumeration weighted by
  a-priori LLRs of both signals, producing extrinsic LLRs for iterative
  receivers.

All functions are pure and batched: `y` is (uses, n_rx) for one channel
realization, per-bit LLR outputs are (uses, bits_per_vector) with the flat
bit index m * N + n for stream m, bit n.  `mode` selects the exact
log-sum-exp marginalization or its max-log approximation; outputs are
clamped to +-LLR_CLAMP.
"""

import numpy as np
from scipy.special import logsumexp

from .channel import ChannelRealization
from .modem import Constellation, hypothesis_table
from .numerics import clamp_llr, hermitian_inv_sqrt

# Cap on the number of metric-tensor entries evaluated per chunk; keeps the
# worst-case (uses x 65536 hypotheses) working set around tens of MB.
_CHUNK_ENTRIES = 1 << 22


def whiten(y: np.ndarray, ch: ChannelRealization):
    """Whiten interference-plus-noise; returns (y_tilde, h_tilde).

    The effective noise v = sqrt(P_I) H_I x_I + n has covariance
    R_v = P_I H_I H_I^H + I; both outputs are premultiplied by R_v^{-1/2},
    after which the effective noise is treated as unit-covariance.
    """
    r_v = ch.p_i * ch.h_i @ ch.h_i.conj().T + np.eye(ch.n_rx)
    w = hermitian_inv_sqrt(r_v)
    y = np.atleast_2d(y)
    return y @ w.T, w @ ch.h_d


def _axis_llrs(metrics: np.ndarray, bits: np.ndarray, mode: str) -> np.ndarray:
    """Per-bit LLRs from per-hypothesis metrics.

    `metrics` is (uses, H), `bits` is the (H, nbits) bipolar label table;
    output column j is the (max-log or exact) contrast between the
    hypothesis subsets with bit j = +1 and -1.
    """
    reduce_ = np.max if mode == "maxlog" else logsumexp
    out = np.empty((metrics.shape[0], bits.shape[1]))
    for j in range(bits.shape[1]):
        plus = bits[:, j] > 0
        out[:, j] = reduce_(metrics[:, plus], axis=1) - reduce_(metrics[:, ~plus], axis=1)
    return out


def _single_signal_llrs(y, h, power, const, streams, mode):
    """ML bit LLRs for one signal against unit-variance noise."""
    vectors, bits = hypothesis_table(const, streams)
    s = np.sqrt(power) * vectors @ h.T  # (H, n_rx)
    metrics = -(
        np.sum(np.abs(y) ** 2, axis=1)[:, None]
        - 2.0 * (y @ s.conj().T).real
        + np.sum(np.abs(s) ** 2, axis=1)[None, :]
    )
    return _axis_llrs(metrics, bits, mode)


def iw_llr(y: np.ndarray, ch: ChannelRealization, const_d: Constellation, mode: str = "maxlog"):
    """Interference-whitening detection: whiten, then point-to-point ML.

    Returns extrinsic (= a-posteriori, there is no prior) LLRs for the
    desired bits.
    """
    y_t, h_t = whiten(y, ch)
    return clamp_llr(_single_signal_llrs(y_t, h_t, ch.p_d, const_d, ch.n_streams, mode))


def _joint_metrics(y, ch, const_d, const_i):
    """Joint-hypothesis metric tensor -(1/sigma_n^2)||y - s_d - s_i||^2.

    Returns (metrics (uses, H_D, H_I), bits_d, bits_i).  sigma_n^2 = 1 by
    normalization; SNR/SIR are carried by P_D and P_I.
    """
    vec_d, bits_d = hypothesis_table(const_d, ch.n_streams)
    vec_i, bits_i = hypothesis_table(const_i, ch.n_streams)
    s_d = np.sqrt(ch.p_d) * vec_d @ ch.h_d.T
    s_i = np.sqrt(ch.p_i) * vec_i @ ch.h_i.T
    e_y = np.sum(np.abs(y) ** 2, axis=1)
    e_d = np.sum(np.abs(s_d) ** 2, axis=1)
    e_i = np.sum(np.abs(s_i) ** 2, axis=1)
    cross_yd = (y @ s_d.conj().T).real
    cross_yi = (y @ s_i.conj().T).real
    cross_di = (s_d @ s_i.conj().T).real
    metrics = -(
        e_y[:, None, None]
        - 2.0 * cross_yd[:, :, None]
        - 2.0 * cross_yi[:, None, :]
        + e_d[None, :, None]
        + e_i[None, None, :]
        + 2.0 * cross_di[None, :, :]
    )
    return metrics, bits_d, bits_i


def _prior_weight(prior, bits, uses):
    """0.5 * b^T L prior weight per hypothesis; zeros when prior is None."""
    if prior is None:
        return np.zeros((uses, bits.shape[0]))
    prior = np.atleast_2d(prior)
    if prior.shape != (uses, bits.shape[1]):
        raise ValueError(f"prior shape {prior.shape} != expected {(uses, bits.shape[1])}")
    return 0.5 * prior @ bits.T


def _joint_detect(y, ch, const_d, const_i, prior_d, prior_i, mode, want_d, want_i):
    y = np.atleast_2d(y)
    uses = y.shape[0]
    h_d = const_d.order**ch.n_streams
    h_i = const_i.order**ch.n_streams
    chunk = max(1, _CHUNK_ENTRIES // (h_d * h_i))
    out_d = np.empty((uses, const_d.bits_per_symbol * ch.n_streams)) if want_d else None
    out_i = np.empty((uses, const_i.bits_per_symbol * ch.n_streams)) if want_i else None
    reduce_ = np.max if mode == "maxlog" else logsumexp
    for lo in range(0, uses, chunk):
        hi = lo + chunk
        metrics, bits_d, bits_i = _joint_metrics(y[lo:hi], ch, const_d, const_i)
        metrics = metrics + _prior_weight(
            None if prior_d is None else prior_d[lo:hi], bits_d, metrics.shape[0]
        )[:, :, None]
        metrics = metrics + _prior_weight(
            None if prior_i is None else prior_i[lo:hi], bits_i, metrics.shape[0]
        )[:, None, :]
        if want_d:
            app = _axis_llrs(reduce_(metrics, axis=2), bits_d, mode)
            if prior_d is not None:
                app = app - prior_d[lo:hi]
            out_d[lo:hi] = clamp_llr(app)
        if want_i:
            app = _axis_llrs(reduce_(metrics, axis=1), bits_i, mode)
            if prior_i is not None:
                app = app - prior_i[lo:hi]
            out_i[lo:hi] = clamp_llr(app)
    return out_d, out_i


def ia_llr(
    y: np.ndarray,
    ch: ChannelRealization,
    const_d: Constellation,
    const_i: Constellation,
    mode: str = "maxlog",
):
    """Interference-aware detection without priors.

    Desired-bit LLRs marginalized (exact) or maximized (max-log) over all
    interference constellation hypotheses.
    """
    out_d, _ = _joint_detect(y, ch, const_d, const_i, None, None, mode, True, False)
    return out_d


def prior_aware_llr(
    y: np.ndarray,
    ch: ChannelRealization,
    const_d: Constellation,
    const_i: Constellation,
    prior_d: np.ndarray | None,
    prior_i: np.ndarray | None,
    target: str,
    mode: str = "maxlog",
):
    """Extrinsic LLRs of one signal given a-priori LLRs of both.

    Every hypothesis is weighted by the prior term 0.5 * b^T L for both
    signals; the target bit's own prior is excluded from its output (the
    extrinsic property), implemented as a-posteriori minus prior.  Absent
    priors mean all-zero LLRs.
    """
    if target not in ("D", "I"):
        raise ValueError(f"target must be 'D' or 'I', got {target!r}")
    want_d = target == "D"
    out_d, out_i = _joint_detect(
        y, ch, const_d, const_i, prior_d, prior_i, mode, want_d, not want_d
    )
    return out_d if want_d else out_i


def joint_llr(
    y: np.ndarray,
    ch: ChannelRealization,
    const_d: Constellation,
    const_i: Constellation,
    prior_d: np.ndarray | None,
    prior_i: np.ndarray | None,
    mode: str = "maxlog",
):
    """Extrinsic LLRs of both signals from one shared hypothesis sweep.

    Bit-for-bit equal to two `prior_aware_llr` calls but each joint
    hypothesis is visited exactly once.
    """
    return _joint_detect(y, ch, const_d, const_i, prior_d, prior_i, mode, True, True)
