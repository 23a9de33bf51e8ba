"""End-to-end per-packet receiver schedules: IW, IA-Det, IIAD, IASD, IAPD.

Frame geometry
--------------
A packet carries `codewords` desired codewords, one per spatial stream,
each spanning the whole frame of S symbol vectors; the frame is split into
contiguous per-subcarrier blocks, each with its own quasi-static channel
pair.  The interference transmitter runs the same BICM chain with its own
modulation/rate and fills the same S vectors with back-to-back codewords
per stream; a codeword that does not fit entirely is truncated at the
frame edge and its missing positions are erasures (LLR 0) at its decoder.

Per codeword the transmit chain is: turbo encode -> channel interleave
(systematic and parity bits each permuted among themselves) -> pad to a
whole symbol -> Gray QAM mapping onto the codeword's stream.  Feedback
paths run the exact inverse with decoder extrinsics, never a-posteriori.
"""

from dataclasses import dataclass

import numpy as np

from . import detect, turbo
from .channel import ChannelRealization, Scenario, powers_from_db, sample_channel, transmit
from .llr import DECODER_SIDE, LlrBlock
from .modem import Constellation, Interleaver, map_bits
from .numerics import substream

# Substream domain tags (first spawn-key entry).
_DOM_CHANNEL = 0
_DOM_NOISE = 1
_DOM_INFO = 2
_DOM_TURBO_ILV = 3
_DOM_CHAN_ILV = 4
DOM_EXIT = 5  # reserved for the EXIT-chart module

_USER_D = 0
_USER_I = 1


@dataclass(frozen=True)
class CodewordSlot:
    """One codeword's place in the frame: stream and vector span."""

    stream: int
    start: int
    stop: int
    code: turbo.TurboCode
    chan_ilv: Interleaver


@dataclass(frozen=True)
class UserChain:
    """Static transmit-chain description of one user."""

    signal: str  # "D" or "I"
    const: Constellation
    slots: tuple[CodewordSlot, ...]
    vectors_per_codeword: int

    def is_complete(self, slot: CodewordSlot) -> bool:
        return slot.stop - slot.start == self.vectors_per_codeword


def _build_chain(signal, user_idx, spec, scenario, frame_vectors) -> UserChain:
    const = Constellation.qam(spec.modulation)
    n = const.bits_per_symbol
    probe = turbo.TurboCode.make(
        scenario.info_bits, spec.rate, substream(scenario.seed, _DOM_TURBO_ILV, user_idx, 0, 0)
    )
    vectors_per_cw = -(-probe.block_len // n)  # ceil
    slots = []
    for m in range(scenario.n_streams):
        start = 0
        j = 0
        while start < frame_vectors:
            code = turbo.TurboCode.make(
                scenario.info_bits,
                spec.rate,
                substream(scenario.seed, _DOM_TURBO_ILV, user_idx, m, j),
            )
            ilv = Interleaver.two_class(
                code.systematic_mask, substream(scenario.seed, _DOM_CHAN_ILV, user_idx, m, j)
            )
            stop = min(start + vectors_per_cw, frame_vectors)
            slots.append(CodewordSlot(m, start, stop, code, ilv))
            start = stop
            j += 1
    return UserChain(signal, const, tuple(slots), vectors_per_cw)


@dataclass(frozen=True)
class Link:
    """Everything fixed across packets for one scenario."""

    scenario: Scenario
    desired: UserChain
    interference: UserChain
    frame_vectors: int
    slices: tuple[slice, ...]

    @classmethod
    def build(cls, scenario: Scenario) -> "Link":
        d_const = Constellation.qam(scenario.desired.modulation)
        d_probe = turbo.TurboCode.make(
            scenario.info_bits,
            scenario.desired.rate,
            substream(scenario.seed, _DOM_TURBO_ILV, _USER_D, 0, 0),
        )
        frame_vectors = -(-d_probe.block_len // d_const.bits_per_symbol)
        if frame_vectors < scenario.subcarriers:
            raise ValueError("frame shorter than the subcarrier count")
        desired = _build_chain("D", _USER_D, scenario.desired, scenario, frame_vectors)
        interference = _build_chain("I", _USER_I, scenario.interference, scenario, frame_vectors)
        base, extra = divmod(frame_vectors, scenario.subcarriers)
        slices = []
        start = 0
        for s in range(scenario.subcarriers):
            stop = start + base + (1 if s < extra else 0)
            slices.append(slice(start, stop))
            start = stop
        return cls(scenario, desired, interference, frame_vectors, tuple(slices))


@dataclass(frozen=True)
class TxPacket:
    symbols: np.ndarray  # (frame_vectors, streams)
    info: tuple  # info bit array per slot, aligned with chain.slots


@dataclass(frozen=True)
class PacketResult:
    desired_ok: bool
    interference_ok: bool | None
    desired_codewords: tuple
    interference_codewords: tuple
    mean_abs_llr: float
    stages: int

    def __post_init__(self):
        assert self.desired_ok == all(self.desired_codewords)


def _transmit_user(link, chain, user_idx, packet_index) -> TxPacket:
    scn = link.scenario
    n = chain.const.bits_per_symbol
    frame = np.zeros((link.frame_vectors, scn.n_streams), dtype=np.complex128)
    infos = []
    for j, slot in enumerate(chain.slots):
        rng = substream(scn.seed, _DOM_INFO, user_idx, packet_index, slot.stream, j)
        info = rng.integers(0, 2, slot.code.info_bits)
        coded = turbo.encode(info, slot.code)
        ilv = slot.chan_ilv.interleave(coded)
        padded = np.zeros(chain.vectors_per_codeword * n, dtype=np.int64)
        padded[: ilv.size] = 2 * ilv - 1
        padded[ilv.size :] = -1  # pad bits transmitted as b = -1
        symbols = map_bits(padded, chain.const, 1)[:, 0]
        span = slot.stop - slot.start
        frame[slot.start : slot.stop, slot.stream] = symbols[:span]
        infos.append(info)
    return TxPacket(frame, tuple(infos))


def _decode_user(link, chain, det_frame, tx: TxPacket, iterations):
    """Turbo-decode every codeword of one user from a detector LLR frame.

    `det_frame` is (frame_vectors, streams * N) detector extrinsic LLRs.
    Returns (ok flags per slot, feedback prior frame of the same shape,
    mean |a-posteriori| over decoded bits).
    """
    n = chain.const.bits_per_symbol
    prior_frame = np.zeros_like(det_frame)
    flags = []
    app_mags = []
    for slot, info in zip(chain.slots, tx.info):
        span = slot.stop - slot.start
        seg = det_frame[slot.start : slot.stop, slot.stream * n : (slot.stream + 1) * n]
        padded = np.zeros(chain.vectors_per_codeword * n)
        padded[: span * n] = seg.reshape(-1)
        chan_llr = slot.chan_ilv.deinterleave(padded[: slot.code.block_len])
        block = LlrBlock(chan_llr, "apriori", DECODER_SIDE, chain.signal)
        app, ext, info_hat = turbo.decode(block, slot.code, iterations)
        flags.append(bool(np.array_equal(info_hat, info)))
        app_mags.append(float(np.mean(np.abs(app.values))))
        fed = slot.chan_ilv.interleave(ext.expect("extrinsic", DECODER_SIDE, chain.signal))
        fb = np.zeros(chain.vectors_per_codeword * n)
        fb[: fed.size] = fed
        prior_frame[slot.start : slot.stop, slot.stream * n : (slot.stream + 1) * n] = fb[
            : span * n
        ].reshape(span, n)
    return flags, prior_frame, float(np.mean(app_mags))


def realize_channels(link: Link, snr_db: float, packet_index: int):
    """Per-subcarrier quasi-static channel pairs for one packet.

    The fading draws depend only on (seed, packet, subcarrier), never on
    SNR or receiver kind, so every configuration sees common random
    realizations.
    """
    scn = link.scenario
    p_d, p_i = powers_from_db(snr_db, scn.sir_db)
    channels = []
    for s in range(scn.subcarriers):
        rng = substream(scn.seed, _DOM_CHANNEL, packet_index, s)
        h_d = sample_channel(rng, scn.n_rx, scn.n_streams)
        h_i = sample_channel(rng, scn.n_rx, scn.n_streams)
        channels.append(ChannelRealization(h_d, h_i, p_d, p_i))
    return channels


def _receive_frame(link, tx_d, tx_i, channels, packet_index):
    scn = link.scenario
    y = np.empty((link.frame_vectors, scn.n_rx), dtype=np.complex128)
    for s, sl in enumerate(link.slices):
        rng = substream(scn.seed, _DOM_NOISE, packet_index, s)
        y[sl] = transmit(
            tx_d.symbols[sl], tx_i.symbols[sl], channels[s], rng, scn.noise_variance
        )
    return y


def _detect_frame(link, y, channels, fn):
    """Run a per-subcarrier detector over the frame; fn(y_slice, ch) -> LLRs."""
    outs = [fn(y[sl], channels[s]) for s, sl in enumerate(link.slices)]
    return np.concatenate(outs, axis=0)


def _slice_prior(prior_frame, sl):
    return None if prior_frame is None else prior_frame[sl]


def run_packet(link: Link, snr_db: float, packet_index: int) -> PacketResult:
    """Simulate one packet end-to-end under the scenario's receiver."""
    scn = link.scenario
    tx_d = _transmit_user(link, link.desired, _USER_D, packet_index)
    tx_i = _transmit_user(link, link.interference, _USER_I, packet_index)
    channels = realize_channels(link, snr_db, packet_index)
    y = _receive_frame(link, tx_d, tx_i, channels, packet_index)

    kind = scn.receiver
    mode = scn.mode
    inner = scn.decoder_iterations()
    cd = link.desired.const
    ci = link.interference.const

    if kind == "IW":
        det = _detect_frame(link, y, channels, lambda ys, ch: detect.iw_llr(ys, ch, cd, mode))
        flags, _, mag = _decode_user(link, link.desired, det, tx_d, inner)
        return _result(link, flags, None, mag, stages=1)

    if kind == "IADET":
        det = _detect_frame(
            link, y, channels, lambda ys, ch: detect.ia_llr(ys, ch, cd, ci, mode)
        )
        flags, _, mag = _decode_user(link, link.desired, det, tx_d, inner)
        return _result(link, flags, None, mag, stages=1)

    if kind in ("IASD", "IIAD"):
        decode_interference = kind == "IASD"
        det1 = _detect_frame(
            link, y, channels, lambda ys, ch: detect.ia_llr(ys, ch, cd, ci, mode)
        )
        _, prior_d, _ = _decode_user(link, link.desired, det1, tx_d, inner)
        prior_i = None
        i_flags = []
        if decode_interference:
            det_i = np.concatenate(
                [
                    detect.prior_aware_llr(
                        y[sl], channels[s], cd, ci, prior_d[sl], None, "I", mode
                    )
                    for s, sl in enumerate(link.slices)
                ],
                axis=0,
            )
            i_flags, prior_i, _ = _decode_user(link, link.interference, det_i, tx_i, inner)
        det2 = np.concatenate(
            [
                detect.prior_aware_llr(
                    y[sl],
                    channels[s],
                    cd,
                    ci,
                    prior_d[sl],
                    _slice_prior(prior_i, sl),
                    "D",
                    mode,
                )
                for s, sl in enumerate(link.slices)
            ],
            axis=0,
        )
        flags, _, mag = _decode_user(link, link.desired, det2, tx_d, inner)
        stages = 3 if decode_interference else 2
        return _result(link, flags, i_flags if decode_interference else None, mag, stages)

    if kind == "IAPD":
        prior_d = prior_i = None
        flags = i_flags = []
        mag = 0.0
        for _ in range(scn.outer_iterations):
            det_d_parts = []
            det_i_parts = []
            for s, sl in enumerate(link.slices):
                out_d, out_i = detect.joint_llr(
                    y[sl],
                    channels[s],
                    cd,
                    ci,
                    _slice_prior(prior_d, sl),
                    _slice_prior(prior_i, sl),
                    mode,
                )
                det_d_parts.append(out_d)
                det_i_parts.append(out_i)
            det_d = np.concatenate(det_d_parts, axis=0)
            det_i = np.concatenate(det_i_parts, axis=0)
            flags, prior_d, mag = _decode_user(link, link.desired, det_d, tx_d, inner)
            i_flags, prior_i, _ = _decode_user(link, link.interference, det_i, tx_i, inner)
        return _result(link, flags, i_flags, mag, stages=scn.outer_iterations)

    raise AssertionError(f"unreachable receiver kind {kind!r}")


def _result(link, d_flags, i_flags, mag, stages) -> PacketResult:
    i_complete = None
    if i_flags is not None:
        i_complete = tuple(
            ok
            for ok, slot in zip(i_flags, link.interference.slots)
            if link.interference.is_complete(slot)
        )
    return PacketResult(
        desired_ok=all(d_flags),
        interference_ok=(all(i_complete) if i_complete else None),
        desired_codewords=tuple(d_flags),
        interference_codewords=i_complete if i_complete is not None else (),
        mean_abs_llr=mag,
        stages=stages,
    )
