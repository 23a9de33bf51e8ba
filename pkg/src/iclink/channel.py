"""Two-user MIMO Gaussian interference channel model.

Received signal per use: y = sqrt(P_D) H_D x_D + sqrt(P_I) H_I x_I + n with
unit-covariance complex Gaussian noise, so SNR = P_D and SIR = P_D / P_I.
Fading is quasi-static: one independent Rayleigh (H_D, H_I) pair per
(packet, subcarrier) block.
"""

from dataclasses import dataclass, field

import numpy as np

from .numerics import gaussian_complex

RECEIVERS = ("IW", "IADET", "IIAD", "IASD", "IAPD")


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def powers_from_db(snr_db: float, sir_db: float) -> tuple[float, float]:
    """(P_D, P_I) from SNR and SIR in dB; SIR = +inf gives P_I = 0."""
    p_d = db_to_linear(snr_db)
    p_i = 0.0 if np.isinf(sir_db) else p_d * db_to_linear(-sir_db)
    return p_d, p_i


@dataclass(frozen=True)
class ChannelRealization:
    h_d: np.ndarray
    h_i: np.ndarray
    p_d: float
    p_i: float

    def __post_init__(self):
        if self.p_d <= 0 or self.p_i < 0:
            raise ValueError(f"need P_D > 0 and P_I >= 0, got {self.p_d}, {self.p_i}")
        if self.h_d.shape != self.h_i.shape:
            raise ValueError("desired and interference channel shapes differ")

    @property
    def n_rx(self) -> int:
        return self.h_d.shape[0]

    @property
    def n_streams(self) -> int:
        return self.h_d.shape[1]


@dataclass(frozen=True)
class UserSpec:
    """Modulation order and code rate of one transmitter."""

    modulation: int = 4
    rate: float = 0.5


@dataclass(frozen=True)
class Scenario:
    """Complete experiment description for one simulation run."""

    desired: UserSpec = field(default_factory=UserSpec)
    interference: UserSpec = field(default_factory=UserSpec)
    snr_db: tuple = (0.0,)
    sir_db: float = 0.0
    receiver: str = "IASD"
    inner_iterations: int = 0  # 0 = receiver default (8 one-shot, 4 iterative)
    outer_iterations: int = 2
    packets: int = 2000
    subcarriers: int = 10
    info_bits: int = 400
    codewords: int = 2
    n_streams: int = 2
    n_rx: int = 2
    seed: int = 1
    mode: str = "maxlog"
    noise_variance: float = 1.0  # test hook; 0 disables noise

    def __post_init__(self):
        if self.receiver not in RECEIVERS:
            raise ValueError(f"unknown receiver {self.receiver!r}, expected one of {RECEIVERS}")
        if self.mode not in ("exact", "maxlog"):
            raise ValueError(f"mode must be 'exact' or 'maxlog', got {self.mode!r}")
        if len(self.snr_db) == 0:
            raise ValueError("snr_db grid must be non-empty")
        if self.packets < 1 or self.subcarriers < 1:
            raise ValueError("packets and subcarriers must be >= 1")
        if self.codewords != self.n_streams:
            raise ValueError("per-stream codeword mapping requires codewords == n_streams")
        if self.receiver == "IAPD" and self.outer_iterations < 1:
            raise ValueError("IAPD needs outer_iterations >= 1")
        if self.receiver == "IASD" and self.outer_iterations != 2:
            raise ValueError("IASD uses the fixed D-I-D schedule (outer_iterations = 2)")

    def decoder_iterations(self) -> int:
        """Inner turbo iterations: 8 for one-shot receivers, 4 for iterative."""
        if self.inner_iterations > 0:
            return self.inner_iterations
        return 8 if self.receiver in ("IW", "IADET") else 4


def sample_channel(rng: np.random.Generator, n_rx: int, n_streams: int) -> np.ndarray:
    """Rayleigh-fading channel matrix: i.i.d. unit-variance CN(0,1) entries."""
    if n_rx < 1 or n_streams < 1:
        raise ValueError("channel dimensions must be >= 1")
    return gaussian_complex(rng, n_rx * n_streams, 1.0).reshape(n_rx, n_streams)


def transmit(
    x_d: np.ndarray,
    x_i: np.ndarray,
    ch: ChannelRealization,
    rng: np.random.Generator,
    noise_variance: float = 1.0,
) -> np.ndarray:
    """Pass symbol vectors through the channel; rows are channel uses.

    `x_d` and `x_i` are (uses, n_streams); returns (uses, n_rx).
    `noise_variance` = 0 is a test hook that disables the noise term.
    """
    x_d = np.atleast_2d(x_d)
    x_i = np.atleast_2d(x_i)
    if x_d.shape[1] != ch.n_streams or x_i.shape[1] != ch.n_streams:
        raise ValueError("symbol vector length does not match channel streams")
    if x_d.shape[0] != x_i.shape[0]:
        raise ValueError("desired and interference must cover the same channel uses")
    y = np.sqrt(ch.p_d) * x_d @ ch.h_d.T
    if ch.p_i > 0:
        y = y + np.sqrt(ch.p_i) * x_i @ ch.h_i.T
    if noise_variance > 0:
        n = gaussian_complex(rng, y.size, noise_variance).reshape(y.shape)
        y = y + n
    return y
