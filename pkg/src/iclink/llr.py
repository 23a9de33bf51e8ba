"""Tagged LLR vectors exchanged between detector and decoder.

The tags mirror the three-way superscript carried by every soft value in
the receiver: its role (a-priori input, extrinsic output, or a-posteriori),
which block produced or consumes it (side 1 = detector, side 2 = decoder),
and which signal it describes (D = desired, I = interference).  Hand-off
mistakes between blocks are caught by `expect` assertions instead of
silently corrupting the iteration.
"""

from dataclasses import dataclass

import numpy as np

ROLES = ("apriori", "extrinsic", "aposteriori")
DETECTOR_SIDE = 1
DECODER_SIDE = 2
SIGNALS = ("D", "I")


@dataclass(frozen=True)
class LlrBlock:
    values: np.ndarray
    role: str
    side: int
    signal: str

    def __post_init__(self):
        assert self.role in ROLES, f"unknown LLR role {self.role!r}"
        assert self.side in (DETECTOR_SIDE, DECODER_SIDE), f"unknown side {self.side}"
        assert self.signal in SIGNALS, f"unknown signal {self.signal!r}"
        values = np.asarray(self.values, dtype=np.float64)
        assert np.all(np.isfinite(values)), "LLR block contains non-finite values"
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return self.values.size

    def expect(self, role: str, side: int, signal: str | None = None) -> np.ndarray:
        """Assert the tags and return the raw values."""
        assert self.role == role, f"expected role {role!r}, got {self.role!r}"
        assert self.side == side, f"expected side {side}, got {self.side}"
        if signal is not None:
            assert self.signal == signal, f"expected signal {signal!r}, got {self.signal!r}"
        return self.values
