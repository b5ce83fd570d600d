"""Message representation, 2^K-ary PAM mapping, and experiment configuration.

A block of K information bits is carried by a single amplitude from a
2^K-ary PAM constellation normalized to unit average power over uniform
messages: the constellation values are (2m - (2^K - 1)) * delta with
delta = sqrt(3 / (4^K - 1)).  Bit labels are attached to constellation
positions either in natural binary order or in Gray order; the value set
is identical for both.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .precision import PrecisionMode

MAX_K = 64  # message indices must fit an unsigned 64-bit integer


class SkVariant(enum.Enum):
    """Which algebraic form of the SK recursion the transmitter runs."""

    ESTIMATE_DIFFERENCE = "estimate-diff"
    ERROR_RECURSION = "error-recursion"


class BitMapping(enum.Enum):
    """Association between bit patterns and constellation positions."""

    NATURAL = "natural"
    GRAY = "gray"


@dataclass(frozen=True)
class PamSymbol:
    """One constellation point: its amplitude and its position index."""

    value: float
    index: int


@dataclass(frozen=True)
class SkConfig:
    """Full parameterization of one SK simulation.

    ``n_total`` counts every channel use, including the initial message
    transmission; the default 3*k gives the fixed rate-1/3 setup.
    ``gamma`` is the fraction of per-symbol power given to the first
    transmission (1.0 = uniform); the total energy over the block is held
    at n_total * P, so the remaining uses share the residual equally.
    ``feedback_snr_db = inf`` means noiseless feedback (the transmitter
    sees the receiver's values exactly).
    """

    variant: SkVariant = SkVariant.ESTIMATE_DIFFERENCE
    k: int = 1
    n_total: int | None = None
    forward_snr_db: float = 0.0
    feedback_snr_db: float = math.inf
    precision: PrecisionMode = field(default_factory=PrecisionMode)
    gamma: float = 1.0
    seed: int = 0
    bit_mapping: BitMapping = BitMapping.NATURAL

    def __post_init__(self):
        if not 1 <= self.k <= MAX_K:
            raise ValueError(f"k must be in [1, {MAX_K}], got {self.k}")
        if self.n_total is None:
            object.__setattr__(self, "n_total", 3 * self.k)
        if self.n_total < 1:
            raise ValueError(f"n_total must be >= 1, got {self.n_total}")
        if not self.gamma > 0:
            raise ValueError(f"gamma must be > 0, got {self.gamma}")
        if self.n_total > 1 and self.gamma >= self.n_total:
            raise ValueError(
                f"gamma={self.gamma} leaves no power for the remaining "
                f"{self.n_total - 1} uses (need gamma < n_total)"
            )
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit an unsigned 64-bit integer")

    @property
    def rate(self) -> float:
        return self.k / self.n_total


def pam_step(k: int) -> float:
    """Normalization step delta of the 2^k-ary unit-power constellation."""
    return math.sqrt(3.0 / (4.0**k - 1.0))


def index_to_value(index, k: int):
    """Amplitude of constellation position ``index`` (scalar or array)."""
    m = np.asarray(index, dtype=np.float64)
    return (2.0 * m - (2.0**k - 1.0)) * pam_step(k)


def value_to_index(value, k: int):
    """Nearest constellation position, ties toward the lower index.

    Accepts scalars or arrays; inputs must be finite (callers are
    responsible for routing non-finite estimates to the failure path).
    """
    t = (np.asarray(value, dtype=np.float64) / pam_step(k) + (2.0**k - 1.0)) / 2.0
    # ceil(t - 1/2) rounds to nearest with half-way cases going down
    m = np.ceil(t - 0.5)
    m = np.clip(m, 0.0, 2.0**k - 1.0)
    return m.astype(np.uint64)


def index_mask(k: int) -> np.uint64:
    """Mask selecting the low k bits of a uint64 (uniform index draw)."""
    return np.uint64((1 << k) - 1)


def gray_encode(index):
    """Bit label of a position under Gray labeling (m XOR m>>1)."""
    m = np.asarray(index, dtype=np.uint64)
    return m ^ (m >> np.uint64(1))


def gray_decode(label):
    """Position whose Gray label is ``label`` (prefix-XOR inverse)."""
    v = np.asarray(label, dtype=np.uint64).copy()
    for shift in (1, 2, 4, 8, 16, 32):
        v ^= v >> np.uint64(shift)
    return v


def label_of_index(index, k: int, mapping: BitMapping):
    """Bit pattern (as an integer) carried by constellation position ``index``."""
    if mapping is BitMapping.NATURAL:
        return np.asarray(index, dtype=np.uint64)
    return gray_encode(index)


def index_of_label(label, k: int, mapping: BitMapping):
    """Constellation position that carries bit pattern ``label``."""
    if mapping is BitMapping.NATURAL:
        return np.asarray(label, dtype=np.uint64)
    return gray_decode(label)


def bits_to_int(bits) -> int:
    """Pack an MSB-first bit sequence into an integer."""
    v = 0
    for b in bits:
        if b not in (0, 1):
            raise ValueError(f"bits must be 0 or 1, got {b!r}")
        v = (v << 1) | int(b)
    return v


def int_to_bits(value: int, k: int) -> np.ndarray:
    """Unpack an integer into its MSB-first k-bit representation."""
    return np.array([(int(value) >> (k - 1 - i)) & 1 for i in range(k)], dtype=np.uint8)


def encode_message(bits, mapping: BitMapping = BitMapping.NATURAL) -> PamSymbol:
    """Map K information bits to their PAM constellation point."""
    k = len(bits)
    if not 1 <= k <= MAX_K:
        raise ValueError(f"message length must be in [1, {MAX_K}], got {k}")
    label = bits_to_int(bits)
    index = int(index_of_label(label, k, mapping))
    return PamSymbol(value=float(index_to_value(index, k)), index=index)


def decode_symbol(theta_hat: float, k: int, mapping: BitMapping = BitMapping.NATURAL) -> np.ndarray:
    """Bits of the constellation point nearest to ``theta_hat``.

    Non-finite estimates decode to position 0 (the caller flags such
    trials as numerically failed).
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if not math.isfinite(theta_hat):
        index = 0
    else:
        index = int(value_to_index(theta_hat, k))
    label = int(label_of_index(index, k, mapping))
    return int_to_bits(label, k)


def bit_errors(sent, decoded) -> int:
    """Hamming distance between two equal-length bit sequences."""
    if len(sent) != len(decoded):
        raise ValueError(
            f"length mismatch: {len(sent)} vs {len(decoded)} bits"
        )
    return int(sum(int(a) ^ int(b) for a, b in zip(sent, decoded)))


def popcount_u64(a) -> np.ndarray:
    """Per-element population count of a uint64 array."""
    return np.bitwise_count(np.asarray(a, dtype=np.uint64))
