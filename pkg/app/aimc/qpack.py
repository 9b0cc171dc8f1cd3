"""Signed 8-bit quantization and 4-lane packing into 32-bit transfer words."""
import math
from typing import Sequence, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, PositiveFloat

from app.errors import QuantizationError

Q8_MIN = -128
Q8_MAX = 127
LANES = 4
WORD_MASK = 0xFFFFFFFF


class ScaleFactor(BaseModel):
    """Fixed per-layer multiplier applied before quantization."""

    model_config = ConfigDict(frozen=True)

    scale: PositiveFloat


ScaleLike = Union[ScaleFactor, float, int]


def _scale_of(s: ScaleLike) -> float:
    if isinstance(s, ScaleFactor):
        return s.scale
    if not s > 0:
        raise QuantizationError(f"scale must be positive, got {s}")
    return float(s)


def _round_half_away(v: float) -> int:
    a = abs(v)
    q = math.floor(a)
    q += (a - q) >= 0.5
    return int(math.copysign(q, v))


def clamp_q8(v: int) -> int:
    return Q8_MIN if v < Q8_MIN else Q8_MAX if v > Q8_MAX else v


def quantize(x: float, s: ScaleLike) -> int:
    """clamp(round_half_away_from_zero(x * scale), -128, 127)"""
    if not math.isfinite(x):
        raise QuantizationError(f"cannot quantize non-finite value {x}")
    return clamp_q8(_round_half_away(x * _scale_of(s)))


def dequantize(q: int, s: ScaleLike) -> float:
    return q / _scale_of(s)


def saturate_acc(a: int, shift: int) -> int:
    """Map a wide accumulator to Q8 by an arithmetic right shift with round-half-away."""
    if not 0 <= shift <= 31:
        raise QuantizationError(f"shift must be in [0, 31], got {shift}")
    if shift == 0:
        return clamp_q8(a)
    half = 1 << (shift - 1)
    mag = (abs(a) + half) >> shift
    return clamp_q8(mag if a >= 0 else -mag)


def quantize_array(x: np.ndarray, s: ScaleLike) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if not np.all(np.isfinite(x)):
        raise QuantizationError("cannot quantize non-finite values")
    v = x * _scale_of(s)
    a = np.abs(v)
    q = np.floor(a)
    r = np.sign(v) * (q + ((a - q) >= 0.5))
    return np.clip(r, Q8_MIN, Q8_MAX).astype(np.int8)


def dequantize_array(q: np.ndarray, s: ScaleLike) -> np.ndarray:
    return np.asarray(q, dtype=np.float32) / np.float32(_scale_of(s))


def saturate_acc_array(a: np.ndarray, shift: int) -> np.ndarray:
    if not 0 <= shift <= 31:
        raise QuantizationError(f"shift must be in [0, 31], got {shift}")
    a = np.asarray(a, dtype=np.int64)
    if shift:
        half = 1 << (shift - 1)
        mag = (np.abs(a) + half) >> shift
        a = np.where(a >= 0, mag, -mag)
    return np.clip(a, Q8_MIN, Q8_MAX).astype(np.int8)


def pack4(values: Sequence[int]) -> int:
    """Pack up to four Q8 lanes into a word, lane 0 in the least-significant byte."""
    if len(values) > LANES:
        raise QuantizationError(f"at most {LANES} lanes per word, got {len(values)}")
    word = 0
    for lane, v in enumerate(values):
        if not Q8_MIN <= v <= Q8_MAX:
            raise QuantizationError(f"lane {lane} value {v} is not a signed 8-bit integer")
        word |= (v & 0xFF) << (8 * lane)
    return word


def unpack4(word: int) -> list[int]:
    word &= WORD_MASK
    lanes = []
    for lane in range(LANES):
        b = (word >> (8 * lane)) & 0xFF
        lanes.append(b - 256 if b > Q8_MAX else b)
    return lanes


def pack_words(values: np.ndarray) -> list[int]:
    """Pack an int8 vector into words of four lanes; the last word is zero padded."""
    v = np.asarray(values, dtype=np.int8)
    pad = (-len(v)) % LANES
    if pad:
        v = np.concatenate([v, np.zeros(pad, dtype=np.int8)])
    return [int(w) for w in v.view(np.uint8).reshape(-1, LANES).astype(np.uint32) @ np.array(
        [1, 1 << 8, 1 << 16, 1 << 24], dtype=np.uint32)]


def unpack_words(words: Sequence[int], count: int) -> np.ndarray:
    raw = np.array([w & WORD_MASK for w in words], dtype="<u4")
    return raw.view(np.int8)[:count].copy()
