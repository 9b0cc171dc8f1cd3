import math
from typing import Literal, Optional

import numpy as np
from pydantic import BaseModel, NonNegativeFloat, model_validator

from app.aimc.qpack import Q8_MAX, Q8_MIN, saturate_acc_array
from app.errors import CrossbarIndexError, ShapeMismatchError


class NoiseModel(BaseModel):
    """Additive read noise on the raw accumulator, as a fraction of the largest possible magnitude."""

    kind: Literal["none", "gaussian"] = "none"
    sigma_rel: NonNegativeFloat = 0.0
    seed: int = 0

    @model_validator(mode="after")
    def _none_has_no_sigma(self) -> "NoiseModel":
        if self.kind == "none" and self.sigma_rel != 0:
            raise ValueError("sigma_rel must be 0 when kind is 'none'")
        return self


NO_NOISE = NoiseModel()


def default_out_shift(rows: int) -> int:
    return min(31, max(0, math.ceil(math.log2(rows)))) if rows > 1 else 0


class Crossbar:
    """
    Functional model of an M x N analog crossbar.

    Weights are signed 8-bit values; a matrix-vector multiply is exact integer
    arithmetic followed by the ADC mapping (shift + saturate) to signed 8 bits.
    """

    def __init__(self, rows: int, cols: int, out_shift: Optional[int] = None) -> None:
        if rows < 1 or cols < 1:
            raise ShapeMismatchError(f"crossbar dimensions must be positive, got {rows}x{cols}")
        self.rows = rows
        self.cols = cols
        self.out_shift = default_out_shift(rows) if out_shift is None else out_shift
        if not 0 <= self.out_shift <= 31:
            raise ValueError(f"out_shift must be in [0, 31], got {self.out_shift}")
        self.weights = np.zeros((rows, cols), dtype=np.int8)
        self._rng: Optional[np.random.Generator] = None
        self._rng_seed: Optional[int] = None
        self._wf: Optional[np.ndarray] = None

    def __repr__(self) -> str:
        return f"Crossbar({self.rows}x{self.cols}, shift={self.out_shift})"

    def program_weight(self, row: int, col: int, w: int) -> "Crossbar":
        if not (0 <= row < self.rows and 0 <= col < self.cols):
            raise CrossbarIndexError(f"({row}, {col}) outside {self.rows}x{self.cols} crossbar")
        if not Q8_MIN <= w <= Q8_MAX:
            raise ValueError(f"weight {w} is not a signed 8-bit integer")
        self.weights[row, col] = w
        self._wf = None
        return self

    def program_tile(self, row_off: int, col_off: int, mat: np.ndarray) -> "Crossbar":
        """Write a submatrix at (row_off, col_off); the rest of the array is unchanged."""
        mat = np.asarray(mat)
        if mat.ndim != 2:
            raise ShapeMismatchError(f"expected a 2-D matrix, got shape {mat.shape}")
        r, c = mat.shape
        if row_off < 0 or col_off < 0 or row_off + r > self.rows or col_off + c > self.cols:
            raise CrossbarIndexError(
                f"{r}x{c} block at ({row_off}, {col_off}) overflows {self.rows}x{self.cols} crossbar"
            )
        if mat.size and (mat.min() < Q8_MIN or mat.max() > Q8_MAX):
            raise ValueError("weights must be signed 8-bit integers")
        self.weights[row_off:row_off + r, col_off:col_off + c] = mat.astype(np.int8)
        self._wf = None
        return self

    def _float_weights(self) -> np.ndarray:
        # float64 products are exact: |acc| <= rows * 2^14 < 2^53
        if self._wf is None:
            self._wf = self.weights.astype(np.float64)
        return self._wf

    def _check_input(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x)
        if x.shape[-1] != self.rows:
            raise ShapeMismatchError(f"input length {x.shape[-1]} != crossbar rows {self.rows}")
        return x

    def mvm_raw(self, x: np.ndarray) -> np.ndarray:
        """out[j] = sum_i x[i] * weights[i][j], exact."""
        x = self._check_input(x)
        return (x.astype(np.float64) @ self._float_weights()).astype(np.int64).astype(np.int32)

    def _noise(self, shape: tuple, noise: NoiseModel) -> np.ndarray:
        if self._rng is None or self._rng_seed != noise.seed:
            self._rng = np.random.default_rng(noise.seed)
            self._rng_seed = noise.seed
        sigma = noise.sigma_rel * self.rows * 128 * 128
        return np.rint(self._rng.normal(0.0, sigma, size=shape)).astype(np.int64)

    def mvm(self, x: np.ndarray, noise: NoiseModel = NO_NOISE) -> np.ndarray:
        acc = self.mvm_raw(x).astype(np.int64)
        if noise.kind == "gaussian" and noise.sigma_rel > 0:
            acc = acc + self._noise(acc.shape, noise)
        return saturate_acc_array(acc, self.out_shift)
