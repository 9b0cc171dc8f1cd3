import numpy as np
import pytest
from pydantic import ValidationError

from app.aimc import Crossbar, NoiseModel, default_out_shift
from app.errors import CrossbarIndexError, ShapeMismatchError


def test_program_weight_changes_one_entry():
    xb = Crossbar(4, 3, out_shift=0)
    xb.program_weight(2, 1, -7)
    expected = np.zeros((4, 3), dtype=np.int8)
    expected[2, 1] = -7
    assert np.array_equal(xb.weights, expected)


@pytest.mark.parametrize("row, col", [(4, 0), (0, 3), (-1, 0)])
def test_program_weight_out_of_range(row, col):
    with pytest.raises(CrossbarIndexError):
        Crossbar(4, 3).program_weight(row, col, 1)


def test_program_weight_rejects_wide_value():
    with pytest.raises(ValueError):
        Crossbar(2, 2).program_weight(0, 0, 200)


def test_program_tile_overflow():
    with pytest.raises(CrossbarIndexError):
        Crossbar(4, 4).program_tile(2, 2, np.ones((3, 1), dtype=np.int8))


def test_mvm_matches_integer_oracle(rng):
    for _ in range(200):
        m, n = rng.integers(1, 65, size=2)
        w = rng.integers(-128, 128, size=(m, n), dtype=np.int8)
        x = rng.integers(-128, 128, size=m, dtype=np.int8)
        xb = Crossbar(int(m), int(n), out_shift=0).program_tile(0, 0, w)
        expected = np.clip(x.astype(np.int64) @ w.astype(np.int64), -128, 127)
        assert np.array_equal(xb.mvm(x), expected)


def test_mvm_raw_is_exact():
    w = np.full((64, 2), 127, dtype=np.int8)
    xb = Crossbar(64, 2).program_tile(0, 0, w)
    assert xb.mvm_raw(np.full(64, -128, dtype=np.int8)).tolist() == [-128 * 127 * 64] * 2


def test_mvm_applies_shift():
    xb = Crossbar(2, 1, out_shift=2).program_tile(0, 0, np.array([[3], [3]], dtype=np.int8))
    # (3 * 5 + 3 * 5) / 4 = 7.5 rounds away from zero
    assert xb.mvm(np.array([5, 5], dtype=np.int8)).tolist() == [8]


def test_mvm_shape_mismatch():
    with pytest.raises(ShapeMismatchError):
        Crossbar(4, 4).mvm(np.zeros(3, dtype=np.int8))


def test_gaussian_noise_is_seeded(rng):
    w = rng.integers(-128, 128, size=(32, 8), dtype=np.int8)
    x = rng.integers(-128, 128, size=32, dtype=np.int8)
    noise = NoiseModel(kind="gaussian", sigma_rel=0.01, seed=7)
    a = Crossbar(32, 8, out_shift=8).program_tile(0, 0, w).mvm(x, noise)
    b = Crossbar(32, 8, out_shift=8).program_tile(0, 0, w).mvm(x, noise)
    assert np.array_equal(a, b)


def test_no_noise_kind_rejects_sigma():
    with pytest.raises(ValidationError):
        NoiseModel(kind="none", sigma_rel=0.1)


@pytest.mark.parametrize("rows, shift", [(1, 0), (2, 1), (1024, 10), (1025, 11)])
def test_default_out_shift(rows, shift):
    assert default_out_shift(rows) == shift
