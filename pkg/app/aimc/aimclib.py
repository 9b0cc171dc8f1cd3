"""
Guest-side helpers for driving a tile the way application code does: map a
weight matrix once, then queue / process / dequeue vectors word by word.
"""
from typing import Iterator

import numpy as np

from app.aimc.qpack import LANES, pack_words, unpack_words
from app.aimc.tile import AimcTile, TileStatus
from app.errors import MachineFault


def _check(status: TileStatus, what: str) -> None:
    if status != TileStatus.OK:
        raise MachineFault(f"{what} failed with status {status.name}")


def initialize_words(mat: np.ndarray, row_off: int = 0, col_off: int = 0) -> Iterator[tuple[int, int, int, int]]:
    """Yield (row, col, word, count) CM_INITIALIZE operands that program ``mat`` at the offset."""
    mat = np.asarray(mat, dtype=np.int8)
    for r, row in enumerate(mat):
        words = pack_words(row)
        for k, word in enumerate(words):
            count = min(LANES, len(row) - k * LANES)
            yield row_off + r, col_off + k * LANES, word, count


def map_matrix(tile: AimcTile, row_off: int, col_off: int, mat: np.ndarray, word_by_word: bool = False) -> None:
    """
    Program ``mat`` into the tile crossbar at (row_off, col_off).

    Args:
        tile: Target tile.
        row_off: First crossbar row.
        col_off: First crossbar column.
        mat: R x C int8 weights.
        word_by_word: Issue one CM_INITIALIZE per packed word instead of a bulk write.
            Both paths leave identical crossbar contents.
    """
    if not word_by_word:
        tile.xbar.program_tile(row_off, col_off, mat)
        return
    for row, col, word, count in initialize_words(mat, row_off, col_off):
        _check(tile.cm_initialize(row, col, word, count), f"initialize ({row}, {col})")


def queue_vector(tile: AimcTile, x: np.ndarray, index: int = 0) -> int:
    """Queue an int8 vector starting at input slot ``index``; returns the number of words sent."""
    x = np.asarray(x, dtype=np.int8)
    words = pack_words(x)
    for k, word in enumerate(words):
        count = min(LANES, len(x) - k * LANES)
        _check(tile.cm_queue(word, count, index + k * LANES), f"queue at {index + k * LANES}")
    return len(words)


def aimc_process(tile: AimcTile) -> None:
    _check(tile.cm_process(), "process")


def dequeue_vector(tile: AimcTile, count: int, index: int = 0) -> np.ndarray:
    """Read ``count`` outputs starting at output slot ``index`` as an int8 vector."""
    words = []
    for k in range(0, count, LANES):
        res = tile.cm_dequeue(min(LANES, count - k), index + k)
        _check(res.status, f"dequeue at {index + k}")
        words.append(res.word)
    return unpack_words(words, count)
