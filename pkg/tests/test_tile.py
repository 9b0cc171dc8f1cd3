import numpy as np
import pytest

from app.aimc import AimcTile, TileStatus, TileTiming, pack4, unpack4
from app.errors import ShapeMismatchError


def test_queue_process_dequeue(small_tile):
    assert small_tile.cm_queue(pack4([1, -2, 3, -4]), 4, 0) == TileStatus.OK
    assert small_tile.cm_queue(pack4([5, 6]), 2, 4) == TileStatus.OK
    assert small_tile.cm_process() == TileStatus.OK
    res = small_tile.cm_dequeue(4, 0)
    assert res.status == TileStatus.OK and res.count == 4
    assert unpack4(res.word) == [1, -2, 3, -4]
    assert unpack4(small_tile.cm_dequeue(2, 4).word)[:2] == [5, 6]
    assert small_tile.mvm_count == 1


@pytest.mark.parametrize("count", [0, 5])
def test_bad_count_is_a_status(small_tile, count):
    assert small_tile.cm_queue(0, count, 0) == TileStatus.BAD_COUNT
    assert small_tile.cm_dequeue(count, 0).status == TileStatus.BAD_COUNT
    assert small_tile.faults == 2


def test_out_of_range_is_a_status(small_tile):
    assert small_tile.cm_queue(0, 4, 6) == TileStatus.OUT_OF_RANGE
    assert small_tile.cm_dequeue(1, 8).status == TileStatus.OUT_OF_RANGE
    assert small_tile.cm_initialize(8, 0, 0, 1) == TileStatus.OUT_OF_RANGE
    assert small_tile.cm_initialize(0, 6, 0, 4) == TileStatus.OUT_OF_RANGE
    # nothing was written
    assert not small_tile.input_mem.any()


def test_initialize_writes_lanes(small_tile):
    assert small_tile.cm_initialize(3, 2, pack4([9, -9, 7]), 3) == TileStatus.OK
    assert small_tile.xbar.weights[3, 2:5].tolist() == [9, -9, 7]


def test_process_overwrites_output(small_tile):
    small_tile.cm_queue(pack4([1, 1, 1, 1]), 4, 0)
    small_tile.cm_process()
    small_tile.cm_queue(pack4([0, 0, 0, 0]), 4, 0)
    small_tile.cm_process()
    assert not small_tile.output_mem.any()


def test_timing_defaults():
    t = TileTiming()
    assert t.process_time() == 100_000
    assert t.queue_time(1024) == 256_000
    assert t.transfer_latency(4) == 1_000


def test_loose_coupling_adds_bus_penalty():
    t = TileTiming()
    assert t.bus_penalty(1) == 14_000
    assert t.transfer_latency(4, "loose") == 1_000 + 14_000
    assert t.transfer_latency(5, "loose") == 1_250 + 2 * 14_000
    assert t.process_time("loose") == 100_000 + 14_000


def test_transfer_latency_rejects_negative():
    with pytest.raises(ValueError):
        TileTiming().transfer_latency(-1)


def test_busy_counters(small_tile):
    small_tile.cm_queue(pack4([1, 2, 3, 4]), 4, 0)
    small_tile.cm_process()
    small_tile.cm_dequeue(2, 0)
    assert (small_tile.queue_ps, small_tile.process_ps, small_tile.dequeue_ps) == (1_000, 100_000, 500)
    small_tile.reset_counters()
    assert small_tile.queue_ps == small_tile.mvm_count == 0


def test_dump_restore_round_trip(rng):
    tile = AimcTile(6, 5, out_shift=0)
    tile.xbar.program_tile(0, 0, rng.integers(-128, 128, size=(6, 5), dtype=np.int8))
    tile.cm_queue(pack4([1, 2, 3, 4]), 4, 0)
    tile.cm_process()
    state = tile.dump_state()
    assert len(state) == 6 * 5 + 6 + 5

    copy = AimcTile(6, 5, out_shift=0)
    copy.restore_state(state)
    assert copy.dump_state() == state
    assert np.array_equal(copy.xbar.weights, tile.xbar.weights)


def test_restore_rejects_wrong_size():
    with pytest.raises(ShapeMismatchError):
        AimcTile(4, 4).restore_state(b"\x00" * 10)


def test_repeated_process_is_idempotent(rng):
    tile = AimcTile(16, 16)
    tile.xbar.program_tile(0, 0, rng.integers(-128, 128, size=(16, 16), dtype=np.int8))
    for i in range(0, 16, 4):
        tile.cm_queue(pack4([int(v) for v in rng.integers(-128, 128, size=4)]), 4, i)
    tile.cm_process()
    first = tile.output_mem.copy()
    for _ in range(3):
        tile.cm_process()
        assert np.array_equal(tile.output_mem, first)
    assert tile.mvm_count == 4


@pytest.mark.parametrize("mode", ["tight", "loose"])
def test_queue_time_is_linear_in_bytes(mode):
    t = TileTiming()
    one = t.transfer_latency(4, mode)
    for words in range(1, 65):
        assert t.transfer_latency(4 * words, mode) == words * one


def test_loose_is_never_faster_than_tight():
    t = TileTiming()
    for n_bytes in range(0, 1025):
        assert t.transfer_latency(n_bytes, "loose") >= t.transfer_latency(n_bytes, "tight")
    assert t.process_time("loose") > t.process_time("tight")
