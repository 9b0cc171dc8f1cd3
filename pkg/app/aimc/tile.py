import logging
from dataclasses import dataclass
from enum import IntEnum
from typing import Literal, Optional

import numpy as np

from app.aimc.crossbar import NO_NOISE, Crossbar, NoiseModel
from app.aimc.qpack import LANES, pack4, unpack4
from app.errors import ShapeMismatchError

logger = logging.getLogger(__name__)

PS_PER_S = 10**12
DEFAULT_T_MVM_PS = 100_000  # 100 ns
DEFAULT_BANDWIDTH = 4 * 10**9  # bytes/s
DEFAULT_BUS_PENALTY_CYCLES = 14
DEFAULT_BUS_FREQ_HZ = 10**9

Coupling = Literal["tight", "loose"]


class TileStatus(IntEnum):
    OK = 0
    BAD_COUNT = 1
    OUT_OF_RANGE = 2


@dataclass(frozen=True)
class DequeueResult:
    word: int
    count: int
    status: TileStatus = TileStatus.OK


@dataclass
class TileTiming:
    """Latency model of one tile; all durations are integer picoseconds."""

    t_mvm_ps: int = DEFAULT_T_MVM_PS
    bandwidth: int = DEFAULT_BANDWIDTH
    bus_penalty_cycles: int = DEFAULT_BUS_PENALTY_CYCLES
    bus_freq_hz: int = DEFAULT_BUS_FREQ_HZ

    def queue_time(self, n_bytes: int) -> int:
        return round(n_bytes * PS_PER_S / self.bandwidth)

    def dequeue_time(self, n_bytes: int) -> int:
        return round(n_bytes * PS_PER_S / self.bandwidth)

    def process_time(self, mode: Coupling = "tight") -> int:
        # a loosely coupled process command is itself one bus transaction
        return self.t_mvm_ps + (self.bus_penalty(1) if mode == "loose" else 0)

    def bus_penalty(self, n_words: int) -> int:
        return round(n_words * self.bus_penalty_cycles * PS_PER_S / self.bus_freq_hz)

    def transfer_latency(self, n_bytes: int, mode: Coupling = "tight") -> int:
        if n_bytes < 0:
            raise ValueError(f"byte count must be non-negative, got {n_bytes}")
        base = self.queue_time(n_bytes)
        if mode == "tight":
            return base
        return base + self.bus_penalty(-(-n_bytes // LANES))


class AimcTile:
    """
    An AIMC tile: crossbar plus M-byte input memory and N-byte output memory.

    The cm_* methods mirror the CM_INITIALIZE / CM_QUEUE / CM_PROCESS / CM_DEQUEUE
    instructions. Range faults are reported as non-zero status, never raised.
    Busy time of each operation class is accumulated in picoseconds.
    """

    def __init__(
        self,
        rows: int,
        cols: int,
        out_shift: Optional[int] = None,
        timing: Optional[TileTiming] = None,
        noise: NoiseModel = NO_NOISE,
        coupling: Coupling = "tight",
    ) -> None:
        self.xbar = Crossbar(rows, cols, out_shift)
        self.input_mem = np.zeros(rows, dtype=np.int8)
        self.output_mem = np.zeros(cols, dtype=np.int8)
        self.timing = timing or TileTiming()
        self.noise = noise
        self.coupling: Coupling = coupling
        self.reset_counters()

    def __repr__(self) -> str:
        return f"AimcTile({self.rows}x{self.cols}, {self.coupling})"

    @property
    def rows(self) -> int:
        return self.xbar.rows

    @property
    def cols(self) -> int:
        return self.xbar.cols

    def reset_counters(self) -> None:
        self.queue_ps = 0
        self.process_ps = 0
        self.dequeue_ps = 0
        self.mvm_count = 0
        self.faults = 0

    def _fault(self, status: TileStatus, what: str) -> TileStatus:
        self.faults += 1
        logger.debug("tile fault (%s): %s", status.name, what)
        return status

    def cm_initialize(self, row: int, col: int, word: int, count: int) -> TileStatus:
        if not 1 <= count <= LANES:
            return self._fault(TileStatus.BAD_COUNT, f"initialize count {count}")
        if not (0 <= row < self.rows and 0 <= col and col + count <= self.cols):
            return self._fault(TileStatus.OUT_OF_RANGE, f"initialize ({row}, {col}) x{count}")
        lanes = unpack4(word)[:count]
        self.xbar.program_tile(row, col, np.array([lanes], dtype=np.int8))
        return TileStatus.OK

    def cm_queue(self, word: int, count: int, index: int) -> TileStatus:
        if not 1 <= count <= LANES:
            return self._fault(TileStatus.BAD_COUNT, f"queue count {count}")
        if not (0 <= index and index + count <= self.rows):
            return self._fault(TileStatus.OUT_OF_RANGE, f"queue index {index} x{count}")
        self.input_mem[index:index + count] = unpack4(word)[:count]
        self.queue_ps += self.timing.transfer_latency(count, self.coupling)
        return TileStatus.OK

    def cm_process(self) -> TileStatus:
        self.output_mem = self.xbar.mvm(self.input_mem, self.noise)
        self.process_ps += self.timing.process_time(self.coupling)
        self.mvm_count += 1
        return TileStatus.OK

    def cm_dequeue(self, count: int, index: int) -> DequeueResult:
        if not 1 <= count <= LANES:
            return DequeueResult(0, 0, self._fault(TileStatus.BAD_COUNT, f"dequeue count {count}"))
        if not (0 <= index and index + count <= self.cols):
            return DequeueResult(0, 0, self._fault(TileStatus.OUT_OF_RANGE, f"dequeue index {index} x{count}"))
        word = pack4([int(v) for v in self.output_mem[index:index + count]])
        self.dequeue_ps += self.timing.transfer_latency(count, self.coupling)
        return DequeueResult(word, count)

    def transfer_latency(self, n_bytes: int, mode: Optional[Coupling] = None) -> int:
        return self.timing.transfer_latency(n_bytes, mode or self.coupling)

    def dump_state(self) -> bytes:
        """Flat layout: rows x cols weights (row-major int8), then input memory, then output memory."""
        return self.xbar.weights.tobytes() + self.input_mem.tobytes() + self.output_mem.tobytes()

    def restore_state(self, data: bytes) -> None:
        m, n = self.rows, self.cols
        expected = m * n + m + n
        if len(data) != expected:
            raise ShapeMismatchError(f"state of {len(data)} bytes does not fit a {m}x{n} tile ({expected} bytes)")
        raw = np.frombuffer(data, dtype=np.int8)
        self.xbar.program_tile(0, 0, raw[:m * n].reshape(m, n))
        self.input_mem = raw[m * n:m * n + m].copy()
        self.output_mem = raw[m * n + m:].copy()
