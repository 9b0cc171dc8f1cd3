"""Step emitters shared by the model builders."""
from typing import Optional

from app.aimc.qpack import LANES
from app.isa.instructions import CmOp
from app.machine.program import CmBurst, Compute, CoreProgram, MemAccess, Step, SubRoi, SyncSignal, SyncWait
from app.workloads.costs import CostModel

_PROCESS = CmBurst(SubRoi.ANALOG_PROCESS, CmOp.PROCESS)


def words(nbytes: int) -> int:
    return -(-nbytes // LANES)


class ProgramBuilder:
    """Accumulates the tagged steps of one core."""

    def __init__(self, core_id: int, costs: CostModel, name: str = "") -> None:
        self.core_id = core_id
        self.costs = costs
        self.name = name
        self.steps: list[Step] = []

    def build(self) -> CoreProgram:
        return CoreProgram(self.core_id, tuple(self.steps), self.name)

    def _compute(self, tag: SubRoi, int8: int = 0, fp32: int = 0, scalar: int = 0) -> None:
        if int8 or fp32 or scalar:
            self.steps.append(Compute(tag, int8, fp32, scalar))

    def load(self, region: str, offset: int, nbytes: int, tag: SubRoi = SubRoi.INPUT_LOAD) -> None:
        self.steps.append(MemAccess(tag, region, offset, nbytes))

    def store(self, region: str, offset: int, nbytes: int, tag: SubRoi = SubRoi.OUTPUT_WRITEBACK) -> None:
        self.steps.append(MemAccess(tag, region, offset, nbytes, write=True))

    def queue_int8(self, nbytes: int, index: int = 0, data: Optional[tuple[int, ...]] = None) -> None:
        """Queue bytes that are already packed in memory: one word load per instruction."""
        self._compute(SubRoi.ANALOG_QUEUE, scalar=words(nbytes) * self.costs.loop_scalar)
        self.steps.append(CmBurst(SubRoi.ANALOG_QUEUE, CmOp.QUEUE, nbytes, index, data))

    def queue_fp32(self, n: int, index: int = 0, data: Optional[tuple[int, ...]] = None) -> None:
        """Quantize and pack n fp32 activations, then queue them; ``data`` holds the packed words."""
        c = self.costs
        self._compute(SubRoi.ANALOG_QUEUE, fp32=n * c.quant_fp32,
                      scalar=n * c.pack_scalar + words(n) * c.loop_scalar)
        self.steps.append(CmBurst(SubRoi.ANALOG_QUEUE, CmOp.QUEUE, n, index, data))

    def process(self) -> None:
        self.steps.append(_PROCESS)

    def dequeue(self, n: int, index: int = 0, unpack: bool = True) -> None:
        """Dequeue n outputs; ``unpack`` splits the words into lanes, otherwise words are stored as-is."""
        c = self.costs
        scalar = words(n) * c.loop_scalar + (n * c.unpack_scalar if unpack else 0)
        self._compute(SubRoi.ANALOG_DEQUEUE, scalar=scalar)
        self.steps.append(CmBurst(SubRoi.ANALOG_DEQUEUE, CmOp.DEQUEUE, n, index))

    def activation(self, fp32: int = 0, int8: int = 0, scalar: int = 0) -> None:
        self._compute(SubRoi.DIGITAL_ACTIVATION, int8=int8, fp32=fp32, scalar=scalar)

    def digital_mvm(self, weights: str, rows: int, cols: int, repeat: int = 1, offset: int = 0, batch: int = 1) -> None:
        """
        Stream a rows x cols int8 weight matrix ``repeat`` times and multiply-accumulate it.

        Each pass serves ``batch`` input vectors, so the weights are read once per batch.
        """
        self.steps.append(MemAccess(SubRoi.DIGITAL_MVM, weights, offset, rows * cols, repeat=repeat))
        self._compute(SubRoi.DIGITAL_MVM, int8=2 * rows * cols * repeat * batch)

    def saturate(self, n: int) -> None:
        self._compute(SubRoi.DIGITAL_MVM, int8=n * self.costs.saturate_int8)

    def signal(self, channel: str) -> None:
        self.steps.append(SyncSignal(SubRoi.SYNC, channel))

    def wait(self, channel: str) -> None:
        self.steps.append(SyncWait(SubRoi.SYNC, channel))

    def send(self, region: str, offset: int, nbytes: int, ready: str, ack: str) -> None:
        """Mutex handoff: write shared data, signal it and wait until the receiver has copied it."""
        self.store(region, offset, nbytes, SubRoi.SYNC)
        self.signal(ready)
        self.wait(ack)

    def receive(self, region: str, offset: int, nbytes: int, ready: str, ack: str) -> None:
        self.wait(ready)
        self.load(region, offset, nbytes, SubRoi.SYNC)
        self.signal(ack)
