"""Abstract per-core programs consumed by the event loop."""
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Union

from app.aimc.qpack import LANES
from app.aimc.tile import AimcTile
from app.isa.instructions import CmInstruction, CmOp


class SubRoi(str, Enum):
    INPUT_LOAD = "input_load"
    ANALOG_QUEUE = "analog_queue"
    ANALOG_PROCESS = "analog_process"
    ANALOG_DEQUEUE = "analog_dequeue"
    DIGITAL_MVM = "digital_mvm"
    DIGITAL_ACTIVATION = "digital_activation"
    SYNC = "sync"
    OUTPUT_WRITEBACK = "output_writeback"


@dataclass(frozen=True, slots=True)
class Compute:
    tag: SubRoi
    int8_ops: int = 0
    fp32_ops: int = 0
    scalar_ops: int = 0


@dataclass(frozen=True, slots=True)
class MemAccess:
    """Sequential access to ``nbytes`` of a region. ``repeat`` re-reads the same bytes back to back."""

    tag: SubRoi
    region: str
    offset: int
    nbytes: int
    write: bool = False
    repeat: int = 1

    def __post_init__(self) -> None:
        if self.repeat < 1 or (self.write and self.repeat != 1):
            raise ValueError(f"repeat must be >= 1 and is only allowed on reads, got {self.repeat}")


@dataclass(frozen=True, slots=True)
class CmBurst:
    """
    A run of CM_* instructions of one kind.

    Queue / dequeue bursts move ``nbytes`` through consecutive tile slots starting
    at ``index``, one instruction per 32-bit word; a process burst issues
    ``nbytes``-independent single CM_PROCESS. ``data`` optionally carries the
    packed queue words so the burst can also be executed on a tile.
    """

    tag: SubRoi
    op: CmOp
    nbytes: int = 0
    index: int = 0
    data: Optional[tuple[int, ...]] = None

    @property
    def words(self) -> int:
        if self.op is CmOp.PROCESS:
            return 1
        return -(-self.nbytes // LANES)

    def instructions(self, rd: int = 0) -> list[CmInstruction]:
        if self.op is CmOp.PROCESS:
            return [CmInstruction(op=CmOp.PROCESS, rd=rd)]
        out = []
        for k in range(self.words):
            count = min(LANES, self.nbytes - k * LANES)
            rm = self.data[k] if self.data is not None and self.op is not CmOp.DEQUEUE else 0
            out.append(CmInstruction(op=self.op, rm=rm, ra=count, rn=self.index + k * LANES, rd=rd))
        return out


@dataclass(frozen=True, slots=True)
class SyncWait:
    tag: SubRoi
    channel: str


@dataclass(frozen=True, slots=True)
class SyncSignal:
    tag: SubRoi
    channel: str


Step = Union[Compute, MemAccess, CmBurst, SyncWait, SyncSignal]


@dataclass(frozen=True)
class CoreProgram:
    core_id: int
    steps: tuple[Step, ...]
    name: str = ""


@dataclass(frozen=True)
class Region:
    name: str
    base: int
    size: int
    # written by one core and read by others; writes go through to the LLC
    shared: bool = False


class MemoryMap:
    """Line-aligned placement of the named data regions of a workload."""

    def __init__(self, line_size: int = 64, base: int = 0x1000_0000) -> None:
        self.line_size = line_size
        self._next = base
        self.regions: dict[str, Region] = {}

    def add(self, name: str, size: int, shared: bool = False) -> Region:
        if name in self.regions:
            raise ValueError(f"region {name!r} already mapped")
        region = Region(name, self._next, size, shared)
        self.regions[name] = region
        span = -(-max(size, 1) // self.line_size) * self.line_size
        # one spare line between regions
        self._next += span + self.line_size
        return region

    def __getitem__(self, name: str) -> Region:
        return self.regions[name]

    def __contains__(self, name: str) -> bool:
        return name in self.regions


@dataclass
class Workload:
    """Everything a run needs: per-core programs, data layout, channel depths and programmed tiles."""

    name: str
    programs: list[CoreProgram]
    memory: MemoryMap
    channels: dict[str, int] = field(default_factory=dict)
    tiles: dict[int, AimcTile] = field(default_factory=dict)
    # tile dimensions of each analog core, as reported
    tile_dims: dict[int, tuple[int, int]] = field(default_factory=dict)

    @property
    def n_cores_used(self) -> int:
        return len(self.programs)
