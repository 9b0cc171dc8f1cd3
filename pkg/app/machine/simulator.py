import heapq
import logging
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Optional

from app.aimc.qpack import LANES
from app.aimc.tile import AimcTile
from app.errors import DeadlockError, TraceParseError, UsageError
from app.isa.dispatch import execute
from app.isa.instructions import CmInstruction, CmOp
from app.isa.trace import TraceRecord
from app.machine.cache import MemorySystem
from app.machine.config import SystemConfig
from app.machine.program import CmBurst, Compute, MemAccess, Step, SyncSignal, SyncWait, Workload
from app.machine.stats import CacheStats, CoreStats, SimStats, TileUsage

logger = logging.getLogger(__name__)


def compute_cost(step: Compute, cfg: SystemConfig) -> tuple[int, int]:
    """(cycles, instructions) of a compute group: SIMD int8, vector fp32 and scalar work."""
    int8 = -(-step.int8_ops // cfg.simd_lanes)
    fp32 = -(-step.fp32_ops // cfg.fp32_lanes)
    return int8 + fp32 * cfg.fp32_cycles + step.scalar_ops, int8 + fp32 + step.scalar_ops


def burst_wait_cycles(step: CmBurst, cfg: SystemConfig) -> int:
    """Cycles the core waits on the tile for a burst; each instruction is rounded to whole cycles."""
    timing = cfg.tile_timing()
    if step.op is CmOp.PROCESS:
        return cfg.cycles(timing.process_time(cfg.coupling))
    full, rem = divmod(step.nbytes, LANES)
    cycles = full * cfg.cycles(timing.transfer_latency(LANES, cfg.coupling))
    if rem:
        cycles += cfg.cycles(timing.transfer_latency(rem, cfg.coupling))
    return cycles


@dataclass
class _Core:
    core_id: int
    steps: tuple[Step, ...]
    pc: int = 0
    time: int = 0
    active: int = 0
    idle: int = 0
    wfm: int = 0
    instructions: int = 0
    processes: int = 0
    blocked_on: Optional[str] = None
    blocked_since: int = 0

    @property
    def done(self) -> bool:
        return self.pc >= len(self.steps)


@dataclass
class _Channel:
    depth: int
    tokens: int = 0
    waiters: deque = field(default_factory=deque)
    signalers: deque = field(default_factory=deque)


class Simulator:
    """
    Deterministic event loop over per-core programs.

    Cores are ordered by (local time, core id); each pop executes one step.
    Channels are counting semaphores of bounded depth: a wait on an empty
    channel or a signal on a full one blocks the core until its partner
    arrives, and the blocked core resumes ``wakeup_cycles`` after that.
    """

    def __init__(
        self,
        workload: Workload,
        cfg: SystemConfig,
        tiles: Optional[dict[int, AimcTile]] = None,
        trace: Optional[list[TraceRecord]] = None,
        execute_tiles: bool = False,
        replay: Optional[Iterable[TraceRecord]] = None,
    ) -> None:
        if len(workload.programs) > cfg.n_cores:
            raise UsageError(f"{workload.name} needs {len(workload.programs)} cores, system has {cfg.n_cores}")
        self.workload = workload
        self.cfg = cfg
        self.tiles = workload.tiles if tiles is None else tiles
        self.trace = trace
        self.execute_tiles = execute_tiles
        self.mem = MemorySystem(cfg)
        self.cores = {}
        for p in workload.programs:
            if not 0 <= p.core_id < cfg.n_cores or p.core_id in self.cores:
                raise UsageError(f"invalid or duplicate core id {p.core_id} in {workload.name}")
            self.cores[p.core_id] = _Core(p.core_id, p.steps)
        # per-core CM_* instructions taken from a recorded trace instead of the program's bursts
        self.feed: Optional[dict[int, deque]] = None
        if replay is not None:
            self.feed = {cid: deque() for cid in self.cores}
            for n, rec in enumerate(replay, 1):
                if rec.core not in self.feed:
                    raise TraceParseError(f"record {n} belongs to core {rec.core}, which runs no program")
                self.feed[rec.core].append(rec.instr)
        self.channels = {name: _Channel(depth) for name, depth in workload.channels.items()}
        self.subroi: dict[str, int] = {}
        self.cm_count = 0
        self._heap: list[tuple[int, int]] = []

    def _tag(self, step: Step, cycles: int) -> None:
        if cycles:
            key = step.tag.value
            self.subroi[key] = self.subroi.get(key, 0) + cycles

    def _channel(self, name: str) -> _Channel:
        try:
            return self.channels[name]
        except KeyError:
            raise UsageError(f"channel {name!r} is not declared by {self.workload.name}") from None

    def _resume(self, core: _Core, at: int) -> None:
        """Wake a blocked core at ``at``; it then completes its pending sync step."""
        step = core.steps[core.pc]
        waited = at - core.blocked_since
        core.idle += waited
        self._tag(step, waited)
        core.active += self.cfg.sync_cycles
        self._tag(step, self.cfg.sync_cycles)
        core.instructions += 1
        core.time = at + self.cfg.sync_cycles
        core.blocked_on = None
        core.pc += 1
        heapq.heappush(self._heap, (core.time, core.core_id))

    def _instructions(self, core: _Core, step: CmBurst) -> list[CmInstruction]:
        if self.feed is None:
            return step.instructions()
        fed = self.feed[core.core_id]
        out = []
        for _ in range(step.words):
            if not fed or fed[0].op is not step.op:
                found = f"CM_{fed[0].op.value}" if fed else "the end of its records"
                raise TraceParseError(
                    f"core {core.core_id} step {core.pc}: program issues CM_{step.op.value}, trace has {found}"
                )
            out.append(fed.popleft())
        return out

    def _block(self, core: _Core, channel: str) -> None:
        core.blocked_on = channel
        core.blocked_since = core.time

    def _step(self, core: _Core) -> bool:
        """Execute the step at pc; returns False if the core blocked."""
        step = core.steps[core.pc]
        cfg = self.cfg
        if isinstance(step, Compute):
            cycles, instr = compute_cost(step, cfg)
            core.active += cycles
            core.instructions += instr
            core.time += cycles
            self._tag(step, cycles)
        elif isinstance(step, MemAccess):
            region = self.workload.memory[step.region]
            if step.offset + step.nbytes > region.size:
                raise UsageError(f"access of {step.nbytes} B at +{step.offset} overflows region {region.name}")
            addr = region.base + step.offset
            if step.repeat > 1:
                cycles = self.mem.access_repeated(core.core_id, addr, step.nbytes, step.repeat)
            else:
                _, cycles = self.mem.cache_access(core.core_id, addr, step.nbytes, step.write, region.shared)
            lines = (addr + max(step.nbytes, 1) - 1) // cfg.line_size - addr // cfg.line_size + 1
            core.wfm += cycles
            core.instructions += lines * step.repeat
            core.time += cycles
            self._tag(step, cycles)
        elif isinstance(step, CmBurst):
            wait = burst_wait_cycles(step, cfg)
            issue = cfg.cm_issue_cycles * step.words
            core.wfm += wait
            core.active += issue
            core.instructions += step.words
            core.time += wait + issue
            self._tag(step, wait + issue)
            self.cm_count += step.words
            if step.op is CmOp.PROCESS:
                core.processes += 1
            if self.trace is not None or self.execute_tiles or self.feed is not None:
                for instr in self._instructions(core, step):
                    if self.trace is not None:
                        self.trace.append(TraceRecord(core.core_id, instr))
                    if self.execute_tiles:
                        execute(instr, core.core_id, self.tiles)
        elif isinstance(step, SyncWait):
            ch = self._channel(step.channel)
            if ch.tokens == 0:
                self._block(core, step.channel)
                ch.waiters.append(core.core_id)
                return False
            ch.tokens -= 1
            core.active += cfg.sync_cycles
            core.instructions += 1
            core.time += cfg.sync_cycles
            self._tag(step, cfg.sync_cycles)
            if ch.signalers:
                ch.tokens += 1
                self._resume(self.cores[ch.signalers.popleft()], core.time + cfg.wakeup_cycles)
        elif isinstance(step, SyncSignal):
            ch = self._channel(step.channel)
            if ch.tokens >= ch.depth and not ch.waiters:
                self._block(core, step.channel)
                ch.signalers.append(core.core_id)
                return False
            core.active += cfg.sync_cycles
            core.instructions += 1
            core.time += cfg.sync_cycles
            self._tag(step, cfg.sync_cycles)
            if ch.waiters:
                # the token goes straight to the oldest waiter
                self._resume(self.cores[ch.waiters.popleft()], core.time + cfg.wakeup_cycles)
            else:
                ch.tokens += 1
        else:
            raise TypeError(f"unknown step {step!r}")
        core.pc += 1
        return True

    def run(self) -> SimStats:
        self._heap = [(0, cid) for cid in sorted(self.cores)]
        heapq.heapify(self._heap)
        while self._heap:
            _, cid = heapq.heappop(self._heap)
            core = self.cores[cid]
            if core.done:
                self.mem.release(cid)
                continue
            if self._step(core):
                heapq.heappush(self._heap, (core.time, cid))

        blocked = {c.core_id: c.blocked_on for c in self.cores.values() if not c.done}
        if blocked:
            raise DeadlockError(blocked)
        if self.feed is not None:
            left = {cid: len(q) for cid, q in self.feed.items() if q}
            if left:
                raise TraceParseError(f"trace records left after the programs ended: {left}")
        return self._stats()

    def _stats(self) -> SimStats:
        cfg = self.cfg
        wall = max((c.time for c in self.cores.values()), default=0)
        k = self.mem.counters
        cores = []
        for cid in range(cfg.n_cores):
            c = self.cores.get(cid)
            if c is None:
                cores.append(CoreStats(core_id=cid, idle_cycles=wall))
                continue
            cores.append(CoreStats(
                core_id=cid,
                active_cycles=c.active,
                idle_cycles=c.idle + wall - c.time,
                wfm_cycles=c.wfm,
                instructions=c.instructions,
                l1_hits=k.l1_hits[cid],
                l1_misses=k.l1_misses[cid],
            ))
        tiles = [
            TileUsage(core_id=cid, rows=rows, cols=cols, processes=self.cores[cid].processes if cid in self.cores else 0)
            for cid, (rows, cols) in sorted(self.workload.tile_dims.items())
        ]
        stats = SimStats(
            core_freq=cfg.core_freq,
            wall_cycles=wall,
            cores=cores,
            cache=CacheStats(
                llc_hits=k.llc_hits,
                llc_misses=k.llc_misses,
                llc_read_bytes=k.llc_read_bytes,
                llc_write_bytes=k.llc_write_bytes,
                dram_accesses=k.dram_accesses,
            ),
            subroi_cycles=dict(sorted(self.subroi.items())),
            tiles=tiles,
            cm_instructions=self.cm_count,
        )
        logger.debug("%s: %d cycles, %d instructions", self.workload.name, wall, stats.instructions)
        return stats


def run(
    workload: Workload,
    cfg: SystemConfig,
    tiles: Optional[dict[int, AimcTile]] = None,
    trace: Optional[list[TraceRecord]] = None,
    execute_tiles: bool = False,
    replay: Optional[Iterable[TraceRecord]] = None,
) -> SimStats:
    """
    Simulate a workload; optionally record its CM_* instruction stream into ``trace``.

    With ``replay`` the CM_* instructions come from a recorded trace, matched burst
    by burst against each core's program, instead of from the program itself.
    """
    return Simulator(workload, cfg, tiles, trace, execute_tiles, replay).run()
