from pydantic import BaseModel, Field, computed_field

from app.errors import InconsistentStatsError


class CoreStats(BaseModel):
    core_id: int
    active_cycles: int = 0
    idle_cycles: int = 0
    wfm_cycles: int = 0
    instructions: int = 0
    l1_hits: int = 0
    l1_misses: int = 0

    @computed_field
    @property
    def total_cycles(self) -> int:
        return self.active_cycles + self.idle_cycles + self.wfm_cycles

    @computed_field
    @property
    def ipc(self) -> float:
        return self.instructions / self.total_cycles if self.total_cycles else 0.0

    @computed_field
    @property
    def idle_pct(self) -> float:
        return 100.0 * self.idle_cycles / self.total_cycles if self.total_cycles else 100.0


class CacheStats(BaseModel):
    llc_hits: int = 0
    llc_misses: int = 0
    llc_read_bytes: int = 0
    llc_write_bytes: int = 0
    dram_accesses: int = 0


class TileUsage(BaseModel):
    core_id: int
    rows: int
    cols: int
    processes: int = 0


class SimStats(BaseModel):
    """Outcome of one simulation. Cycle counts are core cycles; times are seconds."""

    core_freq: float
    wall_cycles: int
    cores: list[CoreStats]
    cache: CacheStats = Field(default_factory=CacheStats)
    subroi_cycles: dict[str, int] = Field(default_factory=dict)
    tiles: list[TileUsage] = Field(default_factory=list)
    cm_instructions: int = 0

    @computed_field
    @property
    def wall_time(self) -> float:
        return self.wall_cycles / self.core_freq

    @computed_field
    @property
    def subroi_times(self) -> dict[str, float]:
        return {tag: c / self.core_freq for tag, c in self.subroi_cycles.items()}

    @property
    def instructions(self) -> int:
        return sum(c.instructions for c in self.cores)


def llcmpi(stats: SimStats) -> float:
    """Last-level cache misses per instruction."""
    if stats.instructions <= 0:
        raise InconsistentStatsError("LLCMPI is undefined for a run without instructions")
    return stats.cache.llc_misses / stats.instructions


def check_conservation(stats: SimStats, tolerance: int = 1) -> None:
    """Every core accounts for the whole wall time as active, idle or WFM cycles."""
    for c in stats.cores:
        if min(c.active_cycles, c.idle_cycles, c.wfm_cycles, c.instructions) < 0:
            raise InconsistentStatsError(f"core {c.core_id} has negative counters")
        if abs(c.total_cycles - stats.wall_cycles) > tolerance:
            raise InconsistentStatsError(
                f"core {c.core_id}: active+idle+wfm = {c.total_cycles} != wall {stats.wall_cycles} cycles"
            )
    if sum(stats.subroi_cycles.values()) > stats.wall_cycles * len(stats.cores):
        raise InconsistentStatsError("sub-ROI time exceeds the available core time")
