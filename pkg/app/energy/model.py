from typing import Optional, Sequence

from pydantic import BaseModel, computed_field

from app.energy.tables import AimcEnergyModel, EnergyTable
from app.machine.stats import SimStats, TileUsage, check_conservation

PJ = 1e-12
LLC_LEAK_UNIT_BYTES = 256 * 1024


class EnergyBreakdown(BaseModel):
    """Energy per component, in joules."""

    core: float = 0.0
    llc: float = 0.0
    dram: float = 0.0
    aimc: float = 0.0

    @computed_field
    @property
    def total(self) -> float:
        return self.core + self.llc + self.dram + self.aimc


def aimc_mvm_energy(rows: int, cols: int, model: AimcEnergyModel) -> float:
    """Joules of one MVM on a rows x cols tile."""
    if rows < 1 or cols < 1:
        raise ValueError(f"tile dimensions must be positive, got {rows}x{cols}")
    return (model.e_cell * rows * cols + model.e_dac * rows + model.e_adc * cols) * model.tech_scale


def system_energy(
    stats: SimStats,
    table: EnergyTable,
    aimc: AimcEnergyModel,
    llc_size: int,
    tiles: Optional[Sequence[TileUsage]] = None,
) -> EnergyBreakdown:
    """
    Sum core, LLC, DRAM and AIMC energy of a run.

    Args:
        stats: Run statistics; must satisfy cycle conservation.
        table: Energy figures of the profile.
        aimc: Tile energy model.
        llc_size: LLC capacity in bytes, scales leakage.
        tiles: Tile usage; defaults to ``stats.tiles``.

    Returns:
        The per-component breakdown.
    """
    check_conservation(stats)
    core = sum(
        c.active_cycles * table.active_pj + c.idle_cycles * table.idle_pj + c.wfm_cycles * table.wfm_pj
        for c in stats.cores
    ) * PJ
    leak_w = table.llc_leak_mw_per_256kb * 1e-3 * (llc_size / LLC_LEAK_UNIT_BYTES)
    llc = leak_w * stats.wall_time + (
        stats.cache.llc_read_bytes * table.llc_read_pj_per_byte
        + stats.cache.llc_write_bytes * table.llc_write_pj_per_byte
    ) * PJ
    dram = stats.cache.dram_accesses * table.dram_pj_per_access * PJ + table.memctrl_io_w * stats.wall_time
    usage = stats.tiles if tiles is None else tiles
    analog = sum(t.processes * aimc_mvm_energy(t.rows, t.cols, aimc) for t in usage if t.processes)
    return EnergyBreakdown(core=core, llc=llc, dram=dram, aimc=analog)
