from app.machine.config import PROFILE_DEFAULTS, Profile, SystemConfig, load_system_config
from app.machine.program import (
    CmBurst,
    Compute,
    CoreProgram,
    MemAccess,
    MemoryMap,
    Region,
    Step,
    SubRoi,
    SyncSignal,
    SyncWait,
    Workload,
)
from app.machine.cache import DRAM, L1_HIT, LLC_HIT, CacheLevel, MemorySystem, sweep_set
from app.machine.stats import CacheStats, CoreStats, SimStats, TileUsage, check_conservation, llcmpi
from app.machine.simulator import Simulator, burst_wait_cycles, compute_cost, run

__all__ = [
    "PROFILE_DEFAULTS", "Profile", "SystemConfig", "load_system_config",
    "CmBurst", "Compute", "CoreProgram", "MemAccess", "MemoryMap", "Region", "Step", "SubRoi",
    "SyncSignal", "SyncWait", "Workload",
    "DRAM", "L1_HIT", "LLC_HIT", "CacheLevel", "MemorySystem", "sweep_set",
    "CacheStats", "CoreStats", "SimStats", "TileUsage", "check_conservation", "llcmpi",
    "Simulator", "burst_wait_cycles", "compute_cost", "run",
]
