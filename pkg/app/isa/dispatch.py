from typing import Mapping, Optional

from app.aimc.tile import AimcTile, TileStatus
from app.errors import MachineFault
from app.isa.instructions import CmInstruction, CmOp

# Set on the 64-bit destination register when a dequeue faults; the low bits hold the status.
DEQUEUE_FAULT_FLAG = 1 << 32


def tile_for(core_id: int, tiles: Mapping[int, AimcTile], core_to_tile: Optional[Mapping[int, int]] = None) -> AimcTile:
    """Resolve the tile of a core; one tile per core unless a mapping says otherwise."""
    key = core_to_tile.get(core_id, core_id) if core_to_tile is not None else core_id
    try:
        return tiles[key]
    except KeyError:
        raise MachineFault(f"no AIMC tile mapped to core {core_id}") from None


def execute(
    instr: CmInstruction,
    core_id: int,
    tiles: Mapping[int, AimcTile],
    core_to_tile: Optional[Mapping[int, int]] = None,
) -> int:
    """
    Dispatch one CM_* instruction to the issuing core's tile.

    Returns:
        The value written to rd: a status for queue / process / initialize,
        the packed output word for dequeue (with DEQUEUE_FAULT_FLAG set on a fault).
    """
    tile = tile_for(core_id, tiles, core_to_tile)
    if instr.op is CmOp.QUEUE:
        return int(tile.cm_queue(instr.rm, instr.ra, instr.rn))
    if instr.op is CmOp.PROCESS:
        return int(tile.cm_process())
    if instr.op is CmOp.DEQUEUE:
        res = tile.cm_dequeue(instr.ra, instr.rn)
        if res.status != TileStatus.OK:
            return DEQUEUE_FAULT_FLAG | int(res.status)
        return res.word
    row, col = divmod(instr.rn, tile.cols)
    return int(tile.cm_initialize(row, col, instr.rm, instr.ra))

