from app.aimc.qpack import (
    LANES,
    Q8_MAX,
    Q8_MIN,
    ScaleFactor,
    dequantize,
    dequantize_array,
    pack4,
    pack_words,
    quantize,
    quantize_array,
    saturate_acc,
    saturate_acc_array,
    unpack4,
    unpack_words,
)
from app.aimc.crossbar import NO_NOISE, Crossbar, NoiseModel, default_out_shift
from app.aimc.tile import AimcTile, Coupling, DequeueResult, TileStatus, TileTiming
from app.aimc.aimclib import aimc_process, dequeue_vector, initialize_words, map_matrix, queue_vector

__all__ = [
    "LANES", "Q8_MAX", "Q8_MIN", "ScaleFactor", "dequantize", "dequantize_array", "pack4", "pack_words",
    "quantize", "quantize_array", "saturate_acc", "saturate_acc_array", "unpack4", "unpack_words",
    "NO_NOISE", "Crossbar", "NoiseModel", "default_out_shift",
    "AimcTile", "Coupling", "DequeueResult", "TileStatus", "TileTiming",
    "aimc_process", "dequeue_vector", "initialize_words", "map_matrix", "queue_vector",
]
