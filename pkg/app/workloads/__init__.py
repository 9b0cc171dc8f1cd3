from typing import Optional, Union

import numpy as np

from app.machine.config import SystemConfig
from app.machine.program import Workload
from app.workloads.specs import (
    CNN_DENSE,
    CNN_VARIANTS,
    LSTM_TILE_TABLE,
    Case,
    CnnSpec,
    ConvLayer,
    ConvShape,
    LstmSpec,
    Mapping,
    MlpSpec,
    shift_for_rows,
)
from app.workloads.costs import DEFAULT_COSTS, CostModel
from app.workloads.builder import ProgramBuilder
from app.workloads.golden import (
    ACT_SCALE,
    W_SCALE,
    cnn_forward,
    cnn_tiles,
    cnn_weights,
    golden_forward,
    im2col,
    lstm_forward,
    lstm_hidden,
    lstm_tiles,
    lstm_weights,
    mlp_forward,
    mlp_hidden,
    mlp_tiles,
    mlp_weights,
)
from app.workloads.mlp import build_mlp
from app.workloads.lstm import build_lstm
from app.workloads.cnn import build_cnn
from app.workloads.analytics import OpCount, WorkingSet, complexity_model, working_set

ModelSpec = Union[MlpSpec, LstmSpec, CnnSpec]


def build(spec: ModelSpec, mapping: Mapping, cfg: SystemConfig, costs: CostModel = DEFAULT_COSTS,
          inputs: Optional[np.ndarray] = None) -> Workload:
    """Per-core programs and programmed tiles of one model mapping."""
    if isinstance(spec, MlpSpec):
        return build_mlp(spec, mapping, cfg, costs, inputs)
    if isinstance(spec, LstmSpec):
        return build_lstm(spec, mapping, cfg, costs, inputs)
    return build_cnn(spec, mapping, cfg, costs)


__all__ = [
    "CNN_DENSE", "CNN_VARIANTS", "LSTM_TILE_TABLE", "Case", "CnnSpec", "ConvLayer", "ConvShape",
    "LstmSpec", "Mapping", "MlpSpec", "ModelSpec", "shift_for_rows",
    "DEFAULT_COSTS", "CostModel", "ProgramBuilder",
    "ACT_SCALE", "W_SCALE", "cnn_forward", "cnn_tiles", "cnn_weights", "golden_forward", "im2col",
    "lstm_forward", "lstm_hidden", "lstm_tiles", "lstm_weights", "mlp_forward", "mlp_hidden", "mlp_tiles", "mlp_weights",
    "build", "build_cnn", "build_lstm", "build_mlp",
    "OpCount", "WorkingSet", "complexity_model", "working_set",
]
