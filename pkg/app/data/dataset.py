import json
from pathlib import Path
from typing import Optional, Union

import numpy as np
import torch
from torch.utils.data import Dataset

from app.experiments.models import ExperimentSpec
from app.workloads.specs import CnnSpec, LstmSpec, MlpSpec

# keeps the input stream independent of the weight stream drawn from the same seed
INPUT_SEED_OFFSET = 0x5EED


class InferenceInputs(Dataset):
    """
    Seeded int8 inputs of one inference run.

    Items are one input vector per MLP inference, one x_t per LSTM time step,
    or one (H, W, C) image per CNN inference.

    Args:
        spec: Model whose input shape and inference count are used.
        seed: Overrides the model's seed.
    """

    def __init__(self, spec: Union[MlpSpec, LstmSpec, CnnSpec], seed: Optional[int] = None) -> None:
        self.spec = spec
        self.seed = spec.seed if seed is None else seed
        rng = np.random.default_rng(self.seed + INPUT_SEED_OFFSET)
        self.inputs = rng.integers(-128, 128, size=(spec.n_inferences, *self.item_shape), dtype=np.int8)

    @property
    def item_shape(self) -> tuple[int, ...]:
        if isinstance(self.spec, MlpSpec):
            return (self.spec.n,)
        if isinstance(self.spec, LstmSpec):
            return (self.spec.x,)
        return tuple(self.spec.input_hwc)

    def __len__(self) -> int:
        return len(self.inputs)

    def __getitem__(self, idx: int) -> torch.Tensor:
        return torch.from_numpy(self.inputs[idx])

    def as_array(self) -> np.ndarray:
        """All inputs stacked along the first axis."""
        return self.inputs


def load_experiment_specs(path: Union[str, Path]) -> list[ExperimentSpec]:
    """
    Load a list of experiments from a JSON file.

    The file holds either a JSON list of experiment objects or an object with an
    ``experiments`` list; a directory is read file by file in name order.
    """
    path = Path(path)
    if path.is_dir():
        specs = []
        for json_file in sorted(path.glob("*.json")):
            specs.extend(load_experiment_specs(json_file))
        return specs
    if not path.is_file():
        raise FileNotFoundError(f"Path not found: {path}")
    with open(path, "r", encoding="utf-8") as f:
        content = json.load(f)
    if isinstance(content, dict):
        content = content.get("experiments", [])
    return [ExperimentSpec.model_validate(item) for item in content]
