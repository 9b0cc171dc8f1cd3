"""Closed-form working sets and operation counts of the MLP and LSTM studies."""
from typing import Optional, Union

from pydantic import BaseModel, ConfigDict, computed_field

from app.errors import UsageError
from app.workloads.specs import CnnSpec, LstmSpec, Mapping, MlpSpec

AnySpec = Union[MlpSpec, LstmSpec, CnnSpec]


class WorkingSet(BaseModel):
    """Bytes touched per inference; analog mapping leaves the weights in the tiles."""

    model_config = ConfigDict(frozen=True)

    model: str
    size: int
    digital_bytes: int
    analog_bytes: int

    def for_mapping(self, mapping: Mapping) -> int:
        return self.analog_bytes if mapping == "analog" else self.digital_bytes


class OpCount(BaseModel):
    """N_inf * (quadratic * O(n^2) + linear * O(n) + constant * O(1))."""

    model_config = ConfigDict(frozen=True)

    n: int
    n_inferences: int
    quadratic: int
    linear: int
    constant: int

    @computed_field
    @property
    def total(self) -> int:
        n = self.n
        return self.n_inferences * (self.quadratic * n * n + self.linear * n + self.constant)

    def leading(self) -> str:
        return "n^2" if self.quadratic else "n" if self.linear else "1"


def working_set(spec: AnySpec) -> WorkingSet:
    if isinstance(spec, MlpSpec):
        n = spec.n
        # two weight matrices plus x, l1 and y
        return WorkingSet(model="mlp", size=n, digital_bytes=2 * n * n + 3 * n, analog_bytes=3 * n)
    if isinstance(spec, LstmSpec):
        x, h, y = spec.x, spec.n_h, spec.y
        digital = (x + h) + 4 * (h * h + h * x) + h + h * y + y
        return WorkingSet(model="lstm", size=h, digital_bytes=digital, analog_bytes=(x + h) + h + y)
    raise UsageError("working sets have a closed form for MLP and LSTM models only")


# (quadratic, linear, constant) terms per inference
_TERMS: dict[tuple[str, str], tuple[int, int, int]] = {
    ("mlp", "digital"): (2, 4, 0),
    ("mlp", "analog"): (0, 6, 2),
    ("lstm", "digital"): (5, 13, 0),
    ("lstm", "analog"): (0, 15, 2),
}


def complexity_model(spec: AnySpec, mapping: Mapping, n_inferences: Optional[int] = None) -> OpCount:
    """
    Leading-order operation count of an inference run.

    The digital MVMs are quadratic in the layer size; under the analog mapping each
    MVM becomes one constant-time tile process and only the vector work stays linear.

    Raises:
        UsageError: for CNN models, which have no single size parameter.
    """
    if isinstance(spec, MlpSpec):
        key, n = "mlp", spec.n
    elif isinstance(spec, LstmSpec):
        key, n = "lstm", spec.n_h
    else:
        raise UsageError("the complexity model covers MLP and LSTM models only")
    q, lin, c = _TERMS[key, mapping]
    n_inf = spec.n_inferences if n_inferences is None else n_inferences
    return OpCount(n=n, n_inferences=n_inf, quadratic=q, linear=lin, constant=c)
