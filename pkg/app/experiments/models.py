from typing import Any, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, PositiveFloat, PositiveInt, ValidationError, model_validator

from app.aimc.tile import Coupling
from app.energy.model import EnergyBreakdown
from app.errors import UsageError
from app.machine.config import Profile
from app.machine.stats import SimStats
from app.workloads.analytics import WorkingSet
from app.workloads.specs import CnnSpec, ConvLayer, LstmSpec, Mapping, MlpSpec

ModelName = Literal["mlp", "lstm", "cnn"]


class ExperimentSpec(BaseModel):
    """One simulation run: a model mapping on a machine profile."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    model: ModelName
    case: Optional[int] = Field(default=None, description="mapping case 1-4 of MLP and LSTM models")
    variant: Literal["F", "M", "S", "custom"] = "S"
    n: PositiveInt = 1024
    n_h: PositiveInt = 256
    x: PositiveInt = 50
    y: PositiveInt = 50
    input_hwc: Optional[tuple[PositiveInt, PositiveInt, PositiveInt]] = None
    convs: Optional[list[ConvLayer]] = None
    dense: Optional[tuple[PositiveInt, ...]] = None
    mapping: Mapping = "analog"
    profile: Profile = "high_power"
    coupling: Coupling = "tight"
    n_inferences: Optional[PositiveInt] = None
    seed: int = 0
    tile_latency_ns: Optional[PositiveFloat] = None

    @model_validator(mode="before")
    @classmethod
    def _default_case(cls, data: Any) -> Any:
        if isinstance(data, dict) and data.get("model") in ("mlp", "lstm") and data.get("case") is None:
            data = {**data, "case": 1}
        return data

    @model_validator(mode="after")
    def _case_fits_model(self) -> "ExperimentSpec":
        if self.model == "cnn":
            if self.case is not None:
                raise ValueError("CNN experiments take a variant, not a case")
        elif self.case not in (1, 2, 3, 4):
            raise ValueError(f"{self.model} case must be 1, 2, 3 or 4, got {self.case}")
        return self

    def model_spec(self) -> Union[MlpSpec, LstmSpec, CnnSpec]:
        common: dict[str, Any] = {"seed": self.seed}
        if self.n_inferences is not None:
            common["n_inferences"] = self.n_inferences
        if self.model == "mlp":
            return MlpSpec(n=self.n, case=self.case, **common)
        if self.model == "lstm":
            return LstmSpec(x=self.x, y=self.y, n_h=self.n_h, case=self.case, **common)
        extra: dict[str, Any] = {}
        if self.input_hwc is not None:
            extra["input_hwc"] = self.input_hwc
        if self.convs is not None:
            extra["convs"] = self.convs
        if self.dense is not None:
            extra["dense"] = self.dense
        return CnnSpec(variant=self.variant, **extra, **common)

    @property
    def size(self) -> int:
        if self.model == "mlp":
            return self.n
        if self.model == "lstm":
            return self.n_h
        return (self.input_hwc or (224, 224, 3))[0]

    @property
    def case_label(self) -> str:
        return f"case{self.case}" if self.model != "cnn" else self.variant

    @property
    def group(self) -> str:
        """Runs sharing a group compare against the same digital baseline."""
        return f"{self.model}-{self.size}-{self.case_label}-{self.profile}"

    @property
    def run_id(self) -> str:
        parts = [self.group, self.mapping]
        if self.mapping == "analog":
            parts.append(self.coupling)
        if self.tile_latency_ns is not None:
            parts.append(f"t{self.tile_latency_ns:g}ns")
        parts.append(f"s{self.seed}")
        return "-".join(parts)


def parse_experiment(**values: Any) -> ExperimentSpec:
    """Build an experiment from loose keyword values; invalid combinations become usage errors."""
    try:
        return ExperimentSpec.model_validate({k: v for k, v in values.items() if v is not None})
    except ValidationError as e:
        messages = "; ".join(err["msg"] for err in e.errors())
        raise UsageError(f"invalid experiment: {messages}") from None


class ConfigFile(BaseModel):
    """Sections of a ``--config`` JSON file; each overrides the built-in profile values."""

    model_config = ConfigDict(extra="forbid")

    system: dict[str, Any] = Field(default_factory=dict)
    energy: dict[str, Any] = Field(default_factory=dict)
    aimc: dict[str, Any] = Field(default_factory=dict)


class Report(BaseModel):
    """Result of one experiment."""

    metadata: dict[str, Any]
    spec: ExperimentSpec
    workload: str
    stats: SimStats
    energy: EnergyBreakdown
    llcmpi: float
    working_set: Optional[WorkingSet] = None

    def csv_row(self) -> dict[str, Any]:
        s = self.spec
        return {
            "run_id": s.run_id,
            "model": s.model,
            "case": s.case_label,
            "mapping": s.mapping,
            "profile": s.profile,
            "coupling": s.coupling,
            "n": s.size,
            "time_s": f"{self.stats.wall_time:.6e}",
            "energy_j": f"{self.energy.total:.6e}",
            "llcmpi": f"{self.llcmpi:.6e}",
            "idle_pct": ";".join(f"{c.idle_pct:.2f}" for c in self.stats.cores),
            "ipc": ";".join(f"{c.ipc:.4f}" for c in self.stats.cores),
        }


CSV_COLUMNS = ["run_id", "model", "case", "mapping", "profile", "coupling", "n",
               "time_s", "energy_j", "llcmpi", "idle_pct", "ipc"]
