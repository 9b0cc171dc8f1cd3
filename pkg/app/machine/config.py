import json
from pathlib import Path
from typing import Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, PositiveFloat, PositiveInt, model_validator

from app.aimc.tile import Coupling, TileTiming

Profile = Literal["low_power", "high_power"]

PS_PER_S = 10**12


def _pow2(v: int) -> bool:
    return v > 0 and v & (v - 1) == 0


class SystemConfig(BaseModel):
    """Machine parameters of one system profile. Latencies are in core cycles unless named otherwise."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    profile: Profile = "high_power"
    n_cores: PositiveInt = 8
    core_freq: PositiveFloat = 2.3e9
    simd_lanes: PositiveInt = 16
    # fp32 ops issue fp32_lanes wide on the 128-bit vector unit; fp32_lanes=1 charges fp32_cycles per scalar op
    fp32_lanes: PositiveInt = 4
    fp32_cycles: PositiveInt = 4

    l1_size: PositiveInt = 64 * 1024
    l1_ways: PositiveInt = 8
    llc_size: PositiveInt = 1024 * 1024
    llc_ways: PositiveInt = 16
    line_size: PositiveInt = 64
    l1_latency: int = Field(default=2, ge=0)
    llc_latency: int = Field(default=20, ge=0)
    dram_latency: int = Field(default=160, ge=0)
    # per-line cost of the lines after the first in a sequential stream; setting each one to the
    # full latency of its level turns an access into the plain sum of per-line latencies
    l1_stream: int = Field(default=1, ge=0)
    llc_stream: int = Field(default=6, ge=0)
    dram_stream: int = Field(default=8, ge=0)

    bus_frontend: int = Field(default=3, ge=0)
    bus_forward: int = Field(default=4, ge=0)
    bus_response: int = Field(default=4, ge=0)
    bus_snoop: int = Field(default=4, ge=0)

    coupling: Coupling = "tight"
    # frontend + forward + response + 3 cycles of margin, per 32-bit peripheral transfer
    bus_penalty_cycles: int = Field(default=14, ge=0)
    bus_freq: PositiveFloat = 1e9
    tile_latency_ns: PositiveFloat = 100.0
    tile_bandwidth: PositiveFloat = 4e9

    cm_issue_cycles: int = Field(default=2, ge=0)
    sync_cycles: int = Field(default=50, ge=0)
    # sleep/wake latency of an OS mutex once the waiter has blocked (about 4.3 us at 2.3 GHz);
    # sync_cycles is the uncontended handoff
    wakeup_cycles: int = Field(default=10_000, ge=0)

    @model_validator(mode="after")
    def _check_geometry(self) -> "SystemConfig":
        if not _pow2(self.line_size):
            raise ValueError(f"line_size must be a power of two, got {self.line_size}")
        for name, size, ways in (("l1", self.l1_size, self.l1_ways), ("llc", self.llc_size, self.llc_ways)):
            if not _pow2(size) or size < self.line_size:
                raise ValueError(f"{name}_size must be a power-of-two multiple of line_size, got {size}")
            if (size // self.line_size) % ways:
                raise ValueError(f"{name}: {size // self.line_size} lines do not split into {ways} ways")
        return self

    @property
    def freq_hz(self) -> int:
        return round(self.core_freq)

    def cycles(self, ps: int) -> int:
        """Core cycles covering a duration in picoseconds, rounded up."""
        return -(-ps * self.freq_hz // PS_PER_S)

    def seconds(self, cycles: int) -> float:
        return cycles / self.core_freq

    def tile_timing(self) -> TileTiming:
        return TileTiming(
            t_mvm_ps=round(self.tile_latency_ns * 1000),
            bandwidth=round(self.tile_bandwidth),
            bus_penalty_cycles=self.bus_penalty_cycles,
            bus_freq_hz=round(self.bus_freq),
        )

    @classmethod
    def for_profile(cls, profile: Profile, **overrides) -> "SystemConfig":
        try:
            base = PROFILE_DEFAULTS[profile]
        except KeyError:
            raise ValueError(f"unknown profile {profile!r}; choose from {sorted(PROFILE_DEFAULTS)}") from None
        return cls(**{**base, **overrides})


PROFILE_DEFAULTS: dict[str, dict] = {
    "low_power": dict(
        profile="low_power", core_freq=0.8e9, l1_size=32 * 1024, llc_size=512 * 1024,
        l1_latency=2, llc_latency=12, dram_latency=60, l1_stream=1, llc_stream=2, dram_stream=3,
    ),
    "high_power": dict(
        profile="high_power", core_freq=2.3e9, l1_size=64 * 1024, llc_size=1024 * 1024,
        l1_latency=2, llc_latency=20, dram_latency=160, l1_stream=1, llc_stream=6, dram_stream=8,
    ),
}


def load_system_config(path: Optional[Union[str, Path]], profile: Profile = "high_power", **overrides) -> SystemConfig:
    """Profile defaults, then the ``system`` section of a JSON config file, then explicit overrides."""
    file_values: dict = {}
    if path is not None:
        with open(path, "r", encoding="utf-8") as f:
            file_values = json.load(f).get("system", {})
    file_values.pop("profile", None)
    return SystemConfig.for_profile(profile, **{**file_values, **overrides})
