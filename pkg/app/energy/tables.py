import json
from pathlib import Path
from typing import Optional, Union

from pydantic import BaseModel, ConfigDict, NonNegativeFloat, PositiveFloat

from app.machine.config import Profile


class EnergyTable(BaseModel):
    """Per-profile core, cache, DRAM and memory-controller energy figures."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    idle_pj: NonNegativeFloat
    wfm_pj: NonNegativeFloat
    active_pj: NonNegativeFloat
    memctrl_io_w: NonNegativeFloat
    llc_leak_mw_per_256kb: NonNegativeFloat
    llc_read_pj_per_byte: NonNegativeFloat
    llc_write_pj_per_byte: NonNegativeFloat
    dram_pj_per_access: NonNegativeFloat = 120.0


class AimcEnergyModel(BaseModel):
    """MVM energy of a tile, proportional to its size and scaled to the host technology node."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    # TOp/s/W of a 256x256 tile at the reference node; one op is a multiply or an add
    base_efficiency: PositiveFloat = 12.8e12
    tech_scale: PositiveFloat = 1.0
    e_dac: NonNegativeFloat = 0.0
    e_adc: NonNegativeFloat = 0.0

    @property
    def e_cell(self) -> float:
        """Joules per weight per MVM: two ops (multiply and accumulate) per cell."""
        return 2.0 / self.base_efficiency


ENERGY_TABLES: dict[str, EnergyTable] = {
    "low_power": EnergyTable(
        idle_pj=10.72, wfm_pj=46.04, active_pj=60.92, memctrl_io_w=3.03,
        llc_leak_mw_per_256kb=271.62, llc_read_pj_per_byte=1.81, llc_write_pj_per_byte=1.63,
    ),
    "high_power": EnergyTable(
        idle_pj=126.03, wfm_pj=638.99, active_pj=845.39, memctrl_io_w=5.82,
        llc_leak_mw_per_256kb=874.08, llc_read_pj_per_byte=5.60, llc_write_pj_per_byte=5.02,
    ),
}

TECH_SCALE: dict[str, float] = {"low_power": 2.0, "high_power": 5.3}


def aimc_model_for(profile: Profile, **overrides) -> AimcEnergyModel:
    return AimcEnergyModel(**{"tech_scale": TECH_SCALE[profile], **overrides})


def load_energy_config(
    path: Optional[Union[str, Path]], profile: Profile = "high_power"
) -> tuple[EnergyTable, AimcEnergyModel]:
    """Built-in tables of the profile, updated by the ``energy`` / ``aimc`` sections of a JSON config."""
    sections: dict = {}
    if path is not None:
        with open(path, "r", encoding="utf-8") as f:
            sections = json.load(f)
    table = EnergyTable.model_validate({**ENERGY_TABLES[profile].model_dump(), **sections.get("energy", {})})
    aimc = aimc_model_for(profile, **sections.get("aimc", {}))
    return table, aimc
