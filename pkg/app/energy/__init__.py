from app.energy.tables import ENERGY_TABLES, TECH_SCALE, AimcEnergyModel, EnergyTable, aimc_model_for, load_energy_config
from app.energy.model import EnergyBreakdown, aimc_mvm_energy, system_energy

__all__ = [
    "ENERGY_TABLES", "TECH_SCALE", "AimcEnergyModel", "EnergyTable", "aimc_model_for", "load_energy_config",
    "EnergyBreakdown", "aimc_mvm_energy", "system_energy",
]
