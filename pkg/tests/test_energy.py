import json

import pytest
from pydantic import ValidationError

from app.energy import ENERGY_TABLES, AimcEnergyModel, aimc_model_for, aimc_mvm_energy, load_energy_config, system_energy
from app.errors import InconsistentStatsError
from app.machine import CacheStats, CoreStats, SimStats, TileUsage


@pytest.mark.parametrize(
    "model, expected",
    [
        (AimcEnergyModel(), 10.24e-9),
        (aimc_model_for("high_power"), 54.272e-9),
        (aimc_model_for("low_power"), 20.48e-9),
    ],
)
def test_reference_mvm_energy(model, expected):
    assert aimc_mvm_energy(256, 256, model) == pytest.approx(expected, rel=1e-9)


def test_mvm_energy_scales_with_cells():
    model = AimcEnergyModel()
    assert aimc_mvm_energy(512, 256, model) == pytest.approx(2 * aimc_mvm_energy(256, 256, model))


def test_converter_terms():
    model = AimcEnergyModel(e_dac=1e-12, e_adc=2e-12)
    base = aimc_mvm_energy(4, 8, AimcEnergyModel())
    assert aimc_mvm_energy(4, 8, model) == pytest.approx(base + 4e-12 + 16e-12)


def test_mvm_energy_rejects_empty_tile():
    with pytest.raises(ValueError):
        aimc_mvm_energy(0, 4, AimcEnergyModel())


def test_system_energy_by_hand():
    table = ENERGY_TABLES["low_power"]
    stats = SimStats(
        core_freq=1e9,
        wall_cycles=1000,
        cores=[CoreStats(core_id=0, active_cycles=600, idle_cycles=100, wfm_cycles=300, instructions=10)],
        cache=CacheStats(llc_read_bytes=640, llc_write_bytes=64, dram_accesses=3),
        tiles=[TileUsage(core_id=0, rows=256, cols=256, processes=2), TileUsage(core_id=1, rows=8, cols=8)],
    )
    e = system_energy(stats, table, aimc_model_for("low_power"), llc_size=512 * 1024)

    assert e.core == pytest.approx((600 * 60.92 + 100 * 10.72 + 300 * 46.04) * 1e-12)
    assert e.llc == pytest.approx(2 * 0.27162 * 1e-6 + (640 * 1.81 + 64 * 1.63) * 1e-12)
    assert e.dram == pytest.approx(3 * 120e-12 + 3.03 * 1e-6)
    assert e.aimc == pytest.approx(2 * 20.48e-9)
    assert e.total == pytest.approx(e.core + e.llc + e.dram + e.aimc)


def test_system_energy_checks_conservation():
    stats = SimStats(core_freq=1e9, wall_cycles=10, cores=[CoreStats(core_id=0, active_cycles=3)])
    with pytest.raises(InconsistentStatsError):
        system_energy(stats, ENERGY_TABLES["high_power"], AimcEnergyModel(), 1 << 20)


def test_config_sections_override(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"energy": {"dram_pj_per_access": 50.0}, "aimc": {"base_efficiency": 6.4e12}}))
    table, aimc = load_energy_config(path, "high_power")
    assert table.dram_pj_per_access == 50.0
    assert table.active_pj == ENERGY_TABLES["high_power"].active_pj
    assert aimc.tech_scale == 5.3
    assert aimc_mvm_energy(256, 256, aimc) == pytest.approx(2 * 54.272e-9)


def test_config_rejects_unknown_energy_key(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"energy": {"bogus": 1.0}}))
    with pytest.raises(ValidationError):
        load_energy_config(path)
