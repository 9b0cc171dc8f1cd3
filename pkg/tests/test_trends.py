"""Full-size runs checking the directional results of the analog mappings."""
from functools import lru_cache

import pytest

from app.experiments import ExperimentSpec, simulate

pytestmark = pytest.mark.slow


@lru_cache(maxsize=None)
def _report(items):
    return simulate(ExperimentSpec(**dict(items)))


def report(**values):
    return _report(tuple(sorted(values.items())))


def speedup(**values):
    analog = report(mapping="analog", **values)
    digital = report(mapping="digital", **values)
    return digital.stats.wall_time / analog.stats.wall_time, digital.energy.total / analog.energy.total


def test_mlp_case1_speedup_and_energy():
    time_ratio, energy_ratio = speedup(model="mlp", n=1024, case=1)
    assert 5 < time_ratio < 30
    assert 5 < energy_ratio < 30


def test_lstm_speedup_at_750_units():
    time_ratio, energy_ratio = speedup(model="lstm", n_h=750, case=1)
    assert 4 < time_ratio < 20
    assert 4 < energy_ratio < 20


def test_cnn_s_speedup_and_energy():
    time_ratio, energy_ratio = speedup(model="cnn", variant="S")
    assert 6 < time_ratio < 40
    assert 6 < energy_ratio < 40


def test_cnn_speedup_grows_with_network_size():
    s, m, f = (speedup(model="cnn", variant=v)[0] for v in ("S", "M", "F"))
    assert s >= m >= f > 1


@pytest.mark.parametrize("variant", ["F", "M", "S"])
def test_analog_cnn_misses_the_llc_no_more(variant):
    analog = report(model="cnn", variant=variant)
    digital = report(model="cnn", variant=variant, mapping="digital")
    assert analog.llcmpi <= digital.llcmpi


def test_mlp_digital_grows_quadratically_analog_linearly():
    digital = report(model="mlp", n=1024, mapping="digital").stats.wall_time / \
        report(model="mlp", n=512, mapping="digital").stats.wall_time
    analog = report(model="mlp", n=1024, mapping="analog").stats.wall_time / \
        report(model="mlp", n=512, mapping="analog").stats.wall_time
    assert 3.0 <= digital <= 5.0
    assert 1.6 <= analog <= 2.6


def test_lstm_analog_grows_slower_than_digital():
    def ratio(mapping):
        return report(model="lstm", n_h=750, mapping=mapping).stats.wall_time / \
            report(model="lstm", n_h=256, mapping=mapping).stats.wall_time

    assert ratio("analog") <= 4
    assert ratio("digital") > 5


def test_pipelined_mlp_beats_multi_core_cases():
    times = {case: report(model="mlp", n=1024, case=case).stats.wall_time for case in (1, 3, 4)}
    assert times[1] < times[3] < times[4]


def test_split_lstm_cell_is_at_least_as_fast():
    one = report(model="lstm", n_h=750, case=1).stats.wall_time
    four = report(model="lstm", n_h=750, case=4).stats.wall_time
    assert four <= one


def test_loose_coupling_sits_between_tight_and_digital():
    tight = report(model="mlp", n=1024, case=2, coupling="tight").stats.wall_time
    loose = report(model="mlp", n=1024, case=2, coupling="loose").stats.wall_time
    digital = report(model="mlp", n=1024, case=2, mapping="digital").stats.wall_time
    assert tight < loose < digital


@pytest.mark.parametrize("case", [1, 2, 3, 4])
def test_analog_mlp_misses_the_llc_less(case):
    analog = report(model="mlp", n=1024, case=case)
    digital = report(model="mlp", n=1024, case=case, mapping="digital")
    assert analog.llcmpi < digital.llcmpi


def test_analog_mlp_memory_intensity_is_flat_across_cases():
    values = [report(model="mlp", n=1024, case=case).llcmpi for case in (1, 2, 3, 4)]
    assert max(values) / min(values) <= 1.5
