import numpy as np
import pytest

from app.data import InferenceInputs
from app.errors import UsageError
from app.workloads import CnnSpec, ConvLayer, LstmSpec, MlpSpec, build, lstm_hidden, lstm_weights, mlp_hidden, mlp_weights
from app.workloads.golden import digital_mvm
from app.machine import MemAccess, check_conservation, run

TINY_CNN = dict(
    variant="custom",
    input_hwc=(12, 12, 2),
    convs=[ConvLayer(kernels=4, size=3, pad=1, pool=2, lrn=True), ConvLayer(kernels=8, size=3, pad=1)],
    dense=(10, 5),
    n_inferences=2,
)

N = 3


def mlp(case):
    return MlpSpec(n=32, case=case, n_inferences=N)


def lstm(case):
    return LstmSpec(x=8, y=6, n_h=16, case=case, n_inferences=N)


MLP_PROCESSES = {1: {0: N + 1}, 2: {0: 2 * N}, 3: {0: N, 1: N}, 4: {k: N for k in range(4)}}
LSTM_PROCESSES = {1: {0: N + 1}, 2: {0: 2 * N}, 3: {0: N, 1: N}, 4: {k: N for k in range(5)}}


def _processes(stats):
    return {t.core_id: t.processes for t in stats.tiles}


@pytest.mark.parametrize("case", [1, 2, 3, 4])
@pytest.mark.parametrize("mapping", ["analog", "digital"])
def test_mlp_runs(high_cfg, case, mapping):
    spec = mlp(case)
    wl = build(spec, mapping, high_cfg)
    assert wl.n_cores_used == spec.n_cores
    assert wl.name == f"mlp-n32-case{case}-{mapping}"
    stats = run(wl, high_cfg)
    check_conservation(stats)
    if mapping == "analog":
        assert _processes(stats) == MLP_PROCESSES[case]
        assert not any(name.startswith("w") for name in wl.memory.regions)
    else:
        assert stats.cm_instructions == 0
        assert any(name.startswith("w") for name in wl.memory.regions)


@pytest.mark.parametrize("case", [1, 2, 3, 4])
@pytest.mark.parametrize("mapping", ["analog", "digital"])
def test_lstm_runs(high_cfg, case, mapping):
    spec = lstm(case)
    wl = build(spec, mapping, high_cfg)
    assert wl.n_cores_used == spec.n_cores
    stats = run(wl, high_cfg)
    check_conservation(stats)
    if mapping == "analog":
        assert _processes(stats) == LSTM_PROCESSES[case]
        assert not any(name.startswith("w") for name in wl.memory.regions)


@pytest.mark.parametrize("mapping", ["analog", "digital"])
def test_cnn_pipeline_runs(high_cfg, mapping):
    spec = CnnSpec(**TINY_CNN)
    wl = build(spec, mapping, high_cfg)
    assert wl.n_cores_used == 4
    assert wl.name == f"cnn-custom2-{mapping}"
    stats = run(wl, high_cfg)
    check_conservation(stats)
    if mapping == "analog":
        # one process per conv output pixel
        assert _processes(stats) == {0: 2 * 12 * 12, 1: 2 * 6 * 6}
        assert not any(name.startswith("wc") for name in wl.memory.regions)


def test_cnn_needs_a_dense_layer(high_cfg):
    spec = CnnSpec(**{**TINY_CNN, "dense": ()})
    with pytest.raises(UsageError):
        build(spec, "analog", high_cfg)


@pytest.mark.parametrize("spec", [mlp(1), mlp(2), mlp(3), mlp(4), lstm(1), lstm(2), lstm(3), lstm(4)],
                         ids=lambda s: f"{type(s).__name__}-case{s.case}")
def test_instruction_stream_executes_cleanly(high_cfg, spec):
    inputs = InferenceInputs(spec).as_array()
    wl = build(spec, "analog", high_cfg, inputs=inputs)
    trace = []
    run(wl, high_cfg, trace=trace, execute_tiles=True)
    assert trace
    assert sum(t.faults for t in wl.tiles.values()) == 0
    assert {r.core for r in trace} == set(wl.tiles)


def test_queued_words_carry_the_inputs(high_cfg):
    spec = mlp(2)
    inputs = InferenceInputs(spec).as_array()
    wl = build(spec, "analog", high_cfg, inputs=inputs)
    trace = []
    run(wl, high_cfg, trace=trace)
    first = [r.instr for r in trace[:8]]
    lanes = np.array([first[k].rm for k in range(8)], dtype="<u4").view(np.int8)
    assert np.array_equal(lanes, inputs[0])


def test_digital_takes_longer_than_analog(high_cfg):
    spec = MlpSpec(n=256, case=1, n_inferences=2)
    analog = run(build(spec, "analog", high_cfg), high_cfg)
    digital = run(build(spec, "digital", high_cfg), high_cfg)
    assert digital.wall_cycles > analog.wall_cycles


def test_builds_are_deterministic(high_cfg):
    a = run(build(lstm(4), "analog", high_cfg), high_cfg)
    b = run(build(lstm(4), "analog", high_cfg), high_cfg)
    assert a == b


def test_queued_activations_are_the_golden_hidden_layer(high_cfg):
    spec = mlp(3)
    inputs = InferenceInputs(spec).as_array()
    wl = build(spec, "analog", high_cfg, inputs=inputs)
    run(wl, high_cfg, execute_tiles=True)
    w = mlp_weights(spec)
    hidden = mlp_hidden(spec, inputs, w)
    assert np.array_equal(wl.tiles[1].input_mem, hidden[-1])
    assert np.array_equal(wl.tiles[1].output_mem, digital_mvm(hidden[-1], w.w2, spec.shift))


@pytest.mark.parametrize("case", [3, 4])
def test_dense_tile_sees_the_golden_hidden_state(high_cfg, case):
    spec = lstm(case)
    inputs = InferenceInputs(spec).as_array()
    wl = build(spec, "analog", high_cfg, inputs=inputs)
    run(wl, high_cfg, execute_tiles=True)
    w = lstm_weights(spec)
    hs = lstm_hidden(spec, inputs, w)
    dense = wl.tiles[max(wl.tiles)]
    assert np.array_equal(dense.input_mem, hs[-1])
    assert np.array_equal(dense.output_mem, digital_mvm(hs[-1], w.dense, spec.shift))


@pytest.mark.parametrize("mapping", ["analog", "digital"])
def test_dense_weights_stream_once_per_batch(high_cfg, mapping):
    spec = CnnSpec(**{**TINY_CNN, "n_inferences": 4})
    wl = build(spec, mapping, high_cfg)
    dense = wl.programs[len(spec.shapes()):]
    assert len(dense) == len(spec.dense_dims())
    for k, program in enumerate(dense):
        reads = [s for s in program.steps if isinstance(s, MemAccess) and s.region == f"wd{k}"]
        assert len(reads) == 1 and reads[0].repeat == 1
