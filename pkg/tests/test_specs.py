import pytest
from pydantic import ValidationError

from app.workloads import LSTM_TILE_TABLE, CnnSpec, ConvLayer, LstmSpec, MlpSpec, shift_for_rows


@pytest.mark.parametrize("n_h", [256, 512, 750])
@pytest.mark.parametrize("case", [1, 2, 3, 4])
def test_lstm_tabulated_tiles(n_h, case):
    spec = LstmSpec(n_h=n_h, case=case)
    assert spec.cell_tile == LSTM_TILE_TABLE[n_h][case]


def test_lstm_tile_dims_per_case():
    assert LstmSpec(case=1).tile_dims == {0: (612, 1074)}
    assert LstmSpec(case=3).tile_dims == {0: (356, 1024), 1: (256, 50)}
    dims = LstmSpec(case=4).tile_dims
    assert len(dims) == 5 and dims[4] == (256, 50) and dims[0] == (356, 256)


def test_lstm_untabulated_sizes():
    spec = LstmSpec(x=8, y=6, n_h=16, case=1)
    assert spec.cell_tile == (2 * 24, 4 * 16 + 6)


def test_unit_slices():
    sizes = [len(r) for r in LstmSpec(n_h=750).unit_slices()]
    assert sizes == [188, 188, 187, 187]
    slices = LstmSpec(n_h=16).unit_slices()
    assert slices[0].start == 0 and slices[-1].stop == 16


def test_mlp_tile_dims():
    assert MlpSpec(n=1024, case=1).tile_dims == {0: (2048, 2048)}
    assert MlpSpec(n=1024, case=2).tile_dims == {0: (1024, 2048)}
    assert MlpSpec(n=1024, case=4).tile_dims == {k: (1024, 512) for k in range(4)}
    assert MlpSpec(n=1024).shift == 10


def test_mlp_rejects_unknown_case():
    with pytest.raises(ValidationError):
        MlpSpec(case=5)


def test_cnn_f_geometry():
    spec = CnnSpec(variant="F")
    shapes = spec.shapes()
    assert (shapes[0].rows, shapes[0].cols) == (363, 64)
    assert shapes[0].conv_hwc == (54, 54, 64) and shapes[0].out_hwc == (27, 27, 64)
    assert shapes[-1].out_hwc == (6, 6, 256)
    assert spec.flat_features == 9216
    assert spec.dense_dims() == [(9216, 4096), (4096, 4096), (4096, 1000)]
    assert spec.n_cores == 8


@pytest.mark.parametrize("variant", ["F", "M", "S"])
def test_cnn_variants_fit_the_machine(variant):
    spec = CnnSpec(variant=variant)
    assert len(spec.shapes()) == 5
    assert spec.n_cores == 8


def test_custom_cnn_needs_layers():
    with pytest.raises(ValidationError):
        CnnSpec(variant="custom")


def test_kernel_larger_than_input():
    with pytest.raises(ValidationError):
        CnnSpec(variant="custom", input_hwc=(4, 4, 1), convs=[ConvLayer(kernels=2, size=5)])


@pytest.mark.parametrize("rows, shift", [(1, 0), (2, 1), (3, 2), (1024, 10), (1025, 11)])
def test_shift_for_rows(rows, shift):
    assert shift_for_rows(rows) == shift
