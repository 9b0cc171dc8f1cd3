"""
Untimed functional models of the three networks.

MVMs are exact int8 x int8 products mapped back to int8 by the ADC shift; the
analog path runs them on crossbar tiles laid out as the case's builder lays
them out, the digital path uses plain integer matmuls. Everything between
MVMs is fp32 (torch) on dequantized values, re-quantized before the next MVM.
"""
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
import torch
import torch.nn.functional as F

from app.aimc.aimclib import aimc_process, dequeue_vector, map_matrix, queue_vector
from app.aimc.qpack import dequantize_array, quantize_array, saturate_acc_array
from app.aimc.tile import AimcTile
from app.errors import ShapeMismatchError
from app.workloads.specs import CnnSpec, LstmSpec, Mapping, MlpSpec

ACT_SCALE = 32.0
W_SCALE = 64.0
W_RANGE = 32
LRN_SIZE, LRN_ALPHA, LRN_BETA, LRN_K = 5, 1e-4, 0.75, 2.0


def _rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(seed)


def _int8(rng: np.random.Generator, shape: tuple[int, ...]) -> np.ndarray:
    return rng.integers(-W_RANGE, W_RANGE + 1, size=shape, dtype=np.int64).astype(np.int8)


def out_scale(in_scale: float, shift: int) -> float:
    """Dequantization scale of an MVM output."""
    return in_scale * W_SCALE / (1 << shift)


def digital_mvm(x: np.ndarray, w: np.ndarray, shift: int) -> np.ndarray:
    """Integer reference MVM; ``x`` may be a vector or a batch of row vectors."""
    if x.shape[-1] != w.shape[0]:
        raise ShapeMismatchError(f"input length {x.shape[-1]} != weight rows {w.shape[0]}")
    return saturate_acc_array(np.asarray(x, dtype=np.int64) @ w.astype(np.int64), shift)


def _fp32(q: np.ndarray, scale: float) -> torch.Tensor:
    return torch.from_numpy(dequantize_array(q, scale))


def _q8(t: torch.Tensor, scale: float = ACT_SCALE) -> np.ndarray:
    return quantize_array(t.numpy(), scale)


def _tile(rows: int, cols: int, shift: int, blocks: list[tuple[int, int, np.ndarray]]) -> AimcTile:
    tile = AimcTile(rows, cols, out_shift=shift)
    for r, c, mat in blocks:
        map_matrix(tile, r, c, mat)
    return tile


def _run_tile(tile: AimcTile, x: np.ndarray, index: int, out_index: int, count: int) -> np.ndarray:
    queue_vector(tile, x, index)
    aimc_process(tile)
    return dequeue_vector(tile, count, out_index)


# ---------------------------------------------------------------- MLP

@dataclass
class MlpWeights:
    w1: np.ndarray
    w2: np.ndarray


def mlp_weights(spec: MlpSpec) -> MlpWeights:
    rng = _rng(spec.seed)
    return MlpWeights(_int8(rng, (spec.n, spec.n)), _int8(rng, (spec.n, spec.n)))


def mlp_tiles(spec: MlpSpec, w: MlpWeights) -> dict[int, AimcTile]:
    n, s = spec.n, spec.shift
    dims = spec.tile_dims
    if spec.case == 1:
        return {0: _tile(*dims[0], s, [(0, 0, w.w1), (n, n, w.w2)])}
    if spec.case == 2:
        return {0: _tile(*dims[0], s, [(0, 0, w.w1), (0, n, w.w2)])}
    if spec.case == 3:
        return {0: _tile(*dims[0], s, [(0, 0, w.w1)]), 1: _tile(*dims[1], s, [(0, 0, w.w2)])}
    h = n // 2
    return {
        0: _tile(*dims[0], s, [(0, 0, w.w1[:, :h])]),
        1: _tile(*dims[1], s, [(0, 0, w.w1[:, h:])]),
        2: _tile(*dims[2], s, [(0, 0, w.w2[:, :h])]),
        3: _tile(*dims[3], s, [(0, 0, w.w2[:, h:])]),
    }


def _relu_requant(q: np.ndarray, shift: int) -> tuple[np.ndarray, torch.Tensor]:
    a = torch.relu(_fp32(q, out_scale(ACT_SCALE, shift)))
    return _q8(a), a


def mlp_hidden(spec: MlpSpec, inputs: np.ndarray, weights: Optional[MlpWeights] = None) -> np.ndarray:
    """Quantized layer-1 activations (N, n) int8, the words queued for layer 2."""
    w = weights or mlp_weights(spec)
    rows = [_relu_requant(digital_mvm(x, w.w1, spec.shift), spec.shift)[0] for x in np.asarray(inputs, dtype=np.int8)]
    return np.stack(rows) if rows else np.zeros((0, spec.n), np.int8)


def mlp_forward(spec: MlpSpec, inputs: np.ndarray, mapping: Mapping = "digital",
                weights: Optional[MlpWeights] = None) -> np.ndarray:
    """Outputs (N, n) float32 of the second ReLU layer for int8 inputs (N, n)."""
    inputs = np.asarray(inputs, dtype=np.int8)
    if inputs.ndim != 2 or inputs.shape[1] != spec.n:
        raise ShapeMismatchError(f"expected inputs of shape (N, {spec.n}), got {inputs.shape}")
    w = weights or mlp_weights(spec)
    n, s = spec.n, spec.shift
    outs = []
    if mapping == "digital":
        for x in inputs:
            l1, _ = _relu_requant(digital_mvm(x, w.w1, s), s)
            _, y = _relu_requant(digital_mvm(l1, w.w2, s), s)
            outs.append(y)
        return torch.stack(outs).numpy() if outs else np.zeros((0, n), np.float32)

    tiles = mlp_tiles(spec, w)
    if spec.case == 1:
        # software pipeline: each process runs layer 1 of inference i and layer 2 of inference i-1
        t = tiles[0]
        prev: Optional[np.ndarray] = None
        for i in range(len(inputs) + 1):
            if i < len(inputs):
                queue_vector(t, inputs[i], 0)
            if prev is not None:
                queue_vector(t, prev, n)
            aimc_process(t)
            if prev is not None:
                outs.append(_relu_requant(dequeue_vector(t, n, n), s)[1])
            prev = _relu_requant(dequeue_vector(t, n, 0), s)[0] if i < len(inputs) else None
    else:
        for x in inputs:
            if spec.case == 2:
                l1, _ = _relu_requant(_run_tile(tiles[0], x, 0, 0, n), s)
                _, y = _relu_requant(_run_tile(tiles[0], l1, 0, n, n), s)
            elif spec.case == 3:
                l1, _ = _relu_requant(_run_tile(tiles[0], x, 0, 0, n), s)
                _, y = _relu_requant(_run_tile(tiles[1], l1, 0, 0, n), s)
            else:
                h = n // 2
                l1 = np.concatenate([_run_tile(tiles[0], x, 0, 0, h), _run_tile(tiles[1], x, 0, 0, n - h)])
                l1, _ = _relu_requant(l1, s)
                y = np.concatenate([_run_tile(tiles[2], l1, 0, 0, h), _run_tile(tiles[3], l1, 0, 0, n - h)])
                _, y = _relu_requant(y, s)
            outs.append(y)
    return torch.stack(outs).numpy() if outs else np.zeros((0, n), np.float32)


# ---------------------------------------------------------------- LSTM

@dataclass
class LstmWeights:
    # rows [h; x], columns [f | i | a | o], n_h each
    gates: np.ndarray
    dense: np.ndarray


def lstm_weights(spec: LstmSpec) -> LstmWeights:
    rng = _rng(spec.seed)
    return LstmWeights(_int8(rng, (spec.n_h + spec.x, 4 * spec.n_h)), _int8(rng, (spec.n_h, spec.y)))


def interleave_gate_columns(gates: np.ndarray, n_h: int, units: range) -> np.ndarray:
    """Columns of ``units`` reordered so each unit's f, i, a, o sit in four consecutive columns."""
    cols = [g * n_h + u for u in units for g in range(4)]
    return gates[:, cols]


def lstm_tiles(spec: LstmSpec, w: LstmWeights) -> dict[int, AimcTile]:
    x, h, s = spec.x, spec.n_h, spec.shift
    rows, cols = spec.cell_tile
    if spec.case == 1:
        return {0: _tile(rows, cols, s, [(0, 0, w.gates), (x + h, 4 * h, w.dense)])}
    if spec.case == 2:
        return {0: _tile(rows, cols, s, [(0, 0, w.gates), (0, 4 * h, w.dense)])}
    dense = _tile(h, spec.y, s, [(0, 0, w.dense)])
    if spec.case == 3:
        return {0: _tile(rows, cols, s, [(0, 0, w.gates)]), 1: dense}
    tiles = {}
    for p, units in enumerate(spec.unit_slices()):
        block = interleave_gate_columns(w.gates, h, units)
        tiles[p] = _tile(rows, max(cols, block.shape[1]), s, [(0, 0, block)])
    tiles[4] = dense
    return tiles


def _cell(pre: torch.Tensor, c: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
    """pre is (4, units) of dequantized f, i, a, o pre-activations."""
    f, i, o = torch.sigmoid(pre[0]), torch.sigmoid(pre[1]), torch.sigmoid(pre[3])
    a = torch.tanh(pre[2])
    c = f * c + i * a
    return o * torch.tanh(c), c


def lstm_hidden(spec: LstmSpec, inputs: np.ndarray, weights: Optional[LstmWeights] = None) -> np.ndarray:
    """Quantized hidden states h_0..h_{T-1}, (T, n_h) int8."""
    w = weights or lstm_weights(spec)
    n_h, s = spec.n_h, spec.shift
    hq = np.zeros(n_h, dtype=np.int8)
    c = torch.zeros(n_h, dtype=torch.float32)
    out = []
    for xt in np.asarray(inputs, dtype=np.int8):
        pre = _fp32(digital_mvm(np.concatenate([hq, xt]), w.gates, s).reshape(4, n_h), out_scale(ACT_SCALE, s))
        h, c = _cell(pre, c)
        hq = _q8(h)
        out.append(hq)
    return np.stack(out) if out else np.zeros((0, n_h), np.int8)


def lstm_forward(spec: LstmSpec, inputs: np.ndarray, mapping: Mapping = "digital",
                 weights: Optional[LstmWeights] = None) -> np.ndarray:
    """Softmax outputs (T, y) float32 for an int8 input sequence (T, x), starting from h = c = 0."""
    inputs = np.asarray(inputs, dtype=np.int8)
    if inputs.ndim != 2 or inputs.shape[1] != spec.x:
        raise ShapeMismatchError(f"expected inputs of shape (T, {spec.x}), got {inputs.shape}")
    w = weights or lstm_weights(spec)
    x_dim, n_h, s = spec.x, spec.n_h, spec.shift
    gate_scale = out_scale(ACT_SCALE, s)
    tiles = lstm_tiles(spec, w) if mapping == "analog" else {}

    def gates_of(hx: np.ndarray) -> np.ndarray:
        """(4, n_h) int8 pre-activations in f, i, a, o order."""
        if mapping == "digital":
            return digital_mvm(hx, w.gates, s).reshape(4, n_h)
        if spec.case in (1, 2, 3):
            return _run_tile(tiles[0], hx, 0, 0, 4 * n_h).reshape(4, n_h)
        out = np.zeros((4, n_h), dtype=np.int8)
        for p, units in enumerate(spec.unit_slices()):
            local = _run_tile(tiles[p], hx, 0, 0, 4 * len(units)).reshape(len(units), 4)
            out[:, units.start:units.stop] = local.T
        return out

    def dense_of(hq: np.ndarray) -> np.ndarray:
        if mapping == "digital":
            return digital_mvm(hq, w.dense, s)
        if spec.case == 1:
            return _run_tile(tiles[0], hq, x_dim + n_h, 4 * n_h, spec.y)
        if spec.case == 2:
            return _run_tile(tiles[0], hq, 0, 4 * n_h, spec.y)
        return _run_tile(tiles[max(tiles)], hq, 0, 0, spec.y)

    hq = np.zeros(n_h, dtype=np.int8)
    c = torch.zeros(n_h, dtype=torch.float32)
    outs = []
    for xt in inputs:
        pre = _fp32(gates_of(np.concatenate([hq, xt])), gate_scale)
        h, c = _cell(pre, c)
        hq = _q8(h)
        outs.append(torch.softmax(_fp32(dense_of(hq), gate_scale), dim=0))
    return torch.stack(outs).numpy() if outs else np.zeros((0, spec.y), np.float32)


# ---------------------------------------------------------------- CNN

@dataclass
class CnnWeights:
    # one (rows, cols) im2col matrix per conv layer, rows ordered (channel, ky, kx)
    convs: list[np.ndarray]
    dense: list[np.ndarray]


def cnn_weights(spec: CnnSpec, dense: bool = True) -> CnnWeights:
    rng = _rng(spec.seed)
    convs = [_int8(rng, (sh.rows, sh.cols)) for sh in spec.shapes()]
    dw = [_int8(rng, dims) for dims in spec.dense_dims()] if dense else []
    return CnnWeights(convs, dw)


def cnn_tiles(spec: CnnSpec, w: CnnWeights) -> dict[int, AimcTile]:
    return {sh.index: _tile(sh.rows, sh.cols, sh.shift, [(0, 0, w.convs[sh.index])]) for sh in spec.shapes()}


def im2col(q: np.ndarray, size: int, stride: int, pad: int) -> np.ndarray:
    """(H, W, C) int8 map -> (L, C*size*size) int64 patches in output row-major order."""
    t = torch.from_numpy(np.ascontiguousarray(q.transpose(2, 0, 1), dtype=np.float64)).unsqueeze(0)
    cols = F.unfold(t, kernel_size=size, stride=stride, padding=pad)
    return cols[0].T.numpy().astype(np.int64)


def cnn_forward(spec: CnnSpec, image: np.ndarray, mapping: Mapping = "digital",
                weights: Optional[CnnWeights] = None, tiles: Optional[dict[int, AimcTile]] = None) -> np.ndarray:
    """Class probabilities (dense[-1],) float32 for one int8 (H, W, C) image."""
    image = np.asarray(image, dtype=np.int8)
    if tuple(image.shape) != tuple(spec.input_hwc):
        raise ShapeMismatchError(f"expected an image of shape {spec.input_hwc}, got {image.shape}")
    w = weights or cnn_weights(spec)
    if mapping == "analog" and tiles is None:
        tiles = cnn_tiles(spec, w)
    q = image
    for sh in spec.shapes():
        layer = sh.layer
        patches = im2col(q, layer.size, layer.stride, layer.pad)
        if mapping == "analog":
            tile = tiles[sh.index]
            out = np.stack([_run_tile(tile, p, 0, 0, sh.cols) for p in patches])
        else:
            out = digital_mvm(patches, w.convs[sh.index], sh.shift)
        ho, wo, co = sh.conv_hwc
        a = torch.relu(_fp32(out, out_scale(ACT_SCALE, sh.shift))).reshape(ho, wo, co).permute(2, 0, 1)
        if layer.pool > 1:
            a = F.max_pool2d(a.unsqueeze(0), kernel_size=layer.pool, stride=layer.pool)[0]
        if layer.lrn:
            a = F.local_response_norm(a.unsqueeze(0), LRN_SIZE, alpha=LRN_ALPHA, beta=LRN_BETA, k=LRN_K)[0]
        q = _q8(a.permute(1, 2, 0).contiguous())
    v = q.reshape(-1)
    for k, wd in enumerate(w.dense):
        shift = spec.dense_shift_for(wd.shape[0])
        z = _fp32(digital_mvm(v, wd, shift), out_scale(ACT_SCALE, shift))
        if k == len(w.dense) - 1:
            return torch.softmax(z, dim=0).numpy()
        v = _q8(torch.relu(z))
    raise ShapeMismatchError("a CNN needs at least one dense layer")


def golden_forward(spec: Union[MlpSpec, LstmSpec, CnnSpec], inputs: np.ndarray, mapping: Mapping = "digital") -> np.ndarray:
    """Functional forward pass; CNN inputs may be one image or a batch of images."""
    if isinstance(spec, MlpSpec):
        return mlp_forward(spec, inputs, mapping)
    if isinstance(spec, LstmSpec):
        return lstm_forward(spec, inputs, mapping)
    w = cnn_weights(spec)
    images = np.asarray(inputs, dtype=np.int8)
    if images.ndim == 3:
        return cnn_forward(spec, images, mapping, w)
    tiles = cnn_tiles(spec, w) if mapping == "analog" else None
    return np.stack([cnn_forward(spec, img, mapping, w, tiles) for img in images])
