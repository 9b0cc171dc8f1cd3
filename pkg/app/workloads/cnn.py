"""
CNN mapping: a layer pipeline over cores.

Conv layer l runs on core l (on its tile for the analog mapping, as a streamed
im2col MVM for the digital one) and the dense layers run digitally on the
following cores. Feature maps sit in shared double-buffered regions; the
producer signals one token per finished output row and the consumer waits
until the input rows its next output row needs have arrived. A channel holds
at most one frame of tokens, so a producer never overwrites a frame that is
still being read.

The dense layers run once over the whole batch of frames: the first dense core
copies every flattened frame aside, then each dense layer streams its weights
a single time for all frames.
"""
from typing import Optional

from app.errors import UsageError
from app.machine.config import SystemConfig
from app.machine.program import MemoryMap, SubRoi, Workload
from app.workloads.builder import ProgramBuilder
from app.workloads.costs import DEFAULT_COSTS, CostModel
from app.workloads.golden import cnn_tiles, cnn_weights
from app.workloads.specs import CnnSpec, ConvShape, Mapping

FP32_BYTES = 4


class _RowTokens:
    """Consumer side of a row channel: counts the input rows received for the current frame."""

    def __init__(self, b: ProgramBuilder, channel: Optional[str], rows: int) -> None:
        self.b = b
        self.channel = channel
        self.rows = rows
        self.received = 0

    def need(self, row: int) -> None:
        if self.channel is None:
            return
        while self.received <= min(row, self.rows - 1):
            self.b.wait(self.channel)
            self.received += 1

    def end_frame(self) -> None:
        self.need(self.rows - 1)
        self.received = 0


def _gather(b: ProgramBuilder, src: str, base: int, sh: ConvShape, r: int, col: int) -> None:
    """Read the k_h kernel rows of one output pixel, clipped to the unpadded input."""
    h_in, w_in, c_in = sh.in_hwc
    k, s, pad = sh.layer.size, sh.layer.stride, sh.layer.pad
    x0 = col * s - pad
    lo, hi = max(0, x0), min(w_in, x0 + k)
    if hi <= lo:
        return
    for ky in range(k):
        iy = r * s - pad + ky
        if 0 <= iy < h_in:
            b.load(src, base + (iy * w_in + lo) * c_in, (hi - lo) * c_in)


def _conv_row(b: ProgramBuilder, mapping: Mapping, src: str, base: int, sh: ConvShape, r: int) -> None:
    h_in, w_in, c_in = sh.in_hwc
    _, wo, co = sh.conv_hwc
    act = b.costs.conv_activation_fp32()
    if mapping == "analog":
        for col in range(wo):
            _gather(b, src, base, sh, r, col)
            b.queue_int8(sh.rows, 0)
            b.process()
            b.dequeue(co, 0, unpack=False)
            b.activation(fp32=co * act)
        return
    k, s, pad = sh.layer.size, sh.layer.stride, sh.layer.pad
    for ky in range(k):
        iy = r * s - pad + ky
        if 0 <= iy < h_in:
            b.load(src, base + iy * w_in * c_in, w_in * c_in)
    b.digital_mvm(f"wc{sh.index}", sh.rows, co, repeat=wo)
    b.saturate(wo * co)
    b.activation(fp32=wo * co * act)


def _conv_core(mapping: Mapping, sh: ConvShape, b: ProgramBuilder, n_frames: int) -> None:
    idx = sh.index
    layer = sh.layer
    h_in, w_in, c_in = sh.in_hwc
    ho, wo, co = sh.conv_hwc
    hp, wp, _ = sh.out_hwc
    in_frame, out_frame = h_in * w_in * c_in, hp * wp * co
    src, dst = ("image", f"fm{idx + 1}") if idx == 0 else (f"fm{idx}", f"fm{idx + 1}")
    tokens = _RowTokens(b, None if idx == 0 else f"rows_{idx}", h_in)
    for f in range(n_frames):
        base = f * in_frame if idx == 0 else (f % 2) * in_frame
        out_base = (f % 2) * out_frame
        for r in range(ho):
            tokens.need(r * layer.stride - layer.pad + layer.size - 1)
            _conv_row(b, mapping, src, base, sh, r)
            if layer.pool == 1:
                if layer.lrn:
                    b.activation(fp32=wo * co * b.costs.lrn_fp32)
                b.store(dst, out_base + r * wo * co, wo * co)
                b.signal(f"rows_{idx + 1}")
                continue
            b.store(f"conv{idx}", (r % layer.pool) * wo * co, wo * co)
            p = r // layer.pool
            if r % layer.pool == layer.pool - 1 and p < hp:
                b.load(f"conv{idx}", 0, layer.pool * wo * co, tag=SubRoi.DIGITAL_ACTIVATION)
                b.activation(int8=layer.pool * layer.pool * wp * co)
                if layer.lrn:
                    b.activation(fp32=wp * co * b.costs.lrn_fp32)
                b.store(dst, out_base + p * wp * co, wp * co)
                b.signal(f"rows_{idx + 1}")
        tokens.end_frame()


def build_cnn(spec: CnnSpec, mapping: Mapping, cfg: SystemConfig, costs: CostModel = DEFAULT_COSTS) -> Workload:
    """Layer pipeline of ``spec``. Conv bursts carry no operand data, only their timing and instruction count."""
    shapes = spec.shapes()
    N = spec.n_inferences
    n_conv = len(shapes)
    dims = spec.dense_dims()
    if not dims:
        raise UsageError("a CNN needs at least one dense layer")
    mem = MemoryMap(cfg.line_size)
    h, w, c = spec.input_hwc
    mem.add("image", N * h * w * c)
    channels: dict[str, int] = {}
    for sh in shapes:
        hp, wp, co = sh.out_hwc
        mem.add(f"fm{sh.index + 1}", 2 * hp * wp * co, shared=True)
        channels[f"rows_{sh.index + 1}"] = hp
        if sh.layer.pool > 1:
            mem.add(f"conv{sh.index}", sh.layer.pool * sh.conv_hwc[1] * sh.conv_hwc[2])
        if mapping == "digital":
            mem.add(f"wc{sh.index}", sh.rows * sh.cols)
    for k, (rows, cols) in enumerate(dims):
        mem.add(f"wd{k}", rows * cols)
        if k == 0:
            mem.add("batch", N * rows)
        else:
            mem.add(f"d{k}", N * rows, shared=True)
            channels[f"dense_{k}"] = 1
    mem.add("y", N * dims[-1][1] * FP32_BYTES)

    programs = []
    for sh in shapes:
        b = ProgramBuilder(sh.index, costs, f"conv{sh.index + 1}")
        _conv_core(mapping, sh, b, N)
        programs.append(b.build())

    act = costs.conv_activation_fp32()
    last_rows = shapes[-1].out_hwc[0]
    for k, (rows, cols) in enumerate(dims):
        b = ProgramBuilder(n_conv + k, costs, f"dense{k + 1}")
        if k == 0:
            # copy each flattened frame out of the ping-pong buffer as soon as it is complete
            for f in range(N):
                for _ in range(last_rows):
                    b.wait(f"rows_{n_conv}")
                b.load(f"fm{n_conv}", (f % 2) * rows, rows, tag=SubRoi.SYNC)
                b.store("batch", f * rows, rows, tag=SubRoi.SYNC)
            b.load("batch", 0, N * rows)
        else:
            b.wait(f"dense_{k}")
            b.load(f"d{k}", 0, N * rows, tag=SubRoi.SYNC)
        b.digital_mvm(f"wd{k}", rows, cols, batch=N)
        b.saturate(N * cols)
        if k == len(dims) - 1:
            b.activation(fp32=N * cols * costs.softmax_fp32())
            b.store("y", 0, N * cols * FP32_BYTES)
        else:
            b.activation(fp32=N * cols * act)
            b.store(f"d{k + 1}", 0, N * cols, tag=SubRoi.SYNC)
            b.signal(f"dense_{k + 1}")
        programs.append(b.build())

    tiles, tile_dims = {}, {}
    if mapping == "analog":
        tiles = cnn_tiles(spec, cnn_weights(spec, dense=False))
        tile_dims = spec.tile_dims
    name = spec.variant if spec.variant != "custom" else f"custom{n_conv}"
    return Workload(f"cnn-{name}-{mapping}", programs, mem, channels, tiles, tile_dims)
