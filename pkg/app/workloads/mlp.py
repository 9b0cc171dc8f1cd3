"""
MLP mappings.

case 1: one core, one 2n x 2n tile holding both layers on its diagonal; the
        inferences are software pipelined so one process serves layer 1 of
        inference i and layer 2 of inference i-1.
case 2: one core, one n x 2n tile with the layers side by side; two processes
        per inference.
case 3: two cores, one layer each, mutex handoff of the hidden activations.
case 4: four cores; each layer is split into column halves over two cores.
        Core 0 loads the input and hands it to core 1; both halves of the
        hidden layer are handed to both layer-2 cores.

Digital references keep the core structure and replace each tile MVM by a
streamed weight read plus int8 multiply-accumulates.
"""
from typing import Optional

import numpy as np

from app.aimc.qpack import pack_words
from app.machine.config import SystemConfig
from app.machine.program import MemoryMap, SubRoi, Workload
from app.workloads.builder import ProgramBuilder
from app.workloads.costs import DEFAULT_COSTS, CostModel
from app.workloads.golden import mlp_hidden, mlp_tiles, mlp_weights
from app.workloads.specs import Mapping, MlpSpec


def _mvm(b: ProgramBuilder, mapping: Mapping, weights: str, rows: int, cols: int,
         packed: bool, data: Optional[tuple[int, ...]] = None) -> None:
    """One layer MVM from an input vector to int8 outputs; ``packed`` inputs are already int8 in memory."""
    if mapping == "analog":
        if packed:
            b.queue_int8(rows, 0, data)
        else:
            b.queue_fp32(rows, 0)
        b.process()
        b.dequeue(cols, 0)
    else:
        if not packed:
            b.activation(fp32=rows * b.costs.quant_fp32)
        b.digital_mvm(weights, rows, cols)
        b.saturate(cols)


def _words(values: Optional[np.ndarray], i: int) -> Optional[tuple[int, ...]]:
    return tuple(pack_words(values[i])) if values is not None else None


def build_mlp(spec: MlpSpec, mapping: Mapping, cfg: SystemConfig, costs: CostModel = DEFAULT_COSTS,
              inputs: Optional[np.ndarray] = None) -> Workload:
    n, N = spec.n, spec.n_inferences
    c = costs
    act = n * c.mlp_activation_fp32()
    mem = MemoryMap(cfg.line_size)
    mem.add("x", N * n)
    mem.add("y", N * n)
    channels: dict[str, int] = {}
    # layer-1 activations as queued into the layer-2 rows
    hidden = mlp_hidden(spec, inputs) if inputs is not None and mapping == "analog" else None

    if spec.case in (1, 2):
        b = ProgramBuilder(0, c, "mlp")
        if mapping == "digital":
            mem.add("w1", n * n)
            mem.add("w2", n * n)
            for i in range(N):
                b.load("x", i * n, n)
                _mvm(b, mapping, "w1", n, n, True)
                b.activation(fp32=act)
                _mvm(b, mapping, "w2", n, n, False)
                b.activation(fp32=act + n * c.quant_fp32)
                b.store("y", i * n, n)
        elif spec.case == 1:
            for i in range(N + 1):
                if i < N:
                    b.load("x", i * n, n)
                    b.queue_int8(n, 0, _words(inputs, i))
                if i > 0:
                    b.queue_fp32(n, n, _words(hidden, i - 1))
                b.process()
                if i < N:
                    b.dequeue(n, 0)
                    b.activation(fp32=act)
                if i > 0:
                    b.dequeue(n, n)
                    b.activation(fp32=act + n * c.quant_fp32)
                    b.store("y", (i - 1) * n, n)
        else:
            for i in range(N):
                b.load("x", i * n, n)
                b.queue_int8(n, 0, _words(inputs, i))
                b.process()
                b.dequeue(n, 0)
                b.activation(fp32=act)
                b.queue_fp32(n, 0, _words(hidden, i))
                b.process()
                b.dequeue(n, n)
                b.activation(fp32=act + n * c.quant_fp32)
                b.store("y", i * n, n)
        programs = [b.build()]

    elif spec.case == 3:
        if mapping == "digital":
            mem.add("w1", n * n)
            mem.add("w2", n * n)
        mem.add("l1_buf", n, shared=True)
        channels.update(l1_ready=1, l1_ack=1)
        b0, b1 = ProgramBuilder(0, c, "layer1"), ProgramBuilder(1, c, "layer2")
        for i in range(N):
            b0.load("x", i * n, n)
            _mvm(b0, mapping, "w1", n, n, True, _words(inputs, i))
            b0.activation(fp32=act + n * c.quant_fp32)
            b0.send("l1_buf", 0, n, "l1_ready", "l1_ack")

            b1.receive("l1_buf", 0, n, "l1_ready", "l1_ack")
            _mvm(b1, mapping, "w2", n, n, True, _words(hidden, i))
            b1.activation(fp32=act + n * c.quant_fp32)
            b1.store("y", i * n, n)
        programs = [b0.build(), b1.build()]

    else:
        h = n // 2
        widths = (h, n - h)
        if mapping == "digital":
            for name, w in (("w1a", h), ("w1b", n - h), ("w2a", h), ("w2b", n - h)):
                mem.add(name, n * w)
        mem.add("x_buf", n, shared=True)
        mem.add("l1_a", h, shared=True)
        mem.add("l1_b", n - h, shared=True)
        channels.update(x_ready=1, x_ack=1)
        for half in ("a", "b"):
            for dst in (2, 3):
                channels[f"l1{half}_ready{dst}"] = 1
                channels[f"l1{half}_ack{dst}"] = 1
        bs = [ProgramBuilder(k, c, f"layer{1 + k // 2}{'ab'[k % 2]}") for k in range(4)]
        for i in range(N):
            bs[0].load("x", i * n, n)
            bs[0].send("x_buf", 0, n, "x_ready", "x_ack")
            bs[1].receive("x_buf", 0, n, "x_ready", "x_ack")
            for k, half in ((0, "a"), (1, "b")):
                b = bs[k]
                _mvm(b, mapping, f"w1{half}", n, widths[k], True, _words(inputs, i))
                b.activation(fp32=widths[k] * (c.mlp_activation_fp32() + c.quant_fp32))
                b.store(f"l1_{half}", 0, widths[k], tag=SubRoi.SYNC)
                for dst in (2, 3):
                    b.signal(f"l1{half}_ready{dst}")
                for dst in (2, 3):
                    b.wait(f"l1{half}_ack{dst}")
            for k, half in ((2, "a"), (3, "b")):
                b = bs[k]
                for src, w in (("a", h), ("b", n - h)):
                    b.wait(f"l1{src}_ready{k}")
                    b.load(f"l1_{src}", 0, w, tag=SubRoi.SYNC)
                    b.signal(f"l1{src}_ack{k}")
                _mvm(b, mapping, f"w2{half}", n, widths[k - 2], True, _words(hidden, i))
                b.activation(fp32=widths[k - 2] * (c.mlp_activation_fp32() + c.quant_fp32))
                b.store("y", i * n + (0 if k == 2 else h), widths[k - 2])
        programs = [b.build() for b in bs]

    tiles, dims = {}, {}
    if mapping == "analog":
        tiles = mlp_tiles(spec, mlp_weights(spec))
        dims = spec.tile_dims
    return Workload(f"mlp-n{n}-case{spec.case}-{mapping}", programs, mem, channels, tiles, dims)
