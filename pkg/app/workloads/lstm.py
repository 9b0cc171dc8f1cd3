"""
LSTM mappings: one cell layer of n_h units plus a dense softmax layer.

case 1: one core, one tile holding the gate block and the dense block on
        disjoint rows and columns; time steps are software pipelined so one
        process computes the gates of step t and the output of step t-1.
case 2: one core, one tile whose dense block shares the h rows; two processes
        per step.
case 3: two cores, the cell on core 0 and the dense layer on core 1.
case 4: five cores; the hidden units are split over cores 0-3, which exchange
        their slice of h through a ping-pong buffer and a barrier, and core 4
        runs the dense layer.
"""
from typing import Optional

import numpy as np

from app.aimc.qpack import pack_words
from app.machine.config import SystemConfig
from app.machine.program import MemoryMap, SubRoi, Workload
from app.workloads.builder import ProgramBuilder
from app.workloads.costs import DEFAULT_COSTS, CostModel
from app.workloads.golden import lstm_hidden, lstm_tiles, lstm_weights
from app.workloads.specs import LstmSpec, Mapping

FP32_BYTES = 4


def _words(values: Optional[np.ndarray], t: int) -> Optional[tuple[int, ...]]:
    """Packed words of row ``t``; row -1 is the zero initial state."""
    if values is None:
        return None
    row = values[t] if t >= 0 else np.zeros(values.shape[1], dtype=np.int8)
    return tuple(pack_words(row))


def _cell(b: ProgramBuilder, units: int) -> None:
    b.activation(fp32=units * b.costs.lstm_cell_fp32())


def _requant(b: ProgramBuilder, units: int) -> None:
    """Quantize and pack h for a store; queue_fp32 covers this when h goes straight to a tile."""
    b.activation(fp32=units * b.costs.quant_fp32, scalar=units * b.costs.pack_scalar)


def _softmax_out(b: ProgramBuilder, spec: LstmSpec, t: int) -> None:
    b.activation(fp32=spec.y * b.costs.softmax_fp32())
    b.store("y", t * spec.y * FP32_BYTES, spec.y * FP32_BYTES)


def _single_core(spec: LstmSpec, mapping: Mapping, b: ProgramBuilder, inputs: Optional[np.ndarray],
                 hs: Optional[np.ndarray]) -> None:
    x, h, y, N = spec.x, spec.n_h, spec.y, spec.n_inferences
    if mapping == "digital":
        for t in range(N):
            b.load("x", t * x, x)
            b.digital_mvm("wg", x + h, 4 * h)
            b.saturate(4 * h)
            _cell(b, h)
            _requant(b, h)
            b.digital_mvm("wd", h, y)
            b.saturate(y)
            _softmax_out(b, spec, t)
    elif spec.case == 1:
        for t in range(N + 1):
            if t < N:
                b.load("x", t * x, x)
                b.queue_int8(x, h, _words(inputs, t))
            if 0 < t < N:
                b.queue_fp32(h, 0, _words(hs, t - 1))
            if t > 0:
                # h of step t-1 also feeds the dense block rows
                if t < N:
                    b.queue_int8(h, x + h, _words(hs, t - 1))
                else:
                    b.queue_fp32(h, x + h, _words(hs, t - 1))
            b.process()
            if t < N:
                b.dequeue(4 * h, 0)
                _cell(b, h)
            if t > 0:
                b.dequeue(y, 4 * h)
                _softmax_out(b, spec, t - 1)
    else:
        for t in range(N):
            b.load("x", t * x, x)
            b.queue_int8(x, h, _words(inputs, t))
            b.process()
            b.dequeue(4 * h, 0)
            _cell(b, h)
            b.queue_fp32(h, 0, _words(hs, t))
            b.process()
            b.dequeue(y, 4 * h)
            _softmax_out(b, spec, t)


def build_lstm(spec: LstmSpec, mapping: Mapping, cfg: SystemConfig, costs: CostModel = DEFAULT_COSTS,
               inputs: Optional[np.ndarray] = None) -> Workload:
    x, h, y, N = spec.x, spec.n_h, spec.y, spec.n_inferences
    c = costs
    mem = MemoryMap(cfg.line_size)
    mem.add("x", N * x)
    mem.add("y", N * y * FP32_BYTES)
    channels: dict[str, int] = {}
    hs = lstm_hidden(spec, inputs) if inputs is not None and mapping == "analog" else None

    if spec.case in (1, 2):
        if mapping == "digital":
            mem.add("wg", (x + h) * 4 * h)
            mem.add("wd", h * y)
        b = ProgramBuilder(0, c, "lstm")
        _single_core(spec, mapping, b, inputs, hs)
        programs = [b.build()]

    elif spec.case == 3:
        if mapping == "digital":
            mem.add("wg", (x + h) * 4 * h)
            mem.add("wd", h * y)
        mem.add("h_buf", h, shared=True)
        channels.update(h_ready=1, h_ack=1)
        b0, b1 = ProgramBuilder(0, c, "cell"), ProgramBuilder(1, c, "dense")
        for t in range(N):
            b0.load("x", t * x, x)
            if mapping == "analog":
                b0.queue_int8(x, h, _words(inputs, t))
                b0.process()
                b0.dequeue(4 * h, 0)
                _cell(b0, h)
                # h_t stays in the tile for step t+1; the packed words are also handed over
                b0.queue_fp32(h, 0, _words(hs, t))
            else:
                b0.digital_mvm("wg", x + h, 4 * h)
                b0.saturate(4 * h)
                _cell(b0, h)
                _requant(b0, h)
            b0.send("h_buf", 0, h, "h_ready", "h_ack")

            b1.receive("h_buf", 0, h, "h_ready", "h_ack")
            if mapping == "analog":
                b1.queue_int8(h, 0, _words(hs, t))
                b1.process()
                b1.dequeue(y, 0)
            else:
                b1.digital_mvm("wd", h, y)
                b1.saturate(y)
            _softmax_out(b1, spec, t)
        programs = [b0.build(), b1.build()]

    else:
        slices = spec.unit_slices()
        parts = len(slices)
        if mapping == "digital":
            for p, units in enumerate(slices):
                mem.add(f"wg{p}", (x + h) * 4 * len(units))
            mem.add("wd", h * y)
        mem.add("h_buf", 2 * h, shared=True)
        for p in range(parts):
            channels[f"hd_ready_{p}"] = 2
            channels[f"hd_ack_{p}"] = 2
            for q in range(parts):
                if q != p:
                    channels[f"hb_{p}_{q}"] = 2
        bs = [ProgramBuilder(p, c, f"cell{p}") for p in range(parts)]
        dense = ProgramBuilder(parts, c, "dense")
        for t in range(N):
            cur, prev = (t % 2) * h, ((t - 1) % 2) * h
            for p, units in enumerate(slices):
                b, u = bs[p], len(units)
                b.load("x", t * x, x)
                if t > 0:
                    b.load("h_buf", prev, h)
                if mapping == "analog":
                    if t > 0:
                        b.queue_int8(h, 0, _words(hs, t - 1))
                    b.queue_int8(x, h, _words(inputs, t))
                    b.process()
                    b.dequeue(4 * u, 0)
                else:
                    b.digital_mvm(f"wg{p}", x + h, 4 * u)
                    b.saturate(4 * u)
                _cell(b, u)
                _requant(b, u)
                if t >= 2:
                    # the dense core must be done with this half of the buffer
                    b.wait(f"hd_ack_{p}")
                b.store("h_buf", cur + units.start, u, tag=SubRoi.SYNC)
                for q in range(parts):
                    if q != p:
                        b.signal(f"hb_{p}_{q}")
                for q in range(parts):
                    if q != p:
                        b.wait(f"hb_{q}_{p}")
                b.signal(f"hd_ready_{p}")

            for p in range(parts):
                dense.wait(f"hd_ready_{p}")
            dense.load("h_buf", cur, h, tag=SubRoi.SYNC)
            if t < N - 2:
                for p in range(parts):
                    dense.signal(f"hd_ack_{p}")
            if mapping == "analog":
                dense.queue_int8(h, 0, _words(hs, t))
                dense.process()
                dense.dequeue(y, 0)
            else:
                dense.digital_mvm("wd", h, y)
                dense.saturate(y)
            _softmax_out(dense, spec, t)
        programs = [b.build() for b in bs] + [dense.build()]

    tiles, dims = {}, {}
    if mapping == "analog":
        tiles = lstm_tiles(spec, lstm_weights(spec))
        dims = spec.tile_dims
    return Workload(f"lstm-h{h}-case{spec.case}-{mapping}", programs, mem, channels, tiles, dims)
