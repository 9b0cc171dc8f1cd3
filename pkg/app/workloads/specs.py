import math
from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, PositiveInt, model_validator

Mapping = Literal["analog", "digital"]
Case = Literal[1, 2, 3, 4]


def shift_for_rows(rows: int) -> int:
    return min(31, math.ceil(math.log2(rows))) if rows > 1 else 0


class MlpSpec(BaseModel):
    """Two dense layers of width n, each followed by ReLU."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    n: PositiveInt = 1024
    case: Case = 1
    n_inferences: PositiveInt = 10
    out_shift: Optional[int] = Field(default=None, ge=0, le=31)
    seed: int = 0

    @property
    def shift(self) -> int:
        return shift_for_rows(self.n) if self.out_shift is None else self.out_shift

    @property
    def n_cores(self) -> int:
        return {1: 1, 2: 1, 3: 2, 4: 4}[self.case]

    @property
    def tile_dims(self) -> dict[int, tuple[int, int]]:
        n = self.n
        if self.case == 1:
            return {0: (2 * n, 2 * n)}
        if self.case == 2:
            return {0: (n, 2 * n)}
        if self.case == 3:
            return {0: (n, n), 1: (n, n)}
        h = n // 2
        return {0: (n, h), 1: (n, n - h), 2: (n, h), 3: (n, n - h)}


# rows x cols per case, indexed by hidden size
LSTM_TILE_TABLE: dict[int, dict[int, tuple[int, int]]] = {
    256: {1: (612, 1074), 2: (356, 1074), 3: (356, 1024), 4: (356, 256)},
    512: {1: (1124, 2098), 2: (612, 2098), 3: (612, 2048), 4: (612, 512)},
    750: {1: (1600, 3050), 2: (850, 3050), 3: (850, 3000), 4: (850, 750)},
}


class LstmSpec(BaseModel):
    """One LSTM cell layer of n_h units followed by a dense softmax layer of y outputs."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    x: PositiveInt = 50
    y: PositiveInt = 50
    n_h: PositiveInt = 256
    case: Case = 1
    n_inferences: PositiveInt = 10
    out_shift: Optional[int] = Field(default=None, ge=0, le=31)
    seed: int = 0

    @property
    def shift(self) -> int:
        return shift_for_rows(self.x + self.n_h) if self.out_shift is None else self.out_shift

    @property
    def n_cores(self) -> int:
        return {1: 1, 2: 1, 3: 2, 4: 5}[self.case]

    @property
    def cell_tile(self) -> tuple[int, int]:
        """Tabulated dimensions of the case's main (cell) tile."""
        table = LSTM_TILE_TABLE.get(self.n_h)
        if table is not None and self.x == 50 and self.y == 50:
            return table[self.case]
        x, y, h = self.x, self.y, self.n_h
        return {1: (2 * (x + h), 4 * h + y), 2: (x + h + y, 4 * h + y), 3: (x + h + y, 4 * h), 4: (x + h + y, h)}[self.case]

    @property
    def tile_dims(self) -> dict[int, tuple[int, int]]:
        if self.case in (1, 2):
            return {0: self.cell_tile}
        dense = (self.n_h, self.y)
        if self.case == 3:
            return {0: self.cell_tile, 1: dense}
        return {0: self.cell_tile, 1: self.cell_tile, 2: self.cell_tile, 3: self.cell_tile, 4: dense}

    def unit_slices(self, parts: int = 4) -> list[range]:
        """Split of the hidden units over the cell cores, larger slices first."""
        base, extra = divmod(self.n_h, parts)
        out, start = [], 0
        for p in range(parts):
            size = base + (1 if p < extra else 0)
            out.append(range(start, start + size))
            start += size
        return out


class ConvLayer(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    kernels: PositiveInt
    size: PositiveInt
    stride: PositiveInt = 1
    pad: int = Field(default=0, ge=0)
    # max-pool window and stride; 1 means no pooling
    pool: PositiveInt = 1
    lrn: bool = False
    out_shift: Optional[int] = Field(default=None, ge=0, le=31)


class ConvShape(BaseModel):
    """Derived geometry of one conv layer: input, conv output and pooled output (H, W, C)."""

    index: int
    layer: ConvLayer
    in_hwc: tuple[int, int, int]
    conv_hwc: tuple[int, int, int]
    out_hwc: tuple[int, int, int]

    @property
    def rows(self) -> int:
        return self.layer.size * self.layer.size * self.in_hwc[2]

    @property
    def cols(self) -> int:
        return self.layer.kernels

    @property
    def shift(self) -> int:
        return shift_for_rows(self.rows) if self.layer.out_shift is None else self.layer.out_shift


CNN_VARIANTS: dict[str, list[ConvLayer]] = {
    "F": [
        ConvLayer(kernels=64, size=11, stride=4, pad=0, pool=2, lrn=True),
        ConvLayer(kernels=256, size=5, stride=1, pad=1, pool=2, lrn=True),
        ConvLayer(kernels=256, size=3, stride=1, pad=1),
        ConvLayer(kernels=256, size=3, stride=1, pad=1),
        ConvLayer(kernels=256, size=3, stride=1, pad=1, pool=2),
    ],
    "M": [
        ConvLayer(kernels=96, size=7, stride=2, pad=0, pool=2, lrn=True),
        ConvLayer(kernels=256, size=5, stride=1, pad=1, pool=2, lrn=True),
        ConvLayer(kernels=512, size=3, stride=1, pad=1),
        ConvLayer(kernels=512, size=3, stride=1, pad=1),
        ConvLayer(kernels=512, size=3, stride=1, pad=1, pool=2),
    ],
    "S": [
        ConvLayer(kernels=96, size=7, stride=2, pad=0, pool=3, lrn=True),
        ConvLayer(kernels=256, size=5, stride=1, pad=1, pool=2),
        ConvLayer(kernels=512, size=3, stride=1, pad=1),
        ConvLayer(kernels=512, size=3, stride=1, pad=1),
        ConvLayer(kernels=512, size=3, stride=1, pad=1, pool=3),
    ],
}

CNN_DENSE = (4096, 4096, 1000)


class CnnSpec(BaseModel):
    """Conv stack on AIMC tiles (one core per conv layer) followed by dense layers on the CPU."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    variant: Literal["F", "M", "S", "custom"] = "S"
    input_hwc: tuple[PositiveInt, PositiveInt, PositiveInt] = (224, 224, 3)
    convs: Optional[list[ConvLayer]] = None
    dense: tuple[PositiveInt, ...] = CNN_DENSE
    n_inferences: PositiveInt = 3
    dense_shift: Optional[int] = Field(default=None, ge=0, le=31)
    seed: int = 0

    @model_validator(mode="after")
    def _layers_known(self) -> "CnnSpec":
        if self.variant == "custom" and not self.convs:
            raise ValueError("a custom CNN needs its conv layers")
        self.shapes()
        return self

    @property
    def layers(self) -> list[ConvLayer]:
        return list(self.convs) if self.convs else CNN_VARIANTS[self.variant]

    def shapes(self) -> list[ConvShape]:
        out = []
        h, w, c = self.input_hwc
        for i, layer in enumerate(self.layers):
            ho = (h + 2 * layer.pad - layer.size) // layer.stride + 1
            wo = (w + 2 * layer.pad - layer.size) // layer.stride + 1
            if ho < 1 or wo < 1:
                raise ValueError(f"conv{i + 1}: {layer.size}x{layer.size} kernel does not fit a {h}x{w} input")
            hp, wp = ho // layer.pool, wo // layer.pool
            if hp < 1 or wp < 1:
                raise ValueError(f"conv{i + 1}: x{layer.pool} pool does not fit a {ho}x{wo} map")
            out.append(ConvShape(index=i, layer=layer, in_hwc=(h, w, c), conv_hwc=(ho, wo, layer.kernels),
                                 out_hwc=(hp, wp, layer.kernels)))
            h, w, c = hp, wp, layer.kernels
        return out

    @property
    def flat_features(self) -> int:
        h, w, c = self.shapes()[-1].out_hwc
        return h * w * c

    def dense_dims(self) -> list[tuple[int, int]]:
        dims, prev = [], self.flat_features
        for width in self.dense:
            dims.append((prev, width))
            prev = width
        return dims

    def dense_shift_for(self, rows: int) -> int:
        return shift_for_rows(rows) if self.dense_shift is None else self.dense_shift

    @property
    def n_cores(self) -> int:
        return len(self.layers) + len(self.dense)

    @property
    def tile_dims(self) -> dict[int, tuple[int, int]]:
        return {s.index: (s.rows, s.cols) for s in self.shapes()}
