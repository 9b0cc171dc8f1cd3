from pydantic import BaseModel, ConfigDict, Field


class CostModel(BaseModel):
    """
    Per-element software costs of the inference kernels.

    ``*_scalar`` values are scalar instructions, ``*_fp32`` values are fp32 vector
    lane-ops (issued fp32_lanes wide), ``*_int8`` values are int8 SIMD lane-ops.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    quant_fp32: int = Field(default=1, ge=0, description="scale + round of one activation before queueing")
    dequant_fp32: int = Field(default=1, ge=0)
    pack_scalar: int = Field(default=3, ge=0, description="insert one int8 lane into a 32-bit word")
    unpack_scalar: int = Field(default=3, ge=0)
    loop_scalar: int = Field(default=1, ge=0, description="loop overhead per transferred word")
    saturate_int8: int = Field(default=2, ge=0, description="shift + clamp of a digital accumulator")
    relu_fp32: int = Field(default=1, ge=0)
    sigmoid_fp32: int = Field(default=8, ge=0)
    tanh_fp32: int = Field(default=8, ge=0)
    exp_fp32: int = Field(default=8, ge=0)
    lrn_fp32: int = Field(default=18, ge=0)

    def mlp_activation_fp32(self) -> int:
        return self.dequant_fp32 + self.relu_fp32

    def conv_activation_fp32(self) -> int:
        return self.dequant_fp32 + self.relu_fp32 + self.quant_fp32

    def lstm_cell_fp32(self) -> int:
        """One hidden unit: dequantize 4 gates, 3 sigmoids + 1 tanh, c = f*c + i*a, h = o * tanh(c)."""
        return 4 * self.dequant_fp32 + 3 * self.sigmoid_fp32 + self.tanh_fp32 + 3 + self.tanh_fp32 + 1

    def softmax_fp32(self) -> int:
        """Per output: dequantize, exp, running sum and the final division."""
        return self.dequant_fp32 + self.exp_fp32 + 2


DEFAULT_COSTS = CostModel()
