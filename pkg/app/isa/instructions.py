from enum import Enum

from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.errors import DecodeError


class CmOp(str, Enum):
    QUEUE = "QUEUE"
    DEQUEUE = "DEQUEUE"
    PROCESS = "PROCESS"
    INITIALIZE = "INITIALIZE"


OPCODES: dict[CmOp, int] = {
    CmOp.QUEUE: 0x108,
    CmOp.DEQUEUE: 0x108,
    CmOp.PROCESS: 0x008,
    CmOp.INITIALIZE: 0x208,
}

# Fixed read/write flag per op; queue and dequeue share an opcode and differ only here.
RW_FLAG: dict[CmOp, int] = {
    CmOp.QUEUE: 1,
    CmOp.DEQUEUE: 0,
    CmOp.PROCESS: 0,
    CmOp.INITIALIZE: 1,
}

# (shift, width) of each field in the 128-bit word, most significant first:
# [opcode:12][rw:1][reserved:14][rm:32][ra:32][rn:32][rd:5]
# Every register operand keeps its full 32 bits, so packed data words travel in rm.
FIELDS: dict[str, tuple[int, int]] = {
    "opcode": (116, 12),
    "rw": (115, 1),
    "reserved": (101, 14),
    "rm": (69, 32),
    "ra": (37, 32),
    "rn": (5, 32),
    "rd": (0, 5),
}

WORD_BITS = 128

U32 = Field(default=0, ge=0, lt=1 << 32)


class CmInstruction(BaseModel):
    """
    One CM_* instruction with its operand values.

    rm carries packed data (queue / initialize), ra the valid-lane count,
    rn the input/output memory index or the linear crossbar address
    (row * cols + col) for initialize, rd the destination register.
    """

    model_config = ConfigDict(frozen=True)

    op: CmOp
    rm: int = U32
    rw: int = Field(default=-1, ge=-1, le=1)
    ra: int = U32
    rn: int = U32
    rd: int = Field(default=0, ge=0, lt=32)

    @model_validator(mode="before")
    @classmethod
    def _default_rw(cls, data):
        if isinstance(data, dict) and data.get("rw", -1) == -1 and "op" in data:
            data = {**data, "rw": RW_FLAG[CmOp(data["op"])]}
        return data

    @model_validator(mode="after")
    def _rw_matches_op(self) -> "CmInstruction":
        if self.rw != RW_FLAG[self.op]:
            raise ValueError(f"CM_{self.op.value} requires rw={RW_FLAG[self.op]}, got {self.rw}")
        return self

    @property
    def opcode(self) -> int:
        return OPCODES[self.op]


def encode(instr: CmInstruction) -> int:
    """Pack an instruction into its 128-bit word."""
    values = {"opcode": instr.opcode, "rw": instr.rw, "reserved": 0,
              "rm": instr.rm, "ra": instr.ra, "rn": instr.rn, "rd": instr.rd}
    word = 0
    for name, (shift, _) in FIELDS.items():
        word |= values[name] << shift
    return word


def decode(word: int) -> CmInstruction:
    if not 0 <= word < 1 << WORD_BITS:
        raise DecodeError(f"0x{word:x} is not a {WORD_BITS}-bit word")
    f = {name: (word >> shift) & ((1 << width) - 1) for name, (shift, width) in FIELDS.items()}
    if f["reserved"]:
        raise DecodeError(f"reserved bits set in 0x{word:032x}")
    ops = [op for op, code in OPCODES.items() if code == f["opcode"] and RW_FLAG[op] == f["rw"]]
    if not ops:
        raise DecodeError(f"unknown opcode 0x{f['opcode']:03x} (rw={f['rw']}) in 0x{word:032x}")
    return CmInstruction(op=ops[0], rm=f["rm"], rw=f["rw"], ra=f["ra"], rn=f["rn"], rd=f["rd"])
