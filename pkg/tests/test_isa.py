import pytest
from pydantic import ValidationError

from app.aimc import AimcTile, TileStatus, pack4, unpack4
from app.errors import DecodeError, MachineFault
from app.isa import FIELDS, CmInstruction, CmOp, DEQUEUE_FAULT_FLAG, WORD_BITS, decode, encode, execute, tile_for


@pytest.mark.parametrize(
    "instr",
    [
        CmInstruction(op=CmOp.QUEUE, rm=0x04030201, ra=4, rn=12, rd=5),
        CmInstruction(op=CmOp.DEQUEUE, ra=3, rn=1020, rd=31),
        CmInstruction(op=CmOp.PROCESS),
        CmInstruction(op=CmOp.INITIALIZE, rm=0x7FFF, ra=1, rn=(1 << 15) - 1),
        CmInstruction(op=CmOp.QUEUE, rm=0xFFFFFFFF, ra=(1 << 32) - 1, rn=(1 << 32) - 1, rd=31),
        CmInstruction(op=CmOp.INITIALIZE, rm=0x80FF7F01, ra=4, rn=1 << 20),
    ],
)
def test_round_trip(instr):
    assert decode(encode(instr)) == instr


def test_rw_defaults_per_op():
    assert CmInstruction(op=CmOp.QUEUE).rw == 1
    assert CmInstruction(op=CmOp.DEQUEUE).rw == 0
    assert CmInstruction(op=CmOp.INITIALIZE).rw == 1


def test_wrong_rw_is_rejected():
    with pytest.raises(ValidationError):
        CmInstruction(op=CmOp.PROCESS, rw=1)


def test_queue_and_dequeue_differ_only_in_rw():
    q = encode(CmInstruction(op=CmOp.QUEUE))
    d = encode(CmInstruction(op=CmOp.DEQUEUE))
    assert q ^ d == 1 << FIELDS["rw"][0]


def test_fields_tile_the_word():
    spans = sorted(FIELDS.values())
    assert spans[0][0] == 0
    for (shift, width), (nxt, _) in zip(spans, spans[1:]):
        assert shift + width == nxt
    assert sum(w for _, w in FIELDS.values()) == WORD_BITS
    assert all(FIELDS[name][1] == 32 for name in ("rm", "ra", "rn"))


def test_data_word_survives_encoding():
    word = pack4([1, 2, 3, 4])
    assert word == 0x04030201
    assert decode(encode(CmInstruction(op=CmOp.QUEUE, rm=word, ra=4))).rm == word


def test_operands_wider_than_32_bits_are_rejected():
    with pytest.raises(ValidationError):
        CmInstruction(op=CmOp.QUEUE, rm=1 << 32, ra=4)


@pytest.mark.parametrize(
    "word",
    [
        -1,
        1 << WORD_BITS,
        encode(CmInstruction(op=CmOp.PROCESS)) | (1 << FIELDS["reserved"][0]),
        0xFFF << FIELDS["opcode"][0],
    ],
)
def test_decode_errors(word):
    with pytest.raises(DecodeError):
        decode(word)


def test_execute_queue_process_dequeue(small_tile):
    tiles = {3: small_tile}
    word = pack4([7, -7, 1, 0])
    assert execute(CmInstruction(op=CmOp.QUEUE, rm=word, ra=4, rn=0), 3, tiles) == TileStatus.OK
    assert execute(CmInstruction(op=CmOp.PROCESS), 3, tiles) == TileStatus.OK
    out = execute(CmInstruction(op=CmOp.DEQUEUE, ra=4, rn=0), 3, tiles)
    assert unpack4(out) == [7, -7, 1, 0]


def test_execute_initialize_uses_linear_address(small_tile):
    rn = 2 * small_tile.cols + 4
    assert execute(CmInstruction(op=CmOp.INITIALIZE, rm=pack4([5, 6]), ra=2, rn=rn), 0, {0: small_tile}) == 0
    assert small_tile.xbar.weights[2, 4:6].tolist() == [5, 6]


def test_dequeue_fault_sets_flag(small_tile):
    out = execute(CmInstruction(op=CmOp.DEQUEUE, ra=4, rn=7), 0, {0: small_tile})
    assert out & DEQUEUE_FAULT_FLAG
    assert out & 0xFF == TileStatus.OUT_OF_RANGE
    assert small_tile.faults == 1


def test_tile_for():
    tile = AimcTile(4, 4)
    assert tile_for(2, {4: tile}, {2: 4}) is tile
    with pytest.raises(MachineFault):
        tile_for(1, {0: tile})

