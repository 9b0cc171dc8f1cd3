from app.isa.instructions import FIELDS, OPCODES, WORD_BITS, CmInstruction, CmOp, decode, encode
from app.isa.dispatch import DEQUEUE_FAULT_FLAG, execute, tile_for
from app.isa.trace import (
    TraceRecord,
    format_trace_line,
    parse_trace,
    parse_trace_text,
    read_trace,
    render_trace,
)

__all__ = [
    "FIELDS", "OPCODES", "WORD_BITS", "CmInstruction", "CmOp", "decode", "encode",
    "DEQUEUE_FAULT_FLAG", "execute", "tile_for",
    "TraceRecord", "format_trace_line", "parse_trace", "parse_trace_text", "read_trace",
    "render_trace",
]
