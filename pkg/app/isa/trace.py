"""
Text traces of CM_* instruction streams.

One instruction per line::

    CM_QUEUE core=1 rm=0x04030201 ra=4 rn=0 rd=5

``#`` starts a comment. A ``# spec: {...}`` comment line carries the JSON
experiment spec a trace was recorded from, so the run can be rebuilt.
"""
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Union

from pydantic import ValidationError

from app.errors import TraceParseError
from app.isa.instructions import CmInstruction, CmOp

SPEC_PREFIX = "# spec:"

_LINE_RE = re.compile(
    r"^CM_(?P<op>[A-Z]+)\s+core=(?P<core>\d+)\s+rm=(?P<rm>0[xX][0-9a-fA-F]+)"
    r"\s+ra=(?P<ra>\d+)\s+rn=(?P<rn>\d+)\s+rd=(?P<rd>\d+)$"
)


@dataclass(frozen=True)
class TraceRecord:
    core: int
    instr: CmInstruction


def format_trace_line(rec: TraceRecord) -> str:
    i = rec.instr
    return f"CM_{i.op.value} core={rec.core} rm=0x{i.rm:08x} ra={i.ra} rn={i.rn} rd={i.rd}"


def parse_trace(line: str, line_no: Optional[int] = None) -> Optional[TraceRecord]:
    """Parse one trace line; blank and comment-only lines give None."""
    text = line.split("#", 1)[0].strip()
    if not text:
        return None
    m = _LINE_RE.match(text)
    if m is None:
        raise TraceParseError(f"malformed trace line {text!r}", line_no)
    try:
        op = CmOp(m["op"])
    except ValueError:
        raise TraceParseError(f"unknown instruction CM_{m['op']}", line_no) from None
    try:
        instr = CmInstruction(op=op, rm=int(m["rm"], 16), ra=int(m["ra"]), rn=int(m["rn"]), rd=int(m["rd"]))
    except ValidationError as e:
        raise TraceParseError(f"invalid operands: {e.errors()[0]['msg']}", line_no) from None
    return TraceRecord(int(m["core"]), instr)


def parse_trace_text(text: str) -> tuple[Optional[str], list[TraceRecord]]:
    """Returns the embedded spec JSON (if any) and the instruction records."""
    spec_json = None
    records = []
    for no, line in enumerate(text.splitlines(), start=1):
        if line.startswith(SPEC_PREFIX) and spec_json is None:
            spec_json = line[len(SPEC_PREFIX):].strip()
            continue
        rec = parse_trace(line, no)
        if rec is not None:
            records.append(rec)
    return spec_json, records


def read_trace(path: Union[str, Path]) -> tuple[Optional[str], list[TraceRecord]]:
    return parse_trace_text(Path(path).read_text(encoding="utf-8"))


def render_trace(records: Iterable[TraceRecord], spec_json: Optional[str] = None) -> str:
    lines = []
    if spec_json is not None:
        lines.append(f"{SPEC_PREFIX} {spec_json}")
    lines.extend(format_trace_line(r) for r in records)
    return "\n".join(lines) + "\n"

