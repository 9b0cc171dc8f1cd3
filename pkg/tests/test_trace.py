import pytest

from app.errors import TraceParseError
from app.isa import (
    CmInstruction,
    CmOp,
    TraceRecord,
    execute,
    format_trace_line,
    parse_trace,
    parse_trace_text,
    read_trace,
    render_trace,
)


def test_format_line():
    rec = TraceRecord(1, CmInstruction(op=CmOp.QUEUE, rm=0x04030201, ra=4, rn=0, rd=5))
    assert format_trace_line(rec) == "CM_QUEUE core=1 rm=0x04030201 ra=4 rn=0 rd=5"


def test_parse_line():
    rec = parse_trace("CM_DEQUEUE core=2 rm=0x00000000 ra=3 rn=8 rd=0   # tail")
    assert rec == TraceRecord(2, CmInstruction(op=CmOp.DEQUEUE, ra=3, rn=8))


@pytest.mark.parametrize("line", ["", "   ", "# only a comment"])
def test_blank_and_comment_lines(line):
    assert parse_trace(line) is None


@pytest.mark.parametrize(
    "line",
    [
        "CM_QUEUE core=1 rm=4 ra=4 rn=0 rd=0",
        "CM_FLUSH core=1 rm=0x0 ra=0 rn=0 rd=0",
        "CM_PROCESS core=0 rm=0x0 ra=0 rn=0 rd=40",
        "queue 1 2 3",
    ],
)
def test_malformed_lines(line):
    with pytest.raises(TraceParseError):
        parse_trace(line, 7)


def test_error_reports_line_number():
    text = "CM_PROCESS core=0 rm=0x00000000 ra=0 rn=0 rd=0\nbogus\n"
    with pytest.raises(TraceParseError) as exc:
        parse_trace_text(text)
    assert exc.value.line_no == 2
    assert "line 2" in str(exc.value)


def test_render_then_read(tmp_path):
    records = [
        TraceRecord(0, CmInstruction(op=CmOp.QUEUE, rm=0x01, ra=1, rn=0)),
        TraceRecord(0, CmInstruction(op=CmOp.PROCESS)),
    ]
    path = tmp_path / "run.trace"
    path.write_text(render_trace(records, '{"model":"mlp"}'), encoding="utf-8")
    spec_json, parsed = read_trace(path)
    assert spec_json == '{"model":"mlp"}'
    assert parsed == records


def test_no_header():
    spec_json, records = parse_trace_text("CM_PROCESS core=0 rm=0x00000000 ra=0 rn=0 rd=0\n")
    assert spec_json is None and len(records) == 1


def test_replay_on_tiles(small_tile):
    records = [
        TraceRecord(0, CmInstruction(op=CmOp.QUEUE, rm=0x0302FF01, ra=4, rn=0)),
        TraceRecord(0, CmInstruction(op=CmOp.PROCESS)),
        TraceRecord(0, CmInstruction(op=CmOp.DEQUEUE, ra=4, rn=0)),
    ]
    rds = [execute(r.instr, r.core, {0: small_tile}) for r in records]
    assert rds == [0, 0, 0x0302FF01]
