"""Trace logs, timing diagrams, latency extraction, deadline checks.

Log format (bit-exact):

    # tlm-forge-trace v1
    instance,activation,start_ps,end_ps,txn_id,status
    Brake,0,0,16000,0,OK

Rows are sorted by (start, instance, activation); times are stored in
picoseconds and displayed in nanoseconds.  The SVG diagram draws one lane
per instance with a green marker at each activation's start and a red one
at its end.
"""

from __future__ import annotations

from dataclasses import dataclass

from .diagnostics import IDENTIFIER_RE
from .payload import ResponseStatus
from .simtime import U64_MAX, format_ns

TRACE_HEADER = "# tlm-forge-trace v1"
TRACE_COLUMNS = "instance,activation,start_ps,end_ps,txn_id,status"


class TraceSyntaxError(ValueError):
    """Malformed trace text; carries the offending 1-based line number."""

    code = "E-TRACE-SYNTAX"

    def __init__(self, message: str, line: int):
        super().__init__(f"E-TRACE-SYNTAX line {line}: {message}")
        self.line = line


class UnknownInstanceError(KeyError):
    """A query named an instance that never appears in the trace."""

    code = "E-NO-INSTANCE"

    def __init__(self, instance: str):
        super().__init__(instance)
        self.instance = instance

    def __str__(self) -> str:
        return f"E-NO-INSTANCE: no trace records for instance '{self.instance}'"


@dataclass(frozen=True)
class TraceRecord:
    """One activation of one instance: when it started and when it ended."""

    instance: str
    activation: int
    start: int
    end: int
    txn_id: int
    status: ResponseStatus


def _sort_key(r: TraceRecord) -> tuple[int, str, int]:
    return (r.start, r.instance, r.activation)


def _check_record(r: TraceRecord) -> None:
    if not IDENTIFIER_RE.match(r.instance):
        raise ValueError(f"instance name {r.instance!r} is not a valid identifier")
    if r.activation < 0:
        raise ValueError(f"activation must be non-negative, got {r.activation}")
    if not (0 <= r.start <= U64_MAX and 0 <= r.end <= U64_MAX):
        raise ValueError(f"times out of 64-bit range in {r}")
    if r.start > r.end:
        raise ValueError(f"start {r.start} exceeds end {r.end} for '{r.instance}'")
    if not (0 <= r.txn_id <= U64_MAX):
        raise ValueError(f"txn_id out of 64-bit range in {r}")
    if not isinstance(r.status, ResponseStatus) or not r.status.is_terminal:
        raise ValueError(f"trace status must be terminal, got {r.status!r}")


def write_trace(records: list[TraceRecord]) -> str:
    """Serialize records to the canonical log text (sorted, LF line endings)."""
    seen: set[tuple[str, int]] = set()
    for r in records:
        _check_record(r)
        key = (r.instance, r.activation)
        if key in seen:
            raise ValueError(f"duplicate record for {key}")
        seen.add(key)
    lines = [TRACE_HEADER, TRACE_COLUMNS]
    for r in sorted(records, key=_sort_key):
        lines.append(f"{r.instance},{r.activation},{r.start},{r.end},{r.txn_id},{r.status.value}")
    return "\n".join(lines) + "\n"


def parse_trace(text: str) -> list[TraceRecord]:
    """Parse log text back into records; raises TraceSyntaxError on bad input."""
    lines = text.splitlines()
    if not lines or lines[0] != TRACE_HEADER:
        raise TraceSyntaxError(f"expected header {TRACE_HEADER!r}", 1)
    if len(lines) < 2 or lines[1] != TRACE_COLUMNS:
        raise TraceSyntaxError(f"expected column line {TRACE_COLUMNS!r}", 2)
    records: list[TraceRecord] = []
    seen: set[tuple[str, int]] = set()
    for lineno, line in enumerate(lines[2:], start=3):
        fields = line.split(",")
        if len(fields) != 6:
            raise TraceSyntaxError(f"expected 6 comma-separated fields, got {len(fields)}", lineno)
        instance, activation_s, start_s, end_s, txn_s, status_s = fields
        if not IDENTIFIER_RE.match(instance):
            raise TraceSyntaxError(f"bad instance name {instance!r}", lineno)
        try:
            activation, start, end, txn = int(activation_s), int(start_s), int(end_s), int(txn_s)
        except ValueError:
            raise TraceSyntaxError("activation, times and txn_id must be integers", lineno) from None
        try:
            status = ResponseStatus(status_s)
        except ValueError:
            raise TraceSyntaxError(f"unknown status {status_s!r}", lineno) from None
        record = TraceRecord(instance, activation, start, end, txn, status)
        try:
            _check_record(record)
        except ValueError as exc:
            raise TraceSyntaxError(str(exc), lineno) from None
        key = (instance, activation)
        if key in seen:
            raise TraceSyntaxError(f"duplicate record for {key}", lineno)
        seen.add(key)
        records.append(record)
    return records


def end_to_end_latency(records: list[TraceRecord], instance: str) -> int:
    """Last end minus first start over the instance's activations."""
    mine = [r for r in records if r.instance == instance]
    if not mine:
        raise UnknownInstanceError(instance)
    return max(r.end for r in mine) - min(r.start for r in mine)


# --------------------------------------------------------------------------
# Deadline constraints

@dataclass(frozen=True)
class ConstraintCheck:
    instance: str
    deadline_ps: int
    measured_ps: int | None
    passed: bool
    reason: str = ""

    def __str__(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        if self.measured_ps is None:
            return f"{verdict} {self.instance}: {self.reason}"
        rel = "<=" if self.passed else ">"
        return (f"{verdict} {self.instance}: end {self.measured_ps} ps "
                f"{rel} deadline {self.deadline_ps} ps")


@dataclass(frozen=True)
class ConstraintReport:
    checks: tuple[ConstraintCheck, ...]
    passed: bool


def check_constraints(records: list[TraceRecord], constraints) -> ConstraintReport:
    """PASS each constraint iff the instance's final end meets its deadline.

    An unknown instance fails its constraint with reason E-NO-INSTANCE.
    An empty constraint list passes vacuously.
    """
    checks: list[ConstraintCheck] = []
    for c in constraints:
        mine = [r.end for r in records if r.instance == c.instance]
        if not mine:
            checks.append(ConstraintCheck(
                c.instance, c.max_end_ps, None, False,
                reason=f"E-NO-INSTANCE: no trace records for '{c.instance}'"))
            continue
        measured = max(mine)
        checks.append(ConstraintCheck(c.instance, c.max_end_ps, measured,
                                      measured <= c.max_end_ps))
    return ConstraintReport(tuple(checks), all(c.passed for c in checks))


# --------------------------------------------------------------------------
# Rendering

_LABEL_W = 150
_PLOT_W = 600
_MARGIN = 20
_LANE_H = 26
_BAR_H = 8
_AXIS_H = 46


def _tick_step(span_ps: int) -> int:
    scale = 1
    while True:
        for mult in (1, 2, 5):
            if span_ps // (mult * scale) <= 8:
                return mult * scale
        scale *= 10


def _lanes(records: list[TraceRecord]) -> list[str]:
    """Lane order: first start time, then name (same order as sorted rows)."""
    first: dict[str, int] = {}
    for r in records:
        if r.instance not in first or r.start < first[r.instance]:
            first[r.instance] = r.start
    return sorted(first, key=lambda name: (first[name], name))


def render_svg(records: list[TraceRecord]) -> str:
    """Deterministic SVG 1.1 timing diagram.

    One lane per instance; per activation a bar, a green start marker and
    a red end marker.  The axis is labeled in nanoseconds.  Identical
    traces produce byte-identical output.
    """
    rows = sorted(records, key=_sort_key)
    lanes = _lanes(rows)
    lane_index = {name: i for i, name in enumerate(lanes)}
    t_max = max((r.end for r in rows), default=0)
    span = max(t_max, 1)

    width = _LABEL_W + _PLOT_W + _MARGIN
    height = _MARGIN + max(len(lanes), 1) * _LANE_H + _AXIS_H

    def x(t: int) -> str:
        return f"{_LABEL_W + t * _PLOT_W / span:.2f}"

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{width}" height="{height}" viewBox="0 0 {width} {height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
    ]
    for name in lanes:
        mid = _MARGIN + lane_index[name] * _LANE_H + _LANE_H // 2
        out.append(f'<text x="8" y="{mid + 4}" font-family="monospace" font-size="12" '
                   f'fill="black">{name}</text>')
    for r in rows:
        mid = _MARGIN + lane_index[r.instance] * _LANE_H + _LANE_H // 2
        bar_w = (r.end - r.start) * _PLOT_W / span
        out.append(f'<rect x="{x(r.start)}" y="{mid - _BAR_H // 2}" width="{bar_w:.2f}" '
                   f'height="{_BAR_H}" fill="#7a9cc6"/>')
        out.append(f'<circle cx="{x(r.start)}" cy="{mid}" r="3.5" fill="green"/>')
        out.append(f'<circle cx="{x(r.end)}" cy="{mid}" r="3.5" fill="red"/>')

    axis_y = _MARGIN + max(len(lanes), 1) * _LANE_H + 12
    out.append(f'<line x1="{_LABEL_W}" y1="{axis_y}" x2="{_LABEL_W + _PLOT_W}" y2="{axis_y}" '
               f'stroke="black" stroke-width="1"/>')
    step = _tick_step(span)
    for t in range(0, span + 1, step):
        out.append(f'<line x1="{x(t)}" y1="{axis_y}" x2="{x(t)}" y2="{axis_y + 5}" '
                   f'stroke="black" stroke-width="1"/>')
        out.append(f'<text x="{x(t)}" y="{axis_y + 18}" font-family="monospace" font-size="10" '
                   f'fill="black" text-anchor="middle">{format_ns(t)}</text>')
    out.append(f'<text x="{_LABEL_W + _PLOT_W}" y="{axis_y + 32}" font-family="monospace" '
               f'font-size="10" fill="black" text-anchor="end">time [ns]</text>')
    out.append('</svg>')
    return "\n".join(out) + "\n"


def render_text(records: list[TraceRecord], width: int = 60) -> str:
    """Plain-text chart: one line per record, integer-only column math."""
    rows = sorted(records, key=_sort_key)
    t_max = max((r.end for r in rows), default=0)
    span = max(t_max, 1)
    name_w = max([len(f"{r.instance} #{r.activation}") for r in rows], default=8)
    lines = [f"# timing 0 .. {format_ns(t_max)} ns"]
    for r in rows:
        s_col = r.start * (width - 1) // span
        e_col = r.end * (width - 1) // span
        bar = [" "] * width
        for col in range(s_col + 1, e_col):
            bar[col] = "="
        if s_col == e_col:
            bar[s_col] = "#"
        else:
            bar[s_col] = "o"
            bar[e_col] = "x"
        label = f"{r.instance} #{r.activation}"
        lines.append(f"{label:<{name_w}} |{''.join(bar)}| "
                     f"{format_ns(r.start)} .. {format_ns(r.end)} ns")
    return "\n".join(lines) + "\n"
