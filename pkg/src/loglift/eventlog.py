"""Event logs: in-memory model plus XES and CSV readers and an XES writer.

A log is an ordered list of traces (a multiset: repeated traces appear
repeatedly), a trace is a case id plus an ordered list of events, and an
event is an activity label with an optional lifecycle phase, an optional
timestamp and a free-form attribute map.

The XES support is a pragmatic subset: concept:name, lifecycle:transition
and time:timestamp are interpreted; any other event attribute with key and
value is kept verbatim in the attribute map (as text); nested containers,
global declarations and trace attributes other than concept:name are
ignored. write_xes followed by parse_xes reproduces the in-memory log
exactly.
"""

import csv
import io
from dataclasses import dataclass, field
from datetime import datetime
from xml.etree import ElementTree as ET

from .errors import ConfigError, LogFormatError

START = "start"
COMPLETE = "complete"

_LIFECYCLES = (START, COMPLETE)


@dataclass
class Event:
    activity: str
    lifecycle: str | None = None
    timestamp: datetime | None = None
    attributes: dict[str, str] = field(default_factory=dict)

    def is_complete(self) -> bool:
        """Events without an explicit lifecycle count as completions."""
        return self.lifecycle is None or self.lifecycle == COMPLETE


@dataclass
class Trace:
    case_id: str
    events: list[Event] = field(default_factory=list)

    def activities(self) -> list[str]:
        return [e.activity for e in self.events]

    def __len__(self) -> int:
        return len(self.events)

    def __iter__(self):
        return iter(self.events)


@dataclass
class EventLog:
    traces: list[Trace] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.traces)

    def __iter__(self):
        return iter(self.traces)

    def alphabet(self) -> set[str]:
        return {e.activity for t in self.traces for e in t.events}


def project(trace: Trace, activities) -> Trace:
    """Subsequence of the trace keeping only events over the given activities."""
    acts = set(activities)
    kept = [e for e in trace.events if e.activity in acts]
    return Trace(case_id=trace.case_id, events=kept)


# ---------------------------------------------------------------- XES input

def _strip_ns(tag: str) -> str:
    return tag.rsplit("}", 1)[-1]


def _parse_timestamp(value: str, where: str) -> datetime:
    try:
        return datetime.fromisoformat(value.replace("Z", "+00:00"))
    except ValueError as exc:
        raise LogFormatError(f"{where}: bad timestamp {value!r}") from exc


def parse_xes(source) -> EventLog:
    """Parse XES from bytes, a binary file object or a file path.

    Raises LogFormatError for malformed XML (with line and column) and for
    events that lack a concept:name (naming the offending trace).
    """
    if isinstance(source, bytes):
        stream = io.BytesIO(source)
    elif isinstance(source, str):
        stream = open(source, "rb")
    else:
        stream = source
    try:
        try:
            root = ET.parse(stream).getroot()
        except ET.ParseError as exc:
            line, col = exc.position
            raise LogFormatError(f"malformed XML at line {line}, column {col}: {exc.msg}") from exc
    finally:
        if isinstance(source, str):
            stream.close()

    if _strip_ns(root.tag) != "log":
        raise LogFormatError(f"expected <log> root element, found <{_strip_ns(root.tag)}>")

    log = EventLog()
    for ti, trace_el in enumerate(el for el in root if _strip_ns(el.tag) == "trace"):
        case_id = str(ti)
        events: list[Event] = []
        for child in trace_el:
            tag = _strip_ns(child.tag)
            if tag == "string" and child.get("key") == "concept:name":
                case_id = child.get("value", case_id)
            elif tag == "event":
                events.append(_parse_event(child, ti, case_id))
        log.traces.append(Trace(case_id=case_id, events=events))
    return log


def _parse_event(event_el, trace_index: int, case_id: str) -> Event:
    activity = None
    lifecycle = None
    timestamp = None
    attributes: dict[str, str] = {}
    for attr in event_el:
        key = attr.get("key")
        value = attr.get("value")
        if key is None or value is None:
            continue
        if key == "concept:name":
            activity = value
        elif key == "lifecycle:transition" and value.lower() in _LIFECYCLES:
            lifecycle = value.lower()
        elif key == "time:timestamp":
            timestamp = _parse_timestamp(value, f"trace {case_id!r} (index {trace_index})")
        else:
            attributes[key] = value
    if activity is None:
        raise LogFormatError(
            f"event without concept:name in trace {case_id!r} (index {trace_index})"
        )
    return Event(activity=activity, lifecycle=lifecycle, timestamp=timestamp,
                 attributes=attributes)


# --------------------------------------------------------------- XES output

def write_xes(log: EventLog) -> bytes:
    """Serialize a log to XES bytes; output is deterministic for equal logs."""
    root = ET.Element("log", {"xes.version": "1.0", "xes.features": ""})
    for trace in log.traces:
        trace_el = ET.SubElement(root, "trace")
        ET.SubElement(trace_el, "string", {"key": "concept:name", "value": trace.case_id})
        for event in trace.events:
            ev_el = ET.SubElement(trace_el, "event")
            ET.SubElement(ev_el, "string", {"key": "concept:name", "value": event.activity})
            if event.lifecycle is not None:
                ET.SubElement(ev_el, "string",
                              {"key": "lifecycle:transition", "value": event.lifecycle})
            if event.timestamp is not None:
                ET.SubElement(ev_el, "date",
                              {"key": "time:timestamp", "value": event.timestamp.isoformat()})
            for key in sorted(event.attributes):
                ET.SubElement(ev_el, "string", {"key": key, "value": event.attributes[key]})
    tree = ET.ElementTree(root)
    ET.indent(tree)
    buf = io.BytesIO()
    tree.write(buf, encoding="utf-8", xml_declaration=True)
    return buf.getvalue()


def save_xes(log: EventLog, path: str) -> None:
    with open(path, "wb") as fh:
        fh.write(write_xes(log))


# ---------------------------------------------------------------- CSV input

def parse_csv(source, case_col: str, activity_col: str, time_col: str | None = None) -> EventLog:
    """Parse a delimited event table into a log.

    Rows are grouped into traces by the case column (trace order follows
    first appearance of each case). With a time column, events inside a
    trace are sorted by timestamp, ties keeping row order; without one, row
    order is kept as-is.
    """
    if isinstance(source, bytes):
        text = source.decode("utf-8")
    elif isinstance(source, str):
        with open(source, "r", encoding="utf-8") as fh:
            text = fh.read()
    else:
        text = source.read()
        if isinstance(text, bytes):
            text = text.decode("utf-8")

    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise LogFormatError("empty CSV input") from None

    columns = {name: i for i, name in enumerate(header)}
    for name in (case_col, activity_col) + ((time_col,) if time_col else ()):
        if name not in columns:
            raise ConfigError(f"column {name!r} not in CSV header {header}")

    case_i = columns[case_col]
    act_i = columns[activity_col]
    time_i = columns[time_col] if time_col else None

    cases: dict[str, list[tuple[datetime | None, int, Event]]] = {}
    for row_num, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) < len(header):
            raise LogFormatError(f"line {row_num}: expected {len(header)} fields, got {len(row)}")
        timestamp = None
        if time_i is not None:
            timestamp = _parse_timestamp(row[time_i], f"line {row_num}")
        event = Event(activity=row[act_i], timestamp=timestamp)
        cases.setdefault(row[case_i], []).append((timestamp, row_num, event))

    log = EventLog()
    for case_id, entries in cases.items():
        if time_i is not None:
            entries.sort(key=lambda e: (e[0], e[1]))
        log.traces.append(Trace(case_id=case_id, events=[e for _, _, e in entries]))
    return log


def load_log(path: str, case_col: str = "case", activity_col: str = "activity",
             time_col: str | None = None) -> EventLog:
    """Load a log file, picking the parser from the file extension."""
    if path.endswith(".csv"):
        return parse_csv(path, case_col, activity_col, time_col)
    return parse_xes(path)
