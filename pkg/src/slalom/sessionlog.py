"""Append-only session telemetry: one JSON object per line.

The first line is a header carrying every seed and the full configuration, so
a log file alone is enough to regenerate the session (see replay).  Records
are written whole-line-at-a-time and flushed, so a reader never sees half a
record and a killed process leaves a file that parses up to the last complete
line.
"""
from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from typing import IO, Iterable

from .errors import LogFormatError, StateError, UnsupportedVersionError
from .influence import ActionDecision, ActionSource, Command, InfluenceSet, PreferenceVector
from .physics import CartpoleState, Outcome
from .rules import EventKind, Gate, GateColor, GameEvent

LOG_FORMAT_VERSION = 1
LOG_SUFFIX = ".paclog"

FLAG_BYTE_TRUNCATED = "byte_truncated"
FLAG_SESSION_TRUNCATED = "session_truncated"


def canonical_line(obj: dict) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":")) + "\n"


@dataclass(slots=True)
class SeedBundle:
    """One seed per random stream, so toggling one feature never shifts another."""

    disturbance: int
    decision: int
    gate: int

    @classmethod
    def from_root(cls, root: int) -> "SeedBundle":
        return cls(disturbance=root * 10 + 1, decision=root * 10 + 2, gate=root * 10 + 3)

    def to_dict(self) -> dict:
        return {"disturbance": self.disturbance, "decision": self.decision, "gate": self.gate}

    @classmethod
    def from_dict(cls, d: dict) -> "SeedBundle":
        return cls(disturbance=int(d["disturbance"]), decision=int(d["decision"]), gate=int(d["gate"]))


@dataclass(slots=True)
class LogHeader:
    session_id: str
    created: str  # ISO-8601; informational only, never compared by replay
    seeds: SeedBundle
    config: dict  # full serialized GameConfig
    roles: list[str]
    start_level: int = 1
    start_influences: dict | None = None  # serialized InfluenceSet at tick 0
    format_version: int = LOG_FORMAT_VERSION

    def to_obj(self) -> dict:
        return {
            "kind": "header",
            "format_version": self.format_version,
            "session_id": self.session_id,
            "created": self.created,
            "seeds": self.seeds.to_dict(),
            "config": self.config,
            "roles": list(self.roles),
            "start_level": self.start_level,
            "start_influences": self.start_influences,
        }

    @classmethod
    def from_obj(cls, obj: dict) -> "LogHeader":
        return cls(
            session_id=str(obj["session_id"]),
            created=str(obj["created"]),
            seeds=SeedBundle.from_dict(obj["seeds"]),
            config=obj["config"],
            roles=[str(r) for r in obj["roles"]],
            start_level=int(obj.get("start_level", 1)),
            start_influences=obj.get("start_influences"),
            format_version=int(obj["format_version"]),
        )


@dataclass(slots=True)
class GateSnapshot:
    color: GateColor
    line_x: float
    progress: float

    @classmethod
    def of(cls, gate: Gate) -> "GateSnapshot":
        return cls(color=gate.color, line_x=gate.line_x, progress=gate.progress)

    def to_obj(self) -> dict:
        return {"color": self.color.value, "line_x": self.line_x, "progress": self.progress}

    @classmethod
    def from_obj(cls, obj: dict) -> "GateSnapshot":
        return cls(color=GateColor(obj["color"]), line_x=float(obj["line_x"]), progress=float(obj["progress"]))


@dataclass(slots=True)
class StepRecord:
    step: int
    elapsed: float
    state: CartpoleState
    influences: InfluenceSet
    gate: GateSnapshot | None
    decision: ActionDecision
    command: Command | None

    def to_obj(self) -> dict:
        return {
            "kind": "step",
            "step": self.step,
            "elapsed": self.elapsed,
            "state": self.state.to_dict(),
            "influences": self.influences.to_dict(),
            "gate": self.gate.to_obj() if self.gate else None,
            "decision": self.decision.to_dict(),
            "command": self.command.to_dict() if self.command else None,
        }

    @classmethod
    def from_obj(cls, obj: dict) -> "StepRecord":
        st = obj["state"]
        dec = obj["decision"]
        step_index = int(obj["step"])
        state = CartpoleState(
            x=float(st["x"]),
            x_dot=float(st["x_dot"]),
            theta=float(st["theta"]),
            theta_dot=float(st["theta_dot"]),
            step_index=step_index,
            elapsed=float(obj["elapsed"]),
        )
        from .policy import Action  # local import to keep module load light

        decision = ActionDecision(
            action=Action(dec["action"]),
            source=ActionSource(dec["source"]),
            m=PreferenceVector(*[float(v) for v in dec["m"]]),
            inf=PreferenceVector(*[float(v) for v in dec["inf"]]),
        )
        return cls(
            step=step_index,
            elapsed=float(obj["elapsed"]),
            state=state,
            influences=InfluenceSet.from_dict(obj["influences"]),
            gate=GateSnapshot.from_obj(obj["gate"]) if obj.get("gate") else None,
            decision=decision,
            command=Command.from_dict(obj["command"]) if obj.get("command") else None,
        )


@dataclass(slots=True)
class EventRecord:
    step: int
    kind: EventKind
    cause: Outcome | None = None
    level: int | None = None

    @classmethod
    def of(cls, step: int, event: GameEvent) -> "EventRecord":
        return cls(step=step, kind=event.kind, cause=event.cause, level=event.level)

    def to_obj(self) -> dict:
        obj: dict = {"kind": "event", "step": self.step, "event": self.kind.value}
        if self.cause is not None:
            obj["cause"] = self.cause.value
        if self.level is not None:
            obj["level"] = self.level
        return obj

    @classmethod
    def from_obj(cls, obj: dict) -> "EventRecord":
        return cls(
            step=int(obj["step"]),
            kind=EventKind(obj["event"]),
            cause=Outcome(obj["cause"]) if "cause" in obj else None,
            level=int(obj["level"]) if "level" in obj else None,
        )


TERMINAL_EVENTS = (EventKind.GAME_WON, EventKind.GAME_LOST)


@dataclass(slots=True)
class ParsedLog:
    header: LogHeader
    records: list[StepRecord | EventRecord]  # file order
    flags: set[str] = field(default_factory=set)

    @property
    def steps(self) -> list[StepRecord]:
        return [r for r in self.records if isinstance(r, StepRecord)]

    @property
    def events(self) -> list[EventRecord]:
        return [r for r in self.records if isinstance(r, EventRecord)]


class SessionWriter:
    """Appends records for one session, enforcing monotone step order."""

    def __init__(self, path: str | os.PathLike, header: LogHeader):
        self.path = os.fspath(path)
        self._fh: IO[str] | None = open(self.path, "w", encoding="utf-8", newline="\n")
        self._last_step = -1
        self._fh.write(canonical_line(header.to_obj()))
        self._fh.flush()

    def append_step(self, record: StepRecord) -> None:
        fh = self._require_open()
        if record.step <= self._last_step:
            raise StateError(f"step {record.step} not after last step {self._last_step}")
        fh.write(canonical_line(record.to_obj()))
        fh.flush()
        self._last_step = record.step

    def append_event(self, record: EventRecord) -> None:
        fh = self._require_open()
        if record.step < self._last_step:
            raise StateError(f"event at step {record.step} is before last step {self._last_step}")
        fh.write(canonical_line(record.to_obj()))
        fh.flush()

    def close(self) -> None:
        if self._fh is not None:
            self._fh.close()
            self._fh = None

    def _require_open(self) -> IO[str]:
        if self._fh is None:
            raise StateError("writer is closed")
        return self._fh

    def __enter__(self) -> "SessionWriter":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


def parse(path: str | os.PathLike) -> ParsedLog:
    """Read a whole log.  A truncated final line is tolerated and flagged."""
    with open(path, "r", encoding="utf-8", newline="\n") as fh:
        raw = fh.read()
    lines = raw.split("\n")
    trailing_complete = raw.endswith("\n")
    if trailing_complete:
        lines = lines[:-1]
    if not lines or not lines[0]:
        raise LogFormatError("empty file")

    flags: set[str] = set()
    if not trailing_complete:
        flags.add(FLAG_BYTE_TRUNCATED)
    header = _parse_header(lines[0])

    records: list[StepRecord | EventRecord] = []
    last_step = -1
    for i, line in enumerate(lines[1:], start=2):
        is_last = i == len(lines)
        try:
            obj = json.loads(line)
            kind = obj.get("kind")
            if kind == "step":
                rec = StepRecord.from_obj(obj)
                if rec.step <= last_step:
                    raise LogFormatError(f"step {rec.step} out of order", line_no=i)
                records.append(rec)
                last_step = rec.step
            elif kind == "event":
                ev = EventRecord.from_obj(obj)
                if ev.step < last_step:
                    raise LogFormatError(f"event at step {ev.step} out of order", line_no=i)
                records.append(ev)
            else:
                raise LogFormatError(f"unknown record kind {kind!r}", line_no=i)
        except (json.JSONDecodeError, KeyError, ValueError, TypeError) as exc:
            if is_last and not trailing_complete:
                break  # half-written final record; everything before it stands
            raise LogFormatError(f"malformed record ({exc!r})", line_no=i) from None

    if not any(r.kind in TERMINAL_EVENTS for r in records if isinstance(r, EventRecord)):
        flags.add(FLAG_SESSION_TRUNCATED)
    return ParsedLog(header=header, records=records, flags=flags)


def _parse_header(line: str) -> LogHeader:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise LogFormatError(f"header is not valid JSON ({exc})", line_no=1) from None
    if not isinstance(obj, dict) or obj.get("kind") != "header":
        raise LogFormatError("first record must be the session header", line_no=1)
    version = obj.get("format_version")
    if version != LOG_FORMAT_VERSION:
        raise UnsupportedVersionError(version, LOG_FORMAT_VERSION)
    try:
        return LogHeader.from_obj(obj)
    except (KeyError, ValueError, TypeError) as exc:
        raise LogFormatError(f"malformed header ({exc!r})", line_no=1) from None


def serialize(log: ParsedLog) -> str:
    """Canonical text of a parsed log; serialize(parse(p)) reproduces p's bytes."""
    out = [canonical_line(log.header.to_obj())]
    out.extend(canonical_line(rec.to_obj()) for rec in log.records)
    return "".join(out)


def log_path(directory: str | os.PathLike, session_id: str) -> str:
    return os.path.join(os.fspath(directory), session_id + LOG_SUFFIX)
