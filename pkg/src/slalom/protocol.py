"""Wire schema for the realtime session socket.

Everything that crosses a socket is defined here, strictly: unknown fields are
rejected in both directions so a role can never receive data it is not meant
to see without a validator firing.  Client messages are one of command, pause
or resume; the server answers with view, event, ack or error envelopes that
carry the tick they refer to.

The two views are intentionally disjoint.  The influencer payload has the cart
pose, the circles and the level; the coach payload has the full cart state,
the active gate, scores and the correctness flag, and no circle data at all.
"""
from __future__ import annotations

import json
from typing import Annotated, Literal, Union

from pydantic import BaseModel, ConfigDict, Field, TypeAdapter, ValidationError

from .errors import ProtocolError
from .influence import Command, CommandOp, CircleId, InfluenceSet
from .physics import CartpoleState
from .rules import GameState, in_correct_zone
from .sessionlog import EventRecord

PROTOCOL_VERSION = 1

# Error codes carried by ErrorPayload.code.
PROTOCOL_FAULT = "protocol"
ROLE_VIOLATION = "role_violation"
NOT_ALLOWED = "not_allowed"
UNKNOWN_SESSION = "unknown_session"


class MessageRejected(ProtocolError):
    """A wire message the server refuses, with the machine-readable reason."""

    def __init__(self, code: str, message: str, field: str | None = None):
        super().__init__(message)
        self.code = code
        self.field = field


# --- client to server ---------------------------------------------------------


class CommandMessage(BaseModel):
    model_config = ConfigDict(extra="forbid")

    type: Literal["command"]
    op: Literal["grow", "shrink", "move_left", "move_right", "move_up", "move_down"]
    circle: Literal["left", "right"]
    seq: int | None = None

    def to_command(self) -> Command:
        return Command(op=CommandOp(self.op), circle=CircleId(self.circle))


class PauseMessage(BaseModel):
    model_config = ConfigDict(extra="forbid")

    type: Literal["pause"]
    seq: int | None = None


class ResumeMessage(BaseModel):
    model_config = ConfigDict(extra="forbid")

    type: Literal["resume"]
    seq: int | None = None


ClientMessage = Annotated[
    Union[CommandMessage, PauseMessage, ResumeMessage], Field(discriminator="type")
]

_client_adapter: TypeAdapter = TypeAdapter(ClientMessage)


def _fault_field(exc: ValidationError) -> str | None:
    """Best field name for an error payload: the deepest named location."""
    for err in exc.errors():
        names = [part for part in err["loc"] if isinstance(part, str)]
        # Discriminated unions prefix the variant name; the real field is last.
        if names:
            return names[-1]
    return "type"


def parse_client_message(text: str) -> CommandMessage | PauseMessage | ResumeMessage:
    try:
        obj = json.loads(text)
    except ValueError:
        raise MessageRejected(PROTOCOL_FAULT, "message is not valid JSON") from None
    if not isinstance(obj, dict):
        raise MessageRejected(PROTOCOL_FAULT, "message must be a JSON object")
    try:
        return _client_adapter.validate_python(obj)
    except ValidationError as exc:
        field = _fault_field(exc)
        raise MessageRejected(
            PROTOCOL_FAULT, f"invalid message field {field!r}", field=field
        ) from None


# --- server to client ---------------------------------------------------------


class InfluencePayload(BaseModel):
    model_config = ConfigDict(extra="forbid")

    center_x: float
    center_y: float
    intensity: float


class InfluencesPayload(BaseModel):
    model_config = ConfigDict(extra="forbid")

    left: InfluencePayload
    right: InfluencePayload


class InfluencerViewPayload(BaseModel):
    """What the influencer's screen may know: pose, circles, level. No goals."""

    model_config = ConfigDict(extra="forbid")

    kind: Literal["influencer_view"] = "influencer_view"
    x: float
    theta: float
    level: int
    influences: InfluencesPayload


class GatePayload(BaseModel):
    model_config = ConfigDict(extra="forbid")

    color: Literal["blue", "red"]
    line_x: float
    progress: float


class CoachViewPayload(BaseModel):
    """What the coach's screen may know: goals and scores. No circles."""

    model_config = ConfigDict(extra="forbid")

    kind: Literal["coach_view"] = "coach_view"
    x: float
    x_dot: float
    theta: float
    theta_dot: float
    level: int
    score: int
    best: int
    gate: GatePayload | None
    cart_correctness: Literal["correct", "incorrect"] | None


class EventPayload(BaseModel):
    model_config = ConfigDict(extra="forbid")

    event: str
    cause: str | None = None
    level: int | None = None


class AckPayload(BaseModel):
    model_config = ConfigDict(extra="forbid")

    seq: int | None
    effective_tick: int
    role: str | None = None


class ErrorPayload(BaseModel):
    model_config = ConfigDict(extra="forbid")

    code: str
    message: str
    field: str | None = None


Payload = Union[
    InfluencerViewPayload, CoachViewPayload, EventPayload, AckPayload, ErrorPayload
]


class ServerMessage(BaseModel):
    model_config = ConfigDict(extra="forbid")

    v: int = PROTOCOL_VERSION
    type: Literal["view", "event", "ack", "error"]
    tick: int
    payload: Payload

    def wire(self) -> str:
        return self.model_dump_json()


_PAYLOAD_BY_TYPE: dict[str, type[BaseModel]] = {
    "event": EventPayload,
    "ack": AckPayload,
    "error": ErrorPayload,
}


class _Envelope(BaseModel):
    model_config = ConfigDict(extra="forbid")

    v: int
    type: Literal["view", "event", "ack", "error"]
    tick: int
    payload: dict


def parse_server_message(text: str) -> ServerMessage:
    """Strict parse of one server frame; raises MessageRejected on any surprise."""
    try:
        env = _Envelope.model_validate_json(text)
    except ValidationError as exc:
        field = _fault_field(exc)
        raise MessageRejected(
            PROTOCOL_FAULT, f"invalid envelope field {field!r}", field=field
        ) from None
    if env.v != PROTOCOL_VERSION:
        raise MessageRejected(PROTOCOL_FAULT, f"protocol version {env.v} not supported", field="v")
    if env.type == "view":
        kind = env.payload.get("kind")
        if kind == "influencer_view":
            model: type[BaseModel] = InfluencerViewPayload
        elif kind == "coach_view":
            model = CoachViewPayload
        else:
            raise MessageRejected(PROTOCOL_FAULT, f"unknown view kind {kind!r}", field="kind")
    else:
        model = _PAYLOAD_BY_TYPE[env.type]
    try:
        payload = model.model_validate(env.payload)
    except ValidationError as exc:
        field = _fault_field(exc)
        raise MessageRejected(
            PROTOCOL_FAULT, f"invalid payload field {field!r}", field=field
        ) from None
    return ServerMessage(v=env.v, type=env.type, tick=env.tick, payload=payload)


# --- payload builders -----------------------------------------------------------


def influencer_view(state: CartpoleState, influences: InfluenceSet, level: int) -> InfluencerViewPayload:
    return InfluencerViewPayload(
        x=state.x,
        theta=state.theta,
        level=level,
        influences=InfluencesPayload(
            left=InfluencePayload(**influences.left.to_dict()),
            right=InfluencePayload(**influences.right.to_dict()),
        ),
    )


def coach_view(state: CartpoleState, game: GameState) -> CoachViewPayload:
    gate = game.active_gate
    gate_payload = None
    correctness: Literal["correct", "incorrect"] | None = None
    if gate is not None:
        gate_payload = GatePayload(color=gate.color.value, line_x=gate.line_x, progress=gate.progress)
        correct = in_correct_zone(gate.color, gate.line_x, state.x)
        correctness = "correct" if correct else "incorrect"
    return CoachViewPayload(
        x=state.x,
        x_dot=state.x_dot,
        theta=state.theta,
        theta_dot=state.theta_dot,
        level=game.level_spec.level,
        score=game.score,
        best=game.best_score,
        gate=gate_payload,
        cart_correctness=correctness,
    )


def view_message(tick: int, payload: InfluencerViewPayload | CoachViewPayload) -> ServerMessage:
    return ServerMessage(type="view", tick=tick, payload=payload)


def event_message(record: EventRecord) -> ServerMessage:
    cause = record.cause.value if record.cause is not None else None
    payload = EventPayload(event=record.kind.value, cause=cause, level=record.level)
    return ServerMessage(type="event", tick=record.step, payload=payload)


def ack_message(tick: int, seq: int | None, effective_tick: int, role: str | None = None) -> ServerMessage:
    return ServerMessage(type="ack", tick=tick, payload=AckPayload(seq=seq, effective_tick=effective_tick, role=role))


def error_message(tick: int, code: str, message: str, field: str | None = None) -> ServerMessage:
    return ServerMessage(type="error", tick=tick, payload=ErrorPayload(code=code, message=message, field=field))
