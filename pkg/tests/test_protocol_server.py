import dataclasses
import json

import pytest

from slalom.config import default_config
from slalom.errors import StateError
from slalom.influence import Command, CommandOp, CircleId, apply_command
from slalom.protocol import (
    NOT_ALLOWED,
    PROTOCOL_FAULT,
    ROLE_VIOLATION,
    UNKNOWN_SESSION,
    CommandMessage,
    MessageRejected,
    PauseMessage,
    ResumeMessage,
    ack_message,
    coach_view,
    error_message,
    event_message,
    influencer_view,
    parse_client_message,
    parse_server_message,
    view_message,
)
from slalom.replay import verify
from slalom.rules import EventKind, in_correct_zone
from slalom.runner import Simulation
from slalom.server import Phase, Role, SessionHost
from slalom.sessionlog import EventRecord, SeedBundle, parse

CFG = default_config()

COACH_ONLY_KEYS = {"gate", "score", "best", "cart_correctness", "x_dot", "theta_dot"}
INFLUENCER_ONLY_KEYS = {"influences"}


# --- client message parsing ---------------------------------------------------


def test_client_messages_parse():
    msg = parse_client_message('{"type": "command", "op": "grow", "circle": "left", "seq": 4}')
    assert isinstance(msg, CommandMessage)
    assert msg.to_command() == Command(CommandOp.GROW, CircleId.LEFT)
    assert msg.seq == 4
    assert isinstance(parse_client_message('{"type": "pause"}'), PauseMessage)
    resume = parse_client_message('{"type": "resume", "seq": 9}')
    assert isinstance(resume, ResumeMessage)
    assert resume.seq == 9


def test_client_message_rejects_extra_field():
    with pytest.raises(MessageRejected) as err:
        parse_client_message('{"type": "pause", "power": 9}')
    assert err.value.code == PROTOCOL_FAULT
    assert err.value.field == "power"


def test_client_message_rejects_bad_op():
    with pytest.raises(MessageRejected) as err:
        parse_client_message('{"type": "command", "op": "teleport", "circle": "left"}')
    assert err.value.field == "op"


def test_client_message_rejects_unknown_type():
    with pytest.raises(MessageRejected) as err:
        parse_client_message('{"type": "cheat"}')
    assert err.value.code == PROTOCOL_FAULT


def test_client_message_rejects_non_json():
    with pytest.raises(MessageRejected, match="not valid JSON"):
        parse_client_message("{nope")


def test_client_message_rejects_non_object():
    with pytest.raises(MessageRejected, match="must be a JSON object"):
        parse_client_message('["command"]')


# --- server frames ------------------------------------------------------------


def playing_sim() -> Simulation:
    return Simulation(CFG, SeedBundle.from_root(3))


def test_server_frames_round_trip():
    sim = playing_sim()
    frames = [
        view_message(7, influencer_view(sim.state, sim.influences, sim.level)),
        view_message(7, coach_view(sim.state, sim.game)),
        event_message(EventRecord(step=3, kind=EventKind.GAME_LOST, cause=None)),
        ack_message(5, 2, 6, role="influencer"),
        error_message(1, NOT_ALLOWED, "nope", field="op"),
    ]
    for frame in frames:
        assert parse_server_message(frame.wire()) == frame


def test_view_payloads_stay_disjoint():
    sim = playing_sim()
    inf_keys = set(influencer_view(sim.state, sim.influences, sim.level).model_dump())
    coach_keys = set(coach_view(sim.state, sim.game).model_dump())
    assert inf_keys == {"kind", "x", "theta", "level", "influences"}
    assert coach_keys == {
        "kind", "x", "x_dot", "theta", "theta_dot", "level", "score", "best",
        "gate", "cart_correctness",
    }
    assert not inf_keys & COACH_ONLY_KEYS
    assert not coach_keys & INFLUENCER_ONLY_KEYS


def contaminate(wire: str, key: str, value) -> str:
    doc = json.loads(wire)
    doc["payload"][key] = value
    return json.dumps(doc)


def test_contaminated_influencer_view_is_rejected():
    sim = playing_sim()
    wire = view_message(1, influencer_view(sim.state, sim.influences, sim.level)).wire()
    with pytest.raises(MessageRejected) as err:
        parse_server_message(contaminate(wire, "score", 3))
    assert err.value.field == "score"


def test_contaminated_coach_view_is_rejected():
    sim = playing_sim()
    wire = view_message(1, coach_view(sim.state, sim.game)).wire()
    with pytest.raises(MessageRejected) as err:
        parse_server_message(contaminate(wire, "influences", {}))
    assert err.value.field == "influences"


def test_unknown_view_kind_is_rejected():
    sim = playing_sim()
    wire = view_message(1, coach_view(sim.state, sim.game)).wire()
    doc = json.loads(wire)
    doc["payload"]["kind"] = "root_view"
    with pytest.raises(MessageRejected) as err:
        parse_server_message(json.dumps(doc))
    assert err.value.field == "kind"


def test_unsupported_protocol_version_is_rejected():
    doc = json.loads(ack_message(0, None, 0).wire())
    doc["v"] = 2
    with pytest.raises(MessageRejected, match="version 2"):
        parse_server_message(json.dumps(doc))


def test_coach_correctness_tracks_the_gate_zone():
    sim = playing_sim()
    gate = sim.game.active_gate
    for x in (gate.line_x - 0.4, gate.line_x + 0.4):
        sim.state = dataclasses.replace(sim.state, x=x)
        payload = coach_view(sim.state, sim.game)
        want = in_correct_zone(gate.color, gate.line_x, x)
        assert payload.cart_correctness == ("correct" if want else "incorrect")
        assert payload.gate.color == gate.color.value
        assert payload.gate.line_x == gate.line_x


# --- the session host ---------------------------------------------------------


def make_host(*, demo_games: int = 0, log_path=None, seed: int = 3) -> SessionHost:
    return SessionHost(
        CFG, SeedBundle.from_root(seed), "t1", log_path=log_path, demo_games=demo_games
    )


def seated_host(**kwargs):
    host = make_host(**kwargs)
    inf_id, inf_role, _ = host.join(None)
    coach_id, coach_role, _ = host.join(None)
    assert (inf_role, coach_role) == (Role.INFLUENCER, Role.COACH)
    return host, inf_id, coach_id


def frames_of(outbound, conn_id):
    return [parse_server_message(text) for cid, text in outbound if cid == conn_id]


def test_join_assigns_seats_in_order():
    host = make_host()
    roles = [host.join(None)[1] for _ in range(4)]
    assert roles == [Role.INFLUENCER, Role.COACH, Role.OBSERVER, Role.OBSERVER]


def test_join_ack_names_the_role():
    host = make_host()
    conn_id, role, out = host.join(None)
    assert role is Role.INFLUENCER
    (frame,) = frames_of(out, conn_id)
    assert frame.type == "ack"
    assert frame.payload.role == "influencer"
    assert frame.payload.effective_tick == 0


def test_taken_seat_is_rejected():
    host = make_host()
    host.join("influencer")
    with pytest.raises(MessageRejected) as err:
        host.join("influencer")
    assert err.value.code == ROLE_VIOLATION
    host.join("coach")
    with pytest.raises(MessageRejected):
        host.join("coach")
    host.join("observer")
    host.join("observer")  # observers stack freely


def test_unknown_role_is_rejected():
    host = make_host()
    with pytest.raises(MessageRejected) as err:
        host.join("admin")
    assert err.value.code == PROTOCOL_FAULT
    assert err.value.field == "role"


def test_lobby_does_not_tick():
    host = make_host(demo_games=1)
    host.join(None)
    assert host.phase is Phase.LOBBY
    assert host.step_once() == []
    assert host.tick_index == 0


def test_demo_starts_when_both_primaries_sit_down():
    host = make_host(demo_games=1)
    host.join(None)
    assert host.phase is Phase.LOBBY
    _, _, out = host.join(None)
    assert host.phase is Phase.HANDS_FREE
    events = [f for f in frames_of(out, 1) + frames_of(out, 2) if f.type == "event"]
    assert {f.payload.event for f in events} == {"hands_free_started"}


def test_zero_demo_games_skips_the_demo():
    host, _, _ = seated_host(demo_games=0)
    assert host.phase is Phase.PLAYING


def shove_off_screen(host: SessionHost) -> None:
    host.sim.state = dataclasses.replace(
        host.sim.state, x=2.39, x_dot=3.0, theta=0.0, theta_dot=0.0
    )


def test_demo_counts_terminal_games_then_opens_play():
    host, inf_id, _ = seated_host(demo_games=3)
    assert host.phase is Phase.HANDS_FREE
    ended = []
    for expected_left in (2, 1, 0):
        shove_off_screen(host)
        out = host.step_once()
        assert host.demo_remaining == expected_left
        ended += [f for _, t in out for f in [parse_server_message(t)]
                  if f.type == "event" and f.payload.event == "hands_free_ended"]
    assert host.phase is Phase.PLAYING
    assert len(ended) == 2  # broadcast once to each of the two clients


def test_commands_are_refused_before_play_begins():
    host = make_host(demo_games=1)
    inf_id, _, _ = host.join(None)
    out = host.handle(inf_id, '{"type": "command", "op": "grow", "circle": "left"}')
    (frame,) = frames_of(out, inf_id)
    assert frame.type == "error"
    assert frame.payload.code == NOT_ALLOWED

    host.join(None)  # coach arrives, demo starts
    out = host.handle(inf_id, '{"type": "command", "op": "grow", "circle": "left"}')
    (frame,) = frames_of(out, inf_id)
    assert frame.payload.code == NOT_ALLOWED
    assert "demo" in frame.payload.message


def test_commands_queue_fifo_and_apply_on_the_named_tick():
    host, inf_id, _ = seated_host()
    start = host.tick_index
    out1 = host.handle(inf_id, '{"type": "command", "op": "grow", "circle": "left", "seq": 1}')
    out2 = host.handle(inf_id, '{"type": "command", "op": "shrink", "circle": "right", "seq": 2}')
    (ack1,) = frames_of(out1, inf_id)
    (ack2,) = frames_of(out2, inf_id)
    assert (ack1.payload.seq, ack1.payload.effective_tick) == (1, start + 1)
    assert (ack2.payload.seq, ack2.payload.effective_tick) == (2, start + 2)

    before = host.sim.influences
    want_after_1 = apply_command(before, Command(CommandOp.GROW, CircleId.LEFT), CFG.influence)
    want_after_2 = apply_command(want_after_1, Command(CommandOp.SHRINK, CircleId.RIGHT), CFG.influence)
    host.step_once()
    assert host.sim.influences == want_after_1
    host.step_once()
    assert host.sim.influences == want_after_2


def test_role_violations_are_rejected():
    host, inf_id, coach_id = seated_host()
    obs_id, _, _ = host.join("observer")
    cases = [
        (coach_id, '{"type": "command", "op": "grow", "circle": "left"}'),
        (obs_id, '{"type": "command", "op": "grow", "circle": "left"}'),
        (obs_id, '{"type": "pause"}'),
        (obs_id, '{"type": "resume"}'),
    ]
    for conn_id, text in cases:
        (frame,) = frames_of(host.handle(conn_id, text), conn_id)
        assert frame.type == "error"
        assert frame.payload.code == ROLE_VIOLATION


def test_malformed_message_answers_with_protocol_error():
    host, inf_id, _ = seated_host()
    (frame,) = frames_of(host.handle(inf_id, "junk"), inf_id)
    assert frame.type == "error"
    assert frame.payload.code == PROTOCOL_FAULT


def test_message_from_unknown_connection_is_a_bug():
    host = make_host()
    with pytest.raises(StateError):
        host.handle(99, '{"type": "pause"}')


def test_pause_freezes_ticks_and_resume_continues():
    host, inf_id, coach_id = seated_host()
    for _ in range(5):
        host.step_once()
    tick = host.tick_index
    out = host.handle(coach_id, '{"type": "pause", "seq": 1}')  # coach may pause
    kinds = [f.type for f in frames_of(out, coach_id)]
    assert kinds == ["ack", "event"]
    assert host.phase is Phase.PAUSED
    for _ in range(3):
        assert host.step_once() == []
    assert host.tick_index == tick
    out = host.handle(inf_id, '{"type": "resume"}')
    assert host.phase is Phase.PLAYING
    host.step_once()
    assert host.tick_index == tick + 1


def test_pause_while_paused_just_acks():
    host, inf_id, _ = seated_host()
    host.step_once()
    host.handle(inf_id, '{"type": "pause"}')
    out = host.handle(inf_id, '{"type": "pause"}')
    (frame,) = frames_of(out, inf_id)
    assert frame.type == "ack"
    assert host.phase is Phase.PAUSED


def test_commands_queued_while_paused_apply_after_resume():
    host, inf_id, _ = seated_host()
    host.step_once()
    start = host.tick_index
    host.handle(inf_id, '{"type": "pause"}')
    out = host.handle(inf_id, '{"type": "command", "op": "grow", "circle": "right", "seq": 7}')
    (ack,) = frames_of(out, inf_id)
    assert ack.payload.effective_tick == start + 1  # pause spends no ticks
    want = apply_command(host.sim.influences, Command(CommandOp.GROW, CircleId.RIGHT), CFG.influence)
    host.handle(inf_id, '{"type": "resume"}')
    host.step_once()
    assert host.tick_index == start + 1
    assert host.sim.influences == want


def test_influencer_disconnect_pauses_and_frees_the_seat():
    host, inf_id, coach_id = seated_host()
    host.step_once()
    out = host.leave(inf_id)
    assert host.phase is Phase.PAUSED
    events = [parse_server_message(t) for _, t in out]
    assert {f.payload.event for f in events} == {"paused"}
    _, role, _ = host.join(None)  # the seat is free again
    assert role is Role.INFLUENCER
    host.handle(coach_id, '{"type": "resume"}')
    assert host.phase is Phase.PLAYING


def test_coach_disconnect_does_not_pause():
    host, _, coach_id = seated_host()
    host.step_once()
    assert host.leave(coach_id) == []
    assert host.phase is Phase.PLAYING


def test_each_role_sees_its_own_view():
    host, inf_id, coach_id = seated_host()
    obs_id, _, _ = host.join("observer")
    out = host.step_once()
    by_conn = {cid: [] for cid in (inf_id, coach_id, obs_id)}
    for cid, text in out:
        by_conn[cid].append(text)
    inf_views = [parse_server_message(t) for t in by_conn[inf_id]]
    assert [f.payload.kind for f in inf_views if f.type == "view"] == ["influencer_view"]
    coach_texts = [t for t in by_conn[coach_id] if parse_server_message(t).type == "view"]
    obs_texts = [t for t in by_conn[obs_id] if parse_server_message(t).type == "view"]
    assert coach_texts == obs_texts  # observers get the coach picture, verbatim
    assert json.loads(coach_texts[0])["payload"]["kind"] == "coach_view"


def test_view_frames_never_leak_across_roles():
    host, inf_id, coach_id = seated_host()
    for _ in range(50):
        for cid, text in host.step_once():
            doc = json.loads(text)
            if doc["type"] != "view":
                continue
            keys = set(doc["payload"])
            if cid == inf_id:
                assert doc["payload"]["kind"] == "influencer_view"
                assert not keys & COACH_ONLY_KEYS
            else:
                assert doc["payload"]["kind"] == "coach_view"
                assert not keys & INFLUENCER_ONLY_KEYS
                assert "intensity" not in text
                assert "center_x" not in text


def test_closed_session_refuses_everything(tmp_path):
    path = tmp_path / "t1.paclog"
    host, inf_id, _ = seated_host(log_path=path)
    host.step_once()
    host.close()
    assert host.phase is Phase.ENDED
    assert host.step_once() == []
    (frame,) = frames_of(host.handle(inf_id, '{"type": "pause"}'), inf_id)
    assert frame.payload.code == NOT_ALLOWED
    with pytest.raises(MessageRejected) as err:
        host.join(None)
    assert err.value.code == NOT_ALLOWED
    host.close()  # idempotent
    assert parse(path).steps  # the log was flushed and is readable


def test_status_reports_the_table():
    host, inf_id, _ = seated_host(demo_games=1)
    host.join("observer")
    status = host.status()
    assert status["session_id"] == "t1"
    assert status["phase"] == "hands_free_demo"
    assert status["tick"] == 0
    assert status["level"] == 1
    assert status["demo_remaining"] == 1
    assert status["roles"] == {"influencer": True, "coach": True, "observers": 1}
    host.leave(inf_id)
    assert host.status()["roles"]["influencer"] is False


# --- the HTTP and websocket transport ------------------------------------------


@pytest.fixture()
def client(tmp_path):
    from fastapi.testclient import TestClient

    from slalom.server import ServerSettings, create_app

    app = create_app(ServerSettings(config=CFG, log_dir=str(tmp_path / "logs")))
    with TestClient(app) as client:
        yield client


def test_http_create_and_status(client):
    created = client.post("/session", json={"id": "web1", "seed": 5})
    assert created.status_code == 201
    assert created.json() == {"id": "web1", "seed": 5, "level": 1}
    dup = client.post("/session", json={"id": "web1"})
    assert dup.status_code == 409
    status = client.get("/session/web1")
    assert status.status_code == 200
    body = status.json()
    assert body["session_id"] == "web1"
    assert body["phase"] == "lobby"
    assert client.get("/session/nope").status_code == 404


def test_http_rejects_unknown_level(client):
    reply = client.post("/session", json={"id": "bad", "level": 99})
    assert reply.status_code == 422


def test_http_rejects_extra_fields(client):
    reply = client.post("/session", json={"id": "x", "cheat": 1})
    assert reply.status_code == 422


def test_socket_join_ack_and_role_errors(client):
    client.post("/session", json={"id": "ws1", "seed": 5})
    with client.websocket_connect("/session/ws1/join?role=coach") as coach:
        ack = parse_server_message(coach.receive_text())
        assert ack.type == "ack"
        assert ack.payload.role == "coach"
        with client.websocket_connect("/session/ws1/join?role=coach") as rival:
            err = parse_server_message(rival.receive_text())
            assert err.type == "error"
            assert err.payload.code == ROLE_VIOLATION
        with client.websocket_connect("/session/ws1/join?role=admin") as weird:
            err = parse_server_message(weird.receive_text())
            assert err.payload.code == PROTOCOL_FAULT


def test_socket_watch_is_observer(client):
    client.post("/session", json={"id": "ws2", "seed": 5})
    with client.websocket_connect("/session/ws2/watch") as watcher:
        ack = parse_server_message(watcher.receive_text())
        assert ack.payload.role == "observer"


def test_socket_unknown_session(client):
    with client.websocket_connect("/session/ghost/join") as socket:
        err = parse_server_message(socket.receive_text())
        assert err.type == "error"
        assert err.payload.code == UNKNOWN_SESSION


def test_served_session_log_replays_exactly(tmp_path):
    path = tmp_path / "served.paclog"
    host, inf_id, coach_id = seated_host(log_path=path)
    script = {
        40: '{"type": "command", "op": "grow", "circle": "left"}',
        41: '{"type": "command", "op": "move_right", "circle": "right"}',
        90: '{"type": "pause"}',
        95: '{"type": "resume"}',
        130: '{"type": "command", "op": "shrink", "circle": "left"}',
    }
    for i in range(300):
        if i in script:
            host.handle(inf_id if "command" in script[i] else coach_id, script[i])
        host.step_once()
    host.close()
    parsed = parse(path)
    assert len(parsed.steps) > 250
    report = verify(parsed)
    assert report.equal, report.first_divergence
    assert any(rec.command is not None for rec in parsed.steps)
    pauses = [ev for ev in parsed.events if ev.kind is EventKind.PAUSED]
    assert len(pauses) == 1
