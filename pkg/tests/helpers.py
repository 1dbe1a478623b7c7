"""Shared builders for the test suite."""
from __future__ import annotations

import random

from slalom.config import GameConfig, default_config
from slalom.physics import CartpoleState, Outcome
from slalom.rules import EventKind
from slalom.runner import EPOCH_STAMP, run_session
from slalom.sessionlog import (
    EventRecord,
    LogHeader,
    ParsedLog,
    SeedBundle,
    StepRecord,
    log_path,
    parse,
)

_LOST_CAUSE = {
    "fall": Outcome.FALL,
    "exit": Outcome.EXIT_LEFT,
    "exit_right": Outcome.EXIT_RIGHT,
}


def dummy_header(session_id: str = "synthetic") -> LogHeader:
    return LogHeader(
        session_id=session_id,
        created=EPOCH_STAMP,
        seeds=SeedBundle.from_root(0),
        config=default_config().to_dict(),
        roles=[],
    )


def synthetic_log(records: list, session_id: str = "synthetic") -> ParsedLog:
    return ParsedLog(header=dummy_header(session_id), records=list(records))


def event_stream(atoms: list[tuple], start_step: int = 1) -> list[EventRecord]:
    """Expand compact event atoms into EventRecords at consecutive steps."""
    records = []
    step = start_step
    for atom in atoms:
        kind = atom[0]
        if kind == "pass":
            records.append(EventRecord(step=step, kind=EventKind.GATE_PASSED))
        elif kind == "fail":
            records.append(EventRecord(step=step, kind=EventKind.GATE_FAILED))
        elif kind == "lost":
            records.append(
                EventRecord(step=step, kind=EventKind.GAME_LOST, cause=_LOST_CAUSE[atom[1]])
            )
        elif kind == "won":
            records.append(EventRecord(step=step, kind=EventKind.GAME_WON))
        else:
            raise ValueError(f"unknown atom {atom!r}")
        step += 1
    return records


def random_event_atoms(rng: random.Random) -> list[tuple]:
    """A plausible random session event stream, demo-free."""
    atoms: list[tuple] = []
    for _ in range(rng.randrange(0, 40)):
        roll = rng.random()
        if roll < 0.55:
            atoms.append(("pass",))
        elif roll < 0.70:
            atoms.append(("fail",))
        elif roll < 0.85:
            atoms.append(("lost", rng.choice(("fall", "exit", "exit_right"))))
        else:
            atoms.append(("won",))
    return atoms


def logged_session(
    tmp_path,
    *,
    session_id: str = "s1",
    seed_root: int = 7,
    duration_s: float = 10.0,
    bot=None,
    level: int = 1,
    config: GameConfig | None = None,
) -> ParsedLog:
    cfg = config if config is not None else default_config()
    path = log_path(tmp_path, session_id)
    run_session(
        cfg,
        SeedBundle.from_root(seed_root),
        session_id=session_id,
        duration_s=duration_s,
        bot=bot,
        level=level,
        log_path=path,
    )
    return parse(path)


def fuzzed_state(rng: random.Random) -> CartpoleState:
    return CartpoleState(
        x=rng.uniform(-2.3, 2.3),
        x_dot=rng.uniform(-4.0, 4.0),
        theta=rng.uniform(-1.3, 1.3),
        theta_dot=rng.uniform(-4.0, 4.0),
    )
