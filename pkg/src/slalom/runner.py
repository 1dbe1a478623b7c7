"""Headless simulation driver.

One Simulation owns the three random streams, the cart, the influences and the
game, and advances them one tick at a time.  The server wraps it with a
real-time loop and sockets; replay and the experiments drive it directly, so a
headless run and a served session follow byte-for-byte the same path.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field

from .config import GameConfig
from .errors import StateError
from .influence import Command, InfluenceSet, PresetSize, apply_command, preset
from .physics import (
    CartpoleState,
    DisturbanceStream,
    Outcome,
    check_termination,
    step as physics_step,
)
from .policy import Action, model_preference
from .influence import influence_vector, arbitrate
from .rules import (
    EventKind,
    GameEvent,
    GameState,
    TickResult,
    new_game,
    perturbed_start,
    resolve_game_end,
    tick as rules_tick,
)
from .sessionlog import (
    EventRecord,
    GateSnapshot,
    LogHeader,
    SeedBundle,
    SessionWriter,
    StepRecord,
)

# Deterministic timestamp for headless logs: reruns of the same seed must be
# byte-identical, so wall time stays out of simulated artifacts.
EPOCH_STAMP = "1970-01-01T00:00:00Z"


@dataclass(slots=True)
class SimTick:
    """Everything one tick produced, ready for logging or broadcast."""

    record: StepRecord
    events: list[GameEvent]
    terminal: Outcome | None  # the game/trial outcome that ended on this tick


class Simulation:
    """Deterministic core of one session or trial."""

    def __init__(
        self,
        config: GameConfig,
        seeds: SeedBundle,
        *,
        level: int = 1,
        gates_enabled: bool = True,
        influences: InfluenceSet | None = None,
        progression: bool = True,
    ):
        config.validate()
        if gates_enabled and level not in config.levels:
            raise StateError(f"unknown level {level}")
        self.config = config
        self.seeds = seeds
        self.decision_rng = random.Random(seeds.decision)
        self.gate_rng = random.Random(seeds.gate)
        self.stream = DisturbanceStream(seeds.disturbance)
        self.gates_enabled = gates_enabled
        self.progression = progression
        p = config.physics
        self.state = perturbed_start(self.gate_rng, p.dt, step_index=0)
        if gates_enabled:
            self.game: GameState | None = new_game(config.levels[level], self.gate_rng, p.x_limit, config.gates)
        else:
            self.game = None
        if influences is None:
            influences = preset(PresetSize.MEDIUM, config.influence, p.x_limit)
        self.influences = influences
        self.trial_over = False  # gateless mode only

    # -- steering -------------------------------------------------------------

    def apply(self, command: Command) -> None:
        self.influences = apply_command(self.influences, command, self.config.influence)

    def set_progression(self, enabled: bool) -> None:
        self.progression = enabled

    @property
    def level(self) -> int:
        return self.game.level_spec.level if self.game else 0

    # -- advancing ------------------------------------------------------------

    def tick(self, command: Command | None = None) -> SimTick:
        """Apply at most one command, then advance one step.

        When a game ends the next game starts immediately (fresh gates, fresh
        cart) so callers only ever see a running simulation.  In gateless mode
        the simulation stops at the first terminal instead.
        """
        if command is not None:
            self.apply(command)

        if self.game is not None:
            return self._tick_game(command)
        return self._tick_trial(command)

    def _tick_game(self, command: Command | None) -> SimTick:
        cfg = self.config
        result: TickResult = rules_tick(
            self.game,
            self.state,
            self.influences,
            cfg.policy,
            cfg.physics,
            cfg.arbitration,
            cfg.gates,
            self.decision_rng,
            self.stream,
        )
        self.state = result.state
        self.game = result.game
        events = list(result.events)
        terminal: Outcome | None = None
        gate_snapshot = None
        active = result.game.active_gate
        if active is not None:
            gate_snapshot = GateSnapshot.of(active)
        elif result.game.gates:
            # Terminal tick: snapshot the gate that just resolved.
            gate_snapshot = GateSnapshot.of(result.game.gates[result.game.active_index])

        if result.terminal:
            terminal = result.game.outcome
            fresh, more = resolve_game_end(
                result.game,
                self.gate_rng,
                cfg.physics.x_limit,
                cfg.gates,
                cfg.levels,
                progression=self.progression,
            )
            events.extend(more)
            self.game = fresh
            self.state = perturbed_start(self.gate_rng, cfg.physics.dt, step_index=self.state.step_index)

        record = StepRecord(
            step=result.state.step_index,
            elapsed=result.state.elapsed,
            state=result.state,
            influences=self.influences,
            gate=gate_snapshot,
            decision=result.decision,
            command=command,
        )
        return SimTick(record=record, events=events, terminal=terminal)

    def _tick_trial(self, command: Command | None) -> SimTick:
        if self.trial_over:
            raise StateError("trial already ended")
        cfg = self.config
        m = model_preference(self.state, cfg.policy)
        inf = influence_vector(self.influences, self.state, cfg.arbitration)
        decision = arbitrate(m, inf, cfg.arbitration, self.decision_rng)
        force = cfg.physics.force_mag if decision.action is Action.RIGHT else -cfg.physics.force_mag
        next_state = physics_step(self.state, force, cfg.physics)
        self.state = next_state

        events: list[GameEvent] = []
        terminal: Outcome | None = None
        out = check_termination(next_state, cfg.physics)
        if out is not Outcome.RUNNING:
            terminal = out
            self.trial_over = True
            events.append(GameEvent(EventKind.GAME_LOST, cause=out))

        record = StepRecord(
            step=next_state.step_index,
            elapsed=next_state.elapsed,
            state=next_state,
            influences=self.influences,
            gate=None,
            decision=decision,
            command=command,
        )
        return SimTick(record=record, events=events, terminal=terminal)


@dataclass(slots=True)
class TrialOutcome:
    cause: Outcome | None  # None when the cap cut the trial short
    lifetime: float
    steps: int


def run_trial(
    config: GameConfig,
    seeds: SeedBundle,
    influences: InfluenceSet,
    cap_s: float = 120.0,
) -> TrialOutcome:
    """One gateless game on a clean track: how long until the agent loses the cart."""
    sim = Simulation(config, seeds, gates_enabled=False, influences=influences)
    max_steps = int(round(cap_s / config.physics.dt))
    for _ in range(max_steps):
        out = sim.tick()
        if out.terminal is not None:
            return TrialOutcome(cause=out.terminal, lifetime=sim.state.elapsed, steps=sim.state.step_index)
    return TrialOutcome(cause=None, lifetime=sim.state.elapsed, steps=sim.state.step_index)


@dataclass(slots=True)
class SessionSummary:
    session_id: str
    ticks: int
    games: int
    gates_passed: int
    final_level: int


def run_session(
    config: GameConfig,
    seeds: SeedBundle,
    *,
    session_id: str,
    duration_s: float,
    bot=None,
    level: int = 1,
    log_path: str | None = None,
    created: str = EPOCH_STAMP,
) -> SessionSummary:
    """Headless gamed session driven by an optional bot, logged when a path is given."""
    influences = bot.initial_influences(config) if bot is not None else None
    sim = Simulation(config, seeds, level=level, influences=influences)
    writer: SessionWriter | None = None
    if log_path is not None:
        header = make_header(
            session_id,
            config,
            seeds,
            roles=["bot"] if bot is not None else [],
            created=created,
            start_level=level,
            start_influences=sim.influences,
        )
        writer = SessionWriter(log_path, header)
    n_steps = int(round(duration_s / config.physics.dt))
    games = 0
    passed = 0
    try:
        for _ in range(n_steps):
            command = bot.decide(sim) if bot is not None else None
            out = sim.tick(command)
            if writer is not None:
                writer.append_step(out.record)
                for ev in out.events:
                    writer.append_event(EventRecord.of(out.record.step, ev))
            for ev in out.events:
                if ev.kind is EventKind.GATE_PASSED:
                    passed += 1
            if out.terminal is not None:
                games += 1
    finally:
        if writer is not None:
            writer.close()
    return SessionSummary(
        session_id=session_id,
        ticks=n_steps,
        games=games,
        gates_passed=passed,
        final_level=sim.level,
    )


def make_header(session_id: str, config: GameConfig, seeds: SeedBundle, *, roles: list[str] | None = None,
                created: str = EPOCH_STAMP, start_level: int = 1,
                start_influences: InfluenceSet | None = None) -> LogHeader:
    if start_influences is None:
        start_influences = preset(PresetSize.MEDIUM, config.influence, config.physics.x_limit)
    return LogHeader(
        session_id=session_id,
        created=created,
        seeds=seeds,
        config=config.to_dict(),
        roles=roles if roles is not None else ["influencer", "coach"],
        start_level=start_level,
        start_influences=start_influences.to_dict(),
    )
