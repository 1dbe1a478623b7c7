"""Game rules: slalom gates, levels and the per-tick orchestration.

A game is a fixed sequence of alternating blue/red gates.  Blue wants the cart
right of its line, red wants it left.  Holding the cart in the correct zone
fills the active gate; three consecutive won games advance the level, which
adds gates and disturbances.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field, replace
from enum import Enum

from .errors import ConfigError, StateError
from .influence import ActionDecision, ArbitrationConfig, InfluenceSet, influence_vector, arbitrate
from .physics import (
    BumpSpec,
    CartpoleState,
    DisturbanceSet,
    DisturbanceStream,
    Outcome,
    PhysicsParams,
    SlopeSpec,
    WindSpec,
    check_termination,
    step,
)
from .policy import Action, PolicySpec, model_preference

WINS_TO_ADVANCE = 3


class GateColor(Enum):
    BLUE = "blue"
    RED = "red"


class GateStatus(Enum):
    PENDING = "pending"
    ACTIVE = "active"
    PASSED = "passed"
    FAILED = "failed"


@dataclass(slots=True)
class GateParams:
    """Gate placement and fill speed."""

    pass_time: float = 1.5
    # Lines land within the middle of the screen and the correct zone keeps at
    # least this fraction of the screen half-width.
    max_line_frac: float = 0.5
    min_zone_frac: float = 0.6

    def validate(self) -> None:
        if self.pass_time <= 0:
            raise ConfigError(f"gates.pass_time: must be > 0, got {self.pass_time!r}")
        if not (0 < self.min_zone_frac <= 1.0 and 0 < self.max_line_frac <= 1.0):
            raise ConfigError("gates: zone fractions must lie in (0, 1]")

    def to_dict(self) -> dict:
        return {"pass_time": self.pass_time, "max_line_frac": self.max_line_frac, "min_zone_frac": self.min_zone_frac}

    @classmethod
    def from_dict(cls, d: dict) -> "GateParams":
        g = cls(**d)
        g.validate()
        return g


@dataclass(slots=True)
class Gate:
    color: GateColor
    line_x: float
    status: GateStatus = GateStatus.PENDING
    in_zone_steps: int = 0
    progress: float = 0.0


def in_correct_zone(color: GateColor, line_x: float, cart_x: float) -> bool:
    if color is GateColor.BLUE:
        return cart_x > line_x
    return cart_x < line_x


def update_gate(gate: Gate, cart_x: float, dt: float, pass_time: float) -> Gate:
    """Credit dwell time while the cart sits in the gate's correct zone.

    Progress never decays and is derived from an integer step count, so a cart
    held in the zone for exactly pass_time seconds of ticks reaches 1 without
    float-accumulation surprises.
    """
    if gate.status is not GateStatus.ACTIVE:
        raise StateError(f"cannot update a {gate.status.value} gate")
    if not in_correct_zone(gate.color, gate.line_x, cart_x):
        return gate
    steps = gate.in_zone_steps + 1
    progress = (steps * dt) / pass_time
    if progress >= 1.0:
        return replace(gate, status=GateStatus.PASSED, in_zone_steps=steps, progress=1.0)
    return replace(gate, in_zone_steps=steps, progress=progress)


@dataclass(slots=True)
class LevelSpec:
    level: int
    gate_count: int
    disturbances: DisturbanceSet

    def to_dict(self) -> dict:
        return {"level": self.level, "gate_count": self.gate_count, "disturbances": self.disturbances.to_dict()}

    @classmethod
    def from_dict(cls, d: dict) -> "LevelSpec":
        return cls(level=int(d["level"]), gate_count=int(d["gate_count"]), disturbances=DisturbanceSet.from_dict(d["disturbances"]))


def default_level_table(
    slope_angle: float = 0.02,
    gust_rate: float = 0.25,
    gust_impulse: float = 0.35,
    gust_duration: float = 0.4,
    bump_amplitude: float = 0.012,
    bump_wavelength: float = 1.1,
) -> dict[int, LevelSpec]:
    """Three levels: clean track, then slope+wind, then slope+wind+bumps."""
    slope = SlopeSpec(angle=slope_angle)
    wind = WindSpec(gust_rate=gust_rate, gust_impulse=gust_impulse, gust_duration=gust_duration)
    bumps = BumpSpec(amplitude=bump_amplitude, wavelength=bump_wavelength)
    return {
        1: LevelSpec(1, 4, DisturbanceSet()),
        2: LevelSpec(2, 8, DisturbanceSet(slope=slope, wind=wind)),
        3: LevelSpec(3, 12, DisturbanceSet(slope=slope, wind=wind, bumps=bumps)),
    }


class EventKind(Enum):
    GATE_PASSED = "gate_passed"
    GATE_FAILED = "gate_failed"
    GAME_WON = "game_won"
    GAME_LOST = "game_lost"
    LEVEL_ADVANCED = "level_advanced"
    PAUSED = "paused"
    RESUMED = "resumed"
    HANDS_FREE_STARTED = "hands_free_started"
    HANDS_FREE_ENDED = "hands_free_ended"


@dataclass(slots=True)
class GameEvent:
    kind: EventKind
    cause: Outcome | None = None
    level: int | None = None


@dataclass(slots=True)
class GameState:
    level_spec: LevelSpec
    gates: list[Gate]
    active_index: int = 0
    consecutive_wins: int = 0
    score: int = 0
    best_score: int = 0
    game_passed: int = 0
    outcome: Outcome = Outcome.RUNNING
    paused: bool = False

    @property
    def active_gate(self) -> Gate | None:
        if 0 <= self.active_index < len(self.gates):
            g = self.gates[self.active_index]
            return g if g.status is GateStatus.ACTIVE else None
        return None


def generate_gates(spec: LevelSpec, rng: random.Random, x_limit: float, params: GateParams) -> list[Gate]:
    """Alternating colors, lines drawn uniformly where the correct zone stays wide enough."""
    lo = -params.max_line_frac * x_limit
    hi = params.max_line_frac * x_limit
    max_blue = (1.0 - params.min_zone_frac) * x_limit  # zone is (line, x_limit]
    min_red = -max_blue
    color = GateColor.BLUE if rng.random() < 0.5 else GateColor.RED
    gates: list[Gate] = []
    for _ in range(spec.gate_count):
        if color is GateColor.BLUE:
            line = rng.uniform(lo, min(hi, max_blue))
        else:
            line = rng.uniform(max(lo, min_red), hi)
        gates.append(Gate(color=color, line_x=line))
        color = GateColor.RED if color is GateColor.BLUE else GateColor.BLUE
    gates[0] = replace(gates[0], status=GateStatus.ACTIVE)
    return gates


def new_game(level_spec: LevelSpec, gate_rng: random.Random, x_limit: float, params: GateParams, *,
             consecutive_wins: int = 0, score: int = 0, best_score: int = 0) -> GameState:
    gates = generate_gates(level_spec, gate_rng, x_limit, params)
    return GameState(
        level_spec=level_spec,
        gates=gates,
        active_index=0,
        consecutive_wins=consecutive_wins,
        score=score,
        best_score=best_score,
        game_passed=0,
    )


# Calibrated alongside the policy gains: wide enough that an unsteered cart
# drifts off screen within the target lifetime band, small enough that games
# never start lost.
START_SPREAD = 0.10


def perturbed_start(gate_rng: random.Random, dt: float, step_index: int = 0, spread: float = START_SPREAD) -> CartpoleState:
    """Fresh cart near the center, jittered uniformly in all four state fields."""
    return CartpoleState(
        x=gate_rng.uniform(-spread, spread),
        x_dot=gate_rng.uniform(-spread, spread),
        theta=gate_rng.uniform(-spread, spread),
        theta_dot=gate_rng.uniform(-spread, spread),
        step_index=step_index,
        elapsed=step_index * dt,
    )


@dataclass(slots=True)
class TickResult:
    state: CartpoleState
    game: GameState
    decision: ActionDecision
    events: list[GameEvent] = field(default_factory=list)

    @property
    def terminal(self) -> bool:
        return self.game.outcome is not Outcome.RUNNING


def tick(
    game: GameState,
    state: CartpoleState,
    influences: InfluenceSet,
    policy: PolicySpec,
    physics_params: PhysicsParams,
    arb_config: ArbitrationConfig,
    gate_params: GateParams,
    decision_rng: random.Random,
    disturbance_stream: DisturbanceStream,
) -> TickResult:
    """One authoritative game tick: decide, integrate, score, terminate.

    The active gate is credited before termination is checked, so a tick that
    fills the final gate wins even if the cart crossed a limit on the same
    step.  Otherwise an exit or fall loses the game and fails the active gate.
    """
    if game.outcome is not Outcome.RUNNING:
        raise StateError("tick on a finished game")
    if game.paused:
        raise StateError("tick on a paused game")

    m = model_preference(state, policy)
    inf = influence_vector(influences, state, arb_config)
    decision = arbitrate(m, inf, arb_config, decision_rng)
    force = physics_params.force_mag if decision.action is Action.RIGHT else -physics_params.force_mag
    next_state = step(state, force, physics_params, game.level_spec.disturbances, disturbance_stream)

    events: list[GameEvent] = []
    gates = game.gates
    idx = game.active_index
    new_gate = update_gate(gates[idx], next_state.x, physics_params.dt, gate_params.pass_time)
    if new_gate is not gates[idx]:
        gates = list(gates)
        gates[idx] = new_gate

    score = game.score
    best = game.best_score
    game_passed = game.game_passed
    outcome = Outcome.RUNNING

    if new_gate.status is GateStatus.PASSED:
        events.append(GameEvent(EventKind.GATE_PASSED))
        score += 1
        game_passed += 1
        best = max(best, game_passed)
        if idx + 1 >= len(gates):
            outcome = Outcome.WON
            events.append(GameEvent(EventKind.GAME_WON))
        else:
            gates[idx + 1] = replace(gates[idx + 1], status=GateStatus.ACTIVE)
            idx += 1

    if outcome is Outcome.RUNNING:
        term = check_termination(next_state, physics_params)
        if term is not Outcome.RUNNING:
            outcome = term
            active = gates[idx]
            if active.status is GateStatus.ACTIVE:
                if gates is game.gates:
                    gates = list(gates)
                gates[idx] = replace(active, status=GateStatus.FAILED)
            events.append(GameEvent(EventKind.GATE_FAILED))
            events.append(GameEvent(EventKind.GAME_LOST, cause=term))

    new_game_state = GameState(
        level_spec=game.level_spec,
        gates=gates,
        active_index=idx,
        consecutive_wins=game.consecutive_wins,
        score=score,
        best_score=best,
        game_passed=game_passed,
        outcome=outcome,
        paused=game.paused,
    )
    return TickResult(state=next_state, game=new_game_state, decision=decision, events=events)


def resolve_game_end(
    game: GameState,
    gate_rng: random.Random,
    x_limit: float,
    gate_params: GateParams,
    level_table: dict[int, LevelSpec],
    *,
    progression: bool = True,
) -> tuple[GameState, list[GameEvent]]:
    """Fold a finished game into the next one: fresh gates, maybe a new level."""
    if game.outcome is Outcome.RUNNING:
        raise StateError("resolve_game_end on a running game")
    events: list[GameEvent] = []
    level_spec = game.level_spec
    wins = game.consecutive_wins
    if progression and game.outcome is Outcome.WON:
        wins += 1
        if wins >= WINS_TO_ADVANCE:
            wins = 0
            next_level = level_spec.level + 1
            if next_level in level_table:
                level_spec = level_table[next_level]
                events.append(GameEvent(EventKind.LEVEL_ADVANCED, level=level_spec.level))
            # Past the last level the game stays there with fresh gates.
    elif progression:
        wins = 0
    fresh = new_game(
        level_spec,
        gate_rng,
        x_limit,
        gate_params,
        consecutive_wins=wins,
        score=game.score,
        best_score=game.best_score,
    )
    return fresh, events
