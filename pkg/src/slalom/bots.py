"""Scripted influencer strategies for headless sessions.

Each bot plays one of the strategies observed from human teams: leave a preset
alone, rebalance circle sizes against the active gate, or chase the cart with
both circles.  A bot issues at most one command per tick.
"""
from __future__ import annotations

from dataclasses import dataclass

from .config import GameConfig
from .errors import ConfigError
from .influence import CircleId, Command, CommandOp, InfluenceSet, PresetSize, preset
from .rules import GateColor


class StaticBot:
    """Places a preset and never touches it again."""

    def __init__(self, size: PresetSize = PresetSize.MEDIUM):
        self.size = size

    def initial_influences(self, config: GameConfig) -> InfluenceSet:
        return preset(self.size, config.influence, config.physics.x_limit)

    def decide(self, sim) -> Command | None:
        return None


class SizeBalancerBot:
    """Grows the circle on the gate side and shrinks the opposite one.

    Circles attract the cart, so to send it toward the correct zone you grow
    the circle sitting in that zone and kill the pull from the other side.
    Issues one command per command_period seconds, alternating grow and
    shrink.
    """

    def __init__(self, size: PresetSize = PresetSize.MEDIUM, command_period: float = 0.2):
        self.size = size
        self.command_period = command_period
        self._flip = False

    def initial_influences(self, config: GameConfig) -> InfluenceSet:
        return preset(self.size, config.influence, config.physics.x_limit)

    def decide(self, sim) -> Command | None:
        period_ticks = max(1, int(round(self.command_period / sim.config.physics.dt)))
        if sim.state.step_index % period_ticks != 0:
            return None
        gate = sim.game.active_gate if sim.game else None
        if gate is None:
            return None
        x = sim.state.x
        if gate.color is GateColor.BLUE and x <= gate.line_x:
            need = CircleId.RIGHT  # cart must move right, so pull from the right
        elif gate.color is GateColor.RED and x >= gate.line_x:
            need = CircleId.LEFT
        else:
            return None
        self._flip = not self._flip
        if need is CircleId.RIGHT:
            return Command(CommandOp.GROW, CircleId.RIGHT) if self._flip else Command(CommandOp.SHRINK, CircleId.LEFT)
        return Command(CommandOp.GROW, CircleId.LEFT) if self._flip else Command(CommandOp.SHRINK, CircleId.RIGHT)


class EscortBot:
    """Chases the cart with both circles stacked on its leading side.

    Two pulls from the same side never cancel, and the speed weight favours a
    circle the cart is already moving toward, so a leading pair flips more
    decisions than any symmetric flank.  Reissues a move whenever a circle
    drifts more than the tolerance from its slot; otherwise stays quiet.
    """

    def __init__(self, size: PresetSize = PresetSize.MEDIUM, lead: float = 0.5,
                 spacing: float = 0.35, tolerance: float = 0.1):
        self.size = size
        self.lead = lead
        self.spacing = spacing
        self.tolerance = tolerance

    def initial_influences(self, config: GameConfig) -> InfluenceSet:
        return preset(self.size, config.influence, config.physics.x_limit)

    def decide(self, sim) -> Command | None:
        x, v = sim.state.x, sim.state.x_dot
        direction = 1.0 if (v > 0.05 or (abs(v) <= 0.05 and x >= 0)) else -1.0
        slots = sorted((x + direction * self.lead, x + direction * (self.lead + self.spacing)))
        targets = (
            (CircleId.LEFT, slots[0], sim.influences.left.center_x),
            (CircleId.RIGHT, slots[1], sim.influences.right.center_x),
        )
        worst = None
        worst_drift = self.tolerance
        for cid, target, current in targets:
            drift = abs(current - target)
            if drift > worst_drift:
                worst_drift = drift
                worst = (cid, target, current)
        if worst is None:
            return None
        cid, target, current = worst
        op = CommandOp.MOVE_LEFT if current > target else CommandOp.MOVE_RIGHT
        return Command(op, cid)


@dataclass(slots=True)
class BotSpec:
    """Parsed form of the CLI `--bot` flag, e.g. static:medium or escort."""

    kind: str
    preset: PresetSize = PresetSize.MEDIUM

    @classmethod
    def parse(cls, text: str) -> "BotSpec":
        kind, _, preset_name = text.partition(":")
        kind = kind.strip().lower()
        if kind not in ("static", "sizebalancer", "escort"):
            raise ConfigError(f"bot: unknown kind {kind!r} (want static, sizebalancer or escort)")
        size = PresetSize.MEDIUM
        if preset_name:
            try:
                size = PresetSize(preset_name.strip().lower())
            except ValueError:
                raise ConfigError(f"bot: unknown preset {preset_name!r}") from None
        return cls(kind=kind, preset=size)

    def build(self):
        if self.kind == "static":
            return StaticBot(self.preset)
        if self.kind == "sizebalancer":
            return SizeBalancerBot(self.preset)
        return EscortBot(self.preset)
