"""Influence circles and action arbitration.

An influencer steers the cart indirectly: each circle attracts the cart by
boosting the action that moves it toward the circle's center.  The final
action is the argmax of the agent preference times the influence vector,
except for an epsilon-random tick now and then.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass, replace
from enum import Enum

from .errors import ConfigError, DomainError
from .physics import CartpoleState
from .policy import Action, PreferenceVector

# Neutral floor: keeps the influence vector strictly positive so the product
# with the agent preference never zeroes an action out entirely.
DELTA = 1e-6


class CircleId(Enum):
    LEFT = "left"
    RIGHT = "right"


class CommandOp(Enum):
    GROW = "grow"
    SHRINK = "shrink"
    MOVE_LEFT = "move_left"
    MOVE_RIGHT = "move_right"
    MOVE_UP = "move_up"
    MOVE_DOWN = "move_down"


@dataclass(slots=True)
class Command:
    op: CommandOp
    circle: CircleId

    def to_dict(self) -> dict:
        return {"op": self.op.value, "circle": self.circle.value}

    @classmethod
    def from_dict(cls, d: dict) -> "Command":
        try:
            return cls(op=CommandOp(d["op"]), circle=CircleId(d["circle"]))
        except (KeyError, ValueError) as exc:
            raise ConfigError(f"command: {exc!r}") from None


@dataclass(slots=True)
class Influence:
    """One circle on the influencer's screen."""

    circle: CircleId
    center_x: float
    center_y: float
    intensity: float

    def validate(self, rules: "InfluenceRules") -> None:
        if not all(math.isfinite(v) for v in (self.center_x, self.center_y, self.intensity)):
            raise DomainError(f"influence {self.circle.value}: non-finite fields")
        if not (0.0 <= self.intensity <= rules.intensity_max):
            raise DomainError(
                f"influence {self.circle.value}: intensity {self.intensity!r} outside [0, {rules.intensity_max}]"
            )
        if not (rules.x_min <= self.center_x <= rules.x_max and rules.y_min <= self.center_y <= rules.y_max):
            raise DomainError(f"influence {self.circle.value}: center outside screen bounds")

    def to_dict(self) -> dict:
        return {"center_x": self.center_x, "center_y": self.center_y, "intensity": self.intensity}


@dataclass(slots=True)
class InfluenceSet:
    left: Influence
    right: Influence

    def get(self, cid: CircleId) -> Influence:
        return self.left if cid is CircleId.LEFT else self.right

    def to_dict(self) -> dict:
        return {"left": self.left.to_dict(), "right": self.right.to_dict()}

    @classmethod
    def from_dict(cls, d: dict) -> "InfluenceSet":
        return cls(
            left=Influence(CircleId.LEFT, **d["left"]),
            right=Influence(CircleId.RIGHT, **d["right"]),
        )


class PresetSize(Enum):
    NONE = "none"
    SMALL = "small"
    MEDIUM = "medium"
    BIG = "big"


@dataclass(slots=True)
class InfluenceRules:
    """Screen bounds, command steps and the preset intensities.

    The preset intensities and the reach/inertia shape parameters come out of
    the calibration run; see analytics.calibrate.
    """

    intensity_max: float = 1.0
    intensity_step: float = 0.05
    position_step: float = 0.1
    x_min: float = -2.4
    x_max: float = 2.4
    y_min: float = 0.0
    y_max: float = 2.0
    preset_x_frac: float = 0.75
    preset_y: float = 0.3
    preset_small: float = 0.05
    preset_medium: float = 0.30
    preset_big: float = 0.90

    def validate(self) -> None:
        if self.intensity_max <= 0:
            raise ConfigError(f"influence.intensity_max: must be > 0, got {self.intensity_max!r}")
        if self.intensity_step <= 0 or self.position_step <= 0:
            raise ConfigError("influence: command steps must be > 0")
        if not (self.x_min < self.x_max and self.y_min <= self.y_max):
            raise ConfigError("influence: screen bounds are inverted")
        sizes = (self.preset_small, self.preset_medium, self.preset_big)
        if not all(0.0 < v <= self.intensity_max for v in sizes):
            raise ConfigError(f"influence presets: intensities must lie in (0, intensity_max], got {sizes}")
        if not (self.preset_small < self.preset_medium < self.preset_big):
            raise ConfigError(f"influence presets: must be strictly increasing, got {sizes}")

    def to_dict(self) -> dict:
        return {
            "intensity_max": self.intensity_max,
            "intensity_step": self.intensity_step,
            "position_step": self.position_step,
            "x_min": self.x_min,
            "x_max": self.x_max,
            "y_min": self.y_min,
            "y_max": self.y_max,
            "preset_x_frac": self.preset_x_frac,
            "preset_y": self.preset_y,
            "preset_small": self.preset_small,
            "preset_medium": self.preset_medium,
            "preset_big": self.preset_big,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "InfluenceRules":
        r = cls(**d)
        r.validate()
        return r


@dataclass(slots=True)
class ArbitrationConfig:
    """Free parameters of the influence field and the random-action rate."""

    epsilon: float = 0.1
    reach_radius: float = 1.6
    distance_exponent: float = 2.0
    inertia_gain: float = 0.8

    def validate(self) -> None:
        if not (0.0 <= self.epsilon <= 1.0):
            raise ConfigError(f"arbitration.epsilon: must be in [0, 1], got {self.epsilon!r}")
        if self.reach_radius <= 0:
            raise ConfigError(f"arbitration.reach_radius: must be > 0, got {self.reach_radius!r}")
        if self.distance_exponent <= 0:
            raise ConfigError(f"arbitration.distance_exponent: must be > 0, got {self.distance_exponent!r}")
        if self.inertia_gain < 0:
            raise ConfigError(f"arbitration.inertia_gain: must be >= 0, got {self.inertia_gain!r}")

    def to_dict(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "reach_radius": self.reach_radius,
            "distance_exponent": self.distance_exponent,
            "inertia_gain": self.inertia_gain,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ArbitrationConfig":
        c = cls(**d)
        c.validate()
        return c


class ActionSource(Enum):
    MODEL = "model"
    INFLUENCE = "influence"
    STOCHASTIC = "stochastic"


@dataclass(slots=True)
class ActionDecision:
    action: Action
    source: ActionSource
    m: PreferenceVector
    inf: PreferenceVector

    def to_dict(self) -> dict:
        return {
            "action": self.action.value,
            "source": self.source.value,
            "m": self.m.as_list(),
            "inf": self.inf.as_list(),
        }


def influence_vector(influences: InfluenceSet, state: CartpoleState, config: ArbitrationConfig) -> PreferenceVector:
    """Combined pull of both circles on the cart, as a weight per action.

    Per circle: a location weight falls off polynomially with the distance from
    the circle's center to the cart pivot and cuts to zero beyond reach_radius;
    the action moving the cart toward the circle gets weight 1, the other gets
    the neutral floor; a speed weight rewards momentum already headed at the
    circle.  Contributions are summed, then floored so both components stay
    strictly positive.
    """
    total_left = 0.0
    total_right = 0.0
    reach = config.reach_radius
    for infl in (influences.left, influences.right):
        if infl.intensity <= 0.0:
            continue
        dx = infl.center_x - state.x
        d = math.hypot(dx, infl.center_y)
        closeness = (reach - d) / reach
        if closeness <= 0.0:
            continue
        w_loc = closeness**config.distance_exponent
        if dx > 0.0:
            dir_left, dir_right, toward = DELTA, 1.0, 1.0
        elif dx < 0.0:
            dir_left, dir_right, toward = 1.0, DELTA, -1.0
        else:
            dir_left, dir_right, toward = DELTA, DELTA, 0.0
        w_spd = 1.0 + config.inertia_gain * (state.x_dot * toward) / (1.0 + abs(state.x_dot))
        if w_spd < DELTA:
            w_spd = DELTA
        scale = w_spd * infl.intensity
        total_left += math.sqrt(dir_left * w_loc) * scale
        total_right += math.sqrt(dir_right * w_loc) * scale
    return PreferenceVector(total_left + DELTA, total_right + DELTA)


def arbitrate(
    m: PreferenceVector,
    inf: PreferenceVector,
    config: ArbitrationConfig,
    decision_rng: random.Random,
) -> ActionDecision:
    """Pick the tick's action.

    Exactly one epsilon draw per tick.  When the draw fires, the action is
    uniform random and attributed Stochastic even if it agrees with the
    product.  Otherwise the action is argmax(m * inf), attributed Influence
    only when that argmax differs from the agent's own argmax.
    """
    u = decision_rng.random()
    if u < config.epsilon:
        action = Action.LEFT if decision_rng.random() < 0.5 else Action.RIGHT
        return ActionDecision(action, ActionSource.STOCHASTIC, m, inf)
    prod_left = m.left * inf.left
    prod_right = m.right * inf.right
    action = Action.LEFT if prod_left >= prod_right else Action.RIGHT
    source = ActionSource.MODEL if action is m.argmax() else ActionSource.INFLUENCE
    return ActionDecision(action, source, m, inf)


def apply_command(influences: InfluenceSet, command: Command, rules: InfluenceRules) -> InfluenceSet:
    """Apply one influencer command, clamped to screen bounds and intensity range."""
    target = influences.get(command.circle)
    op = command.op
    if op is CommandOp.GROW:
        target = replace(target, intensity=min(rules.intensity_max, target.intensity + rules.intensity_step))
    elif op is CommandOp.SHRINK:
        target = replace(target, intensity=max(0.0, target.intensity - rules.intensity_step))
    elif op is CommandOp.MOVE_LEFT:
        target = replace(target, center_x=max(rules.x_min, target.center_x - rules.position_step))
    elif op is CommandOp.MOVE_RIGHT:
        target = replace(target, center_x=min(rules.x_max, target.center_x + rules.position_step))
    elif op is CommandOp.MOVE_UP:
        target = replace(target, center_y=min(rules.y_max, target.center_y + rules.position_step))
    elif op is CommandOp.MOVE_DOWN:
        target = replace(target, center_y=max(rules.y_min, target.center_y - rules.position_step))
    if command.circle is CircleId.LEFT:
        return InfluenceSet(left=target, right=influences.right)
    return InfluenceSet(left=influences.left, right=target)


def preset(size: PresetSize, rules: InfluenceRules, x_limit: float) -> InfluenceSet:
    """Symmetric starting layout: one circle per side at three quarters of the screen."""
    intensity = {
        PresetSize.NONE: 0.0,
        PresetSize.SMALL: rules.preset_small,
        PresetSize.MEDIUM: rules.preset_medium,
        PresetSize.BIG: rules.preset_big,
    }[size]
    off = rules.preset_x_frac * x_limit
    return InfluenceSet(
        left=Influence(CircleId.LEFT, -off, rules.preset_y, intensity),
        right=Influence(CircleId.RIGHT, off, rules.preset_y, intensity),
    )
