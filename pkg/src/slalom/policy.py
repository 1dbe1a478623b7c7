"""Balancing agents: map a cart snapshot to a preference over the two push actions.

The stock agent is a screen-blind balancer.  It reads only the pole angle and
angular velocity, which is exactly why an unsteered cart eventually wanders off
the screen: nothing in its preference ever mentions x.
"""
from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass
from enum import Enum

from .errors import ConfigError, DomainError, UnsupportedVersionError
from .physics import CartpoleState

POLICY_FORMAT_VERSION = 1

# Softmax exponent clamp.  Only guards overflow; at +/-50 the preference ratio
# is ~e^100 and the losing side has long stopped mattering.
EXP_CLAMP = 50.0

# Lower bound for linear-map preferences so a vector never collapses to (0, 0).
PREF_FLOOR = 1e-9


class Action(Enum):
    LEFT = "left"
    RIGHT = "right"


@dataclass(slots=True)
class PreferenceVector:
    """Nonnegative weight per action.  Never both zero, never negative, never NaN."""

    left: float
    right: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.left) and math.isfinite(self.right)):
            raise DomainError(f"preference vector is not finite: ({self.left!r}, {self.right!r})")
        if self.left < 0.0 or self.right < 0.0:
            raise DomainError(f"preference vector has a negative component: ({self.left!r}, {self.right!r})")
        if self.left == 0.0 and self.right == 0.0:
            raise DomainError("preference vector is all-zero")

    def argmax(self) -> Action:
        # Ties go left so arbitration stays deterministic.
        return Action.LEFT if self.left >= self.right else Action.RIGHT

    def as_list(self) -> list[float]:
        return [self.left, self.right]


class PolicyKind(Enum):
    ANALYTIC_BALANCER = "analytic_balancer"
    LINEAR_WEIGHTS = "linear_weights"


@dataclass(slots=True)
class PolicySpec:
    """Parameters for one agent.

    analytic_balancer: softmax over +/- sharpness * (k_theta*theta + k_theta_dot*theta_dot).
    linear_weights: per-action clamped affine map of (x, x_dot, theta, theta_dot);
    weights holds 10 floats, [w_x, w_xdot, w_theta, w_thetadot, bias] for left then right.
    """

    kind: PolicyKind = PolicyKind.ANALYTIC_BALANCER
    k_theta: float = 8.0
    k_theta_dot: float = 2.0
    sharpness: float = 3.0
    weights: list[float] | None = None

    def validate(self) -> None:
        if not isinstance(self.kind, PolicyKind):
            raise ConfigError(f"policy.kind: unknown kind {self.kind!r}")
        if self.kind is PolicyKind.ANALYTIC_BALANCER:
            for name in ("k_theta", "k_theta_dot", "sharpness"):
                v = getattr(self, name)
                if not (isinstance(v, (int, float)) and math.isfinite(v)):
                    raise ConfigError(f"policy.{name}: must be finite, got {v!r}")
            if self.sharpness <= 0:
                raise ConfigError(f"policy.sharpness: must be > 0, got {self.sharpness!r}")
        else:
            w = self.weights
            if w is None or len(w) != 10:
                raise ConfigError(f"policy.weights: linear_weights needs exactly 10 floats, got {w!r}")
            if not all(isinstance(v, (int, float)) and math.isfinite(v) for v in w):
                raise ConfigError("policy.weights: all entries must be finite numbers")

    def to_dict(self) -> dict:
        d: dict = {"kind": self.kind.value}
        if self.kind is PolicyKind.ANALYTIC_BALANCER:
            d.update(k_theta=self.k_theta, k_theta_dot=self.k_theta_dot, sharpness=self.sharpness)
        else:
            d["weights"] = list(self.weights or [])
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "PolicySpec":
        try:
            kind = PolicyKind(d.get("kind"))
        except ValueError:
            raise ConfigError(f"policy.kind: unknown kind {d.get('kind')!r}") from None
        spec = cls(
            kind=kind,
            k_theta=float(d.get("k_theta", 8.0)),
            k_theta_dot=float(d.get("k_theta_dot", 2.0)),
            sharpness=float(d.get("sharpness", 3.0)),
            weights=[float(v) for v in d["weights"]] if d.get("weights") is not None else None,
        )
        spec.validate()
        return spec


def model_preference(state: CartpoleState, spec: PolicySpec) -> PreferenceVector:
    """The agent's own preference for the current snapshot, normalized to sum 1."""
    if not state.is_finite():
        raise DomainError(f"cartpole state is not finite: {state!r}")
    if spec.kind is PolicyKind.ANALYTIC_BALANCER:
        score = spec.k_theta * state.theta + spec.k_theta_dot * state.theta_dot
        a = spec.sharpness * score
        if a > EXP_CLAMP:
            a = EXP_CLAMP
        elif a < -EXP_CLAMP:
            a = -EXP_CLAMP
        right = math.exp(a)
        left = math.exp(-a)
        z = left + right
        return PreferenceVector(left / z, right / z)

    w = spec.weights
    assert w is not None
    features = (state.x, state.x_dot, state.theta, state.theta_dot)
    left = w[4] + w[0] * features[0] + w[1] * features[1] + w[2] * features[2] + w[3] * features[3]
    right = w[9] + w[5] * features[0] + w[6] * features[1] + w[7] * features[2] + w[8] * features[3]
    return PreferenceVector(max(PREF_FLOOR, left), max(PREF_FLOOR, right))


def save_policy(spec: PolicySpec, path: str | os.PathLike) -> None:
    spec.validate()
    doc = {"format_version": POLICY_FORMAT_VERSION, **spec.to_dict()}
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_policy(path: str | os.PathLike) -> PolicySpec:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"policy file: not valid JSON ({exc})") from None
    if not isinstance(doc, dict):
        raise ConfigError("policy file: top level must be an object")
    version = doc.pop("format_version", None)
    if version != POLICY_FORMAT_VERSION:
        raise UnsupportedVersionError(version, POLICY_FORMAT_VERSION)
    return PolicySpec.from_dict(doc)
