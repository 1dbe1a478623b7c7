"""One round-trippable configuration object for the whole stack.

The packaged defaults carry the calibrated values (agent gains, preset
intensities, influence field shape) that make the headless behavioural
experiments come out right; see analytics.calibrate for how they were found
and how to regenerate them.
"""
from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, replace

from .errors import ConfigError
from .influence import ArbitrationConfig, InfluenceRules
from .physics import PhysicsParams
from .policy import PolicySpec
from .rules import GateParams, LevelSpec, default_level_table

CONFIG_ENV_VAR = "SLALOM_CONFIG"
LOG_DIR_ENV_VAR = "SLALOM_LOG_DIR"
CONFIG_FORMAT_VERSION = 1
DEFAULT_CONFIG_FILENAME = "slalom.config.json"


@dataclass(slots=True)
class SessionRules:
    """Server-session shape: the watch-first demo and the command queue."""

    hands_free_games: int = 3
    hands_free_preset: str = "medium"

    def to_dict(self) -> dict:
        return {"hands_free_games": self.hands_free_games, "hands_free_preset": self.hands_free_preset}

    @classmethod
    def from_dict(cls, d: dict) -> "SessionRules":
        return cls(hands_free_games=int(d["hands_free_games"]), hands_free_preset=str(d["hands_free_preset"]))


@dataclass(slots=True)
class CalibrationStamp:
    """Whether the behavioural free parameters in this config were calibrated."""

    calibrated: bool = False
    note: str = ""

    def to_dict(self) -> dict:
        return {"calibrated": self.calibrated, "note": self.note}

    @classmethod
    def from_dict(cls, d: dict) -> "CalibrationStamp":
        return cls(calibrated=bool(d.get("calibrated", False)), note=str(d.get("note", "")))


@dataclass(slots=True)
class GameConfig:
    physics: PhysicsParams = field(default_factory=PhysicsParams)
    arbitration: ArbitrationConfig = field(default_factory=ArbitrationConfig)
    policy: PolicySpec = field(default_factory=PolicySpec)
    gates: GateParams = field(default_factory=GateParams)
    influence: InfluenceRules = field(default_factory=InfluenceRules)
    levels: dict[int, LevelSpec] = field(default_factory=default_level_table)
    session: SessionRules = field(default_factory=SessionRules)
    calibration: CalibrationStamp = field(default_factory=CalibrationStamp)

    def validate(self) -> None:
        self.physics.validate()
        self.arbitration.validate()
        self.policy.validate()
        self.gates.validate()
        self.influence.validate()
        if 1 not in self.levels:
            raise ConfigError("levels: level 1 must exist")
        for n, spec in self.levels.items():
            if spec.level != n:
                raise ConfigError(f"levels: key {n} holds spec for level {spec.level}")
            if spec.gate_count <= 0:
                raise ConfigError(f"levels[{n}].gate_count: must be > 0")
        if self.session.hands_free_games < 0:
            raise ConfigError("session.hands_free_games: must be >= 0")

    def to_dict(self) -> dict:
        return {
            "format_version": CONFIG_FORMAT_VERSION,
            "physics": self.physics.to_dict(),
            "arbitration": self.arbitration.to_dict(),
            "policy": self.policy.to_dict(),
            "gates": self.gates.to_dict(),
            "influence": self.influence.to_dict(),
            "levels": [spec.to_dict() for _, spec in sorted(self.levels.items())],
            "session": self.session.to_dict(),
            "calibration": self.calibration.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "GameConfig":
        if not isinstance(d, dict):
            raise ConfigError("config: top level must be an object")
        version = d.get("format_version")
        if version != CONFIG_FORMAT_VERSION:
            raise ConfigError(f"config.format_version: expected {CONFIG_FORMAT_VERSION}, got {version!r}")
        try:
            levels = [LevelSpec.from_dict(ld) for ld in d["levels"]]
            cfg = cls(
                physics=PhysicsParams.from_dict(d["physics"]),
                arbitration=ArbitrationConfig.from_dict(d["arbitration"]),
                policy=PolicySpec.from_dict(d["policy"]),
                gates=GateParams.from_dict(d["gates"]),
                influence=InfluenceRules.from_dict(d["influence"]),
                levels={spec.level: spec for spec in levels},
                session=SessionRules.from_dict(d["session"]),
                calibration=CalibrationStamp.from_dict(d["calibration"]),
            )
        except (KeyError, TypeError) as exc:
            raise ConfigError(f"config: missing or malformed field ({exc!r})") from None
        cfg.validate()
        return cfg


def save_config(config: GameConfig, path: str | os.PathLike) -> None:
    config.validate()
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(config.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_config(path: str | os.PathLike) -> GameConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file: not valid JSON ({exc})") from None
    return GameConfig.from_dict(doc)


def resolve_config(path: str | None = None) -> GameConfig:
    """Explicit path, else the environment override, else packaged defaults."""
    if path is None:
        path = os.environ.get(CONFIG_ENV_VAR)
    if path:
        return load_config(path)
    return default_config()


# --- packaged defaults (calibrated) -----------------------------------------
#
# These numbers were produced by the seeded search in analytics.calibrate and
# verified by the acceptance suite's behavioural experiments.  Regenerate with
# `slalom calibrate --out <file>` and compare before editing by hand.

# The preset intensities sit near the arbiter's neutral floor on purpose: the
# floor sets the scale of "weak", and the behavioural targets split around it.
# Small never overcomes the agent, medium holds the cart near a circle for
# minutes, big overrides the agent outright and fells the pole.
CALIBRATED_POLICY = dict(k_theta=10.0, k_theta_dot=3.0, sharpness=0.35)
CALIBRATED_ARBITRATION = dict(epsilon=0.1, reach_radius=1.6, distance_exponent=2.0, inertia_gain=1.1)
CALIBRATED_PRESETS = dict(preset_small=1e-7, preset_medium=1.2e-6, preset_big=0.90)
CALIBRATION_NOTE = "pinned by seeded search; see analytics.calibrate"


def default_config() -> GameConfig:
    cfg = GameConfig()
    cfg.policy = replace(cfg.policy, **CALIBRATED_POLICY)
    cfg.arbitration = replace(cfg.arbitration, **CALIBRATED_ARBITRATION)
    cfg.influence = replace(cfg.influence, **CALIBRATED_PRESETS)
    cfg.calibration = CalibrationStamp(calibrated=True, note=CALIBRATION_NOTE)
    cfg.validate()
    return cfg


def uncalibrated_config() -> GameConfig:
    """Raw defaults with the calibration stamp cleared; experiments refuse these."""
    cfg = GameConfig()
    cfg.calibration = CalibrationStamp(calibrated=False, note="never calibrated")
    return cfg
