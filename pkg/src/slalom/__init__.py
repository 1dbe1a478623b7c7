"""Two-player cartpole slalom.

A balancing agent drives the cart; a second player steers it indirectly by
placing influence circles that bid against the agent's own preference each
tick.  The package covers the full loop: physics and policy, influence
arbitration, gates and scoring, a realtime two-role server, session telemetry
with deterministic replay, analytics, renderers and calibration.
"""
from .analytics import (
    attribution,
    classify,
    cons_gates,
    lifetime_experiment,
    summarize_session,
    summary_csv,
    summary_table,
)
from .bots import BotSpec, EscortBot, SizeBalancerBot, StaticBot
from .calibrate import CalibrationTargets, calibrate
from .config import GameConfig, default_config, load_config, resolve_config, save_config, uncalibrated_config
from .errors import (
    ConfigError,
    DomainError,
    LogFormatError,
    ProtocolError,
    SlalomError,
    StateError,
    UncalibratedError,
    UnsupportedVersionError,
)
from .influence import (
    ActionDecision,
    ActionSource,
    CircleId,
    Command,
    CommandOp,
    Influence,
    InfluenceSet,
    PresetSize,
    apply_command,
    arbitrate,
    influence_vector,
    preset,
)
from .physics import CartpoleState, Outcome, PhysicsParams, step
from .policy import Action, PolicySpec, model_preference
from .render import render_outcome_sequence, render_session_circle, render_tier_curves
from .replay import verify
from .rules import EventKind, GameEvent, GameState, GateColor, new_game, tick
from .runner import Simulation, run_session, run_trial
from .server import ServerSettings, SessionHost, create_app
from .sessionlog import LogHeader, ParsedLog, SeedBundle, SessionWriter, parse

__all__ = [
    "Action",
    "ActionDecision",
    "ActionSource",
    "BotSpec",
    "CalibrationTargets",
    "CartpoleState",
    "CircleId",
    "Command",
    "CommandOp",
    "ConfigError",
    "DomainError",
    "EscortBot",
    "EventKind",
    "GameConfig",
    "GameEvent",
    "GameState",
    "GateColor",
    "Influence",
    "InfluenceSet",
    "LogFormatError",
    "LogHeader",
    "Outcome",
    "ParsedLog",
    "PhysicsParams",
    "PolicySpec",
    "PresetSize",
    "ProtocolError",
    "SeedBundle",
    "ServerSettings",
    "SessionHost",
    "SessionWriter",
    "Simulation",
    "SizeBalancerBot",
    "SlalomError",
    "StateError",
    "StaticBot",
    "UncalibratedError",
    "UnsupportedVersionError",
    "apply_command",
    "arbitrate",
    "attribution",
    "calibrate",
    "classify",
    "cons_gates",
    "create_app",
    "default_config",
    "influence_vector",
    "lifetime_experiment",
    "load_config",
    "model_preference",
    "new_game",
    "parse",
    "preset",
    "render_outcome_sequence",
    "render_session_circle",
    "render_tier_curves",
    "resolve_config",
    "run_session",
    "run_trial",
    "save_config",
    "step",
    "summarize_session",
    "summary_csv",
    "summary_table",
    "tick",
    "uncalibrated_config",
    "verify",
]
