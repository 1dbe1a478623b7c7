"""Deterministic replay: a log header plus the command timeline regenerates the run.

Replay rebuilds the simulation from the header's seeds and embedded config,
feeds it the logged commands at their logged ticks, and compares what comes
out against what was recorded, reporting the first field that differs.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .config import GameConfig
from .errors import UnsupportedVersionError
from .influence import Command, InfluenceSet
from .runner import Simulation
from .sessionlog import LOG_FORMAT_VERSION, LogHeader, ParsedLog, StepRecord


@dataclass(slots=True)
class Divergence:
    step: int
    field: str
    logged: object
    regenerated: object


@dataclass(slots=True)
class ReplayReport:
    equal: bool
    steps_compared: int
    first_divergence: Divergence | None = None


def command_timeline(steps: list[StepRecord]) -> dict[int, Command]:
    return {rec.step: rec.command for rec in steps if rec.command is not None}


def regenerate(header: LogHeader, commands: dict[int, Command], n_steps: int) -> list[StepRecord]:
    """Re-run the engine exactly as the logged session ran it."""
    if header.format_version != LOG_FORMAT_VERSION:
        raise UnsupportedVersionError(header.format_version, LOG_FORMAT_VERSION)
    config = GameConfig.from_dict(header.config)
    influences = InfluenceSet.from_dict(header.start_influences) if header.start_influences else None
    sim = Simulation(config, header.seeds, level=header.start_level, influences=influences)
    records: list[StepRecord] = []
    next_index = sim.state.step_index + 1
    for _ in range(n_steps):
        out = sim.tick(commands.get(next_index))
        records.append(out.record)
        next_index = out.record.step + 1
    return records


def verify(parsed: ParsedLog) -> ReplayReport:
    """Replay a parsed log and compare step records field for field."""
    logged = parsed.steps
    regenerated = regenerate(parsed.header, command_timeline(logged), len(logged))
    for got, want in zip(regenerated, logged):
        div = _compare(want, got)
        if div is not None:
            return ReplayReport(equal=False, steps_compared=len(logged), first_divergence=div)
    return ReplayReport(equal=True, steps_compared=len(logged))


def _compare(logged: StepRecord, regen: StepRecord) -> Divergence | None:
    lo = logged.to_obj()
    re = regen.to_obj()
    return _diff(lo, re, logged.step, "")


def _diff(a: object, b: object, step: int, path: str) -> Divergence | None:
    if isinstance(a, dict) and isinstance(b, dict):
        for key in sorted(set(a) | set(b)):
            d = _diff(a.get(key), b.get(key), step, f"{path}.{key}" if path else key)
            if d is not None:
                return d
        return None
    if isinstance(a, list) and isinstance(b, list):
        if len(a) != len(b):
            return Divergence(step, path, a, b)
        for i, (x, y) in enumerate(zip(a, b)):
            d = _diff(x, y, step, f"{path}[{i}]")
            if d is not None:
                return d
        return None
    if isinstance(a, float) and isinstance(b, float):
        if a == b or (math.isnan(a) and math.isnan(b)):
            return None
        return Divergence(step, path, a, b)
    if a != b:
        return Divergence(step, path, a, b)
    return None
