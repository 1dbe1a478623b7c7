"""Session analytics: trial segmentation, action attribution, tiers, experiments.

Everything here consumes parsed session logs (or runs headless experiments)
and stays pure: no global state, explicit seeds everywhere.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from enum import Enum

from .config import GameConfig
from .errors import UncalibratedError
from .influence import ActionSource, PresetSize, preset
from .physics import Outcome
from .rules import EventKind
from .runner import TrialOutcome, run_trial
from .sessionlog import EventRecord, ParsedLog, SeedBundle, StepRecord


class TrialEnd(Enum):
    FALL = "fall"
    EXIT = "exit"
    WON = "won"
    OPEN = "open"  # session ended mid-game with gates already banked


@dataclass(slots=True)
class Trial:
    gates_passed: int
    end: TrialEnd


@dataclass(slots=True)
class TrialBreakdown:
    trials: list[Trial]
    total_passed: int
    total_failed: int
    average_consgates: float | None  # None when the log holds no trials

    @property
    def pass_ratio(self) -> float | None:
        total = self.total_passed + self.total_failed
        return self.total_passed / total if total else None


def _demo_spans(events: list[EventRecord]) -> list[tuple[int, int]]:
    """Step ranges covered by the hands-free demo, inclusive of both ends."""
    spans = []
    start = None
    for ev in events:
        if ev.kind is EventKind.HANDS_FREE_STARTED:
            start = ev.step
        elif ev.kind is EventKind.HANDS_FREE_ENDED and start is not None:
            spans.append((start, ev.step))
            start = None
    if start is not None:
        spans.append((start, float("inf")))  # demo never ended: exclude the tail
    return spans


def _in_spans(step: int, spans: list[tuple[int, int]]) -> bool:
    return any(lo < step <= hi for lo, hi in spans)


def cons_gates(
    parsed: ParsedLog,
    *,
    wins_close_trials: bool = True,
    include_hands_free: bool = False,
) -> TrialBreakdown:
    """Split a session into trials at terminal events and count gates per trial.

    A lost game always closes a trial.  A won game closes one too by default
    (its gates still count); pass wins_close_trials=False to fold won games
    into the following trial instead.  A session that ends mid-game keeps its
    banked gates as a final open trial; an empty tail is not a trial.
    """
    spans = [] if include_hands_free else _demo_spans(parsed.events)
    trials: list[Trial] = []
    current = 0
    total_passed = 0
    total_failed = 0
    for ev in parsed.events:
        if not include_hands_free and _in_spans(ev.step, spans):
            continue
        if ev.kind is EventKind.GATE_PASSED:
            current += 1
            total_passed += 1
        elif ev.kind is EventKind.GATE_FAILED:
            total_failed += 1
        elif ev.kind is EventKind.GAME_LOST:
            end = TrialEnd.FALL if ev.cause is Outcome.FALL else TrialEnd.EXIT
            trials.append(Trial(gates_passed=current, end=end))
            current = 0
        elif ev.kind is EventKind.GAME_WON and wins_close_trials:
            trials.append(Trial(gates_passed=current, end=TrialEnd.WON))
            current = 0
    if current > 0:
        trials.append(Trial(gates_passed=current, end=TrialEnd.OPEN))
    average = sum(t.gates_passed for t in trials) / len(trials) if trials else None
    return TrialBreakdown(
        trials=trials,
        total_passed=total_passed,
        total_failed=total_failed,
        average_consgates=average,
    )


@dataclass(slots=True)
class AttributionSummary:
    model_pct: float
    influence_pct: float
    stochastic_pct: float
    ticks: int

    def as_row(self) -> tuple[float, float, float]:
        return (self.influence_pct, self.model_pct, self.stochastic_pct)


def attribution(parsed: ParsedLog, *, include_hands_free: bool = False) -> AttributionSummary:
    """Share of ticks decided by the agent, the influences, and the epsilon noise."""
    spans = [] if include_hands_free else _demo_spans(parsed.events)
    counts = {ActionSource.MODEL: 0, ActionSource.INFLUENCE: 0, ActionSource.STOCHASTIC: 0}
    total = 0
    for rec in parsed.steps:
        if not include_hands_free and _in_spans(rec.step, spans):
            continue
        counts[rec.decision.source] += 1
        total += 1
    if total == 0:
        return AttributionSummary(0.0, 0.0, 0.0, 0)
    return AttributionSummary(
        model_pct=100.0 * counts[ActionSource.MODEL] / total,
        influence_pct=100.0 * counts[ActionSource.INFLUENCE] / total,
        stochastic_pct=100.0 * counts[ActionSource.STOCHASTIC] / total,
        ticks=total,
    )


class PerformanceTier(Enum):
    LOW = "low"
    INTERMEDIATE = "intermediate"
    HIGH = "high"


def classify(average_consgates: float) -> PerformanceTier:
    """Low under one gate per trial, high above three, both boundaries inclusive in the middle."""
    if not math.isfinite(average_consgates) or average_consgates < 0:
        raise ValueError(f"average must be a nonnegative number, got {average_consgates!r}")
    if average_consgates < 1.0:
        return PerformanceTier.LOW
    if average_consgates <= 3.0:
        return PerformanceTier.INTERMEDIATE
    return PerformanceTier.HIGH


# --- the headless lifetime experiment ---------------------------------------


@dataclass(slots=True)
class LifetimeReport:
    condition: PresetSize
    base_seed: int
    lifetimes: list[float]
    causes: list[Outcome | None]
    cap_s: float

    @property
    def mean_lifetime(self) -> float:
        return sum(self.lifetimes) / len(self.lifetimes)

    @property
    def cumulative_means(self) -> list[float]:
        means = []
        acc = 0.0
        for i, v in enumerate(self.lifetimes, start=1):
            acc += v
            means.append(acc / i)
        return means

    @property
    def exit_count(self) -> int:
        return sum(1 for c in self.causes if c in (Outcome.EXIT_LEFT, Outcome.EXIT_RIGHT))

    @property
    def fall_count(self) -> int:
        return sum(1 for c in self.causes if c is Outcome.FALL)

    @property
    def capped_count(self) -> int:
        return sum(1 for c in self.causes if c is None)


def lifetime_experiment(
    config: GameConfig,
    condition: PresetSize,
    n_trials: int = 10,
    base_seed: int = 7,
    cap_s: float = 120.0,
) -> LifetimeReport:
    """How long the steered agent survives under one static preset, over seeded trials.

    Gates are not scored; each trial is a fresh cart on a clean track with the
    preset circles left alone until the cart falls or leaves the screen.
    """
    if not config.calibration.calibrated:
        raise UncalibratedError(
            "lifetime experiment needs a calibrated config; run the calibrate command first"
        )
    influences = preset(condition, config.influence, config.physics.x_limit)
    lifetimes: list[float] = []
    causes: list[Outcome | None] = []
    for trial in range(n_trials):
        seeds = SeedBundle.from_root(base_seed + trial)
        outcome: TrialOutcome = run_trial(config, seeds, influences, cap_s=cap_s)
        lifetimes.append(outcome.lifetime)
        causes.append(outcome.cause)
    return LifetimeReport(condition=condition, base_seed=base_seed, lifetimes=lifetimes, causes=causes, cap_s=cap_s)


# --- per-session summary table ----------------------------------------------


@dataclass(slots=True)
class SessionRow:
    session_id: str
    played_s: float
    failed: int
    passed: int
    total: int
    ratio_pct: float | None
    avg_consgates: float | None
    influence_pct: float
    model_pct: float
    stochastic_pct: float
    tier: PerformanceTier | None


def summarize_session(parsed: ParsedLog) -> SessionRow:
    breakdown = cons_gates(parsed)
    attr = attribution(parsed)
    dt = parsed.header.config["physics"]["dt"]
    avg = breakdown.average_consgates
    return SessionRow(
        session_id=parsed.header.session_id,
        played_s=attr.ticks * dt,
        failed=breakdown.total_failed,
        passed=breakdown.total_passed,
        total=breakdown.total_failed + breakdown.total_passed,
        ratio_pct=100.0 * breakdown.pass_ratio if breakdown.pass_ratio is not None else None,
        avg_consgates=avg,
        influence_pct=attr.influence_pct,
        model_pct=attr.model_pct,
        stochastic_pct=attr.stochastic_pct,
        tier=classify(avg) if avg is not None else None,
    )


_COLUMNS = [
    "session", "played_s", "failed", "passed", "total",
    "ratio_pct", "avg_consgates", "influence_pct", "model_pct", "stochastic_pct", "tier",
]


def _row_cells(row: SessionRow) -> list[str]:
    def num(v: float | None, digits: int = 2) -> str:
        return "-" if v is None else f"{v:.{digits}f}"

    return [
        row.session_id,
        f"{row.played_s:.1f}",
        str(row.failed),
        str(row.passed),
        str(row.total),
        num(row.ratio_pct),
        num(row.avg_consgates),
        num(row.influence_pct),
        num(row.model_pct),
        num(row.stochastic_pct),
        row.tier.value if row.tier else "-",
    ]


def summary_table(parsed_logs: list[ParsedLog]) -> str:
    """Aligned text table, one row per session."""
    rows = [_row_cells(summarize_session(p)) for p in parsed_logs]
    widths = [len(c) for c in _COLUMNS]
    for cells in rows:
        widths = [max(w, len(c)) for w, c in zip(widths, cells)]
    lines = [
        "  ".join(c.ljust(w) for c, w in zip(_COLUMNS, widths)).rstrip(),
        "  ".join("-" * w for w in widths),
    ]
    lines.extend("  ".join(c.ljust(w) for c, w in zip(cells, widths)).rstrip() for cells in rows)
    return "\n".join(lines) + "\n"


def summary_csv(parsed_logs: list[ParsedLog]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(_COLUMNS)
    for p in parsed_logs:
        writer.writerow(_row_cells(summarize_session(p)))
    return buf.getvalue()
