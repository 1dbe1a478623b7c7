"""Static SVG emitters for session visuals.

Three views: a circular session timeline (whole session on a ring), a game
outcome sequence strip, and per-trial cumulative average curves.  Output is
plain hand-assembled SVG with fixed-precision coordinates so identical inputs
give byte-identical documents.
"""
from __future__ import annotations

import math

from .analytics import TrialEnd, classify, cons_gates, PerformanceTier
from .physics import Outcome
from .rules import EventKind
from .sessionlog import EventRecord, ParsedLog

CART_COLOR = "#1a1a1a"
LEFT_INFLUENCE_COLOR = "#8a4f9e"   # purple
RIGHT_INFLUENCE_COLOR = "#9a9a9a"  # grey
BLUE_GATE_COLOR = "#3a6fd8"
RED_GATE_COLOR = "#d84a3a"
PAUSE_COLOR = "#555555"
SUCCESS_COLOR = "#3fa34d"
FALL_COLOR = "#d84a3a"
EXIT_COLOR = "#e6a23c"

TIER_COLORS = {
    PerformanceTier.LOW: "#d84a3a",
    PerformanceTier.INTERMEDIATE: "#e6a23c",
    PerformanceTier.HIGH: "#3fa34d",
}


def _f(v: float) -> str:
    return f"{v:.3f}"


class _Svg:
    def __init__(self, width: float, height: float, title: str):
        self.parts = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{_f(width)}" height="{_f(height)}" '
            f'viewBox="0 0 {_f(width)} {_f(height)}">',
            f"<title>{title}</title>",
            f'<rect width="{_f(width)}" height="{_f(height)}" fill="#ffffff"/>',
        ]

    def add(self, element: str) -> None:
        self.parts.append(element)

    def text(self, x: float, y: float, content: str, size: int = 12, fill: str = "#333333", anchor: str = "start") -> None:
        self.add(
            f'<text x="{_f(x)}" y="{_f(y)}" font-family="sans-serif" font-size="{size}" '
            f'fill="{fill}" text-anchor="{anchor}">{content}</text>'
        )

    def circle(self, cx: float, cy: float, r: float, fill: str, opacity: float = 1.0) -> None:
        self.add(f'<circle cx="{_f(cx)}" cy="{_f(cy)}" r="{_f(r)}" fill="{fill}" fill-opacity="{_f(opacity)}"/>')

    def rect(self, x: float, y: float, w: float, h: float, fill: str) -> None:
        self.add(f'<rect x="{_f(x)}" y="{_f(y)}" width="{_f(w)}" height="{_f(h)}" fill="{fill}"/>')

    def polyline(self, points: list[tuple[float, float]], stroke: str, width: float = 1.2) -> None:
        pts = " ".join(f"{_f(x)},{_f(y)}" for x, y in points)
        self.add(f'<polyline points="{pts}" fill="none" stroke="{stroke}" stroke-width="{_f(width)}"/>')

    def arc_band(self, cx: float, cy: float, r0: float, r1: float, a0: float, a1: float, fill: str, opacity: float = 1.0) -> None:
        """Filled annular sector between radii r0..r1 and angles a0..a1 (radians)."""
        large = 1 if (a1 - a0) > math.pi else 0
        x0o, y0o = cx + r1 * math.cos(a0), cy + r1 * math.sin(a0)
        x1o, y1o = cx + r1 * math.cos(a1), cy + r1 * math.sin(a1)
        x1i, y1i = cx + r0 * math.cos(a1), cy + r0 * math.sin(a1)
        x0i, y0i = cx + r0 * math.cos(a0), cy + r0 * math.sin(a0)
        d = (
            f"M {_f(x0o)} {_f(y0o)} "
            f"A {_f(r1)} {_f(r1)} 0 {large} 1 {_f(x1o)} {_f(y1o)} "
            f"L {_f(x1i)} {_f(y1i)} "
            f"A {_f(r0)} {_f(r0)} 0 {large} 0 {_f(x0i)} {_f(y0i)} Z"
        )
        self.add(f'<path d="{d}" fill="{fill}" fill-opacity="{_f(opacity)}"/>')

    def done(self) -> str:
        return "\n".join(self.parts) + "\n</svg>\n"


def _pause_spans(events: list[EventRecord], last_step: int) -> list[tuple[int, int]]:
    spans = []
    start = None
    for ev in events:
        if ev.kind is EventKind.PAUSED and start is None:
            start = ev.step
        elif ev.kind is EventKind.RESUMED and start is not None:
            spans.append((start, ev.step))
            start = None
    if start is not None:
        spans.append((start, last_step))
    return spans


def render_session_circle(parsed: ParsedLog, *, size: float = 640.0, sample_stride: int = 5) -> str:
    """Whole-session ring: time runs clockwise from the top, radius is screen x.

    The dark route is the cart; purple and grey dots are the left and right
    influence circles (dot radius follows intensity); blue and red marks sit at
    the active gate line; dark blocks on the outer rim are pauses.
    """
    steps = parsed.steps
    header = parsed.header
    x_limit = header.config["physics"]["x_limit"]
    cx = cy = size / 2.0
    r_inner = size * 0.18
    r_outer = size * 0.42
    r_rim = size * 0.46

    svg = _Svg(size, size, f"session {header.session_id}")
    svg.add(f'<circle cx="{_f(cx)}" cy="{_f(cy)}" r="{_f(r_outer)}" fill="none" stroke="#cccccc" stroke-width="1.0"/>')
    svg.add(f'<circle cx="{_f(cx)}" cy="{_f(cy)}" r="{_f(r_inner)}" fill="none" stroke="#cccccc" stroke-width="1.0"/>')

    if steps:
        last_step = steps[-1].step
        span = max(1, last_step)

        def angle(step: int) -> float:
            return -math.pi / 2.0 + 2.0 * math.pi * (step / span)

        def radius(x: float) -> float:
            frac = (x + x_limit) / (2.0 * x_limit)
            frac = min(1.0, max(0.0, frac))
            return r_inner + frac * (r_outer - r_inner)

        for lo, hi in _pause_spans(parsed.events, last_step):
            svg.arc_band(cx, cy, r_outer + 2.0, r_rim, angle(lo), angle(max(lo + 1, hi)), PAUSE_COLOR, opacity=0.85)

        sampled = steps[::sample_stride]
        for rec in sampled:
            a = angle(rec.step)
            if rec.gate is not None:
                rg = radius(rec.gate.line_x)
                color = BLUE_GATE_COLOR if rec.gate.color.value == "blue" else RED_GATE_COLOR
                svg.circle(cx + rg * math.cos(a), cy + rg * math.sin(a), 1.0, color, opacity=0.5)
            for infl, color in ((rec.influences.left, LEFT_INFLUENCE_COLOR), (rec.influences.right, RIGHT_INFLUENCE_COLOR)):
                if infl.intensity <= 0.0:
                    continue
                ri = radius(infl.center_x)
                svg.circle(cx + ri * math.cos(a), cy + ri * math.sin(a), 0.8 + 3.0 * infl.intensity, color, opacity=0.25)
        route = [
            (cx + radius(rec.state.x) * math.cos(angle(rec.step)), cy + radius(rec.state.x) * math.sin(angle(rec.step)))
            for rec in sampled
        ]
        if len(route) >= 2:
            svg.polyline(route, CART_COLOR, width=1.0)

    svg.text(12, size - 36, "route: cart", 11, CART_COLOR)
    svg.text(12, size - 22, "left influence", 11, LEFT_INFLUENCE_COLOR)
    svg.text(110, size - 22, "right influence", 11, RIGHT_INFLUENCE_COLOR)
    svg.text(12, size - 8, "gate line: blue/red, rim blocks: pauses", 11, "#666666")
    svg.text(cx, 16, f"session {header.session_id}", 12, "#333333", anchor="middle")
    return svg.done()


_END_COLORS = {TrialEnd.WON: SUCCESS_COLOR, TrialEnd.FALL: FALL_COLOR, TrialEnd.EXIT: EXIT_COLOR, TrialEnd.OPEN: "#bbbbbb"}


def render_outcome_sequence(parsed_logs: list[ParsedLog], *, cell: float = 14.0) -> str:
    """One row per session, one square per game, colored by how the game ended."""
    rows = []
    for parsed in parsed_logs:
        games = []
        for ev in parsed.events:
            if ev.kind is EventKind.GAME_WON:
                games.append((TrialEnd.WON, False))
            elif ev.kind is EventKind.GAME_LOST:
                end = TrialEnd.FALL if ev.cause is Outcome.FALL else TrialEnd.EXIT
                games.append((end, False))
            elif ev.kind is EventKind.LEVEL_ADVANCED and games:
                games[-1] = (games[-1][0], True)
        rows.append((parsed.header.session_id, games))

    label_w = 120.0
    max_games = max((len(g) for _, g in rows), default=0)
    width = label_w + max(1, max_games) * (cell + 2.0) + 12.0
    height = 24.0 + len(rows) * (cell + 6.0) + 10.0
    svg = _Svg(width, height, "game outcomes")
    svg.text(12, 16, "game outcomes (green won, red fall, orange exit; notch = level up)", 11)
    for i, (sid, games) in enumerate(rows):
        y = 28.0 + i * (cell + 6.0)
        svg.text(12, y + cell - 3.0, sid, 10)
        for j, (end, leveled) in enumerate(games):
            x = label_w + j * (cell + 2.0)
            svg.rect(x, y, cell, cell, _END_COLORS[end])
            if leveled:
                svg.rect(x + cell - 3.0, y, 3.0, cell, "#1a1a1a")
    return svg.done()


def render_tier_curves(parsed_logs: list[ParsedLog], *, width: float = 640.0, height: float = 360.0) -> str:
    """Cumulative average gates per trial for each session, colored by final tier."""
    margin = 40.0
    series = []
    max_trials = 1
    max_avg = 1.0
    for parsed in parsed_logs:
        breakdown = cons_gates(parsed)
        counts = [t.gates_passed for t in breakdown.trials]
        if not counts:
            continue
        cumulative = []
        acc = 0
        for i, c in enumerate(counts, start=1):
            acc += c
            cumulative.append(acc / i)
        tier = classify(cumulative[-1])
        series.append((parsed.header.session_id, cumulative, tier))
        max_trials = max(max_trials, len(cumulative))
        max_avg = max(max_avg, max(cumulative))

    svg = _Svg(width, height, "per-trial cumulative average")
    plot_w = width - 2 * margin
    plot_h = height - 2 * margin
    svg.add(
        f'<rect x="{_f(margin)}" y="{_f(margin)}" width="{_f(plot_w)}" height="{_f(plot_h)}" '
        f'fill="none" stroke="#999999" stroke-width="1.0"/>'
    )
    for bound in (1.0, 3.0):
        if bound <= max_avg:
            y = margin + plot_h * (1.0 - bound / max_avg)
            svg.add(
                f'<line x1="{_f(margin)}" y1="{_f(y)}" x2="{_f(margin + plot_w)}" y2="{_f(y)}" '
                f'stroke="#cccccc" stroke-width="0.8" stroke-dasharray="4 3"/>'
            )
            svg.text(margin + plot_w + 4, y + 4, _f(bound), 10, "#888888")
    for sid, cumulative, tier in series:
        points = []
        for i, v in enumerate(cumulative, start=1):
            x = margin + plot_w * (i / max_trials)
            y = margin + plot_h * (1.0 - v / max_avg)
            points.append((x, y))
        if len(points) == 1:
            points.append(points[0])
        svg.polyline(points, TIER_COLORS[tier], width=1.4)
    svg.text(margin, height - 10, "trial number", 11)
    svg.text(12, 18, "cumulative average gates per trial", 11)
    return svg.done()
