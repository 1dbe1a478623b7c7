"""Independent reference implementations the tests compare the package against.

Everything here is transcribed straight from the published update rules and
uses only the standard library.  None of it imports the package under test,
so agreement between the two is evidence of correctness, not a tautology.
"""
from __future__ import annotations

import math

# --- classic cart-pole Euler update ------------------------------------------

GRAVITY = 9.8
MASS_CART = 1.0
MASS_POLE = 0.1
HALF_LENGTH = 0.5
FORCE_MAG = 10.0
TAU = 0.02


def reference_step(
    x: float,
    x_dot: float,
    theta: float,
    theta_dot: float,
    force: float,
    gravity: float = GRAVITY,
    mass_cart: float = MASS_CART,
    mass_pole: float = MASS_POLE,
    half_length: float = HALF_LENGTH,
    tau: float = TAU,
) -> tuple[float, float, float, float]:
    """One explicit-Euler step of the standard cart-pole, no extras."""
    total_mass = mass_cart + mass_pole
    polemass_length = mass_pole * half_length
    costheta = math.cos(theta)
    sintheta = math.sin(theta)
    temp = (force + polemass_length * theta_dot**2 * sintheta) / total_mass
    thetaacc = (gravity * sintheta - costheta * temp) / (
        half_length * (4.0 / 3.0 - mass_pole * costheta**2 / total_mass)
    )
    xacc = temp - polemass_length * thetaacc * costheta / total_mass
    return (
        x + tau * x_dot,
        x_dot + tau * xacc,
        theta + tau * theta_dot,
        theta_dot + tau * thetaacc,
    )


def reference_energy(
    x_dot: float,
    theta: float,
    theta_dot: float,
    gravity: float = GRAVITY,
    mass_cart: float = MASS_CART,
    mass_pole: float = MASS_POLE,
    half_length: float = HALF_LENGTH,
) -> float:
    """Mechanical energy of the cart plus the pole as a uniform rod."""
    cos_t = math.cos(theta)
    kinetic = (
        0.5 * (mass_cart + mass_pole) * x_dot**2
        + mass_pole * half_length * x_dot * theta_dot * cos_t
        + 0.5 * mass_pole * half_length**2 * (4.0 / 3.0) * theta_dot**2
    )
    return kinetic + mass_pole * gravity * half_length * cos_t


# --- arbitration: argmax of the elementwise product ---------------------------


def reference_arbitration(
    m_left: float, m_right: float, inf_left: float, inf_right: float
) -> tuple[str, str]:
    """(action, source) by brute force.  Ties go left; the source is the
    influences exactly when the product argmax opposes the bare-model argmax."""
    candidates = [("left", m_left * inf_left), ("right", m_right * inf_right)]
    action, best = candidates[0]
    for name, value in candidates[1:]:
        if value > best:
            action, best = name, value
    model_action = "left" if m_left >= m_right else "right"
    source = "model" if action == model_action else "influence"
    return action, source


# --- trial segmentation over an event stream ----------------------------------

# Event atoms: ("pass",) ("fail",) ("lost", "fall"|"exit") ("won",)


def reference_consgates(
    events: list[tuple],
    wins_close_trials: bool = True,
) -> dict:
    """Scan an ordered event stream into per-trial gate counts.

    A lost game closes a trial at its current count; a won game closes one
    too unless wins_close_trials is off.  Gates banked when the stream ends
    form a final open trial only if the count is nonzero.
    """
    trials: list[int] = []
    ends: list[str] = []
    current = 0
    passed = 0
    failed = 0
    for event in events:
        kind = event[0]
        if kind == "pass":
            current += 1
            passed += 1
        elif kind == "fail":
            failed += 1
        elif kind == "lost":
            trials.append(current)
            ends.append(event[1])
            current = 0
        elif kind == "won" and wins_close_trials:
            trials.append(current)
            ends.append("won")
            current = 0
        elif kind != "won":
            raise ValueError(f"unknown event {event!r}")
    if current > 0:
        trials.append(current)
        ends.append("open")
    return {
        "trials": trials,
        "ends": ends,
        "passed": passed,
        "failed": failed,
        "average": sum(trials) / len(trials) if trials else None,
    }
