"""Cart-pole dynamics: fixed-step Euler integration plus optional track disturbances.

The update rule is the classic cart-pole from the RL literature (pole modelled
as a uniform rod, hence the 4/3 factor), integrated with explicit Euler at a
fixed dt.  Everything here is pure with respect to the cart state; the only
mutable collaborator is the DisturbanceStream a simulation owns, which consumes
randomness for wind-gust arrivals and carries active gusts between steps.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from enum import Enum

from .errors import ConfigError, DomainError

TWO_PI = 2.0 * math.pi


@dataclass(slots=True)
class PhysicsParams:
    """Physical constants of the cart-pole and the screen it lives on."""

    gravity: float = 9.8
    mass_cart: float = 1.0
    mass_pole: float = 0.1
    pole_half_length: float = 0.5
    force_mag: float = 10.0
    dt: float = 0.02
    x_limit: float = 2.4
    # Pole survives far past the textbook 12 degrees; the game only calls a
    # fall when the pole is nearly flat.
    theta_limit: float = math.radians(80.0)

    def validate(self) -> None:
        for name in ("gravity", "mass_cart", "mass_pole", "pole_half_length", "force_mag", "x_limit"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise ConfigError(f"physics.{name}: must be a positive finite number, got {v!r}")
        if not (0.0 < self.dt <= 0.05):
            raise ConfigError(f"physics.dt: must be in (0, 0.05], got {self.dt!r}")
        if not (math.radians(12.0) < self.theta_limit < 1.75):
            raise ConfigError(
                f"physics.theta_limit: must lie between the textbook 12-degree threshold and ~100 degrees, got {self.theta_limit!r}"
            )

    def to_dict(self) -> dict:
        return {
            "gravity": self.gravity,
            "mass_cart": self.mass_cart,
            "mass_pole": self.mass_pole,
            "pole_half_length": self.pole_half_length,
            "force_mag": self.force_mag,
            "dt": self.dt,
            "x_limit": self.x_limit,
            "theta_limit": self.theta_limit,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PhysicsParams":
        p = cls(**d)
        p.validate()
        return p


@dataclass(slots=True)
class CartpoleState:
    """Snapshot of the cart at one tick.  elapsed is always step_index * dt."""

    x: float
    x_dot: float
    theta: float
    theta_dot: float
    step_index: int = 0
    elapsed: float = 0.0

    def is_finite(self) -> bool:
        return (
            math.isfinite(self.x)
            and math.isfinite(self.x_dot)
            and math.isfinite(self.theta)
            and math.isfinite(self.theta_dot)
        )

    def to_dict(self) -> dict:
        return {"x": self.x, "x_dot": self.x_dot, "theta": self.theta, "theta_dot": self.theta_dot}


class Outcome(Enum):
    RUNNING = "running"
    FALL = "fall"
    EXIT_LEFT = "exit_left"
    EXIT_RIGHT = "exit_right"
    WON = "won"  # assigned by the game layer, never by check_termination


@dataclass(slots=True)
class SlopeSpec:
    """Tilted track: constant lateral acceleration g*sin(angle), positive angle rolls the cart toward -x."""

    angle: float

    def to_dict(self) -> dict:
        return {"angle": self.angle}


@dataclass(slots=True)
class WindSpec:
    """Poisson gusts: each arrival ramps theta_dot by impulse/duration for duration seconds, sign alternating."""

    gust_rate: float
    gust_impulse: float
    gust_duration: float

    def validate(self) -> None:
        if self.gust_rate < 0:
            raise ConfigError(f"wind.gust_rate: must be >= 0, got {self.gust_rate!r}")
        if self.gust_duration <= 0:
            raise ConfigError(f"wind.gust_duration: must be > 0, got {self.gust_duration!r}")

    def to_dict(self) -> dict:
        return {"gust_rate": self.gust_rate, "gust_impulse": self.gust_impulse, "gust_duration": self.gust_duration}


@dataclass(slots=True)
class BumpSpec:
    """Sinusoidal road surface h(x); the cart picks up a pole-angle nudge proportional to dh/dx."""

    amplitude: float
    wavelength: float

    def validate(self) -> None:
        if self.wavelength <= 0:
            raise ConfigError(f"bumps.wavelength: must be > 0, got {self.wavelength!r}")

    def to_dict(self) -> dict:
        return {"amplitude": self.amplitude, "wavelength": self.wavelength}


@dataclass(slots=True)
class DisturbanceSet:
    """Which track disturbances are active.  All None means a clean flat track."""

    slope: SlopeSpec | None = None
    wind: WindSpec | None = None
    bumps: BumpSpec | None = None

    def to_dict(self) -> dict:
        return {
            "slope": self.slope.to_dict() if self.slope else None,
            "wind": self.wind.to_dict() if self.wind else None,
            "bumps": self.bumps.to_dict() if self.bumps else None,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DisturbanceSet":
        slope = SlopeSpec(**d["slope"]) if d.get("slope") else None
        wind = WindSpec(**d["wind"]) if d.get("wind") else None
        bumps = BumpSpec(**d["bumps"]) if d.get("bumps") else None
        if wind:
            wind.validate()
        if bumps:
            bumps.validate()
        return cls(slope=slope, wind=wind, bumps=bumps)


NO_DISTURBANCES = DisturbanceSet()


class DisturbanceStream:
    """Randomness plus gust bookkeeping for one simulation.

    Gust arrivals are sampled lazily as simulated time advances, so a run with
    wind disabled never touches the stream and runs with identical seeds see
    identical gust schedules.
    """

    def __init__(self, seed: int):
        self.rng = random.Random(seed)
        self._next_arrival: float | None = None
        self._sign = 1.0
        self._active: list[tuple[float, float]] = []  # (end_time, signed theta_dot rate)

    def wind_rate(self, wind: WindSpec | None, t: float) -> float:
        """Summed signed theta_dot ramp rate of all gusts active at time t."""
        if wind is None or wind.gust_rate <= 0.0:
            if self._next_arrival is not None:
                # Wind switched off: drop pending schedule so a later re-enable
                # resamples from the current time.
                self._next_arrival = None
                self._active.clear()
            return 0.0
        if self._next_arrival is None:
            self._sign = 1.0 if self.rng.random() < 0.5 else -1.0
            self._next_arrival = t + self.rng.expovariate(wind.gust_rate)
        while self._next_arrival <= t:
            rate = self._sign * wind.gust_impulse / wind.gust_duration
            self._active.append((self._next_arrival + wind.gust_duration, rate))
            self._sign = -self._sign
            self._next_arrival += self.rng.expovariate(wind.gust_rate)
        if not self._active:
            return 0.0
        total = 0.0
        keep = []
        for end, rate in self._active:
            if end > t:
                keep.append((end, rate))
                total += rate
        self._active = keep
        return total


def wrap_angle(theta: float) -> float:
    """Normalize an angle into [-pi, pi]; exact pass-through when already inside."""
    if -math.pi <= theta <= math.pi:
        return theta
    return (theta + math.pi) % TWO_PI - math.pi


def step(
    state: CartpoleState,
    applied_force: float,
    params: PhysicsParams,
    disturbances: DisturbanceSet = NO_DISTURBANCES,
    stream: DisturbanceStream | None = None,
) -> CartpoleState:
    """Advance one Euler step under the applied force and active disturbances."""
    if not state.is_finite():
        raise DomainError(f"cartpole state is not finite: {state!r}")
    if not math.isfinite(applied_force):
        raise DomainError(f"applied force is not finite: {applied_force!r}")

    cos_t = math.cos(state.theta)
    sin_t = math.sin(state.theta)
    total_mass = params.mass_cart + params.mass_pole
    polemass_length = params.mass_pole * params.pole_half_length

    temp = (applied_force + polemass_length * state.theta_dot * state.theta_dot * sin_t) / total_mass
    theta_acc = (params.gravity * sin_t - cos_t * temp) / (
        params.pole_half_length * (4.0 / 3.0 - params.mass_pole * cos_t * cos_t / total_mass)
    )
    x_acc = temp - polemass_length * theta_acc * cos_t / total_mass

    if disturbances.slope is not None:
        x_acc -= params.gravity * math.sin(disturbances.slope.angle)

    wind_rate = 0.0
    if disturbances.wind is not None:
        if stream is None:
            raise DomainError("wind disturbance requires a DisturbanceStream")
        wind_rate = stream.wind_rate(disturbances.wind, state.elapsed)

    bump_rate = 0.0
    if disturbances.bumps is not None:
        b = disturbances.bumps
        k = TWO_PI / b.wavelength
        bump_rate = b.amplitude * k * math.cos(k * state.x)

    dt = params.dt
    next_index = state.step_index + 1
    return CartpoleState(
        x=state.x + dt * state.x_dot,
        x_dot=state.x_dot + dt * x_acc,
        theta=wrap_angle(state.theta + dt * state.theta_dot + dt * bump_rate),
        theta_dot=state.theta_dot + dt * theta_acc + dt * wind_rate,
        step_index=next_index,
        elapsed=next_index * dt,
    )


def check_termination(state: CartpoleState, params: PhysicsParams) -> Outcome:
    """Exit beats fall when both trip on the same tick: the cart left the screen first."""
    if state.x < -params.x_limit:
        return Outcome.EXIT_LEFT
    if state.x > params.x_limit:
        return Outcome.EXIT_RIGHT
    if abs(state.theta) > params.theta_limit:
        return Outcome.FALL
    return Outcome.RUNNING


def total_energy(state: CartpoleState, params: PhysicsParams) -> float:
    """Mechanical energy of cart plus rod pole; drifts only by integration error."""
    m = params.mass_pole
    length = params.pole_half_length
    cos_t = math.cos(state.theta)
    kinetic = (
        0.5 * (params.mass_cart + m) * state.x_dot * state.x_dot
        + m * length * state.x_dot * state.theta_dot * cos_t
        + 0.5 * m * length * length * (4.0 / 3.0) * state.theta_dot * state.theta_dot
    )
    potential = m * params.gravity * length * cos_t
    return kinetic + potential
