import math
import random

import pytest

from slalom.errors import ConfigError, DomainError
from slalom.influence import (
    DELTA,
    ActionSource,
    ArbitrationConfig,
    CircleId,
    Command,
    CommandOp,
    Influence,
    InfluenceRules,
    InfluenceSet,
    PresetSize,
    apply_command,
    arbitrate,
    influence_vector,
    preset,
)
from slalom.physics import CartpoleState
from slalom.policy import Action, PreferenceVector

from oracles import reference_arbitration

ARB = ArbitrationConfig(epsilon=0.1, reach_radius=1.6, distance_exponent=2.0, inertia_gain=1.1)
RULES = InfluenceRules()


def cart(x: float = 0.0, x_dot: float = 0.0) -> CartpoleState:
    return CartpoleState(x=x, x_dot=x_dot, theta=0.0, theta_dot=0.0)


def pair(left: Influence | None = None, right: Influence | None = None) -> InfluenceSet:
    off = Influence(CircleId.LEFT, -1.8, 0.3, 0.0)
    off_r = Influence(CircleId.RIGHT, 1.8, 0.3, 0.0)
    return InfluenceSet(left=left or off, right=right or off_r)


class CountingRandom(random.Random):
    def __init__(self, seed):
        super().__init__(seed)
        self.draws = 0

    def random(self):
        self.draws += 1
        return super().random()


def test_single_circle_pull_matches_the_formula():
    circle = Influence(CircleId.RIGHT, 1.0, 0.3, 0.5)
    inf = influence_vector(pair(right=circle), cart(), ARB)
    d = math.hypot(1.0, 0.3)
    w_loc = ((1.6 - d) / 1.6) ** 2.0
    expect_right = math.sqrt(1.0 * w_loc) * 1.0 * 0.5 + DELTA
    expect_left = math.sqrt(DELTA * w_loc) * 1.0 * 0.5 + DELTA
    assert abs(inf.right - expect_right) <= 1e-15
    assert abs(inf.left - expect_left) <= 1e-15
    assert inf.right > inf.left


def test_out_of_reach_circle_is_inert():
    far = Influence(CircleId.RIGHT, 1.8, 0.3, 0.9)
    inf = influence_vector(pair(right=far), cart(x=-0.5), ARB)  # distance > 1.6
    assert inf.left == DELTA
    assert inf.right == DELTA


def test_zero_intensity_is_inert():
    inf = influence_vector(preset(PresetSize.NONE, RULES, 2.4), cart(), ARB)
    assert (inf.left, inf.right) == (DELTA, DELTA)


def test_circle_straight_overhead_pulls_neither_way():
    over = Influence(CircleId.RIGHT, 0.0, 0.4, 0.8)
    inf = influence_vector(pair(right=over), cart(), ARB)
    assert inf.left == inf.right
    assert inf.left > DELTA  # location weight still present, split evenly


def test_momentum_toward_a_circle_strengthens_it():
    circle = Influence(CircleId.RIGHT, 1.0, 0.3, 0.5)
    toward = influence_vector(pair(right=circle), cart(x_dot=1.0), ARB)
    still = influence_vector(pair(right=circle), cart(x_dot=0.0), ARB)
    away = influence_vector(pair(right=circle), cart(x_dot=-1.0), ARB)
    assert toward.right > still.right > away.right


def test_speed_weight_never_goes_negative():
    # At x_dot = -10 the raw speed weight crosses zero; it must clamp, not flip.
    circle = Influence(CircleId.RIGHT, 1.0, 0.3, 0.5)
    inf = influence_vector(pair(right=circle), cart(x_dot=-10.0), ARB)
    assert 0.0 < inf.right < 1e-5
    assert 0.0 < inf.left < 1e-5


def test_contributions_sum_across_circles():
    left = Influence(CircleId.LEFT, -0.8, 0.3, 0.4)
    right = Influence(CircleId.RIGHT, 1.1, 0.3, 0.7)
    both = influence_vector(InfluenceSet(left=left, right=right), cart(), ARB)
    only_left = influence_vector(pair(left=left), cart(), ARB)
    only_right = influence_vector(pair(right=right), cart(), ARB)
    assert abs(both.left - (only_left.left + only_right.left - DELTA)) <= 1e-15
    assert abs(both.right - (only_left.right + only_right.right - DELTA)) <= 1e-15


def test_influence_vector_is_strictly_positive():
    rng = random.Random(77)
    for _ in range(500):
        circles = InfluenceSet(
            left=Influence(CircleId.LEFT, rng.uniform(-2.4, 2.4), rng.uniform(0, 2), rng.random()),
            right=Influence(CircleId.RIGHT, rng.uniform(-2.4, 2.4), rng.uniform(0, 2), rng.random()),
        )
        state = cart(x=rng.uniform(-2.4, 2.4), x_dot=rng.uniform(-5, 5))
        inf = influence_vector(circles, state, ARB)
        assert inf.left >= DELTA and inf.right >= DELTA


def test_arbitrate_matches_reference_on_a_grid():
    silent = ArbitrationConfig(epsilon=0.0, reach_radius=1.6, distance_exponent=2.0, inertia_gain=1.1)
    rng = random.Random(0)
    for i in range(12):
        m_left = (i + 0.5) / 12
        m = PreferenceVector(m_left, 1.0 - m_left)
        for j in range(12):
            for k in range(12):
                inf = PreferenceVector(DELTA * 10 ** (j / 3), DELTA * 10 ** (k / 3))
                got = arbitrate(m, inf, silent, rng)
                action, source = reference_arbitration(m.left, m.right, inf.left, inf.right)
                assert got.action.value == action
                assert got.source.value == source


def test_arbitrate_tie_goes_left():
    silent = ArbitrationConfig(epsilon=0.0)
    got = arbitrate(PreferenceVector(0.5, 0.5), PreferenceVector(DELTA, DELTA), silent, random.Random(1))
    assert got.action is Action.LEFT
    assert got.source is ActionSource.MODEL


def test_attribution_requires_disagreement_with_the_model():
    silent = ArbitrationConfig(epsilon=0.0)
    m = PreferenceVector(0.4, 0.6)
    overruled = arbitrate(m, PreferenceVector(100.0, DELTA), silent, random.Random(1))
    assert overruled.action is Action.LEFT
    assert overruled.source is ActionSource.INFLUENCE
    agreed = arbitrate(m, PreferenceVector(DELTA, 100.0), silent, random.Random(1))
    assert agreed.action is Action.RIGHT
    assert agreed.source is ActionSource.MODEL


def test_epsilon_zero_never_stochastic_epsilon_one_always():
    m = PreferenceVector(0.3, 0.7)
    inf = PreferenceVector(DELTA, DELTA)
    rng = random.Random(9)
    never = ArbitrationConfig(epsilon=0.0)
    always = ArbitrationConfig(epsilon=1.0)
    assert all(arbitrate(m, inf, never, rng).source is not ActionSource.STOCHASTIC for _ in range(500))
    assert all(arbitrate(m, inf, always, rng).source is ActionSource.STOCHASTIC for _ in range(500))


def test_rng_draw_budget_per_tick():
    # One draw decides epsilon; a stochastic tick takes exactly one more.
    m = PreferenceVector(0.3, 0.7)
    inf = PreferenceVector(DELTA, DELTA)
    rng = CountingRandom(3)
    arbitrate(m, inf, ArbitrationConfig(epsilon=0.0), rng)
    assert rng.draws == 1
    rng = CountingRandom(3)
    arbitrate(m, inf, ArbitrationConfig(epsilon=1.0), rng)
    assert rng.draws == 2


def test_stochastic_actions_are_uniform():
    rng = random.Random(41)
    always = ArbitrationConfig(epsilon=1.0)
    m = PreferenceVector(0.01, 0.99)
    inf = PreferenceVector(DELTA, DELTA)
    lefts = sum(
        arbitrate(m, inf, always, rng).action is Action.LEFT for _ in range(20000)
    )
    assert 0.48 <= lefts / 20000 <= 0.52


def test_epsilon_share_small_sample():
    rng = random.Random(42)
    m = PreferenceVector(0.5, 0.5)
    inf = PreferenceVector(DELTA, DELTA)
    hits = sum(
        arbitrate(m, inf, ARB, rng).source is ActionSource.STOCHASTIC for _ in range(20000)
    )
    assert 0.088 <= hits / 20000 <= 0.112


def test_apply_command_grow_and_shrink_clamp():
    circles = preset(PresetSize.BIG, RULES, 2.4)
    grown = circles
    for _ in range(10):
        grown = apply_command(grown, Command(CommandOp.GROW, CircleId.LEFT), RULES)
    assert grown.left.intensity == RULES.intensity_max
    shrunk = circles
    for _ in range(40):
        shrunk = apply_command(shrunk, Command(CommandOp.SHRINK, CircleId.LEFT), RULES)
    assert shrunk.left.intensity == 0.0
    assert shrunk.right.intensity == circles.right.intensity  # untouched


def test_apply_command_moves_step_and_clamp():
    circles = preset(PresetSize.MEDIUM, RULES, 2.4)
    moved = apply_command(circles, Command(CommandOp.MOVE_RIGHT, CircleId.RIGHT), RULES)
    assert abs(moved.right.center_x - (circles.right.center_x + RULES.position_step)) <= 1e-15
    for _ in range(100):
        moved = apply_command(moved, Command(CommandOp.MOVE_RIGHT, CircleId.RIGHT), RULES)
    assert moved.right.center_x == RULES.x_max
    down = circles
    for _ in range(100):
        down = apply_command(down, Command(CommandOp.MOVE_DOWN, CircleId.LEFT), RULES)
    assert down.left.center_y == RULES.y_min
    up = apply_command(circles, Command(CommandOp.MOVE_UP, CircleId.LEFT), RULES)
    assert abs(up.left.center_y - (circles.left.center_y + RULES.position_step)) <= 1e-15


def test_preset_layout():
    for size, intensity in (
        (PresetSize.NONE, 0.0),
        (PresetSize.SMALL, RULES.preset_small),
        (PresetSize.MEDIUM, RULES.preset_medium),
        (PresetSize.BIG, RULES.preset_big),
    ):
        circles = preset(size, RULES, 2.4)
        assert circles.left.center_x == -0.75 * 2.4
        assert circles.right.center_x == 0.75 * 2.4
        assert circles.left.center_y == circles.right.center_y == RULES.preset_y
        assert circles.left.intensity == circles.right.intensity == intensity


def test_influence_validation():
    with pytest.raises(DomainError):
        Influence(CircleId.LEFT, 0.0, 0.3, 1.5).validate(RULES)
    with pytest.raises(DomainError):
        Influence(CircleId.LEFT, 5.0, 0.3, 0.5).validate(RULES)
    with pytest.raises(DomainError):
        Influence(CircleId.LEFT, 0.0, 0.3, float("nan")).validate(RULES)
    Influence(CircleId.LEFT, 0.0, 0.3, 0.5).validate(RULES)


def test_rules_validation():
    with pytest.raises(ConfigError):
        InfluenceRules(preset_small=0.5, preset_medium=0.3).validate()
    with pytest.raises(ConfigError):
        InfluenceRules(intensity_step=0.0).validate()
    RULES.validate()


def test_arbitration_config_validation():
    with pytest.raises(ConfigError):
        ArbitrationConfig(epsilon=1.5).validate()
    with pytest.raises(ConfigError):
        ArbitrationConfig(reach_radius=0.0).validate()
    with pytest.raises(ConfigError):
        ArbitrationConfig(inertia_gain=-0.1).validate()
    ARB.validate()


def test_command_round_trip():
    cmd = Command(CommandOp.MOVE_UP, CircleId.RIGHT)
    assert Command.from_dict(cmd.to_dict()) == cmd
    with pytest.raises(ConfigError):
        Command.from_dict({"op": "teleport", "circle": "left"})
