"""Unit tests for the virtual-force behaviours."""

import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from rhgn.behaviours import (
    ROUTING,
    AgentContext,
    BehaviourConfig,
    BehaviourState,
    mb1_force,
    mb2_force,
    mb2_note_move,
    mb3_force,
    slot_target,
)

CFG = BehaviourConfig()


def test_config_roundtrip_and_default():
    default = BehaviourConfig.default()
    assert default == CFG
    text = "max_speed = 0.05\nnoise_quiet_steps = 7\n"
    cfg = BehaviourConfig.from_text(text)
    assert cfg.max_speed == 0.05
    assert cfg.noise_quiet_steps == 7
    with pytest.raises(ValueError):
        BehaviourConfig.from_text("warp_drive = 9\n")


def test_routing_modes():
    assert ROUTING == {1: "relay", 2: "ferry", 3: "relay"}


@given(st.integers(0, 9), st.integers(1, 10))
def test_slot_targets_evenly_spaced_strictly_inside(rank, count):
    if rank >= count:
        return
    x, y = slot_target((0.0, 0.0), (10.0, 0.0), rank, count)
    assert y == 0.0
    assert 0.0 < x < 10.0
    assert x == pytest.approx(10.0 * (rank + 1) / (count + 1))


def test_mb1_pulls_toward_slot():
    ctx = AgentContext((0.0, 0.0), slot_target=(1.0, 0.0))
    fx, fy = mb1_force(ctx, CFG, BehaviourState())
    assert fx > 0 and fy == 0.0
    assert math.hypot(fx, fy) <= CFG.max_speed + 1e-12


def test_mb1_wall_repulsion_pushes_away():
    ctx = AgentContext(
        (0.0, 0.0),
        wall_dist=0.5,
        wall_point=(0.5, 0.0),
        near_walls=[(0.5, (0.5, 0.0))],
    )
    fx, _fy = mb1_force(ctx, CFG, BehaviourState())
    assert fx < 0  # pushed away from the wall on the right


def test_mb2_seeks_target_then_orbits():
    state = BehaviourState()
    ctx = AgentContext((0.0, 0.0), target_pos=(5.0, 0.0))
    fx, fy = mb2_force(ctx, CFG, state)
    assert fx == pytest.approx(CFG.max_speed) and fy == pytest.approx(0.0)
    assert not state.orbiting

    # a wall in the way with the target out of range starts an orbit
    ctx = AgentContext(
        (0.0, 0.0),
        target_pos=(5.0, 0.0),
        wall_dist=1.0,
        wall_point=(1.0, 0.0),
        near_walls=[(1.0, (1.0, 0.0))],
    )
    force = mb2_force(ctx, CFG, state)
    assert state.orbiting
    # orbit force has a tangential component
    assert abs(force[1]) > 0

    # reaching communication range releases the orbit
    ctx.target_in_range = True
    mb2_force(ctx, CFG, state)
    assert not state.orbiting


def test_mb2_orbit_reversal_on_blocked_move():
    state = BehaviourState(orbiting=True, orbit_sign=1.0)
    mb2_note_move(state, CFG, (CFG.max_speed, 0.0), (0.0, 0.0))
    assert state.orbit_sign == -1.0
    # tiny requested moves never flip
    mb2_note_move(state, CFG, (1e-6, 0.0), (0.0, 0.0))
    assert state.orbit_sign == -1.0


def test_mb3_equals_mb1_without_noise():
    ctx = AgentContext((2.0, 3.0), slot_target=(4.0, 1.0))
    assert mb3_force(ctx, CFG, BehaviourState()) == mb1_force(
        ctx, CFG, BehaviourState()
    )


def test_mb3_avoids_detected_noise():
    state = BehaviourState()
    ctx = AgentContext(
        (0.0, 0.0),
        slot_target=(10.0, 0.0),
        corridor=((-20.0, 0.0), (20.0, 0.0)),
        jam_dbm=-50.0,
        jam_pos=(10.0, 0.0),
    )
    fx, fy = mb3_force(ctx, CFG, state)
    assert state.noise_pos == (10.0, 0.0)
    assert state.noise_radius >= CFG.avoid_disc
    # the avoided slot target bows perpendicular to the corridor
    assert abs(fy) > 0


def test_mb3_memory_expires_after_quiet_period():
    state = BehaviourState()
    hot = AgentContext((0.0, 0.0), slot_target=(5.0, 0.0), jam_dbm=-50.0,
                       jam_pos=(5.0, 0.0))
    mb3_force(hot, CFG, state)
    quiet = AgentContext((0.0, 0.0), slot_target=(5.0, 0.0))
    for _ in range(CFG.noise_quiet_steps):
        mb3_force(quiet, CFG, state)
    assert state.steps_since_noise >= CFG.noise_quiet_steps
    assert mb3_force(quiet, CFG, state) == mb1_force(quiet, CFG, BehaviourState())


def test_mb3_keep_out_disc_pushes_outward():
    state = BehaviourState(
        noise_pos=(1.0, 0.0), noise_radius=20.0, steps_since_noise=0
    )
    # slot target on the far side pulls straight through the noise source
    ctx = AgentContext((0.0, 0.0), slot_target=(30.0, 0.0))
    fx, _fy = mb3_force(ctx, CFG, state)
    assert fx < 0  # net motion is away from the source, never into it


@given(
    st.floats(-5, 5),
    st.floats(-5, 5),
    st.floats(-5, 5),
    st.floats(-5, 5),
)
def test_forces_respect_speed_limit(px, py, tx, ty):
    ctx = AgentContext((px, py), slot_target=(tx, ty), target_pos=(tx, ty))
    for force in (mb1_force, mb2_force, mb3_force):
        f = force(ctx, CFG, BehaviourState())
        assert math.hypot(*f) <= CFG.max_speed + 1e-12
