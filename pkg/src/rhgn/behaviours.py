"""The three virtual-force behaviours and their shared constants.

MB-1 spaces agents evenly along their assigned source-sink corridor and
relays packets toward their destinations.  MB-2 ferries: it carries
packets to the destination, orbiting obstacles it cannot pass.  MB-3 is
MB-1 plus noise-source avoidance with a 500-step quiet timer.

Behaviour functions are pure given (context, config, per-agent state);
the simulator owns ordering, movement clamping and routing execution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields

from .geometry import clamp_magnitude, unit

BEHAVIOUR_IDS = (1, 2, 3)

# How each behaviour moves packets: "relay" forwards to neighbours closer
# to the destination, "ferry" only hands over to the destination itself.
ROUTING = {1: "relay", 2: "ferry", 3: "relay"}


@dataclass
class BehaviourConfig:
    max_speed: float = 0.022  # m per step
    spring_gain: float = 0.01  # per step toward the spacing target
    obstacle_gain: float = 0.02  # k in k/d^2 wall repulsion
    obstacle_trigger: float = 2.0  # m
    orbit_gain: float = 0.022  # tangential speed while orbiting
    reverse_fraction: float = 0.1  # of max speed; smaller moves flip orbit
    noise_gain: float = 0.022  # repulsion away from a noise source
    noise_margin: float = 1.1  # safety factor on the estimated radius
    noise_falloff_decades: float = 25.0  # 10 * path-loss exponent
    avoid_disc: float = 10.0  # hard keep-out around a noise source
    noise_quiet_steps: int = 500
    noise_detect_db: float = -71.25
    sinkward_half_angle: float = 30.0  # degrees
    roughly_sinkward_half_angle: float = 60.0

    @classmethod
    def from_text(cls, text: str):
        values = {}
        types = {f.name: f.type for f in fields(cls)}
        for line in text.splitlines():
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            key, val = [s.strip() for s in line.split("=", 1)]
            if key not in types:
                raise ValueError(f"unknown behaviour constant {key!r}")
            values[key] = int(val) if types[key] == "int" else float(val)
        return cls(**values)

    @classmethod
    def from_file(cls, path):
        with open(path) as fh:
            return cls.from_text(fh.read())

    @classmethod
    def default(cls):
        from importlib.resources import files

        return cls.from_text(
            files("rhgn").joinpath("data/behaviour.cfg").read_text()
        )


@dataclass
class BehaviourState:
    """Per-agent mutable behaviour memory."""

    orbit_sign: float = 1.0
    orbiting: bool = False
    noise_pos: tuple | None = None
    noise_radius: float = 0.0
    steps_since_noise: int = 1 << 30


class AgentContext:
    """Everything a behaviour may read about one agent for one step."""

    __slots__ = (
        "pos",
        "slot_target",  # even-spacing target on the corridor, or None
        "corridor",  # (source position, sink position) of the corridor
        "wall_dist",
        "wall_point",  # closest point on the nearest wall, or None
        "near_walls",  # [(distance, closest point)] within the trigger radius
        "jam_dbm",  # measured jamming strength, or None if below floor
        "jam_pos",  # position of the strongest jammer, or None
        "target_pos",  # ferrying target (MB-2), or None
        "target_in_range",  # ferrying target currently communicable
    )

    def __init__(self, pos, slot_target=None, corridor=None, wall_dist=math.inf,
                 wall_point=None, near_walls=(), jam_dbm=None, jam_pos=None,
                 target_pos=None, target_in_range=False):
        self.pos = pos
        self.slot_target = slot_target
        self.corridor = corridor
        self.wall_dist = wall_dist
        self.wall_point = wall_point
        self.near_walls = near_walls
        self.jam_dbm = jam_dbm
        self.jam_pos = jam_pos
        self.target_pos = target_pos
        self.target_in_range = target_in_range


def slot_target(source, sink, rank: int, count: int):
    """Even-spacing target for the agent ranked `rank` of `count` on a corridor."""
    t = (rank + 1) / (count + 1)
    return (
        source[0] + t * (sink[0] - source[0]),
        source[1] + t * (sink[1] - source[1]),
    )


def _wall_repulsion(ctx, cfg):
    # k/d^2 away from every wall inside the trigger radius; summing (rather
    # than nearest-only) lets facing wall ends close a narrow opening
    # against weak drives while strong spring pulls still push through
    fx, fy = 0.0, 0.0
    for d, pt in ctx.near_walls:
        d = max(d, 1e-6)
        ax, ay = unit(ctx.pos[0] - pt[0], ctx.pos[1] - pt[1])
        mag = cfg.obstacle_gain / (d * d)
        fx += mag * ax
        fy += mag * ay
    return (fx, fy)


def mb1_force(ctx: AgentContext, cfg: BehaviourConfig, state: BehaviourState):
    fx, fy = 0.0, 0.0
    if ctx.slot_target is not None:
        fx = cfg.spring_gain * (ctx.slot_target[0] - ctx.pos[0])
        fy = cfg.spring_gain * (ctx.slot_target[1] - ctx.pos[1])
    rx, ry = _wall_repulsion(ctx, cfg)
    return clamp_magnitude((fx + rx, fy + ry), cfg.max_speed)


def mb2_force(ctx: AgentContext, cfg: BehaviourConfig, state: BehaviourState):
    near = ctx.wall_dist < cfg.obstacle_trigger
    if near and not ctx.target_in_range:
        state.orbiting = True
    if state.orbiting and (
        ctx.target_in_range or ctx.wall_dist > 2.0 * cfg.obstacle_trigger
    ):
        state.orbiting = False
    if state.orbiting and ctx.wall_point is not None:
        d = max(ctx.wall_dist, 1e-6)
        ax, ay = unit(ctx.pos[0] - ctx.wall_point[0], ctx.pos[1] - ctx.wall_point[1])
        mag = cfg.obstacle_gain / (d * d)
        s = state.orbit_sign
        fx = mag * ax + cfg.orbit_gain * (-ay * s)
        fy = mag * ay + cfg.orbit_gain * (ax * s)
        return clamp_magnitude((fx, fy), cfg.max_speed)
    fx, fy = 0.0, 0.0
    if ctx.target_pos is not None:
        ux, uy = unit(ctx.target_pos[0] - ctx.pos[0], ctx.target_pos[1] - ctx.pos[1])
        fx, fy = cfg.max_speed * ux, cfg.max_speed * uy
    rx, ry = _wall_repulsion(ctx, cfg)
    return clamp_magnitude((fx + rx, fy + ry), cfg.max_speed)


def mb2_note_move(state: BehaviourState, cfg: BehaviourConfig,
                  requested, actual):
    """Flip orbit direction when collision clamping eats the move."""
    if not state.orbiting:
        return
    if math.hypot(*requested) < cfg.reverse_fraction * cfg.max_speed:
        return
    if math.hypot(*actual) < cfg.reverse_fraction * cfg.max_speed:
        state.orbit_sign = -state.orbit_sign


def _avoided_target(ctx: AgentContext, noise, radius: float):
    """Slot target pushed out of the avoided disc.

    The push is perpendicular to the corridor (not radial) so a chain of
    avoiding agents keeps its along-corridor spacing and bows sideways
    around the noise source as one curve.
    """
    tx, ty = ctx.slot_target
    nx, ny = noise
    if ctx.corridor is None:
        dt = math.hypot(tx - nx, ty - ny)
        if dt >= radius:
            return (tx, ty)
        ux, uy = unit(tx - nx, ty - ny) if dt > 0 else (1.0, 0.0)
        return (nx + radius * ux, ny + radius * uy)
    s, k = ctx.corridor
    ux, uy = unit(k[0] - s[0], k[1] - s[1])
    px, py = -uy, ux  # corridor normal
    along = (nx - tx) * ux + (ny - ty) * uy  # target -> noise, along corridor
    perp = (nx - tx) * px + (ny - ty) * py  # signed perpendicular separation
    if along * along + perp * perp >= radius * radius:
        return (tx, ty)
    need = math.sqrt(max(radius * radius - along * along, 0.0))
    extra = need - abs(perp)
    if extra <= 0.0:
        return (tx, ty)
    side = -1.0 if perp > 0 else 1.0  # move away from the noise side
    return (tx + side * extra * px, ty + side * extra * py)


def mb3_force(ctx: AgentContext, cfg: BehaviourConfig, state: BehaviourState):
    if (
        ctx.jam_dbm is not None
        and ctx.jam_pos is not None
        and ctx.jam_dbm > cfg.noise_detect_db
    ):
        state.noise_pos = ctx.jam_pos
        state.steps_since_noise = 0
        d = math.dist(ctx.pos, ctx.jam_pos)
        est = d * 10.0 ** (
            (ctx.jam_dbm - cfg.noise_detect_db) / cfg.noise_falloff_decades
        )
        state.noise_radius = max(cfg.avoid_disc, est * cfg.noise_margin)
    elif state.steps_since_noise < (1 << 30):
        state.steps_since_noise += 1
    if (
        state.noise_pos is None
        or state.steps_since_noise >= cfg.noise_quiet_steps
    ):
        return mb1_force(ctx, cfg, state)

    nx, ny = state.noise_pos
    R = state.noise_radius
    fx, fy = 0.0, 0.0
    if ctx.slot_target is not None:
        tx, ty = _avoided_target(ctx, (nx, ny), R)
        fx = cfg.spring_gain * (tx - ctx.pos[0])
        fy = cfg.spring_gain * (ty - ctx.pos[1])
    dn = math.dist(ctx.pos, state.noise_pos)
    ux, uy = unit(ctx.pos[0] - nx, ctx.pos[1] - ny) if dn > 0 else (1.0, 0.0)
    if dn < R:
        mag = cfg.noise_gain * (R - dn) / R
        fx += mag * ux
        fy += mag * uy
    if dn < cfg.avoid_disc:  # hard keep-out: cancel inward pull, push out
        inward = -(fx * ux + fy * uy)
        if inward > 0.0:
            fx += inward * ux
            fy += inward * uy
        fx += cfg.noise_gain * ux
        fy += cfg.noise_gain * uy
    rx, ry = _wall_repulsion(ctx, cfg)
    return clamp_magnitude((fx + rx, fy + ry), cfg.max_speed)


FORCES = {1: mb1_force, 2: mb2_force, 3: mb3_force}
