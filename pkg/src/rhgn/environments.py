"""Designed environment catalog and the random environment generator.

Designed layouts 1.1-3.2 cover the obstacle set (1.x: 60 m source-sink
corridor with three thin cross walls, or a walled start box with a narrow
opening), the triangle set (2.x: nodes A/B/C on a 100 m equilateral
triangle with a centroid jammer) and the two hybrids (3.1 walls+box,
3.2 triangle with the jammer between A and B).  Generated layouts draw
node count, stages, waypoints, demands, obstacles and a jammer placed at
the node centroid with every node kept outside jamming range.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import GenerationFailure, UnknownId
from .geometry import point_segment_distance
from .radio import RadioParams
from .util import fnv1a64

NODE_SPEED = 0.11  # m/s
AGENT_START_RADIUS = 5.0
NOISE_DETECT_DB = -71.25


@dataclass
class WallSpec:
    a: tuple
    b: tuple
    attenuation: float


@dataclass
class JammerSpec:
    position: tuple
    power: float
    active: tuple  # one flag per stage


@dataclass
class NodeSpec:
    position: tuple
    demands: tuple  # per stage (out_pct, in_pct)
    waypoints: tuple = ()  # per stage tuple of (x, y) waypoints
    speed: float = NODE_SPEED


@dataclass
class EnvironmentSpec:
    name: str
    arena: tuple
    walls: list = field(default_factory=list)
    jammers: list = field(default_factory=list)
    nodes: list = field(default_factory=list)
    packet_total: int = 1000
    stages: int = 1
    label: str | None = None  # training label, when part of the catalog
    agent_start: tuple = (0.0, 0.0, AGENT_START_RADIUS)  # cx, cy, radius

    def validate(self):
        for s in range(self.stages):
            out = sum(n.demands[s][0] for n in self.nodes)
            inn = sum(n.demands[s][1] for n in self.nodes)
            if abs(out - 100.0) > 0.5 or abs(inn - 100.0) > 0.5:
                raise ValueError(f"stage {s} demands sum to {out}/{inn}")
        for i, n in enumerate(self.nodes):
            if not any(d[0] > 0 or d[1] > 0 for d in n.demands):
                raise ValueError(f"node {i} idle in every stage")
        return self

    # -- canonical text form -------------------------------------------

    def to_text(self) -> str:
        lines = [
            "[env]",
            f"name = {self.name}",
            f"arena = {self.arena[0]:.6f} {self.arena[1]:.6f}",
            f"packets = {self.packet_total}",
            f"stages = {self.stages}",
            f"label = {self.label if self.label is not None else '-'}",
            "agent_start = {:.6f} {:.6f} {:.6f}".format(*self.agent_start),
            "[walls]",
        ]
        for w in self.walls:
            lines.append(
                f"{w.a[0]:.6f} {w.a[1]:.6f} {w.b[0]:.6f} {w.b[1]:.6f} "
                f"{w.attenuation:.6f}"
            )
        lines.append("[jammers]")
        for j in self.jammers:
            flags = ",".join("1" if f else "0" for f in j.active)
            lines.append(
                f"{j.position[0]:.6f} {j.position[1]:.6f} {j.power:.6f} {flags}"
            )
        for i, n in enumerate(self.nodes):
            lines.append(f"[node {i}]")
            lines.append(f"pos = {n.position[0]:.6f} {n.position[1]:.6f}")
            lines.append(f"speed = {n.speed:.6f}")
            for s in range(self.stages):
                wps = ";".join(
                    f"{x:.6f},{y:.6f}" for x, y in (n.waypoints[s] if n.waypoints else ())
                )
                lines.append(
                    f"stage {s}: out={n.demands[s][0]:.6f} "
                    f"in={n.demands[s][1]:.6f} waypoints={wps}"
                )
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str):
        env = cls(name="?", arena=(0.0, 0.0))
        section = None
        node = None
        for line in text.splitlines():
            line = line.strip()
            if not line:
                continue
            if line.startswith("["):
                section = line[1:-1]
                if section.startswith("node"):
                    node = NodeSpec(position=(0, 0), demands=(), waypoints=())
                    env.nodes.append(node)
                continue
            if section == "env":
                key, val = [s.strip() for s in line.split("=", 1)]
                if key == "name":
                    env.name = val
                elif key == "arena":
                    env.arena = tuple(float(x) for x in val.split())
                elif key == "packets":
                    env.packet_total = int(val)
                elif key == "stages":
                    env.stages = int(val)
                elif key == "label":
                    env.label = None if val == "-" else val
                elif key == "agent_start":
                    env.agent_start = tuple(float(x) for x in val.split())
            elif section == "walls":
                x1, y1, x2, y2, att = (float(x) for x in line.split())
                env.walls.append(WallSpec((x1, y1), (x2, y2), att))
            elif section == "jammers":
                parts = line.split()
                flags = tuple(c == "1" for c in parts[3].split(","))
                env.jammers.append(
                    JammerSpec((float(parts[0]), float(parts[1])), float(parts[2]), flags)
                )
            elif section and section.startswith("node"):
                if line.startswith("pos"):
                    node.position = tuple(
                        float(x) for x in line.split("=", 1)[1].split()
                    )
                elif line.startswith("speed"):
                    node.speed = float(line.split("=", 1)[1])
                elif line.startswith("stage"):
                    body = line.split(":", 1)[1].strip()
                    fields = dict(kv.split("=", 1) for kv in body.split(" "))
                    wps = tuple(
                        tuple(float(v) for v in p.split(","))
                        for p in fields["waypoints"].split(";")
                        if p
                    )
                    node.demands = node.demands + (
                        (float(fields["out"]), float(fields["in"])),
                    )
                    node.waypoints = node.waypoints + (wps,)
        return env.validate()

    def digest(self) -> int:
        return fnv1a64(self.to_text().encode())


# -- designed catalog ----------------------------------------------------

DESIGNED_IDS = ("1.1", "1.2", "1.3", "2.1", "2.2", "2.3", "3.1", "3.2")
TRAINING_IDS = DESIGNED_IDS[:6]

_CORRIDOR_WALLS = [(35.0, 5.0), (50.0, 5.0), (65.0, 5.0)]  # x, attenuation


def _corridor_walls(att: float):
    return [WallSpec((x, 40.0), (x, 60.0), att) for x, _ in _CORRIDOR_WALLS]


def _start_box():
    """100 dB box around the source with a 2 m opening facing the sink."""
    att = 100.0
    return [
        WallSpec((10.0, 40.0), (10.0, 60.0), att),
        WallSpec((10.0, 60.0), (30.0, 60.0), att),
        WallSpec((10.0, 40.0), (30.0, 40.0), att),
        WallSpec((30.0, 40.0), (30.0, 49.0), att),
        WallSpec((30.0, 51.0), (30.0, 60.0), att),
    ]


def _corridor_nodes(stages: int = 1):
    out = ((100.0, 0.0),) * stages
    inn = ((0.0, 100.0),) * stages
    return [
        NodeSpec((20.0, 50.0), out, ((),) * stages),
        NodeSpec((80.0, 50.0), inn, ((),) * stages),
    ]


def _triangle_nodes(demands):
    # equilateral triangle, edge 100 m, centred in a 200x200 arena
    h = 100.0 * math.sqrt(3.0) / 2.0
    cy = 100.0 - h / 3.0
    pts = [(50.0, cy), (150.0, cy), (100.0, cy + h)]
    return [NodeSpec(p, (d,), ((),)) for p, d in zip(pts, demands)]


def _triangle_centroid():
    h = 100.0 * math.sqrt(3.0) / 2.0
    cy = 100.0 - h / 3.0
    return (100.0, cy + h / 3.0)


def designed_env(env_id: str) -> EnvironmentSpec:
    env_id = str(env_id)
    corridor_start = (20.0, 50.0, AGENT_START_RADIUS)
    centre_200 = (100.0, 100.0, AGENT_START_RADIUS)
    if env_id == "1.1":
        spec = EnvironmentSpec(
            "1.1", (100.0, 100.0), _corridor_walls(5.0), [], _corridor_nodes(),
            label="1.1", agent_start=corridor_start,
        )
    elif env_id == "1.2":
        spec = EnvironmentSpec(
            "1.2", (100.0, 100.0), _corridor_walls(100.0), [], _corridor_nodes(),
            label="1.2", agent_start=corridor_start,
        )
    elif env_id == "1.3":
        spec = EnvironmentSpec(
            "1.3", (100.0, 100.0), _start_box(), [], _corridor_nodes(),
            label="1.3", agent_start=corridor_start,
        )
    elif env_id in ("2.1", "2.2", "2.3"):
        third = 100.0 / 3.0
        if env_id == "2.1":
            demands = [(100.0, 0.0), (0.0, 50.0), (0.0, 50.0)]
        else:
            demands = [(third, third)] * 3
        jammer = JammerSpec(_triangle_centroid(), RadioParams().jammer_power,
                            (env_id == "2.3",))
        spec = EnvironmentSpec(
            env_id, (200.0, 200.0), [], [jammer], _triangle_nodes(demands),
            label=env_id, agent_start=centre_200,
        )
    elif env_id == "3.1":
        spec = EnvironmentSpec(
            "3.1", (100.0, 100.0), _start_box() + _corridor_walls(100.0), [],
            _corridor_nodes(), label=None, agent_start=corridor_start,
        )
    elif env_id == "3.2":
        third = 100.0 / 3.0
        nodes = _triangle_nodes([(third, third)] * 3)
        a, b = nodes[0].position, nodes[1].position
        mid = ((a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0)
        jammer = JammerSpec(mid, RadioParams().jammer_power, (True,))
        spec = EnvironmentSpec(
            "3.2", (200.0, 200.0), [], [jammer], nodes,
            label=None, agent_start=centre_200,
        )
    else:
        raise UnknownId(env_id)
    return spec.validate()


# -- random generator ----------------------------------------------------

@dataclass
class GeneratorConfig:
    node_counts: tuple = (2, 3, 4)
    stage_counts: tuple = (1, 2, 3)
    arena: tuple = (100.0, 100.0)
    node_speed: float = NODE_SPEED
    obstacle_count: tuple = (2, 6)
    obstacle_length: tuple = (5.0, 20.0)
    waypoints_per_stage: tuple = (1, 3)
    jammer_power_range: tuple = (3.0, 8.0)
    packet_total: int = 1000
    margin: float = 5.0  # keep geometry off the arena edge
    path_clearance: float = 2.0
    max_rejections: int = 10_000


def _node_path_points(node: NodeSpec):
    pts = [node.position]
    for stage_wps in node.waypoints:
        pts.extend(stage_wps)
    return pts


def _path_segments(node: NodeSpec):
    pts = _node_path_points(node)
    return list(zip(pts[:-1], pts[1:]))


def generate_env(config: GeneratorConfig, seed: int) -> EnvironmentSpec:
    import random as _random

    rng = _random.Random(f"envgen:{seed}")
    radio = RadioParams()
    w, h = config.arena
    m = config.margin

    def point():
        return (rng.uniform(m, w - m), rng.uniform(m, h - m))

    for _attempt in range(config.max_rejections):
        n_nodes = rng.choice(config.node_counts)
        n_stages = rng.choice(config.stage_counts)
        jammer_power = rng.uniform(*config.jammer_power_range)
        jam_radius = radio.jam_radius(jammer_power, NOISE_DETECT_DB)

        nodes = []
        for _ in range(n_nodes):
            waypoints = tuple(
                tuple(point() for _ in range(rng.randint(*config.waypoints_per_stage)))
                for _ in range(n_stages)
            )
            nodes.append(NodeSpec(point(), (), waypoints, config.node_speed))

        centroid = (
            sum(n.position[0] for n in nodes) / n_nodes,
            sum(n.position[1] for n in nodes) / n_nodes,
        )
        path_points = [p for n in nodes for p in _node_path_points(n)]
        if any(math.dist(p, centroid) <= jam_radius for p in path_points):
            continue

        # demands: random flag sets, weights normalised to 100%
        demands_ok = True
        per_stage = []
        for _s in range(n_stages):
            for _tries in range(50):
                out_flags = [rng.random() < 0.5 for _ in range(n_nodes)]
                in_flags = [rng.random() < 0.5 for _ in range(n_nodes)]
                if not any(out_flags) or not any(in_flags):
                    continue
                if (
                    sum(out_flags) == 1
                    and sum(in_flags) == 1
                    and out_flags.index(True) == in_flags.index(True)
                ):
                    continue
                break
            else:
                demands_ok = False
                break
            out_w = [rng.uniform(0.2, 1.0) if f else 0.0 for f in out_flags]
            in_w = [rng.uniform(0.2, 1.0) if f else 0.0 for f in in_flags]
            so, si = sum(out_w), sum(in_w)
            per_stage.append(
                [(100.0 * o / so, 100.0 * i / si) for o, i in zip(out_w, in_w)]
            )
        if not demands_ok:
            continue
        if any(
            all(per_stage[s][i][0] == 0 and per_stage[s][i][1] == 0
                for s in range(n_stages))
            for i in range(n_nodes)
        ):
            continue
        for i, n in enumerate(nodes):
            n.demands = tuple(per_stage[s][i] for s in range(n_stages))

        # obstacles: axis-aligned 100 dB segments clear of node paths
        segments = [seg for n in nodes for seg in _path_segments(n)]
        walls = []
        failed = False
        for _ in range(rng.randint(*config.obstacle_count)):
            for _tries in range(200):
                x, y = point()
                length = rng.uniform(*config.obstacle_length)
                if rng.random() < 0.5:
                    a, b = (x, y), (min(x + length, w - m), y)
                else:
                    a, b = (x, y), (x, min(y + length, h - m))
                clear = all(
                    point_segment_distance(p, a, b) > config.path_clearance
                    for seg in segments
                    for p in _sample_segment(seg)
                ) and all(
                    point_segment_distance(pt, a, b) > config.path_clearance
                    for n in nodes
                    for pt in _node_path_points(n)
                )
                if clear:
                    walls.append(WallSpec(a, b, 100.0))
                    break
            else:
                failed = True
                break
        if failed:
            continue

        jammer = JammerSpec(
            centroid, jammer_power,
            tuple(rng.random() < 0.5 for _ in range(n_stages)),
        )
        spec = EnvironmentSpec(
            name=f"gen-{seed}",
            arena=config.arena,
            walls=walls,
            jammers=[jammer],
            nodes=nodes,
            packet_total=config.packet_total,
            stages=n_stages,
            label=None,
            agent_start=(w / 2.0, h / 2.0, AGENT_START_RADIUS),
        )
        return spec.validate()
    raise GenerationFailure(f"no valid environment after {config.max_rejections} tries")


def _sample_segment(seg, step: float = 2.0):
    (a, b) = seg
    length = math.dist(a, b)
    n = max(2, int(length / step) + 1)
    return [
        (a[0] + (b[0] - a[0]) * t / (n - 1), a[1] + (b[1] - a[1]) * t / (n - 1))
        for t in range(n)
    ]


def behaviour_validation_table(envs=TRAINING_IDS, runs: int = 10,
                               packets: int = 100, steps: int = 10_000):
    """Run each behaviour in each training environment, pick the best.

    Returns {env_id: (best_mb, {mb: median_fitness})}.
    """
    from statistics import median

    from .harness import RunConfig, run_single

    table = {}
    for env_id in envs:
        medians = {}
        for mb in (1, 2, 3):
            fits = [
                run_single(
                    RunConfig(environment=env_id, controller=f"mb{mb}",
                              seed=seed, packets=packets, steps=steps)
                ).fitness
                for seed in range(runs)
            ]
            medians[mb] = median(fits)
        best = max(medians, key=lambda k: (medians[k], -k))
        table[env_id] = (best, medians)
    return table
