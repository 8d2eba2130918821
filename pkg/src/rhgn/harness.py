"""Experiment orchestration: corpus extraction, batch runs, reports, maps.

A "desk-scale" run shrinks the full-scale defaults (1000 packets over
50,000 steps) by the scale factors in RunConfig so the whole designed
suite finishes on one core in minutes instead of days.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .classifier import ClassifierBundle
from .environments import TRAINING_IDS, designed_env
from .errors import IoFailure
from .world import WorldState

CONTROLLERS = ("mb1", "mb2", "mb3", "rand", "rhgn")

MAP_COLOURS = {1: (230, 40, 40), 2: (50, 90, 230), 3: (40, 200, 70)}


@dataclass
class RunConfig:
    environment: str = "1.1"  # designed id, or "gen:<seed>" for a generated env
    controller: str = "mb1"
    agents: int = 8
    packets: int = 1000
    steps: int = 50_000
    seed: int = 0
    scale_packets: float = 1.0
    scale_steps: float = 1.0

    def __post_init__(self):
        if self.scale_packets <= 0 or self.scale_steps <= 0:
            raise ValueError("scale factors must be positive")

    @property
    def effective_packets(self) -> int:
        return max(1, round(self.packets * self.scale_packets))

    @property
    def effective_steps(self) -> int:
        return max(1, round(self.steps * self.scale_steps))


@dataclass
class RunResult:
    environment: str
    controller: str
    seed: int
    fitness: float
    t_s: int
    p_s: int
    trace: list = field(default_factory=list, repr=False)
    error: str | None = None


def resolve_env(environment):
    """Environment id -> spec.  "gen:<seed>" draws a generated layout."""
    if not isinstance(environment, str):
        return environment
    if environment.startswith("gen:"):
        from .environments import GeneratorConfig, generate_env

        return generate_env(GeneratorConfig(), int(environment[4:]))
    return designed_env(environment)


def run_single(config: RunConfig, bundle=None, *, record_predictions=False):
    """Execute one run and return its RunResult (world attached as .world)."""
    env = resolve_env(config.environment)
    world = WorldState(
        env,
        config.controller,
        config.seed,
        agents=config.agents,
        packets=config.effective_packets,
        steps=config.effective_steps,
        bundle=bundle,
        record_predictions=record_predictions,
    )
    world.run()
    result = RunResult(
        environment=env.name,
        controller=config.controller,
        seed=config.seed,
        fitness=world.fitness(),
        t_s=world.t_s,
        p_s=world.delivered_count,
        trace=world.trace,
    )
    result.world = world
    return result


def extract_corpus(*, packets=None, steps=10_000, seeds=(0,), stride=10,
                   env_ids=TRAINING_IDS, behaviours=("mb1", "mb2", "mb3"),
                   switched=True, switch_step=500):
    """Labelled observations from every behaviour in every training env.

    By default each extraction run is given more packets than it could
    possibly deliver (each node can receive at most one per step) so it
    never completes early: every (env, behaviour) cell then contributes
    the same number of observations, keeping the pattern database balanced.

    With `switched` on, each env also contributes runs that begin on
    behaviour 1 and flip to the env's mapped behaviour at `switch_step`.
    The adaptive controller itself starts every agent on behaviour 1 and
    first selects at step 500, so these runs cover the swarm states it
    actually visits (e.g. the synchronised ferry convoy that forms when a
    whole swarm switches at once), which pure-behaviour runs never reach.
    """
    from .classifier import DEFAULT_BEHAVIOUR_MAP

    corpus = []
    for env_id in env_ids:
        env = designed_env(env_id)
        cells = [(mb, None) for mb in behaviours]
        if switched:
            cells.append((f"mb{DEFAULT_BEHAVIOUR_MAP[env_id]}", switch_step))
        for mb, switch in cells:
            for seed in seeds:
                world = WorldState(
                    env, "mb1" if switch else mb, seed,
                    packets=(steps * len(env.nodes) if packets is None
                             else packets),
                    steps=steps,
                    record_observations=True, observation_stride=stride,
                )
                if switch is None:
                    world.run()
                else:
                    target = int(mb[2:])
                    while not world.done:
                        if world.clock == switch:
                            for a in world.agents:
                                a.behaviour = target
                        world.step()
                corpus.extend((obs, env_id) for obs in world.observations)
    return corpus


def train_bundle(corpus) -> ClassifierBundle:
    return ClassifierBundle().train(corpus)


def run_experiment(configs, bundle=None, *, record_predictions=False):
    """Run every config; per-cell errors are recorded, not raised."""
    results = []
    for config in configs:
        try:
            results.append(
                run_single(config, bundle, record_predictions=record_predictions)
            )
        except Exception as exc:  # keep the batch alive, report the cell
            results.append(
                RunResult(
                    environment=str(config.environment),
                    controller=config.controller,
                    seed=config.seed,
                    fitness=math.nan,
                    t_s=-1,
                    p_s=-1,
                    error=f"{type(exc).__name__}: {exc}",
                )
            )
    return results


def suite_configs(env_ids, controllers, seeds, *, packets=1000, steps=50_000,
                  scale_packets=1.0, scale_steps=1.0):
    return [
        RunConfig(
            environment=e, controller=c, seed=s, packets=packets, steps=steps,
            scale_packets=scale_packets, scale_steps=scale_steps,
        )
        for e in env_ids
        for c in controllers
        for s in seeds
    ]


def results_table(results) -> str:
    lines = ["env,controller,seed,fitness,T_s,p_s"]
    for r in results:
        fit = "error" if r.error else f"{r.fitness:.6f}"
        lines.append(
            f"{r.environment},{r.controller},{r.seed},{fit},{r.t_s},{r.p_s}"
        )
    return "\n".join(lines) + "\n"


def _draw_disc(pixels, size, x, y, radius, colour):
    w, h = size
    for px in range(max(0, int(x - radius)), min(w, int(x + radius) + 1)):
        for py in range(max(0, int(y - radius)), min(h, int(y + radius) + 1)):
            if (px - x) ** 2 + (py - y) ** 2 <= radius * radius:
                pixels[py * w + px] = colour


def _draw_segment(pixels, size, a, b, colour):
    w, _h = size
    steps = max(1, int(math.dist(a, b) * 2))
    for k in range(steps + 1):
        t = k / steps
        x = int(round(a[0] + t * (b[0] - a[0])))
        y = int(round(a[1] + t * (b[1] - a[1])))
        if 0 <= x < size[0] and 0 <= y < size[1]:
            pixels[y * w + x] = colour


def emit_behaviour_map(traces, env, out_path, *, scale=4):
    """Render behaviour-selection events over the arena as a PPM image.

    Selection events are drawn red/blue/green for behaviours 1/2/3; walls,
    nodes and jammers are white.  `traces` may be one trace or several.
    """
    if traces and traces[0] and not isinstance(traces[0], (list, tuple)):
        traces = [traces]
    aw, ah = env.arena
    w, h = int(aw * scale) + 1, int(ah * scale) + 1

    def to_px(x, y):
        return x * scale, (ah - y) * scale  # y up in the arena, down in the image

    pixels = [(0, 0, 0)] * (w * h)
    for event_trace in traces:
        for ev in event_trace:
            if ev[0] != "select":
                continue
            _tag, _clock, _agent, x, y, _label, mb = ev
            px, py = to_px(x, y)
            _draw_disc(pixels, (w, h), px, py, max(1, scale // 2),
                       MAP_COLOURS.get(mb, (200, 200, 200)))
    white = (255, 255, 255)
    for wall in env.walls:
        _draw_segment(pixels, (w, h), to_px(*wall.a), to_px(*wall.b), white)
    for node in env.nodes:
        _draw_disc(pixels, (w, h), *to_px(*node.position), scale, white)
    for jam in env.jammers:
        _draw_disc(pixels, (w, h), *to_px(*jam.position), scale, white)

    try:
        with open(out_path, "wb") as fh:
            fh.write(f"P6\n{w} {h}\n255\n".encode())
            fh.write(bytes(v for rgb in pixels for v in rgb))
    except OSError as exc:
        raise IoFailure(f"cannot write behaviour map {out_path!r}") from exc
    return out_path
