"""Discrete-time swarm data-transfer simulation.

One step is 0.1 s.  Fixed sub-step order: node movement, sensing,
classification, belief broadcast (every 10 steps), behaviour selection
(every 500 steps), forces + movement, packet transfers, stage advance,
termination check.  Agents are processed in id order everywhere.

Determinism: every stochastic subsystem draws from its own seeded stream
(radio shadowing, initial placement, traffic demands, the Rand(MB) draw),
so a run digest is a pure function of (environment, controller, seed).
"""

from __future__ import annotations

import math
import random
import struct
from collections import Counter, deque

import numpy as np

from . import behaviours as bv
from .errors import DomainError, NothingToShare, UntrainedBundle
from .fusion import BeliefCollection, FusionSchedule
from .geometry import WallSet, clamp_move
from .radio import RadioParams, path_loss
from .util import fnv1a64

BUFFER_LIMIT = 10
DEFAULT_AGENTS = 8
SENSE_CAP = 5.0  # sentinel distance for absent neighbours / far walls
SIGNAL_SENTINEL = -95.0
ID_SENTINEL = -1
WINDOWS = (10, 100, 500, 1000)
STEP_SECONDS = 0.1
ACTIVE_EDGE_LIMIT = 2  # undirected corridors served concurrently
FERRY_HANDOFF = 30.0  # m; ferries hand packets over only this close

DELIVERED = "DELIVERED"
FAILED = "FAILED"


def fitness(p_s: int, p: int, t_s: int, t: int) -> float:
    """Delivered fraction minus normalised completion time."""
    if not (0 <= p_s <= p) or p <= 0:
        raise DomainError(f"delivered {p_s} outside 0..{p}")
    if not (0 < t_s <= t):
        raise DomainError(f"completion time {t_s} outside 1..{t}")
    if p_s < p and t_s != t:
        raise DomainError("incomplete runs must report the full duration")
    return p_s / p - t_s / t


class _Window:
    """Rolling unique-count and change-count over the last w samples."""

    __slots__ = ("w", "items", "counts", "changes")

    def __init__(self, w):
        self.w = w
        self.items = deque()
        self.counts = Counter()
        self.changes = 0

    def push(self, x):
        items = self.items
        if items and items[-1] != x:
            self.changes += 1
        items.append(x)
        self.counts[x] += 1
        if len(items) > self.w:
            old = items.popleft()
            c = self.counts[old] - 1
            if c:
                self.counts[old] = c
            else:
                del self.counts[old]
            if old != items[0]:
                self.changes -= 1

    @property
    def unique(self):
        return len(self.counts)


class _Agent:
    __slots__ = ("pos", "buffer", "behaviour", "bstate", "collection",
                 "windows", "edge", "preds")

    def __init__(self, pos):
        self.pos = pos
        self.buffer = []  # packet ids, FIFO
        self.behaviour = 1
        self.bstate = bv.BehaviourState()
        self.collection = None
        self.windows = None
        self.edge = None  # (node a, node b) undirected assignment
        self.preds = None


class _Node:
    __slots__ = ("pos", "queue", "route", "speed")

    def __init__(self, pos, speed):
        self.pos = pos
        self.queue = deque()  # packet ids awaiting pickup
        self.route = []  # remaining waypoints for the current stage
        self.speed = speed


class _Packet:
    __slots__ = ("pid", "origin", "dest", "created", "delivered", "holder")

    def __init__(self, pid, origin, dest, created):
        self.pid = pid
        self.origin = origin
        self.dest = dest
        self.created = created
        self.delivered = None
        self.holder = ("n", origin)


class WorldState:
    def __init__(self, env, controller: str, seed: int, *, agents=DEFAULT_AGENTS,
                 packets=None, steps=50_000, bundle=None, params=None, config=None,
                 record_observations=False, observation_stride=1,
                 record_predictions=False):
        self.env = env
        self.controller = controller
        self.seed = seed
        self.params = params or RadioParams()
        self.cfg = config or bv.BehaviourConfig.default()
        self.schedule = FusionSchedule()
        self.walls = WallSet([(w.a, w.b, w.attenuation) for w in env.walls])
        self.arena = env.arena
        self.T = steps
        self.total_packets = packets if packets is not None else env.packet_total
        self.clock = 0
        self.stage = 0
        self.done = False
        self.t_s = None
        self.trace = []
        self.observations = [] if record_observations else None
        self.observation_stride = observation_stride
        self.record_predictions = record_predictions

        self.rng_radio = random.Random(f"{seed}:radio")
        self.rng_init = random.Random(f"{seed}:init")
        self.rng_demand = random.Random(f"{seed}:demand")
        self.rng_rand = random.Random(f"{seed}:rand")

        self.bundle = bundle
        self.full_sense = record_observations or controller == "rhgn"
        if controller == "rhgn":
            if bundle is None or not getattr(bundle, "trained", False):
                raise UntrainedBundle("rhgn controller needs a trained bundle")
            self._labels = bundle.env_labels
            bmap = bundle.behaviour_map
            self._behaviour_for_env = lambda i: bmap[self._labels[i]]
            self._classify_cache = {}

        fixed = 1 if controller in ("mb1", "mb2", "mb3") else None
        if controller == "rand":
            fixed = self.rng_rand.choice(bv.BEHAVIOUR_IDS)
        start = {"mb1": 1, "mb2": 2, "mb3": 3}.get(controller, fixed or 1)

        cx, cy, r = env.agent_start
        self.agents = []
        for _ in range(agents):
            ang = self.rng_init.uniform(0.0, 2.0 * math.pi)
            rad = r * math.sqrt(self.rng_init.random())
            a = _Agent((cx + rad * math.cos(ang), cy + rad * math.sin(ang)))
            a.behaviour = start
            if self.full_sense:
                a.windows = [
                    _Window(w) for w in WINDOWS for _ in ("sink", "source")
                ]
            if controller == "rhgn":
                a.collection = BeliefCollection(len(self._labels))
            if record_predictions:
                a.preds = []
            self.agents.append(a)

        self.nodes = [_Node(n.position, n.speed) for n in env.nodes]
        self.packets = []
        self.delivered_count = 0
        self._stage_quotas = self._split_quota(self.total_packets, env.stages)
        self.stage_remaining = 0
        self.flows_remaining = {}
        self._begin_stage(0)

        self._na = len(self.agents)
        self._nn = len(self.nodes)
        self._sense_clock = -1

    # -- setup ----------------------------------------------------------

    @staticmethod
    def _split_quota(total, stages):
        base, extra = divmod(total, stages)
        return [base + (1 if s < extra else 0) for s in range(stages)]

    def _begin_stage(self, s):
        self.stage = s
        for node, spec in zip(self.nodes, self.env.nodes):
            node.route = list(spec.waypoints[s]) if spec.waypoints else []
        for _ in range(self._stage_quotas[s]):
            origin = self._draw_node(s, which=0)
            dest = self._draw_node(s, which=1, exclude=origin)
            pid = len(self.packets)
            self.packets.append(_Packet(pid, origin, dest, self.clock))
            self.nodes[origin].queue.append(pid)
            key = (origin, dest)
            self.flows_remaining[key] = self.flows_remaining.get(key, 0) + 1
        self.stage_remaining = self._stage_quotas[s]
        if s > 0:
            self.trace.append(("stage", self.clock, s))

    def _draw_node(self, stage, which, exclude=None):
        weights, ids = [], []
        for i, spec in enumerate(self.env.nodes):
            w = spec.demands[stage][which]
            if w > 0 and i != exclude:
                ids.append(i)
                weights.append(w)
        if not ids:  # degenerate demand table: any other node will do
            ids = [i for i in range(len(self.env.nodes)) if i != exclude]
            weights = [1.0] * len(ids)
        return self.rng_demand.choices(ids, weights=weights)[0]

    def _active_jammers(self):
        out = []
        for j in self.env.jammers:
            flag = j.active[self.stage] if self.stage < len(j.active) else j.active[-1]
            if flag:
                out.append(j)
        return out

    # -- radio ----------------------------------------------------------

    def _device_pos(self, dev):
        kind, i = dev
        return self.agents[i].pos if kind == "a" else self.nodes[i].pos

    def attempt_transfer(self, sender, receiver, pid) -> str:
        """One transfer attempt; consumes one shadowing draw on attempt.

        sender/receiver are ("a", idx) or ("n", idx) device handles.
        """
        packet = self.packets[pid]
        if packet.holder != sender:
            raise DomainError("sender does not hold the packet")
        # budget or buffer violations fail without consuming a radio draw
        if self._sent.get(sender) or self._recv.get(receiver):
            return FAILED
        if receiver[0] == "a" and len(self.agents[receiver[1]].buffer) >= BUFFER_LIMIT:
            return FAILED
        self._sent[sender] = True
        self._recv[receiver] = True
        spos = self._device_pos(sender)
        rpos = self._device_pos(receiver)
        received = path_loss(self.params, spos, rpos, self.walls, self.rng_radio)
        ridx = receiver[1] if receiver[0] == "a" else self._na + receiver[1]
        if received - self._interf[ridx] < self.params.snr_threshold:
            return FAILED
        # success: move the packet
        if sender[0] == "a":
            self.agents[sender[1]].buffer.remove(pid)
        else:
            self.nodes[sender[1]].queue.remove(pid)
        packet.holder = receiver
        if receiver[0] == "a":
            self.agents[receiver[1]].buffer.append(pid)
        elif receiver[1] == packet.dest:
            packet.delivered = self.clock
            self.delivered_count += 1
            self.stage_remaining -= 1
            key = (packet.origin, packet.dest)
            self.flows_remaining[key] -= 1
            if not self.flows_remaining[key]:
                del self.flows_remaining[key]
            self.trace.append(("deliver", self.clock, pid, packet.origin, packet.dest))
        return DELIVERED

    # -- sensing --------------------------------------------------------

    def _compute_matrices(self):
        p = self.params
        jammers = self._active_jammers()
        pts = (
            [a.pos for a in self.agents]
            + [n.pos for n in self.nodes]
            + [j.position for j in jammers]
        )
        P = np.array(pts)
        diff = P[:, None, :] - P[None, :, :]
        D = np.sqrt((diff * diff).sum(-1))
        ATT = self.walls.attenuation_matrix(P) if len(self.walls) else 0.0
        LOSS = p.ref_loss + 10.0 * p.exponent * np.log10(
            np.maximum(D, p.ref_distance) / p.ref_distance
        ) + ATT
        nd = self._na + self._nn
        MEANRX = p.tx_power - LOSS  # received power at i from device j (mean)
        jam_mw = np.zeros(nd)
        jam_levels = []
        for k, j in enumerate(jammers):
            lvl = j.power - LOSS[:nd, nd + k]
            jam_levels.append(lvl)
            jam_mw += 10.0 ** (lvl / 10.0)
        interf = 10.0 * np.log10(jam_mw + 10.0 ** (p.noise_floor / 10.0))
        comm = (MEANRX[:nd, :nd] - interf[:, None]) >= p.snr_threshold
        np.fill_diagonal(comm, False)

        self._D = D.tolist()
        self._rx = MEANRX[:nd, :nd].tolist()
        self._interf = interf.tolist()
        self._comm = comm.tolist()
        self._jammers = jammers
        if jam_levels:
            JL = np.stack(jam_levels, axis=1)
            best = np.argmax(JL, axis=1)
            self._jam_best = [
                (JL[i, best[i]], jammers[best[i]].position) for i in range(nd)
            ]
        else:
            self._jam_best = [(-math.inf, None)] * nd
        self._sense_clock = self.clock

    def _assign_edges(self):
        """Concentrate agents on a few undirected corridors at a time."""
        edges = sorted({(min(o, d), max(o, d)) for o, d in self.flows_remaining})
        active = edges[:ACTIVE_EDGE_LIMIT]
        self._active_edges = set(active)
        for i, a in enumerate(self.agents):
            if a.buffer:
                pkt = self.packets[a.buffer[0]]
                a.edge = (min(pkt.origin, pkt.dest), max(pkt.origin, pkt.dest))
            elif active:
                a.edge = active[i * len(active) // self._na]
            # else: keep the previous assignment while the run drains
        groups = {}
        for i, a in enumerate(self.agents):
            if a.edge is not None:
                groups.setdefault(a.edge, []).append(i)
        self._slots = {}
        for (ea, eb), members in groups.items():
            s = self.nodes[ea].pos
            k = self.nodes[eb].pos
            ux, uy = k[0] - s[0], k[1] - s[1]
            members.sort(
                key=lambda i: (
                    (self.agents[i].pos[0] - s[0]) * ux
                    + (self.agents[i].pos[1] - s[1]) * uy,
                    i,
                )
            )
            n = len(members)
            for rank, i in enumerate(members):
                self._slots[i] = bv.slot_target(s, k, rank, n)

    def _jam_measure(self, idx):
        lvl, pos = self._jam_best[idx]
        if pos is None or lvl < self.params.noise_floor:
            return None, None
        return lvl, pos

    def _agent_context(self, i):
        a = self.agents[i]
        near = self.walls.near_points(a.pos, self.cfg.obstacle_trigger)
        if near:
            wd, wp = min(near, key=lambda t: t[0])
        else:
            wd, wp = math.inf, None
        jam_dbm, jam_pos = self._jam_measure(i)
        ctx = bv.AgentContext(
            a.pos, wall_dist=wd, wall_point=wp, near_walls=near,
            jam_dbm=jam_dbm, jam_pos=jam_pos,
        )
        if a.edge is not None:
            ctx.corridor = (self.nodes[a.edge[0]].pos, self.nodes[a.edge[1]].pos)
        ctx.slot_target = self._slots.get(i)
        if a.behaviour == 2:
            target_dev = None
            loaded = [
                (math.dist(a.pos, self.nodes[n].pos), n)
                for n in range(self._nn)
                if self.nodes[n].queue
            ]
            if a.buffer:
                target_dev = ("n", self.packets[a.buffer[0]].dest)
                if len(a.buffer) < BUFFER_LIMIT and loaded:
                    # top up at a nearby loaded node before the trip
                    d, n = min(loaded)
                    if d <= FERRY_HANDOFF:
                        target_dev = ("n", n)
            else:
                if loaded:
                    target_dev = ("n", min(loaded)[1])
                else:
                    carriers = [
                        (math.dist(a.pos, b.pos), j)
                        for j, b in enumerate(self.agents)
                        if j != i and b.buffer
                    ]
                    if carriers:
                        target_dev = ("a", min(carriers)[1])
            if target_dev is not None:
                ctx.target_pos = self._device_pos(target_dev)
                tidx = (
                    target_dev[1]
                    if target_dev[0] == "a"
                    else self._na + target_dev[1]
                )
                ctx.target_in_range = self._comm[tidx][i] and (
                    target_dev[0] == "a" or self._D[i][tidx] <= FERRY_HANDOFF
                )
        return ctx

    def _detected(self, i):
        row = self._comm[i]
        return [j for j in range(self._na + self._nn) if row[j]]

    def sense(self, i):
        """The 49-component observation for agent i at the current step."""
        if self._sense_clock != self.clock:
            self._compute_matrices()
            self._assign_edges()
        a = self.agents[i]
        row_comm = self._comm[i]
        row_d = self._D[i]
        row_rx = self._rx[i]
        pos = a.pos
        edge = a.edge
        src = edge[0] if edge else None
        snk = edge[1] if edge else None
        src_obs = src if src is not None and row_comm[self._na + src] else ID_SENTINEL
        snk_obs = snk if snk is not None and row_comm[self._na + snk] else ID_SENTINEL

        obs = [0.0] * 49
        neigh = sum(row_comm[: self._na + self._nn])
        obs[0] = neigh
        obs[1] = snk_obs
        obs[2] = src_obs
        if a.windows is not None:
            for k, w in enumerate(WINDOWS):
                ws, wr = a.windows[2 * k], a.windows[2 * k + 1]
                base = 3 + 4 * k
                obs[base] = ws.unique
                obs[base + 1] = ws.changes
                obs[base + 2] = wr.unique
                obs[base + 3] = wr.changes
        jam_dbm, _ = self._jam_measure(i)
        obs[19] = jam_dbm if jam_dbm is not None else 0.0
        obs[20] = self._interf[i]

        # directional neighbour picks
        def pick(devs, toward):
            best, bd = None, math.inf
            if toward is not None:
                tx, ty = toward[0] - pos[0], toward[1] - pos[1]
                tl = math.hypot(tx, ty)
            for j in devs:
                d = row_d[j]
                if toward is not None:
                    if tl == 0 or d == 0:
                        continue
                    dx, dy = (
                        self._all_pos[j][0] - pos[0],
                        self._all_pos[j][1] - pos[1],
                    )
                    if (dx * tx + dy * ty) / (d * tl) < self._cos_half:
                        continue
                if d < bd:
                    best, bd = j, d
            return best

        self._all_pos = [b.pos for b in self.agents] + [n.pos for n in self.nodes]
        self._cos_half = math.cos(math.radians(self.cfg.sinkward_half_angle))
        swarm = [j for j in range(self._na) if row_comm[j]]
        nonswarm = [self._na + n for n in range(self._nn) if row_comm[self._na + n]]
        sink_pos = self.nodes[snk].pos if snk is not None else None
        src_pos = self.nodes[src].pos if src is not None else None
        picks = [
            pick(swarm, None),
            pick(swarm, sink_pos),
            pick(swarm, src_pos),
            pick(nonswarm, None),
            pick(nonswarm, sink_pos),
            pick(nonswarm, src_pos),
        ]

        obs[21] = len(a.buffer)
        for k, j in enumerate(picks):
            if j is None:
                continue
            if j < self._na:
                has = 1 if self.agents[j].buffer else 0
                full = 1 if len(self.agents[j].buffer) >= BUFFER_LIMIT else 0
            else:
                has = 1 if self.nodes[j - self._na].queue else 0
                full = 0
            obs[22 + 2 * k] = has
            obs[23 + 2 * k] = full

        obs[34] = (
            self._D[self._na + src][self._na + snk]
            if src is not None and snk is not None
            else SENSE_CAP
        )
        slot = 35
        for j in picks[:3]:
            obs[slot] = row_d[j] if j is not None else SENSE_CAP
            obs[slot + 1] = row_rx[j] if j is not None else SIGNAL_SENTINEL
            slot += 2
        self._cos_half = math.cos(math.radians(self.cfg.roughly_sinkward_half_angle))
        rough = pick(swarm, sink_pos)
        obs[41] = row_d[rough] if rough is not None else SENSE_CAP
        self._cos_half = math.cos(math.radians(self.cfg.sinkward_half_angle))
        slot = 42
        for j in picks[3:]:
            obs[slot] = row_d[j] if j is not None else SENSE_CAP
            obs[slot + 1] = row_rx[j] if j is not None else SIGNAL_SENTINEL
            slot += 2
        wd, _ = self.walls.closest_distance(pos, SENSE_CAP)
        obs[48] = min(wd, SENSE_CAP)
        return obs

    # -- stepping -------------------------------------------------------

    def step(self):
        if self.done:
            raise DomainError("world already terminated")
        clock = self.clock

        # (1) node movement
        for node in self.nodes:
            if node.route:
                tx, ty = node.route[0]
                dx, dy = tx - node.pos[0], ty - node.pos[1]
                dist = math.hypot(dx, dy)
                stride = node.speed * STEP_SECONDS
                if dist <= stride:
                    node.pos = (tx, ty)
                    node.route.pop(0)
                else:
                    node.pos = (
                        node.pos[0] + dx / dist * stride,
                        node.pos[1] + dy / dist * stride,
                    )

        # (2) sensing
        self._compute_matrices()
        self._assign_edges()
        obs_by_agent = None
        if self.full_sense:
            for i, a in enumerate(self.agents):
                # the history windows track the agent's corridor assignment,
                # so their unique/change counters measure routing churn
                # rather than line-of-sight flicker
                edge = a.edge
                snk_obs = edge[1] if edge else ID_SENTINEL
                src_obs = edge[0] if edge else ID_SENTINEL
                for k in range(len(WINDOWS)):
                    a.windows[2 * k].push(snk_obs)
                    a.windows[2 * k + 1].push(src_obs)
            want_obs = (
                self.observations is not None
                and clock % self.observation_stride == 0
            )
            if want_obs or self.controller == "rhgn":
                obs_by_agent = [self.sense(i) for i in range(self._na)]
            if want_obs:
                for o in obs_by_agent:
                    self.observations.append(o)

        # (3) classification
        if self.controller == "rhgn":
            for i, a in enumerate(self.agents):
                key = tuple(
                    t for seg in self.bundle.schema.quantise(obs_by_agent[i])
                    for t in seg
                )
                tup = self._classify_cache.get(key)
                if tup is None:
                    tup = self.bundle.classify(obs_by_agent[i])
                    self._classify_cache[key] = tup
                a.collection.record_local(tup, clock)

        # (4) belief broadcast
        if self.controller == "rhgn" and clock % self.schedule.broadcast_period == 0:
            payloads = []
            for a in self.agents:
                try:
                    payloads.append(
                        a.collection.make_broadcast(
                            clock - self.schedule.broadcast_period + 1
                        )
                    )
                except NothingToShare:
                    payloads.append(None)
            for s, payload in enumerate(payloads):
                if payload is None:
                    continue
                for r, b in enumerate(self.agents):
                    if r != s and self._comm[r][s]:
                        b.collection.record_remote(payload, s, clock)
        if self.record_predictions:
            for a in self.agents:
                if a.collection is not None and len(a.collection):
                    a.preds.append(a.collection.fused_argmax())
                else:
                    a.preds.append(-1)

        # (5) behaviour selection
        if (
            self.controller == "rhgn"
            and clock > 0
            and clock % self.schedule.selection_period == 0
        ):
            for i, a in enumerate(self.agents):
                if not len(a.collection):
                    continue
                env_idx, mb = a.collection.fuse_and_select(self._behaviour_for_env)
                a.behaviour = mb
                a.collection.clear()
                self.trace.append(
                    ("select", clock, i, a.pos[0], a.pos[1],
                     self._labels[env_idx], mb)
                )

        # (6) forces and movement
        w, h = self.arena
        for i, a in enumerate(self.agents):
            ctx = self._agent_context(i)
            force = bv.FORCES[a.behaviour](ctx, self.cfg, a.bstate)
            move = clamp_move(a.pos, force, self.walls)
            nx = min(max(a.pos[0] + move[0], 0.0), w)
            ny = min(max(a.pos[1] + move[1], 0.0), h)
            actual = (nx - a.pos[0], ny - a.pos[1])
            if a.behaviour == 2:
                bv.mb2_note_move(a.bstate, self.cfg, force, actual)
            a.pos = (nx, ny)

        # (7) packet transfers (positions changed: refresh link state)
        self._compute_matrices()
        self._sent, self._recv = {}, {}
        for n, node in enumerate(self.nodes):
            # dispatch the oldest packet bound for an active corridor, to the
            # closest eligible agent serving that corridor (ferries serve any)
            pid, pedge = None, None
            for q in node.queue:
                pkt = self.packets[q]
                e = (min(pkt.origin, pkt.dest), max(pkt.origin, pkt.dest))
                if e in self._active_edges:
                    pid, pedge = q, e
                    break
            if pid is None:
                continue
            best, bd = None, math.inf
            for i, a in enumerate(self.agents):
                if (
                    self._comm[i][self._na + n]
                    and len(a.buffer) < BUFFER_LIMIT
                    and not self._recv.get(("a", i))
                    and (a.edge == pedge or bv.ROUTING[a.behaviour] == "ferry")
                    and self._D[i][self._na + n] < bd
                ):
                    best, bd = i, self._D[i][self._na + n]
            if best is not None:
                self.attempt_transfer(("n", n), ("a", best), pid)
        for i, a in enumerate(self.agents):
            if not a.buffer or self._sent.get(("a", i)):
                continue
            pid = a.buffer[0]
            dest = self.packets[pid].dest
            didx = self._na + dest
            candidates = []
            direct = self._comm[didx][i] and not self._recv.get(("n", dest))
            if bv.ROUTING[a.behaviour] == "ferry":
                # ferrying means physical transport: hand over only near the
                # destination, not over a long opportunistic radio link
                direct = direct and self._D[i][didx] <= FERRY_HANDOFF
            if direct:
                candidates.append((0.0, ("n", dest)))
            if bv.ROUTING[a.behaviour] == "relay":
                my_d = self._D[i][didx]
                for j, b in enumerate(self.agents):
                    if (
                        j != i
                        and self._comm[j][i]
                        and len(b.buffer) < BUFFER_LIMIT
                        and not self._recv.get(("a", j))
                        and self._D[j][didx] < my_d
                    ):
                        candidates.append((self._D[j][didx], ("a", j)))
            if candidates:
                candidates.sort(key=lambda c: (c[0], c[1]))
                self.attempt_transfer(("a", i), candidates[0][1], pid)

        # (8) stage advance
        if self.stage_remaining == 0 and self.stage + 1 < self.env.stages:
            self._begin_stage(self.stage + 1)

        # (9) termination
        self.clock += 1
        if self.delivered_count == self.total_packets:
            self.done = True
            self.t_s = self.clock
        elif self.clock >= self.T:
            self.done = True
            self.t_s = self.T

    def run(self):
        while not self.done:
            self.step()
        return self

    def fitness(self) -> float:
        t_s = self.t_s if self.done else self.T
        return fitness(self.delivered_count, self.total_packets, t_s, self.T)

    # -- determinism ----------------------------------------------------

    def digest(self) -> int:
        buf = bytearray()
        buf += struct.pack("<qqq", self.clock, self.stage, self.delivered_count)
        for a in self.agents:
            buf += struct.pack("<ddqq", a.pos[0], a.pos[1], a.behaviour,
                               len(a.buffer))
        for n in self.nodes:
            buf += struct.pack("<ddq", n.pos[0], n.pos[1], len(n.queue))
        for p in self.packets:
            holder = p.holder[1] if p.holder[0] == "n" else 1000 + p.holder[1]
            buf += struct.pack(
                "<qq", holder, p.delivered if p.delivered is not None else -1
            )
        return fnv1a64(bytes(buf))


def format_trace(trace):
    return "".join(" ".join(str(x) for x in ev) + "\n" for ev in trace)
