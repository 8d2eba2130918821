"""Per-agent belief collection, periodic sharing and behaviour selection."""

from __future__ import annotations

from dataclasses import dataclass, field

from . import probs
from .errors import DimensionMismatch, EmptyCollection, NothingToShare

LOCAL = -1  # origin marker for the agent's own predictions


@dataclass
class FusionSchedule:
    selection_period: int = 500
    broadcast_period: int = 10

    def __post_init__(self):
        if self.selection_period % self.broadcast_period:
            raise ValueError("broadcast period must divide selection period")


@dataclass
class BeliefCollection:
    """Tuples gathered since the last selection event, local and remote."""

    dim: int
    samples: list = field(default_factory=list)  # (tuple, origin, step)
    # running sums keep per-step fused argmax O(dim)
    _sums: list = None
    _local_count: int = 0

    def __post_init__(self):
        if self._sums is None:
            self._sums = [0.0] * self.dim

    def __len__(self):
        return len(self.samples)

    def _add(self, t, origin, step):
        if len(t) != self.dim:
            raise DimensionMismatch(f"tuple dimension {len(t)} != {self.dim}")
        self.samples.append((t, origin, step))
        for i, x in enumerate(t):
            self._sums[i] += x

    def record_local(self, t, step):
        self._add(t, LOCAL, step)
        self._local_count += 1

    def record_remote(self, t, sender, step):
        self._add(t, sender, step)

    def make_broadcast(self, since_step):
        """Mean of LOCAL samples recorded at or after since_step."""
        local = [t for t, origin, step in self.samples
                 if origin == LOCAL and step >= since_step]
        if not local:
            raise NothingToShare("no local samples in the broadcast window")
        return probs.mean(local)

    def fused(self):
        """Equal-weight mean over every sample currently held."""
        k = len(self.samples)
        if k == 0:
            raise EmptyCollection("no samples to fuse")
        return tuple(s / k for s in self._sums)

    def fused_argmax(self):
        k = len(self.samples)
        if k == 0:
            raise EmptyCollection("no samples to fuse")
        return probs.argmax(self._sums)

    def fuse_and_select(self, behaviour_for_env):
        """Select (env index, behaviour id); the caller clears afterwards."""
        env = self.fused_argmax()
        return env, behaviour_for_env(env)

    def clear(self):
        self.samples.clear()
        self._sums = [0.0] * self.dim
        self._local_count = 0
