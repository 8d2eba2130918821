"""Dynamically grown, gated graph-neuron pyramid.

A pyramid memorises fixed-length integer patterns one-shot and recalls
them by id.  Rows hold one neuron per distinct observed component value;
each neuron stores the (left, right) neighbour messages it has seen as
bias entries with row-dense sub-pattern indices.  Layer ``l+1`` has two
fewer rows than layer ``l`` and receives the inner rows' indices as its
input values, so the single top-row index identifies the whole pattern.
"""

from __future__ import annotations

from bisect import bisect_left, insort

import numpy as np

from .errors import EvenLength, LengthMismatch

# Recall result for a pattern the pyramid cannot resolve.
NO_MATCH = None

# Edge rows have a single neighbour; the missing side carries this marker.
_NONE_MSG = -(1 << 62)


class Neuron:
    __slots__ = ("value", "bias")

    def __init__(self, value: int):
        self.value = value
        self.bias: dict[tuple[int, int], int] = {}


class NeuronRow:
    """One gated row: value-keyed neurons plus the row's index counter."""

    __slots__ = ("neurons", "values_sorted", "next_index")

    def __init__(self):
        self.neurons: dict[int, Neuron] = {}
        self.values_sorted: list[int] = []
        self.next_index = 0

    def nearest_value(self, value: int):
        """Closest stored value; ties break toward the lower value."""
        vs = self.values_sorted
        if not vs:
            return None
        i = bisect_left(vs, value)
        if i == 0:
            return vs[0]
        if i == len(vs):
            return vs[-1]
        lo, hi = vs[i - 1], vs[i]
        return lo if value - lo <= hi - value else hi


class NeuronPyramid:
    """Triangular hierarchy of gated neuron rows for odd pattern length n."""

    def __init__(self, n: int):
        if n < 1 or n % 2 == 0:
            raise EvenLength(f"pattern length must be odd and >= 1, got {n}")
        self.n = n
        self.layers: list[list[NeuronRow]] = []
        rows = n
        while rows >= 1:
            self.layers.append([NeuronRow() for _ in range(rows)])
            rows -= 2

    @property
    def next_pattern_id(self) -> int:
        return self.layers[-1][0].next_index

    def memorise(self, pattern) -> int:
        """Store (or re-activate) a pattern, returning its dense id."""
        if len(pattern) != self.n:
            raise LengthMismatch(f"expected length {self.n}, got {len(pattern)}")
        vals = list(pattern)
        for rows in self.layers:
            r = len(rows)
            indices = []
            for i in range(r):
                row = rows[i]
                v = vals[i]
                neuron = row.neurons.get(v)
                if neuron is None:
                    neuron = Neuron(v)
                    row.neurons[v] = neuron
                    insort(row.values_sorted, v)
                left = vals[i - 1] if i > 0 else _NONE_MSG
                right = vals[i + 1] if i < r - 1 else _NONE_MSG
                key = (left, right)
                idx = neuron.bias.get(key)
                if idx is None:
                    idx = row.next_index
                    row.next_index = idx + 1
                    neuron.bias[key] = idx
                indices.append(idx)
            if r == 1:
                return indices[0]
            vals = indices[1:-1]
        raise AssertionError("unreachable")

    def recall(self, pattern):
        """Resolve a pattern to its trained id, or NO_MATCH.

        Base-row value misses snap to the numerically nearest stored value
        (ties toward the lower value); bias-pair misses and empty rows are
        NO_MATCH.  The pyramid is not mutated.
        """
        if len(pattern) != self.n:
            raise LengthMismatch(f"expected length {self.n}, got {len(pattern)}")
        vals = list(pattern)
        base = True
        for rows in self.layers:
            r = len(rows)
            if base:
                # value substitution applies only to raw components
                for i in range(r):
                    row = rows[i]
                    if vals[i] not in row.neurons:
                        sub = row.nearest_value(vals[i])
                        if sub is None:
                            return NO_MATCH
                        vals[i] = sub
                base = False
            indices = []
            for i in range(r):
                neuron = rows[i].neurons.get(vals[i])
                if neuron is None:
                    return NO_MATCH
                left = vals[i - 1] if i > 0 else _NONE_MSG
                right = vals[i + 1] if i < r - 1 else _NONE_MSG
                idx = neuron.bias.get((left, right))
                if idx is None:
                    return NO_MATCH
                indices.append(idx)
            if r == 1:
                return indices[0]
            vals = indices[1:-1]
        raise AssertionError("unreachable")

    def neuron_count(self) -> int:
        return sum(len(row.neurons) for rows in self.layers for row in rows)

    def bias_entry_count(self) -> int:
        return sum(
            len(neuron.bias)
            for rows in self.layers
            for row in rows
            for neuron in row.neurons.values()
        )

    # -- serialization (int64 little-endian stream) --------------------

    def to_words(self) -> list[int]:
        """Flatten to a list of int64 words; insertion order preserved."""
        words = [self.n]
        for rows in self.layers:
            for row in rows:
                words.append(row.next_index)
                words.append(len(row.neurons))
                for v, neuron in row.neurons.items():
                    words.append(v)
                    words.append(len(neuron.bias))
                    for (l, r), idx in neuron.bias.items():
                        words.append(l)
                        words.append(r)
                        words.append(idx)
        return words

    def to_bytes(self) -> bytes:
        return np.asarray(self.to_words(), dtype="<i8").tobytes()

    @classmethod
    def from_words(cls, words, pos: int = 0):
        n = int(words[pos])
        pos += 1
        pyr = cls(n)
        for rows in pyr.layers:
            for row in rows:
                row.next_index = int(words[pos])
                n_neurons = int(words[pos + 1])
                pos += 2
                for _ in range(n_neurons):
                    v = int(words[pos])
                    n_entries = int(words[pos + 1])
                    pos += 2
                    neuron = Neuron(v)
                    for _ in range(n_entries):
                        neuron.bias[(int(words[pos]), int(words[pos + 1]))] = int(
                            words[pos + 2]
                        )
                        pos += 3
                    row.neurons[v] = neuron
                row.values_sorted = sorted(row.neurons)
        return pyr, pos

    @classmethod
    def from_bytes(cls, data: bytes):
        words = np.frombuffer(data, dtype="<i8")
        pyr, _ = cls.from_words(words)
        return pyr


def static_hgn_count(n: int, r: int) -> int:
    """Neuron total of a statically allocated pyramid: r * (n+1)^2 / 4."""
    if n < 1 or n % 2 == 0:
        raise EvenLength(f"pattern length must be odd and >= 1, got {n}")
    if r < 1:
        raise ValueError(f"value range must be >= 1, got {r}")
    return r * (n + 1) ** 2 // 4
