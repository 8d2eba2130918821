"""Observation quantisation and the full hierarchical classifier.

Three lower pyramids (networking / packets / distance segments of the
49-component observation) map sub-patterns to per-environment probability
tuples built from training counts.  An upper pyramid over the three lower
argmax indices resolves the final tuple; when the upper pyramid has never
seen the argmax triple, the lower tuples are averaged instead.
"""

from __future__ import annotations

import io
import math
import struct
import zlib
from dataclasses import dataclass

import numpy as np

from . import probs
from .errors import (
    CorruptBundle,
    EmptyCorpus,
    IoFailure,
    LabelMismatch,
    NonFinite,
    Untrained,
    VersionMismatch,
)
from .hgn import NO_MATCH, NeuronPyramid

# Quantiser kinds
IDENTITY = "identity"
SCALE10 = "scale10"  # round to 1 decimal, store as value*10
NOISE_BIN = "noise"  # 7-state categoriser over dB thresholds

NOISE_BIN_EDGES = (-95.0, -85.5, -71.25, -47.5, -23.75, 0.0)


def noise_bin(db: float) -> int:
    if db > 0.0:
        return 6
    b = 0
    for edge in NOISE_BIN_EDGES[:5]:
        if db >= edge:
            b += 1
        else:
            break
    return b


def round_half_away(x: float) -> int:
    scaled = x * 10.0
    if scaled >= 0:
        return int(math.floor(scaled + 0.5))
    return -int(math.floor(-scaled + 0.5))


@dataclass(frozen=True)
class Component:
    name: str
    kind: str


def _windowed(kind: str, windows=(10, 100, 500, 1000)):
    return [
        Component(f"{which}_{w}", IDENTITY)
        for w in windows
        for which in ("unique_sinks", "sink_changes", "unique_sources", "source_changes")
    ]


NETWORKING_COMPONENTS = (
    [
        Component("neighbourhood_size", IDENTITY),
        Component("sink_id", IDENTITY),
        Component("source_id", IDENTITY),
    ]
    + _windowed(IDENTITY)
    + [
        Component("jamming_strength", SCALE10),
        Component("noise_state", NOISE_BIN),
    ]
)

PACKETS_COMPONENTS = [Component("packets_held", IDENTITY)] + [
    Component(f"{who}_{what}", IDENTITY)
    for who in (
        "closest_swarm",
        "sinkward_swarm",
        "sourceward_swarm",
        "closest_nonswarm",
        "sinkward_nonswarm",
        "sourceward_nonswarm",
    )
    for what in ("has_packets", "is_full")
]

DISTANCE_COMPONENTS = (
    [Component("source_sink_distance", SCALE10)]
    + [
        Component(f"{who}_{what}", SCALE10)
        for who in ("closest_swarm", "sinkward_swarm", "sourceward_swarm")
        for what in ("distance", "signal")
    ]
    + [Component("roughly_sinkward_swarm_distance", SCALE10)]
    + [
        Component(f"{who}_{what}", SCALE10)
        for who in ("closest_nonswarm", "sinkward_nonswarm", "sourceward_nonswarm")
        for what in ("distance", "signal")
    ]
    + [Component("closest_wall_distance", SCALE10)]
)


class PatternSchema:
    """Ordered observation segments plus per-component quantisers.

    Segments with even length are padded with a constant zero component so
    every pyramid keeps an odd pattern length.
    """

    def __init__(self, segments=None):
        if segments is None:
            segments = [
                ("networking", list(NETWORKING_COMPONENTS)),
                ("packets", list(PACKETS_COMPONENTS)),
                ("distance", list(DISTANCE_COMPONENTS)),
            ]
        self.segments = [(name, list(comps)) for name, comps in segments]
        self.raw_length = sum(len(c) for _, c in self.segments)
        self.segment_lengths = [
            len(c) + (len(c) % 2 == 0) for _, c in self.segments
        ]
        # precomputed per-segment quantiser kind lists for the hot path
        self._kinds = [[c.kind for c in comps] for _, comps in self.segments]

    def quantise(self, raw):
        """Split and quantise one raw observation into segment patterns."""
        if len(raw) != self.raw_length:
            raise ValueError(
                f"observation length {len(raw)} != schema length {self.raw_length}"
            )
        out = []
        pos = 0
        for kinds, padded in zip(self._kinds, self.segment_lengths):
            seg = []
            for kind in kinds:
                v = raw[pos]
                pos += 1
                if not math.isfinite(v):
                    raise NonFinite(f"non-finite reading at component {pos - 1}")
                if kind == SCALE10:
                    seg.append(round_half_away(v))
                elif kind == NOISE_BIN:
                    seg.append(noise_bin(v))
                else:
                    seg.append(int(v))
            while len(seg) < padded:
                seg.append(0)
            out.append(tuple(seg))
        return out

    def to_text(self) -> str:
        lines = []
        for name, comps in self.segments:
            lines.append(f"[{name}]")
            lines.extend(f"{c.name} {c.kind}" for c in comps)
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str):
        segments = []
        for line in text.splitlines():
            line = line.strip()
            if not line:
                continue
            if line.startswith("["):
                segments.append((line[1:-1], []))
            else:
                name, kind = line.rsplit(" ", 1)
                segments[-1][1].append(Component(name, kind))
        return cls(segments)

    def digest(self) -> int:
        return zlib.crc32(self.to_text().encode())


# Default environment-to-behaviour map for the training catalog.
DEFAULT_BEHAVIOUR_MAP = {
    "1.1": 1,
    "1.2": 2,
    "1.3": 1,
    "2.1": 1,
    "2.2": 1,
    "2.3": 3,
}

_MAGIC = b"RHGN"
_FORMAT_VERSION = 1


class ClassifierBundle:
    """Schema, pyramids, probability tables and the behaviour map."""

    def __init__(self, schema=None, env_labels=None, behaviour_map=None):
        self.schema = schema or PatternSchema()
        self.env_labels = list(env_labels or DEFAULT_BEHAVIOUR_MAP)
        if behaviour_map is None:
            behaviour_map = {
                e: DEFAULT_BEHAVIOUR_MAP.get(e, 1) for e in self.env_labels
            }
        self.behaviour_map = dict(behaviour_map)
        missing = set(self.env_labels) - set(self.behaviour_map)
        if missing:
            raise LabelMismatch(f"behaviour map misses labels {sorted(missing)}")
        self.lower = [NeuronPyramid(n) for n in self.schema.segment_lengths]
        self.upper = NeuronPyramid(3)
        self.lower_tables = [dict() for _ in self.lower]
        self.upper_table: dict[int, tuple] = {}
        self.trained = False
        # memo of exact quantised segment tuples -> sub-pattern id
        self._memo = [dict() for _ in self.lower]

    @property
    def n_envs(self) -> int:
        return len(self.env_labels)

    # -- training -------------------------------------------------------

    def train(self, corpus):
        """Two-pass training over (raw observation, env label) pairs."""
        corpus = list(corpus)
        if not corpus:
            raise EmptyCorpus("training corpus is empty")
        env_index = {e: i for i, e in enumerate(self.env_labels)}
        n_env = len(env_index)
        quantised = []
        lower_counts = [dict() for _ in self.lower]
        for raw, label in corpus:
            ei = env_index.get(label)
            if ei is None:
                raise LabelMismatch(f"unknown environment label {label!r}")
            segs = raw if isinstance(raw, tuple) and isinstance(raw[0], tuple) else None
            segs = self.schema.quantise(raw) if segs is None else list(segs)
            sub_ids = []
            for k, seg in enumerate(segs):
                sid = self._memo[k].get(seg)
                if sid is None:
                    sid = self.lower[k].memorise(seg)
                    self._memo[k][seg] = sid
                counts = lower_counts[k].get(sid)
                if counts is None:
                    counts = lower_counts[k][sid] = [0] * n_env
                counts[ei] += 1
                sub_ids.append(sid)
            quantised.append((tuple(sub_ids), ei))
        for k, table in enumerate(lower_counts):
            self.lower_tables[k] = {
                sid: probs.normalise(c) for sid, c in table.items()
            }
        # pass 2: upper pyramid over the lower argmax triples
        upper_counts: dict[int, list] = {}
        for sub_ids, ei in quantised:
            triple = tuple(
                probs.argmax(self.lower_tables[k][sid])
                for k, sid in enumerate(sub_ids)
            )
            uid = self.upper.memorise(triple)
            counts = upper_counts.get(uid)
            if counts is None:
                counts = upper_counts[uid] = [0] * n_env
            counts[ei] += 1
        self.upper_table = {
            uid: probs.normalise(c) for uid, c in upper_counts.items()
        }
        self.trained = True
        return self

    # -- classification -------------------------------------------------

    def classify(self, raw):
        return self.classify_quantised(self.schema.quantise(raw))

    def classify_quantised(self, segments):
        """Classify pre-quantised segment patterns to a probability tuple."""
        if not self.trained:
            raise Untrained("classifier has no probability tables")
        unknown = probs.uniform(self.n_envs)
        lower_tuples = []
        missed = False
        for k, seg in enumerate(segments):
            sid = self.lower[k].recall(seg)
            t = self.lower_tables[k].get(sid) if sid is not NO_MATCH else None
            if t is None:
                t, missed = unknown, True
            lower_tuples.append(t)
        # a missed segment has no meaningful argmax, so the upper lookup
        # only runs on fully recognised patterns; misses fall through to
        # the mean of the lower tuples
        if not missed:
            triple = tuple(probs.argmax(t) for t in lower_tuples)
            uid = self.upper.recall(triple)
            if uid is not NO_MATCH:
                t = self.upper_table.get(uid)
                if t is not None:
                    return t
        return probs.mean(lower_tuples)

    def select_behaviour(self, t) -> int:
        return self.behaviour_map[self.env_labels[probs.argmax(t)]]

    # -- persistence ----------------------------------------------------

    def to_bytes(self) -> bytes:
        if not self.trained:
            raise Untrained("refusing to save an untrained bundle")
        buf = io.BytesIO()
        buf.write(_MAGIC)
        buf.write(struct.pack("<HI", _FORMAT_VERSION, self.schema.digest()))
        _write_blob(buf, self.schema.to_text().encode())
        buf.write(struct.pack("<I", len(self.env_labels)))
        for label in self.env_labels:
            _write_blob(buf, label.encode())
            buf.write(struct.pack("<i", self.behaviour_map[label]))
        for pyr in [*self.lower, self.upper]:
            _write_blob(buf, pyr.to_bytes())
        for table in [*self.lower_tables, self.upper_table]:
            buf.write(struct.pack("<I", len(table)))
            for sid in table:
                buf.write(struct.pack("<q", sid))
                buf.write(np.asarray(table[sid], dtype="<f8").tobytes())
        body = buf.getvalue()
        return body + struct.pack("<I", zlib.crc32(body))

    @classmethod
    def from_bytes(cls, data: bytes):
        if len(data) < 14 or data[:4] != _MAGIC:
            raise CorruptBundle("not a classifier bundle")
        body, (crc,) = data[:-4], struct.unpack("<I", data[-4:])
        if zlib.crc32(body) != crc:
            raise CorruptBundle("checksum mismatch")
        buf = io.BytesIO(body)
        buf.read(4)
        version, schema_digest = struct.unpack("<HI", buf.read(6))
        if version != _FORMAT_VERSION:
            raise VersionMismatch(f"bundle format {version} unsupported")
        schema = PatternSchema.from_text(_read_blob(buf).decode())
        if schema.digest() != schema_digest:
            raise CorruptBundle("schema digest mismatch")
        (n_labels,) = struct.unpack("<I", buf.read(4))
        labels, bmap = [], {}
        for _ in range(n_labels):
            label = _read_blob(buf).decode()
            (beh,) = struct.unpack("<i", buf.read(4))
            labels.append(label)
            bmap[label] = beh
        bundle = cls(schema, labels, bmap)
        pyramids = [NeuronPyramid.from_bytes(_read_blob(buf)) for _ in range(4)]
        bundle.lower = pyramids[:3]
        bundle.upper = pyramids[3]
        tables = []
        for _ in range(4):
            (count,) = struct.unpack("<I", buf.read(4))
            table = {}
            for _ in range(count):
                (sid,) = struct.unpack("<q", buf.read(8))
                vec = np.frombuffer(buf.read(8 * n_labels), dtype="<f8")
                table[sid] = tuple(vec)
            tables.append(table)
        bundle.lower_tables = tables[:3]
        bundle.upper_table = tables[3]
        bundle.trained = True
        return bundle

    def save(self, path):
        try:
            with open(path, "wb") as fh:
                fh.write(self.to_bytes())
        except OSError as exc:
            raise IoFailure(str(exc)) from exc

    @classmethod
    def load(cls, path):
        try:
            with open(path, "rb") as fh:
                data = fh.read()
        except OSError as exc:
            raise IoFailure(str(exc)) from exc
        return cls.from_bytes(data)


def _write_blob(buf, data: bytes):
    buf.write(struct.pack("<Q", len(data)))
    buf.write(data)


def _read_blob(buf) -> bytes:
    raw = buf.read(8)
    if len(raw) < 8:
        raise CorruptBundle("truncated bundle")
    (length,) = struct.unpack("<Q", raw)
    data = buf.read(length)
    if len(data) < length:
        raise CorruptBundle("truncated bundle")
    return data


def read_corpus(path):
    """Read a text corpus: one observation per line, values then label."""
    corpus = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split(",")
            corpus.append(([float(x) for x in parts[:-1]], parts[-1]))
    return corpus


def write_corpus(path, corpus):
    with open(path, "w") as fh:
        for raw, label in corpus:
            fh.write(",".join(f"{v:.10g}" for v in raw) + f",{label}\n")
