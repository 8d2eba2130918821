"""Designed catalog and random-generator tests."""

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rhgn.environments import (
    DESIGNED_IDS,
    NOISE_DETECT_DB,
    TRAINING_IDS,
    EnvironmentSpec,
    GeneratorConfig,
    NodeSpec,
    designed_env,
    generate_env,
)
from rhgn.errors import UnknownId
from rhgn.geometry import point_segment_distance
from rhgn.radio import RadioParams


def test_catalog_ids():
    assert len(DESIGNED_IDS) == 8
    assert TRAINING_IDS == DESIGNED_IDS[:6]


@pytest.mark.parametrize("env_id", DESIGNED_IDS)
def test_designed_envs_validate_and_roundtrip(env_id):
    env = designed_env(env_id)
    assert env.name == env_id
    env.validate()
    clone = EnvironmentSpec.from_text(env.to_text())
    assert clone.to_text() == env.to_text()
    assert clone.digest() == env.digest()


def test_training_envs_are_labelled_holdouts_not():
    for env_id in TRAINING_IDS:
        assert designed_env(env_id).label == env_id
    assert designed_env("3.1").label is None
    assert designed_env("3.2").label is None


# Golden digests of the canonical text form: any accidental change to the
# catalog (or its serialisation) shows up here before it skews results.
GOLDEN_DIGESTS = {
    "1.1": 0x8A40360685DC5F80,
    "1.2": 0x89599041E319B900,
    "1.3": 0x82F82E0A53782801,
    "2.1": 0x37BB6DE8AE3F4E25,
    "2.2": 0xD50ED11B267B7538,
    "2.3": 0xA4B00165AF1FD959,
    "3.1": 0x8291E6A60583240B,
    "3.2": 0x3FD1C591E3F0C251,
}


def test_catalog_golden_digests():
    assert {i: designed_env(i).digest() for i in DESIGNED_IDS} == GOLDEN_DIGESTS


def test_checked_in_env_files_match_catalog():
    from importlib.resources import files

    data = files("rhgn").joinpath("data/envs")
    manifest = dict(
        line.split() for line in data.joinpath("digests.txt")
        .read_text().splitlines()
    )
    assert set(manifest) == set(DESIGNED_IDS)
    for env_id in DESIGNED_IDS:
        text = data.joinpath(f"{env_id}.env").read_text()
        env = EnvironmentSpec.from_text(text)
        assert env.to_text() == designed_env(env_id).to_text()
        assert f"{env.digest():016x}" == manifest[env_id]


def test_unknown_id():
    with pytest.raises(UnknownId):
        designed_env("9.9")


def test_corridor_family_geometry():
    thin = designed_env("1.1")
    thick = designed_env("1.2")
    assert [w.attenuation for w in thin.walls] == [5.0] * 3
    assert [w.attenuation for w in thick.walls] == [100.0] * 3
    for env in (thin, thick):
        assert env.nodes[0].position == (20.0, 50.0)
        assert env.nodes[1].position == (80.0, 50.0)
    box = designed_env("1.3")
    # the box opening is the 2 m gap between the two east wall pieces
    ys = sorted(
        y for w in box.walls if w.a[0] == w.b[0] == 30.0 for y in (w.a[1], w.b[1])
    )
    assert 51.0 - 49.0 == pytest.approx(ys[2] - ys[1])


def test_triangle_family_jammers():
    assert designed_env("2.1").jammers[0].active == (False,)
    assert designed_env("2.2").jammers[0].active == (False,)
    assert designed_env("2.3").jammers[0].active == (True,)
    pts = [n.position for n in designed_env("2.3").nodes]
    for a, b in [(0, 1), (1, 2), (0, 2)]:
        assert math.dist(pts[a], pts[b]) == pytest.approx(100.0)


def test_demand_validation_rejects_bad_sums():
    with pytest.raises(ValueError):
        EnvironmentSpec(
            "bad", (10.0, 10.0),
            nodes=[
                NodeSpec((1.0, 1.0), ((60.0, 0.0),), ((),)),
                NodeSpec((9.0, 9.0), ((0.0, 100.0),), ((),)),
            ],
        ).validate()
    with pytest.raises(ValueError):  # idle node
        EnvironmentSpec(
            "idle", (10.0, 10.0),
            nodes=[
                NodeSpec((1.0, 1.0), ((100.0, 100.0),), ((),)),
                NodeSpec((9.0, 9.0), ((0.0, 0.0),), ((),)),
            ],
        ).validate()


@pytest.mark.parametrize("seed", range(8))
def test_generated_envs_satisfy_constraints(seed):
    config = GeneratorConfig()
    env = generate_env(config, seed)
    env.validate()
    assert len(env.nodes) in config.node_counts
    assert env.stages in config.stage_counts

    # every node path point stays outside detection range of the jammer
    radio = RadioParams()
    jam = env.jammers[0]
    radius = radio.jam_radius(jam.power, NOISE_DETECT_DB)
    for node in env.nodes:
        pts = [node.position] + [p for wps in node.waypoints for p in wps]
        for p in pts:
            assert math.dist(p, jam.position) > radius
        # obstacles keep clear of path endpoints
        for wall in env.walls:
            for p in pts:
                assert (
                    point_segment_distance(p, wall.a, wall.b)
                    > config.path_clearance
                )

    # demands sum to 100 +- 0.5 per stage, no node idle in every stage
    for s in range(env.stages):
        assert sum(n.demands[s][0] for n in env.nodes) == pytest.approx(100.0)
        assert sum(n.demands[s][1] for n in env.nodes) == pytest.approx(100.0)


def test_generated_env_deterministic_and_roundtrips():
    a = generate_env(GeneratorConfig(), 42)
    b = generate_env(GeneratorConfig(), 42)
    assert a.to_text() == b.to_text()
    clone = EnvironmentSpec.from_text(a.to_text())
    assert clone.digest() == a.digest()
