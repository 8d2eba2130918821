"""Harness and CLI tests on deliberately tiny runs."""

import pytest

from rhgn import cli
from rhgn.environments import designed_env
from rhgn.errors import IoFailure
from rhgn.harness import (
    MAP_COLOURS,
    RunConfig,
    emit_behaviour_map,
    extract_corpus,
    resolve_env,
    results_table,
    run_experiment,
    run_single,
    suite_configs,
    train_bundle,
)


def test_run_config_scaling():
    config = RunConfig(packets=1000, steps=50_000,
                       scale_packets=0.1, scale_steps=0.2)
    assert config.effective_packets == 100
    assert config.effective_steps == 10_000
    with pytest.raises(ValueError):
        RunConfig(scale_packets=0.0)
    with pytest.raises(ValueError):
        RunConfig(scale_steps=-1.0)


def test_resolve_env():
    assert resolve_env("1.1").name == "1.1"
    assert resolve_env("gen:7").name == "gen-7"
    spec = designed_env("2.1")
    assert resolve_env(spec) is spec


def test_run_single_and_results_table():
    r = run_single(RunConfig(environment="1.1", controller="mb1",
                             packets=20, steps=2000))
    assert r.p_s == 20 and r.fitness > 0
    table = results_table([r])
    lines = table.strip().split("\n")
    assert lines[0] == "env,controller,seed,fitness,T_s,p_s"
    assert lines[1].startswith("1.1,mb1,0,")


def test_run_experiment_captures_cell_errors():
    configs = [
        RunConfig(environment="1.1", controller="mb1", packets=5, steps=500),
        RunConfig(environment="9.9", controller="mb1"),
    ]
    results = run_experiment(configs)
    assert results[0].error is None
    assert "UnknownId" in results[1].error
    assert "error" in results_table(results)


def test_suite_configs_cartesian():
    configs = suite_configs(("1.1", "2.1"), ("mb1", "mb2"), range(3))
    assert len(configs) == 12
    assert {c.environment for c in configs} == {"1.1", "2.1"}


def test_extract_corpus_balanced_cells():
    corpus = extract_corpus(steps=40, stride=10, env_ids=("1.1", "2.1"),
                            behaviours=("mb1",), switched=False)
    # 2 envs x 1 behaviour x 1 seed x 4 sampled steps x 8 agents
    assert len(corpus) == 2 * 4 * 8
    labels = {label for _obs, label in corpus}
    assert labels == {"1.1", "2.1"}
    assert all(len(obs) == 49 for obs, _ in corpus)


def test_extract_corpus_switched_runs_add_one_cell_per_env():
    base = extract_corpus(steps=30, stride=10, env_ids=("1.1",),
                          behaviours=("mb1",), switched=False)
    both = extract_corpus(steps=30, stride=10, env_ids=("1.1",),
                          behaviours=("mb1",), switched=True, switch_step=10)
    assert len(both) == 2 * len(base)


def test_train_bundle_from_tiny_corpus():
    corpus = extract_corpus(steps=30, stride=10, env_ids=("1.1", "1.2"),
                            behaviours=("mb1",), switched=False)
    bundle = train_bundle(corpus)
    assert bundle.trained
    tup = bundle.classify(corpus[0][0])
    assert sum(tup) == pytest.approx(1.0)


def _read_ppm(path):
    with open(path, "rb") as fh:
        assert fh.readline() == b"P6\n"
        w, h = (int(x) for x in fh.readline().split())
        assert fh.readline() == b"255\n"
        raw = fh.read()
    assert len(raw) == 3 * w * h
    return w, h, raw


def test_emit_behaviour_map(tmp_path):
    env = designed_env("1.1")
    trace = [
        ("select", 500, 0, 30.0, 50.0, "1.1", 1),
        ("select", 500, 1, 40.0, 50.0, "1.2", 2),
        ("select", 1000, 2, 50.0, 50.0, "2.3", 3),
        ("deliver", 600, 0, 0, 1),
    ]
    out = tmp_path / "map.ppm"
    emit_behaviour_map([trace], env, out)
    w, h, raw = _read_ppm(out)
    assert (w, h) == (401, 401)
    pixels = {tuple(raw[i: i + 3]) for i in range(0, len(raw), 3)}
    for colour in MAP_COLOURS.values():
        assert colour in pixels
    assert (255, 255, 255) in pixels  # walls and nodes


def test_emit_behaviour_map_empty_trace(tmp_path):
    out = tmp_path / "empty.ppm"
    emit_behaviour_map([[]], designed_env("2.3"), out)
    _w, _h, raw = _read_ppm(out)
    pixels = {tuple(raw[i: i + 3]) for i in range(0, len(raw), 3)}
    assert pixels <= {(0, 0, 0), (255, 255, 255)}


def test_emit_behaviour_map_io_failure(tmp_path):
    with pytest.raises(IoFailure):
        emit_behaviour_map([[]], designed_env("1.1"),
                           tmp_path / "missing" / "map.ppm")


# -- CLI -----------------------------------------------------------------


def test_cli_run(capsys):
    assert cli.main(["run", "--env", "1.1", "--controller", "mb1",
                     "--packets", "20", "--steps", "2000"]) == 0
    out = capsys.readouterr().out
    assert out.startswith("1.1,mb1,0,")


def test_cli_suite_and_report(tmp_path, capsys):
    csv = tmp_path / "suite.csv"
    code = cli.main([
        "suite", "--env", "1.1", "--controller", "mb1", "--seeds", "2",
        "--packets", "20", "--steps", "2000", "--out", str(csv),
    ])
    assert code == 0
    assert cli.main(["report", str(csv)]) == 0
    out = capsys.readouterr().out
    assert "env,controller,q1,median,q3,n" in out
    assert "1.1,mb1," in out


def test_cli_suite_nonzero_on_cell_error(tmp_path):
    csv = tmp_path / "bad.csv"
    code = cli.main([
        "suite", "--env", "gen:nope", "--controller", "mb1", "--seeds", "1",
        "--out", str(csv),
    ])
    assert code == 1


def test_cli_map(tmp_path, capsys):
    out = tmp_path / "m.ppm"
    assert cli.main([
        "map", "--env", "1.1", "--controller", "mb1",
        "--packets", "20", "--steps", "1000", "--out", str(out),
    ]) == 0
    assert out.exists()


def test_cli_train_tiny(tmp_path, capsys):
    out = tmp_path / "tiny.rhgn"
    assert cli.main([
        "train", "--out", str(out), "--steps", "30", "--stride", "10",
        "--seeds", "1", "--env", "1.1", "--env", "1.2",
    ]) == 0
    assert out.exists()
