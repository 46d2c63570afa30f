import json
import random
from fractions import Fraction as F

import pytest

from robogather import gather2d, model, traceio, verify
from robogather.scalars import EXACT, FLOAT64, Point

P = EXACT.point


def _scenario_dict(**overrides):
    data = {
        "nG": 3,
        "backend": "exact",
        "initial": {"points": [["0", "0"], ["0", "0"], ["5", "5"]]},
        "demon": {"kind": "all_active", "seed": 1},
        "horizon": 20,
    }
    data.update(overrides)
    return data


def test_scenario_roundtrip(tmp_path):
    sc = traceio.Scenario.from_dict(_scenario_dict())
    path = tmp_path / "s.json"
    sc.save(str(path))
    again = traceio.Scenario.load(str(path))
    assert again.to_dict() == sc.to_dict()


def test_scenario_build_explicit_exact():
    sc = traceio.Scenario.from_dict(_scenario_dict())
    backend, conf, strategy, horizon = sc.build()
    assert backend is EXACT
    assert conf == (P(0, 0), P(0, 0), P(5, 5))
    assert strategy.kind == "all_active"
    assert horizon == 20


def test_scenario_build_generator():
    sc = traceio.Scenario.from_dict(
        {
            "nG": 5,
            "backend": "floating",
            "initial": {"generator": {"bbox": 4, "seed": 11}},
            "demon": {"kind": "random_kfair", "seed": 2, "k": 6},
        }
    )
    backend, conf, strategy, horizon = sc.build()
    assert backend.name == "floating"
    assert len(conf) == 5
    assert strategy.k == 6
    assert horizon == verify.horizon_for(6, 5)


def test_scenario_validation_errors():
    with pytest.raises(traceio.ScenarioError):
        traceio.Scenario.from_dict(_scenario_dict(nG=2)).build()
    with pytest.raises(traceio.ScenarioError):
        traceio.Scenario.from_dict({"backend": "exact"})
    with pytest.raises(traceio.ScenarioError):
        traceio.Scenario.from_dict(_scenario_dict(backend="weird")).build()
    bad_points = _scenario_dict(initial={"points": [["0", "0"], ["1", "1"]]})
    with pytest.raises(traceio.ScenarioError):
        traceio.Scenario.from_dict(bad_points).build()
    bad_demon = _scenario_dict(demon={"kind": "nope"})
    with pytest.raises(traceio.ScenarioError):
        traceio.Scenario.from_dict(bad_demon).build()


def test_scenario_forbidden_needs_flag():
    data = _scenario_dict(
        nG=4,
        initial={"points": [["0", "0"], ["0", "0"], ["1", "1"], ["1", "1"]]},
    )
    with pytest.raises(traceio.ScenarioError):
        traceio.Scenario.from_dict(data).build()
    data["allow_forbidden"] = True
    backend, conf, _, _ = traceio.Scenario.from_dict(data).build()
    assert gather2d.forbidden(conf, backend)


def _make_trace(backend, seed=4, n=4, rounds=8, kind="random_kfair"):
    rng = random.Random(seed)
    conf = verify.gen_initial(n, rng, backend)
    strat = verify.make_strategy(kind, n, backend, seed=seed)
    r = gather2d.robogram(backend)
    trace = model.execute(r, strat, conf, rounds, backend)
    return trace, strat


@pytest.mark.parametrize("backend", [EXACT, FLOAT64], ids=["exact", "float"])
def test_trace_roundtrip_bit_exact(tmp_path, backend):
    trace, strat = _make_trace(backend)
    path = str(tmp_path / "t.jsonl")
    traceio.write_trace(path, trace, backend, k=strat.k, strategy_kind=strat.kind, seed=4)
    loaded = traceio.read_trace(path)
    assert loaded.backend.name == backend.name
    assert loaded.k == strat.k
    assert loaded.trace.initial == trace.initial
    assert len(loaded.trace.steps) == len(trace.steps)
    for a, b in zip(loaded.trace.steps, trace.steps):
        assert a.index == b.index
        assert a.config == b.config  # bit-exact on both backends
        assert a.action == b.action


@pytest.mark.parametrize("backend", [EXACT, FLOAT64], ids=["exact", "float"])
def test_reloaded_trace_reproduces_report(tmp_path, backend):
    trace, strat = _make_trace(backend, seed=9)
    rep_orig = verify.check_trace(trace, backend, declared_k=strat.k)
    path = str(tmp_path / "t.jsonl")
    traceio.write_trace(path, trace, backend, k=strat.k, strategy_kind=strat.kind)
    loaded = traceio.read_trace(path)
    rep_again = verify.check_trace(loaded.trace, loaded.backend, declared_k=loaded.k)
    assert rep_again.summary() == rep_orig.summary()
    assert rep_again.ok == rep_orig.ok


def test_trace_annotations_match_recomputation(tmp_path):
    trace, strat = _make_trace(EXACT, seed=21)
    path = str(tmp_path / "t.jsonl")
    traceio.write_trace(path, trace, EXACT, k=strat.k)
    with open(path) as fh:
        records = [json.loads(line) for line in fh if line.strip()]
    rounds = [r for r in records if r["type"] == "round"]
    assert len(rounds) == len(trace.steps)
    for rec, step in zip(rounds, trace.steps):
        summary = gather2d.summarize(step.config, EXACT)
        assert rec["phase"] == summary.phase.value
        assert tuple(rec["measure"]) == tuple(summary.measure)
        assert rec["forbidden"] == summary.forbidden
        assert rec["gathered"] == (summary.gathered_pt is not None)


def test_read_trace_errors(tmp_path):
    empty = tmp_path / "empty.jsonl"
    empty.write_text("")
    with pytest.raises(traceio.TraceFormatError):
        traceio.read_trace(str(empty))

    garbled = tmp_path / "garbled.jsonl"
    garbled.write_text("not json\n")
    with pytest.raises(traceio.TraceFormatError):
        traceio.read_trace(str(garbled))

    no_header = tmp_path / "nohdr.jsonl"
    no_header.write_text(json.dumps({"type": "round"}) + "\n")
    with pytest.raises(traceio.TraceFormatError):
        traceio.read_trace(str(no_header))

    missing = tmp_path / "missing.jsonl"
    with pytest.raises(traceio.TraceFormatError):
        traceio.read_trace(str(missing))


def test_scenario_for_run_replays_identically(tmp_path):
    spec, trace, rep = verify.run_one(31337, EXACT)
    scenario = traceio.scenario_for_run(spec, EXACT)
    backend, conf, strategy, horizon = scenario.build()
    assert conf == spec.initial
    assert strategy.k == spec.k
    r = gather2d.robogram(backend)
    replay = model.execute(
        r,
        strategy,
        conf,
        len(trace.steps),
        backend,
    )
    for a, b in zip(replay.steps, trace.steps):
        assert a.action == b.action
        assert a.config == b.config
