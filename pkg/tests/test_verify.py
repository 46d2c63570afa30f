import random
from collections import Counter
from fractions import Fraction as F

import pytest

from robogather import frames, gather2d, model, verify
from robogather.gather2d import Phase
from robogather.model import DemonicAction, FrameParams, Trace, TraceStep
from robogather.scalars import EXACT, FLOAT64, Point

P = EXACT.point

IDENT = FrameParams(F(1), F(1), F(0), False)


def all_active(n):
    return DemonicAction(tuple(IDENT for _ in range(n)))


# --- strategies -----------------------------------------------------------------


@pytest.mark.parametrize("kind", verify.STRATEGY_KINDS[:4])
@pytest.mark.parametrize("backend", [EXACT, FLOAT64], ids=["exact", "float"])
def test_strategies_are_k_fair_by_construction(kind, backend):
    n = 5
    strat = verify.make_strategy(kind, n, backend, seed=3)
    conf = verify.gen_initial(n, random.Random(0), backend)
    actions = []
    cur = conf
    r = gather2d.robogram(backend)
    for i in range(4 * strat.k + 5):
        da = strat(i, cur)
        actions.append(da)
        cur = model.round(r, da, cur, backend)
    assert model.check_k_fair(actions, strat.k)


def test_strategy_frames_are_valid():
    strat = verify.make_strategy("all_active", 4, EXACT, seed=9)
    conf = (P(0, 0), P(1, 1), P(2, 2), P(3, 3))
    da = strat(0, conf)
    for fp in da.steps:
        assert fp is not None
        assert fp.zoom > 0
        assert fp.c * fp.c + fp.s * fp.s == 1
        assert F(1, 10) <= fp.zoom <= F(10)


def test_unfair_strategy_never_activates_zero():
    strat = verify.make_strategy("unfair_skip0", 4, EXACT, seed=1)
    conf = (P(0, 0), P(1, 1), P(2, 2), P(3, 3))
    actions = [strat(i, conf) for i in range(12)]
    assert all(0 not in a.activated() for a in actions)
    assert not model.check_k_fair(actions, strat.k)


def test_adversarial_requires_script():
    with pytest.raises(ValueError):
        verify.make_strategy("adversarial", 3, EXACT, seed=0)


def test_unknown_strategy_rejected():
    with pytest.raises(ValueError):
        verify.make_strategy("nope", 3, EXACT, seed=0)


# --- gen_initial ----------------------------------------------------------------


@pytest.mark.parametrize("backend", [EXACT, FLOAT64], ids=["exact", "float"])
def test_gen_initial_never_forbidden(backend):
    rng = random.Random(5)
    for _ in range(200):
        n = rng.randint(3, 8)
        conf = verify.gen_initial(n, rng, backend)
        assert len(conf) == n
        assert not gather2d.forbidden(conf, backend)
        for p in conf:
            assert abs(float(p.x)) <= 10 and abs(float(p.y)) <= 10


def test_gen_initial_pool_one_gives_gathered():
    conf = verify.gen_initial(4, random.Random(0), EXACT, pool_size=1)
    assert gather2d.gathering_point(conf, EXACT) is not None


def test_gen_initial_even_split_resampled():
    rng = random.Random(1)
    for _ in range(50):
        conf = verify.gen_initial(4, rng, EXACT, pool_size=2)
        s = model.spectrum_of(conf, EXACT)
        assert sorted(s.values()) != [2, 2]


def test_gen_initial_produces_multiplicity_points():
    rng = random.Random(2)
    hits = 0
    for _ in range(50):
        conf = verify.gen_initial(6, rng, EXACT)
        s = model.spectrum_of(conf, EXACT)
        if any(m > 1 for m in s.values()):
            hits += 1
    assert hits > 10


def test_gen_initial_rejects_small_n():
    with pytest.raises(ValueError):
        verify.gen_initial(2, random.Random(0), EXACT)


# --- check_trace -----------------------------------------------------------------


def _run_trace(conf, n_rounds=6, seed=0, backend=EXACT, kind="round_robin"):
    strat = verify.make_strategy(kind, len(conf), backend, seed=seed)
    r = gather2d.robogram(backend)
    trace = model.execute(r, strat, conf, n_rounds, backend)
    return trace, strat


def test_check_trace_gathered_start_all_pass():
    conf = (P(1, 1),) * 3
    trace, strat = _run_trace(conf)
    rep = verify.check_trace(trace, EXACT, declared_k=strat.k)
    assert rep.ok
    assert rep.violations_of("gather_persistence") == 0
    assert all(s.checks > 0 for s in rep.properties.values())


def test_check_trace_majority_hand_simulation():
    conf = (P(0, 0), P(0, 0), P(7, 1))
    strat = verify.make_strategy("all_active", 3, EXACT, seed=0)
    r = gather2d.robogram(EXACT)
    trace = model.execute(r, strat, conf, 3, EXACT)
    rep = verify.check_trace(trace, EXACT, declared_k=strat.k)
    assert rep.ok
    assert verify.first_gathered_round(trace, EXACT) == 1


def test_check_trace_detects_teleport():
    conf = (P(0, 0), P(0, 0), P(7, 1))
    trace, strat = _run_trace(conf, n_rounds=4)
    # corrupt: teleport robot 1 in the second recorded round
    step = trace.steps[1]
    bad_config = tuple(
        P(50, 50) if i == 1 else p for i, p in enumerate(step.config)
    )
    trace.steps[1] = TraceStep(step.index, step.action, bad_config)
    rep = verify.check_trace(trace, EXACT, declared_k=strat.k)
    assert not rep.ok
    assert rep.violations_of("chaining") > 0


def test_check_trace_flags_forbidden_round():
    # hand-built fake round that splits 4 robots 2/2: never_forbidden must fire
    conf = (P(0, 0), P(0, 0), P(0, 0), P(4, 4))
    bad = (P(0, 0), P(0, 0), P(4, 4), P(4, 4))
    trace = Trace(conf, [TraceStep(0, all_active(4), bad)])
    rep = verify.check_trace(trace, EXACT)
    assert rep.violations_of("never_forbidden") > 0
    assert rep.violations_of("chaining") > 0  # it is also not a real round


def test_check_trace_measure_violation_detected():
    # fake round: a robot moves away from the majority tower
    conf = (P(0, 0), P(0, 0), P(7, 1))
    bad = (P(0, 0), P(9, 9), P(7, 1))
    trace = Trace(conf, [TraceStep(0, all_active(3), bad)])
    rep = verify.check_trace(trace, EXACT)
    assert rep.violations_of("measure_decrease") > 0


def test_check_trace_same_destination_violation():
    conf = (P(0, 0), P(0, 0), P(7, 1), P(5, 5))
    bad = (P(0, 0), P(0, 0), P(1, 1), P(2, 2))
    trace = Trace(conf, [TraceStep(0, all_active(4), bad)])
    rep = verify.check_trace(trace, EXACT)
    assert rep.violations_of("same_destination") > 0


def test_check_trace_phase_transition_violation():
    # fake: gathered spectrum scattering back apart (GATHERED -> MAJORITY)
    conf = (P(0, 0), P(0, 0), P(0, 0))
    bad = (P(0, 0), P(0, 0), P(5, 5))
    trace = Trace(conf, [TraceStep(0, all_active(3), bad)])
    rep = verify.check_trace(trace, EXACT)
    assert rep.violations_of("phase_transition") > 0
    assert rep.violations_of("gather_persistence") > 0


def test_failures_carry_before_and_after_configurations():
    conf = (P(0, 0), P(0, 0), P(7, 1))
    bad = (P(0, 0), P(9, 9), P(7, 1))
    trace = Trace(conf, [TraceStep(0, all_active(3), bad)])
    rep = verify.check_trace(trace, EXACT, run_seed=42)
    failure = next(f for f in rep.failures if f.prop == "measure_decrease")
    assert failure.run_seed == 42
    assert failure.round_index == 0
    assert failure.before == conf
    assert failure.after == bad


def test_stress_mode_characterizes_degenerate_regime():
    profile = verify.stress_degenerate_triangles(60, seed=3)
    # structural checks only: the regime map is a report, not an assertion
    assert set(profile) == {-6, -8, -9, -10, -12, -14}
    for tally in profile.values():
        assert sum(tally.values()) == 60
    # far below tolerance the nudge is invisible; far above it, it is not
    assert profile[-14].get("scalene", 0) == 0
    assert profile[-6].get("equilateral", 0) == 0


def test_check_report_merge_and_summary():
    a = verify.CheckReport()
    a.record("chaining", True)
    b = verify.CheckReport()
    b.record("chaining", False, run_seed=7, round_index=3, detail="boom")
    b.observed_arcs.add((Phase.GENERAL_CLEAN, Phase.GATHERED))
    a.merge(b)
    assert a.properties["chaining"].checks == 2
    assert a.properties["chaining"].violations == 1
    assert not a.ok
    text = a.summary()
    assert "chaining" in text and "boom" in text
    assert "outside the expected reachability graph" in text


# --- equivalence / morphism helpers ---------------------------------------------


def test_check_equivalence_inactive():
    conf = (P(0, 0), P(1, 1), P(2, 2))
    da = DemonicAction((None, None, None))
    assert verify.check_equivalence(conf, da, EXACT)


def test_check_equivalence_random_frames():
    rng = random.Random(3)
    strat = verify.make_strategy("random_kfair", 5, EXACT, seed=4)
    conf = verify.gen_initial(5, rng, EXACT)
    for i in range(10):
        da = strat(i, conf)
        assert verify.check_equivalence(conf, da, EXACT)


def test_check_target_morph():
    s = Counter({P(0, 0): 1, P(2, 0): 2})
    shift = frames.Similarity(F(1), F(1), F(0), False, F(3), F(-1))
    assert verify.check_target_morph(s, shift, EXACT)
    rot = frames.Similarity(F(2), F(3, 5), F(4, 5), True, F(1), F(2))
    assert verify.check_target_morph(s, rot, EXACT)


# --- fuzz ---------------------------------------------------------------------------


def test_fuzz_reproducible():
    rep1, _ = verify.fuzz(10, EXACT, seed=99)
    rep2, _ = verify.fuzz(10, EXACT, seed=99)
    assert rep1.summary() == rep2.summary()
    assert rep1.rounds_to_gather == rep2.rounds_to_gather


def test_fuzz_different_seeds_differ():
    rep1, _ = verify.fuzz(10, EXACT, seed=1)
    rep2, _ = verify.fuzz(10, EXACT, seed=2)
    assert rep1.rounds_to_gather != rep2.rounds_to_gather


def test_fuzz_gathered_start():
    # pool of one: gathered at round 0
    spec, trace, rep = verify.run_one(12345, EXACT)
    assert rep.ok or rep.failures  # structural: report always well-formed
    rep, cex = verify.fuzz(5, EXACT, seed=0)
    assert rep.runs == 5
    assert rep.ok
    assert cex == []


def test_fuzz_unfair_demon_flagged():
    # start where only robot 0 is off the majority tower: without robot 0
    # the execution can never gather
    conf = (P(5, 5), P(0, 0), P(0, 0), P(0, 0))
    strat = verify.make_strategy("unfair_skip0", 4, EXACT, seed=0)
    r = gather2d.robogram(EXACT)
    horizon = verify.horizon_for(strat.k, 4)
    trace = model.execute(r, strat, conf, horizon, EXACT)
    rep = verify.check_trace(trace, EXACT, declared_k=strat.k)
    assert rep.violations_of("k_fairness") > 0
    assert verify.first_gathered_round(trace, EXACT) is None
    assert gather2d.gathering_point(trace.final(), EXACT) is None


# --- horizon bound -------------------------------------------------------------------


@pytest.mark.parametrize("backend", [EXACT, FLOAT64], ids=["exact", "float"])
def test_horizon_bound_holds_empirically(backend):
    # run with triple the budget and confirm gathering happens within the
    # derived bound k*7*(nG+1) regardless
    master = random.Random(777)
    for _ in range(40):
        run_seed = master.randrange(2**62)
        rng = random.Random(run_seed)
        n = rng.randint(3, 7)
        kind = rng.choice(["round_robin", "random_kfair", "single_mover"])
        strat = verify.make_strategy(kind, n, backend, seed=rng.randrange(2**62))
        conf = verify.gen_initial(n, rng, backend)
        bound = verify.horizon_for(strat.k, n)
        r = gather2d.robogram(backend)
        trace = model.execute(
            r,
            strat,
            conf,
            3 * bound,
            backend,
            stop=lambda c: gather2d.gathering_point(c, backend) is not None,
        )
        gathered_round = verify.first_gathered_round(trace, backend)
        assert gathered_round is not None, f"seed {run_seed} never gathered"
        assert gathered_round <= bound, f"seed {run_seed}: {gathered_round} > {bound}"
