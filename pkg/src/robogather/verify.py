"""Demon strategy generators and the property/fuzz harness.

Strategies produce k-fair action streams by construction (a deadline forces
any robot about to starve); the checker replays a finished trace and grades
every round against the protocol's invariants: the local/global round
equivalence, common destination of movers, unreachability of bivalent
configurations, strict measure decrease, phase-transition conformance and
gather persistence. Failures are report entries with a replayable seed,
never exceptions.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from . import frames, gather2d, geometry, model
from .gather2d import EXPECTED_ARCS, Phase
from .model import Configuration, DemonicAction, FrameParams, Robogram, Spectrum, Trace
from .scalars import FLOAT64, Backend, Point

STRATEGY_KINDS = ("round_robin", "all_active", "random_kfair", "single_mover", "adversarial")

# Deliberately unfair scripted strategy, kept for negative controls only.
UNFAIR_KINDS = ("unfair_skip0",)


def horizon_for(k: int, n_robots: int) -> int:
    """Round budget for a k-fair execution: at most 7·(nG+1) rounds can move
    a robot (the measure has 7 weight levels and the residual is at most nG),
    and a non-gathered configuration sees a mover within any k-window."""
    return k * 7 * (n_robots + 1)


@dataclass(frozen=True)
class FramePolicy:
    """How strategies sample frames: zoom range, rotation granularity and
    reflection probability. Rotations are rational unit pairs on the exact
    backend and angle-derived on the floating one."""

    zoom_lo: Fraction = Fraction(1, 10)
    zoom_hi: Fraction = Fraction(10)
    reflection_prob: float = 0.5
    rotation_steps: int = 6  # granularity of rational rotation sampling

    def sample(self, rng: random.Random, backend: Backend) -> FrameParams:
        if backend.is_exact:
            span = self.zoom_hi - self.zoom_lo
            den = 12
            zoom = self.zoom_lo + span * Fraction(rng.randint(0, den), den)
            if zoom <= 0:  # zoom_lo may be 0 through configuration; keep valid
                zoom = self.zoom_hi / den
            t = Fraction(rng.randint(-self.rotation_steps, self.rotation_steps), rng.randint(1, self.rotation_steps))
            c = (1 - t * t) / (1 + t * t)
            s = (2 * t) / (1 + t * t)
        else:
            zoom = math.exp(rng.uniform(math.log(float(self.zoom_lo)), math.log(float(self.zoom_hi))))
            theta = rng.uniform(0.0, 2.0 * math.pi)
            c, s = math.cos(theta), math.sin(theta)
        return FrameParams(zoom, c, s, rng.random() < self.reflection_prob)


DEFAULT_POLICY = FramePolicy()


class Strategy:
    """A seeded demon: callable (round index, configuration) -> DemonicAction,
    with a declared fairness bound ``k``."""

    kind: str = "abstract"

    def __init__(self, n_robots: int, backend: Backend, seed: int, k: int, policy: FramePolicy = DEFAULT_POLICY):
        self.n_robots = n_robots
        self.backend = backend
        self.rng = random.Random(seed)
        self.k = k
        self.policy = policy

    def active_set(self, index: int, conf: Configuration) -> set[int]:
        raise NotImplementedError

    def __call__(self, index: int, conf: Configuration) -> DemonicAction:
        active = self.active_set(index, conf)
        steps = tuple(
            self.policy.sample(self.rng, self.backend) if i in active else None
            for i in range(self.n_robots)
        )
        return DemonicAction(steps)


class RoundRobin(Strategy):
    kind = "round_robin"

    def __init__(self, n_robots, backend, seed, policy=DEFAULT_POLICY):
        super().__init__(n_robots, backend, seed, k=n_robots, policy=policy)

    def active_set(self, index, conf):
        return {index % self.n_robots}


class AllActive(Strategy):
    kind = "all_active"

    def __init__(self, n_robots, backend, seed, policy=DEFAULT_POLICY):
        super().__init__(n_robots, backend, seed, k=1, policy=policy)

    def active_set(self, index, conf):
        return set(range(self.n_robots))


class _DeadlineMixin:
    """Tracks rounds-since-activation; robots at age k-1 are due and must be
    activated now, which makes any schedule built on top k-fair."""

    def _init_ages(self):
        self._ages = [0] * self.n_robots

    def _due(self) -> set[int]:
        return {i for i, a in enumerate(self._ages) if a >= self.k - 1}

    def _tick(self, active: set[int]):
        for i in range(self.n_robots):
            self._ages[i] = 0 if i in active else self._ages[i] + 1


class RandomKFair(Strategy, _DeadlineMixin):
    kind = "random_kfair"

    def __init__(self, n_robots, backend, seed, k=None, policy=DEFAULT_POLICY):
        super().__init__(n_robots, backend, seed, k=k or 2 * n_robots, policy=policy)
        self._init_ages()

    def active_set(self, index, conf):
        active = {i for i in range(self.n_robots) if self.rng.random() < 0.5}
        active |= self._due()
        self._tick(active)
        return active


class SingleMover(Strategy, _DeadlineMixin):
    """Stall-maximizing adversary: activates robots that are already at their
    destination whenever it may, releasing a mover only when the fairness
    deadline forces its hand."""

    kind = "single_mover"

    def __init__(self, n_robots, backend, seed, k=None, policy=DEFAULT_POLICY):
        super().__init__(n_robots, backend, seed, k=k or 2 * n_robots, policy=policy)
        self._init_ages()

    def active_set(self, index, conf):
        due = self._due()
        if due:
            active = due
        else:
            dests = gather2d.round_global(range(self.n_robots), conf, self.backend)
            stayers = [
                i for i in range(self.n_robots) if self.backend.points_eq(conf[i], dests[i])
            ]
            pick = self.rng.choice(stayers) if stayers else self.rng.randrange(self.n_robots)
            active = {pick}
        self._tick(active)
        return active


class Scripted(Strategy):
    """Follows an explicit cyclic script of activation sets."""

    kind = "adversarial"

    def __init__(self, n_robots, backend, seed, script: Sequence[Iterable[int]], k: int, policy=DEFAULT_POLICY):
        super().__init__(n_robots, backend, seed, k=k, policy=policy)
        self.script = [set(ids) for ids in script]
        if not self.script:
            raise ValueError("empty adversarial script")

    def active_set(self, index, conf):
        return self.script[index % len(self.script)]


def make_strategy(
    kind: str,
    n_robots: int,
    backend: Backend,
    seed: int,
    k: int | None = None,
    policy: FramePolicy = DEFAULT_POLICY,
    script: Sequence[Iterable[int]] | None = None,
) -> Strategy:
    if kind == "round_robin":
        return RoundRobin(n_robots, backend, seed, policy)
    if kind == "all_active":
        return AllActive(n_robots, backend, seed, policy)
    if kind == "random_kfair":
        return RandomKFair(n_robots, backend, seed, k, policy)
    if kind == "single_mover":
        return SingleMover(n_robots, backend, seed, k, policy)
    if kind == "adversarial":
        if script is None:
            raise ValueError("adversarial strategy requires a script")
        return Scripted(n_robots, backend, seed, script, k or n_robots, policy)
    if kind == "unfair_skip0":
        # Never activates robot 0; claims round-robin fairness. Negative control.
        script = [[1 + (i % (n_robots - 1))] for i in range(n_robots - 1)]
        return Scripted(n_robots, backend, seed, script, n_robots, policy)
    raise ValueError(f"unknown strategy kind {kind!r}")


def _unit_circle_point(t: Fraction) -> tuple[Fraction, Fraction]:
    """Rational point on the unit circle from the half-angle parameter."""
    den = 1 + t * t
    return (1 - t * t) / den, (2 * t) / den


def _cocircular_pool(rng: random.Random, backend: Backend, bbox: int, size: int) -> list[Point]:
    """``size`` distinct points on one circle, plus possibly its center and an
    interior point; the only way random draws ever put four towers on a SEC."""
    half = bbox // 2 or 1
    if backend.is_exact:
        cx, cy = Fraction(rng.randint(-half, half)), Fraction(rng.randint(-half, half))
        radius = Fraction(rng.randint(1, half))
        params: set[Fraction] = set()
        while len(params) < size:
            params.add(Fraction(rng.randint(-8, 8), rng.randint(1, 4)))
        pool = []
        for t in sorted(params):
            ux, uy = _unit_circle_point(t)
            pool.append(Point(cx + radius * ux, cy + radius * uy))
    else:
        cx, cy = rng.uniform(-half, half), rng.uniform(-half, half)
        radius = rng.uniform(1.0, half)
        angles: list[float] = []
        while len(angles) < size:
            a = rng.uniform(0.0, 2.0 * math.pi)
            if all(abs(a - b) > 0.12 for b in angles):
                angles.append(a)
        pool = [Point(cx + radius * math.cos(a), cy + radius * math.sin(a)) for a in angles]
    if rng.random() < 0.5:
        pool.append(Point(cx, cy))  # the center itself
    if rng.random() < 0.5:
        # a strictly interior point off the center
        pool.append(Point(cx + radius / rng.randint(3, 6), cy))
    return pool


def _equilateral_pool(rng: random.Random, bbox: int) -> list[Point]:
    """Float-only: an equilateral triple (equal within tolerance), possibly
    with an interior point. No exact-rational equilateral triangle exists."""
    half = bbox // 2 or 1
    cx, cy = rng.uniform(-half, half), rng.uniform(-half, half)
    radius = rng.uniform(1.0, half)
    theta = rng.uniform(0.0, 2.0 * math.pi)
    pool = [
        Point(
            cx + radius * math.cos(theta + k * 2.0 * math.pi / 3.0),
            cy + radius * math.sin(theta + k * 2.0 * math.pi / 3.0),
        )
        for k in range(3)
    ]
    if rng.random() < 0.5:
        pool.append(Point(cx, cy))
    if rng.random() < 0.4:
        pool.append(Point(cx + radius / 3.0, cy))
    return pool


def gen_initial(
    n_robots: int,
    rng: random.Random,
    backend: Backend,
    bbox: int = 10,
    pool_size: int | None = None,
    min_sep_sq: float = 1e-2,
    structured_prob: float = 0.4,
) -> Configuration:
    """Random non-bivalent initial configuration inside [-bbox, bbox]².

    Locations are drawn from a small pool so multiplicity points occur with
    positive probability (a pool of one yields a gathered start, which is
    allowed). With probability ``structured_prob`` the pool is cocircular
    (or an equilateral triple on the floating backend) so the corpus also
    reaches the general and triangle phases. Bivalent draws are rejected
    and resampled. On the floating backend pool points keep a minimum
    separation to stay clear of the tolerance regime.
    """
    if n_robots < 3:
        raise ValueError("at least 3 robots are required")
    while True:
        pool: list[Point] = []
        if pool_size is None and rng.random() < structured_prob:
            if not backend.is_exact and rng.random() < 0.35:
                pool = _equilateral_pool(rng, bbox)
            else:
                pool = _cocircular_pool(rng, backend, bbox, rng.randint(4, 6))
        else:
            size = pool_size if pool_size is not None else rng.randint(1, min(n_robots, 5))
            guard = 0
            while len(pool) < size:
                guard += 1
                if guard > 1000:
                    raise RuntimeError("could not draw a separated location pool")
                if backend.is_exact:
                    p = backend.point(rng.randint(-bbox, bbox), rng.randint(-bbox, bbox))
                    ok = all(p != q for q in pool)
                else:
                    p = Point(rng.uniform(-bbox, bbox), rng.uniform(-bbox, bbox))
                    ok = all(
                        (p.x - q.x) ** 2 + (p.y - q.y) ** 2 > min_sep_sq for q in pool
                    )
                if ok:
                    pool.append(p)
        conf = tuple(rng.choice(pool) for _ in range(n_robots))
        if not gather2d.forbidden(conf, backend):
            return conf


# ---------------------------------------------------------------------------
# Reports


@dataclass
class PropertyStats:
    checks: int = 0
    violations: int = 0


@dataclass(frozen=True)
class Failure:
    prop: str
    run_seed: Optional[int]
    round_index: Optional[int]
    detail: str
    before: Optional[Configuration] = None
    after: Optional[Configuration] = None


PROPERTIES = (
    "chaining",
    "round_simplify",
    "same_destination",
    "never_forbidden",
    "measure_decrease",
    "phase_transition",
    "gather_persistence",
    "k_fairness",
    "gathering",
)

_MAX_FAILURES_KEPT = 25


@dataclass
class CheckReport:
    """Aggregated per-property pass/fail counters plus enough context to
    replay the first counterexamples."""

    properties: dict[str, PropertyStats] = field(default_factory=dict)
    failures: list[Failure] = field(default_factory=list)
    runs: int = 0
    gathered_runs: int = 0
    timeouts: int = 0
    rounds_to_gather: list[int] = field(default_factory=list)
    observed_arcs: set[tuple[Phase, Phase]] = field(default_factory=set)

    def record(
        self,
        prop: str,
        ok: bool,
        run_seed: int | None = None,
        round_index: int | None = None,
        detail: str = "",
        before: Configuration | None = None,
        after: Configuration | None = None,
    ) -> None:
        stats = self.properties.setdefault(prop, PropertyStats())
        stats.checks += 1
        if not ok:
            stats.violations += 1
            if len(self.failures) < _MAX_FAILURES_KEPT:
                self.failures.append(
                    Failure(prop, run_seed, round_index, detail, before, after)
                )

    def merge(self, other: "CheckReport") -> None:
        for prop, stats in other.properties.items():
            mine = self.properties.setdefault(prop, PropertyStats())
            mine.checks += stats.checks
            mine.violations += stats.violations
        self.failures.extend(other.failures[: _MAX_FAILURES_KEPT - len(self.failures)])
        self.runs += other.runs
        self.gathered_runs += other.gathered_runs
        self.timeouts += other.timeouts
        self.rounds_to_gather.extend(other.rounds_to_gather)
        self.observed_arcs |= other.observed_arcs

    @property
    def ok(self) -> bool:
        return all(s.violations == 0 for s in self.properties.values())

    def violations_of(self, prop: str) -> int:
        return self.properties.get(prop, PropertyStats()).violations

    def unobserved_arcs(self) -> set[tuple[Phase, Phase]]:
        """Reachability arcs never exercised by the corpus, reported for audit."""
        return set(EXPECTED_ARCS) - self.observed_arcs

    def outside_expected_arcs(self) -> set[tuple[Phase, Phase]]:
        """Observed arcs missing from the expected arc set (the audit trail);
        the checker only tolerates the ones in gather2d.AUDITED_ARCS."""
        return self.observed_arcs - set(EXPECTED_ARCS)

    def summary(self) -> str:
        lines = []
        for prop in PROPERTIES:
            if prop not in self.properties:
                continue
            s = self.properties[prop]
            verdict = "ok" if s.violations == 0 else "FAIL"
            lines.append(f"{prop:s}: {s.checks - s.violations}/{s.checks} {verdict}")
        if self.runs:
            lines.append(
                f"runs: {self.runs}, gathered: {self.gathered_runs}, timeouts: {self.timeouts}"
            )
            if self.rounds_to_gather:
                rtg = self.rounds_to_gather
                lines.append(
                    f"rounds to gather: min {min(rtg)}, max {max(rtg)}, "
                    f"mean {sum(rtg) / len(rtg):.1f}"
                )
        for a, b in sorted((x.value, y.value) for x, y in self.outside_expected_arcs()):
            lines.append(f"audit: observed arc outside the expected reachability graph: {a} -> {b}")
        for f in self.failures[:5]:
            where = f"round {f.round_index}" if f.round_index is not None else "-"
            seed = f"seed {f.run_seed}" if f.run_seed is not None else "unseeded"
            lines.append(f"counterexample [{f.prop}] {seed} {where}: {f.detail}")
        return "\n".join(lines)


def _configs_eq(a: Configuration, b: Configuration, backend: Backend) -> bool:
    return len(a) == len(b) and all(backend.points_eq(p, q) for p, q in zip(a, b))


def first_gathered_round(trace: Trace, backend: Backend) -> Optional[int]:
    """Index of the first gathered configuration (0 = initial), or None."""
    for i, conf in enumerate(trace.configs()):
        if gather2d.gathering_point(conf, backend) is not None:
            return i
    return None


def check_trace(
    trace: Trace,
    backend: Backend,
    robogram: Robogram | None = None,
    declared_k: int | None = None,
    run_seed: int | None = None,
    report: CheckReport | None = None,
) -> CheckReport:
    """Replay a trace and grade every round against the protocol invariants.

    All verdicts are recomputed from scratch (including the local-frame round
    for the chaining check), so a corrupted trace cannot pass.
    """
    rep = report if report is not None else CheckReport()
    r = robogram if robogram is not None else gather2d.robogram(backend)
    prev = trace.initial
    prev_sum = gather2d.summarize(prev, backend)
    gathered_pt = prev_sum.gathered_pt

    for step in trace.steps:
        cur = step.config
        cur_sum = gather2d.summarize(cur, backend)
        idx = step.index

        def rec(prop: str, ok: bool, detail: str, _prev=prev, _cur=cur, _idx=idx):
            rep.record(prop, ok, run_seed, _idx, detail, before=_prev, after=_cur)

        expected = model.round(r, step.action, prev, backend)
        rec(
            "chaining",
            _configs_eq(expected, cur, backend),
            "recorded configuration does not match a recomputed round",
        )

        glob = gather2d.round_global(step.action.activated(), prev, backend)
        rec(
            "round_simplify",
            _configs_eq(glob, cur, backend),
            "local-frame round differs from the global-view round",
        )

        movers = [i for i in range(len(prev)) if not backend.points_eq(prev[i], cur[i])]
        if movers:
            dest = cur[movers[0]]
            rec(
                "same_destination",
                all(backend.points_eq(cur[i], dest) for i in movers[1:]),
                f"moving robots {movers} do not share one destination",
            )

        if not prev_sum.forbidden:
            rec(
                "never_forbidden",
                not cur_sum.forbidden,
                "a bivalent configuration was reached from a non-bivalent one",
            )
            if movers:
                rec(
                    "measure_decrease",
                    gather2d.lt_measure(cur_sum.measure, prev_sum.measure),
                    f"measure {tuple(cur_sum.measure)} not below {tuple(prev_sum.measure)}",
                )

        arc = (prev_sum.phase, cur_sum.phase)
        if arc[0] is not arc[1]:
            rep.observed_arcs.add(arc)
        rec(
            "phase_transition",
            gather2d.allowed_transition(*arc),
            f"transition {arc[0].value} -> {arc[1].value} is outside the reachability graph",
        )

        if gathered_pt is not None:
            rec(
                "gather_persistence",
                gather2d.gathered_at(gathered_pt, cur, backend),
                "a gathered execution left its gathering point",
            )
        elif cur_sum.gathered_pt is not None:
            gathered_pt = cur_sum.gathered_pt

        prev, prev_sum = cur, cur_sum

    if declared_k is not None:
        rep.record(
            "k_fairness",
            model.check_k_fair(trace.actions(), declared_k),
            run_seed,
            None,
            f"action stream violates {declared_k}-bounded fairness",
        )
    return rep


def check_equivalence(conf: Configuration, da: DemonicAction, backend: Backend) -> bool:
    """Does one local-frame round equal the global-view round?"""
    r = gather2d.robogram(backend)
    return _configs_eq(
        model.round(r, da, conf, backend),
        gather2d.round_global(da.activated(), conf, backend),
        backend,
    )


def check_target_morph(s: Spectrum, f, backend: Backend) -> bool:
    """Does the target commute with a similarity applied to the spectrum?"""
    lhs = gather2d.target(frames.map_multiset(f, s), backend)
    rhs = frames.apply(f, gather2d.target(s, backend))
    return backend.points_eq(lhs, rhs)


def stress_degenerate_triangles(
    n_samples: int,
    seed: int = 0,
    eps_exponents: Sequence[int] = (-6, -8, -9, -10, -12, -14),
) -> dict[int, dict[str, int]]:
    """Characterize (never assert) float classification near the tolerance.

    For each perturbation size 10^e, nudges one vertex of an exactly
    isosceles triangle and of a float equilateral triangle, and tallies how
    the classifier reads the result. Regular fuzzing stays clear of this
    regime by a separation margin; this map documents what happens inside it.
    """
    rng = random.Random(seed)
    out: dict[int, dict[str, int]] = {}
    for e in eps_exponents:
        eps = 10.0**e
        tally: dict[str, int] = {}
        for _ in range(n_samples):
            base = rng.uniform(1.0, 4.0)
            apex_y = rng.uniform(1.0, 4.0)
            if rng.random() < 0.5:
                tri = [
                    Point(0.0, 0.0),
                    Point(base, 0.0),
                    Point(base / 2 + rng.uniform(-eps, eps), apex_y),
                ]
            else:
                theta = rng.uniform(0.0, 2 * math.pi)
                tri = [
                    Point(
                        math.cos(theta + k * 2 * math.pi / 3) + (rng.uniform(-eps, eps) if k == 0 else 0.0),
                        math.sin(theta + k * 2 * math.pi / 3),
                    )
                    for k in range(3)
                ]
            kind = geometry.classify_triangle(*tri, FLOAT64).kind.value
            tally[kind] = tally.get(kind, 0) + 1
        out[e] = tally
    return out


@dataclass(frozen=True)
class RunSpec:
    """Everything needed to replay one fuzz run."""

    run_seed: int
    strategy_seed: int
    n_robots: int
    strategy_kind: str
    k: int
    backend_name: str
    initial: Configuration
    horizon: int


@dataclass
class Counterexample:
    spec: RunSpec
    trace: Trace


def _gathered_stable_stop(backend: Backend, extra: int):
    """Stop predicate: gathered and stayed gathered for ``extra`` more rounds."""
    streak = 0

    def stop(conf: Configuration) -> bool:
        nonlocal streak
        if gather2d.gathering_point(conf, backend) is not None:
            streak += 1
        else:
            streak = 0
        return streak > extra

    return stop


def run_one(
    run_seed: int,
    backend: Backend,
    ng_range: tuple[int, int] = (3, 8),
    strategy_kinds: Sequence[str] = ("round_robin", "all_active", "random_kfair", "single_mover"),
    horizon: int | None = None,
    policy: FramePolicy = DEFAULT_POLICY,
    bbox: int = 10,
) -> tuple[RunSpec, Trace, CheckReport]:
    """One seeded fuzz run: generate, execute, check. Deterministic in the seed."""
    rng = random.Random(run_seed)
    n_robots = rng.randint(*ng_range)
    kind = rng.choice(list(strategy_kinds))
    strategy_seed = rng.randrange(2**62)
    strat = make_strategy(kind, n_robots, backend, seed=strategy_seed, policy=policy)
    conf = gen_initial(n_robots, rng, backend, bbox=bbox)
    h = horizon if horizon is not None else horizon_for(strat.k, n_robots)
    extra = strat.k  # keep checking persistence after gathering
    r = gather2d.robogram(backend)
    trace = model.execute(r, strat, conf, h + extra, backend, stop=_gathered_stable_stop(backend, extra))
    rep = check_trace(trace, backend, r, declared_k=strat.k, run_seed=run_seed)

    gathered_round = first_gathered_round(trace, backend)
    gathered_in_time = gathered_round is not None and gathered_round <= h
    rep.record(
        "gathering",
        gathered_in_time,
        run_seed,
        None,
        f"not gathered within horizon {h}",
    )
    rep.runs = 1
    if gathered_in_time:
        rep.gathered_runs = 1
        rep.rounds_to_gather.append(gathered_round)
    else:
        rep.timeouts = 1
    spec = RunSpec(run_seed, strategy_seed, n_robots, kind, strat.k, backend.name, conf, h)
    return spec, trace, rep


def fuzz(
    n_runs: int,
    backend: Backend,
    ng_range: tuple[int, int] = (3, 8),
    strategy_kinds: Sequence[str] = ("round_robin", "all_active", "random_kfair", "single_mover"),
    seed: int = 0,
    horizon: int | None = None,
    policy: FramePolicy = DEFAULT_POLICY,
    bbox: int = 10,
    keep_counterexamples: int = 3,
) -> tuple[CheckReport, list[Counterexample]]:
    """Run ``n_runs`` independent seeded simulations and grade them all.

    Returns the aggregate report and the first few failing runs (if any)
    with everything needed to replay them.
    """
    master = random.Random(seed)
    report = CheckReport()
    counterexamples: list[Counterexample] = []
    for _ in range(n_runs):
        run_seed = master.randrange(2**62)
        spec, trace, rep = run_one(
            run_seed, backend, ng_range, strategy_kinds, horizon, policy, bbox
        )
        if (not rep.ok) and len(counterexamples) < keep_counterexamples:
            counterexamples.append(Counterexample(spec, trace))
        report.merge(rep)
    return report, counterexamples
