"""Scenario and trace persistence.

A scenario is one human-editable JSON document (key/value tree). A trace is
a line-delimited UTF-8 file: one self-contained JSON record per line — a
header, one record per round, and an end marker. Exact-backend coordinates
serialize as "numerator/denominator" strings so replay is bit-exact;
floating coordinates serialize as JSON numbers (repr round-trips exactly).
"""
from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Optional

from . import gather2d, model, verify
from .model import Configuration, DemonicAction, FrameParams, Trace
from .scalars import Backend, Point, get_backend


class ScenarioError(Exception):
    """Malformed or invalid scenario input."""


class TraceFormatError(Exception):
    """Malformed trace file."""


def _coord_out(value, backend: Backend):
    return backend.format(value) if backend.is_exact else float(value)


def _point_out(p: Point, backend: Backend) -> list:
    return [_coord_out(p.x, backend), _coord_out(p.y, backend)]


def _point_in(pair, backend: Backend) -> Point:
    if not isinstance(pair, (list, tuple)) or len(pair) != 2:
        raise TraceFormatError(f"expected an [x, y] pair, got {pair!r}")
    return Point(backend.parse(pair[0]), backend.parse(pair[1]))


def _frame_out(fp: Optional[FrameParams], backend: Backend):
    if fp is None:
        return None
    return {
        "zoom": _coord_out(fp.zoom, backend),
        "c": _coord_out(fp.c, backend),
        "s": _coord_out(fp.s, backend),
        "reflect": fp.reflect,
    }


def _frame_in(obj, backend: Backend) -> Optional[FrameParams]:
    if obj is None:
        return None
    return FrameParams(
        zoom=backend.parse(obj["zoom"]),
        c=backend.parse(obj["c"]),
        s=backend.parse(obj["s"]),
        reflect=bool(obj["reflect"]),
    )


@dataclass
class Scenario:
    """A runnable experiment: robot count, backend, initial configuration
    (explicit or generated), demon strategy and round budget."""

    n_robots: int
    backend_name: str = "exact"
    eps_abs: Optional[float] = None
    eps_rel: Optional[float] = None
    initial: Optional[list[list]] = None  # explicit coordinates
    generator: Optional[dict] = None  # {"bbox": int, "pool": int|None, "seed": int}
    demon: dict = field(default_factory=lambda: {"kind": "round_robin", "seed": 0})
    horizon: Optional[int] = None
    allow_forbidden: bool = False

    @classmethod
    def from_dict(cls, data: dict) -> "Scenario":
        if not isinstance(data, dict):
            raise ScenarioError("scenario must be a JSON object")
        try:
            n_robots = int(data["nG"])
        except KeyError:
            raise ScenarioError("scenario is missing 'nG'")
        eps = data.get("eps") or {}
        return cls(
            n_robots=n_robots,
            backend_name=data.get("backend", "exact"),
            eps_abs=eps.get("abs"),
            eps_rel=eps.get("rel"),
            initial=(data.get("initial") or {}).get("points"),
            generator=(data.get("initial") or {}).get("generator"),
            demon=data.get("demon", {"kind": "round_robin", "seed": 0}),
            horizon=data.get("horizon"),
            allow_forbidden=bool(data.get("allow_forbidden", False)),
        )

    def to_dict(self) -> dict:
        initial: dict[str, Any] = {}
        if self.initial is not None:
            initial["points"] = self.initial
        if self.generator is not None:
            initial["generator"] = self.generator
        out: dict[str, Any] = {
            "nG": self.n_robots,
            "backend": self.backend_name,
            "initial": initial,
            "demon": self.demon,
        }
        if self.eps_abs is not None or self.eps_rel is not None:
            out["eps"] = {"abs": self.eps_abs, "rel": self.eps_rel}
        if self.horizon is not None:
            out["horizon"] = self.horizon
        if self.allow_forbidden:
            out["allow_forbidden"] = True
        return out

    @classmethod
    def load(cls, path: str) -> "Scenario":
        try:
            with open(path, "r", encoding="utf-8") as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ScenarioError(f"cannot read scenario {path}: {exc}") from exc
        return cls.from_dict(data)

    def save(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=2)
            fh.write("\n")

    def build(self) -> tuple[Backend, Configuration, verify.Strategy, int]:
        """Validate and materialize the scenario."""
        if self.n_robots < 3:
            raise ScenarioError(f"nG must be at least 3, got {self.n_robots}")
        try:
            backend = get_backend(self.backend_name, self.eps_abs, self.eps_rel)
        except ValueError as exc:
            raise ScenarioError(str(exc)) from exc

        if self.initial is not None:
            if len(self.initial) != self.n_robots:
                raise ScenarioError(
                    f"{len(self.initial)} initial points for nG={self.n_robots}"
                )
            try:
                conf = tuple(_point_in(pair, backend) for pair in self.initial)
            except (TraceFormatError, ValueError, TypeError, ZeroDivisionError) as exc:
                raise ScenarioError(f"bad initial coordinates: {exc}") from exc
            if gather2d.forbidden(conf, backend) and not self.allow_forbidden:
                raise ScenarioError(
                    "initial configuration is bivalent; pass allow_forbidden "
                    "(negative tests only) to run it anyway"
                )
        else:
            gen = self.generator or {}
            rng = random.Random(int(gen.get("seed", 0)))
            conf = verify.gen_initial(
                self.n_robots,
                rng,
                backend,
                bbox=int(gen.get("bbox", 10)),
                pool_size=gen.get("pool"),
            )

        demon = dict(self.demon)
        kind = demon.get("kind", "round_robin")
        valid = verify.STRATEGY_KINDS + verify.UNFAIR_KINDS
        if kind not in valid:
            raise ScenarioError(f"unknown demon kind {kind!r} (expected one of {valid})")
        policy = verify.DEFAULT_POLICY
        if "zoom_range" in demon or "reflection_prob" in demon:
            lo, hi = demon.get("zoom_range", ["1/10", "10"])
            policy = verify.FramePolicy(
                zoom_lo=Fraction(str(lo)),
                zoom_hi=Fraction(str(hi)),
                reflection_prob=float(demon.get("reflection_prob", 0.5)),
            )
        try:
            strategy = verify.make_strategy(
                kind,
                self.n_robots,
                backend,
                seed=int(demon.get("seed", 0)),
                k=demon.get("k"),
                policy=policy,
                script=demon.get("script"),
            )
        except ValueError as exc:
            raise ScenarioError(str(exc)) from exc
        horizon = self.horizon
        if horizon is None:
            horizon = verify.horizon_for(strategy.k, self.n_robots)
        return backend, conf, strategy, horizon


def write_trace(
    path: str,
    trace: Trace,
    backend: Backend,
    k: Optional[int] = None,
    strategy_kind: Optional[str] = None,
    seed: Optional[int] = None,
    horizon: Optional[int] = None,
) -> None:
    """Serialize a trace as JSON lines with derived per-round annotations."""
    with open(path, "w", encoding="utf-8") as fh:
        header = {
            "type": "header",
            "backend": backend.name,
            "nG": len(trace.initial),
            "k": k,
            "strategy": strategy_kind,
            "seed": seed,
            "horizon": horizon,
            "initial": [_point_out(p, backend) for p in trace.initial],
        }
        if not backend.is_exact:
            header["eps"] = {"abs": backend.eps_abs, "rel": backend.eps_rel}
        fh.write(json.dumps(header) + "\n")

        prev = trace.initial
        gathered_round: Optional[int] = None
        if gather2d.gathering_point(prev, backend) is not None:
            gathered_round = 0
        for step in trace.steps:
            summary = gather2d.summarize(step.config, backend)
            moving = [
                i
                for i in range(len(prev))
                if not backend.points_eq(prev[i], step.config[i])
            ]
            record = {
                "type": "round",
                "index": step.index,
                "steps": [_frame_out(fp, backend) for fp in step.action.steps],
                "locations": [_point_out(p, backend) for p in step.config],
                "phase": summary.phase.value,
                "measure": [summary.measure.weight, summary.measure.residual],
                "moving": moving,
                "clean": summary.clean,
                "forbidden": summary.forbidden,
                "gathered": summary.gathered_pt is not None,
            }
            if gathered_round is None and summary.gathered_pt is not None:
                gathered_round = step.index + 1
            fh.write(json.dumps(record) + "\n")
            prev = step.config
        end = {
            "type": "end",
            "rounds": len(trace.steps),
            "stopped_early": trace.stopped_early,
            "gathered_round": gathered_round,
        }
        fh.write(json.dumps(end) + "\n")


@dataclass
class LoadedTrace:
    trace: Trace
    backend: Backend
    k: Optional[int]
    strategy_kind: Optional[str]
    seed: Optional[int]
    horizon: Optional[int]
    gathered_round: Optional[int]


def read_trace(path: str) -> LoadedTrace:
    """Parse a trace file back into a checkable Trace."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = [ln for ln in fh.read().splitlines() if ln.strip()]
    except OSError as exc:
        raise TraceFormatError(f"cannot read trace {path}: {exc}") from exc
    if not lines:
        raise TraceFormatError("empty trace file")
    records = []
    for i, ln in enumerate(lines):
        try:
            records.append(json.loads(ln))
        except json.JSONDecodeError as exc:
            raise TraceFormatError(f"line {i + 1}: invalid JSON: {exc}") from exc
    header = records[0]
    if not isinstance(header, dict) or header.get("type") != "header":
        raise TraceFormatError("first record must be the header")
    try:
        backend = get_backend(
            header["backend"],
            (header.get("eps") or {}).get("abs"),
            (header.get("eps") or {}).get("rel"),
        )
        initial = tuple(_point_in(pair, backend) for pair in header["initial"])
    except (KeyError, ValueError, ZeroDivisionError) as exc:
        raise TraceFormatError(f"bad header: {exc}") from exc

    steps: list[model.TraceStep] = []
    stopped_early = False
    gathered_round = None
    for rec in records[1:]:
        kind = rec.get("type")
        if kind == "round":
            try:
                action = DemonicAction(
                    tuple(_frame_in(obj, backend) for obj in rec["steps"])
                )
                config = tuple(_point_in(pair, backend) for pair in rec["locations"])
                index = int(rec["index"])
            except (KeyError, ValueError, TypeError, ZeroDivisionError) as exc:
                raise TraceFormatError(f"bad round record: {exc}") from exc
            if len(config) != len(initial) or len(action.steps) != len(initial):
                raise TraceFormatError("round record size does not match nG")
            steps.append(model.TraceStep(index, action, config))
        elif kind == "end":
            stopped_early = bool(rec.get("stopped_early", False))
            gathered_round = rec.get("gathered_round")
        else:
            raise TraceFormatError(f"unknown record type {kind!r}")
    return LoadedTrace(
        trace=Trace(initial, steps, stopped_early),
        backend=backend,
        k=header.get("k"),
        strategy_kind=header.get("strategy"),
        seed=header.get("seed"),
        horizon=header.get("horizon"),
        gathered_round=gathered_round,
    )


def scenario_for_run(spec: verify.RunSpec, backend: Backend) -> Scenario:
    """Freeze a fuzz run into a replayable scenario with explicit coordinates."""
    return Scenario(
        n_robots=spec.n_robots,
        backend_name=spec.backend_name,
        initial=[_point_out(p, backend) for p in spec.initial],
        demon={"kind": spec.strategy_kind, "seed": spec.strategy_seed, "k": spec.k},
        horizon=spec.horizon,
    )
