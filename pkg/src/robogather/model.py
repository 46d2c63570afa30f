"""The SSYNC execution framework.

Robots are anonymous: a configuration maps identifiers to locations, but a
robogram only ever sees a *spectrum* -- the multiset of inhabited locations
(strong global multiplicity). Each round the demon activates an arbitrary
subset of robots and hands each one a fresh local frame; an activated robot
observes the configuration through its frame, runs the robogram, and its
destination is mapped back to the global frame.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional, Sequence

from . import frames
from .scalars import Backend, Point, Scalar

Configuration = tuple[Point, ...]
Spectrum = Counter  # Counter[Point] -> positive multiplicity

# A demon is a lazily evaluated stream of demonic actions; adversarial
# strategies may inspect the current configuration when choosing one.
Demon = Callable[[int, Configuration], "DemonicAction"]


@dataclass(frozen=True)
class FrameParams:
    """Frame a demon hands to an activated robot (see frames.make_frame)."""

    zoom: Scalar
    c: Scalar
    s: Scalar
    reflect: bool


@dataclass(frozen=True)
class DemonicAction:
    """One round of demonic choices: per robot either None (inactive) or the
    frame parameters for its activation.

    ``relocate_byz`` is the Byzantine-relocation hook; the identifier space
    here contains good robots only, so it stays empty in every generated
    action and exists purely to keep the round structure general.
    """

    steps: tuple[Optional[FrameParams], ...]
    relocate_byz: Mapping[int, Point] = field(default_factory=dict)

    def activated(self) -> tuple[int, ...]:
        return tuple(i for i, fp in enumerate(self.steps) if fp is not None)


@dataclass(frozen=True)
class Robogram:
    """A protocol: a pure function from spectrum to destination.

    Taking only a spectrum (never a configuration) enforces anonymity; purity
    gives compatibility: equal spectra yield equal destinations.
    """

    name: str
    pgm: Callable[[Spectrum], Point]


def spectrum_of(conf: Configuration, backend: Backend) -> Spectrum:
    """Multiset of robot locations; invariant under identifier permutations.

    On the floating backend, locations equal under the tolerance are merged
    into one tower (first-seen location is the representative).
    """
    if backend.is_exact:
        return Counter(conf)
    spec: Spectrum = Counter()
    for loc in conf:
        rep = next((k for k in spec if backend.points_eq(k, loc)), None)
        spec[loc if rep is None else rep] += 1
    return spec


def support(s: Spectrum) -> list[Point]:
    return list(s)


def total(s: Spectrum) -> int:
    return sum(s.values())


def max_support(s: Spectrum) -> list[Point]:
    """Locations of maximal multiplicity (the highest towers)."""
    if not s:
        return []
    top = max(s.values())
    return [p for p, mult in s.items() if mult == top]


def round(r: Robogram, da: DemonicAction, conf: Configuration, backend: Backend) -> Configuration:
    """One SSYNC round: every activated robot atomically Looks (through its
    frame), Computes (the robogram on its local spectrum) and Moves (the
    destination mapped back to the global frame). Inactive robots stay put.
    """
    if len(da.steps) != len(conf):
        raise ValueError(f"action for {len(da.steps)} robots applied to {len(conf)}")
    out: list[Point] = []
    for i, loc in enumerate(conf):
        if i in da.relocate_byz:  # Byzantine hook; never taken for good robots
            out.append(da.relocate_byz[i])
            continue
        fp = da.steps[i]
        if fp is None:
            out.append(loc)
            continue
        f = frames.make_frame(loc, fp.zoom, fp.c, fp.s, fp.reflect, backend)
        local_conf = tuple(frames.apply(f, q) for q in conf)
        dest_local = r.pgm(spectrum_of(local_conf, backend))
        out.append(frames.apply(frames.inverse(f), dest_local))
    return tuple(out)


def moving(r: Robogram, da: DemonicAction, conf: Configuration, backend: Backend) -> list[int]:
    """Ids that change location this round. A subset of the activated ids:
    activated robots already at their destination do not move.
    """
    after = round(r, da, conf, backend)
    return [i for i in range(len(conf)) if not backend.points_eq(conf[i], after[i])]


@dataclass(frozen=True)
class TraceStep:
    index: int
    action: DemonicAction
    config: Configuration


@dataclass
class Trace:
    """A materialized execution prefix: initial configuration plus one step
    record per executed round (the configuration chain must satisfy
    config[i+1] == round(r, action[i], config[i]))."""

    initial: Configuration
    steps: list[TraceStep]
    stopped_early: bool = False

    def configs(self) -> list[Configuration]:
        return [self.initial] + [st.config for st in self.steps]

    def final(self) -> Configuration:
        return self.steps[-1].config if self.steps else self.initial

    def actions(self) -> list[DemonicAction]:
        return [st.action for st in self.steps]


def execute(
    r: Robogram,
    demon: Demon,
    conf: Configuration,
    horizon: int,
    backend: Backend,
    stop: Callable[[Configuration], bool] | None = None,
) -> Trace:
    """Fold ``round`` over the demon's first ``horizon`` actions.

    Stops early (recording the fact) as soon as ``stop`` holds, checked on
    the initial configuration as well.
    """
    if stop is not None and stop(conf):
        return Trace(conf, [], stopped_early=True)
    steps: list[TraceStep] = []
    cur = conf
    for i in range(horizon):
        da = demon(i, cur)
        cur = round(r, da, cur, backend)
        steps.append(TraceStep(i, da, cur))
        if stop is not None and stop(cur):
            return Trace(conf, steps, stopped_early=True)
    return Trace(conf, steps, stopped_early=False)


def check_k_fair(actions: Sequence[DemonicAction], k: int) -> bool:
    """Bounded fairness: every robot is activated at least once in every
    window of ``k`` consecutive actions. Vacuously true when the list is
    shorter than ``k``.
    """
    if not actions:
        return True
    n_robots = len(actions[0].steps)
    active = [set(a.activated()) for a in actions]
    for start in range(len(actions) - k + 1):
        seen: set[int] = set()
        for s in active[start : start + k]:
            seen |= s
        if len(seen) < n_robots:
            return False
    return True
