"""Run several composite strategies on one instance and keep the best schedule."""

from __future__ import annotations

import enum
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

from .engine import EngineConfig, Schedule, SolveTimeout, solve_cegar_seq
from .geometry import ExtruderProfile, Plate, PrintObject
from .strategy import (
    ORDERING_KINDS,
    TACTICS,
    CompositeStrategy,
    OrderingKind,
    Tactic,
)


class AllStrategiesFailed(RuntimeError):
    pass


class PortfolioSetup(enum.Enum):
    CENTER = "center"
    ORDERING = "ordering"
    TACTIC = "tactic"
    COMBINED = "combined"

    @classmethod
    def parse(cls, name: str) -> PortfolioSetup:
        try:
            return cls(name.lower())
        except ValueError:
            raise ValueError(f"unknown portfolio setup {name!r}") from None

    def strategies(
        self,
        seed: int = 0,
        tactics: Sequence[Tactic] = TACTICS,
        orderings: Sequence[OrderingKind] = ORDERING_KINDS,
    ) -> list[CompositeStrategy]:
        if self is PortfolioSetup.CENTER:
            pairs = [(Tactic.CENTER, OrderingKind.INPUT)]
        elif self is PortfolioSetup.ORDERING:
            pairs = [(Tactic.CENTER, k) for k in orderings]
        elif self is PortfolioSetup.TACTIC:
            pairs = [(t, OrderingKind.INPUT) for t in tactics]
        else:
            pairs = [(t, k) for k in orderings for t in tactics]
        return [CompositeStrategy.make(t, k, seed) for t, k in pairs]


@dataclass(frozen=True)
class Outcome:
    """One strategy's answer: a schedule, or the reason it has none."""

    strategy: str
    schedule: Optional[Schedule]
    failure: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.schedule is not None


@dataclass
class PortfolioResult:
    best: Schedule
    outcomes: list[Outcome] = field(default_factory=list)

    @property
    def schedules(self) -> list[Schedule]:
        return [o.schedule for o in self.outcomes if o.schedule is not None]

    def by_name(self) -> dict[str, Outcome]:
        return {o.strategy: o for o in self.outcomes}


def selection_key(schedule: Schedule):
    return (schedule.plates_used, schedule.sigma_sum, schedule.strategy)


def select_best(answers: Iterable[Schedule]) -> Schedule:
    """Fewest plates, then smallest sum of plate sigmas, then strategy name."""
    answers = list(answers)
    if not answers:
        raise AllStrategiesFailed("no strategy produced a schedule")
    return min(answers, key=selection_key)


def _run_one(
    plate: Plate,
    objects: Sequence[PrintObject],
    extruder: ExtruderProfile,
    strategy: CompositeStrategy,
    config: EngineConfig,
) -> Outcome:
    try:
        schedule = solve_cegar_seq(plate, objects, extruder, strategy, config)
    except SolveTimeout as exc:
        return Outcome(strategy.name, None, f"timeout: {exc}")
    return Outcome(strategy.name, schedule)


def default_workers(n_strategies: int) -> int:
    return max(1, min(n_strategies, os.cpu_count() or 1))


def run_portfolio(
    plate: Plate,
    objects: Sequence[PrintObject],
    extruder: ExtruderProfile,
    setup: PortfolioSetup | Sequence[CompositeStrategy],
    config: EngineConfig = EngineConfig(),
    seed: int = 0,
    workers: Optional[int] = None,
    reuse: Optional[Mapping[str, Outcome]] = None,
) -> PortfolioResult:
    """Run every strategy of ``setup`` to completion and select the best schedule.

    Strategy runs are deterministic, so ``reuse`` may supply outcomes already
    computed for this very instance, seed and config; those strategies are
    not run again.  With ``workers`` > 1 the remaining runs go to a process
    pool; otherwise they run one after another in this process.
    """
    if isinstance(setup, PortfolioSetup):
        strategies = setup.strategies(seed)
    else:
        strategies = list(setup)
    if not strategies:
        raise ValueError("empty portfolio")
    reuse = reuse or {}
    todo = [s for s in strategies if s.name not in reuse]
    workers = default_workers(len(todo)) if workers is None else max(1, workers)

    fresh: dict[str, Outcome] = {}
    if workers == 1 or len(todo) <= 1:
        for s in todo:
            fresh[s.name] = _run_one(plate, objects, extruder, s, config)
    else:
        # an InstanceError raised in a worker surfaces here from result()
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = {s.name: pool.submit(_run_one, plate, objects, extruder, s, config) for s in todo}
            for name, fut in futures.items():
                fresh[name] = fut.result()

    outcomes = [reuse.get(s.name) or fresh[s.name] for s in strategies]
    best = select_best(o.schedule for o in outcomes if o.schedule is not None)
    return PortfolioResult(best, outcomes)
