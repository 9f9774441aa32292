"""Benchmark instances and portfolio statistics.

Two instance kinds are supported: random cuboids with integer dimensions
drawn uniformly from a closed interval, and draws (with repetition) from a
fixed pool of synthetic printer-part-like convex shapes.
"""

from __future__ import annotations

import csv
import io
import logging
import math
import random
import statistics
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence

from .engine import EngineConfig, InstanceError
from .geometry import ConvexPolygon, ExtruderProfile, Plate, PrintObject, convex_hull
from .portfolio import AllStrategiesFailed, Outcome, PortfolioSetup, run_portfolio
from .strategy import mix_seed

log = logging.getLogger(__name__)

RANDOM_CUBOIDS = "random-cuboids"
OBJECT_POOL = "object-pool"
KINDS = (RANDOM_CUBOIDS, OBJECT_POOL)


@dataclass(frozen=True)
class BenchmarkSpec:
    kind: str = RANDOM_CUBOIDS
    counts: tuple[int, ...] = tuple(range(1, 33))
    instances: int = 100
    seed: int = 0
    dims: tuple[int, int] = (8, 64)
    plate: tuple[int, int] = (200, 200)
    extruder_side: int = 20

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown benchmark kind {self.kind!r}")
        lo, hi = self.dims
        if not (0 < lo <= hi):
            raise ValueError(f"bad dimension bounds {self.dims}")
        if not self.counts or min(self.counts) < 1:
            raise ValueError("object counts must be positive")
        if self.instances < 1:
            raise ValueError("need at least one instance")
        if min(self.plate) <= 0 or self.extruder_side < 0:
            raise ValueError("bad plate or extruder size")

    def make_plate(self) -> Plate:
        return Plate(*self.plate)

    def make_extruder(self) -> ExtruderProfile:
        if self.extruder_side == 0:
            return ExtruderProfile.point()
        return ExtruderProfile.square(self.extruder_side)

    def instance_seed(self, n: int, index: int) -> int:
        return mix_seed(self.seed, f"{self.kind}:{n}:{index}")

    def instance(self, n: int, index: int) -> list[PrintObject]:
        seed = self.instance_seed(n, index)
        if self.kind == RANDOM_CUBOIDS:
            return gen_random_cuboids(n, self.dims, seed)
        return gen_pool_objects(n, seed)


def gen_random_cuboids(n: int, dims: tuple[int, int] = (8, 64), seed: int = 0) -> list[PrintObject]:
    lo, hi = dims
    rng = random.Random(seed)
    out = []
    for i in range(n):
        length, width, height = (rng.randint(lo, hi) for _ in range(3))
        out.append(PrintObject.cuboid(f"c{i}", length, width, height))
    return out


def _regular(sides: int, radius: float) -> list[tuple[Fraction, Fraction]]:
    # rational vertices rounded to 1/8 mm; convex_hull drops any that fold in
    pts = []
    for k in range(sides):
        a = 2 * math.pi * k / sides
        pts.append(
            (
                Fraction(round(radius * (1 + math.cos(a)) * 8), 8),
                Fraction(round(radius * (1 + math.sin(a)) * 8), 8),
            )
        )
    return pts


def _rect(w, h):
    return [(0, 0), (w, 0), (w, h), (0, h)]


def _trapezoid(bottom, top, h):
    off = Fraction(bottom - top, 2)
    return [(0, 0), (bottom, 0), (off + top, h), (off, h)]


# (name, vertices, height); loosely modelled on a printer's spare-part kit
_POOL_TABLE: list[tuple[str, list, int]] = [
    ("x-end", _rect(60, 40), 58),
    ("x-end-idler", _rect(60, 38), 58),
    ("x-carriage", _rect(52, 46), 12),
    ("extruder-body", _trapezoid(48, 36, 44), 42),
    ("extruder-cover", _rect(40, 36), 24),
    ("extruder-idler", _trapezoid(30, 22, 34), 18),
    ("fan-shroud", _regular(6, 18), 22),
    ("print-fan-duct", _trapezoid(44, 20, 30), 16),
    ("y-motor-holder", _rect(44, 42), 20),
    ("y-idler", _rect(34, 20), 36),
    ("y-belt-holder", _rect(30, 14), 24),
    ("y-rod-holder", _trapezoid(36, 24, 18), 14),
    ("z-axis-top", _rect(64, 28), 14),
    ("z-axis-bottom", _rect(64, 40), 30),
    ("z-screw-cover", _regular(8, 10), 16),
    ("frame-foot", _trapezoid(38, 26, 24), 18),
    ("spool-holder", _rect(70, 16), 12),
    ("lcd-cover", _rect(80, 28), 36),
    ("lcd-knob", _regular(8, 9), 14),
    ("psu-cover", _rect(76, 54), 40),
    ("einsy-base", _rect(76, 44), 10),
    ("einsy-door", _rect(72, 46), 6),
    ("heatbed-cable-cover", _trapezoid(40, 28, 34), 20),
    ("extruder-cable-clip", _rect(22, 12), 10),
    ("filament-sensor-cover", _regular(6, 11), 12),
    ("nozzle-fan-holder", _trapezoid(34, 18, 26), 30),
    ("belt-tensioner", _rect(26, 16), 16),
    ("bearing-clip", _regular(8, 8), 8),
    ("cable-holder", _rect(18, 18), 22),
    ("pinda-holder", _trapezoid(24, 14, 16), 18),
    ("rambo-cover-latch", _rect(28, 10), 8),
    ("corner-bracket", [(0, 0), (40, 0), (0, 40)], 12),
    ("tension-wedge", [(0, 0), (36, 0), (28, 22), (6, 22)], 10),
    ("octo-spacer", _regular(8, 14), 26),
]


def object_pool() -> list[PrintObject]:
    return [PrintObject(name, convex_hull(pts), h) for name, pts, h in _POOL_TABLE]


def gen_pool_objects(n: int, seed: int = 0) -> list[PrintObject]:
    pool = object_pool()
    rng = random.Random(seed)
    picks = [rng.randrange(len(pool)) for _ in range(n)]
    return [PrintObject(f"{pool[k].id}#{i}", pool[k].footprint, pool[k].height) for i, k in enumerate(picks)]


# -- running -------------------------------------------------------------------


@dataclass
class InstanceRecord:
    n: int
    index: int
    setup: str
    plates: Optional[int]
    objects_per_plate: list[int]
    best_strategy: str
    # sum of the strategies' run times, and the longest one (ideal parallel wall time)
    cpu_s: float
    wall_s: float
    failure: str = ""

    @property
    def solved(self) -> bool:
        return self.plates is not None


@dataclass
class BenchmarkReport:
    spec: BenchmarkSpec
    setups: list[str]
    group_size: int
    records: list[InstanceRecord] = field(default_factory=list)

    def _select(self, n: Optional[int] = None, setup: Optional[str] = None) -> list[InstanceRecord]:
        return [
            r
            for r in self.records
            if (n is None or r.n == n) and (setup is None or r.setup == setup)
        ]

    def mean_plates(self, n: int, setup: str) -> Optional[float]:
        vals = [r.plates for r in self._select(n, setup) if r.solved]
        return statistics.fmean(vals) if vals else None

    def mean_wall(self, n: int, setup: str) -> Optional[float]:
        vals = [r.wall_s for r in self._select(n, setup) if r.solved]
        return statistics.fmean(vals) if vals else None

    def histogram(self, setup: str) -> Counter:
        """Number of plates carrying k objects, over all instances."""
        c: Counter = Counter()
        for r in self._select(setup=setup):
            c.update(r.objects_per_plate)
        return c

    def counts(self) -> list[int]:
        return sorted({r.n for r in self.records})

    def summary_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(
            ["n", "setup", "instances", "solved", "mean_plates", "mean_wall_s", "mean_cpu_s", "group_size"]
        )
        for n in self.counts():
            for setup in self.setups:
                rows = self._select(n, setup)
                solved = [r for r in rows if r.solved]
                w.writerow(
                    [
                        n,
                        setup,
                        len(rows),
                        len(solved),
                        _fmt(self.mean_plates(n, setup)),
                        _fmt(self.mean_wall(n, setup)),
                        _fmt(statistics.fmean(r.cpu_s for r in solved) if solved else None),
                        self.group_size,
                    ]
                )
        return buf.getvalue()

    def histogram_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["setup", "objects_on_plate", "plates"])
        for setup in self.setups:
            h = self.histogram(setup)
            for k in sorted(h):
                w.writerow([setup, k, h[k]])
        return buf.getvalue()

    def instances_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(
            ["n", "instance", "setup", "plates", "objects_per_plate", "best_strategy", "wall_s", "cpu_s", "failure"]
        )
        for r in self.records:
            w.writerow(
                [
                    r.n,
                    r.index,
                    r.setup,
                    "" if r.plates is None else r.plates,
                    " ".join(map(str, r.objects_per_plate)),
                    r.best_strategy,
                    f"{r.wall_s:.3f}",
                    f"{r.cpu_s:.3f}",
                    r.failure,
                ]
            )
        return buf.getvalue()

    def first_plate_violations(self, richer: str, baseline: str = "center") -> list[tuple[int, int]]:
        """Instances where ``richer`` uses fewer plates than ``baseline`` but fewer objects on plate 0."""
        base = {(r.n, r.index): r for r in self._select(setup=baseline) if r.solved}
        bad = []
        for r in self._select(setup=richer):
            b = base.get((r.n, r.index))
            if not r.solved or b is None:
                continue
            if r.plates < b.plates and r.objects_per_plate[0] < b.objects_per_plate[0]:
                bad.append((r.n, r.index))
        return bad

    def text_summary(self) -> str:
        lines = [
            f"benchmark {self.spec.kind}: plate {self.spec.plate[0]}x{self.spec.plate[1]}, "
            f"{self.spec.instances} instance(s) per count, seed {self.spec.seed}, group size {self.group_size}",
            "",
            "mean plates used",
            "  n  " + "".join(f"{s:>12}" for s in self.setups),
        ]
        for n in self.counts():
            cells = "".join(f"{_fmt(self.mean_plates(n, s)) or '-':>12}" for s in self.setups)
            lines.append(f"{n:>3}  {cells}")
        lines += ["", "objects per plate (number of plates)"]
        for s in self.setups:
            h = self.histogram(s)
            lines.append(f"  {s:>9}: " + ", ".join(f"{k}:{h[k]}" for k in sorted(h)))
        failed = [r for r in self.records if not r.solved]
        if failed:
            lines += ["", f"{len(failed)} failed run(s)"]
            lines += [f"  n={r.n} #{r.index} {r.setup}: {r.failure}" for r in failed]
        for s in self.setups:
            if s != "center" and "center" in self.setups:
                bad = self.first_plate_violations(s)
                if bad:
                    lines.append(f"first-plate property broken for {s} on {bad}")
        return "\n".join(lines) + "\n"


def _fmt(x: Optional[float]) -> str:
    return "" if x is None else f"{x:.4f}"


def run_benchmark(
    spec: BenchmarkSpec,
    setups: Sequence[PortfolioSetup] = tuple(PortfolioSetup),
    config: EngineConfig = EngineConfig(),
    workers: Optional[int] = None,
    progress: Optional[Callable[[str], None]] = None,
) -> BenchmarkReport:
    """Solve every instance under every setup; failures are recorded, not raised.

    Strategy outcomes are shared between setups of the same instance, since a
    strategy's run does not depend on the portfolio it belongs to.
    """
    report = BenchmarkReport(spec, [s.value for s in setups], config.group_size)
    plate, extruder = spec.make_plate(), spec.make_extruder()
    for n in spec.counts:
        for index in range(spec.instances):
            objects = spec.instance(n, index)
            known: dict[str, Outcome] = {}
            for setup in setups:
                try:
                    res = run_portfolio(
                        plate, objects, extruder, setup, config, seed=spec.seed, workers=workers, reuse=known
                    )
                except (AllStrategiesFailed, InstanceError) as exc:
                    report.records.append(
                        InstanceRecord(n, index, setup.value, None, [], "", 0.0, 0.0, str(exc))
                    )
                    continue
                known.update(res.by_name())
                times = [o.schedule.wall_time_s for o in res.outcomes if o.schedule is not None]
                best = res.best
                report.records.append(
                    InstanceRecord(
                        n,
                        index,
                        setup.value,
                        best.plates_used,
                        best.objects_per_plate,
                        best.strategy,
                        sum(times),
                        max(times),
                    )
                )
            if progress:
                progress(f"n={n} instance {index + 1}/{spec.instances} done")
    return report
