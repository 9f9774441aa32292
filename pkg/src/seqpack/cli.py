"""Command line: ``seqpack solve``, ``seqpack verify`` and ``seqpack bench``."""

from __future__ import annotations

import argparse
import logging
import sys
from datetime import datetime, timezone
from fractions import Fraction
from pathlib import Path
from typing import Optional, Sequence

from .engine import EngineConfig, EngineError, InstanceError, RefinementCapExceeded
from .portfolio import AllStrategiesFailed, PortfolioSetup, run_portfolio
from .scene import SceneError, load_scene
from .schedule_file import ScheduleFileError, dumps_schedule, load_schedule
from .solver import BackendFailure, parse_backend
from .verify import verify_schedule

EXIT_OK = 0
EXIT_INFEASIBLE = 2
EXIT_TIMEOUT = 3
EXIT_INPUT = 4
EXIT_INTERNAL = 5

log = logging.getLogger("seqpack")


class _Parser(argparse.ArgumentParser):
    # usage errors are input errors, and 2 means "infeasible" here
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _rational(text: str) -> Fraction:
    try:
        q = Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from None
    if q <= 0:
        raise argparse.ArgumentTypeError(f"must be positive: {text!r}")
    return q


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be at least 1: {text!r}")
    return v


def _backend(text: str) -> str:
    try:
        return parse_backend(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _int_range(text: str) -> tuple[int, ...]:
    """``a..b`` (inclusive) or a comma list such as ``1,2,8``."""
    try:
        if ".." in text:
            a, b = text.split("..", 1)
            lo, hi = int(a), int(b)
            if lo > hi:
                raise ValueError
            return tuple(range(lo, hi + 1))
        return tuple(int(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a..b or a comma list, got {text!r}") from None


def _dims(text: str) -> tuple[int, int]:
    r = _int_range(text)
    if not r:
        raise argparse.ArgumentTypeError(f"empty range {text!r}")
    return (r[0], r[-1])


def _plate_size(text: str) -> tuple[int, int]:
    try:
        w, h = text.lower().split("x")
        size = (int(w), int(h))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected WxH, got {text!r}") from None
    if min(size) <= 0:
        raise argparse.ArgumentTypeError(f"plate sides must be positive: {text!r}")
    return size


def _engine_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--group-size", type=_positive_int, default=4, help="objects solved together (default 4)")
    p.add_argument("--eps-xy", type=_rational, default=Fraction(1, 1024), help="sigma tolerance (default 1/1024)")
    p.add_argument("--eps-t", type=_rational, default=Fraction(1), help="print time separation (default 1)")
    p.add_argument("--timeout-s", type=float, default=60.0, help="deadline per bounded solve (default 60)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--backend", type=_backend, default="internal", help="internal or external:<command>")
    p.add_argument("--workers", type=_positive_int, default=None, help="parallel strategy runs")


def _config(args) -> EngineConfig:
    if args.timeout_s <= 0:
        raise ValueError("--timeout-s must be positive")
    return EngineConfig(
        eps_t=args.eps_t,
        eps_xy=args.eps_xy,
        group_size=args.group_size,
        timeout_s=args.timeout_s,
        backend=args.backend,
        smtlib_dump=getattr(args, "smtlib_dump", None),
    )


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="seqpack", description="Sequential print packing and scheduling.")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("solve", help="arrange and schedule a scene")
    s.add_argument("--scene", required=True)
    s.add_argument("--portfolio", choices=[p.value for p in PortfolioSetup], default="center")
    _engine_args(s)
    s.add_argument("--out", help="schedule file (default: standard output)")
    s.add_argument("--svg-dir", help="write one SVG per plate here")
    s.add_argument("--svg-timestamp", action="store_true", help="stamp SVGs with the current time")
    s.add_argument("--smtlib-dump", help="write every solver query as SMT-LIB2 here")
    s.add_argument("--skip-verify", action="store_true", help="debugging only: write unverified schedules")
    s.add_argument("--record-timing", action="store_true", help="store wall time (breaks byte-identical output)")

    v = sub.add_parser("verify", help="check a schedule against its scene")
    v.add_argument("--scene", required=True)
    v.add_argument("--schedule", required=True)

    b = sub.add_parser("bench", help="run the portfolio benchmark")
    b.add_argument("--kind", choices=["random-cuboids", "object-pool"], default="random-cuboids")
    b.add_argument("--plate", type=_plate_size, default=(200, 200))
    b.add_argument("--dims", type=_dims, default=(8, 64))
    b.add_argument("--counts", type=_int_range, default=tuple(range(1, 33)))
    b.add_argument("--instances", type=_positive_int, default=100)
    b.add_argument("--extruder-side", type=int, default=20, help="square extruder side, 0 for a point")
    b.add_argument(
        "--setups",
        default="center,ordering,tactic,combined",
        help="comma list of portfolio setups",
    )
    _engine_args(b)
    b.add_argument("--out-dir", default="bench-out")
    b.add_argument("--no-figures", action="store_true")
    return parser


def _solve(args) -> int:
    scene = load_scene(args.scene)
    config = _config(args)
    setup = PortfolioSetup.parse(args.portfolio)
    result = run_portfolio(
        scene.plate, scene.objects, scene.extruder, setup, config, seed=args.seed, workers=args.workers
    )
    for o in result.outcomes:
        if not o.ok:
            log.warning("strategy %s failed: %s", o.strategy, o.failure)
    best = result.best
    if not args.skip_verify:
        violations = verify_schedule(best, scene.objects, scene.extruder, scene.plate)
        if violations:
            for v in violations:
                print(f"violation: {v}", file=sys.stderr)
            return EXIT_INTERNAL
    text = dumps_schedule(best, record_timing=args.record_timing)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    if args.svg_dir:
        from .svg import render_svg

        out = Path(args.svg_dir)
        out.mkdir(parents=True, exist_ok=True)
        stamp = datetime.now(timezone.utc).isoformat(timespec="seconds") if args.svg_timestamp else None
        for k, doc in enumerate(render_svg(best, scene, stamp)):
            (out / f"plate_{k}.svg").write_text(doc)
    print(
        f"{best.strategy}: {best.plates_used} plate(s), objects per plate {best.objects_per_plate}",
        file=sys.stderr,
    )
    return EXIT_OK


def _verify(args) -> int:
    scene = load_scene(args.scene)
    schedule = load_schedule(args.schedule)
    violations = verify_schedule(schedule, scene.objects, scene.extruder, scene.plate)
    for v in violations:
        print(v)
    if violations:
        return EXIT_INTERNAL
    print(f"ok: {len(scene.objects)} object(s) on {schedule.plates_used} plate(s)")
    return EXIT_OK


def _bench(args) -> int:
    from .bench import BenchmarkSpec, run_benchmark

    setups = [PortfolioSetup.parse(s.strip()) for s in args.setups.split(",") if s.strip()]
    if not setups:
        raise ValueError("no portfolio setups given")
    spec = BenchmarkSpec(
        kind=args.kind,
        counts=args.counts,
        instances=args.instances,
        seed=args.seed,
        dims=args.dims,
        plate=args.plate,
        extruder_side=args.extruder_side,
    )
    report = run_benchmark(
        spec, setups, _config(args), workers=args.workers, progress=lambda m: log.info("%s", m)
    )
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "summary.csv").write_text(report.summary_csv())
    (out / "histogram.csv").write_text(report.histogram_csv())
    (out / "instances.csv").write_text(report.instances_csv())
    summary = report.text_summary()
    (out / "summary.txt").write_text(summary)
    if not args.no_figures:
        from .plotting import write_figures

        write_figures(report, out)
    sys.stdout.write(summary)
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # usage errors and --help; return the code so callers get an int either way
        return exc.code if isinstance(exc.code, int) else EXIT_INPUT
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
    )
    handler = {"solve": _solve, "verify": _verify, "bench": _bench}[args.command]
    try:
        return handler(args)
    except (SceneError, ScheduleFileError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except InstanceError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except AllStrategiesFailed as exc:
        print(f"timeout: {exc}", file=sys.stderr)
        return EXIT_TIMEOUT
    except (RefinementCapExceeded, BackendFailure, EngineError, AssertionError) as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
