"""Sequential 3D-print packing: place objects on plates and order them so the
extruder never hits a finished print."""

from .engine import (
    EngineConfig,
    InstanceError,
    Placement,
    PlacementGroup,
    PlateAssignment,
    RefinementCapExceeded,
    Schedule,
    SolveTimeout,
    solve_cegar_seq,
)
from .geometry import (
    ConvexPolygon,
    ExtruderProfile,
    Plate,
    Point2,
    PrintObject,
    convex_hull,
    envelope_hull,
    minkowski_sum,
    scale_plate,
)
from .portfolio import AllStrategiesFailed, PortfolioSetup, run_portfolio, select_best
from .scene import Scene, SceneError, load_scene
from .schedule_file import ScheduleFileError, dumps_schedule, load_schedule, write_schedule
from .strategy import CompositeStrategy, OrderingKind, Tactic
from .verify import Violation, verify_schedule

__version__ = "0.1.0"

__all__ = [
    "AllStrategiesFailed",
    "CompositeStrategy",
    "ConvexPolygon",
    "EngineConfig",
    "ExtruderProfile",
    "InstanceError",
    "OrderingKind",
    "Placement",
    "PlacementGroup",
    "Plate",
    "PlateAssignment",
    "Point2",
    "PortfolioSetup",
    "PrintObject",
    "RefinementCapExceeded",
    "Scene",
    "SceneError",
    "Schedule",
    "ScheduleFileError",
    "SolveTimeout",
    "Tactic",
    "Violation",
    "convex_hull",
    "dumps_schedule",
    "envelope_hull",
    "load_scene",
    "load_schedule",
    "minkowski_sum",
    "run_portfolio",
    "scale_plate",
    "select_best",
    "solve_cegar_seq",
    "verify_schedule",
    "write_schedule",
]
