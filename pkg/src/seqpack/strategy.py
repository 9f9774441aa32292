"""Arrangement tactics, object orderings and their composite strategies."""

from __future__ import annotations

import enum
import hashlib
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .geometry import Plate, Point2, PrintObject


class Tactic(enum.Enum):
    CENTER = "Center"
    MIN_X_MIN_Y = "Min-X-Min-Y"
    MAX_X_MIN_Y = "Max-X-Min-Y"
    MIN_X_MAX_Y = "Min-X-Max-Y"
    MAX_X_MAX_Y = "Max-X-Max-Y"

    @classmethod
    def parse(cls, name: str) -> Tactic:
        for t in cls:
            if t.value.lower() == name.lower() or t.name.lower() == name.lower():
                return t
        raise ValueError(f"unknown tactic {name!r}")


TACTICS = tuple(Tactic)


def tactic_anchor(tactic: Tactic, plate: Plate) -> Point2:
    w, h = plate.width, plate.height
    zero = Fraction(0)
    return {
        Tactic.CENTER: Point2(w / 2, h / 2),
        Tactic.MIN_X_MIN_Y: Point2(zero, zero),
        Tactic.MAX_X_MIN_Y: Point2(w, zero),
        Tactic.MIN_X_MAX_Y: Point2(zero, h),
        Tactic.MAX_X_MAX_Y: Point2(w, h),
    }[tactic]


class OrderingKind(enum.Enum):
    MIN_TO_MAX = "Height-Min-to-Max"
    MAX_TO_MIN = "Height-Max-to-Min"
    RANDOM = "Height-Random"
    INPUT = "Height-Input"


@dataclass(frozen=True)
class Ordering:
    kind: OrderingKind
    seed: Optional[int] = None

    @property
    def name(self) -> str:
        return self.kind.value

    @classmethod
    def parse(cls, name: str, seed: Optional[int] = None) -> Ordering:
        for k in OrderingKind:
            if k.value.lower() == name.lower() or k.name.lower() == name.lower():
                return cls(k, seed if k is OrderingKind.RANDOM else None)
        raise ValueError(f"unknown ordering {name!r}")


ORDERING_KINDS = tuple(OrderingKind)


def apply_ordering(
    ordering: Ordering, objects: Sequence[PrintObject], rng: Optional[random.Random] = None
) -> list[PrintObject]:
    """Order objects for plate filling; height ties keep input order.

    ``rng`` lets a caller continue one random stream across repeated calls;
    otherwise a fresh generator is seeded from the ordering.
    """
    objs = list(objects)
    if not objs:
        raise ValueError("nothing to order")
    kind = ordering.kind
    if kind is OrderingKind.INPUT:
        return objs
    if kind is OrderingKind.MIN_TO_MAX:
        return sorted(objs, key=lambda o: o.height)
    if kind is OrderingKind.MAX_TO_MIN:
        return sorted(objs, key=lambda o: -o.height)
    if rng is None:
        rng = random.Random(ordering.seed or 0)
    rng.shuffle(objs)
    return objs


def mix_seed(seed: int, name: str) -> int:
    """Deterministic per-strategy seed, independent of the strategy's position in a portfolio."""
    digest = hashlib.sha256(f"{seed}:{name}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


@dataclass(frozen=True)
class CompositeStrategy:
    tactic: Tactic
    ordering: Ordering

    @property
    def name(self) -> str:
        return f"{self.tactic.value}/{self.ordering.name}"

    @classmethod
    def make(cls, tactic: Tactic, kind: OrderingKind, seed: int = 0) -> CompositeStrategy:
        name = f"{tactic.value}/{kind.value}"
        ordering_seed = mix_seed(seed, name) if kind is OrderingKind.RANDOM else None
        return cls(tactic, Ordering(kind, ordering_seed))

    @classmethod
    def parse(cls, name: str, seed: int = 0) -> CompositeStrategy:
        tactic, _, ordering = name.partition("/")
        return cls.make(Tactic.parse(tactic), Ordering.parse(ordering).kind, seed)
