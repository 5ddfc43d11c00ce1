"""Membership in the set of rectangles that meet the closed unit disc.

A point ``(x0, y0, x1, y1)`` of R^4 stands for the axis-parallel rectangle
with lower-left corner ``(x0, y0)`` and upper-right corner ``(x1, y1)``.
Two independent predicates are provided: a five-clause semialgebraic
description and a nearest-point computation.  ``tol`` relaxes every
inequality (a negative ``tol`` tightens it).
"""

from __future__ import annotations

from dataclasses import dataclass


class InfeasibleRegionError(ValueError):
    pass


@dataclass(frozen=True)
class RegionPoint:
    x0: float
    y0: float
    x1: float
    y1: float

    def __iter__(self):
        return iter((self.x0, self.y0, self.x1, self.y1))


def _as_point(p) -> RegionPoint:
    return p if isinstance(p, RegionPoint) else RegionPoint(*map(float, p))


def in_region_clauses(p, tol: float = 0.0) -> bool:
    x0, y0, x1, y1 = _as_point(p)
    le = lambda a, b: a <= b + tol
    disc = lambda x, y: le(x * x + y * y, 1.0)
    return (
        le(x0, x1) and le(y0, y1)
        and ((le(x0, 1) and le(y0, 0)) or (le(x0, 0) and le(y0, 1)) or disc(x0, y0))
        and ((le(-1, x1) and le(y0, 0)) or (le(0, x1) and le(y0, 1)) or disc(x1, y0))
        and ((le(-1, x1) and le(0, y1)) or (le(0, x1) and le(-1, y1)) or disc(x1, y1))
        and ((le(x0, 1) and le(0, y1)) or (le(x0, 0) and le(-1, y1)) or disc(x0, y1))
    )


def _clamp0(lo: float, hi: float) -> float:
    return min(max(0.0, lo), hi)


def nearest_to_origin(p) -> tuple[float, float]:
    x0, y0, x1, y1 = _as_point(p)
    return _clamp0(x0, x1), _clamp0(y0, y1)


def in_region_clamp(p, tol: float = 0.0) -> bool:
    x0, y0, x1, y1 = _as_point(p)
    if x0 > x1 + tol or y0 > y1 + tol:
        return False
    x, y = nearest_to_origin(RegionPoint(x0, y0, max(x0, x1), max(y0, y1)))
    return x * x + y * y <= 1.0 + tol


def anchor_point(p) -> tuple[float, float]:
    """Point of the rectangle nearest the origin; raises if the rectangle misses the disc."""
    p = _as_point(p)
    if not in_region_clamp(p):
        raise InfeasibleRegionError(f"rectangle {tuple(p)} does not meet the unit disc")
    return nearest_to_origin(p)
