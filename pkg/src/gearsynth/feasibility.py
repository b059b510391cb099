"""Pairwise bounding-box interference over simulated placements.

Every placement axis is axis-aligned (a simulator invariant), so plain
axis-aligned boxes are exact for the 90-degree-only geometry. Overlap uses
open intervals: boxes that merely touch (meshing gears, stacked faces) do
not count as interference, and zero-extent boxes (the SH-* shaft) never
collide.
"""

from __future__ import annotations

from dataclasses import dataclass

from .simulator import Placement, Vec3


@dataclass(frozen=True)
class Aabb:
    min: Vec3
    max: Vec3


@dataclass(frozen=True)
class Collision:
    i: int
    j: int


def placement_aabb(pl: Placement) -> Aabb:
    """World box of a placement: the local 'along axis' extent lies on the
    axis dimension, the transverse extents on the other two."""
    along, t1, t2 = pl.box
    axis_dim = next(i for i in range(3) if pl.axis[i] != 0)
    half = [t1 / 2.0, t2 / 2.0]
    sizes = [0.0, 0.0, 0.0]
    sizes[axis_dim] = along / 2.0
    rest = [i for i in range(3) if i != axis_dim]
    sizes[rest[0]] = half[0]
    sizes[rest[1]] = half[1]
    c = pl.center
    return Aabb(
        (c[0] - sizes[0], c[1] - sizes[1], c[2] - sizes[2]),
        (c[0] + sizes[0], c[1] + sizes[1], c[2] + sizes[2]),
    )


def boxes_intersect(a: Aabb, b: Aabb) -> bool:
    """Open-interval overlap on all three axes; touching faces are fine."""
    for k in range(3):
        if max(a.min[k], b.min[k]) >= min(a.max[k], b.max[k]):
            return False
    return True


def check_interference(placements: tuple[Placement, ...] | list[Placement]) -> Collision | None:
    """First colliding pair (i, j) with j > i + 1, or None when feasible.

    Adjacent components are exempt: they are connected by construction
    (meshing pairs and shaft-mounted gears legitimately share volume)."""
    boxes = [placement_aabb(pl) for pl in placements]
    n = len(boxes)
    for i in range(n):
        for j in range(i + 2, n):
            if boxes_intersect(boxes[i], boxes[j]):
                return Collision(i, j)
    return None


def is_feasible(placements: tuple[Placement, ...] | list[Placement]) -> bool:
    return check_interference(placements) is None
