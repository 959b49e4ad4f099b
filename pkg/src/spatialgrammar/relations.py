"""Machine-checkable spatial relation predicates over compiled scenes.

These definitions are normative for the whole toolchain: the data generator
places objects so they hold and the evaluator re-checks them.

- facing(a, b): the bearing from a to b deviates from a's facing direction
  by at most 45 degrees.
- in_front_of(a, b) / behind(a, b): a lies inside the 45-degree cone along
  b's facing direction (respectively its opposite).
- left_of / right_of(a, b): a lies strictly in b's left (respectively right)
  half-plane, within two grid cells of b.
- beside(a, b): left_of or right_of.
- on_top(a, b): a rests on b's top plane with its center over b's footprint.

All tests use BEV centers; coincident centers satisfy no directional
relation.
"""

from __future__ import annotations

import math

from .compiler import CompiledScene, Placement
from .errors import UnknownRelation

_CONE_HALF_ANGLE = math.pi / 4.0 + 1e-9
_BESIDE_CAP_CELLS = 2.0
_ON_TOP_TOL = 1e-3


def _bearing_offset(from_yaw: float, dx: float, dy: float) -> float | None:
    """Absolute angle between a facing direction and the offset vector."""
    if math.hypot(dx, dy) < 1e-12:
        return None
    angle = math.atan2(dy, dx) - from_yaw
    angle = math.atan2(math.sin(angle), math.cos(angle))
    return abs(angle)


def facing(a: Placement, b: Placement, g: float) -> bool:
    off = _bearing_offset(a.box.yaw, b.box.center.x - a.box.center.x, b.box.center.y - a.box.center.y)
    return off is not None and off <= _CONE_HALF_ANGLE


def in_front_of(a: Placement, b: Placement, g: float) -> bool:
    off = _bearing_offset(b.box.yaw, a.box.center.x - b.box.center.x, a.box.center.y - b.box.center.y)
    return off is not None and off <= _CONE_HALF_ANGLE


def behind(a: Placement, b: Placement, g: float) -> bool:
    off = _bearing_offset(b.box.yaw + math.pi, a.box.center.x - b.box.center.x, a.box.center.y - b.box.center.y)
    return off is not None and off <= _CONE_HALF_ANGLE


def _lateral(a: Placement, b: Placement, g: float, sign: float) -> bool:
    dx = a.box.center.x - b.box.center.x
    dy = a.box.center.y - b.box.center.y
    if math.hypot(dx, dy) > _BESIDE_CAP_CELLS * g + 1e-9:
        return False
    # b's left direction is its facing rotated +90 degrees
    lx = -math.sin(b.box.yaw) * sign
    ly = math.cos(b.box.yaw) * sign
    return dx * lx + dy * ly > 1e-9


def left_of(a: Placement, b: Placement, g: float) -> bool:
    return _lateral(a, b, g, 1.0)


def right_of(a: Placement, b: Placement, g: float) -> bool:
    return _lateral(a, b, g, -1.0)


def beside(a: Placement, b: Placement, g: float) -> bool:
    return left_of(a, b, g) or right_of(a, b, g)


def on_top(a: Placement, b: Placement, g: float) -> bool:
    if abs(a.box.bottom_z - b.box.top_z) > _ON_TOP_TOL:
        return False
    # center of a inside b's footprint, in b's frame
    dx = a.box.center.x - b.box.center.x
    dy = a.box.center.y - b.box.center.y
    c, s = math.cos(-b.box.yaw), math.sin(-b.box.yaw)
    u = dx * c - dy * s
    v = dx * s + dy * c
    return abs(u) <= b.box.size.x / 2.0 + 1e-9 and abs(v) <= b.box.size.y / 2.0 + 1e-9


RELATIONS = {
    "facing": facing,
    "in_front_of": in_front_of,
    "behind": behind,
    "left_of": left_of,
    "right_of": right_of,
    "beside": beside,
    "on_top": on_top,
}


def resolve(s: CompiledScene, ref: str) -> Placement | None:
    """Find a placement by id, falling back to the first one with the
    matching identifier."""
    for p in s.all_placements():
        if p.id == ref:
            return p
    for p in s.all_placements():
        if p.identifier == ref:
            return p
    return None


def check_relation(s: CompiledScene, relation: str, subject: str, obj: str) -> bool:
    """False when either participant is missing; raises on unknown names."""
    if relation not in RELATIONS:
        raise UnknownRelation(
            f"unknown relation {relation!r}; expected one of {sorted(RELATIONS)}"
        )
    a = resolve(s, subject)
    b = resolve(s, obj)
    if a is None or b is None or a.id == b.id:
        return False
    return RELATIONS[relation](a, b, s.grid.cell_size_m)
