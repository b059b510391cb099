"""Deterministic kinematic propagation for valid gear sequences.

The frame starts at the origin with motion axis +e0 and unit input speed.
Rotation sense is carried as the sign of the axis vector; the cumulative
speed ratio stays positive. Perpendicular placement directions follow the
cyclic convention perp_k(s*e_j) = s*e_((j+k) mod 3), scaled by the mesh
token sign.

Conventions not fixed by the pair kinematics (documented, covered by tests):
  - spur pairs: centers separated by the sum of pitch radii along the
    placement direction; the axis sign flips (external mesh).
  - perpendicular pairs (bevel/miter/worm/hypoid): next center is offset by
    the current pitch radius along the placement direction plus the next
    pitch radius along the unsigned current axis; the new axis is the
    placement direction.
  - rack -> pinion: the pinion axis is the placement direction and its center
    is offset by its pitch radius along cross(travel, placement).
  - pinion -> rack: the rack center is offset by the pinion pitch radius
    along the placement direction; travel is cross(placement, axis).
  - the reported output position is the frame position after the final
    component (a gear's center, a shaft's far end).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .catalogue import Catalogue, PartRecord
from .dsl import (
    END,
    MESH_TOKENS,
    START,
    TRA_TOKENS,
    GearSequence,
    validate_grammar,
)
from .errors import IncompatibleMesh, InvalidSequence, TranslationOnRack, UnknownPart

Vec3 = tuple[float, float, float]


class MotionType(str, Enum):
    ROTATION = "rotation"
    TRANSLATION = "translation"


def _add(a: Vec3, b: Vec3) -> Vec3:
    return (a[0] + b[0], a[1] + b[1], a[2] + b[2])


def _scaled(v: Vec3, k: float) -> Vec3:
    return (v[0] * k, v[1] * k, v[2] * k)


def _absv(v: Vec3) -> Vec3:
    return (abs(v[0]), abs(v[1]), abs(v[2]))


def _cross(a: Vec3, b: Vec3) -> Vec3:
    # + 0.0 normalizes any -0.0 the products produce
    return (
        a[1] * b[2] - a[2] * b[1] + 0.0,
        a[2] * b[0] - a[0] * b[2] + 0.0,
        a[0] * b[1] - a[1] * b[0] + 0.0,
    )


def _negate(v: Vec3) -> Vec3:
    return (-v[0] + 0.0, -v[1] + 0.0, -v[2] + 0.0)


def perp_axis(axis: Vec3, k: int) -> Vec3:
    """Cyclic perpendicular of a signed basis vector: s*e_j -> s*e_(j+k)."""
    for j in range(3):
        if axis[j] != 0:
            out = [0.0, 0.0, 0.0]
            out[(j + k) % 3] = axis[j]
            return tuple(out)   # type: ignore[return-value]
    raise ValueError(f"not a signed basis vector: {axis}")


@dataclass(frozen=True)
class FrameState:
    position: Vec3
    axis: Vec3                 # signed unit basis vector; sign = motion sense
    motion_type: MotionType
    speed_ratio: float         # cumulative, input speed normalized to 1


@dataclass(frozen=True)
class Placement:
    part: str
    center: Vec3
    axis: Vec3                 # motion/mount axis of the part, signed
    box: tuple[float, float, float]   # local extents: along axis, transverse x2


@dataclass(frozen=True)
class SimResult:
    s: float
    p: Vec3
    m: Vec3
    tau_in: MotionType
    tau_out: MotionType
    weight_kg: float
    placements: tuple[Placement, ...]
    mesh_factors: tuple[float, ...]   # per-mesh speed factors, in order

    def to_record(self) -> dict:
        """JSON-ready record with fixed field order, SI units."""
        return {
            "s": self.s,
            "p": list(self.p),
            "m": [int(v) for v in self.m],
            "tau_in": self.tau_in.value,
            "tau_out": self.tau_out.value,
            "weight_kg": self.weight_kg,
            "n_components": len(self.placements),
            "placements": [
                {
                    "part": pl.part,
                    "center": list(pl.center),
                    "axis": [int(v) for v in pl.axis],
                    "box": list(pl.box),
                }
                for pl in self.placements
            ],
        }


def weight_of(seq: GearSequence | tuple[str, ...] | list[str], cat: Catalogue) -> float:
    """Total component weight; interface and sentinel tokens contribute zero."""
    tokens = seq.tokens if isinstance(seq, GearSequence) else tuple(seq)
    total = 0.0
    for tok in tokens:
        if tok in (START, END) or tok in TRA_TOKENS or tok in MESH_TOKENS:
            continue
        total += cat.part(tok).weight_kg
    return total


def apply_translate(state: FrameState, sign: int, shaft: PartRecord) -> FrameState:
    """Move the frame along the unsigned axis by the shaft length."""
    if state.motion_type is not MotionType.ROTATION:
        raise TranslationOnRack("cannot mount a shaft on a translating member")
    length = shaft.length_m or 0.0
    pos = _add(state.position, _scaled(_absv(state.axis), sign * length))
    return FrameState(pos, state.axis, state.motion_type, state.speed_ratio)


def mesh_ratio_factor(cur: PartRecord, nxt: PartRecord) -> float:
    """Speed-ratio factor contributed by one mesh, always positive."""
    if cur.is_rack:
        if nxt.pitch_radius_m is None:
            raise IncompatibleMesh(f"{nxt.part_number} has no pitch radius")
        return 1.0 / nxt.pitch_radius_m          # omega = v / r
    if nxt.is_rack:
        if cur.pitch_radius_m is None:
            raise IncompatibleMesh(f"{cur.part_number} has no pitch radius")
        return cur.pitch_radius_m                # v = omega * r
    return cur.kinematic_teeth / nxt.kinematic_teeth


def apply_mesh(state: FrameState, token: str, cur: PartRecord,
               nxt: PartRecord) -> FrameState:
    """Place ``nxt`` against ``cur`` according to a mesh token."""
    if nxt.part_number not in cur.mesh_partners:
        raise IncompatibleMesh(f"{cur.part_number} cannot mesh {nxt.part_number}")
    k, sign = MESH_TOKENS[token]
    d = _scaled(perp_axis(state.axis, k), sign)
    factor = mesh_ratio_factor(cur, nxt)
    speed = state.speed_ratio * factor

    if cur.is_rack:          # rack -> pinion: axis = d, center offset along travel x d
        u = _cross(state.axis, d)
        pos = _add(state.position, _scaled(u, nxt.pitch_radius_m))
        return FrameState(pos, d, MotionType.ROTATION, speed)
    if nxt.is_rack:          # pinion -> rack: travel = d x axis
        travel = _cross(d, state.axis)
        pos = _add(state.position, _scaled(d, cur.pitch_radius_m))
        return FrameState(pos, travel, MotionType.TRANSLATION, speed)
    if cur.is_spur and nxt.is_spur:   # parallel axes, sense flips
        pos = _add(state.position, _scaled(d, cur.pitch_radius_m + nxt.pitch_radius_m))
        return FrameState(pos, _negate(state.axis), MotionType.ROTATION, speed)
    # perpendicular pair: bevel, miter, worm/wheel, hypoid
    pos = _add(state.position, _scaled(d, cur.pitch_radius_m))
    pos = _add(pos, _scaled(_absv(state.axis), nxt.pitch_radius_m))
    return FrameState(pos, d, MotionType.ROTATION, speed)


def _placement(part: PartRecord, center: Vec3, axis: Vec3) -> Placement:
    return Placement(part.part_number, center, axis, part.bbox_m)


def simulate(seq: GearSequence | tuple[str, ...] | list[str], cat: Catalogue) -> SimResult:
    """Propagate the kinematic frame through a valid sequence."""
    tokens = seq.tokens if isinstance(seq, GearSequence) else tuple(seq)
    violation = validate_grammar(tokens, cat)
    if violation is not None:
        raise InvalidSequence(str(violation))

    components = [t for t in tokens if t not in (START, END)
                  and t not in TRA_TOKENS and t not in MESH_TOKENS]
    tau_in = MotionType.TRANSLATION if cat.part(components[0]).is_rack else MotionType.ROTATION
    tau_out = MotionType.TRANSLATION if cat.part(components[-1]).is_rack else MotionType.ROTATION

    state = FrameState((0.0, 0.0, 0.0), (1.0, 0.0, 0.0), tau_in, 1.0)
    placements: list[Placement] = []
    factors: list[float] = []
    cur: PartRecord | None = None
    pending_tra: int | None = None
    pending_mesh: str | None = None
    weight = 0.0

    for tok in tokens[1:]:
        if tok == END:
            break
        if tok in TRA_TOKENS:
            pending_tra = TRA_TOKENS[tok]
            continue
        if tok in MESH_TOKENS:
            pending_mesh = tok
            continue
        part = cat.part(tok)
        weight += part.weight_kg
        if pending_tra is not None:
            start_pos = state.position
            state = apply_translate(state, pending_tra, part)
            mid = _scaled(_add(start_pos, state.position), 0.5)
            placements.append(_placement(part, mid, state.axis))
            pending_tra = None
        elif pending_mesh is not None:
            assert cur is not None
            factors.append(mesh_ratio_factor(cur, part))
            state = apply_mesh(state, pending_mesh, cur, part)
            placements.append(_placement(part, state.position, state.axis))
            pending_mesh = None
        elif cur is None or cur.is_shaft:
            # leading rack at the origin, or a gear mounted on the shaft
            placements.append(_placement(part, state.position, state.axis))
        else:
            raise InvalidSequence(f"unexpected component {tok}")
        cur = part

    if cur is None:
        raise InvalidSequence("sequence has no components")
    return SimResult(
        s=state.speed_ratio,
        p=state.position,
        m=state.axis,
        tau_in=tau_in,
        tau_out=tau_out,
        weight_kg=weight,
        placements=tuple(placements),
        mesh_factors=tuple(factors),
    )
