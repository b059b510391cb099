"""Parts catalogue: geometry, weight and mesh-compatibility data.

The catalogue is loaded from a versioned TSV data file (see
``data/catalogue_v1.tsv``). Weights and box extents in the shipped file are
deterministic estimates from a documented geometric proxy; the toolkit only
depends on their relative magnitudes, and the file can be replaced with
measured data as long as the schema and invariants hold.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from importlib import resources
from pathlib import Path

from .errors import (
    AsymmetricMesh,
    MissingPart,
    ModuleMismatch,
    NegativeLength,
    ParseError,
    UnknownPart,
)

CATALOGUE_VERSION = "gear-catalogue/1"

STEEL_DENSITY = 7850.0   # kg/m^3, carbon steel
SHAFT_RADIUS = 0.005     # m, all shafts are 10 mm diameter


class ComponentType(str, Enum):
    SHAFT = "shaft"
    RACK = "rack"
    SPUR = "spur"
    BEVEL = "bevel"
    MITER = "miter"
    WORM = "worm"
    WORM_WHEEL = "worm_wheel"
    HYPOID_PINION = "hypoid_pinion"
    HYPOID_RING = "hypoid_ring"


# Every part number the default lexicon requires, grouped as in the vendor
# listing. 44 entries: 6 shafts, 4 racks, 16 spur, 6 bevel, 2 miter,
# 1 worm + 3 wheels, 3 hypoid pinions + 3 rings.
EXPECTED_PARTS: tuple[str, ...] = (
    "SH-*", "SH-100", "SH-200", "SH-300", "SH-400", "SH-500",
    "MRGF1.5-500", "MRGF2-500", "MRGF2.5-500", "MRGF3-500",
    "MSGA1.5-20", "MSGA1.5-40", "MSGA1.5-60", "MSGA1.5-80",
    "MSGA2-18", "MSGA2-25", "MSGA2-40", "MSGA2-60",
    "MSGA2.5-15", "MSGA2.5-40", "MSGA2.5-55", "MSGA2.5-70",
    "MSGA3-15", "MSGA3-30", "MSGA3-45", "MSGA3-60",
    "SBSG2-3020R", "SBSG2-2030L", "SBSG2-4020R", "SBSG2-2040L",
    "SBSG2-4515R", "SBSG2-1545L",
    "MMSG2-20R", "MMSG2-20L",
    "SWG1-R1", "AG1-20R1", "AG1-40R1", "AG1-60R1",
    "MHP1-3045L", "MHP1-2060L", "MHP1-1045L",
    "MHP1-0453R", "MHP1-0602R", "MHP1-0451R",
)


@dataclass(frozen=True)
class PartRecord:
    """One catalogue entry.

    ``bbox_m`` is the local axis-aligned extent: (along motion axis,
    transverse, transverse). ``mesh_partners`` holds the part numbers this
    part can mesh with; the set is symmetric across the catalogue.
    """

    part_number: str
    component_type: ComponentType
    module_mm: float | None
    teeth: int | None
    pitch_radius_m: float | None
    length_m: float | None
    bbox_m: tuple[float, float, float]
    weight_kg: float
    handedness: str   # "R", "L" or "none"
    mesh_partners: frozenset[str]

    @property
    def is_shaft(self) -> bool:
        return self.component_type is ComponentType.SHAFT

    @property
    def is_rack(self) -> bool:
        return self.component_type is ComponentType.RACK

    @property
    def is_spur(self) -> bool:
        return self.component_type is ComponentType.SPUR

    @property
    def is_toothed(self) -> bool:
        return not self.is_shaft

    @property
    def kinematic_teeth(self) -> int:
        """Tooth count used for speed ratios; a worm acts as single-start."""
        if self.component_type is ComponentType.WORM:
            return 1
        if self.teeth is None:
            raise UnknownPart(f"{self.part_number} has no teeth")
        return self.teeth


class Catalogue:
    """Immutable part registry. Safe for unrestricted concurrent reads."""

    def __init__(self, parts: dict[str, PartRecord], version: str):
        self._parts = dict(parts)   # insertion order defines the vocabulary order
        self.version = version

    @property
    def parts(self) -> dict[str, PartRecord]:
        return dict(self._parts)

    def part_numbers(self) -> tuple[str, ...]:
        return tuple(self._parts)

    def __len__(self) -> int:
        return len(self._parts)

    def __contains__(self, part_number: str) -> bool:
        return part_number in self._parts

    def part(self, part_number: str) -> PartRecord:
        try:
            return self._parts[part_number]
        except KeyError:
            raise UnknownPart(part_number) from None

    def mesh_compatible(self, a: str, b: str) -> bool:
        """True iff parts ``a`` and ``b`` may mesh."""
        pa = self.part(a)
        self.part(b)
        return b in pa.mesh_partners

    def iter_parts(self):
        return iter(self._parts.values())


def shaft_weight(length_m: float) -> float:
    """Weight in kg of a 10 mm carbon-steel shaft of the given length."""
    if length_m < 0:
        raise NegativeLength(f"shaft length {length_m} < 0")
    return STEEL_DENSITY * math.pi * SHAFT_RADIUS**2 * length_m


def default_catalogue_path() -> Path:
    return Path(str(resources.files("gearsynth").joinpath("data/catalogue_v1.tsv")))


def _parse_float(field: str, line_no: int, name: str) -> float | None:
    if field == "-":
        return None
    try:
        return float(field)
    except ValueError:
        raise ParseError(f"line {line_no}: bad {name} {field!r}") from None


def load_catalogue(path: str | Path | None = None) -> Catalogue:
    """Load and validate a catalogue data file.

    The first line must carry a known version string. All structural
    invariants (part completeness, partner symmetry, module equality across
    partners, pitch-radius consistency, SH-* zero weight) are verified here so
    downstream code can trust the data.
    """
    path = Path(path) if path is not None else default_catalogue_path()
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read catalogue file {path}: {exc}") from exc

    lines = text.splitlines()
    if not lines or not lines[0].lstrip("# ").startswith("gear-catalogue/"):
        raise ParseError(f"{path}: missing catalogue version line")
    version = lines[0].lstrip("# ").strip()
    if version != CATALOGUE_VERSION:
        raise ParseError(f"{path}: unsupported catalogue version {version!r}")

    parts: dict[str, PartRecord] = {}
    for line_no, raw in enumerate(lines[1:], start=2):
        line = raw.rstrip("\n")
        if not line or line.startswith("#"):
            continue
        cols = line.split("\t")
        if len(cols) != 12:
            raise ParseError(f"line {line_no}: expected 12 columns, got {len(cols)}")
        (pn, typ, module_s, teeth_s, radius_s, length_s,
         bx, bt1, bt2, weight_s, hand, partners_s) = cols
        try:
            ctype = ComponentType(typ)
        except ValueError:
            raise ParseError(f"line {line_no}: unknown component type {typ!r}") from None
        module = _parse_float(module_s, line_no, "module_mm")
        radius = _parse_float(radius_s, line_no, "pitch_radius_m")
        length = _parse_float(length_s, line_no, "length_m")
        weight = _parse_float(weight_s, line_no, "weight_kg")
        if weight is None or weight < 0:
            raise ParseError(f"line {line_no}: weight must be a non-negative number")
        teeth = None
        if teeth_s != "-":
            try:
                teeth = int(teeth_s)
            except ValueError:
                raise ParseError(f"line {line_no}: bad teeth {teeth_s!r}") from None
            if teeth <= 0:
                raise ParseError(f"line {line_no}: teeth must be positive")
        bbox = tuple(_parse_float(v, line_no, "bbox_m") for v in (bx, bt1, bt2))
        if any(v is None or v < 0 for v in bbox):
            raise ParseError(f"line {line_no}: bbox extents must be non-negative")
        if hand not in ("R", "L", "none"):
            raise ParseError(f"line {line_no}: bad handedness {hand!r}")
        partners = frozenset() if partners_s == "-" else frozenset(partners_s.split(","))
        if pn in parts:
            raise ParseError(f"line {line_no}: duplicate part {pn!r}")
        parts[pn] = PartRecord(
            part_number=pn, component_type=ctype, module_mm=module, teeth=teeth,
            pitch_radius_m=radius, length_m=length, bbox_m=bbox,  # type: ignore[arg-type]
            weight_kg=weight, handedness=hand, mesh_partners=partners,
        )

    for expected in EXPECTED_PARTS:
        if expected not in parts:
            raise MissingPart(expected)

    for part in parts.values():
        if part.is_shaft:
            if part.length_m is None:
                raise ParseError(f"{part.part_number}: shaft without length")
            continue
        if part.module_mm is None or part.teeth is None or part.pitch_radius_m is None:
            raise ParseError(f"{part.part_number}: toothed part missing module/teeth/radius")
        want = part.module_mm * part.teeth / 2000.0
        if not math.isclose(part.pitch_radius_m, want, rel_tol=0, abs_tol=1e-12):
            raise ParseError(
                f"{part.part_number}: pitch radius {part.pitch_radius_m} != module*teeth/2000"
            )
        for other_pn in part.mesh_partners:
            other = parts.get(other_pn)
            if other is None:
                raise ParseError(f"{part.part_number}: unknown partner {other_pn!r}")
            if other.module_mm != part.module_mm:
                raise ModuleMismatch(
                    f"{part.part_number} (m={part.module_mm}) listed with "
                    f"{other_pn} (m={other.module_mm})"
                )
            if part.part_number not in other.mesh_partners:
                raise AsymmetricMesh(f"{part.part_number} -> {other_pn} not reciprocated")

    if parts["SH-*"].weight_kg != 0.0:
        raise ParseError("SH-* must have exactly zero weight")

    return Catalogue(parts, version)
