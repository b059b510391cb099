import math
from pathlib import Path

import pytest

from gearsynth.catalogue import (
    ComponentType,
    default_catalogue_path,
    load_catalogue,
    shaft_weight,
)
from gearsynth.errors import (
    AsymmetricMesh,
    MissingPart,
    ModuleMismatch,
    NegativeLength,
    ParseError,
    UnknownPart,
)

from .oracles import cylinder_mass


def test_default_catalogue_counts(cat):
    assert len(cat) == 44
    by_type = {}
    for part in cat.iter_parts():
        by_type.setdefault(part.component_type, []).append(part)
    assert len(by_type[ComponentType.SHAFT]) == 6
    assert len(by_type[ComponentType.RACK]) == 4
    assert len(by_type[ComponentType.SPUR]) == 16
    assert len(by_type[ComponentType.BEVEL]) == 6
    assert len(by_type[ComponentType.MITER]) == 2
    assert len(by_type[ComponentType.WORM]) == 1
    assert len(by_type[ComponentType.WORM_WHEEL]) == 3
    assert len(by_type[ComponentType.HYPOID_PINION]) == 3
    assert len(by_type[ComponentType.HYPOID_RING]) == 3
    assert cat.version == "gear-catalogue/1"


def test_shaft_weights_match_cylinder_oracle(cat):
    # solid steel cylinder, r = 5 mm
    assert shaft_weight(0.0) == 0.0
    assert abs(shaft_weight(0.1) - cylinder_mass(0.005, 0.1)) == 0.0
    assert abs(shaft_weight(0.1) - 0.061654) < 1e-6
    assert math.isclose(shaft_weight(0.5), 5 * shaft_weight(0.1), rel_tol=1e-12)
    for pn, length in [("SH-100", 0.1), ("SH-200", 0.2), ("SH-300", 0.3),
                       ("SH-400", 0.4), ("SH-500", 0.5)]:
        assert math.isclose(cat.part(pn).weight_kg, cylinder_mass(0.005, length),
                            rel_tol=1e-9)
    assert cat.part("SH-*").weight_kg == 0.0


def test_shaft_weight_rejects_negative():
    with pytest.raises(NegativeLength):
        shaft_weight(-0.1)


def test_mesh_compatibility_examples(cat):
    assert cat.mesh_compatible("MRGF2-500", "MSGA2-40")
    assert cat.mesh_compatible("MSGA2-18", "MSGA2-18")
    assert not cat.mesh_compatible("MRGF1.5-500", "MSGA2-18")
    assert cat.mesh_compatible("SBSG2-3020R", "SBSG2-2030L")
    assert not cat.mesh_compatible("SBSG2-3020R", "SBSG2-2040L")
    assert cat.mesh_compatible("MMSG2-20R", "MMSG2-20L")
    assert cat.mesh_compatible("SWG1-R1", "AG1-60R1")
    assert cat.mesh_compatible("MHP1-3045L", "MHP1-0453R")
    assert not cat.mesh_compatible("MHP1-3045L", "MHP1-0602R")
    with pytest.raises(UnknownPart):
        cat.mesh_compatible("NOPE-1", "MSGA2-18")


def test_mesh_symmetry_and_rack_exclusions(cat):
    for part in cat.iter_parts():
        for other in part.mesh_partners:
            assert part.part_number in cat.part(other).mesh_partners
            assert cat.part(other).module_mm == part.module_mm
        if part.is_rack:
            assert all(not cat.part(p).is_rack for p in part.mesh_partners)
        if part.is_shaft:
            assert not part.mesh_partners


def test_pitch_radius_teeth_invariant(cat):
    for part in cat.iter_parts():
        if part.is_shaft:
            continue
        ratio = 2000 * part.pitch_radius_m / part.module_mm
        assert ratio == round(ratio)
        assert int(round(ratio)) == part.teeth


def test_weights_positive_and_finite(cat):
    total = sum(p.weight_kg for p in cat.iter_parts())
    assert 0 < total < math.inf
    assert all(p.weight_kg >= 0 for p in cat.iter_parts())


def _patched_catalogue(tmp_path: Path, patch) -> Path:
    lines = default_catalogue_path().read_text(encoding="utf-8").splitlines()
    lines = patch(lines)
    out = tmp_path / "catalogue.tsv"
    out.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return out


def test_loader_missing_part(tmp_path):
    path = _patched_catalogue(
        tmp_path, lambda ls: [l for l in ls if not l.startswith("SWG1-R1\t")])
    with pytest.raises(MissingPart):
        load_catalogue(path)


def test_loader_module_mismatch(tmp_path):
    def patch(lines):
        out = []
        for line in lines:
            if line.startswith("MSGA2-40\t"):
                line = line.replace("MRGF2-500", "MRGF2-500,MSGA3-30")
            out.append(line)
        return out

    with pytest.raises(ModuleMismatch):
        load_catalogue(_patched_catalogue(tmp_path, patch))


def test_loader_asymmetric_mesh(tmp_path):
    # MMSG2-20R shares module 2 with MSGA2-40, so only symmetry is violated
    def patch(lines):
        return [line.replace("MRGF2-500", "MRGF2-500,MMSG2-20R")
                if line.startswith("MSGA2-40\t") else line
                for line in lines]

    with pytest.raises(AsymmetricMesh):
        load_catalogue(_patched_catalogue(tmp_path, patch))


def test_loader_rejects_unknown_version(tmp_path):
    def patch(lines):
        return ["# gear-catalogue/99"] + lines[1:]

    with pytest.raises(ParseError):
        load_catalogue(_patched_catalogue(tmp_path, patch))


def test_loader_rejects_bad_schema(tmp_path):
    path = tmp_path / "catalogue.tsv"
    path.write_text("# gear-catalogue/1\nSH-100\tshaft\n", encoding="utf-8")
    with pytest.raises(ParseError):
        load_catalogue(path)


def test_worm_is_kinematically_single_start(cat):
    assert cat.part("SWG1-R1").kinematic_teeth == 1
    assert cat.part("AG1-60R1").kinematic_teeth == 60
