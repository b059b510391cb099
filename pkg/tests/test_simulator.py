import math
import random

import pytest

from gearsynth.dsl import END, START, random_valid_sequence
from gearsynth.errors import IncompatibleMesh, InvalidSequence, TranslationOnRack
from gearsynth.simulator import (
    FrameState,
    MotionType,
    apply_mesh,
    apply_translate,
    mesh_ratio_factor,
    perp_axis,
    simulate,
    weight_of,
)

from .oracles import cylinder_mass

PAPER_EXAMPLE = ("<start>", "MRGF2-500", "mesh_2n", "MSGA2-40", "tra-", "SH-200",
                 "SBSG2-3020R", "mesh_1p", "SBSG2-2030L", "<end>")


def test_single_shaft(cat):
    res = simulate((START, "tra+", "SH-100", END), cat)
    assert res.s == 1.0
    assert res.p == (0.1, 0.0, 0.0)
    assert res.m == (1.0, 0.0, 0.0)
    assert res.tau_in is MotionType.ROTATION
    assert res.tau_out is MotionType.ROTATION
    assert math.isclose(res.weight_kg, cylinder_mass(0.005, 0.1), rel_tol=1e-12)
    assert len(res.placements) == 1


def test_zero_length_shaft_contributes_nothing(cat):
    res = simulate((START, "tra+", "SH-*", END), cat)
    assert res.p == (0.0, 0.0, 0.0)
    assert res.weight_kg == 0.0
    # mid-sequence SH-* keeps the mounted gear at the previous gear's center
    res = simulate((START, "tra+", "SH-*", "MSGA2-18", "mesh_1p", "MSGA2-60", END), cat)
    assert res.placements[1].center == (0.0, 0.0, 0.0)
    assert res.placements[2].center == (0.0, 0.078, 0.0)


def test_spur_pair_hand_values(cat):
    # pitch radii 0.018 and 0.060 m; +e0 axis makes perp1 = +e1
    res = simulate((START, "tra+", "SH-100", "MSGA2-18", "mesh_1p", "MSGA2-60", END),
                   cat)
    assert res.s == 18 / 60
    assert res.placements[-1].center == (0.1, 0.078, 0.0)
    assert res.m == (-1.0, 0.0, 0.0)
    assert res.p == (0.1, 0.078, 0.0)


def test_worm_pair_ratio(cat):
    res = simulate((START, "tra+", "SH-100", "SWG1-R1", "mesh_1p", "AG1-60R1", END),
                   cat)
    assert res.s == 1 / 60
    # wheel sits one worm radius sideways, one wheel radius ahead
    assert res.placements[-1].center == (0.1 + 0.03, 0.0045, 0.0)
    rev = simulate((START, "tra+", "SH-100", "AG1-60R1", "mesh_1p", "SWG1-R1", END),
                   cat)
    assert rev.s == 60.0


def test_ratio_factor_inverse_product(cat):
    a, b = cat.part("MSGA2-18"), cat.part("MSGA2-60")
    assert mesh_ratio_factor(a, b) == 18 / 60
    assert mesh_ratio_factor(b, a) == 60 / 18
    assert math.isclose(mesh_ratio_factor(a, b) * mesh_ratio_factor(b, a), 1.0,
                        rel_tol=1e-12)


def test_apply_translate_examples(cat):
    state = FrameState((0.0, 0.0, 0.0), (1.0, 0.0, 0.0), MotionType.ROTATION, 1.0)
    sh200 = cat.part("SH-200")
    assert apply_translate(state, +1, sh200).position == (0.2, 0.0, 0.0)
    assert apply_translate(state, -1, sh200).position == (-0.2, 0.0, 0.0)
    assert apply_translate(state, +1, cat.part("SH-*")).position == (0.0, 0.0, 0.0)
    # translation moves along the unsigned axis even when the sense is flipped
    flipped = FrameState((0.0, 0.0, 0.0), (-1.0, 0.0, 0.0), MotionType.ROTATION, 1.0)
    assert apply_translate(flipped, +1, sh200).position == (0.2, 0.0, 0.0)
    translating = FrameState((0.0, 0.0, 0.0), (1.0, 0.0, 0.0),
                             MotionType.TRANSLATION, 1.0)
    with pytest.raises(TranslationOnRack):
        apply_translate(translating, +1, sh200)


def test_perp_axis_cyclic_convention():
    # motion axis e2 with (perp1, -) places along -e0
    assert perp_axis((0.0, 0.0, 1.0), 1) == (1.0, 0.0, 0.0)
    assert perp_axis((1.0, 0.0, 0.0), 1) == (0.0, 1.0, 0.0)
    assert perp_axis((1.0, 0.0, 0.0), 2) == (0.0, 0.0, 1.0)
    assert perp_axis((0.0, -1.0, 0.0), 1) == (0.0, 0.0, -1.0)


def test_apply_mesh_axis_example(cat):
    state = FrameState((0.0, 0.0, 0.0), (0.0, 0.0, 1.0), MotionType.ROTATION, 1.0)
    out = apply_mesh(state, "mesh_1n", cat.part("SBSG2-3020R"),
                     cat.part("SBSG2-2030L"))
    assert out.axis == (-1.0, 0.0, 0.0)
    # center: -e0 * r_cur + |e2| * r_next
    assert out.position == (-0.03, 0.0, 0.02)
    with pytest.raises(IncompatibleMesh):
        apply_mesh(state, "mesh_1n", cat.part("SBSG2-3020R"), cat.part("MSGA2-18"))


def test_double_spur_flip_restores_sense(cat):
    res = simulate((START, "tra+", "SH-100", "MSGA2-18", "mesh_1p", "MSGA2-60",
                    "mesh_2p", "MSGA2-25", END), cat)
    assert res.m == (1.0, 0.0, 0.0)   # two flips cancel


def test_multiplicativity_and_weight_additivity(cat):
    rng = random.Random(777)
    for _ in range(300):
        seq = random_valid_sequence(cat, rng=rng)
        res = simulate(seq, cat)
        assert math.prod(res.mesh_factors) == res.s
        total = 0.0
        for token in seq.component_tokens:
            total += cat.part(token).weight_kg
        assert total == res.weight_kg
        assert res.weight_kg >= 0.0


def test_axis_closure(cat):
    rng = random.Random(31)
    basis = {(1.0, 0.0, 0.0), (-1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.0, -1.0, 0.0),
             (0.0, 0.0, 1.0), (0.0, 0.0, -1.0)}
    for _ in range(300):
        res = simulate(random_valid_sequence(cat, rng=rng), cat)
        assert res.m in basis
        for placement in res.placements:
            assert placement.axis in basis


def test_motion_type_matches_rack_placement(cat):
    rng = random.Random(13)
    for _ in range(300):
        seq = random_valid_sequence(cat, rng=rng)
        res = simulate(seq, cat)
        first, last = seq.component_tokens[0], seq.component_tokens[-1]
        assert (res.tau_in is MotionType.TRANSLATION) == cat.part(first).is_rack
        assert (res.tau_out is MotionType.TRANSLATION) == cat.part(last).is_rack


def test_paper_example_full_result(cat):
    res = simulate(PAPER_EXAMPLE, cat)
    assert res.tau_in is MotionType.TRANSLATION
    assert res.tau_out is MotionType.ROTATION
    # rack -> pinion 1/r(=0.04), then bevel 30:20
    assert math.isclose(res.s, (1 / 0.04) * (30 / 20), rel_tol=1e-12)
    assert res.p == (-0.03, 0.04, -0.18000000000000002)
    assert res.m == (-1.0, 0.0, 0.0)
    expected_weight = sum(cat.part(p).weight_kg for p in
                          ("MRGF2-500", "MSGA2-40", "SH-200",
                           "SBSG2-3020R", "SBSG2-2030L"))
    assert math.isclose(res.weight_kg, expected_weight, rel_tol=1e-12)


def test_weight_of_matches_simulate_and_is_additive(cat):
    assert weight_of((START, "tra+", "SH-*", END), cat) == 0.0
    seq_a = (START, "tra+", "SH-100", END)
    seq_b = (START, "tra-", "SH-200", END)
    combined = weight_of(seq_a, cat) + weight_of(seq_b, cat)
    assert math.isclose(combined, cat.part("SH-100").weight_kg
                        + cat.part("SH-200").weight_kg, rel_tol=1e-12)
    assert weight_of(PAPER_EXAMPLE, cat) == simulate(PAPER_EXAMPLE, cat).weight_kg


def test_simulate_rejects_invalid(cat):
    with pytest.raises(InvalidSequence):
        simulate((START, "MRGF2-500", END), cat)


def test_determinism(cat):
    seq = random_valid_sequence(cat, seed=5)
    assert simulate(seq, cat) == simulate(seq, cat)


def test_rack_to_pinion_geometry(cat):
    # travel +e0, token (perp2, -): pinion axis -e2, center r_pinion along
    # cross(travel, d) = e0 x -e2 = +e1
    res = simulate((START, "MRGF2-500", "mesh_2n", "MSGA2-40", END), cat)
    assert res.placements[-1].axis == (0.0, 0.0, -1.0)
    assert res.placements[-1].center == (0.0, 0.04, 0.0)
    assert res.s == 1 / 0.04
    assert res.tau_in is MotionType.TRANSLATION
    assert res.tau_out is MotionType.ROTATION


def test_pinion_to_rack_geometry(cat):
    # axis +e0 pinion, token (perp1, +): d=+e1, rack center r_pinion up,
    # travel cross(d, axis) = e1 x e0 = -e2
    res = simulate((START, "tra+", "SH-100", "MSGA2-40", "mesh_1p", "MRGF2-500", END),
                   cat)
    assert res.placements[-1].center == (0.1, 0.04, 0.0)
    assert res.placements[-1].axis == (0.0, 0.0, -1.0)
    assert res.tau_out is MotionType.TRANSLATION
    assert res.s == 0.04
    assert res.mesh_factors == (0.04,)


def test_position_additivity_for_shaft_and_spur_chains(cat):
    # spur meshes move the frame only perpendicular to the axis, so the axis
    # coordinate is exactly the signed sum of shaft lengths
    rng = random.Random(4242)
    checked = 0
    while checked < 100:
        seq = random_valid_sequence(cat, rng=rng)
        parts = [cat.part(t) for t in seq.component_tokens]
        if not all(p.is_shaft or p.is_spur for p in parts):
            continue
        expected_x = 0.0
        sign = None
        for token in seq.tokens:
            if token == "tra+":
                sign = +1
            elif token == "tra-":
                sign = -1
            elif sign is not None:
                expected_x += sign * (cat.part(token).length_m or 0.0)
                sign = None
        res = simulate(seq, cat)
        assert abs(res.p[0] - expected_x) < 1e-12
        checked += 1
