import json
from collections import Counter

import pytest

from gearsynth.datasetgen import (
    DatasetRecord,
    Requirements,
    encode_requirements,
    generate_dataset,
    load_records,
    split_dataset,
    split_records,
)
from gearsynth.dsl import END, START, GearSequence
from gearsynth.errors import TooFewRecords
from gearsynth.simulator import simulate


def test_encode_requirements_packing(cat):
    res = simulate((START, "tra+", "SH-100", END), cat)
    req = encode_requirements(res)
    assert req.to_vector() == (0.0, 0.0, 1.0, 0.1, 0.0, 0.0, 0.0, 1.0)

    # rotation in, translation out, m = -e2
    res = simulate((START, "tra+", "SH-100", "MSGA2-40", "mesh_1p", "MRGF2-500", END),
                   cat)
    req = encode_requirements(res)
    assert req.tau_in == 0 and req.tau_out == 1
    assert req.m_index == 2 and req.m_sign == -1
    assert req.m_vector == (0, 0, -1)


def test_requirements_vector_round_trip():
    req = Requirements(0, 1, 0.5, (0.2, 0.1, 0.0), 1, 1)
    assert req.to_vector() == (0.0, 1.0, 0.5, 0.2, 0.1, 0.0, 1.0, 1.0)
    assert Requirements.from_vector(req.to_vector()) == req


def test_record_line_round_trip(cat):
    res = simulate((START, "tra+", "SH-100", END), cat)
    record = DatasetRecord(encode_requirements(res),
                           GearSequence((START, "tra+", "SH-100", END)))
    assert DatasetRecord.from_line(record.to_line()) == record


def test_generate_dataset_deterministic_and_consistent(cat, tmp_path):
    m1 = generate_dataset(300, 10, 7, tmp_path / "a", cat)
    m2 = generate_dataset(300, 10, 7, tmp_path / "b", cat)
    bytes_a = (tmp_path / "a" / "records.txt").read_bytes()
    assert bytes_a == (tmp_path / "b" / "records.txt").read_bytes()
    assert m1 == m2
    assert m1["accepted"] == 300
    assert m1["rejected_invalid"] == 0
    assert m1["rejected_infeasible"] > 0
    assert m1["catalogue_version"] == cat.version

    records = load_records(tmp_path / "a" / "records.txt")
    assert len(records) == 300
    assert len({r.sequence.tokens for r in records}) == 300
    for record in records:
        res = simulate(record.sequence, cat)
        assert encode_requirements(res) == record.requirements

    vocab_lines = (tmp_path / "a" / "vocab.txt").read_text().splitlines()
    assert len(vocab_lines) == 53
    manifest = json.loads((tmp_path / "a" / "manifest.json").read_text())
    assert manifest["seed"] == 7


def _dummy_records(n):
    req = Requirements(0, 0, 1.0, (0.1, 0.0, 0.0), 0, 1)
    return [DatasetRecord(req, GearSequence((START, f"T{i}", END)))
            for i in range(n)]


def test_split_exact_partition():
    records = _dummy_records(10_000)
    train, val, test = split_records(records, 0.05, 0.05, seed=3)
    assert (len(train), len(val), len(test)) == (9000, 500, 500)
    union = Counter(r.sequence.tokens for r in train + val + test)
    assert union == Counter(r.sequence.tokens for r in records)


def test_split_floor_semantics():
    # the published split takes the floor: 0.05% of 7,363,640 -> 3,681
    assert int(7_363_640 * 0.0005) == 3681
    train, val, test = split_records(_dummy_records(73_637), 0.0005, 0.0005, seed=0)
    assert len(val) == len(test) == 36
    assert len(train) == 73_637 - 72


def test_split_too_few_records():
    with pytest.raises(TooFewRecords):
        split_records(_dummy_records(100), 0.001, 0.001, seed=0)


def test_split_dataset_files(cat, tmp_path):
    generate_dataset(200, 8, 1, tmp_path / "data", cat)
    counts = split_dataset(tmp_path / "data" / "records.txt", tmp_path / "splits",
                           val_frac=0.05, test_frac=0.05, seed=2)
    assert counts == {"train": 180, "val": 10, "test": 10, "seed": 2,
                      "val_frac": 0.05, "test_frac": 0.05}
    total = 0
    for name in ("train", "val", "test"):
        total += len(load_records(tmp_path / "splits" / f"{name}.txt"))
    assert total == 200
