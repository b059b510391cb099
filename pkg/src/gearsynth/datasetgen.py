"""Synthetic dataset generation: valid + feasible sequences paired with the
requirement vector their own simulation achieves.

Dataset file format (one record per line, UTF-8):

    tau_in tau_out s px py pz m_index m_sign | token token ...

The eight requirement scalars come first in fixed order, then a ``|``
separator, then the whitespace-joined token sequence. Scalars are written
with ``repr`` so they round-trip exactly. A run also writes ``vocab.txt``
(the 53-token vocabulary, one per line, line index = id) and
``manifest.json`` (counts, seed, catalogue version).
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from pathlib import Path

from .catalogue import Catalogue
from .dsl import MAX_COMPONENTS, GearSequence, random_sequence_two_stage, vocabulary
from .errors import OutputUnwritable, ParseError, TooFewRecords
from .feasibility import is_feasible
from .simulator import MotionType, SimResult, simulate


@dataclass(frozen=True)
class Requirements:
    """The 8-element target vector: motion types, speed ratio, output
    position, output motion axis index and sign."""

    tau_in: int          # 1 = translation, 0 = rotation
    tau_out: int
    s: float
    p: tuple[float, float, float]
    m_index: int         # nonzero coordinate of the output motion vector
    m_sign: int          # +1 or -1

    def to_vector(self) -> tuple[float, ...]:
        return (float(self.tau_in), float(self.tau_out), self.s,
                self.p[0], self.p[1], self.p[2],
                float(self.m_index), float(self.m_sign))

    @classmethod
    def from_vector(cls, values) -> "Requirements":
        v = [float(x) for x in values]
        if len(v) != 8:
            raise ParseError(f"requirement vector needs 8 scalars, got {len(v)}")
        return cls(
            tau_in=int(v[0]), tau_out=int(v[1]), s=v[2],
            p=(v[3], v[4], v[5]), m_index=int(v[6]), m_sign=int(v[7]),
        )

    @property
    def m_vector(self) -> tuple[int, int, int]:
        out = [0, 0, 0]
        out[self.m_index] = self.m_sign
        return tuple(out)   # type: ignore[return-value]


@dataclass(frozen=True)
class DatasetRecord:
    requirements: Requirements
    sequence: GearSequence

    def to_line(self) -> str:
        scalars = " ".join(repr(v) for v in self.requirements.to_vector())
        return f"{scalars} | {self.sequence}"

    @classmethod
    def from_line(cls, line: str) -> "DatasetRecord":
        if "|" not in line:
            raise ParseError(f"bad record line (no separator): {line[:60]!r}")
        left, right = line.split("|", 1)
        req = Requirements.from_vector(left.split())
        return cls(req, GearSequence.from_string(right.strip()))


def encode_requirements(res: SimResult) -> Requirements:
    """Pack a simulation result into the 8-element requirement layout."""
    m_index = next(i for i in range(3) if res.m[i] != 0)
    return Requirements(
        tau_in=1 if res.tau_in is MotionType.TRANSLATION else 0,
        tau_out=1 if res.tau_out is MotionType.TRANSLATION else 0,
        s=res.s,
        p=res.p,
        m_index=m_index,
        m_sign=1 if res.m[m_index] > 0 else -1,
    )


def generate_records(n_target: int, cat: Catalogue, seed: int | None = 0,
                     max_components: int = MAX_COMPONENTS):
    """Yield ``n_target`` unique valid + feasible records with running
    rejection counts.

    Draws use the two-stage construction (uniform component-type sequence,
    then uniform compatible tokens), which weights the pool toward long
    designs; infeasible and duplicate draws are discarded."""
    if n_target < 1:
        raise ValueError("n_target must be >= 1")
    rng = random.Random(seed)
    seen: set[tuple[str, ...]] = set()
    rejected_infeasible = 0
    rejected_duplicate = 0
    accepted = 0
    while accepted < n_target:
        seq = random_sequence_two_stage(cat, rng, max_components=max_components)
        if seq.tokens in seen:
            rejected_duplicate += 1
            continue
        res = simulate(seq, cat)
        if not is_feasible(res.placements):
            rejected_infeasible += 1
            continue
        seen.add(seq.tokens)
        accepted += 1
        yield DatasetRecord(encode_requirements(res), seq), {
            "accepted": accepted,
            "rejected_invalid": 0,
            "rejected_infeasible": rejected_infeasible,
            "rejected_duplicate": rejected_duplicate,
        }


def generate_dataset(n_target: int, max_components: int, seed: int | None,
                     out_dir: str | Path, cat: Catalogue) -> dict:
    """Write ``records.txt``, ``vocab.txt`` and ``manifest.json`` under
    ``out_dir``; returns the manifest."""
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        counts = {}
        with (out / "records.txt").open("w", encoding="utf-8") as f:
            for record, counts in generate_records(n_target, cat, seed, max_components):
                f.write(record.to_line() + "\n")
        (out / "vocab.txt").write_text("\n".join(vocabulary(cat)) + "\n", encoding="utf-8")
        manifest = {
            **counts,
            "n_target": n_target,
            "max_components": max_components,
            "seed": seed,
            "catalogue_version": cat.version,
        }
        (out / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n",
                                           encoding="utf-8")
    except OSError as exc:
        raise OutputUnwritable(f"cannot write dataset to {out}: {exc}") from exc
    return manifest


def load_records(path: str | Path) -> list[DatasetRecord]:
    records = []
    with Path(path).open(encoding="utf-8") as f:
        for line in f:
            line = line.strip()
            if line:
                records.append(DatasetRecord.from_line(line))
    return records


def split_records(records: list[DatasetRecord], val_frac: float = 0.0005,
                  test_frac: float = 0.0005, seed: int | None = 0,
                  ) -> tuple[list[DatasetRecord], list[DatasetRecord], list[DatasetRecord]]:
    """Seeded shuffle into disjoint, exhaustive (train, val, test) lists.

    Split sizes use the floor of n*fraction."""
    if not (0 < val_frac < 1 and 0 < test_frac < 1 and val_frac + test_frac < 1):
        raise ValueError("fractions must lie in (0,1) and sum below 1")
    n = len(records)
    n_val = int(n * val_frac)
    n_test = int(n * test_frac)
    n_train = n - n_val - n_test
    if n_val == 0 or n_test == 0 or n_train <= 0:
        raise TooFewRecords(f"{n} records cannot fill a {val_frac}/{test_frac} split")
    shuffled = list(records)
    random.Random(seed).shuffle(shuffled)
    val = shuffled[:n_val]
    test = shuffled[n_val:n_val + n_test]
    train = shuffled[n_val + n_test:]
    return train, val, test


def split_dataset(records_path: str | Path, out_dir: str | Path,
                  val_frac: float = 0.0005, test_frac: float = 0.0005,
                  seed: int | None = 0) -> dict:
    """Split a records file into train/val/test files next to a manifest."""
    records = load_records(records_path)
    train, val, test = split_records(records, val_frac, test_frac, seed)
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        for name, part in (("train", train), ("val", val), ("test", test)):
            with (out / f"{name}.txt").open("w", encoding="utf-8") as f:
                for record in part:
                    f.write(record.to_line() + "\n")
    except OSError as exc:
        raise OutputUnwritable(f"cannot write split to {out}: {exc}") from exc
    return {"train": len(train), "val": len(val), "test": len(test),
            "seed": seed, "val_frac": val_frac, "test_frac": test_frac}
