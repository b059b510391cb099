"""Evaluation metrics over (requirements, predicted sequence) pairs.

Validity and feasibility are rates over the whole pair set; the remaining
metrics are computed over the valid pairs only, since only those simulate.
The speed metric is the root mean squared logarithmic error with the natural
log of the raw ratio (ratios span many decades, so log(1+x) would collapse
the small end).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .catalogue import Catalogue
from .datasetgen import Requirements
from .dsl import GearSequence, validate_grammar
from .errors import LengthMismatch, NonPositiveRatio
from .feasibility import is_feasible
from .simulator import MotionType, simulate


def rmsle(targets, achieved) -> float:
    """sqrt(mean((ln t - ln a)^2)) over positive ratio pairs."""
    targets = list(targets)
    achieved = list(achieved)
    if len(targets) != len(achieved):
        raise LengthMismatch(f"{len(targets)} targets vs {len(achieved)} achieved")
    if not targets:
        raise LengthMismatch("empty input")
    total = 0.0
    for t, a in zip(targets, achieved):
        if t <= 0 or a <= 0:
            raise NonPositiveRatio(f"ratios must be positive, got {t}, {a}")
        total += (math.log(t) - math.log(a)) ** 2
    return math.sqrt(total / len(targets))


@dataclass(frozen=True)
class EvalReport:
    n_total: int
    n_valid: int
    valid_pct: float
    feas_pct: float
    pos_m: float | None
    speed_rmsle: float | None
    motvec_pct: float | None
    inmot_pct: float | None
    outmot_pct: float | None
    weight_kg: float | None

    COLUMNS = ("Valid", "Feas", "Pos", "Speed", "MotVec", "In-Mot", "Out-Mot", "Weight")

    def row(self) -> tuple:
        return (self.valid_pct, self.feas_pct, self.pos_m, self.speed_rmsle,
                self.motvec_pct, self.inmot_pct, self.outmot_pct, self.weight_kg)

    def to_dict(self) -> dict:
        return {
            "n_total": self.n_total,
            "n_valid": self.n_valid,
            "valid_pct": self.valid_pct,
            "feas_pct": self.feas_pct,
            "pos_m": self.pos_m,
            "speed_rmsle": self.speed_rmsle,
            "motvec_pct": self.motvec_pct,
            "inmot_pct": self.inmot_pct,
            "outmot_pct": self.outmot_pct,
            "weight_kg": self.weight_kg,
        }


def evaluate_set(pairs, cat: Catalogue) -> EvalReport:
    """Score a set of (Requirements, GearSequence) pairs.

    Invalid sequences count against the validity rate and are excluded from
    the remaining metrics."""
    pairs = list(pairs)
    n_total = len(pairs)
    n_valid = 0
    n_feas = 0
    pos_sum = 0.0
    sq_log_sum = 0.0
    n_speed = 0
    n_motvec = 0
    n_inmot = 0
    n_outmot = 0
    weight_sum = 0.0

    for req, seq in pairs:
        if validate_grammar(seq, cat) is not None:
            continue
        res = simulate(seq, cat)
        n_valid += 1
        if is_feasible(res.placements):
            n_feas += 1
        dx = req.p[0] - res.p[0]
        dy = req.p[1] - res.p[1]
        dz = req.p[2] - res.p[2]
        pos_sum += math.sqrt(dx * dx + dy * dy + dz * dz)
        if req.s > 0 and res.s > 0:
            sq_log_sum += (math.log(req.s) - math.log(res.s)) ** 2
            n_speed += 1
        m_dot = res.m[req.m_index] * req.m_sign
        if m_dot == 1:
            n_motvec += 1
        achieved_in = 1 if res.tau_in is MotionType.TRANSLATION else 0
        achieved_out = 1 if res.tau_out is MotionType.TRANSLATION else 0
        if achieved_in == req.tau_in:
            n_inmot += 1
        if achieved_out == req.tau_out:
            n_outmot += 1
        weight_sum += res.weight_kg

    if n_total == 0:
        raise LengthMismatch("no pairs to evaluate")
    if n_valid == 0:
        return EvalReport(n_total, 0, 0.0, 0.0, None, None, None, None, None, None)
    return EvalReport(
        n_total=n_total,
        n_valid=n_valid,
        valid_pct=100.0 * n_valid / n_total,
        feas_pct=100.0 * n_feas / n_total,
        pos_m=pos_sum / n_valid,
        speed_rmsle=math.sqrt(sq_log_sum / n_speed) if n_speed else None,
        motvec_pct=100.0 * n_motvec / n_valid,
        inmot_pct=100.0 * n_inmot / n_valid,
        outmot_pct=100.0 * n_outmot / n_valid,
        weight_kg=weight_sum / n_valid,
    )


def _cell(value, unit: str) -> str:
    if value is None:
        return "-"
    if unit == "%":
        return f"{value:.2f}"
    return f"{value:.4f}"


def format_report_table(rows: dict[str, EvalReport],
                        cand_counts: dict[str, int] | None = None) -> str:
    """Aligned table, one row per labelled report."""
    units = ("%", "%", "m", "log", "%", "%", "%", "kg")
    headers = ["Model", *EvalReport.COLUMNS]
    if cand_counts:
        headers.append("Cand #")
    table = [headers]
    for label, report in rows.items():
        row = [label] + [_cell(v, u) for v, u in zip(report.row(), units)]
        if cand_counts:
            row.append(str(cand_counts.get(label, "-")))
        table.append(row)
    widths = [max(len(r[i]) for r in table) for i in range(len(headers))]
    lines = []
    for r in table:
        lines.append("  ".join(cell.ljust(w) for cell, w in zip(r, widths)).rstrip())
    return "\n".join(lines)
