"""Pydantic request/response models for the HTTP service."""

from __future__ import annotations

from pydantic import BaseModel, Field

TokenList = list[str]


class HealthResponse(BaseModel):
    status: str
    version: str
    catalogue_version: str
    vocab_hash: str


class PartModel(BaseModel):
    part_number: str
    component_type: str
    module_mm: float | None
    teeth: int | None
    pitch_radius_m: float | None
    length_m: float | None
    bbox_m: list[float]
    weight_kg: float
    handedness: str
    mesh_partners: list[str]


class CatalogueResponse(BaseModel):
    version: str
    parts: list[PartModel]


class VocabResponse(BaseModel):
    tokens: list[str]
    hash: str


class ViolationModel(BaseModel):
    position: int
    expected: list[str]
    found: str
    message: str


class ValidateRequest(BaseModel):
    sequences: list[TokenList]


class ValidateItem(BaseModel):
    ok: bool
    violation: ViolationModel | None = None


class ValidateResponse(BaseModel):
    results: list[ValidateItem]
    all_ok: bool


class PlacementModel(BaseModel):
    part: str
    center: list[float]
    axis: list[int]
    box: list[float]


class SimRecord(BaseModel):
    s: float
    p: list[float]
    m: list[int]
    tau_in: str
    tau_out: str
    weight_kg: float
    n_components: int
    placements: list[PlacementModel]


class SimulateRequest(BaseModel):
    sequences: list[TokenList]


class SimulateItem(BaseModel):
    ok: bool
    result: SimRecord | None = None
    feasible: bool | None = None
    collision: list[int] | None = None
    requirements: list[float] | None = None
    error: str | None = None


class SimulateResponse(BaseModel):
    results: list[SimulateItem]
    catalogue_version: str


class RandomSequencesRequest(BaseModel):
    n: int = Field(default=1, ge=1, le=1_000_000)
    max_components: int = Field(default=10, ge=1, le=10)
    seed: int | None = 0
    construction: str = Field(default="walk", pattern="^(walk|two-stage)$")


class RandomSequencesResponse(BaseModel):
    sequences: list[TokenList]
    seed: int | None


class CompleteRequest(BaseModel):
    prefix: TokenList
    seed: int | None = 0
    max_components: int = Field(default=10, ge=1, le=10)


class CompleteResponse(BaseModel):
    sequence: TokenList


class EncodeRequest(BaseModel):
    sequence: TokenList


class EnumerateRequest(BaseModel):
    max_components: int = Field(default=10, ge=1, le=10)
    include_sequences: bool = False


class EnumerateResponse(BaseModel):
    count: int
    sequences: list[list[str]] | None = None


class DatasetGenerateRequest(BaseModel):
    n: int = Field(ge=1)
    max_components: int = Field(default=10, ge=1, le=10)
    seed: int | None = 0
    out_dir: str


class DatasetGenerateResponse(BaseModel):
    accepted: int
    rejected_invalid: int
    rejected_infeasible: int
    rejected_duplicate: int
    n_target: int
    max_components: int
    seed: int | None
    catalogue_version: str


class DatasetSplitRequest(BaseModel):
    records_path: str
    out_dir: str
    val_frac: float = 0.0005
    test_frac: float = 0.0005
    seed: int | None = 0


class DatasetSplitResponse(BaseModel):
    train: int
    val: int
    test: int
    seed: int | None
    val_frac: float
    test_frac: float


class EvalPair(BaseModel):
    requirements: list[float] = Field(min_length=8, max_length=8)
    sequence: TokenList


class EvaluateRequest(BaseModel):
    pairs: list[EvalPair]


class ReportModel(BaseModel):
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


class EvaluateResponse(BaseModel):
    report: ReportModel
    table: str


class WeightsModel(BaseModel):
    w_pos: float = 1.0
    w_speed: float = 1.0
    w_motvec: float = 1.0
    w_inmot: float = 1.0
    w_outmot: float = 1.0
    w_feas: float = 10.0
    w_weight: float = 0.01


class SearchRequest(BaseModel):
    method: str = Field(pattern="^(eda|mcts|eda\\+c|mcts\\+c|random|completer)$")
    requirements: list[float] = Field(min_length=8, max_length=8)
    budget: int = Field(ge=1)
    seed: int | None = 0
    prefix_len: int = Field(default=6, ge=1, le=20)
    population: int = Field(default=100, ge=1)
    elite_frac: float = Field(default=0.2, gt=0, le=1)
    smoothing: float = Field(default=0.1, ge=0)
    c: float = 1.4
    max_components: int = Field(default=10, ge=1, le=10)
    completer: str | None = None    # "random", "exec:<cmd>" or "tcp:host:port"
    weights: WeightsModel = WeightsModel()
    workers: int = Field(default=1, ge=1, le=64)


class FitnessTermsModel(BaseModel):
    valid: bool
    feasible: bool
    score: float
    pos_err: float | None = None
    speed_err: float | None = None
    motvec_err: float | None = None
    inmot_err: float | None = None
    outmot_err: float | None = None
    weight_kg: float | None = None


class SearchResponse(BaseModel):
    method: str
    best_sequence: TokenList | None
    best_score: float
    best_feasible: bool
    best_valid: bool
    candidates_evaluated: int
    wall_time_s: float
    seed: int | None
    catalogue_version: str
    sim: SimRecord | None = None
    fitness_terms: FitnessTermsModel | None = None
    history: list[dict] = []


class BenchmarkRequest(BaseModel):
    methods: list[str]
    n_problems: int = Field(default=10, ge=1, le=100)
    problems: list[list[float]] | None = None   # optional explicit 8-vectors
    budgets: dict[str, int] | None = None
    seed: int | None = 0
    prefix_len: int = Field(default=6, ge=1, le=20)
    max_components: int = Field(default=10, ge=1, le=10)
    problem_max_components: int = Field(default=6, ge=1, le=10)
    completer: str | None = None
    workers: int = Field(default=1, ge=1, le=64)


class BenchmarkMethodModel(BaseModel):
    report: ReportModel
    budget: int
    candidates_evaluated: int
    wall_time_s: float
    per_candidate_s: float
    feasible_runs: int
    best_scores: list[float]
    best_sequences: list[TokenList | None]


class BenchmarkResponse(BaseModel):
    n_problems: int
    seed: int | None
    problems: list[list[float]]
    methods: dict[str, BenchmarkMethodModel]
    table: str
