"""FastAPI service wrapping the core toolkit.

The CLI is a thin client of this API; it runs the app in-process by default
or targets a remote instance. File-writing endpoints (dataset generation and
splitting) write paths local to the service process.
"""

from __future__ import annotations

import os
import random

from fastapi import FastAPI, HTTPException

from .. import __version__
from ..catalogue import Catalogue, load_catalogue
from ..datasetgen import (
    Requirements,
    encode_requirements,
    generate_dataset,
    split_dataset,
)
from ..dsl import (
    GearSequence,
    complete_random,
    enumerate_variable_sequences,
    random_sequence_two_stage,
    random_valid_sequence,
    validate_grammar,
    vocabulary,
    vocabulary_hash,
)
from ..errors import GearsynthError, OutputUnwritable, TooFewRecords
from ..feasibility import check_interference
from ..metrics import evaluate_set, format_report_table
from ..search import (
    DEFAULT_BUDGETS,
    FitnessWeights,
    RandomCompleter,
    SearchConfig,
    benchmark_problems,
    fitness_terms,
    run_benchmark,
    run_search,
)
from ..simulator import simulate
from . import schemas as s

CATALOGUE_ENV = "GEARSYNTH_CATALOGUE"


def _part_model(part) -> s.PartModel:
    return s.PartModel(
        part_number=part.part_number,
        component_type=part.component_type.value,
        module_mm=part.module_mm,
        teeth=part.teeth,
        pitch_radius_m=part.pitch_radius_m,
        length_m=part.length_m,
        bbox_m=list(part.bbox_m),
        weight_kg=part.weight_kg,
        handedness=part.handedness,
        mesh_partners=sorted(part.mesh_partners),
    )


def _sim_record(res) -> s.SimRecord:
    return s.SimRecord(**res.to_record())


def _make_completer(spec: str | None, cat: Catalogue, seed: int | None,
                    max_components: int):
    if spec is None:
        return None
    if spec == "random":
        return RandomCompleter(cat, seed=seed, max_components=max_components)
    from ..wire import WireCompleter

    return WireCompleter(spec, vocabulary_hash(cat))


def create_app(catalogue_path: str | None = None) -> FastAPI:
    cat = load_catalogue(catalogue_path or os.environ.get(CATALOGUE_ENV) or None)
    app = FastAPI(title="gearsynth", version=__version__)
    app.state.catalogue = cat

    @app.exception_handler(GearsynthError)
    async def _domain_error(request, exc: GearsynthError):
        from fastapi.responses import JSONResponse

        status = 507 if isinstance(exc, OutputUnwritable) else 422
        return JSONResponse(status_code=status,
                            content={"detail": f"{type(exc).__name__}: {exc}"})

    @app.get("/health", response_model=s.HealthResponse)
    def health():
        return s.HealthResponse(status="ok", version=__version__,
                                catalogue_version=cat.version,
                                vocab_hash=vocabulary_hash(cat))

    @app.get("/catalogue", response_model=s.CatalogueResponse)
    def get_catalogue():
        return s.CatalogueResponse(version=cat.version,
                                   parts=[_part_model(p) for p in cat.iter_parts()])

    @app.get("/catalogue/vocab", response_model=s.VocabResponse)
    def get_vocab():
        return s.VocabResponse(tokens=list(vocabulary(cat)), hash=vocabulary_hash(cat))

    @app.post("/sequences/validate", response_model=s.ValidateResponse)
    def validate(req: s.ValidateRequest):
        results = []
        for tokens in req.sequences:
            violation = validate_grammar(tuple(tokens), cat)
            if violation is None:
                results.append(s.ValidateItem(ok=True))
            else:
                results.append(s.ValidateItem(ok=False, violation=s.ViolationModel(
                    position=violation.position, expected=list(violation.expected),
                    found=violation.found, message=str(violation))))
        return s.ValidateResponse(results=results, all_ok=all(r.ok for r in results))

    @app.post("/sequences/simulate", response_model=s.SimulateResponse)
    def simulate_sequences(req: s.SimulateRequest):
        results = []
        for tokens in req.sequences:
            violation = validate_grammar(tuple(tokens), cat)
            if violation is not None:
                results.append(s.SimulateItem(ok=False, error=str(violation)))
                continue
            res = simulate(tuple(tokens), cat)
            collision = check_interference(res.placements)
            results.append(s.SimulateItem(
                ok=True,
                result=_sim_record(res),
                feasible=collision is None,
                collision=None if collision is None else [collision.i, collision.j],
                requirements=list(encode_requirements(res).to_vector()),
            ))
        return s.SimulateResponse(results=results, catalogue_version=cat.version)

    @app.post("/sequences/random", response_model=s.RandomSequencesResponse)
    def random_sequences(req: s.RandomSequencesRequest):
        rng = random.Random(req.seed)
        out = []
        for _ in range(req.n):
            if req.construction == "two-stage":
                seq = random_sequence_two_stage(cat, rng, req.max_components)
            else:
                seq = random_valid_sequence(cat, rng=rng,
                                            max_components=req.max_components)
            out.append(list(seq.tokens))
        return s.RandomSequencesResponse(sequences=out, seed=req.seed)

    @app.post("/sequences/complete", response_model=s.CompleteResponse)
    def complete(req: s.CompleteRequest):
        seq = complete_random(tuple(req.prefix), cat, seed=req.seed,
                              max_components=req.max_components)
        return s.CompleteResponse(sequence=list(seq.tokens))

    @app.post("/sequences/enumerate", response_model=s.EnumerateResponse)
    def enumerate_types(req: s.EnumerateRequest):
        seqs = list(enumerate_variable_sequences(req.max_components))
        return s.EnumerateResponse(
            count=len(seqs),
            sequences=[list(v) for v in seqs] if req.include_sequences else None,
        )

    @app.post("/requirements/encode", response_model=s.SimulateItem)
    def encode(req: s.EncodeRequest):
        violation = validate_grammar(tuple(req.sequence), cat)
        if violation is not None:
            return s.SimulateItem(ok=False, error=str(violation))
        res = simulate(tuple(req.sequence), cat)
        collision = check_interference(res.placements)
        return s.SimulateItem(
            ok=True, result=_sim_record(res), feasible=collision is None,
            collision=None if collision is None else [collision.i, collision.j],
            requirements=list(encode_requirements(res).to_vector()),
        )

    @app.post("/dataset/generate", response_model=s.DatasetGenerateResponse)
    def dataset_generate(req: s.DatasetGenerateRequest):
        manifest = generate_dataset(req.n, req.max_components, req.seed,
                                    req.out_dir, cat)
        return s.DatasetGenerateResponse(**manifest)

    @app.post("/dataset/split", response_model=s.DatasetSplitResponse)
    def dataset_split(req: s.DatasetSplitRequest):
        try:
            counts = split_dataset(req.records_path, req.out_dir, req.val_frac,
                                   req.test_frac, req.seed)
        except FileNotFoundError as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from exc
        except TooFewRecords as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        return s.DatasetSplitResponse(**counts)

    @app.post("/evaluate", response_model=s.EvaluateResponse)
    def evaluate(req: s.EvaluateRequest):
        pairs = [(Requirements.from_vector(p.requirements),
                  GearSequence(tuple(p.sequence))) for p in req.pairs]
        report = evaluate_set(pairs, cat)
        return s.EvaluateResponse(
            report=s.ReportModel(**report.to_dict()),
            table=format_report_table({"eval": report}),
        )

    @app.post("/search", response_model=s.SearchResponse)
    def search(req: s.SearchRequest):
        requirements = Requirements.from_vector(req.requirements)
        config = SearchConfig(
            budget=req.budget, prefix_len=req.prefix_len, population=req.population,
            elite_frac=req.elite_frac, smoothing=req.smoothing, c=req.c,
            seed=req.seed, max_components=req.max_components,
        )
        completer = _make_completer(req.completer, cat, req.seed, req.max_components)
        try:
            result = run_search(req.method, requirements, config, cat, completer,
                                FitnessWeights(**req.weights.model_dump()),
                                req.workers)
        finally:
            if completer is not None:
                completer.close()
        sim = terms_model = None
        if result.best_sequence is not None and result.best_valid:
            terms = fitness_terms(requirements, result.best_sequence,
                                  FitnessWeights(**req.weights.model_dump()), cat)
            res = terms.pop("result")
            sim = _sim_record(res)
            terms_model = s.FitnessTermsModel(**terms)
        return s.SearchResponse(
            method=result.method,
            best_sequence=list(result.best_sequence.tokens)
            if result.best_sequence else None,
            best_score=result.best_score,
            best_feasible=result.best_feasible,
            best_valid=result.best_valid,
            candidates_evaluated=result.candidates_evaluated,
            wall_time_s=result.wall_time_s,
            seed=result.seed,
            catalogue_version=cat.version,
            sim=sim,
            fitness_terms=terms_model,
            history=result.history,
        )

    @app.post("/benchmark", response_model=s.BenchmarkResponse)
    def benchmark(req: s.BenchmarkRequest):
        if req.problems is not None:
            problems = [Requirements.from_vector(v) for v in req.problems]
        else:
            problems = benchmark_problems(req.n_problems, cat, seed=req.seed,
                                          max_components=req.problem_max_components)
        config = SearchConfig(budget=0, prefix_len=req.prefix_len, seed=req.seed,
                              max_components=req.max_components)

        def factory(i: int):
            return _make_completer(req.completer or "random", cat,
                                   (req.seed or 0) + i, req.max_components)

        results = run_benchmark(problems, req.methods, cat, req.budgets, req.seed,
                                config, factory, workers=req.workers)
        methods = {}
        reports = {}
        cands = {}
        for name, data in results["methods"].items():
            reports[name] = data["report"]
            cands[name] = data["budget"]
            methods[name] = s.BenchmarkMethodModel(
                report=s.ReportModel(**data["report"].to_dict()),
                budget=data["budget"],
                candidates_evaluated=data["candidates_evaluated"],
                wall_time_s=data["wall_time_s"],
                per_candidate_s=data["per_candidate_s"],
                feasible_runs=data["feasible_runs"],
                best_scores=[r.best_score for r in data["runs"]],
                best_sequences=[list(r.best_sequence.tokens)
                                if r.best_sequence else None
                                for r in data["runs"]],
            )
        return s.BenchmarkResponse(
            n_problems=len(problems), seed=req.seed,
            problems=[list(p.to_vector()) for p in problems],
            methods=methods,
            table=format_report_table(reports, cands),
        )

    return app


app = create_app()
