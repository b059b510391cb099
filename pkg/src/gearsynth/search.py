"""Search methods over the gear-train DSL: bigram EDA, UCT MCTS, random
search, and prefix-search hybrids driven by a pluggable sequence completer.

All candidate sampling is masked by the grammar (``next_tokens``), so every
internally generated candidate is valid. Completer outputs are validated and
score the invalid sentinel when a model misbehaves. Search runs are
deterministic given (requirements, config, seed, catalogue).
"""

from __future__ import annotations

import math
import random
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

from .catalogue import Catalogue
from .datasetgen import Requirements
from .dsl import (
    END,
    START,
    GearSequence,
    complete_random,
    next_tokens,
    validate_grammar,
)
from .errors import BudgetTooSmall, CompleterUnreachable
from .feasibility import is_feasible
from .simulator import simulate

INVALID_SCORE = 1e9   # sentinel for candidates that fail grammar validation


@dataclass(frozen=True)
class FitnessWeights:
    """Scalarization weights; hard requirement terms dominate the weight
    objective by default."""

    w_pos: float = 1.0
    w_speed: float = 1.0
    w_motvec: float = 1.0
    w_inmot: float = 1.0
    w_outmot: float = 1.0
    w_feas: float = 10.0
    w_weight: float = 0.01


DEFAULT_WEIGHTS = FitnessWeights()


@dataclass(frozen=True)
class SearchConfig:
    budget: int
    prefix_len: int = 6          # tokens explored after <start> in hybrid mode
    population: int = 100
    elite_frac: float = 0.2
    smoothing: float = 0.1
    c: float = 1.4
    seed: int | None = 0
    max_components: int = 10


def fitness_terms(req: Requirements, seq: GearSequence, weights: FitnessWeights,
                  cat: Catalogue) -> dict:
    """Score a candidate; returns the term breakdown alongside the total."""
    if validate_grammar(seq, cat) is not None:
        return {"valid": False, "feasible": False, "score": INVALID_SCORE}
    res = simulate(seq, cat)
    feasible = is_feasible(res.placements)
    dx = req.p[0] - res.p[0]
    dy = req.p[1] - res.p[1]
    dz = req.p[2] - res.p[2]
    pos_err = math.sqrt(dx * dx + dy * dy + dz * dz)
    speed_err = abs(math.log(req.s) - math.log(res.s)) if req.s > 0 and res.s > 0 else INVALID_SCORE
    m_dot = res.m[req.m_index] * req.m_sign
    motvec_err = (1.0 - m_dot) / 2.0
    inmot_err = 0.0 if (res.tau_in.value == "translation") == bool(req.tau_in) else 1.0
    outmot_err = 0.0 if (res.tau_out.value == "translation") == bool(req.tau_out) else 1.0
    score = (weights.w_pos * pos_err
             + weights.w_speed * speed_err
             + weights.w_motvec * motvec_err
             + weights.w_inmot * inmot_err
             + weights.w_outmot * outmot_err
             + weights.w_feas * (0.0 if feasible else 1.0)
             + weights.w_weight * res.weight_kg)
    return {
        "valid": True,
        "feasible": feasible,
        "score": score,
        "pos_err": pos_err,
        "speed_err": speed_err,
        "motvec_err": motvec_err,
        "inmot_err": inmot_err,
        "outmot_err": outmot_err,
        "weight_kg": res.weight_kg,
        "result": res,
    }


def fitness(req: Requirements, seq: GearSequence, weights: FitnessWeights,
            cat: Catalogue) -> float:
    """Scalar score, lower is better; invalid sequences get a large sentinel."""
    return fitness_terms(req, seq, weights, cat)["score"]


def ucb(r_i: float, v_i: int, v_parent: int, c: float) -> float:
    """Upper confidence bound for child selection; unvisited children first."""
    if v_i == 0:
        return math.inf
    return r_i / v_i + c * math.sqrt(math.log(v_parent) / v_i)


# Completers ------------------------------------------------------------------

class Completer:
    """Anything that can extend a token prefix into a full sequence."""

    def complete(self, req: Requirements, prefix: tuple[str, ...]) -> GearSequence:
        raise NotImplementedError

    def close(self) -> None:
        pass


class RandomCompleter(Completer):
    """Grammar-constrained uniform random completion."""

    def __init__(self, cat: Catalogue, seed: int | None = 0,
                 max_components: int = 10):
        self._cat = cat
        self._rng = random.Random(seed)
        self._max_components = max_components

    def complete(self, req: Requirements, prefix: tuple[str, ...]) -> GearSequence:
        return complete_random(prefix, self._cat, rng=self._rng,
                               max_components=self._max_components)


# Bigram model (EDA) ----------------------------------------------------------

def allowed_transitions(cat: Catalogue) -> dict[str, tuple[str, ...]]:
    """Global bigram support: token pairs that occur in some valid sequence."""
    from .dsl import MESH_TOKENS, TRA_TOKENS, _tables   # internal tables

    tables = _tables(cat)
    mesh = tuple(MESH_TOKENS)
    tra = tuple(TRA_TOKENS)
    support: dict[str, tuple[str, ...]] = {START: tra + tables.head_racks}
    for t in tra:
        support[t] = tables.shafts
    followers_of_mesh = tuple(
        p.part_number for p in cat.iter_parts()
        if p.is_toothed and tables.sorted_partners[p.part_number]
    )
    for t in mesh:
        support[t] = followers_of_mesh
    for part in cat.iter_parts():
        pn = part.part_number
        if part.is_shaft:
            support[pn] = (END, *tables.gear1)
        elif part.is_rack:
            out = (END,)
            if tables.spur_partners[pn]:
                out += mesh
            support[pn] = out
        else:
            out = (END, *tra)
            if tables.sorted_partners[pn]:
                out += mesh
            support[pn] = out
    return support


class BigramModel:
    """P(next | prev) restricted to grammar-allowed transitions."""

    def __init__(self, probs: dict[str, dict[str, float]]):
        self.probs = probs

    @classmethod
    def uniform(cls, cat: Catalogue) -> "BigramModel":
        probs = {}
        for prev, nexts in allowed_transitions(cat).items():
            if nexts:
                p = 1.0 / len(nexts)
                probs[prev] = {t: p for t in nexts}
        return cls(probs)

    def refit(self, sequences, cat: Catalogue, smoothing: float) -> "BigramModel":
        """Re-estimate from elite sequences with additive smoothing over the
        allowed-transition support; rows never observed fall back to uniform."""
        support = allowed_transitions(cat)
        counts: dict[str, dict[str, float]] = {}
        for seq in sequences:
            tokens = seq.tokens if isinstance(seq, GearSequence) else tuple(seq)
            for a, b in zip(tokens, tokens[1:]):
                counts.setdefault(a, {}).setdefault(b, 0.0)
                counts[a][b] += 1.0
        probs: dict[str, dict[str, float]] = {}
        for prev, nexts in support.items():
            if not nexts:
                continue
            row = counts.get(prev)
            if row is None:
                if smoothing > 0:
                    probs[prev] = {t: 1.0 / len(nexts) for t in nexts}
                else:
                    probs[prev] = dict(self.probs.get(prev, {t: 1.0 / len(nexts) for t in nexts}))
                continue
            total = sum(row.values()) + smoothing * len(nexts)
            probs[prev] = {t: (row.get(t, 0.0) + smoothing) / total for t in nexts}
        return BigramModel(probs)

    def sample_sequence(self, cat: Catalogue, rng: random.Random,
                        max_components: int, stop_after: int | None = None,
                        ) -> tuple[str, ...]:
        """Sample tokens weighted by the model but masked to the grammar's
        next-token set; renormalizes at every step. ``stop_after`` truncates
        after that many tokens past <start> (hybrid prefix mode)."""
        tokens = [START]
        while tokens[-1] != END:
            if stop_after is not None and len(tokens) - 1 >= stop_after:
                break
            allowed = next_tokens(tokens, cat, max_components)
            row = self.probs.get(tokens[-1], {})
            weights = [row.get(t, 0.0) for t in allowed]
            total = sum(weights)
            if total <= 0:
                tokens.append(allowed[rng.randrange(len(allowed))])
            else:
                tokens.append(rng.choices(allowed, weights=weights, k=1)[0])
        return tuple(tokens)


# Result bookkeeping -----------------------------------------------------------

@dataclass
class SearchResult:
    method: str
    best_sequence: GearSequence | None
    best_score: float
    best_feasible: bool
    best_valid: bool
    candidates_evaluated: int
    wall_time_s: float
    seed: int | None
    history: list = field(default_factory=list)


class _Best:
    """Lexicographic best-so-far: feasible beats valid beats anything."""

    def __init__(self):
        self.feasible: tuple[float, GearSequence] | None = None
        self.valid: tuple[float, GearSequence] | None = None
        self.any: tuple[float, GearSequence] | None = None

    def offer(self, seq: GearSequence, terms: dict) -> None:
        score = terms["score"]
        if self.any is None or score < self.any[0]:
            self.any = (score, seq)
        if terms["valid"] and (self.valid is None or score < self.valid[0]):
            self.valid = (score, seq)
        if terms["feasible"] and (self.feasible is None or score < self.feasible[0]):
            self.feasible = (score, seq)

    def result(self) -> tuple[GearSequence | None, float, bool, bool]:
        if self.feasible is not None:
            return self.feasible[1], self.feasible[0], True, True
        if self.valid is not None:
            return self.valid[1], self.valid[0], False, True
        if self.any is not None:
            return self.any[1], self.any[0], False, False
        return None, math.inf, False, False


# Parallel candidate evaluation -------------------------------------------------

_WORKER_STATE: dict = {}


def _eval_worker_init(cat: Catalogue, req: Requirements, weights: FitnessWeights):
    _WORKER_STATE["args"] = (cat, req, weights)


def _eval_worker(tokens: tuple[str, ...]) -> dict:
    cat, req, weights = _WORKER_STATE["args"]
    terms = fitness_terms(req, GearSequence(tokens), weights, cat)
    terms.pop("result", None)   # keep the payload picklable and small
    return terms


class _Evaluator:
    """Order-preserving candidate evaluation, optionally over processes."""

    def __init__(self, req: Requirements, weights: FitnessWeights,
                 cat: Catalogue, workers: int = 1):
        self.req, self.weights, self.cat = req, weights, cat
        self.workers = max(1, workers)
        self.pool = None
        if self.workers > 1:
            self.pool = ProcessPoolExecutor(
                max_workers=self.workers, initializer=_eval_worker_init,
                initargs=(cat, req, weights))

    def evaluate(self, candidates: list[GearSequence]) -> list[dict]:
        if self.pool is None:
            return [fitness_terms(self.req, seq, self.weights, self.cat)
                    for seq in candidates]
        chunk = max(1, len(candidates) // (self.workers * 4))
        return list(self.pool.map(_eval_worker, [c.tokens for c in candidates],
                                  chunksize=chunk))

    def close(self):
        if self.pool is not None:
            self.pool.shutdown()


# EDA ---------------------------------------------------------------------------

def eda_search(req: Requirements, config: SearchConfig, cat: Catalogue,
               completer: Completer | None = None,
               weights: FitnessWeights = DEFAULT_WEIGHTS,
               workers: int = 1) -> SearchResult:
    """Estimation-of-distribution search with a bigram model.

    Pure mode samples full sequences; with a completer only the first
    ``prefix_len`` tokens are sampled and the completer finishes each
    candidate. Evaluation count is exactly ``(budget // population) *
    population``."""
    if config.budget < config.population:
        raise BudgetTooSmall(f"budget {config.budget} < population {config.population}")
    t0 = time.perf_counter()
    rng = random.Random(config.seed)
    model = BigramModel.uniform(cat)
    best = _Best()
    evaluator = _Evaluator(req, weights, cat, workers)
    history = []
    evaluated = 0
    generations = config.budget // config.population
    stop_after = config.prefix_len if completer is not None else None
    try:
        for gen in range(generations):
            candidates: list[GearSequence] = []
            for _ in range(config.population):
                tokens = model.sample_sequence(cat, rng, config.max_components,
                                               stop_after=stop_after)
                if tokens[-1] != END:
                    assert completer is not None
                    candidates.append(completer.complete(req, tokens))
                else:
                    candidates.append(GearSequence(tokens))
            results = evaluator.evaluate(candidates)
            evaluated += len(candidates)
            for seq, terms in zip(candidates, results):
                best.offer(seq, terms)
            ranked = sorted(range(len(candidates)), key=lambda i: results[i]["score"])
            n_elite = max(1, int(config.population * config.elite_frac))
            elite = [candidates[i] for i in ranked[:n_elite]]
            model = model.refit(elite, cat, config.smoothing)
            history.append({
                "generation": gen,
                "best_score": min(r["score"] for r in results),
                "mean_score": sum(r["score"] for r in results) / len(results),
            })
    finally:
        evaluator.close()
    seq, score, feasible, valid = best.result()
    return SearchResult("eda+c" if completer else "eda", seq, score, feasible,
                        valid, evaluated, time.perf_counter() - t0, config.seed,
                        history)


# MCTS --------------------------------------------------------------------------

class MctsNode:
    __slots__ = ("token", "children", "reward", "visits", "untried", "terminal")

    def __init__(self, token: str | None, untried: tuple[str, ...], terminal: bool):
        self.token = token
        self.children: dict[str, MctsNode] = {}
        self.reward = 0.0
        self.visits = 0
        self.untried = list(untried)
        self.terminal = terminal


def mcts_search(req: Requirements, config: SearchConfig, cat: Catalogue,
                completer: Completer | None = None,
                weights: FitnessWeights = DEFAULT_WEIGHTS) -> SearchResult:
    """UCT search over token prefixes; one rollout (candidate evaluation) per
    iteration. With a completer the tree depth is capped at ``prefix_len``
    and rollouts are model completions; pure mode rolls out uniformly and the
    tree may reach full sequences."""
    t0 = time.perf_counter()
    rng = random.Random(config.seed)
    best = _Best()
    depth_cap = config.prefix_len if completer is not None else None

    def successors(prefix: list[str]) -> tuple[str, ...]:
        if depth_cap is not None and len(prefix) - 1 >= depth_cap:
            return ()
        return next_tokens(prefix, cat, config.max_components)

    root = MctsNode(None, successors([START]), False)
    score_cache: dict[tuple[str, ...], dict] = {}

    for _ in range(config.budget):
        node = root
        prefix = [START]
        path = [root]
        # selection: descend through fully expanded nodes (ties and unvisited
        # children resolve in insertion order, so exploration is deterministic)
        while not node.terminal and not node.untried and node.children:
            parent = node
            node = max(parent.children.values(),
                       key=lambda ch: ucb(ch.reward, ch.visits, parent.visits, config.c))
            prefix.append(node.token)
            path.append(node)
        # expansion
        if not node.terminal and node.untried:
            tok = node.untried.pop(0)
            prefix.append(tok)
            terminal = tok == END
            child = MctsNode(tok, () if terminal else successors(prefix), terminal)
            node.children[tok] = child
            node = child
            path.append(node)
        # rollout
        if node.terminal:
            seq = GearSequence(tuple(prefix))
        elif completer is not None:
            seq = completer.complete(req, tuple(prefix))
        else:
            seq = complete_random(prefix, cat, rng=rng,
                                  max_components=config.max_components)
        terms = score_cache.get(seq.tokens)
        if terms is None:
            terms = fitness_terms(req, seq, weights, cat)
            terms.pop("result", None)
            score_cache[seq.tokens] = terms
        best.offer(seq, terms)
        reward = 1.0 / (1.0 + terms["score"])
        for n in path:
            n.visits += 1
            n.reward += reward

    seq, score, feasible, valid = best.result()
    return SearchResult("mcts+c" if completer else "mcts", seq, score, feasible,
                        valid, config.budget, time.perf_counter() - t0,
                        config.seed, [])


# Random baseline ----------------------------------------------------------------

def random_search(req: Requirements, config: SearchConfig, cat: Catalogue,
                  weights: FitnessWeights = DEFAULT_WEIGHTS,
                  workers: int = 1) -> SearchResult:
    """Uniform random valid sequences under the same budget accounting."""
    t0 = time.perf_counter()
    rng = random.Random(config.seed)
    best = _Best()
    evaluator = _Evaluator(req, weights, cat, workers)
    try:
        batch = 256
        done = 0
        while done < config.budget:
            n = min(batch, config.budget - done)
            candidates = [complete_random((START,), cat, rng=rng,
                                          max_components=config.max_components)
                          for _ in range(n)]
            for seq, terms in zip(candidates, evaluator.evaluate(candidates)):
                best.offer(seq, terms)
            done += n
    finally:
        evaluator.close()
    seq, score, feasible, valid = best.result()
    return SearchResult("random", seq, score, feasible, valid, config.budget,
                        time.perf_counter() - t0, config.seed, [])


# Benchmark harness ---------------------------------------------------------------

DEFAULT_BUDGETS = {
    "eda": 10_000, "mcts": 10_000, "random": 10_000,
    "eda+c": 1_000, "mcts+c": 1_000, "completer": 1,
}

HYBRID_METHODS = ("eda+c", "mcts+c")


def run_search(method: str, req: Requirements, config: SearchConfig,
               cat: Catalogue, completer: Completer | None = None,
               weights: FitnessWeights = DEFAULT_WEIGHTS,
               workers: int = 1) -> SearchResult:
    """Dispatch one search run by method name."""
    if method in HYBRID_METHODS or method == "completer":
        if completer is None:
            raise CompleterUnreachable(f"method {method!r} needs a completer")
    if method == "eda":
        return eda_search(req, config, cat, None, weights, workers)
    if method == "eda+c":
        return eda_search(req, config, cat, completer, weights, workers)
    if method == "mcts":
        return mcts_search(req, config, cat, None, weights)
    if method == "mcts+c":
        return mcts_search(req, config, cat, completer, weights)
    if method == "random":
        return random_search(req, config, cat, weights, workers)
    if method == "completer":
        t0 = time.perf_counter()
        seq = completer.complete(req, (START,))
        terms = fitness_terms(req, seq, weights, cat)
        return SearchResult("completer", seq, terms["score"], terms["feasible"],
                            terms["valid"], 1, time.perf_counter() - t0,
                            config.seed, [])
    raise ValueError(f"unknown method {method!r}")


def benchmark_problems(n: int, cat: Catalogue, seed: int | None = 0,
                       max_components: int = 6) -> list[Requirements]:
    """Derive ``n`` requirement vectors from known feasible sequences."""
    from .datasetgen import encode_requirements, generate_records

    problems = []
    for record, _ in generate_records(n, cat, seed=seed,
                                      max_components=max_components):
        problems.append(record.requirements)
    return problems


def run_benchmark(problems: list[Requirements], methods: list[str],
                  cat: Catalogue, budgets: dict[str, int] | None = None,
                  seed: int | None = 0, config: SearchConfig | None = None,
                  completer_factory=None,
                  weights: FitnessWeights = DEFAULT_WEIGHTS,
                  workers: int = 1) -> dict:
    """Run every method on every problem with paired per-problem seeds.

    ``completer_factory(problem_index)`` builds a fresh completer per run so
    hybrid methods stay deterministic. Returns per-method aggregate metrics
    (evaluated against the problem requirements) plus per-run details."""
    from .metrics import evaluate_set

    budgets = {**DEFAULT_BUDGETS, **(budgets or {})}
    base = config or SearchConfig(budget=0, seed=seed)
    out: dict = {"methods": {}, "n_problems": len(problems), "seed": seed}
    for method in methods:
        runs = []
        pairs = []
        t0 = time.perf_counter()
        for i, req in enumerate(problems):
            run_seed = (seed or 0) + i
            cfg = replace(base, budget=budgets[method], seed=run_seed)
            completer = None
            if method in HYBRID_METHODS or method == "completer":
                if completer_factory is None:
                    completer = RandomCompleter(cat, seed=run_seed,
                                                max_components=cfg.max_components)
                else:
                    completer = completer_factory(i)
            result = run_search(method, req, cfg, cat, completer, weights, workers)
            runs.append(result)
            if result.best_sequence is not None:
                pairs.append((req, result.best_sequence))
        wall = time.perf_counter() - t0
        evaluated = sum(r.candidates_evaluated for r in runs)
        out["methods"][method] = {
            "report": evaluate_set(pairs, cat),
            "runs": runs,
            "budget": budgets[method],
            "candidates_evaluated": evaluated,
            "wall_time_s": wall,
            "per_candidate_s": wall / max(1, evaluated),
            "feasible_runs": sum(1 for r in runs if r.best_feasible),
        }
    return out
