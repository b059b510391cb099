"""Gear-train configuration synthesis toolkit."""

from .catalogue import Catalogue, ComponentType, PartRecord, load_catalogue, shaft_weight
from .datasetgen import (
    DatasetRecord,
    Requirements,
    encode_requirements,
    generate_dataset,
    split_dataset,
)
from .dsl import (
    END,
    START,
    GearSequence,
    GrammarViolation,
    complete_random,
    enumerate_variable_sequences,
    next_tokens,
    random_valid_sequence,
    validate_grammar,
    vocabulary,
    vocabulary_hash,
)
from .feasibility import Aabb, Collision, boxes_intersect, check_interference, is_feasible
from .metrics import EvalReport, evaluate_set, rmsle
from .search import (
    Completer,
    FitnessWeights,
    RandomCompleter,
    SearchConfig,
    SearchResult,
    eda_search,
    fitness,
    mcts_search,
    random_search,
    run_benchmark,
    ucb,
)
from .simulator import FrameState, MotionType, Placement, SimResult, simulate, weight_of

__version__ = "0.1.0"

__all__ = [
    "Aabb", "Catalogue", "Collision", "Completer", "ComponentType",
    "DatasetRecord", "END", "EvalReport", "FitnessWeights", "FrameState",
    "GearSequence", "GrammarViolation", "MotionType", "PartRecord",
    "Placement", "RandomCompleter", "Requirements", "SearchConfig",
    "SearchResult", "SimResult", "START", "boxes_intersect", "check_interference",
    "complete_random", "eda_search", "encode_requirements",
    "enumerate_variable_sequences", "evaluate_set", "fitness",
    "generate_dataset", "is_feasible", "load_catalogue", "mcts_search",
    "next_tokens", "random_search", "random_valid_sequence", "rmsle",
    "run_benchmark", "shaft_weight", "simulate", "split_dataset", "ucb",
    "validate_grammar", "vocabulary", "vocabulary_hash", "weight_of",
]
