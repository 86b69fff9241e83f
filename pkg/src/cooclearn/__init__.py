"""Energy-based co-occurrence models with pseudo-likelihood SGD training,
heuristic baselines, and a top-K missing-item evaluation harness."""

from .corpus import (
    Corpus,
    FoldSplit,
    MaskedRecord,
    Vocabulary,
    as_corpus,
    build_vocabulary,
    make_itemset,
    mask_one_item,
    split_folds,
)
from .baselines import (
    CovisitGraph,
    build_covisit,
    cvg_score,
    lrw_score,
    normcvg_score,
)
from .datasets import make_bernoulli, make_planted_pairs
from .estimators import (
    CovisitRecommender,
    DeepEmbeddingModel,
    FullyVisibleBoltzmann,
    ItemBiasModel,
    LogBilinearModel,
)
from .evaluation import (
    EvalReport,
    RankedList,
    cross_validate,
    mcnemar_significance,
    rank_candidates,
    topk_accuracy,
)
from .ingest import (
    ParseError,
    filter_top_items,
    read_edge_list,
    read_jester,
    read_movielens,
    read_transactions,
)
from .scoring import (
    BiasParams,
    DemParams,
    LblParams,
    PairParams,
    conditional_probability,
    dem_from_pairwise,
    explicit_energy,
    oracle_conditional,
    sigmoid,
)
from .serialize import load_checkpoint, load_corpus, save_checkpoint, save_corpus
from .training import (
    Hyperparams,
    TrainingTrace,
    gradient_check,
    init_dem_params,
    per_example_loss,
    sample_negatives,
    sgd_update,
    train,
)

__version__ = "0.1.0"

__all__ = [
    "BiasParams",
    "Corpus",
    "CovisitGraph",
    "CovisitRecommender",
    "DeepEmbeddingModel",
    "DemParams",
    "EvalReport",
    "FoldSplit",
    "FullyVisibleBoltzmann",
    "Hyperparams",
    "ItemBiasModel",
    "LblParams",
    "LogBilinearModel",
    "MaskedRecord",
    "PairParams",
    "ParseError",
    "RankedList",
    "TrainingTrace",
    "Vocabulary",
    "as_corpus",
    "build_covisit",
    "build_vocabulary",
    "conditional_probability",
    "cross_validate",
    "cvg_score",
    "dem_from_pairwise",
    "explicit_energy",
    "filter_top_items",
    "gradient_check",
    "init_dem_params",
    "load_checkpoint",
    "load_corpus",
    "lrw_score",
    "make_bernoulli",
    "make_itemset",
    "make_planted_pairs",
    "mask_one_item",
    "mcnemar_significance",
    "normcvg_score",
    "oracle_conditional",
    "per_example_loss",
    "rank_candidates",
    "read_edge_list",
    "read_jester",
    "read_movielens",
    "read_transactions",
    "sample_negatives",
    "save_checkpoint",
    "save_corpus",
    "sgd_update",
    "sigmoid",
    "split_folds",
    "topk_accuracy",
    "train",
]
