"""Network-diffusion recommenders with trust-scaled resource allocation."""

from .graph import (
    GraphError,
    RatingGraph,
    TrustGraph,
    build_rating_graph,
    build_trust_graph,
    cosine_object_similarity,
    cosine_user_similarity,
    cosra_index,
    hc_transfer,
    md_transfer,
)
from .harness import (
    ExperimentConfig,
    MetricsReport,
    SplitPlan,
    make_split,
    recommended_degree_distribution,
    run_experiment,
    run_fold,
    sweep_length,
    sweep_theta,
)
from .ingest import Dataset, ParseError, RawRating, assemble_dataset, read_canonical, write_canonical
from .metrics import EvaluationContext, MetricValue, UndefinedMetric
from .recommenders import (
    METHODS,
    MethodConfig,
    RecommendationList,
    Scorer,
    score_cosra,
    score_cosra_t,
    score_diffusion,
    score_gr,
    score_ucf,
    top_l,
)

__version__ = "0.1.0"
