"""Label-free evaluation of clusterings and classifiers against an
approximate ground truth refinement (AGTR)."""

from agtr.core import (
    SINGLETON_PREFIX,
    AgtrError,
    Clustering,
    ContingencyTable,
    DuplicateSample,
    EmptyId,
    Labeling,
    UniverseMismatch,
    build_clustering,
    clustering_from_labels,
    contingency,
)
from agtr.metrics import (
    ClusterMapping,
    MetricValue,
    accuracy,
    cluster_mapping,
    precision,
    recall,
)
from agtr.refinement import (
    CorrectionWitness,
    NotARefinement,
    RefinementDecomposition,
    apply_corrections,
    decompose,
    is_refinement,
    min_corrections_to_refinement,
    partition_distance,
    perturb,
    random_refinement,
)
from agtr.bounds import (
    BoundReport,
    LitmusVerdict,
    ReportedMetrics,
    Status,
    agtr_bounds,
    compare_bounds,
    default_epsilon_hat,
    litmus_test,
)
from agtr.shuffle import (
    CorrelationReport,
    DegenerateSeries,
    ShuffleRecord,
    correlation_test,
    shuffle_run,
)

__version__ = "0.1.0"

__all__ = [
    "SINGLETON_PREFIX",
    "AgtrError",
    "BoundReport",
    "ClusterMapping",
    "Clustering",
    "ContingencyTable",
    "CorrectionWitness",
    "CorrelationReport",
    "DegenerateSeries",
    "DuplicateSample",
    "EmptyId",
    "Labeling",
    "LitmusVerdict",
    "MetricValue",
    "NotARefinement",
    "RefinementDecomposition",
    "ReportedMetrics",
    "ShuffleRecord",
    "Status",
    "UniverseMismatch",
    "accuracy",
    "agtr_bounds",
    "apply_corrections",
    "build_clustering",
    "cluster_mapping",
    "clustering_from_labels",
    "compare_bounds",
    "contingency",
    "correlation_test",
    "decompose",
    "default_epsilon_hat",
    "is_refinement",
    "litmus_test",
    "min_corrections_to_refinement",
    "partition_distance",
    "perturb",
    "precision",
    "random_refinement",
    "recall",
    "shuffle_run",
]
