"""Keyword co-occurrence sense analytics.

A sense is a keyword together with the structure of everything it
co-occurs with.  The package ingests document-keyword corpora, profiles
each sense (dimension, entropy, complexity), relates senses through a
weighted intersection graph (similarity, trajectory mutual information,
PageRank, random-walk communities), fits extreme-value and heavy-tail
distributions to the resulting metric populations, and segments the
timeline into generations.
"""

__version__ = "0.1.0"

from .corpus import (
    DEFAULT_BLACKLIST,
    CleaningConfig,
    Concept,
    CorpusIndex,
    Document,
    IngestReport,
    citation_rates,
    ingest,
    ingest_records,
)
from .errors import (
    ArtifactError,
    ConvergenceError,
    DataError,
    DuplicateDocumentError,
    EmptyOrbitError,
    KeysenseError,
    MalformedRecordError,
    NoEdgeError,
)
from .evt import (
    FitResult,
    RegressionResult,
    fit_frechet,
    fit_pareto2,
    ks_statistic,
    regress,
)
from .graph import (
    SenseGraph,
    TmiRecord,
    build_graph,
    pagerank,
    similarity,
    trajectory_mutual_information,
    transitivity,
    walktrap_clusters,
)
from .pipeline import AnalysisConfig, analyze_corpus
from .sense import (
    Configuration,
    SenseMetrics,
    build_configuration,
    complexity,
    dimension,
    disequilibrium,
    entropy,
    homeomorphism_log_count,
    normalized_entropy,
    partition_log_prob,
    sense_metrics,
)
from .temporal import (
    GenerationTable,
    assign_generations,
    core_senses,
    generation_boundaries,
    generation_plane,
    longevity_strata,
)

__all__ = [name for name in dir() if not name.startswith("_")]
