"""Hub-aware random-walk graph embeddings and a node-classification harness.

The pipeline: load or synthesize a labeled graph, sample a walk corpus
under one of four strategies (uniform, node2vec, and two label-guided
hub-aware strategies), train skip-gram negative-sampling vectors, then
cross-validate SVM / naive Bayes / random-forest classifiers over the
labeled nodes.
"""

from .classify import (
    Dataset,
    GaussianNbModel,
    LinearSvmModel,
    RandomForestModel,
    predict,
    train_gaussian_nb,
    train_linear_svm,
    train_random_forest,
)
from .datasets import load_zachary
from .embedding import (
    Embedding,
    SgnsParams,
    load_embedding,
    reconstruction_error,
    save_embedding,
    sgns_pair_objective,
    train_sgns,
    tune_node2vec,
)
from .evaluation import (
    ConfusionMatrix,
    ExperimentResult,
    MetricReport,
    compare_methods,
    confusion_matrix,
    method_label,
    metrics_from_confusion,
    run_experiment,
    stratified_kfold,
)
from .graph import (
    Graph,
    GraphStats,
    LabelMap,
    UNLABELED,
    add_self_loops_to_isolated,
    graph_stats,
    hub_report,
    is_good_hub,
    load_graph,
    load_labels,
    write_edge_lines,
    write_label_lines,
)
from .sampling import (
    Corpus,
    WalkConfig,
    WalkState,
    generate_corpus,
    hubwalkdist_step,
    node2vec_step,
    read_corpus_lines,
    scwalk_step,
    transition_distribution,
    uniform_step,
    write_corpus_lines,
)
from .synth import PlantedConfig, generate_planted

__version__ = "0.1.0"

__all__ = [
    "Corpus",
    "ConfusionMatrix",
    "Dataset",
    "Embedding",
    "ExperimentResult",
    "GaussianNbModel",
    "Graph",
    "GraphStats",
    "LabelMap",
    "LinearSvmModel",
    "MetricReport",
    "PlantedConfig",
    "RandomForestModel",
    "SgnsParams",
    "UNLABELED",
    "WalkConfig",
    "WalkState",
    "add_self_loops_to_isolated",
    "compare_methods",
    "confusion_matrix",
    "generate_corpus",
    "generate_planted",
    "graph_stats",
    "hub_report",
    "hubwalkdist_step",
    "is_good_hub",
    "load_embedding",
    "load_graph",
    "load_labels",
    "load_zachary",
    "method_label",
    "metrics_from_confusion",
    "node2vec_step",
    "predict",
    "read_corpus_lines",
    "reconstruction_error",
    "run_experiment",
    "save_embedding",
    "scwalk_step",
    "sgns_pair_objective",
    "stratified_kfold",
    "train_gaussian_nb",
    "train_linear_svm",
    "train_random_forest",
    "train_sgns",
    "transition_distribution",
    "tune_node2vec",
    "uniform_step",
    "write_corpus_lines",
    "write_edge_lines",
    "write_label_lines",
]
