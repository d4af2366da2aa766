"""Stratified cross-validation, macro metrics, and the experiment runner.

Metric conventions: accuracy = trace/total; Precision(i) = e[i][i] over
column i's sum, Recall(i) = e[i][i] over row i's sum, both 0 when the
denominator is 0; macro precision/recall are unweighted class means; F1 is
the harmonic mean OF THE MACRO averages, not an average of per-class F1s.

An experiment embeds the whole graph, then cross-validates a classifier
over the labeled nodes only. With label_policy="full" the walk sampler sees
every label (so test labels influence the embedding; reports flag this),
"masked" hides each test fold's labels and re-embeds per fold.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from ._kernels import stream_seed
from .classify import (
    Dataset,
    predict,
    train_gaussian_nb,
    train_linear_svm,
    train_random_forest,
)
from .embedding import SgnsParams, train_sgns
from .graph import Graph, LabelMap
from .sampling import WalkConfig, generate_corpus

CLASSIFIER_KINDS = ("svm", "nb", "rf")

# sub-stream tags so one experiment seed drives every stage independently
_WALK_STAGE = 1
_SGNS_STAGE = 2
_FOLD_STAGE = 3
_CLF_STAGE = 4


@dataclass(frozen=True)
class ConfusionMatrix:
    """counts[i, j] = test samples of true class i predicted as class j."""

    counts: np.ndarray

    def __post_init__(self) -> None:
        counts = np.asarray(self.counts, dtype=np.int64)
        object.__setattr__(self, "counts", counts)
        if counts.ndim != 2 or counts.shape[0] != counts.shape[1]:
            raise ValueError("confusion matrix must be square")
        if (counts < 0).any():
            raise ValueError("confusion matrix entries must be >= 0")

    @property
    def class_count(self) -> int:
        return self.counts.shape[0]

    @property
    def total(self) -> int:
        return int(self.counts.sum())


@dataclass(frozen=True)
class MetricReport:
    accuracy: float
    macro_precision: float
    macro_recall: float
    f1: float
    per_class_precision: tuple[float, ...]
    per_class_recall: tuple[float, ...]

    def as_dict(self) -> dict[str, object]:
        return {
            "accuracy": self.accuracy,
            "macro_precision": self.macro_precision,
            "macro_recall": self.macro_recall,
            "f1": self.f1,
            "per_class_precision": list(self.per_class_precision),
            "per_class_recall": list(self.per_class_recall),
        }


def stratified_kfold(
    targets: Sequence[int] | np.ndarray, k: int, rng_seed: int = 0
) -> list[np.ndarray]:
    """Split indices into k folds with per-class spread at most 1.

    Each class's members are shuffled and dealt round-robin, carrying the
    dealing position across classes so overall fold sizes stay balanced.
    """
    targets = np.asarray(targets, dtype=np.int64)
    n = len(targets)
    if k < 2:
        raise ValueError("k must be >= 2")
    if k > n:
        raise ValueError(f"cannot split {n} samples into {k} folds")
    rng = np.random.default_rng(rng_seed)
    folds: list[list[int]] = [[] for _ in range(k)]
    offset = 0
    for cls in np.unique(targets):
        members = np.flatnonzero(targets == cls)
        members = rng.permutation(members)
        for i, m in enumerate(members):
            folds[(offset + i) % k].append(int(m))
        offset = (offset + len(members)) % k
    return [np.sort(np.asarray(fold, dtype=np.int64)) for fold in folds]


def confusion_matrix(
    true_labels: Sequence[int] | np.ndarray,
    predicted_labels: Sequence[int] | np.ndarray,
    class_count: int,
) -> ConfusionMatrix:
    true_labels = np.asarray(true_labels, dtype=np.int64)
    predicted_labels = np.asarray(predicted_labels, dtype=np.int64)
    if true_labels.shape != predicted_labels.shape:
        raise ValueError("true and predicted label sequences differ in length")
    counts = np.zeros((class_count, class_count), dtype=np.int64)
    if len(true_labels):
        if true_labels.min() < 0 or true_labels.max() >= class_count:
            raise ValueError("true label outside [0, class_count)")
        if predicted_labels.min() < 0 or predicted_labels.max() >= class_count:
            raise ValueError("predicted label outside [0, class_count)")
        np.add.at(counts, (true_labels, predicted_labels), 1)
    return ConfusionMatrix(counts=counts)


def metrics_from_confusion(matrix: ConfusionMatrix) -> MetricReport:
    counts = matrix.counts
    total = counts.sum()
    if total == 0:
        raise ValueError("confusion matrix is empty")
    diag = np.diag(counts).astype(np.float64)
    col_sums = counts.sum(axis=0).astype(np.float64)
    row_sums = counts.sum(axis=1).astype(np.float64)
    with np.errstate(invalid="ignore", divide="ignore"):
        precision = np.where(col_sums > 0, diag / col_sums, 0.0)
        recall = np.where(row_sums > 0, diag / row_sums, 0.0)
    macro_p = float(precision.mean())
    macro_r = float(recall.mean())
    f1 = 2.0 * macro_p * macro_r / (macro_p + macro_r) if macro_p + macro_r > 0 else 0.0
    return MetricReport(
        accuracy=float(diag.sum() / total),
        macro_precision=macro_p,
        macro_recall=macro_r,
        f1=f1,
        per_class_precision=tuple(float(x) for x in precision),
        per_class_recall=tuple(float(x) for x in recall),
    )


def _mean_report(reports: Sequence[MetricReport]) -> MetricReport:
    c = len(reports[0].per_class_precision)
    return MetricReport(
        accuracy=float(np.mean([r.accuracy for r in reports])),
        macro_precision=float(np.mean([r.macro_precision for r in reports])),
        macro_recall=float(np.mean([r.macro_recall for r in reports])),
        f1=float(np.mean([r.f1 for r in reports])),
        per_class_precision=tuple(
            float(np.mean([r.per_class_precision[i] for r in reports]))
            for i in range(c)
        ),
        per_class_recall=tuple(
            float(np.mean([r.per_class_recall[i] for r in reports]))
            for i in range(c)
        ),
    )


@dataclass(frozen=True)
class SeedRun:
    """One seed's cross-validation pass: per-fold outcomes plus fold means."""

    seed: int
    fold_reports: tuple[MetricReport, ...]
    confusions: tuple[ConfusionMatrix, ...]
    mean: MetricReport

    def as_dict(self) -> dict[str, object]:
        return {
            "seed": self.seed,
            "mean": self.mean.as_dict(),
            "folds": [r.as_dict() for r in self.fold_reports],
            "confusion_matrices": [m.counts.tolist() for m in self.confusions],
        }


@dataclass(frozen=True)
class ExperimentResult:
    """Everything needed to audit or rerun one experiment cell."""

    label: str
    dataset: dict[str, object]
    method: dict[str, object]
    label_policy: str
    folds: int
    seeds: tuple[int, ...]
    runs: tuple[SeedRun, ...]
    summary: dict[str, float]

    def as_dict(self) -> dict[str, object]:
        return {
            "label": self.label,
            "dataset": self.dataset,
            "method": self.method,
            "label_policy": self.label_policy,
            "folds": self.folds,
            "seeds": list(self.seeds),
            "summary": self.summary,
            "runs": [run.as_dict() for run in self.runs],
        }


def method_label(walk_config: WalkConfig) -> str:
    """Human-readable strategy tag used in reports and diff tables."""
    s = walk_config.strategy
    if s == "uniform":
        return "uniform"
    if s == "node2vec":
        return (
            f"node2vec(return={walk_config.return_param:g},"
            f"inout={walk_config.inout_param:g})"
        )
    return f"{s}(p={walk_config.bias_probability:g})"


def _train_classifier(kind, params, dataset: Dataset, rng_seed: int):
    params = dict(params or {})
    if kind == "svm":
        params.setdefault("rng_seed", rng_seed)
        return train_linear_svm(dataset, **params)
    if kind == "nb":
        return train_gaussian_nb(dataset, **params)
    if kind == "rf":
        params.setdefault("rng_seed", rng_seed)
        return train_random_forest(dataset, **params)
    raise ValueError(f"unknown classifier kind {kind!r}; expected one of "
                     f"{CLASSIFIER_KINDS}")


def dataset_descriptor(graph: Graph, labels: LabelMap) -> dict[str, object]:
    return {
        "n_nodes": graph.node_count,
        "n_edges": graph.n_edges,
        "class_count": labels.class_count,
        "n_labeled": int(len(labels.labeled_nodes)),
    }


def _evaluate_fold(
    vectors: np.ndarray,
    targets: np.ndarray,
    class_count: int,
    train_idx: np.ndarray,
    test_idx: np.ndarray,
    classifier: str,
    classifier_params: Optional[dict],
    clf_seed: int,
) -> ConfusionMatrix:
    train_set = Dataset(
        features=vectors[train_idx],
        targets=targets[train_idx],
        class_count=class_count,
    )
    model = _train_classifier(classifier, classifier_params, train_set, clf_seed)
    predicted = predict(model, vectors[test_idx])
    return confusion_matrix(targets[test_idx], predicted, class_count)


def run_experiment(
    graph: Graph,
    labels: LabelMap,
    walk_config: WalkConfig,
    dimension: int,
    sgns_params: SgnsParams | None = None,
    classifier: str = "svm",
    classifier_params: Optional[dict] = None,
    folds: int = 10,
    seeds: Sequence[int] = (0,),
    label_policy: str = "full",
    threads: int = 1,
) -> ExperimentResult:
    """Corpus → embedding → stratified k-fold CV over the labeled nodes.

    Each seed drives every random stage (walks, SGNS, fold split,
    classifier) through derived sub-streams, so one seed value pins the
    whole pipeline. Deterministic when threads == 1.
    """
    if sgns_params is None:
        sgns_params = SgnsParams()
    if label_policy not in ("full", "masked"):
        raise ValueError("label_policy must be 'full' or 'masked'")
    labeled = labels.labeled_nodes
    if len(labeled) == 0:
        raise ValueError("no labeled nodes to evaluate")
    targets = labels.labels[labeled].astype(np.int32)
    class_count = labels.class_count
    if len(np.unique(targets)) < 2:
        raise ValueError("need at least 2 classes among labeled nodes")

    runs = []
    for seed in seeds:
        fold_split = stratified_kfold(targets, folds, stream_seed(seed, _FOLD_STAGE))
        all_rows = np.arange(len(labeled))
        confusions = []
        if label_policy == "full":
            corpus = generate_corpus(
                graph, labels, walk_config.with_seed(stream_seed(seed, _WALK_STAGE))
            )
            emb = train_sgns(
                corpus,
                graph,
                dimension,
                sgns_params.with_seed(stream_seed(seed, _SGNS_STAGE)),
                threads=threads,
            )
            vectors = emb.vectors[labeled]
            for f, test_idx in enumerate(fold_split):
                train_idx = np.setdiff1d(all_rows, test_idx, assume_unique=True)
                confusions.append(
                    _evaluate_fold(
                        vectors, targets, class_count, train_idx, test_idx,
                        classifier, classifier_params,
                        stream_seed(seed, _CLF_STAGE, f),
                    )
                )
        else:
            for f, test_idx in enumerate(fold_split):
                hidden = [int(labeled[i]) for i in test_idx]
                visible = labels.masked(hidden)
                corpus = generate_corpus(
                    graph,
                    visible,
                    walk_config.with_seed(stream_seed(seed, _WALK_STAGE, f)),
                )
                emb = train_sgns(
                    corpus,
                    graph,
                    dimension,
                    sgns_params.with_seed(stream_seed(seed, _SGNS_STAGE, f)),
                    threads=threads,
                )
                vectors = emb.vectors[labeled]
                train_idx = np.setdiff1d(all_rows, test_idx, assume_unique=True)
                confusions.append(
                    _evaluate_fold(
                        vectors, targets, class_count, train_idx, test_idx,
                        classifier, classifier_params,
                        stream_seed(seed, _CLF_STAGE, f),
                    )
                )
        reports = tuple(metrics_from_confusion(m) for m in confusions)
        runs.append(
            SeedRun(
                seed=int(seed),
                fold_reports=reports,
                confusions=tuple(confusions),
                mean=_mean_report(reports),
            )
        )

    summary: dict[str, float] = {}
    for name in ("accuracy", "macro_precision", "macro_recall", "f1"):
        values = [getattr(run.mean, name) for run in runs]
        summary[f"{name}_mean"] = float(np.mean(values))
        summary[f"{name}_std"] = float(np.std(values))

    method = {
        "strategy": walk_config.strategy,
        "walks_per_node": walk_config.walks_per_node,
        "walk_length": walk_config.walk_length,
        "bias_probability": walk_config.bias_probability,
        "return_param": walk_config.return_param,
        "inout_param": walk_config.inout_param,
        "dimension": dimension,
        "sgns": {
            "window": sgns_params.window,
            "negatives_per_pair": sgns_params.negatives_per_pair,
            "epochs": sgns_params.epochs,
            "initial_lr": sgns_params.initial_lr,
            "final_lr": sgns_params.final_lr,
            "noise_exponent": sgns_params.noise_exponent,
        },
        "classifier": classifier,
        "classifier_params": dict(classifier_params or {}),
        "threads": threads,
    }
    return ExperimentResult(
        label=method_label(walk_config),
        dataset=dataset_descriptor(graph, labels),
        method=method,
        label_policy=label_policy,
        folds=folds,
        seeds=tuple(int(s) for s in seeds),
        runs=tuple(runs),
        summary=summary,
    )


def compare_methods(
    results: Sequence[ExperimentResult], baseline: Optional[str] = None
) -> list[dict[str, object]]:
    """Metric differences (method − baseline) in the four summary metrics.

    All results must describe the same dataset and classifier. The baseline
    defaults to the first result's label.
    """
    if len(results) == 0:
        raise ValueError("no results to compare")
    first = results[0]
    for r in results[1:]:
        if r.dataset != first.dataset:
            raise ValueError(
                f"dataset mismatch: {r.dataset} vs {first.dataset}"
            )
        if r.method["classifier"] != first.method["classifier"]:
            raise ValueError("results use different classifiers")
    if baseline is None:
        baseline = first.label
    by_label = {r.label: r for r in results}
    if baseline not in by_label:
        raise ValueError(f"baseline {baseline!r} not among the results")
    base = by_label[baseline]
    rows = []
    for r in results:
        if r.label == baseline:
            continue
        rows.append(
            {
                "method": r.label,
                "baseline": baseline,
                "acc_diff": r.summary["accuracy_mean"]
                - base.summary["accuracy_mean"],
                "prec_diff": r.summary["macro_precision_mean"]
                - base.summary["macro_precision_mean"],
                "rec_diff": r.summary["macro_recall_mean"]
                - base.summary["macro_recall_mean"],
                "f1_diff": r.summary["f1_mean"] - base.summary["f1_mean"],
            }
        )
    return rows
