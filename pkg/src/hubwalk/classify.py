"""The three downstream classifiers: linear SVM, Gaussian NB, random forest.

All are trained from scratch on dense feature matrices. SVM and NB
standardize features internally (statistics learned from the training data
and stored in the model); trees see raw features since splits are
scale-invariant. Every tie anywhere resolves to the lowest class index,
which keeps predictions deterministic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import _kernels

_UNLIMITED_DEPTH = 1 << 30


@dataclass(frozen=True)
class Dataset:
    """Feature rows with integer class targets in [0, class_count)."""

    features: np.ndarray
    targets: np.ndarray
    class_count: int = 0

    def __post_init__(self) -> None:
        features = np.ascontiguousarray(self.features, dtype=np.float64)
        targets = np.ascontiguousarray(self.targets, dtype=np.int32)
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "targets", targets)
        if features.ndim != 2:
            raise ValueError("features must be a 2-d matrix")
        if targets.ndim != 1 or len(targets) != features.shape[0]:
            raise ValueError("one target per feature row required")
        if not np.isfinite(features).all():
            raise ValueError("features contain non-finite values")
        inferred = int(targets.max()) + 1 if len(targets) else 0
        if self.class_count == 0:
            object.__setattr__(self, "class_count", inferred)
        elif inferred > self.class_count:
            raise ValueError("target outside [0, class_count)")
        if len(targets) and targets.min() < 0:
            raise ValueError("targets must be non-negative")

    @property
    def n_samples(self) -> int:
        return self.features.shape[0]

    @property
    def dimension(self) -> int:
        return self.features.shape[1]


def _require_multiclass(data: Dataset) -> None:
    if len(np.unique(data.targets)) < 2:
        raise ValueError("training data must contain at least 2 classes")


def _standardizer(features: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    mean = features.mean(axis=0)
    scale = features.std(axis=0)
    scale = np.where(scale == 0.0, 1.0, scale)
    return mean, scale


@dataclass(frozen=True)
class LinearSvmModel:
    """One-vs-rest linear classifiers; argmax of decision values predicts."""

    kind: str = field(default="svm", init=False)
    weights: np.ndarray  # (class_count, dimension)
    bias: np.ndarray
    mean: np.ndarray
    scale: np.ndarray
    class_count: int

    @property
    def dimension(self) -> int:
        return self.weights.shape[1]

    def decision_values(self, features: np.ndarray) -> np.ndarray:
        scaled = (features - self.mean) / self.scale
        return scaled @ self.weights.T + self.bias

    def predict(self, features: np.ndarray) -> np.ndarray:
        # np.argmax returns the first maximum: ties go to the lower index
        return self.decision_values(features).argmax(axis=1).astype(np.int32)


@dataclass(frozen=True)
class GaussianNbModel:
    """Per-class diagonal Gaussians with empirical priors."""

    kind: str = field(default="nb", init=False)
    means: np.ndarray  # (class_count, dimension)
    variances: np.ndarray
    log_priors: np.ndarray
    mean: np.ndarray
    scale: np.ndarray
    class_count: int

    @property
    def dimension(self) -> int:
        return self.means.shape[1]

    def log_posteriors(self, features: np.ndarray) -> np.ndarray:
        scaled = (features - self.mean) / self.scale
        out = np.empty((features.shape[0], self.class_count))
        for c in range(self.class_count):
            var = self.variances[c]
            diff = scaled - self.means[c]
            out[:, c] = self.log_priors[c] - 0.5 * (
                np.log(2.0 * np.pi * var) + diff * diff / var
            ).sum(axis=1)
        return out

    def predict(self, features: np.ndarray) -> np.ndarray:
        return self.log_posteriors(features).argmax(axis=1).astype(np.int32)


@dataclass(frozen=True)
class DecisionTree:
    """Flat array form of one trained tree (see the build kernel)."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    label: np.ndarray

    def predict(self, features: np.ndarray) -> np.ndarray:
        out = np.empty(features.shape[0], dtype=np.int32)
        features = np.ascontiguousarray(features, dtype=np.float64)
        _kernels.tree_predict(
            self.feature, self.threshold, self.left, self.right, self.label,
            features, out,
        )
        return out


@dataclass(frozen=True)
class RandomForestModel:
    """Bootstrap ensemble of Gini trees; majority vote predicts."""

    kind: str = field(default="rf", init=False)
    trees: tuple[DecisionTree, ...]
    class_count: int
    dimension: int

    def predict(self, features: np.ndarray) -> np.ndarray:
        votes = np.zeros((features.shape[0], self.class_count), dtype=np.int64)
        if features.shape[0] == 0:
            return np.empty(0, dtype=np.int32)
        rows = np.arange(features.shape[0])
        for tree in self.trees:
            votes[rows, tree.predict(features)] += 1
        return votes.argmax(axis=1).astype(np.int32)


TrainedModel = LinearSvmModel | GaussianNbModel | RandomForestModel


def train_linear_svm(
    data: Dataset,
    epochs: int = 100,
    regularization: float = 1e-4,
    rng_seed: int = 0,
    learning_rate: float = 0.1,
) -> LinearSvmModel:
    """Hinge-loss SGD over standardized features, one binary problem per
    class. Deterministic for a fixed seed."""
    _require_multiclass(data)
    if epochs < 1:
        raise ValueError("epochs must be >= 1")
    if regularization < 0:
        raise ValueError("regularization must be >= 0")
    mean, scale = _standardizer(data.features)
    scaled = np.ascontiguousarray((data.features - mean) / scale)
    weights, bias = _kernels.svm_train(
        scaled,
        data.targets,
        data.class_count,
        epochs,
        float(regularization),
        float(learning_rate),
        np.uint64(rng_seed & _kernels.U64_MASK),
    )
    return LinearSvmModel(
        weights=weights, bias=bias, mean=mean, scale=scale,
        class_count=data.class_count,
    )


def train_gaussian_nb(data: Dataset, variance_floor: float = 1e-9) -> GaussianNbModel:
    """Per-class feature means/variances (floored) plus empirical priors."""
    _require_multiclass(data)
    if variance_floor <= 0:
        raise ValueError("variance_floor must be positive")
    mean, scale = _standardizer(data.features)
    scaled = (data.features - mean) / scale
    c = data.class_count
    d = data.dimension
    means = np.zeros((c, d))
    variances = np.full((c, d), variance_floor)
    priors = np.full(c, -np.inf)
    for cls in range(c):
        rows = scaled[data.targets == cls]
        if len(rows) == 0:
            continue
        means[cls] = rows.mean(axis=0)
        variances[cls] = np.maximum(rows.var(axis=0), variance_floor)
        priors[cls] = math.log(len(rows) / data.n_samples)
    return GaussianNbModel(
        means=means, variances=variances, log_priors=priors,
        mean=mean, scale=scale, class_count=c,
    )


def train_random_forest(
    data: Dataset,
    n_estimators: int = 100,
    max_depth: Optional[int] = None,
    rng_seed: int = 0,
    bootstrap: bool = True,
    max_features: Optional[int] = None,
) -> RandomForestModel:
    """Bootstrap-sampled Gini trees over ceil(sqrt(d)) random features per
    node (overridable). Tree t depends only on (rng_seed, t), so the first
    trees of a larger forest equal a smaller forest's trees."""
    _require_multiclass(data)
    if n_estimators < 1:
        raise ValueError("n_estimators must be >= 1")
    depth = _UNLIMITED_DEPTH if max_depth is None else int(max_depth)
    if depth < 1:
        raise ValueError("max_depth must be >= 1")
    d = data.dimension
    if max_features is None:
        n_features = min(d, max(1, math.isqrt(d) + (math.isqrt(d) ** 2 < d)))
    else:
        n_features = max_features
    if not 1 <= n_features <= d:
        raise ValueError("max_features must lie in [1, dimension]")

    trees = []
    for t in range(n_estimators):
        rng = np.random.default_rng([rng_seed, t])
        if bootstrap:
            rows = rng.integers(0, data.n_samples, data.n_samples)
            x = np.ascontiguousarray(data.features[rows])
            y = np.ascontiguousarray(data.targets[rows])
        else:
            x = data.features
            y = data.targets
        tree_seed = np.uint64(rng.integers(0, 1 << 62))
        parts = _kernels.tree_build(
            x, y, data.class_count, depth, n_features, tree_seed
        )
        trees.append(DecisionTree(*parts))
    return RandomForestModel(
        trees=tuple(trees), class_count=data.class_count, dimension=d
    )


def predict(model: TrainedModel, features: np.ndarray) -> np.ndarray:
    """One label per row, in [0, class_count); empty input → empty output."""
    features = np.ascontiguousarray(features, dtype=np.float64)
    if features.ndim != 2:
        raise ValueError("features must be a 2-d matrix")
    if features.shape[1] != model.dimension:
        raise ValueError(
            f"feature dimension {features.shape[1]} does not match the "
            f"model's training dimension {model.dimension}"
        )
    return model.predict(features)
