"""k-nearest-neighbour interference detection from PM-counter feature vectors."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .interference import InterferenceScenario, ScenarioKind
from .linkmodel import ThroughputReport

DEFAULT_CATEGORIES = ("Interference", "NoInterference")
METRICS = ("euclidean", "manhattan")


def distance(a, b, metric: str = "euclidean") -> float:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"feature vectors differ in dimensionality: {a.shape} vs {b.shape}")
    if metric == "euclidean":
        return float(np.sqrt(np.sum((a - b) ** 2)))
    if metric == "manhattan":
        return float(np.sum(np.abs(a - b)))
    raise ValueError(f"unknown metric {metric!r}; choose from {METRICS}")


@dataclass(frozen=True)
class Normalization:
    """Per-feature z-score: ``(x - offset) / scale``."""

    offset: np.ndarray
    scale: np.ndarray

    def apply(self, x) -> np.ndarray:
        return (np.asarray(x, dtype=float) - self.offset) / self.scale


def fit_normalization(features) -> Normalization:
    """Z-score parameters from the training features.

    A feature with zero spread gets unit scale, so it is only shifted.
    """
    x = np.asarray(features.features if isinstance(features, TrainingSet) else features, dtype=float)
    if x.ndim != 2 or x.shape[0] < 2:
        raise ValueError("need at least two training samples to fit a normalization")
    mean = x.mean(axis=0)
    sd = x.std(axis=0)
    sd = np.where(sd > 0, sd, 1.0)
    return Normalization(mean, sd)


@dataclass(frozen=True, eq=False)
class TrainingSet:
    features: np.ndarray
    labels: tuple
    categories: tuple = DEFAULT_CATEGORIES

    def __post_init__(self):
        x = np.array(self.features, dtype=float)
        if x.ndim != 2:
            raise ValueError("training features must be a 2-D array (samples x metrics)")
        if not np.all(np.isfinite(x)):
            raise ValueError("training features must be finite")
        labels = tuple(str(label) for label in self.labels)
        if len(labels) != x.shape[0]:
            raise ValueError(f"{x.shape[0]} feature vectors but {len(labels)} labels")
        unknown = set(labels) - set(self.categories)
        if unknown:
            raise ValueError(f"labels {sorted(unknown)} are not in categories {self.categories}")
        x.setflags(write=False)
        object.__setattr__(self, "features", x)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "categories", tuple(self.categories))

    def __len__(self):
        return len(self.labels)

    @property
    def dim(self) -> int:
        return self.features.shape[1]

    def label_indices(self) -> np.ndarray:
        index = {c: i for i, c in enumerate(self.categories)}
        return np.array([index[label] for label in self.labels], dtype=int)

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([f"metric_{i + 1}" for i in range(self.dim)] + ["label"])
        for row, label in zip(self.features, self.labels):
            w.writerow([repr(float(v)) for v in row] + [label])
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text

    @classmethod
    def from_csv(cls, path_or_text, categories: Sequence[str] | None = None) -> "TrainingSet":
        text = str(path_or_text)
        if "\n" not in text:
            text = Path(text).read_text()
        rows = list(csv.reader(io.StringIO(text)))
        header, body = rows[0], [r for r in rows[1:] if r]
        if header[-1] != "label":
            raise ValueError("last CSV column must be 'label'")
        features = [[float(v) for v in r[:-1]] for r in body]
        labels = [r[-1] for r in body]
        if categories is None:
            categories = [c for c in DEFAULT_CATEGORIES if c in labels]
            categories += sorted(set(labels) - set(categories))
        return cls(np.array(features, dtype=float).reshape(len(body), len(header) - 1),
                   labels, tuple(categories))


@dataclass(frozen=True, eq=False)
class KnnModel:
    training: TrainingSet
    k: int = 3
    metric: str = "euclidean"
    normalization: Normalization | None = None
    _normalized: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if self.k > len(self.training):
            raise ValueError(f"k={self.k} exceeds the {len(self.training)} training samples")
        if self.metric not in METRICS:
            raise ValueError(f"unknown metric {self.metric!r}; choose from {METRICS}")
        x = self.training.features
        if self.normalization is not None:
            x = self.normalization.apply(x)
        object.__setattr__(self, "_normalized", x)

    @classmethod
    def fit(cls, training: TrainingSet, k: int = 3, metric: str = "euclidean",
            normalize: bool = False) -> "KnnModel":
        norm = fit_normalization(training) if normalize else None
        return cls(training, k=k, metric=metric, normalization=norm)

    def neighbours(self, x) -> tuple[np.ndarray, np.ndarray]:
        """Indices and distances of the k nearest training samples, nearest first.

        Equal distances keep training-set order.
        """
        x = np.asarray(x, dtype=float)
        if x.shape != (self.training.dim,):
            raise ValueError(f"query has shape {x.shape}, model expects ({self.training.dim},)")
        if not np.all(np.isfinite(x)):
            raise ValueError("query features must be finite")
        if self.normalization is not None:
            x = self.normalization.apply(x)
        diff = self._normalized - x
        if self.metric == "euclidean":
            d = np.sqrt(np.sum(diff ** 2, axis=1))
        else:
            d = np.sum(np.abs(diff), axis=1)
        order = np.argsort(d, kind="stable")[: self.k]
        return order, d[order]

    def classify(self, x) -> str:
        return classify(self, x)

    def classify_many(self, xs) -> list[str]:
        return [classify(self, x) for x in np.asarray(xs, dtype=float)]


def classify(model: KnnModel, x) -> str:
    """Majority vote among the k nearest neighbours.

    A tied vote goes to the tied class with the closest member among the k,
    then to the lowest category index.
    """
    idx, dist = model.neighbours(x)
    cats = model.training.label_indices()[idx]
    votes = np.bincount(cats, minlength=len(model.training.categories))
    tied = np.flatnonzero(votes == votes.max())
    if tied.size == 1:
        winner = int(tied[0])
    else:
        winner = min(tied, key=lambda c: (dist[cats == c].min(), c))
    return model.training.categories[winner]


def synth_pm_counters(report: ThroughputReport, noise_seed=None, noise_sd: float = 0.0) -> np.ndarray:
    """Two stand-in PM counters: PUCCH decode-failure rate and UL degradation,
    each with additive Gaussian measurement noise."""
    clean = np.array([report.pucch_failure_rate, report.ul_degradation], dtype=float)
    if noise_sd == 0:
        return clean
    rng = np.random.default_rng(noise_seed)
    return clean + rng.normal(0.0, noise_sd, size=clean.shape)


@dataclass(frozen=True)
class DetectionConfig:
    isr_re_db: float = 5.0
    n_per_class: int = 20
    k: int = 3
    noise_sd: float = 0.05
    seed: int = 0
    train_fraction: float = 0.8
    displaced_fraction: float = 0.3
    normalize: bool = True
    metric: str = "euclidean"

    def to_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass(frozen=True)
class DetectionReport:
    config: DetectionConfig
    categories: tuple
    confusion: tuple
    per_class_accuracy: dict
    accuracy: float
    n_train: int
    n_test: int
    displaced_index: int | None
    test_features: tuple
    test_labels: tuple
    predictions: tuple

    def to_dict(self) -> dict:
        return {
            "config": self.config.to_dict(),
            "categories": list(self.categories),
            "confusion": [list(row) for row in self.confusion],
            "per_class_accuracy": dict(self.per_class_accuracy),
            "accuracy": self.accuracy,
            "n_train": self.n_train,
            "n_test": self.n_test,
            "displaced_index": self.displaced_index,
            "test_features": [list(map(float, f)) for f in self.test_features],
            "test_labels": list(self.test_labels),
            "predictions": list(self.predictions),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"


def _class_reports(isr_re_db: float):
    from .harness import RunConfig, run_scenario

    run = RunConfig()
    interfered, _ = run_scenario(run, InterferenceScenario.of(ScenarioKind.PUCCH), isr_re_db)
    clean, _ = run_scenario(run, InterferenceScenario.of(ScenarioKind.NONE), 0.0)
    return {"Interference": interfered, "NoInterference": clean}


def generate_samples(config: DetectionConfig, reports=None) -> TrainingSet:
    """Noisy PM-counter samples for each class, ``n_per_class`` apiece."""
    reports = reports or _class_reports(config.isr_re_db)
    seeds = np.random.SeedSequence(config.seed).spawn(len(DEFAULT_CATEGORIES) * config.n_per_class)
    feats, labels = [], []
    i = 0
    for cat in DEFAULT_CATEGORIES:
        for _ in range(config.n_per_class):
            feats.append(synth_pm_counters(reports[cat], seeds[i], config.noise_sd))
            labels.append(cat)
            i += 1
    return TrainingSet(np.array(feats), labels, DEFAULT_CATEGORIES)


def split(samples: TrainingSet, train_fraction: float, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Per-class seeded split into training and held-out indices."""
    rng = np.random.default_rng(seed)
    labels = np.array(samples.labels)
    train, test = [], []
    for cat in samples.categories:
        idx = np.flatnonzero(labels == cat)
        idx = idx[rng.permutation(idx.size)]
        n_train = int(math.floor(train_fraction * idx.size))
        if n_train < 1 or n_train == idx.size:
            raise ValueError(f"class {cat!r} has {idx.size} samples, too few for a "
                             f"{train_fraction:.0%} train split")
        train.extend(idx[:n_train])
        test.extend(idx[n_train:])
    return np.sort(train), np.sort(test)


def run_detection_experiment(config: DetectionConfig = DetectionConfig(), reports=None) -> DetectionReport:
    """PUCCH-interference detection: train k-NN on synthetic PM-counter
    clusters, classify the held-out points and tabulate the confusion matrix.

    With ``displaced_fraction > 0`` one held-out interference point is pulled
    that fraction of the way toward the clean-cluster centroid.
    """
    samples = generate_samples(config, reports)
    train_idx, test_idx = split(samples, config.train_fraction, config.seed)
    if train_idx.size < config.k:
        raise ValueError(f"{train_idx.size} training samples is fewer than k={config.k}")
    x, labels = samples.features, np.array(samples.labels)
    training = TrainingSet(x[train_idx], labels[train_idx], samples.categories)
    model = KnnModel.fit(training, k=config.k, metric=config.metric, normalize=config.normalize)

    test_x = x[test_idx].copy()
    test_y = labels[test_idx]
    displaced = None
    if config.displaced_fraction > 0:
        target = samples.categories[0]
        centroids = {c: x[train_idx][labels[train_idx] == c].mean(axis=0) for c in samples.categories}
        displaced = int(np.flatnonzero(test_y == target)[0])
        pull = centroids[samples.categories[1]] - centroids[target]
        test_x[displaced] = test_x[displaced] + config.displaced_fraction * pull

    preds = model.classify_many(test_x)
    cats = samples.categories
    confusion = np.zeros((len(cats), len(cats)), dtype=int)
    for truth, pred in zip(test_y, preds):
        confusion[cats.index(truth), cats.index(pred)] += 1
    per_class = {c: float(confusion[i, i] / confusion[i].sum()) for i, c in enumerate(cats)}
    return DetectionReport(
        config=config,
        categories=cats,
        confusion=tuple(tuple(int(v) for v in row) for row in confusion),
        per_class_accuracy=per_class,
        accuracy=float(np.trace(confusion) / confusion.sum()),
        n_train=int(train_idx.size),
        n_test=int(test_idx.size),
        displaced_index=displaced,
        test_features=tuple(tuple(float(v) for v in row) for row in test_x),
        test_labels=tuple(str(t) for t in test_y),
        predictions=tuple(preds),
    )
