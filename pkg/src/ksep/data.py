"""Two-class datasets: CSV ingestion, truth-table export and evaluation."""
from __future__ import annotations

import csv
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .boolfn import BooleanFunction, vertex_coordinates
from .learner import TrainConfig, fit_interval_model


class DataError(ValueError):
    """Malformed or unusable input data."""


class SmallBooleanCVWarning(UserWarning):
    """Cross-validation on a tiny truth table says little about generalization."""


@dataclass
class LabeledDataset:
    points: np.ndarray
    labels: np.ndarray  # True = plus
    feature_names: list[str]
    class_names: tuple[str, str] = ("0", "1")  # (minus, plus)
    provenance: str = ""
    boolean_n: int | None = None

    def __post_init__(self) -> None:
        self.points = np.asarray(self.points, dtype=float)
        self.labels = np.asarray(self.labels, dtype=bool)
        if self.points.ndim != 2:
            raise DataError("points must be a 2-D array")
        if len(self.points) != len(self.labels):
            raise DataError("one label per point")
        if np.isnan(self.points).any():
            raise DataError("dataset contains NaN values")

    def __len__(self) -> int:
        return len(self.labels)

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def degenerate(self) -> bool:
        return bool(self.labels.all() or not self.labels.any())

    def subset(self, idx) -> "LabeledDataset":
        idx = np.asarray(idx)
        return LabeledDataset(self.points[idx], self.labels[idx], list(self.feature_names),
                              self.class_names, self.provenance, self.boolean_n)

    def standardized(self) -> "LabeledDataset":
        """Zero mean, unit variance per feature (constant features only centered)."""
        mu = self.points.mean(axis=0)
        sd = self.points.std(axis=0)
        sd[sd == 0] = 1.0
        return LabeledDataset((self.points - mu) / sd, self.labels.copy(),
                              list(self.feature_names), self.class_names,
                              self.provenance + " (standardized)", None)


def load_csv(path, delimiter: str = ",", header: bool = True, label_column=-1,
             positive: str | None = None) -> LabeledDataset:
    """Read numeric features plus one label column with at most two values.

    ``label_column`` is an index or, with a header, a column name.  The plus
    class is ``positive`` if given, else ``"1"``/``"+"``/``"true"`` when
    present, else the second value in sorted order.
    """
    path = Path(path)
    try:
        with path.open(newline="") as fh:
            rows = list(csv.reader(fh, delimiter=delimiter))
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from None
    rows = [r for r in rows if any(c.strip() for c in r)]
    if not rows:
        raise DataError(f"{path}: no data rows")
    names = None
    first_line = 1
    if header:
        names = [c.strip() for c in rows[0]]
        rows = rows[1:]
        first_line = 2
    width = len(names) if names else len(rows[0])
    if isinstance(label_column, str):
        if not names or label_column not in names:
            raise DataError(f"{path}: no column named {label_column!r}")
        lab_idx = names.index(label_column)
    else:
        lab_idx = label_column % width
    feat_idx = [i for i in range(width) if i != lab_idx]
    feature_names = [names[i] for i in feat_idx] if names else [f"x{i + 1}" for i in range(len(feat_idx))]

    feats, raw_labels, missing = [], [], []
    for line, row in enumerate(rows, start=first_line):
        if len(row) != width:
            raise DataError(f"{path}:{line}: expected {width} columns, found {len(row)}")
        cells = [c.strip() for c in row]
        if any(c == "" for c in cells):
            missing.append(line)
            continue
        vals = []
        for col in feat_idx:
            try:
                vals.append(float(cells[col]))
            except ValueError:
                raise DataError(
                    f"{path}:{line}: column {col + 1} is not numeric: {cells[col]!r}") from None
        if any(np.isnan(vals)):
            missing.append(line)
            continue
        feats.append(vals)
        raw_labels.append(cells[lab_idx])
    if missing:
        raise DataError(f"{path}: missing values on rows {', '.join(map(str, missing))}")
    if not feats:
        raise DataError(f"{path}: no data rows")

    values = sorted(set(raw_labels))
    if len(values) > 2:
        raise DataError(f"{path}: label column has {len(values)} classes: {', '.join(values)}")
    if positive is not None:
        if positive not in values:
            raise DataError(f"{path}: positive class {positive!r} not among {values}")
        plus = positive
    else:
        plus = next((v for v in values if v.lower() in ("1", "+", "+1", "true")), values[-1])
    minus = next((v for v in values if v != plus), "")
    labels = np.array([v == plus for v in raw_labels])
    return LabeledDataset(np.array(feats), labels, feature_names, (minus, plus), str(path))


def save_csv(data: LabeledDataset, path, delimiter: str = ",") -> None:
    """Export with a header row ``<features...>,label``; labels written by class name."""
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, delimiter=delimiter, lineterminator="\n")
        w.writerow(list(data.feature_names) + ["label"])
        for x, y in zip(data.points, data.labels):
            cells = [str(int(v)) if float(v).is_integer() else repr(float(v)) for v in x]
            w.writerow(cells + [data.class_names[1] if y else data.class_names[0]])


def from_boolean(f: BooleanFunction) -> LabeledDataset:
    pts = [vertex_coordinates(f.n, v) for v in range(f.n_vertices)]
    labels = [f.value(v) for v in range(f.n_vertices)]
    return LabeledDataset(np.array(pts, dtype=float), np.array(labels),
                          [f"x{i + 1}" for i in range(f.n)], ("0", "1"),
                          f"boolean n={f.n} index={f.table}", f.n)


@dataclass
class CVPlan:
    scheme: str = "kfold"  # "kfold" (stratified) or "loo"
    folds: int = 5
    seed: int = 0

    def __post_init__(self) -> None:
        if self.scheme not in ("kfold", "loo"):
            raise ValueError("scheme must be 'kfold' or 'loo'")
        if self.scheme == "kfold" and self.folds < 2:
            raise ValueError("need at least 2 folds")


def make_folds(labels, plan: CVPlan) -> list[np.ndarray]:
    """Held-out index sets.  Stratified k-fold deals each shuffled class round-robin."""
    labels = np.asarray(labels, dtype=bool)
    m = len(labels)
    if plan.scheme == "loo":
        return [np.array([i]) for i in range(m)]
    rng = np.random.default_rng(plan.seed)
    buckets: list[list[int]] = [[] for _ in range(plan.folds)]
    start = 0
    for cls in (False, True):
        idx = np.flatnonzero(labels == cls)
        rng.shuffle(idx)
        for i, v in enumerate(idx):
            buckets[(start + i) % plan.folds].append(int(v))
        # continue dealing where this class stopped so fold sizes stay balanced
        start = (start + len(idx)) % plan.folds
    return [np.array(sorted(b), dtype=int) for b in buckets if b]


@dataclass
class CVSummary:
    accuracies: list[float]
    fold_k: list[int]
    fold_pure: list[bool]
    warnings: list[str] = field(default_factory=list)

    @property
    def mean(self) -> float:
        return float(np.mean(self.accuracies))

    @property
    def std(self) -> float:
        return float(np.std(self.accuracies))

    @property
    def k_distribution(self) -> dict[int, int]:
        ks, counts = np.unique(self.fold_k, return_counts=True)
        return {int(k): int(c) for k, c in zip(ks, counts)}

    def to_json(self) -> dict:
        return {
            "mean_accuracy": self.mean,
            "std_accuracy": self.std,
            "fold_accuracy": self.accuracies,
            "fold_k": self.fold_k,
            "fold_pure": self.fold_pure,
            "k_distribution": {str(k): c for k, c in self.k_distribution.items()},
            "warnings": self.warnings,
        }


def crossvalidate(data: LabeledDataset, cfg: TrainConfig | None = None,
                  plan: CVPlan | None = None, workers: int = 1) -> CVSummary:
    """Fit on each training split, score the held-out points, aggregate by fold index."""
    cfg = cfg or TrainConfig()
    plan = plan or CVPlan()
    if data.degenerate:
        raise DataError("cross-validation needs both classes")
    if plan.scheme == "kfold":
        smallest = min(int(data.labels.sum()), int((~data.labels).sum()))
        if smallest < 2:
            raise DataError("stratified folds need at least 2 points per class")
    notes = []
    folds = make_folds(data.labels, plan)
    if data.boolean_n is not None and data.boolean_n <= 3:
        msg = (f"cross-validating a {data.boolean_n}-bit truth table: with so few vertices "
               "the held-out values are not implied by the rest, so accuracy is weakly informative")
        warnings.warn(msg, SmallBooleanCVWarning, stacklevel=2)
        notes.append(msg)
    all_idx = np.arange(len(data))

    def run(test):
        train = np.setdiff1d(all_idx, test)
        tr = data.subset(train)
        if tr.degenerate:
            raise DataError(f"training split without one class (held out {test.tolist()})")
        model, report = fit_interval_model(tr.points, tr.labels, cfg)
        acc = model.accuracy(data.points[test], data.labels[test])
        return acc, model.k, report.pure

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, folds))
    else:
        results = [run(t) for t in folds]
    return CVSummary([r[0] for r in results], [r[1] for r in results],
                     [r[2] for r in results], notes)


@dataclass
class ComplexityReport:
    k: int
    pure: bool
    min_gap: float | None
    cluster_sizes: list[int]
    accuracy: float

    def to_json(self) -> dict:
        return {"k": self.k, "pure": self.pure, "min_gap": self.min_gap,
                "cluster_sizes": self.cluster_sizes, "accuracy": self.accuracy}


def complexity_index(data: LabeledDataset, cfg: TrainConfig | None = None) -> ComplexityReport:
    """Fitted k with its margin and cluster sizes, as a data-complexity summary."""
    if data.degenerate:
        raise DataError("complexity index needs two classes")
    _, report = fit_interval_model(data.points, data.labels, cfg)
    return ComplexityReport(report.k, report.pure, report.min_gap, report.cluster_sizes,
                            report.accuracy)
