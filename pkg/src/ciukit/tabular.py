"""CSV datasets and a bagged decision-tree ensemble.

The loader infers a feature schema from the data (a column is numeric when
every value parses as a number, categorical otherwise), and the ensemble is
a from-scratch bagged CART: bootstrap rows per tree, random feature subsets
per split, Gini impurity for classification and variance for regression.
Leaf outputs are class-probability vectors or means, so every prediction
stays inside the convex hull of the training targets.
"""

from __future__ import annotations

import csv
import json
import math
import time
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import (
    CATEGORICAL,
    ConfigError,
    DataFormatError,
    FeatureSpace,
    FeatureSpec,
    Instance,
    OutputUtility,
    Predictor,
    config_from_json,
    feature_to_json,
)
from .sampling import as_rng

CLASSIFICATION = "classification"
REGRESSION = "regression"

# Impurity decrease below this is treated as no split.
_MIN_GAIN = 1e-12


@dataclass(frozen=True)
class Dataset:
    """Feature rows plus a target column.

    Classification targets are class indices into ``class_names``;
    regression targets are floats.
    """

    space: FeatureSpace
    rows: tuple[Instance, ...]
    target: tuple
    target_name: str
    task: str
    class_names: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if len(self.rows) != len(self.target):
            raise DataFormatError("rows and target must have equal length")
        if self.task not in (CLASSIFICATION, REGRESSION):
            raise DataFormatError(f"unknown task {self.task!r}")

    def __len__(self) -> int:
        return len(self.rows)

    def utility(self) -> OutputUtility:
        if self.task == CLASSIFICATION:
            return OutputUtility.classification(self.class_names)
        values = np.asarray(self.target, dtype=float)
        lo, hi = float(values.min()), float(values.max())
        if lo == hi:
            lo, hi = lo - 0.5, hi + 0.5
        return OutputUtility.single(self.target_name, out_min=lo, out_max=hi)


def _is_number(text: str) -> bool:
    try:
        v = float(text)
    except ValueError:
        return False
    return math.isfinite(v)


def _infer_feature(name: str, column: list[str]) -> FeatureSpec:
    if all(_is_number(v) for v in column):
        values = [float(v) for v in column]
        lo, hi = min(values), max(values)
        if lo == hi:
            # Constant numeric column: widen so the declaration stays valid.
            lo, hi = lo - 0.5, hi + 0.5
        return FeatureSpec.numeric(name, lo, hi)
    levels = list(dict.fromkeys(column))  # first-appearance order
    return FeatureSpec.categorical(name, levels)


def load_csv(path, target: str, schema: FeatureSpace | None = None) -> Dataset:
    """Load an RFC-4180 CSV with a header row into a Dataset.

    The target column is removed from the features. Without an explicit
    ``schema``, feature types and bounds are inferred from the data.
    Missing cells and ragged rows are rejected rather than imputed.
    """
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        table = [row for row in reader if row]
    if not table:
        raise DataFormatError(f"{path}: file is empty")
    header, *data = table
    if any(_is_number(cell) for cell in header):
        raise DataFormatError(f"{path}: first row looks like data, expected a header")
    if len(set(header)) != len(header):
        raise DataFormatError(f"{path}: duplicate column names")
    if target not in header:
        raise ConfigError(f"{path}: target column {target!r} not found")
    if not data:
        raise DataFormatError(f"{path}: no data rows")
    for k, row in enumerate(data):
        if len(row) != len(header):
            raise DataFormatError(f"{path}: row {k + 2} has {len(row)} cells, expected {len(header)}")
        if any(cell == "" for cell in row):
            raise DataFormatError(f"{path}: row {k + 2} has an empty cell")
    t_idx = header.index(target)
    feature_names = [h for h in header if h != target]
    columns = {h: [row[i] for row in data] for i, h in enumerate(header)}

    if schema is None:
        space = FeatureSpace(
            tuple(_infer_feature(name, columns[name]) for name in feature_names)
        )
    else:
        if schema.names != tuple(feature_names):
            raise ConfigError(
                f"{path}: schema features {schema.names} do not match columns {tuple(feature_names)}"
            )
        space = schema

    col_of = {h: i for i, h in enumerate(header)}
    rows = []
    for row in data:
        vals = []
        for feat in space:
            cell = row[col_of[feat.name]]
            if feat.is_numeric:
                if not _is_number(cell):
                    raise DataFormatError(
                        f"{path}: non-numeric value {cell!r} in numeric column {feat.name!r}"
                    )
                vals.append(float(cell))
            else:
                if cell not in feat.levels:
                    raise DataFormatError(
                        f"{path}: unknown level {cell!r} in column {feat.name!r}"
                    )
                vals.append(cell)
        rows.append(Instance(tuple(vals)))

    raw_target = columns[header[t_idx]]
    if all(_is_number(v) for v in raw_target):
        return Dataset(
            space, tuple(rows), tuple(float(v) for v in raw_target),
            target, REGRESSION,
        )
    class_names = tuple(dict.fromkeys(raw_target))
    index = {c: k for k, c in enumerate(class_names)}
    return Dataset(
        space, tuple(rows), tuple(index[v] for v in raw_target),
        target, CLASSIFICATION, class_names,
    )


def save_csv(dataset: Dataset, path) -> None:
    """Write a Dataset back to CSV; loading the result reproduces it."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(list(dataset.space.names) + [dataset.target_name])
        for row, t in zip(dataset.rows, dataset.target):
            cells = [str(v) for v in row.values]
            if dataset.task == CLASSIFICATION:
                cells.append(dataset.class_names[t])
            else:
                cells.append(str(t))
            writer.writerow(cells)


def holdout_split(dataset: Dataset, fraction: float = 0.25, rng=None) -> tuple[Dataset, Dataset]:
    """Seeded shuffle split into (train, test); both sides must be non-empty."""
    if not 0.0 < fraction < 1.0:
        raise ConfigError("holdout fraction must be in (0, 1)")
    n = len(dataset)
    n_test = round(n * fraction)
    if n_test < 1 or n - n_test < 1:
        raise ConfigError(
            f"cannot split {n} rows with fraction {fraction}: one side would be empty"
        )
    gen = as_rng(rng).generator()
    order = gen.permutation(n)
    test_idx = sorted(int(i) for i in order[:n_test])
    train_idx = sorted(int(i) for i in order[n_test:])

    def take(indices):
        return Dataset(
            dataset.space,
            tuple(dataset.rows[i] for i in indices),
            tuple(dataset.target[i] for i in indices),
            dataset.target_name,
            dataset.task,
            dataset.class_names,
        )

    return take(train_idx), take(test_idx)


@dataclass(frozen=True)
class TreeParams:
    """Bagged-ensemble training controls."""

    n_trees: int = 100
    max_depth: int = 8
    min_leaf: int = 1
    feature_subsample: str = "sqrt"  # "sqrt" or "all"

    def __post_init__(self) -> None:
        if self.n_trees < 1 or self.max_depth < 1 or self.min_leaf < 1:
            raise ConfigError("tree parameters must be positive")
        if self.feature_subsample not in ("sqrt", "all"):
            raise ConfigError("feature_subsample must be 'sqrt' or 'all'")


def _encode_columns(space: FeatureSpace, rows: Sequence[Instance]) -> list[np.ndarray]:
    """Numeric columns as floats; categorical columns as level codes
    (-1 for levels unseen at training time, which never match a split)."""
    cols = []
    for i, feat in enumerate(space):
        if feat.is_numeric:
            cols.append(np.asarray([r.values[i] for r in rows], dtype=float))
        else:
            index = {lev: k for k, lev in enumerate(feat.levels)}
            cols.append(
                np.asarray([index.get(r.values[i], -1) for r in rows], dtype=int)
            )
    return cols


def _leaf(y: np.ndarray, n_outputs: int, task: str) -> dict:
    if task == CLASSIFICATION:
        counts = np.bincount(y, minlength=n_outputs)
        return {"leaf": [float(v) for v in counts / counts.sum()]}
    return {"leaf": [float(y.mean())]}


def _impurity_sums(y: np.ndarray, task: str, n_outputs: int):
    # Returns (total impurity * n, helper state) for fast split scoring.
    if task == CLASSIFICATION:
        counts = np.bincount(y, minlength=n_outputs).astype(float)
        n = len(y)
        return n * (1.0 - np.sum((counts / n) ** 2)), counts
    return float(np.sum((y - y.mean()) ** 2)), None


def _score_numeric(v: np.ndarray, y: np.ndarray, task: str, n_outputs: int, min_leaf: int):
    """Best (gain, threshold) for one numeric column, or None."""
    order = np.argsort(v, kind="mergesort")
    vs, ys = v[order], y[order]
    n = len(ys)
    # split after position k means left = first k+1 rows
    cut = np.nonzero(vs[1:] > vs[:-1])[0]  # candidate boundaries
    cut = cut[(cut + 1 >= min_leaf) & (n - cut - 1 >= min_leaf)]
    if cut.size == 0:
        return None
    if task == CLASSIFICATION:
        onehot = np.zeros((n, n_outputs))
        onehot[np.arange(n), ys] = 1.0
        left_counts = np.cumsum(onehot, axis=0)[cut]
        left_n = (cut + 1).astype(float)
        right_counts = np.sum(onehot, axis=0) - left_counts
        right_n = n - left_n
        gini_l = left_n - np.sum(left_counts**2, axis=1) / left_n
        gini_r = right_n - np.sum(right_counts**2, axis=1) / right_n
        parent, _ = _impurity_sums(ys, task, n_outputs)
        gains = parent - gini_l - gini_r
    else:
        ysf = ys.astype(float)
        csum = np.cumsum(ysf)[cut]
        csum2 = np.cumsum(ysf**2)[cut]
        left_n = (cut + 1).astype(float)
        tot, tot2 = float(ysf.sum()), float(np.sum(ysf**2))
        right_n = n - left_n
        sse_l = csum2 - csum**2 / left_n
        sse_r = (tot2 - csum2) - (tot - csum) ** 2 / right_n
        parent = tot2 - tot**2 / n
        gains = parent - sse_l - sse_r
    k = int(np.argmax(gains))
    gain = float(gains[k])
    threshold = float((vs[cut[k]] + vs[cut[k] + 1]) / 2.0)
    return gain, threshold


def _score_categorical(v: np.ndarray, y: np.ndarray, task: str, n_outputs: int, min_leaf: int):
    """Best (gain, level code) one-vs-rest split, or None."""
    parent, _ = _impurity_sums(y, task, n_outputs)
    best = None
    for code in np.unique(v):
        mask = v == code
        nl, nr = int(mask.sum()), int((~mask).sum())
        if nl < min_leaf or nr < min_leaf or nl == 0 or nr == 0:
            continue
        il, _ = _impurity_sums(y[mask], task, n_outputs)
        ir, _ = _impurity_sums(y[~mask], task, n_outputs)
        gain = parent - il - ir
        if best is None or gain > best[0]:
            best = (float(gain), int(code))
    return best


def _grow(
    cols: list[np.ndarray],
    y: np.ndarray,
    idx: np.ndarray,
    depth: int,
    space: FeatureSpace,
    params: TreeParams,
    task: str,
    n_outputs: int,
    gen: np.random.Generator,
) -> dict:
    node_y = y[idx]
    if (
        depth >= params.max_depth
        or len(idx) < 2 * params.min_leaf
        or np.all(node_y == node_y[0])
    ):
        return _leaf(node_y, n_outputs, task)
    n_feat = len(space)
    if params.feature_subsample == "sqrt":
        k = max(1, round(math.sqrt(n_feat)))
    else:
        k = n_feat
    candidates = gen.choice(n_feat, size=k, replace=False)
    best = None  # (gain, feature, kind, split value)
    for i in sorted(int(c) for c in candidates):
        v = cols[i][idx]
        if space[i].is_numeric:
            scored = _score_numeric(v, node_y, task, n_outputs, params.min_leaf)
            kind = "threshold"
        else:
            scored = _score_categorical(v, node_y, task, n_outputs, params.min_leaf)
            kind = "level"
        if scored is not None and (best is None or scored[0] > best[0]):
            best = (scored[0], i, kind, scored[1])
    if best is None or best[0] <= _MIN_GAIN:
        return _leaf(node_y, n_outputs, task)
    _, feature, kind, value = best
    v = cols[feature][idx]
    if kind == "threshold":
        mask = v <= value
        node = {"feature": feature, "threshold": value}
    else:
        mask = v == value
        node = {"feature": feature, "level": space[feature].levels[value]}
    node["left"] = _grow(cols, y, idx[mask], depth + 1, space, params, task, n_outputs, gen)
    node["right"] = _grow(cols, y, idx[~mask], depth + 1, space, params, task, n_outputs, gen)
    return node


class TreeEnsemble(Predictor):
    """Average of bagged CART trees; outputs are class probabilities or a mean."""

    def __init__(
        self,
        space: FeatureSpace,
        trees: Sequence[dict],
        task: str,
        class_names: Sequence[str] = (),
        params: TreeParams = TreeParams(),
    ):
        self.space = space
        self.trees = tuple(trees)
        self.task = task
        self.class_names = tuple(class_names)
        self.params = params
        self.n_outputs = len(self.class_names) if task == CLASSIFICATION else 1

    def evaluate(self, instances: Sequence[Instance]) -> np.ndarray:
        cols = _encode_columns(self.space, instances)
        total = np.zeros((len(instances), self.n_outputs))
        idx = np.arange(len(instances))
        for tree in self.trees:
            self._route(tree, cols, idx, total)
        return total / len(self.trees)

    def _route(self, node: dict, cols, idx: np.ndarray, total: np.ndarray) -> None:
        if idx.size == 0:
            return
        if "leaf" in node:
            total[idx] += np.asarray(node["leaf"])
            return
        i = node["feature"]
        v = cols[i][idx]
        if "threshold" in node:
            mask = v <= node["threshold"]
        else:
            code = self.space[i].levels.index(node["level"])
            mask = v == code
        self._route(node["left"], cols, idx[mask], total)
        self._route(node["right"], cols, idx[~mask], total)

    def predicted_class(self, instances: Sequence[Instance]) -> list[str]:
        if self.task != CLASSIFICATION:
            raise ConfigError("predicted_class needs a classification ensemble")
        probs = self.evaluate(instances)
        return [self.class_names[int(k)] for k in np.argmax(probs, axis=1)]


def train_ensemble(dataset: Dataset, params: TreeParams = TreeParams(), rng=None) -> TreeEnsemble:
    """Fit a bagged tree ensemble: bootstrap rows per tree, random feature
    subsets per split. Tree t draws from the stream (seed, t), so the model
    is reproducible for a fixed seed.

    A single-class classification target yields a constant predictor and a
    warning rather than an error.
    """
    if len(dataset) < 2:
        raise ConfigError("training needs at least two rows")
    base = as_rng(rng)
    if dataset.task == CLASSIFICATION:
        n_outputs = len(dataset.class_names)
        y = np.asarray(dataset.target, dtype=int)
        if n_outputs == 1:
            warnings.warn(
                "training data has a single class; the model is constant",
                stacklevel=2,
            )
            return TreeEnsemble(
                dataset.space, [{"leaf": [1.0]}], dataset.task,
                dataset.class_names, params,
            )
    else:
        n_outputs = 1
        y = np.asarray(dataset.target, dtype=float)
    cols = _encode_columns(dataset.space, dataset.rows)
    n = len(dataset)
    trees = []
    for t in range(params.n_trees):
        gen = base.spawn(t).generator()
        boot = np.sort(gen.integers(0, n, size=n))
        trees.append(
            _grow(cols, y, boot, 0, dataset.space, params, dataset.task, n_outputs, gen)
        )
    return TreeEnsemble(dataset.space, trees, dataset.task, dataset.class_names, params)


def accuracy(model: TreeEnsemble, dataset: Dataset) -> float:
    """Classification accuracy or regression R^2 on a dataset."""
    outputs = model.evaluate(list(dataset.rows))
    if dataset.task == CLASSIFICATION:
        predicted = np.argmax(outputs, axis=1)
        return float(np.mean(predicted == np.asarray(dataset.target)))
    t = np.asarray(dataset.target, dtype=float)
    ss_res = float(np.sum((outputs[:, 0] - t) ** 2))
    ss_tot = float(np.sum((t - t.mean()) ** 2))
    if ss_tot == 0.0:
        return 1.0 if ss_res == 0.0 else 0.0
    return 1.0 - ss_res / ss_tot


def save_model(path, model: TreeEnsemble) -> None:
    doc = {
        "kind": "tree-ensemble",
        "task": model.task,
        "class_names": list(model.class_names),
        "params": {
            "n_trees": model.params.n_trees,
            "max_depth": model.params.max_depth,
            "min_leaf": model.params.min_leaf,
            "feature_subsample": model.params.feature_subsample,
        },
        "features": [feature_to_json(f) for f in model.space],
        "trees": list(model.trees),
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, sort_keys=True)
        fh.write("\n")


def load_model(path, space: FeatureSpace | None = None) -> TreeEnsemble:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as e:
        raise DataFormatError(f"model {path}: invalid JSON ({e})") from None
    if not isinstance(doc, dict) or doc.get("kind") != "tree-ensemble":
        raise DataFormatError(f"model {path}: not a tree-ensemble document")
    if "features" in doc:
        space, _ = config_from_json({"features": doc["features"]})
    elif space is None:
        raise ConfigError(
            f"model {path}: no feature declarations; pass a feature-space config"
        )
    params = TreeParams(**doc.get("params", {}))
    return TreeEnsemble(
        space, doc["trees"], doc["task"], doc.get("class_names", ()), params
    )
