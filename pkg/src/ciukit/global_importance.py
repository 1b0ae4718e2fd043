"""Dataset-level importance: aggregate per-instance explanations and
normalize competing methods onto a comparable scale."""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import (
    ConfigError,
    DegenerateRangeError,
    FeatureSpace,
    Instance,
    OutputUtility,
    Predictor,
)
from .baselines import (
    CLASSIFICATION_ERROR,
    MAE,
    LossSpec,
    permutation_importance,
    shapley_mc,
)
from .engine import estimate_minmax, contextual_importance
from .sampling import as_rng

GLOBAL_METHODS = ("ci", "pfi-mae", "pfi-ce", "shapley")


@dataclass(frozen=True)
class GlobalImportance:
    """Per-feature importance summary for one method.

    ``spread`` is the sample standard deviation of whatever was averaged:
    per-instance values for the single-pass aggregators, per-iteration
    means for ``run_global``. ``degenerate`` marks features whose sampled
    output interval collapsed for at least one instance.
    """

    method: str
    feature_names: tuple[str, ...]
    mean: tuple[float, ...]
    spread: tuple[float, ...]
    n_instances: int
    n_iterations: int
    elapsed: float
    normalized: bool
    degenerate: tuple[bool, ...]

    def to_json_dict(self) -> dict:
        features = []
        for k, name in enumerate(self.feature_names):
            features.append(
                {
                    "name": name,
                    "mean": float(self.mean[k]),
                    "spread": float(self.spread[k]),
                    "degenerate": bool(self.degenerate[k]),
                }
            )
        return {
            "method": self.method,
            "normalized": bool(self.normalized),
            "instances": int(self.n_instances),
            "iterations": int(self.n_iterations),
            "features": features,
        }


def normalize_importances(values: Sequence[float]) -> np.ndarray:
    """Scale importances to proportions that sum to one."""
    v = np.asarray(values, dtype=float)
    total = float(v.sum())
    if total <= 0.0 or not np.isfinite(total):
        raise DegenerateRangeError("importances sum to zero; nothing to normalize")
    return v / total


def uniform_instances(space: FeatureSpace, count: int, rng=None) -> list[Instance]:
    """Uniform draws over the feature space (uniform level choice for
    categorical features)."""
    if count < 1:
        raise ConfigError("instance count must be positive")
    gen = as_rng(rng).generator()
    rows = []
    for _ in range(count):
        vals = []
        for feat in space:
            if feat.is_numeric:
                vals.append(float(gen.uniform(feat.min, feat.max)))
            else:
                vals.append(feat.levels[int(gen.integers(0, len(feat.levels)))])
        rows.append(Instance(tuple(vals)))
    return rows


def _sd(matrix: np.ndarray) -> np.ndarray:
    # Sample standard deviation per column; zero when only one row, and
    # exactly zero for columns of identical values (float averaging would
    # otherwise smear those to ~1e-32).
    if matrix.shape[0] < 2:
        return np.zeros(matrix.shape[1])
    out = matrix.std(axis=0, ddof=1)
    out[matrix.max(axis=0) == matrix.min(axis=0)] = 0.0
    return out


def global_ci(
    predictor: Predictor,
    utility: OutputUtility,
    space: FeatureSpace,
    instances: Sequence[Instance],
    n: int = 100,
    rng=None,
    output: int = 0,
) -> GlobalImportance:
    """Mean per-feature importance over an instance sample.

    Each instance contributes one importance value per feature (interval
    width over output range width); the summary is their mean and sample
    standard deviation.
    """
    if not instances:
        raise ConfigError("global importance needs at least one instance")
    utility.range_width(output)
    base = as_rng(rng)
    start = time.perf_counter()
    ci = np.empty((len(instances), len(space)))
    degenerate = np.zeros(len(space), dtype=bool)
    for r, x in enumerate(instances):
        sub = base.spawn(r)
        for i in range(len(space)):
            ymin, ymax, _ = estimate_minmax(
                predictor, space, x, i, n, sub.spawn(i), output
            )
            ci[r, i] = contextual_importance(ymin, ymax, utility, output)
            if ymax == ymin:
                degenerate[i] = True
    elapsed = time.perf_counter() - start
    return GlobalImportance(
        method="ci",
        feature_names=space.names,
        mean=tuple(float(v) for v in ci.mean(axis=0)),
        spread=tuple(float(v) for v in _sd(ci)),
        n_instances=len(instances),
        n_iterations=1,
        elapsed=elapsed,
        normalized=False,
        degenerate=tuple(bool(v) for v in degenerate),
    )


def global_mean_abs_shapley(
    predictor: Predictor,
    space: FeatureSpace,
    instances: Sequence[Instance],
    budget: int = 200,
    rng=None,
    output: int = 0,
    background: Sequence[Instance] | None = None,
) -> GlobalImportance:
    """Mean absolute sampled Shapley value over an instance sample.

    The background defaults to the instance sample itself.
    """
    if not instances:
        raise ConfigError("global importance needs at least one instance")
    bg = list(background) if background is not None else list(instances)
    base = as_rng(rng)
    start = time.perf_counter()
    scores = np.empty((len(instances), len(space)))
    for r, x in enumerate(instances):
        att = shapley_mc(predictor, space, x, bg, budget, base.spawn(r), output)
        scores[r] = np.abs(att.phi)
    elapsed = time.perf_counter() - start
    return GlobalImportance(
        method="shapley",
        feature_names=space.names,
        mean=tuple(float(v) for v in scores.mean(axis=0)),
        spread=tuple(float(v) for v in _sd(scores)),
        n_instances=len(instances),
        n_iterations=1,
        elapsed=elapsed,
        normalized=False,
        degenerate=tuple(False for _ in space),
    )


def _pfi_targets(
    predictor: Predictor,
    rows: Sequence[Instance],
    loss: LossSpec,
    output: int,
) -> np.ndarray:
    """Self-labels for analytic predictors: the model's own outputs."""
    outs = predictor.evaluate(list(rows))
    if loss.kind == "mae":
        return outs[:, output]
    return np.argmax(outs, axis=1)


def _one_iteration(
    method: str,
    predictor: Predictor,
    utility: OutputUtility,
    space: FeatureSpace,
    rows: list[Instance],
    targets,
    rng,
    n: int,
    budget: int,
    repeats: int,
    output: int,
) -> tuple[np.ndarray, tuple[bool, ...]]:
    if method == "ci":
        g = global_ci(predictor, utility, space, rows, n, rng, output)
        return np.asarray(g.mean), g.degenerate
    if method == "shapley":
        g = global_mean_abs_shapley(predictor, space, rows, budget, rng, output)
        return np.asarray(g.mean), g.degenerate
    loss = MAE if method == "pfi-mae" else CLASSIFICATION_ERROR
    if targets is None:
        targets = _pfi_targets(predictor, rows, loss, output)
    deltas = permutation_importance(
        predictor, space, rows, targets, loss, repeats, rng, output
    )
    return deltas, tuple(False for _ in space)


def run_global(
    predictor: Predictor,
    utility: OutputUtility,
    space: FeatureSpace,
    method: str,
    iterations: int = 5,
    instances_per_iteration: int = 200,
    rng=None,
    rows: Sequence[Instance] | None = None,
    targets: Sequence | None = None,
    n: int = 100,
    budget: int = 200,
    repeats: int = 5,
    output: int = 0,
) -> GlobalImportance:
    """Repeat a global importance method and summarize across iterations.

    Each iteration draws a fresh instance sample (uniform over the feature
    space, or a bootstrap of ``rows`` when a dataset is given), computes the
    method's per-feature importances, and normalizes them to proportions.
    The result reports the mean and sample standard deviation of those
    proportions across iterations.
    """
    if method not in GLOBAL_METHODS:
        raise ConfigError(f"unknown global method {method!r}; use one of {GLOBAL_METHODS}")
    if iterations < 1:
        raise ConfigError("iterations must be positive")
    base = as_rng(rng)
    start = time.perf_counter()
    per_iter = []
    degenerate = np.zeros(len(space), dtype=bool)
    for it in range(iterations):
        sub = base.spawn(it)
        if rows is None:
            sample = uniform_instances(space, instances_per_iteration, sub.spawn(0))
            sample_targets = None
        else:
            gen = sub.spawn(0).generator()
            take = gen.integers(0, len(rows), size=min(instances_per_iteration, len(rows)))
            sample = [rows[int(k)] for k in take]
            sample_targets = (
                None if targets is None else np.asarray(targets)[np.asarray(take, dtype=int)]
            )
        raw, degen = _one_iteration(
            method, predictor, utility, space, sample, sample_targets,
            sub.spawn(1), n, budget, repeats, output,
        )
        degenerate |= np.asarray(degen)
        per_iter.append(normalize_importances(raw))
    stacked = np.vstack(per_iter)
    elapsed = time.perf_counter() - start
    return GlobalImportance(
        method=method,
        feature_names=space.names,
        mean=tuple(float(v) for v in stacked.mean(axis=0)),
        spread=tuple(float(v) for v in _sd(stacked)),
        n_instances=instances_per_iteration,
        n_iterations=iterations,
        elapsed=elapsed,
        normalized=True,
        degenerate=tuple(bool(v) for v in degenerate),
    )
