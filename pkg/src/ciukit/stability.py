"""Benchmark harness: repeat explanation methods under fresh seeds and
summarize the spread of their attributions.

Runs execute sequentially so per-run wall-clock times stay comparable.
Timing is environment-dependent by nature; treat elapsed ratios between
methods as indicative, not as a portable measurement.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import ConfigError, FeatureSpace, Instance, OutputUtility, Predictor
from .baselines import (
    METHOD_INFLUENCE,
    METHOD_LIME,
    METHOD_SHAPLEY,
    lime_surrogate,
    shapley_mc,
)
from .engine import explain_instance
from .global_importance import uniform_instances
from .sampling import SeededRng, as_rng

ALL_METHODS = (METHOD_INFLUENCE, METHOD_SHAPLEY, METHOD_LIME)


@dataclass(frozen=True)
class Budgets:
    """Per-method sample budgets, held fixed across a benchmark."""

    ciu_samples: int = 100
    shapley_budget: int = 200
    lime_samples: int = 1000

    def __post_init__(self) -> None:
        if min(self.ciu_samples, self.shapley_budget, self.lime_samples) < 1:
            raise ConfigError("budgets must be positive")


@dataclass(frozen=True)
class StabilityReport:
    """Every attribution vector from R seeded runs of one method.

    Run r uses the random stream derived from (seed, run index r), so any
    individual run can be reproduced without re-running the others.
    """

    method: str
    feature_names: tuple[str, ...]
    runs: tuple[tuple[float, ...], ...]
    elapsed: tuple[float, ...]
    seed: int
    budgets: Budgets
    phi0: float
    output_index: int

    def __post_init__(self) -> None:
        if not self.feature_names:
            raise ConfigError("stability report needs at least one feature")
        if len(self.runs) < 2:
            raise ConfigError("stability needs at least two runs")

    @property
    def n_runs(self) -> int:
        return len(self.runs)

    def matrix(self) -> np.ndarray:
        return np.asarray(self.runs)

    def mean(self) -> np.ndarray:
        return self.matrix().mean(axis=0)

    def sd(self) -> np.ndarray:
        mat = self.matrix()
        out = mat.std(axis=0, ddof=1)
        # A column of identical values has zero spread by definition; keep
        # that exact instead of the ~1e-32 smear float averaging produces.
        out[mat.max(axis=0) == mat.min(axis=0)] = 0.0
        return out

    def to_json_dict(self) -> dict:
        return {
            "method": self.method,
            "seed": int(self.seed),
            "runs": int(self.n_runs),
            "phi0": float(self.phi0),
            "output": int(self.output_index),
            "budgets": {
                "ciu_samples": self.budgets.ciu_samples,
                "shapley_budget": self.budgets.shapley_budget,
                "lime_samples": self.budgets.lime_samples,
            },
            "feature_names": list(self.feature_names),
            "values": [[float(v) for v in run] for run in self.runs],
        }


def _run_once(
    method: str,
    predictor: Predictor,
    utility: OutputUtility,
    space: FeatureSpace,
    x: Instance,
    budgets: Budgets,
    rng: SeededRng,
    phi0: float,
    output: int,
    background: Sequence[Instance] | None,
) -> tuple[float, ...]:
    if method == METHOD_INFLUENCE:
        exp = explain_instance(
            predictor, utility, space, x, output, budgets.ciu_samples, phi0, rng
        )
        return tuple(float(v) for v in exp.influence_vector())
    if method == METHOD_SHAPLEY:
        att = shapley_mc(
            predictor, space, x, background, budgets.shapley_budget, rng, output
        )
        return att.phi
    att = lime_surrogate(
        predictor, space, x, budgets.lime_samples, rng=rng, output=output
    )
    return att.phi


def run_stability(
    predictor: Predictor,
    utility: OutputUtility,
    space: FeatureSpace,
    x: Instance,
    methods: Sequence[str] = ALL_METHODS,
    runs: int = 50,
    budgets: Budgets = Budgets(),
    seed: int = 42,
    phi0: float = 0.5,
    output: int = 0,
    background: Sequence[Instance] | None = None,
) -> dict[str, StabilityReport]:
    """Benchmark explanation stability: R independent seeded runs per method.

    Every method sees the same instance, the same budgets, and run-indexed
    random streams. Methods whose estimates have no sampling noise (the
    endpoint-anchored influence on monotone predictors) come back with zero
    spread; Monte-Carlo methods show their seed-to-seed variation.
    """
    if runs < 2:
        raise ConfigError("stability needs at least two runs")
    for m in methods:
        if m not in ALL_METHODS:
            raise ConfigError(f"unknown method {m!r}; use one of {ALL_METHODS}")
    base = as_rng(seed)
    if background is None and METHOD_SHAPLEY in methods:
        # The background is part of the problem setup, like a dataset, so it
        # is drawn once and shared by every run; per-run spread then reflects
        # only the estimator's own sampling noise. The spawn index is far
        # outside any realistic run count.
        background = uniform_instances(space, 1000, base.spawn(987654321))
    reports = {}
    for m in methods:
        values = []
        times = []
        for r in range(runs):
            t0 = time.perf_counter()
            values.append(
                _run_once(
                    m, predictor, utility, space, x,
                    budgets, base.spawn(r), phi0, output, background,
                )
            )
            times.append(time.perf_counter() - t0)
        reports[m] = StabilityReport(
            method=m,
            feature_names=space.names,
            runs=tuple(values),
            elapsed=tuple(times),
            seed=base.seed,
            budgets=budgets,
            phi0=phi0,
            output_index=output,
        )
    return reports


def summarize(report: StabilityReport) -> str:
    """Fixed-width text table: per-feature mean, spread, and extremes."""
    mean = report.mean()
    sd = report.sd()
    mat = report.matrix()
    lines = [
        f"method: {report.method}   runs: {report.n_runs}   seed: {report.seed}",
        f"{'feature':<16} {'mean':>10} {'sd':>10} {'min':>10} {'max':>10}",
    ]
    for i, name in enumerate(report.feature_names):
        lines.append(
            f"{name:<16} {mean[i]:>10.4f} {sd[i]:>10.4f}"
            f" {mat[:, i].min():>10.4f} {mat[:, i].max():>10.4f}"
        )
    total = sum(report.elapsed)
    lines.append(f"elapsed: total {total:.3f}s, per run {total / report.n_runs:.4f}s")
    return "\n".join(lines)


def stability_csv(report: StabilityReport) -> str:
    """Long-format CSV: one row per (run, feature) attribution value."""
    lines = ["method,run,feature,value"]
    for r, run in enumerate(report.runs):
        for name, v in zip(report.feature_names, run):
            lines.append(f"{report.method},{r},{name},{v!r}")
    return "\n".join(lines) + "\n"
