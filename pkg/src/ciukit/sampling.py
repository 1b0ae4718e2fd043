"""Deterministic seeding and single-feature perturbation sample sets."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import ConfigError, FeatureSpace, Instance


@dataclass(frozen=True)
class SeededRng:
    """Deterministic random source: PCG64 keyed by (seed, spawn path).

    The same (seed, path) pair yields the same draw sequence on every
    platform. Derived streams are addressed positionally through
    ``spawn``, e.g. per-feature work uses ``rng.spawn(feature_index)``
    and benchmark runs use ``rng.spawn(run_index)``, so results never
    depend on evaluation order.
    """

    seed: int
    path: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        if self.seed < 0:
            raise ConfigError("seed must be non-negative")

    def spawn(self, *indices: int) -> "SeededRng":
        return SeededRng(self.seed, self.path + tuple(int(i) for i in indices))

    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence(self.seed, spawn_key=self.path)
        return np.random.Generator(np.random.PCG64(seq))


def as_rng(value) -> SeededRng:
    """Coerce None (seed 0), an int seed, or a SeededRng."""
    if value is None:
        return SeededRng(0)
    if isinstance(value, SeededRng):
        return value
    if isinstance(value, (int, np.integer)):
        return SeededRng(int(value))
    raise ConfigError(f"expected an int seed or SeededRng, got {type(value).__name__}")


@dataclass(frozen=True)
class SampleSet:
    """Perturbations of one instance along a single feature.

    All instances agree with the source everywhere except ``varied_feature``.
    ``source_position`` locates the instance carrying the source's own value.
    """

    instances: tuple[Instance, ...]
    varied_feature: int
    source: Instance
    source_position: int

    @property
    def varied_values(self) -> tuple:
        i = self.varied_feature
        return tuple(inst.values[i] for inst in self.instances)


def build_sample_set(
    space: FeatureSpace,
    x: Instance,
    feature: int,
    n: int = 100,
    rng=None,
) -> SampleSet:
    """Vary one feature of ``x`` while holding the others fixed.

    Numeric features produce exactly n + 3 instances: the source value, both
    interval endpoints, and n uniform draws. The endpoints make min/max
    estimates exact for predictors that are monotone in the feature.
    Categorical features produce each declared level exactly once and ignore
    ``n``; the source's own level is the member it already has.
    """
    if not 0 <= feature < len(space):
        raise ConfigError(f"feature index {feature} out of range")
    if n < 0:
        raise ConfigError("sample count must be non-negative")
    feat = space[feature]
    if feat.is_numeric:
        gen = as_rng(rng).generator()
        instances = [x, x.replaced(feature, feat.min), x.replaced(feature, feat.max)]
        for v in gen.uniform(feat.min, feat.max, size=n):
            instances.append(x.replaced(feature, float(v)))
        return SampleSet(tuple(instances), feature, x, 0)
    instances = [x.replaced(feature, lev) for lev in feat.levels]
    position = feat.levels.index(x.values[feature])
    return SampleSet(tuple(instances), feature, x, position)


def ceteris_paribus_grid(
    space: FeatureSpace,
    x: Instance,
    feature: int,
    grid_size: int = 101,
) -> list[Instance]:
    """Evenly spaced sweep of one numeric feature, endpoints included."""
    if not 0 <= feature < len(space):
        raise ConfigError(f"feature index {feature} out of range")
    feat = space[feature]
    if not feat.is_numeric:
        raise ConfigError(
            f"feature {feat.name!r} is categorical; grids need a numeric feature"
        )
    if grid_size < 2:
        raise ConfigError("grid needs at least the two endpoints")
    grid = np.linspace(feat.min, feat.max, grid_size)
    return [x.replaced(feature, float(v)) for v in grid]
