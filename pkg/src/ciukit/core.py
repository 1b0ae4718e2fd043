"""Feature spaces, instances, predictor contracts, and output utilities.

Every type here is immutable after construction and safe to share across
threads. Predictors are the extension point: subclass ``Predictor`` (or wrap
a vectorized function with ``FunctionPredictor``) and the rest of the toolkit
treats it as a black box that maps instance batches to output batches.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np

NUMERIC = "numeric"
CATEGORICAL = "categorical"

# Evaluation points used per coordinate during range-refinement sweeps.
_SWEEP_GRID = 1025
_SWEEP_PASSES = 4
_CORNER_CAP_BITS = 12


class ExplainerError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(ExplainerError):
    """Invalid configuration, arguments, or usage. CLI exit code 2."""


class DataFormatError(ExplainerError):
    """Malformed input data (CSV files, model documents). CLI exit code 3."""


class DegenerateRangeError(ExplainerError):
    """An output range or importance total has zero width. CLI exit code 3."""


class SingularSystemError(ExplainerError):
    """A weighted least-squares system could not be solved. CLI exit code 3."""


@dataclass(frozen=True)
class FeatureSpec:
    """One input feature: numeric with finite bounds, or categorical levels.

    Numeric features declare a closed interval [min, max]; categorical
    features declare an ordered tuple of distinct string labels.
    """

    name: str
    kind: str
    min: float = math.nan
    max: float = math.nan
    levels: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if not self.name:
            raise ConfigError("feature name must be non-empty")
        if self.kind == NUMERIC:
            if not (math.isfinite(self.min) and math.isfinite(self.max)):
                raise ConfigError(f"feature {self.name!r}: bounds must be finite")
            if not self.min < self.max:
                raise ConfigError(f"feature {self.name!r}: min must be strictly below max")
        elif self.kind == CATEGORICAL:
            if not self.levels:
                raise ConfigError(f"feature {self.name!r}: needs at least one level")
            if len(set(self.levels)) != len(self.levels):
                raise ConfigError(f"feature {self.name!r}: levels must be distinct")
        else:
            raise ConfigError(f"feature {self.name!r}: unknown kind {self.kind!r}")

    @staticmethod
    def numeric(name: str, lo: float, hi: float) -> "FeatureSpec":
        return FeatureSpec(name, NUMERIC, float(lo), float(hi))

    @staticmethod
    def categorical(name: str, levels: Sequence[str]) -> "FeatureSpec":
        return FeatureSpec(name, CATEGORICAL, levels=tuple(levels))

    @property
    def is_numeric(self) -> bool:
        return self.kind == NUMERIC


@dataclass(frozen=True)
class Instance:
    """One point of the feature space. Values follow feature declaration order.

    ``out_of_range`` marks numeric values outside declared bounds; such
    instances are accepted everywhere but the flag travels with them.
    """

    values: tuple
    out_of_range: bool = False

    def replaced(self, index: int, value) -> "Instance":
        vals = list(self.values)
        vals[index] = value
        return Instance(tuple(vals), self.out_of_range)


@dataclass(frozen=True)
class FeatureSpace:
    """Ordered, uniquely named feature declarations."""

    features: tuple[FeatureSpec, ...]

    def __post_init__(self) -> None:
        if not self.features:
            raise ConfigError("feature space needs at least one feature")
        names = [f.name for f in self.features]
        if len(set(names)) != len(names):
            raise ConfigError("feature names must be unique")

    def __len__(self) -> int:
        return len(self.features)

    def __iter__(self):
        return iter(self.features)

    def __getitem__(self, index: int) -> FeatureSpec:
        return self.features[index]

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(f.name for f in self.features)

    def index(self, name: str) -> int:
        for i, f in enumerate(self.features):
            if f.name == name:
                return i
        raise ConfigError(f"unknown feature {name!r}")

    def instance(self, values: Sequence) -> Instance:
        """Validating constructor: checks arity and categorical labels.

        Numeric values outside bounds are accepted but flagged.
        """
        if len(values) != len(self.features):
            raise ConfigError(
                f"expected {len(self.features)} values, got {len(values)}"
            )
        flagged = False
        out = []
        for feat, value in zip(self.features, values):
            if feat.is_numeric:
                try:
                    v = float(value)
                except (TypeError, ValueError):
                    raise ConfigError(
                        f"feature {feat.name!r}: expected a number, got {value!r}"
                    ) from None
                if not math.isfinite(v):
                    raise ConfigError(f"feature {feat.name!r}: value must be finite")
                if not feat.min <= v <= feat.max:
                    flagged = True
                out.append(v)
            else:
                if value not in feat.levels:
                    raise ConfigError(
                        f"feature {feat.name!r}: label {value!r} not in declared levels"
                    )
                out.append(value)
        return Instance(tuple(out), flagged)

    def midpoint(self) -> Instance:
        """Interval midpoints for numeric features, first level for categorical."""
        vals = [
            (f.min + f.max) / 2.0 if f.is_numeric else f.levels[0]
            for f in self.features
        ]
        return Instance(tuple(vals))


class Predictor:
    """Black-box model contract: batch of instances in, output matrix out.

    ``evaluate`` must be deterministic for a fixed instance batch and must
    not mutate anything. The toolkit only ever calls this method, so any
    model that honors it can be explained.
    """

    n_outputs: int = 1

    def evaluate(self, instances: Sequence[Instance]) -> np.ndarray:
        """Return an array of shape (len(instances), n_outputs)."""
        raise NotImplementedError

    def evaluate_one(self, instance: Instance) -> np.ndarray:
        return self.evaluate([instance])[0]


class FunctionPredictor(Predictor):
    """Wraps a vectorized function of a float matrix (rows are instances)."""

    def __init__(self, fn: Callable[[np.ndarray], np.ndarray], n_outputs: int = 1):
        self.fn = fn
        self.n_outputs = int(n_outputs)

    def evaluate(self, instances: Sequence[Instance]) -> np.ndarray:
        try:
            x = np.asarray([inst.values for inst in instances], dtype=float)
        except (TypeError, ValueError):
            raise ConfigError(
                "numeric-function predictor received non-numeric values"
            ) from None
        if x.ndim == 1:
            x = x.reshape(1, -1)
        out = np.asarray(self.fn(x), dtype=float)
        if out.ndim == 1:
            out = out.reshape(-1, 1)
        if out.shape != (len(instances), self.n_outputs):
            raise DataFormatError(
                f"predictor returned shape {out.shape}, "
                f"expected {(len(instances), self.n_outputs)}"
            )
        return out


_LINEAR_WEIGHTS = np.array([0.4, 0.3, 0.2, 0.1])


def reference_feature_space() -> FeatureSpace:
    """Four numeric features x1..x4, each on [0, 1]."""
    return FeatureSpace(
        tuple(FeatureSpec.numeric(f"x{i}", 0.0, 1.0) for i in range(1, 5))
    )


def linear_reference_predictor() -> Predictor:
    """Weighted sum 0.4*x1 + 0.3*x2 + 0.2*x3 + 0.1*x4 over the unit box.

    Weights are convex, so the output covers [0, 1] exactly.
    """
    return FunctionPredictor(lambda x: x @ _LINEAR_WEIGHTS)


def nonlinear_reference_predictor() -> Predictor:
    """Oscillatory benchmark function over the unit box.

    0.7*x1*sin(10*x1) + 0.3*x2*sin(10*x2) + x3^2 + (2*x4^4 - 1.5*x4^2).
    The output range is not declared up front; estimate it before use.
    """

    def f(x: np.ndarray) -> np.ndarray:
        x1, x2, x3, x4 = x[:, 0], x[:, 1], x[:, 2], x[:, 3]
        return (
            0.7 * x1 * np.sin(10.0 * x1)
            + 0.3 * x2 * np.sin(10.0 * x2)
            + x3 ** 2
            + (2.0 * x4 ** 4 - 1.5 * x4 ** 2)
        )

    return FunctionPredictor(f)


@dataclass(frozen=True)
class OutputSpec:
    """One model output plus its utility map u(y) = a*y + b.

    Only affine utility maps are supported; ``a`` fixes the direction
    (a > 0 means larger outputs are better). ``out_min``/``out_max`` bound
    the attainable outputs; leave them None when unknown and estimate later.
    ``estimated`` records that the bounds came from sampling, not from a
    declaration.
    """

    name: str = "y"
    a: float = 1.0
    b: float = 0.0
    out_min: float | None = None
    out_max: float | None = None
    estimated: bool = False

    def __post_init__(self) -> None:
        if self.a == 0.0:
            raise ConfigError(f"output {self.name!r}: utility slope a must be nonzero")
        if self.out_min is not None and self.out_max is not None:
            if not self.out_min < self.out_max:
                raise ConfigError(
                    f"output {self.name!r}: out_min must be strictly below out_max"
                )

    @property
    def declared(self) -> bool:
        return self.out_min is not None and self.out_max is not None


@dataclass(frozen=True)
class OutputUtility:
    """Utility declarations for every model output."""

    outputs: tuple[OutputSpec, ...]

    def __post_init__(self) -> None:
        if not self.outputs:
            raise ConfigError("at least one output must be declared")

    @property
    def n_outputs(self) -> int:
        return len(self.outputs)

    def spec(self, output: int = 0) -> OutputSpec:
        if not 0 <= output < len(self.outputs):
            raise ConfigError(f"output index {output} out of range")
        return self.outputs[output]

    def range_width(self, output: int = 0) -> float:
        """Width of the declared output range; errors if unknown."""
        s = self.spec(output)
        if not s.declared:
            raise ConfigError(
                f"output {s.name!r} has no declared range; "
                "estimate it first (resolve_utility)"
            )
        return s.out_max - s.out_min

    @staticmethod
    def single(
        name: str = "y",
        a: float = 1.0,
        b: float = 0.0,
        out_min: float | None = None,
        out_max: float | None = None,
    ) -> "OutputUtility":
        return OutputUtility((OutputSpec(name, a, b, out_min, out_max),))

    @staticmethod
    def classification(class_names: Sequence[str]) -> "OutputUtility":
        """Per-class probability outputs: a = 1, b = 0, range [0, 1]."""
        return OutputUtility(
            tuple(OutputSpec(str(c), 1.0, 0.0, 0.0, 1.0) for c in class_names)
        )


def builtin_model(name: str) -> tuple[Predictor, FeatureSpace, OutputUtility]:
    """Bundle a reference predictor with its feature space and utility."""
    if name == "linear":
        return (
            linear_reference_predictor(),
            reference_feature_space(),
            OutputUtility.single("y", out_min=0.0, out_max=1.0),
        )
    if name == "nonlinear":
        return (
            nonlinear_reference_predictor(),
            reference_feature_space(),
            OutputUtility.single("y"),
        )
    raise ConfigError(f"unknown builtin predictor {name!r}")


@dataclass(frozen=True)
class RangeEstimate:
    out_min: float
    out_max: float
    estimated: bool


def _random_instances(space: FeatureSpace, count: int, gen: np.random.Generator) -> list[Instance]:
    cols = []
    for feat in space:
        if feat.is_numeric:
            cols.append(gen.uniform(feat.min, feat.max, size=count))
        else:
            cols.append([feat.levels[k] for k in gen.integers(0, len(feat.levels), size=count)])
    return [Instance(tuple(col[i] for col in cols)) for i in range(count)]


def _corner_instances(space: FeatureSpace) -> list[Instance]:
    # Enumerate {min, max} over numeric coordinates, capped at 2**12 corners;
    # categorical coordinates stay at the midpoint choice.
    base = space.midpoint()
    numeric = [i for i, f in enumerate(space) if f.is_numeric]
    numeric = numeric[:_CORNER_CAP_BITS]
    corners = []
    for bits in itertools.product((0, 1), repeat=len(numeric)):
        inst = base
        for i, bit in zip(numeric, bits):
            feat = space[i]
            inst = inst.replaced(i, feat.max if bit else feat.min)
        corners.append(inst)
    return corners


def _sweep(
    predictor: Predictor,
    space: FeatureSpace,
    start: Instance,
    output: int,
    want_max: bool,
) -> float:
    """Coordinate-wise grid refinement from a starting point.

    Repeatedly sweeps each coordinate over a dense grid (all levels for
    categorical features) and keeps the best value found. Exact for
    predictors that are separable or monotone per coordinate, and a cheap
    local polish otherwise.
    """
    sign = 1.0 if want_max else -1.0
    current = start
    best = sign * float(predictor.evaluate([current])[0, output])
    for _ in range(_SWEEP_PASSES):
        improved = False
        for i, feat in enumerate(space):
            if feat.is_numeric:
                grid = np.linspace(feat.min, feat.max, _SWEEP_GRID)
                candidates = [current.replaced(i, float(v)) for v in grid]
            else:
                candidates = [current.replaced(i, lev) for lev in feat.levels]
            ys = sign * predictor.evaluate(candidates)[:, output]
            k = int(np.argmax(ys))
            if ys[k] > best:
                best = float(ys[k])
                current = candidates[k]
                improved = True
        if not improved:
            break
    return sign * best


def estimate_output_range(
    predictor: Predictor,
    space: FeatureSpace,
    output: int = 0,
    budget: int = 10000,
    rng=None,
) -> tuple[float, float]:
    """Estimate the attainable output interval of a black-box predictor.

    Combines uniform random probes, numeric-bound corner points, and
    coordinate-wise refinement sweeps started from the best probes. The
    result is an inner approximation: every reported value was actually
    produced by the predictor.
    """
    from .sampling import as_rng  # local import to avoid a cycle

    if budget <= 0:
        raise ConfigError("range estimation needs a positive sampling budget")
    gen = as_rng(rng).generator()
    points = _random_instances(space, budget, gen) + _corner_instances(space)
    ys = predictor.evaluate(points)[:, output]
    lo_start = points[int(np.argmin(ys))]
    hi_start = points[int(np.argmax(ys))]
    lo = _sweep(predictor, space, lo_start, output, want_max=False)
    hi = _sweep(predictor, space, hi_start, output, want_max=True)
    return lo, hi


def output_range_of(
    predictor: Predictor,
    space: FeatureSpace,
    utility: OutputUtility,
    output: int = 0,
    budget: int = 10000,
    rng=None,
) -> RangeEstimate:
    """Declared output range, or a sampled estimate when undeclared.

    Estimated results are flagged so reports can distinguish them from
    declarations. A predictor whose observed outputs collapse to one value
    has no usable range and raises DegenerateRangeError.
    """
    spec = utility.spec(output)
    if spec.declared:
        return RangeEstimate(spec.out_min, spec.out_max, estimated=False)
    if budget <= 0:
        raise ConfigError(
            f"output {spec.name!r}: range is undeclared and the sampling budget is zero"
        )
    lo, hi = estimate_output_range(predictor, space, output, budget, rng)
    scale = max(abs(lo), abs(hi), 1.0)
    if not hi - lo > 1e-12 * scale:
        raise DegenerateRangeError(
            f"output {spec.name!r}: degenerate output range (all sampled outputs equal)"
        )
    return RangeEstimate(lo, hi, estimated=True)


def resolve_utility(
    predictor: Predictor,
    space: FeatureSpace,
    utility: OutputUtility,
    budget: int = 10000,
    rng=None,
) -> OutputUtility:
    """Fill in every undeclared output range by estimation."""
    outputs = []
    for j, spec in enumerate(utility.outputs):
        if spec.declared:
            outputs.append(spec)
        else:
            est = output_range_of(predictor, space, utility, j, budget, rng)
            outputs.append(
                replace(spec, out_min=est.out_min, out_max=est.out_max, estimated=True)
            )
    return OutputUtility(tuple(outputs))


def feature_to_json(feat: FeatureSpec) -> dict:
    if feat.is_numeric:
        return {"name": feat.name, "type": NUMERIC, "min": feat.min, "max": feat.max}
    return {"name": feat.name, "type": CATEGORICAL, "levels": list(feat.levels)}


def config_to_json(space: FeatureSpace, utility: OutputUtility) -> dict:
    """Config document: feature declarations plus output utilities."""
    outputs = []
    for s in utility.outputs:
        outputs.append(
            {"name": s.name, "A": s.a, "b": s.b, "min": s.out_min, "max": s.out_max}
        )
    return {"features": [feature_to_json(f) for f in space], "outputs": outputs}


def _feature_from_json(doc: dict) -> FeatureSpec:
    try:
        name = doc["name"]
        kind = doc["type"]
    except (TypeError, KeyError) as e:
        raise ConfigError(f"feature entry missing key: {e}") from None
    if kind == NUMERIC:
        if "min" not in doc or "max" not in doc:
            raise ConfigError(f"numeric feature {name!r} needs min and max")
        return FeatureSpec.numeric(name, doc["min"], doc["max"])
    if kind == CATEGORICAL:
        if "levels" not in doc:
            raise ConfigError(f"categorical feature {name!r} needs levels")
        return FeatureSpec.categorical(name, doc["levels"])
    raise ConfigError(f"feature {name!r}: unknown type {kind!r}")


def config_from_json(doc: dict) -> tuple[FeatureSpace, OutputUtility]:
    if not isinstance(doc, dict) or "features" not in doc:
        raise ConfigError("config document needs a 'features' list")
    space = FeatureSpace(tuple(_feature_from_json(f) for f in doc["features"]))
    outputs = []
    for o in doc.get("outputs", [{"name": "y"}]):
        outputs.append(
            OutputSpec(
                name=o.get("name", "y"),
                a=float(o.get("A", 1.0)),
                b=float(o.get("b", 0.0)),
                out_min=None if o.get("min") is None else float(o["min"]),
                out_max=None if o.get("max") is None else float(o["max"]),
            )
        )
    return space, OutputUtility(tuple(outputs))


def load_config(path) -> tuple[FeatureSpace, OutputUtility]:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as e:
        raise ConfigError(f"config {path}: invalid JSON ({e})") from None
    return config_from_json(doc)


def save_config(path, space: FeatureSpace, utility: OutputUtility) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(config_to_json(space, utility), fh, indent=2, sort_keys=True)
        fh.write("\n")
