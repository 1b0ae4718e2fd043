"""Shared fixtures and independent oracles for the test suite.

The oracle helpers recompute expected values from first principles (dense
grids over the analytic terms, closed forms for the weighted sum) so the
tests never just compare the library against itself.
"""

from __future__ import annotations

import numpy as np
import pytest

import ciukit as ck

# The oscillatory benchmark is a sum of one term per feature, so per-feature
# output intervals and the joint range follow from per-term extremes.
NONLINEAR_TERMS = (
    lambda v: 0.7 * v * np.sin(10.0 * v),
    lambda v: 0.3 * v * np.sin(10.0 * v),
    lambda v: v**2,
    lambda v: 2.0 * v**4 - 1.5 * v**2,
)

LINEAR_WEIGHTS = (0.4, 0.3, 0.2, 0.1)


def term_extremes(i: int, n: int = 200001) -> tuple[float, float]:
    xs = np.linspace(0.0, 1.0, n)
    ys = NONLINEAR_TERMS[i](xs)
    return float(ys.min()), float(ys.max())


def nonlinear_joint_range() -> tuple[float, float]:
    lo = sum(term_extremes(i)[0] for i in range(4))
    hi = sum(term_extremes(i)[1] for i in range(4))
    return lo, hi


def nonlinear_value(values) -> float:
    return float(sum(NONLINEAR_TERMS[i](np.asarray([v]))[0] for i, v in enumerate(values)))


def expected_nonlinear_ciu(values, joint: tuple[float, float]):
    """Per-feature (ci, cu) oracle for the separable benchmark function."""
    width = joint[1] - joint[0]
    out = []
    for i, v in enumerate(values):
        lo, hi = term_extremes(i)
        ti = float(NONLINEAR_TERMS[i](np.asarray([v]))[0])
        ci = (hi - lo) / width
        cu = (ti - lo) / (hi - lo)
        out.append((ci, cu))
    return out


@pytest.fixture(scope="session")
def linear_bundle():
    return ck.builtin_model("linear")


@pytest.fixture(scope="session")
def nonlinear_bundle():
    return ck.builtin_model("nonlinear")


@pytest.fixture(scope="session")
def nonlinear_resolved(nonlinear_bundle):
    pred, space, util = nonlinear_bundle
    resolved = ck.resolve_utility(pred, space, util, budget=10000, rng=ck.SeededRng(7))
    return pred, space, resolved


def write_classification_csv(path, n=500, seed=7, margin=0.0, noise=0.0):
    """Synthetic binary-classification CSV: three numeric features plus one
    categorical, linearly separable up to ``noise``; rows closer than
    ``margin`` to the boundary are resampled."""
    gen = np.random.Generator(np.random.PCG64(seed))
    rows = []
    while len(rows) < n:
        a = gen.uniform(0.0, 1.0)
        b = gen.uniform(0.0, 1.0)
        c = gen.uniform(-1.0, 1.0)
        grade = ("lo", "hi")[int(gen.integers(0, 2))]
        score = 1.5 * a - 1.2 * b + 0.6 * c + (0.8 if grade == "hi" else 0.0)
        score += gen.normal(0.0, noise) if noise else 0.0
        if abs(score - 0.35) < margin:
            continue
        rows.append((a, b, c, grade, "yes" if score > 0.35 else "no"))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("a,b,c,grade,label\n")
        for a, b, c, grade, label in rows:
            fh.write(f"{a!r},{b!r},{c!r},{grade},{label}\n")
    return path
