"""Command-line interface.

Subcommands: explain, global, whatif, stability, train. Exit codes:
0 success, 2 configuration or usage problems, 3 runtime or model errors.

Reports are byte-stable: the same invocation with the same seed writes
identical JSON, CSV, and SVG files. Wall-clock timings are therefore kept
out of reports unless --timings asks for them.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .core import (
    ConfigError,
    ExplainerError,
    Instance,
    builtin_model,
    load_config,
    resolve_utility,
)
from .baselines import lime_surrogate, shapley_mc
from .engine import ceteris_paribus_curve, explain_instance
from .global_importance import GLOBAL_METHODS, run_global, uniform_instances
from .render import (
    render_ciu_barplot,
    render_cp_plot,
    render_influence_barplot,
    render_spread_plot,
    text_ciu_bars,
    text_influence_bars,
)
from .sampling import SeededRng
from .stability import ALL_METHODS, Budgets, run_stability, stability_csv, summarize
from .tabular import (
    TreeParams,
    accuracy,
    holdout_split,
    load_csv,
    load_model,
    save_model,
    train_ensemble,
)

_FORMATS = ("json", "svg", "text", "csv")
_EXPLAIN_METHODS = ("ciu", "shapley", "lime")


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=42, help="base random seed")
    p.add_argument("--output-dir", default=".", help="directory for report files")
    p.add_argument(
        "--format",
        default="json,text",
        help=f"comma-separated outputs from {_FORMATS}",
    )
    p.add_argument("--output-index", type=int, default=0, help="model output to explain")
    p.add_argument("--phi0", type=float, default=0.5, help="neutral utility level")
    p.add_argument("--samples", type=int, default=100, help="per-feature sample count")
    p.add_argument("--shapley-budget", type=int, default=200, help="shapley permutation walks")
    p.add_argument("--lime-samples", type=int, default=1000, help="surrogate perturbation count")
    p.add_argument(
        "--range-budget",
        type=int,
        default=10000,
        help="sampling budget for estimating an undeclared output range",
    )
    p.add_argument(
        "--timings",
        action="store_true",
        help="include wall-clock fields in JSON reports (breaks byte-stability)",
    )


def _add_model_source(p: argparse.ArgumentParser) -> None:
    p.add_argument("--predictor", choices=("linear", "nonlinear"), help="builtin predictor")
    p.add_argument("--model", help="trained model JSON file")
    p.add_argument("--config", help="feature-space and output-utility JSON file")
    p.add_argument("--data", help="CSV dataset (instances, background, targets)")
    p.add_argument("--target", help="target column name in --data")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ciukit",
        description="Explain black-box predictions: contextual importance/utility, "
        "influence baselines, what-if curves, stability benchmarks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("explain", help="explain one instance")
    _add_model_source(p)
    _add_common(p)
    p.add_argument("--instance", required=True, help="JSON values, or row:K into --data")
    p.add_argument("--method", default="ciu", help=f"comma list from {_EXPLAIN_METHODS}")
    p.set_defaults(func=cmd_explain)

    p = sub.add_parser("global", help="dataset-level importance")
    _add_model_source(p)
    _add_common(p)
    p.add_argument(
        "--methods",
        default=None,
        help=f"comma list from {GLOBAL_METHODS}; default ci,pfi-mae,shapley "
        "(pfi-ce instead of pfi-mae for classification data)",
    )
    p.add_argument("--iterations", type=int, default=5, help="importance repetitions")
    p.add_argument("--instances", type=int, default=200, help="instances per iteration")
    p.set_defaults(func=cmd_global)

    p = sub.add_parser("whatif", help="single-feature sweep curves")
    _add_model_source(p)
    _add_common(p)
    p.add_argument("--instance", required=True, help="JSON values, or row:K into --data")
    p.add_argument("--feature", required=True, help="comma list of numeric feature names")
    p.add_argument("--grid", type=int, default=101, help="sweep resolution")
    p.set_defaults(func=cmd_whatif)

    p = sub.add_parser("stability", help="seed-to-seed attribution spread")
    _add_model_source(p)
    _add_common(p)
    p.add_argument("--instance", required=True, help="JSON values, or row:K into --data")
    p.add_argument("--methods", default=",".join(ALL_METHODS), help=f"comma list from {ALL_METHODS}")
    p.add_argument("--runs", type=int, default=50, help="seeded runs per method")
    p.set_defaults(func=cmd_stability)

    p = sub.add_parser("train", help="fit a bagged tree ensemble on CSV data")
    _add_common(p)
    p.add_argument("--data", required=True, help="training CSV")
    p.add_argument("--target", required=True, help="target column name")
    p.add_argument("--model-out", required=True, help="where to write the model JSON")
    p.add_argument("--trees", type=int, default=100)
    p.add_argument("--depth", type=int, default=8)
    p.add_argument("--min-leaf", type=int, default=1)
    p.add_argument("--holdout", type=float, default=0.25, help="test fraction")
    p.set_defaults(func=cmd_train)

    return parser


def _formats(args) -> set[str]:
    chosen = {f.strip() for f in args.format.split(",") if f.strip()}
    bad = chosen - set(_FORMATS)
    if bad:
        raise ConfigError(f"unknown format(s) {sorted(bad)}; use {_FORMATS}")
    if not chosen:
        raise ConfigError("at least one output format is required")
    return chosen


def _out_dir(args) -> Path:
    path = Path(args.output_dir)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _snapshot(args) -> dict:
    """Computation-affecting settings only; file layout choices stay out so
    reruns into different directories stay byte-identical."""
    skip = {"func", "output_dir", "timings"}
    return {k: v for k, v in vars(args).items() if k not in skip}


def _write_json(path: Path, doc: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _setup(args):
    """Resolve (predictor, space, utility, dataset) from the source flags."""
    dataset = None
    if args.data:
        if not args.target:
            raise ConfigError("--data needs --target to name the label column")
        dataset = load_csv(args.data, args.target)
    if args.predictor and args.model:
        raise ConfigError("pass either --predictor or --model, not both")
    if args.predictor:
        predictor, space, utility = builtin_model(args.predictor)
        if args.config:
            space, utility = load_config(args.config)
    elif args.model:
        config_space = None
        utility = None
        if args.config:
            config_space, utility = load_config(args.config)
        predictor = load_model(args.model, config_space)
        space = predictor.space
        if utility is None:
            if predictor.task == "classification":
                from .core import OutputUtility

                utility = OutputUtility.classification(predictor.class_names)
            elif dataset is not None:
                utility = dataset.utility()
            else:
                from .core import OutputUtility

                utility = OutputUtility.single("y")
    else:
        raise ConfigError("a predictor source is required: --predictor or --model")
    utility = resolve_utility(
        predictor, space, utility, args.range_budget, SeededRng(args.seed).spawn(900)
    )
    return predictor, space, utility, dataset


def _parse_instance(args, space, dataset) -> Instance:
    text = args.instance
    if text.startswith("row:"):
        if dataset is None:
            raise ConfigError("row:K instances need --data")
        try:
            k = int(text[4:])
        except ValueError:
            raise ConfigError(f"bad row index in {text!r}") from None
        if not 0 <= k < len(dataset):
            raise ConfigError(f"row {k} out of range (dataset has {len(dataset)} rows)")
        return dataset.rows[k]
    try:
        doc = json.loads(text)
    except json.JSONDecodeError:
        raise ConfigError(f"--instance must be JSON or row:K, got {text!r}") from None
    if isinstance(doc, dict):
        missing = [n for n in space.names if n not in doc]
        if missing:
            raise ConfigError(f"instance is missing features: {missing}")
        return space.instance([doc[n] for n in space.names])
    if isinstance(doc, list):
        return space.instance(doc)
    raise ConfigError("--instance JSON must be a list or an object")


def _methods_list(text: str, allowed) -> list[str]:
    methods = [m.strip() for m in text.split(",") if m.strip()]
    if not methods:
        raise ConfigError("at least one method is required")
    for m in methods:
        if m not in allowed:
            raise ConfigError(f"unknown method {m!r}; use one of {allowed}")
    return methods


def _background(dataset, space, rng):
    if dataset is not None:
        return list(dataset.rows)
    return uniform_instances(space, 200, rng)


def cmd_explain(args) -> None:
    formats = _formats(args)
    predictor, space, utility, dataset = _setup(args)
    methods = _methods_list(args.method, _EXPLAIN_METHODS)
    x = _parse_instance(args, space, dataset)
    base = SeededRng(args.seed)
    out = _out_dir(args)

    blocks = []
    plots = {}
    texts = []
    for method in methods:
        if method == "ciu":
            exp = explain_instance(
                predictor, utility, space, x,
                args.output_index, args.samples, args.phi0, base,
            )
            block = exp.to_json_dict()
            if args.timings:
                block["elapsed"] = exp.elapsed
            blocks.append(block)
            plots["explain_ciu.svg"] = render_ciu_barplot(exp)
            plots["explain_influence_ciu.svg"] = render_influence_barplot(
                exp.feature_names,
                exp.influence_vector(),
                exp.feature_values,
                title="Contextual influence",
                limit=max(args.phi0, 1.0 - args.phi0),
            )
            texts.append(text_ciu_bars(exp))
            texts.append(text_influence_bars(exp.feature_names, exp.influence_vector(), "ciu"))
        elif method == "shapley":
            bg = _background(dataset, space, base.spawn(903))
            att = shapley_mc(
                predictor, space, x, bg, args.shapley_budget,
                base.spawn(901), args.output_index,
            )
            blocks.append(att.to_json_dict())
            plots["explain_influence_shapley.svg"] = render_influence_barplot(
                att.feature_names, att.phi, x.values, title="Shapley attribution"
            )
            texts.append(text_influence_bars(att.feature_names, att.phi, "shapley"))
        else:
            att = lime_surrogate(
                predictor, space, x, args.lime_samples,
                rng=base.spawn(902), output=args.output_index,
            )
            blocks.append(att.to_json_dict())
            plots["explain_influence_lime.svg"] = render_influence_barplot(
                att.feature_names, att.phi, x.values, title="Surrogate attribution"
            )
            texts.append(text_influence_bars(att.feature_names, att.phi, "lime"))

    report = {"command": "explain", "config": _snapshot(args), "results": blocks}
    if "json" in formats:
        _write_json(out / "explain_report.json", report)
    if "csv" in formats:
        def cell(entry, key):
            return repr(entry[key]) if key in entry else ""

        lines = ["method,feature,influence,ci,cu,ymin,ymax,flags"]
        for block in blocks:
            for f in block["features"]:
                lines.append(
                    f"{block['method']},{f['name']},{f['influence']!r},"
                    f"{cell(f, 'ci')},{cell(f, 'cu')},"
                    f"{cell(f, 'ymin')},{cell(f, 'ymax')},"
                    f"{' '.join(f.get('flags', []))}"
                )
        (out / "explain_report.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    if "svg" in formats:
        for name, doc in plots.items():
            doc.save(out / name)
    if "text" in formats:
        print("\n\n".join(texts))


def cmd_global(args) -> None:
    formats = _formats(args)
    predictor, space, utility, dataset = _setup(args)
    if args.methods is None:
        classification = dataset is not None and dataset.task == "classification"
        args.methods = "ci,pfi-ce,shapley" if classification else "ci,pfi-mae,shapley"
    methods = _methods_list(args.methods, GLOBAL_METHODS)
    base = SeededRng(args.seed)
    out = _out_dir(args)

    rows = targets = None
    if dataset is not None:
        rows = list(dataset.rows)
        targets = list(dataset.target)
    results = []
    for k, method in enumerate(methods):
        results.append(
            run_global(
                predictor, utility, space, method,
                iterations=args.iterations,
                instances_per_iteration=args.instances,
                rng=base.spawn(k),
                rows=rows,
                targets=targets,
                n=args.samples,
                budget=args.shapley_budget,
                output=args.output_index,
            )
        )

    report = {"command": "global", "config": _snapshot(args), "results": []}
    for g in results:
        block = g.to_json_dict()
        if args.timings:
            block["elapsed"] = g.elapsed
        report["results"].append(block)
    if "json" in formats:
        _write_json(out / "global_report.json", report)
    if "csv" in formats:
        lines = ["method,feature,mean,spread"]
        for g in results:
            for name, m, s in zip(g.feature_names, g.mean, g.spread):
                lines.append(f"{g.method},{name},{m!r},{s!r}")
        (out / "global_report.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    if "text" in formats:
        width = max(len(n) for n in space.names)
        for g in results:
            print(f"method: {g.method} (normalized, {g.n_iterations} iterations)")
            for name, m, s in zip(g.feature_names, g.mean, g.spread):
                print(f"  {name:<{width}} {m:.4f} +/- {s:.4f}")


def cmd_whatif(args) -> None:
    formats = _formats(args)
    predictor, space, utility, dataset = _setup(args)
    x = _parse_instance(args, space, dataset)
    out = _out_dir(args)
    names = [n.strip() for n in args.feature.split(",") if n.strip()]
    if not names:
        raise ConfigError("at least one feature name is required")
    spec = utility.spec(args.output_index)
    curves = []
    for name in names:
        idx = space.index(name)
        curves.append(
            ceteris_paribus_curve(
                predictor, space, x, idx, args.grid, args.output_index, args.phi0
            )
        )
    report = {
        "command": "whatif",
        "config": _snapshot(args),
        "results": [c.to_json_dict() for c in curves],
    }
    if "json" in formats:
        _write_json(out / "whatif_report.json", report)
    if "svg" in formats:
        for curve in curves:
            doc = render_cp_plot(curve, (spec.out_min, spec.out_max))
            doc.save(out / f"whatif_{curve.feature_name}.svg")
    if "text" in formats:
        for curve in curves:
            print(
                f"{curve.feature_name}: y in [{curve.ymin:.4f}, {curve.ymax:.4f}] "
                f"across the sweep; y={curve.y_value:.4f} at "
                f"{curve.feature_name}={curve.x_value:g}; "
                f"neutral level {curve.y_u0:.4f}"
            )


def cmd_stability(args) -> None:
    formats = _formats(args)
    predictor, space, utility, dataset = _setup(args)
    methods = _methods_list(args.methods, ALL_METHODS)
    x = _parse_instance(args, space, dataset)
    out = _out_dir(args)
    budgets = Budgets(args.samples, args.shapley_budget, args.lime_samples)
    background = list(dataset.rows) if dataset is not None else None
    reports = run_stability(
        predictor, utility, space, x,
        methods=methods, runs=args.runs, budgets=budgets,
        seed=args.seed, phi0=args.phi0, output=args.output_index,
        background=background,
    )
    for method, rep in reports.items():
        tag = method.replace("-", "_")
        if "json" in formats:
            doc = rep.to_json_dict()
            if args.timings:
                doc["elapsed"] = [float(t) for t in rep.elapsed]
            _write_json(out / f"stability_{tag}.json", {
                "command": "stability", "config": _snapshot(args), "results": doc,
            })
        if "csv" in formats:
            (out / f"stability_{tag}.csv").write_text(stability_csv(rep), encoding="utf-8")
        if "svg" in formats:
            render_spread_plot(rep).save(out / f"stability_{tag}.svg")
        if "text" in formats:
            print(summarize(rep))
            print()


def cmd_train(args) -> None:
    dataset = load_csv(args.data, args.target)
    train, test = holdout_split(dataset, args.holdout, SeededRng(args.seed).spawn(1))
    params = TreeParams(args.trees, args.depth, args.min_leaf)
    model = train_ensemble(train, params, SeededRng(args.seed).spawn(2))
    save_model(args.model_out, model)
    score = accuracy(model, test)
    metric = "accuracy" if dataset.task == "classification" else "r2"
    print(
        f"trained {params.n_trees} trees on {len(train)} rows; "
        f"holdout {metric}={score:.4f} on {len(test)} rows; "
        f"model written to {args.model_out}"
    )


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        args.func(args)
        return 0
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except (ExplainerError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 3


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
