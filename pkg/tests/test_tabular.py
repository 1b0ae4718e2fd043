import json

import numpy as np
import pytest

import ciukit as ck
from conftest import write_classification_csv


@pytest.fixture(scope="module")
def clean_dataset(tmp_path_factory):
    path = tmp_path_factory.mktemp("data") / "clean.csv"
    write_classification_csv(path, n=500, seed=7, margin=0.15)
    return ck.load_csv(path, target="label")


class TestSchemaInference:
    def test_mixed_columns(self, tmp_path):
        path = tmp_path / "t.csv"
        path.write_text("a,b,y\n1.5,lo,0\n2.5,hi,1\n0.5,lo,0\n")
        ds = ck.load_csv(path, target="y")
        a, b = ds.space.features
        assert a.is_numeric and a.min == 0.5 and a.max == 2.5
        assert not b.is_numeric and b.levels == ("lo", "hi")
        assert ds.task == "regression"

    def test_numeric_looking_column_with_one_string_is_categorical(self, tmp_path):
        path = tmp_path / "t.csv"
        path.write_text("a,y\n1,0\n2,1\nx,0\n")
        ds = ck.load_csv(path, target="y")
        assert not ds.space.features[0].is_numeric
        assert ds.space.features[0].levels == ("1", "2", "x")

    def test_string_target_is_classification(self, tmp_path):
        path = tmp_path / "t.csv"
        path.write_text("a,y\n1,no\n2,yes\n3,no\n")
        ds = ck.load_csv(path, target="y")
        assert ds.task == "classification"
        assert ds.class_names == ("no", "yes")  # first-appearance order
        assert ds.target == (0, 1, 0)

    def test_constant_numeric_column_widened(self, tmp_path):
        path = tmp_path / "t.csv"
        path.write_text("a,b,y\n2,1,0\n2,3,1\n")
        ds = ck.load_csv(path, target="y")
        a = ds.space.features[0]
        assert a.min == 1.5 and a.max == 2.5

    def test_explicit_schema_respected(self, tmp_path, clean_dataset):
        path = tmp_path / "t.csv"
        ck.save_csv(clean_dataset, path)
        ds = ck.load_csv(path, target="label", schema=clean_dataset.space)
        assert ds.space == clean_dataset.space


class TestLoadErrors:
    def make(self, tmp_path, text):
        path = tmp_path / "bad.csv"
        path.write_text(text)
        return path

    def test_empty_file(self, tmp_path):
        with pytest.raises(ck.DataFormatError):
            ck.load_csv(self.make(tmp_path, ""), target="y")

    def test_numeric_header(self, tmp_path):
        with pytest.raises(ck.DataFormatError):
            ck.load_csv(self.make(tmp_path, "1,2\n3,4\n"), target="y")

    def test_missing_target_column(self, tmp_path):
        with pytest.raises(ck.ConfigError):
            ck.load_csv(self.make(tmp_path, "a,b\n1,2\n"), target="y")

    def test_ragged_row(self, tmp_path):
        with pytest.raises(ck.DataFormatError):
            ck.load_csv(self.make(tmp_path, "a,y\n1,0\n1,0,9\n"), target="y")

    def test_empty_cell(self, tmp_path):
        with pytest.raises(ck.DataFormatError):
            ck.load_csv(self.make(tmp_path, "a,y\n1,0\n,1\n"), target="y")

    def test_duplicate_column(self, tmp_path):
        with pytest.raises(ck.DataFormatError):
            ck.load_csv(self.make(tmp_path, "a,a,y\n1,2,0\n"), target="y")

    def test_no_data_rows(self, tmp_path):
        with pytest.raises(ck.DataFormatError):
            ck.load_csv(self.make(tmp_path, "a,y\n"), target="y")

    def test_schema_name_mismatch(self, tmp_path):
        schema = ck.FeatureSpace((ck.FeatureSpec.numeric("z", 0, 1),))
        with pytest.raises(ck.ConfigError):
            ck.load_csv(self.make(tmp_path, "a,y\n1,0\n"), target="y", schema=schema)

    def test_schema_unknown_level(self, tmp_path):
        schema = ck.FeatureSpace((ck.FeatureSpec.categorical("a", ["u"]),))
        with pytest.raises(ck.DataFormatError):
            ck.load_csv(self.make(tmp_path, "a,y\nv,0\n"), target="y", schema=schema)

    def test_schema_non_numeric_cell(self, tmp_path):
        schema = ck.FeatureSpace((ck.FeatureSpec.numeric("a", 0, 1),))
        with pytest.raises(ck.DataFormatError):
            ck.load_csv(self.make(tmp_path, "a,y\nhello,0\n"), target="y", schema=schema)


class TestRoundTrip:
    def test_save_load_exact(self, tmp_path, clean_dataset):
        path = tmp_path / "copy.csv"
        ck.save_csv(clean_dataset, path)
        again = ck.load_csv(path, target="label")
        assert again.rows == clean_dataset.rows  # repr floats survive the trip
        assert again.target == clean_dataset.target
        assert again.class_names == clean_dataset.class_names


class TestHoldoutSplit:
    def test_sizes(self, clean_dataset):
        train, test = ck.holdout_split(clean_dataset, 0.25, rng=1)
        assert len(train) == 375 and len(test) == 125

    def test_rounding_minimum(self, tmp_path):
        path = tmp_path / "four.csv"
        path.write_text("a,y\n1,0\n2,1\n3,0\n4,1\n")
        ds = ck.load_csv(path, target="y")
        train, test = ck.holdout_split(ds, 0.25, rng=1)
        assert len(train) == 3 and len(test) == 1

    def test_too_small(self, tmp_path):
        path = tmp_path / "two.csv"
        path.write_text("a,y\n1,0\n2,1\n")
        ds = ck.load_csv(path, target="y")
        with pytest.raises(ck.ConfigError):
            ck.holdout_split(ds, 0.01)
        with pytest.raises(ck.ConfigError):
            ck.holdout_split(ds, 1.5)

    def test_disjoint_union(self, clean_dataset):
        train, test = ck.holdout_split(clean_dataset, 0.2, rng=5)
        everything = sorted(train.rows + test.rows, key=lambda r: r.values)
        assert everything == sorted(clean_dataset.rows, key=lambda r: r.values)

    def test_determinism(self, clean_dataset):
        a = ck.holdout_split(clean_dataset, 0.2, rng=5)
        b = ck.holdout_split(clean_dataset, 0.2, rng=5)
        c = ck.holdout_split(clean_dataset, 0.2, rng=6)
        assert a[1].rows == b[1].rows
        assert a[1].rows != c[1].rows


class TestTreeEnsemble:
    def test_xor_in_sample(self, tmp_path):
        # a single linear split cannot solve xor; depth-2 trees must
        gen = np.random.Generator(np.random.PCG64(3))
        lines = ["a,b,y"]
        for _ in range(300):
            a, b = (float(v) for v in gen.uniform(0, 1, 2))
            lines.append(f"{a!r},{b!r},{'t' if (a > 0.5) != (b > 0.5) else 'f'}")
        path = tmp_path / "xor.csv"
        path.write_text("\n".join(lines) + "\n")
        ds = ck.load_csv(path, target="y")
        model = ck.train_ensemble(ds, ck.TreeParams(n_trees=30), rng=1)
        assert ck.accuracy(model, ds) >= 0.95

    def test_holdout_accuracy(self, clean_dataset):
        train, test = ck.holdout_split(clean_dataset, 0.25, rng=1)
        model = ck.train_ensemble(train, rng=2)
        assert ck.accuracy(model, test) >= 0.9

    def test_probabilities_are_distributions(self, clean_dataset):
        model = ck.train_ensemble(clean_dataset, ck.TreeParams(n_trees=20), rng=2)
        probs = model.evaluate(list(clean_dataset.rows[:50]))
        assert probs.shape == (50, 2)
        assert np.allclose(probs.sum(axis=1), 1.0, atol=1e-12)
        assert (probs >= 0.0).all() and (probs <= 1.0).all()

    def test_single_class_warns_and_predicts_constant(self, tmp_path):
        path = tmp_path / "one.csv"
        path.write_text("a,y\n1,same\n2,same\n3,same\n")
        ds = ck.load_csv(path, target="y")
        with pytest.warns(UserWarning):
            model = ck.train_ensemble(ds, ck.TreeParams(n_trees=3), rng=1)
        probs = model.evaluate(list(ds.rows))
        assert np.allclose(probs, 1.0)

    def test_regression_r2_and_hull(self, tmp_path):
        gen = np.random.Generator(np.random.PCG64(4))
        lines = ["a,b,y"]
        for _ in range(400):
            a, b = (float(v) for v in gen.uniform(0, 1, 2))
            lines.append(f"{a!r},{b!r},{2.0 * a - b!r}")
        path = tmp_path / "reg.csv"
        path.write_text("\n".join(lines) + "\n")
        ds = ck.load_csv(path, target="y")
        train, test = ck.holdout_split(ds, 0.25, rng=1)
        model = ck.train_ensemble(train, rng=2)
        assert ck.accuracy(model, test) >= 0.8
        preds = model.evaluate(list(test.rows))[:, 0]
        targets = np.asarray(train.target, dtype=float)
        # tree leaves average training targets, so predictions stay inside them
        assert preds.min() >= targets.min() and preds.max() <= targets.max()

    def test_predicted_class_labels(self, clean_dataset):
        model = ck.train_ensemble(clean_dataset, ck.TreeParams(n_trees=10), rng=3)
        labels = model.predicted_class(list(clean_dataset.rows[:5]))
        assert all(lab in clean_dataset.class_names for lab in labels)

    def test_training_determinism(self, clean_dataset):
        small = ck.TreeParams(n_trees=5, max_depth=4)
        a = ck.train_ensemble(clean_dataset, small, rng=7)
        b = ck.train_ensemble(clean_dataset, small, rng=7)
        rows = list(clean_dataset.rows[:20])
        assert np.array_equal(a.evaluate(rows), b.evaluate(rows))

    def test_unknown_level_still_routes(self, clean_dataset):
        model = ck.train_ensemble(clean_dataset, ck.TreeParams(n_trees=5), rng=1)
        raw = ck.Instance((0.5, 0.5, 0.0, "unseen"))
        out = model.evaluate([raw])
        assert np.isfinite(out).all()

    def test_params_validation(self):
        with pytest.raises(ck.ConfigError):
            ck.TreeParams(n_trees=0)
        with pytest.raises(ck.ConfigError):
            ck.TreeParams(feature_subsample="half")


class TestModelPersistence:
    def test_roundtrip_bitwise(self, tmp_path, clean_dataset):
        model = ck.train_ensemble(clean_dataset, ck.TreeParams(n_trees=8), rng=5)
        path = tmp_path / "model.json"
        ck.save_model(path, model)
        again = ck.load_model(path)
        rows = list(clean_dataset.rows[:30])
        assert np.array_equal(model.evaluate(rows), again.evaluate(rows))
        assert again.space == clean_dataset.space
        assert again.class_names == model.class_names

    def test_save_is_deterministic(self, tmp_path, clean_dataset):
        model = ck.train_ensemble(clean_dataset, ck.TreeParams(n_trees=4), rng=5)
        p1, p2 = tmp_path / "m1.json", tmp_path / "m2.json"
        ck.save_model(p1, model)
        ck.save_model(p2, model)
        assert p1.read_bytes() == p2.read_bytes()

    def test_model_without_features_needs_space(self, tmp_path, clean_dataset):
        model = ck.train_ensemble(clean_dataset, ck.TreeParams(n_trees=3), rng=5)
        path = tmp_path / "m.json"
        ck.save_model(path, model)
        doc = json.loads(path.read_text())
        del doc["features"]
        path.write_text(json.dumps(doc))
        with pytest.raises(ck.ConfigError):
            ck.load_model(path)
        again = ck.load_model(path, space=clean_dataset.space)
        rows = list(clean_dataset.rows[:10])
        assert np.array_equal(model.evaluate(rows), again.evaluate(rows))

    def test_bad_documents(self, tmp_path):
        path = tmp_path / "nope.json"
        path.write_text("{not json")
        with pytest.raises(ck.DataFormatError):
            ck.load_model(path)
        path.write_text(json.dumps({"kind": "linear"}))
        with pytest.raises(ck.DataFormatError):
            ck.load_model(path)
