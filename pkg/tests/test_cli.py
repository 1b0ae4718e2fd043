import json

import pytest

from ciukit import cli
from conftest import write_classification_csv

MID = "[0.5, 0.5, 0.5, 0.5]"


def run(*argv):
    return cli.main(list(argv))


class TestExplain:
    def test_json_report_schema(self, tmp_path):
        code = run(
            "explain", "--predictor", "linear", "--instance", MID,
            "--output-dir", str(tmp_path), "--format", "json",
        )
        assert code == 0
        doc = json.loads((tmp_path / "explain_report.json").read_text())
        assert doc["command"] == "explain"
        assert doc["config"]["seed"] == 42
        (block,) = doc["results"]
        assert block["method"] == "ciu"
        assert [f["name"] for f in block["features"]] == ["x1", "x2", "x3", "x4"]
        assert block["y"] == pytest.approx(0.5)
        for f in block["features"]:
            assert f["ci"] == pytest.approx({"x1": 0.4, "x2": 0.3, "x3": 0.2, "x4": 0.1}[f["name"]], abs=1e-9)

    def test_reruns_are_byte_identical(self, tmp_path):
        dirs = (tmp_path / "a", tmp_path / "b")
        for d in dirs:
            code = run(
                "explain", "--predictor", "nonlinear", "--instance",
                "[0.63, 0.63, 0.59, 0.81]", "--method", "ciu,shapley,lime",
                "--output-dir", str(d), "--format", "json,svg,csv",
            )
            assert code == 0
        names = sorted(p.name for p in dirs[0].iterdir())
        assert names == [
            "explain_ciu.svg",
            "explain_influence_ciu.svg",
            "explain_influence_lime.svg",
            "explain_influence_shapley.svg",
            "explain_report.csv",
            "explain_report.json",
        ]
        for name in names:
            assert (dirs[0] / name).read_bytes() == (dirs[1] / name).read_bytes()

    def test_all_methods_report(self, tmp_path, capsys):
        code = run(
            "explain", "--predictor", "linear", "--instance", MID,
            "--method", "ciu,shapley,lime",
            "--output-dir", str(tmp_path), "--format", "json,text",
        )
        assert code == 0
        doc = json.loads((tmp_path / "explain_report.json").read_text())
        assert [b["method"] for b in doc["results"]] == ["ciu", "shapley-mc", "lime-surrogate"]
        text = capsys.readouterr().out
        assert "output y = 0.5000" in text
        assert "(shapley)" in text and "(lime)" in text

    def test_timings_flag_adds_elapsed(self, tmp_path):
        base = [
            "explain", "--predictor", "linear", "--instance", MID,
            "--format", "json",
        ]
        run(*base, "--output-dir", str(tmp_path / "plain"))
        run(*base, "--timings", "--output-dir", str(tmp_path / "timed"))
        plain = json.loads((tmp_path / "plain/explain_report.json").read_text())
        timed = json.loads((tmp_path / "timed/explain_report.json").read_text())
        assert "elapsed" not in plain["results"][0]
        assert timed["results"][0]["elapsed"] > 0

    def test_csv_rows(self, tmp_path):
        run(
            "explain", "--predictor", "linear", "--instance", MID,
            "--method", "ciu,shapley", "--output-dir", str(tmp_path),
            "--format", "csv",
        )
        lines = (tmp_path / "explain_report.csv").read_text().splitlines()
        assert lines[0] == "method,feature,influence,ci,cu,ymin,ymax,flags"
        assert len(lines) == 1 + 8  # two methods x four features
        ciu_row = lines[1].split(",")
        shap_row = lines[5].split(",")
        assert ciu_row[0] == "ciu" and float(ciu_row[3]) == pytest.approx(0.4, abs=1e-9)
        assert shap_row[0] == "shapley-mc" and shap_row[3] == ""  # no ci column


class TestExitCodes:
    def test_unknown_format(self, tmp_path):
        assert run(
            "explain", "--predictor", "linear", "--instance", MID,
            "--output-dir", str(tmp_path), "--format", "yaml",
        ) == 2

    def test_missing_predictor_source(self, tmp_path):
        assert run(
            "explain", "--instance", MID, "--output-dir", str(tmp_path),
        ) == 2

    def test_bad_instance(self, tmp_path):
        base = ["explain", "--predictor", "linear", "--output-dir", str(tmp_path)]
        assert run(*base, "--instance", "[0.5]") == 2
        assert run(*base, "--instance", "not json") == 2
        assert run(*base, "--instance", "row:0") == 2  # row needs --data
        assert run(*base, "--instance", '{"x1": 1}') == 2

    def test_unknown_method(self, tmp_path):
        assert run(
            "explain", "--predictor", "linear", "--instance", MID,
            "--method", "gradcam", "--output-dir", str(tmp_path),
        ) == 2

    def test_missing_model_file(self, tmp_path):
        assert run(
            "explain", "--model", str(tmp_path / "absent.json"),
            "--instance", MID, "--output-dir", str(tmp_path),
        ) == 3

    def test_invalid_model_json(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{broken")
        assert run(
            "explain", "--model", str(bad), "--instance", MID,
            "--output-dir", str(tmp_path),
        ) == 3

    def test_help_exits_zero(self, capsys):
        assert run("--help") == 0
        assert "explain" in capsys.readouterr().out


class TestWhatif:
    def test_report_and_svg(self, tmp_path):
        code = run(
            "whatif", "--predictor", "nonlinear", "--instance",
            "[0.63, 0.63, 0.59, 0.81]", "--feature", "x4,x3",
            "--output-dir", str(tmp_path), "--format", "json,svg",
        )
        assert code == 0
        doc = json.loads((tmp_path / "whatif_report.json").read_text())
        assert [c["feature"] for c in doc["results"]] == ["x4", "x3"]
        assert len(doc["results"][0]["xs"]) == 101
        assert (tmp_path / "whatif_x4.svg").exists()
        assert (tmp_path / "whatif_x3.svg").exists()
        svg = (tmp_path / "whatif_x4.svg").read_text()
        assert "MIN=" in svg and "MAX=" in svg  # estimated joint range guides

    def test_unknown_feature(self, tmp_path):
        assert run(
            "whatif", "--predictor", "linear", "--instance", MID,
            "--feature", "x9", "--output-dir", str(tmp_path),
        ) == 2


class TestStability:
    def test_files_per_method(self, tmp_path, capsys):
        code = run(
            "stability", "--predictor", "linear", "--instance", MID,
            "--runs", "5", "--shapley-budget", "50", "--lime-samples", "100",
            "--output-dir", str(tmp_path), "--format", "json,csv,svg,text",
        )
        assert code == 0
        for tag in ("contextual_influence", "shapley_mc", "lime_surrogate"):
            assert (tmp_path / f"stability_{tag}.json").exists()
            assert (tmp_path / f"stability_{tag}.csv").exists()
            assert (tmp_path / f"stability_{tag}.svg").exists()
        doc = json.loads((tmp_path / "stability_shapley_mc.json").read_text())
        assert doc["results"]["runs"] == 5
        assert len(doc["results"]["values"]) == 5
        out = capsys.readouterr().out
        assert out.count("method:") == 3

    def test_method_subset(self, tmp_path):
        code = run(
            "stability", "--predictor", "linear", "--instance", MID,
            "--methods", "contextual-influence", "--runs", "3",
            "--output-dir", str(tmp_path), "--format", "json",
        )
        assert code == 0
        assert not (tmp_path / "stability_shapley_mc.json").exists()


class TestGlobal:
    def test_builtin_defaults(self, tmp_path, capsys):
        code = run(
            "global", "--predictor", "linear", "--iterations", "2",
            "--instances", "60", "--samples", "30", "--shapley-budget", "40",
            "--output-dir", str(tmp_path), "--format", "json,csv,text",
        )
        assert code == 0
        doc = json.loads((tmp_path / "global_report.json").read_text())
        assert doc["config"]["methods"] == "ci,pfi-mae,shapley"
        methods = [b["method"] for b in doc["results"]]
        assert methods == ["ci", "pfi-mae", "shapley"]
        ci_block = doc["results"][0]
        means = {f["name"]: f["mean"] for f in ci_block["features"]}
        assert means["x1"] == pytest.approx(0.4, abs=1e-9)
        lines = (tmp_path / "global_report.csv").read_text().splitlines()
        assert lines[0] == "method,feature,mean,spread"
        assert len(lines) == 1 + 3 * 4
        assert "method: ci" in capsys.readouterr().out


class TestTrainFlow:
    def test_train_then_explain_and_global(self, tmp_path, capsys):
        data = tmp_path / "train.csv"
        write_classification_csv(data, n=400, seed=11, margin=0.15)
        model = tmp_path / "model.json"
        code = run(
            "train", "--data", str(data), "--target", "label",
            "--model-out", str(model), "--trees", "30",
            "--output-dir", str(tmp_path),
        )
        assert code == 0
        message = capsys.readouterr().out
        assert "trained 30 trees on 300 rows" in message
        score = float(message.split("accuracy=")[1].split(" ")[0])
        assert score >= 0.9

        out = tmp_path / "explain"
        code = run(
            "explain", "--model", str(model), "--data", str(data),
            "--target", "label", "--instance", "row:0",
            "--method", "ciu,shapley,lime", "--output-index", "1",
            "--output-dir", str(out), "--format", "json,svg",
        )
        assert code == 0
        doc = json.loads((out / "explain_report.json").read_text())
        ciu = doc["results"][0]
        assert ciu["output_name"] in ("yes", "no")
        for f in ciu["features"]:
            assert 0.0 <= f["ci"] <= 1.0 and 0.0 <= f["cu"] <= 1.0
            assert "instability" not in f["flags"]

        gout = tmp_path / "global"
        code = run(
            "global", "--model", str(model), "--data", str(data),
            "--target", "label", "--iterations", "2", "--instances", "40",
            "--samples", "20", "--shapley-budget", "30", "--output-index", "1",
            "--output-dir", str(gout), "--format", "json",
        )
        assert code == 0
        doc = json.loads((gout / "global_report.json").read_text())
        assert doc["config"]["methods"] == "ci,pfi-ce,shapley"

    def test_model_without_features_needs_config(self, tmp_path, capsys):
        data = tmp_path / "train.csv"
        write_classification_csv(data, n=100, seed=3)
        model = tmp_path / "model.json"
        run(
            "train", "--data", str(data), "--target", "label",
            "--model-out", str(model), "--trees", "5",
            "--output-dir", str(tmp_path),
        )
        capsys.readouterr()
        doc = json.loads(model.read_text())
        del doc["features"]
        model.write_text(json.dumps(doc))
        assert run(
            "explain", "--model", str(model), "--instance", "row:0",
            "--data", str(data), "--target", "label",
            "--output-dir", str(tmp_path),
        ) == 2
