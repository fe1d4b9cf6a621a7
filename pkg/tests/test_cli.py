import json

import numpy as np
import pytest
from click.testing import CliRunner

from clusterscope.cli import main

CSV = (
    "id,age,weight\n"
    "p1,50,170\n"
    "p2,50,190\n"
    "p3,20,120\n"
    "p4,60,200\n"
)


@pytest.fixture()
def runner():
    return CliRunner()


@pytest.fixture()
def data_file(tmp_path):
    path = tmp_path / "people.csv"
    path.write_text(CSV)
    return str(path)


class TestFilterCommand:
    def test_published_expression_keeps_matching_row(self, runner, data_file, tmp_path):
        out = tmp_path / "subset.csv"
        result = runner.invoke(
            main,
            ["filter", "--input", data_file, "--expr", "age > 40 & weight<180", "--out", str(out)],
        )
        assert result.exit_code == 0
        lines = out.read_text().strip().splitlines()
        assert lines[0] == "id,age,weight"
        assert len(lines) == 2 and lines[1].startswith("p1")

    def test_stdout_when_no_out(self, runner, data_file):
        result = runner.invoke(main, ["filter", "--input", data_file, "--expr", "age > 55"])
        assert result.exit_code == 0
        assert "p4" in result.output

    def test_syntax_error_exits_2(self, runner, data_file):
        result = runner.invoke(main, ["filter", "--input", data_file, "--expr", "age >"])
        assert result.exit_code == 2
        payload = json.loads(result.output.strip().splitlines()[-1])
        assert payload["offset"] == 5


class TestClusterCommand:
    def test_k1_labels_all_zero(self, runner, data_file):
        result = runner.invoke(main, ["cluster", "--input", data_file, "--k", "1"])
        assert result.exit_code == 0
        payload = json.loads(result.output)
        assert payload["labels"] == [0, 0, 0, 0]

    def test_agglomerative(self, runner, data_file):
        result = runner.invoke(
            main,
            ["cluster", "--input", data_file, "--method", "agglo", "--k", "2", "--linkage", "single"],
        )
        assert result.exit_code == 0
        payload = json.loads(result.output)
        assert payload["merges"] is not None

    def test_k_too_large_exits_2(self, runner, data_file):
        result = runner.invoke(main, ["cluster", "--input", data_file, "--k", "99"])
        assert result.exit_code == 2

    def test_labels_file(self, runner, data_file, tmp_path):
        out = tmp_path / "labels.json"
        result = runner.invoke(
            main, ["cluster", "--input", data_file, "--k", "2", "--out", str(out)]
        )
        assert result.exit_code == 0
        assert set(json.loads(out.read_text())["labels"]) == {0, 1}


class TestProjectCommand:
    def test_deterministic_output_files(self, runner, data_file, tmp_path):
        out1, out2 = tmp_path / "a.json", tmp_path / "b.json"
        for out in (out1, out2):
            result = runner.invoke(
                main, ["project", "--input", data_file, "--method", "pca", "--out", str(out)]
            )
            assert result.exit_code == 0
        assert out1.read_bytes() == out2.read_bytes()

    def test_cmds(self, runner, data_file):
        result = runner.invoke(
            main, ["project", "--input", data_file, "--method", "cmds", "--distance", "manhattan"]
        )
        assert result.exit_code == 0
        payload = json.loads(result.output)
        assert len(payload["coords"]) == 4

    def test_pca_non_euclidean_exits_2(self, runner, data_file):
        result = runner.invoke(
            main, ["project", "--input", data_file, "--method", "pca", "--distance", "cosine"]
        )
        assert result.exit_code == 2


class TestInteractCommands:
    @pytest.fixture()
    def model_file(self, runner, data_file, tmp_path):
        path = tmp_path / "model.json"
        result = runner.invoke(
            main,
            ["project", "--input", data_file, "--method", "pca", "--model-out", str(path)],
        )
        assert result.exit_code == 0
        return str(path)

    def test_forward(self, runner, data_file, model_file):
        result = runner.invoke(
            main,
            [
                "interact", "forward",
                "--input", data_file,
                "--model", model_file,
                "--point-id", "p1",
                "--delta", '{"age": 5}',
            ],
        )
        assert result.exit_code == 0
        payload = json.loads(result.output)
        np.testing.assert_allclose(
            np.array(payload["new_y"]),
            np.array(payload["y"]) + np.array(payload["delta_y"]),
            atol=1e-12,
        )

    def test_backward_round_trip(self, runner, data_file, model_file):
        result = runner.invoke(
            main,
            [
                "interact", "backward",
                "--input", data_file,
                "--model", model_file,
                "--point-id", "p1",
                "--delta-y", "0.4,-0.2",
            ],
        )
        assert result.exit_code == 0
        payload = json.loads(result.output)
        assert payload["status"] == "optimal"
        # re-project the solved delta through the saved model: must hit delta_y
        model = json.loads(open(model_file).read())
        E = np.array(model["E"])
        dx = np.array([payload["delta_x"][n] for n in model["feature_names"]])
        np.testing.assert_allclose(dx @ E, [0.4, -0.2], atol=1e-5)

    def test_backward_with_constraints_file(self, runner, data_file, model_file, tmp_path):
        cons = tmp_path / "cons.json"
        cons.write_text(json.dumps({"equalities": [{"coeffs": {"age": 1.0}, "rhs": 0.0}]}))
        result = runner.invoke(
            main,
            [
                "interact", "backward",
                "--input", data_file,
                "--model", model_file,
                "--point-id", "p1",
                "--delta-y", "0.4,-0.2",
                "--constraints", str(cons),
            ],
        )
        assert result.exit_code == 0
        payload = json.loads(result.output)
        assert payload["delta_x"]["age"] == pytest.approx(0.0, abs=1e-9)

    def test_prolines(self, runner, data_file, model_file):
        result = runner.invoke(
            main,
            [
                "interact", "prolines",
                "--input", data_file,
                "--model", model_file,
                "--point-id", "p2",
                "--k", "1", "--c", "0.5",
            ],
        )
        assert result.exit_code == 0
        payload = json.loads(result.output)
        assert len(payload["prolines"]) == 2
        assert all(len(pl["path"]) == 5 for pl in payload["prolines"])

    def test_missing_point_exits_2(self, runner, data_file, model_file):
        result = runner.invoke(
            main,
            [
                "interact", "forward",
                "--input", data_file,
                "--model", model_file,
                "--delta", '{"age": 5}',
            ],
        )
        assert result.exit_code == 2


class TestCliApiParity:
    def test_cluster_matches_api_route(self, runner, data_file):
        from fastapi.testclient import TestClient

        from clusterscope.server import create_app

        result = runner.invoke(
            main, ["cluster", "--input", data_file, "--k", "2", "--seed", "4"]
        )
        cli_model = json.loads(result.output)

        with TestClient(create_app()) as client:
            sid = client.post(
                "/sessions", content=CSV, headers={"content-type": "text/csv"}
            ).json()["session_id"]
            api_model = client.post(
                f"/sessions/{sid}/clustering",
                json={"method": "kmeans", "k": 2, "seed": 4},
            ).json()["model"]
        assert cli_model["labels"] == api_model["labels"]
        assert cli_model["centroids"] == api_model["centroids"]
        assert cli_model["order"] == api_model["order"]

    def test_project_matches_api_route(self, runner, data_file):
        from fastapi.testclient import TestClient

        from clusterscope.server import create_app

        result = runner.invoke(main, ["project", "--input", data_file, "--method", "pca"])
        cli_coords = json.loads(result.output)["coords"]

        with TestClient(create_app()) as client:
            sid = client.post(
                "/sessions", content=CSV, headers={"content-type": "text/csv"}
            ).json()["session_id"]
            api_coords = client.post(
                f"/sessions/{sid}/projection", json={"method": "pca"}
            ).json()["coords"]
        assert cli_coords == api_coords


class TestStatsCommands:
    def test_anova_with_labels_file(self, runner, data_file, tmp_path):
        labels = tmp_path / "labels.json"
        runner.invoke(main, ["cluster", "--input", data_file, "--k", "2", "--out", str(labels)])
        result = runner.invoke(
            main,
            [
                "stats", "anova",
                "--input", data_file,
                "--feature", "age",
                "--labels", str(labels),
                "--clusters", "0,1",
            ],
        )
        assert result.exit_code == 0
        payload = json.loads(result.output)
        assert payload["df1"] == 1
        assert 0.0 <= payload["p"] <= 1.0

    def test_corr(self, runner, data_file):
        result = runner.invoke(main, ["stats", "corr", "--input", data_file])
        assert result.exit_code == 0
        payload = json.loads(result.output)
        assert len(payload["correlations"]) == 1
