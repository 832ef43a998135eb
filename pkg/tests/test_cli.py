import json

import pytest
from click.testing import CliRunner

from ebmatch.cli import cli

from conftest import FW_TSV, TAG_TSV


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    (root / "fw.tsv").write_text(FW_TSV, encoding="utf-8")
    (root / "tags.tsv").write_text(TAG_TSV, encoding="utf-8")
    records = [
        {"source": "the export refund for cereals out slowly red",
         "target": "xthe xexport xrefund xfor xcereals xout xslowly xred",
         "markers": [[5, 5]]},
        {"source": "the export refund for cereals",
         "target": "xthe xexport xrefund xfor xcereals"},
        {"source": "the export refund for rice",
         "target": "xthe xexport xrefund xfor xrice"},
        {"source": "the levy on sugar", "target": "xthe xlevy xon xsugar"},
        {"source": "out slowly green", "target": "xout xslowly xgreen"},
    ]
    (root / "archive.jsonl").write_text(
        "\n".join(json.dumps(r) for r in records) + "\n", encoding="utf-8"
    )
    (root / "test.txt").write_text(
        "the export refund for cereals\nthe levy on sugar\n", encoding="utf-8"
    )
    return root


@pytest.fixture(scope="module")
def runner():
    return CliRunner()


@pytest.fixture(scope="module")
def model_path(runner, workspace):
    out = workspace / "model.json"
    result = runner.invoke(cli, [
        "learn",
        "--archive", str(workspace / "archive.jsonl"),
        "--fw", str(workspace / "fw.tsv"),
        "--tags", str(workspace / "tags.tsv"),
        "--out", str(out),
        "--k", "3",
        "--seg-threshold", "0.33",
    ])
    assert result.exit_code == 0, result.output
    assert "model written" in result.output
    assert "iteration 1:" in result.output
    return out


class TestEncode:
    def test_prints_pattern(self, runner, workspace):
        result = runner.invoke(cli, [
            "encode",
            "--fw", str(workspace / "fw.tsv"),
            "--tags", str(workspace / "tags.tsv"),
            "--sentence", "the export refund",
        ])
        assert result.exit_code == 0, result.output
        body = json.loads(result.output)
        assert body["blocks"] == [[], [1, 2]]


class TestLearnCommand:
    def test_model_file_written(self, model_path):
        assert model_path.exists()

    def test_missing_archive_exits_1(self, runner, workspace):
        result = runner.invoke(cli, [
            "learn",
            "--archive", str(workspace / "missing.jsonl"),
            "--fw", str(workspace / "fw.tsv"),
            "--tags", str(workspace / "tags.tsv"),
            "--out", str(workspace / "m.json"),
            "--k", "2",
        ])
        assert result.exit_code == 1
        assert "Error" in result.output

    def test_no_stopping_rule_exits_1(self, runner, workspace):
        result = runner.invoke(cli, [
            "learn",
            "--archive", str(workspace / "archive.jsonl"),
            "--fw", str(workspace / "fw.tsv"),
            "--tags", str(workspace / "tags.tsv"),
            "--out", str(workspace / "m.json"),
        ])
        assert result.exit_code == 1

    def test_unknown_flag_exits_2(self, runner):
        result = runner.invoke(cli, ["learn", "--frobnicate"])
        assert result.exit_code == 2

    def test_unknown_subcommand_exits_2(self, runner):
        result = runner.invoke(cli, ["transmogrify"])
        assert result.exit_code == 2


class TestQueryCommand:
    def _args(self, workspace, model_path, extra=()):
        return [
            "query",
            "--model", str(model_path),
            "--clusters", "3",
            "--cover-threshold", "0.4",
            "--score-floor", "0.3",
            *extra,
        ]

    def test_proposal_jsonl_plus_summary(self, runner, workspace, model_path):
        result = runner.invoke(cli, self._args(
            workspace, model_path, ["--sentence", "the export refund for cereals"]
        ))
        assert result.exit_code == 0, result.output
        lines = [json.loads(line) for line in result.output.splitlines()]
        proposals = [l for l in lines if "summary" not in l]
        summaries = [l for l in lines if "summary" in l]
        assert proposals and len(summaries) == 1
        assert proposals[0]["score"] == pytest.approx(1.0, abs=1e-9)
        assert set(proposals[0]) >= {
            "entry_id", "score", "input_span", "entry_span", "target",
            "provenance", "partial", "sentence_index",
        }
        summary = summaries[0]["summary"]
        assert {"comparisons", "clusters_searched", "uncovered_spans"} <= set(summary)

    def test_stdin_sentences(self, runner, workspace, model_path):
        result = runner.invoke(
            cli, self._args(workspace, model_path),
            input="the levy on sugar\n\nthe export refund for rice\n",
        )
        assert result.exit_code == 0, result.output
        lines = [json.loads(line) for line in result.output.splitlines()]
        indices = {l["summary"]["sentence_index"] for l in lines if "summary" in l}
        assert indices == {0, 1}

    def test_byte_identical_reruns(self, runner, workspace, model_path):
        args = self._args(workspace, model_path, ["--sentence", "the export refund for rice"])
        first = runner.invoke(cli, args)
        second = runner.invoke(cli, args)
        assert first.output == second.output

    def test_no_sentences_exits_1(self, runner, workspace, model_path):
        result = runner.invoke(cli, self._args(workspace, model_path), input="")
        assert result.exit_code == 1


class TestEvaluateCommand:
    def test_table_output(self, runner, workspace, model_path):
        result = runner.invoke(cli, [
            "evaluate",
            "--model", str(model_path),
            "--test", str(workspace / "test.txt"),
            "--clusters", "1",
        ])
        assert result.exit_code == 0, result.output
        assert "MISSED" in result.output
        assert "MISSED BY" in result.output

    def test_json_output(self, runner, workspace, model_path):
        result = runner.invoke(cli, [
            "evaluate",
            "--model", str(model_path),
            "--test", str(workspace / "test.txt"),
            "--clusters", "1",
            "--json",
        ])
        assert result.exit_code == 0, result.output
        body = json.loads(result.output)
        assert body["queries"] == 2
        assert "records" in body


class TestStatsCommand:
    def test_archive_stats(self, runner, workspace):
        result = runner.invoke(cli, [
            "stats",
            "--archive", str(workspace / "archive.jsonl"),
            "--fw", str(workspace / "fw.tsv"),
            "--tags", str(workspace / "tags.tsv"),
        ])
        assert result.exit_code == 0, result.output
        body = json.loads(result.output)
        assert body["entries"] == 5

    def test_model_stats(self, runner, model_path):
        result = runner.invoke(cli, ["stats", "--model", str(model_path)])
        assert result.exit_code == 0, result.output
        body = json.loads(result.output)
        assert body["cluster_size_distribution"]


class TestConfigFile:
    def test_config_supplies_defaults_flags_win(self, runner, workspace, model_path):
        config = workspace / "config.json"
        config.write_text(json.dumps({"clusters": 3, "cover_threshold": 0.4, "score_floor": 0.3}))
        via_config = runner.invoke(cli, [
            "query", "--model", str(model_path),
            "--config", str(config),
            "--sentence", "the export refund for cereals",
        ])
        assert via_config.exit_code == 0, via_config.output
        flag_wins = runner.invoke(cli, [
            "query", "--model", str(model_path),
            "--config", str(config),
            "--clusters", "1",
            "--sentence", "the export refund for cereals",
        ])
        assert flag_wins.exit_code == 0, flag_wins.output
        # config run searches 3 clusters; explicit flag narrows to 1
        def searched(output):
            lines = [json.loads(line) for line in output.splitlines()]
            return max(
                len(l["summary"]["clusters_searched"]) for l in lines if "summary" in l
            )
        assert searched(via_config.output) >= searched(flag_wins.output)

    def test_unknown_config_key_rejected(self, runner, workspace, model_path):
        config = workspace / "bad.json"
        config.write_text(json.dumps({"clusterz": 2}))
        result = runner.invoke(cli, [
            "query", "--model", str(model_path),
            "--config", str(config),
            "--sentence", "the levy on sugar",
        ])
        assert result.exit_code == 1
        assert "unknown config key" in result.output

    def test_jobs_validated(self, runner, workspace, model_path):
        result = runner.invoke(cli, [
            "query", "--model", str(model_path),
            "--jobs", "0",
            "--sentence", "the levy on sugar",
        ])
        assert result.exit_code == 1
