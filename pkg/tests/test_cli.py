import json

import pytest
from OCRRevise import cli
from tests.mock_responses import MockCorpus


@pytest.fixture
def corpus_file(tmp_path):
    path = tmp_path / "corpus.jsonl"
    path.write_text(
        "".join(
            json.dumps({"id": document.id, "text": document.text}) + "\n"
            for document in MockCorpus.documents(8, sentences=10, seed=1)
        ),
        encoding="utf-8",
    )
    return path


@pytest.fixture
def pairs_file(tmp_path, corpus_file):
    path = tmp_path / "pairs.jsonl"
    assert cli.run(["synthesize", "--in", str(corpus_file), "--out", str(path), "--seed", "42"]) == cli.EXIT_OK
    return path


def _corrected(tmp_path, pairs_file, field):
    path = tmp_path / "corrected.jsonl"
    with open(pairs_file, encoding="utf-8") as f:
        records = [json.loads(line) for line in f]
    path.write_text(
        "".join(json.dumps({"id": record["id"], "text": record[field]}) + "\n" for record in records),
        encoding="utf-8",
    )
    return path


class TestCli:
    def test_run_dump_defaults_prints_profile(self, capsys):
        assert cli.run(["dump-defaults"]) == cli.EXIT_OK

        out = capsys.readouterr().out
        assert "del_char = 0.07\n" in out
        assert "del_word = 0.02\n" in out
        assert "ins_char = 0.05\n" in out
        assert "allowed_columns = 2,3\n" in out

    def test_run_dump_defaults_confusion(self, capsys):
        assert cli.run(["dump-defaults", "--confusion"]) == cli.EXIT_OK

        assert "l -> 1!\n" in capsys.readouterr().out

    def test_run_help_exits_ok(self, capsys):
        assert cli.run(["--help"]) == cli.EXIT_OK
        assert "synthesize" in capsys.readouterr().out

    @pytest.mark.parametrize(
        "argv",
        [
            [],
            ["unknown-command"],
            ["dump-defaults", "--no-such-flag"],
            ["dump-defaults", "--seed", "abc"],
            ["dump-defaults", "--seed", str(2 ** 64)],
            ["synthesize", "--in", "corpus.jsonl", "--jobs", "0", "--out", "x.jsonl"],
        ],
    )
    def test_run_usage_error_exits_1(self, argv, capsys):
        assert cli.run(argv) == cli.EXIT_USAGE
        assert "usage:" in capsys.readouterr().err

    def test_run_synthesize_needs_out(self, corpus_file, capsys):
        assert cli.run(["synthesize", "--in", str(corpus_file)]) == cli.EXIT_USAGE
        assert "needs --out" in capsys.readouterr().err

    def test_run_synthesize_is_reproducible(self, tmp_path, corpus_file):
        first = tmp_path / "first.jsonl"
        second = tmp_path / "second.jsonl"

        assert cli.run(["synthesize", "--in", str(corpus_file), "--out", str(first), "--seed", "7"]) == 0
        assert cli.run(
            ["synthesize", "--in", str(corpus_file), "--out", str(second), "--seed", "7", "--jobs", "2"]
        ) == 0

        assert first.read_bytes() == second.read_bytes()
        assert len(first.read_text(encoding="utf-8").splitlines()) == 8

    def test_run_synthesize_limit_and_skip(self, tmp_path, corpus_file, pairs_file):
        window = tmp_path / "window.jsonl"

        assert cli.run(
            ["synthesize", "--in", str(corpus_file), "--out", str(window), "--seed", "42", "--skip", "2", "--limit", "3"]
        ) == 0

        assert window.read_text(encoding="utf-8").splitlines() == pairs_file.read_text(encoding="utf-8").splitlines()[2:5]

    def test_run_synthesize_from_plain_dir(self, tmp_path):
        directory = tmp_path / "wiki"
        directory.mkdir()
        for document in MockCorpus.documents(3, sentences=5):
            (directory / (document.id + ".txt")).write_text(document.text, encoding="utf-8")
        out = tmp_path / "pairs.jsonl"

        assert cli.run(["synthesize", "--in", str(directory), "--format", "plain_dir", "--out", str(out)]) == 0

        assert [json.loads(line)["id"] for line in out.read_text(encoding="utf-8").splitlines()] == [
            "doc0000", "doc0001", "doc0002"
        ]

    def test_run_contaminate_single_category_to_stdout(self, corpus_file, capsys):
        assert cli.run(["contaminate", "--in", str(corpus_file), "--only", "insertion", "--include-events"]) == 0

        records = [json.loads(line) for line in capsys.readouterr().out.splitlines()]
        assert len(records) == 8
        assert {event["kind"] for record in records for event in record["events"]} == {"InsChar"}
        assert all(section[2] == 1 for record in records for section in record["layout"]["sections"])

    def test_run_evaluate_clean_correction(self, tmp_path, pairs_file):
        corrected = _corrected(tmp_path, pairs_file, "output")
        report = tmp_path / "report.json"

        assert cli.run(["evaluate", "--pairs", str(pairs_file), "--corrected", str(corrected), "--out", str(report)]) == 0

        record = json.loads(report.read_text(encoding="utf-8"))
        assert record["cer_after"] == 0.0
        assert record["cer_before"] > 0.0
        assert record["document_count"] == 8

    def test_run_evaluate_prints_table(self, tmp_path, pairs_file, capsys):
        corrected = _corrected(tmp_path, pairs_file, "input")

        assert cli.run(["evaluate", "--pairs", str(pairs_file), "--corrected", str(corrected)]) == 0

        out = capsys.readouterr().out
        assert "CER" in out
        assert "WER" in out

    def test_run_train_correct_and_retrieval(self, tmp_path, corpus_file, pairs_file):
        model = tmp_path / "model.json"
        corrected = tmp_path / "corrected.jsonl"
        recall = tmp_path / "recall.json"

        assert cli.run(["train-lm", "--in", str(corpus_file), "--out", str(model)]) == 0
        assert cli.run(["correct", "--pairs", str(pairs_file), "--model", str(model), "--out", str(corrected)]) == 0
        assert cli.run(
            ["retrieval-eval", "--pairs", str(pairs_file), "--corrected", str(corrected), "--k", "1,3", "--out", str(recall)]
        ) == 0

        records = [json.loads(line) for line in corrected.read_text(encoding="utf-8").splitlines()]
        assert len(records) == 8
        assert set(records[0]) == {"id", "text", "columns", "diagnostics"}
        reports = json.loads(recall.read_text(encoding="utf-8"))
        assert [report["variant"] for report in reports] == ["clean", "contaminated", "corrected"]
        assert all(set(report["recall_at"]) == {"1", "3"} for report in reports)

    def test_run_missing_corpus_exits_2(self, tmp_path):
        out = tmp_path / "pairs.jsonl"

        assert cli.run(["synthesize", "--in", str(tmp_path / "missing.jsonl"), "--out", str(out)]) == cli.EXIT_DATA
        assert not out.exists()

    def test_run_invalid_profile_exits_2(self, tmp_path, corpus_file, caplog):
        profile = tmp_path / "bad.cfg"
        profile.write_text("del_char = 1.2\n", encoding="utf-8")

        assert cli.run(
            ["synthesize", "--in", str(corpus_file), "--profile", str(profile), "--out", str(tmp_path / "p.jsonl")]
        ) == cli.EXIT_DATA
        assert "del_char" in caplog.text

    def test_run_unmatched_corrected_exits_2(self, tmp_path, pairs_file):
        corrected = tmp_path / "corrected.jsonl"
        corrected.write_text('{"id": "nobody", "text": "x"}\n', encoding="utf-8")

        assert cli.run(["evaluate", "--pairs", str(pairs_file), "--corrected", str(corrected)]) == cli.EXIT_DATA

    def test_run_retrieval_unmatched_corrected_exits_2(self, tmp_path, pairs_file, caplog):
        corrected = tmp_path / "corrected.jsonl"
        with open(pairs_file, encoding="utf-8") as f:
            records = [json.loads(line) for line in f]
        corrected.write_text(
            "".join(json.dumps({"id": record["id"], "text": record["output"]}) + "\n" for record in records[1:]),
            encoding="utf-8",
        )

        assert cli.run(["retrieval-eval", "--pairs", str(pairs_file), "--corrected", str(corrected)]) == cli.EXIT_DATA
        assert "Unmatched document ids: {0}".format(records[0]["id"]) in caplog.text

    def test_run_correct_only_segmentation(self, tmp_path, corpus_file, pairs_file):
        model = tmp_path / "model.json"
        corrected = tmp_path / "corrected.jsonl"

        assert cli.run(["train-lm", "--in", str(corpus_file), "--out", str(model)]) == 0
        assert cli.run(
            ["correct", "--pairs", str(pairs_file), "--model", str(model), "--only", "segmentation", "--out", str(corrected)]
        ) == 0

        records = [json.loads(line) for line in corrected.read_text(encoding="utf-8").splitlines()]
        assert len(records) == 8
        for record in records:
            assert set(record["columns"]) == {1}
            assert all(count == 0 for category, count in record["diagnostics"].items() if category != "segmentation")

    def test_run_correct_unknown_only_exits_1(self, tmp_path, pairs_file):
        argv = ["correct", "--pairs", str(pairs_file), "--model", str(tmp_path / "m.json"), "--only", "spelling"]

        assert cli.run(argv) == cli.EXIT_USAGE
