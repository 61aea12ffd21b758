import io
import json
import os

import pytest

from cryptoscan.cli import EXIT_CLEAN, EXIT_ERROR, EXIT_TRIGGERED, parse_args, run_scan
from cryptoscan.errors import UsageError
from cryptoscan.rules import RULE_IDS

from conftest import FIXTURES


def run(argv):
    config = parse_args(argv)
    config.output = io.StringIO()
    code = run_scan(config)
    return code, config.output.getvalue()


def test_parse_defaults():
    config = parse_args(["scan", "./proj"])
    assert config.corpus_mode is False
    assert config.enabled_rules == set(RULE_IDS)
    assert config.output_format == "text"
    assert config.must_scope == "project"
    assert config.fail_on == "misuse"
    assert config.parallelism >= 1
    assert config.timings is True


def test_parse_corpus_with_rule_subset():
    config = parse_args(["scan", "./corpus", "--corpus", "--rules", "R3,R6", "--format", "json"])
    assert config.corpus_mode is True
    assert config.enabled_rules == {"R3", "R6"}
    assert config.output_format == "json"


def test_missing_target_is_usage_error():
    with pytest.raises(UsageError):
        parse_args(["scan"])


def test_unknown_flag_is_usage_error():
    with pytest.raises(UsageError):
        parse_args(["scan", ".", "--frobnicate"])


def test_unknown_rule_is_usage_error():
    with pytest.raises(UsageError):
        parse_args(["scan", ".", "--rules", "R9"])


def test_scanner_catalog_env_fallback(tmp_path, monkeypatch):
    catalog_file = tmp_path / "cat.json"
    catalog_file.write_text(json.dumps({"specs": []}), encoding="utf-8")
    monkeypatch.setenv("SCANNER_CATALOG", str(catalog_file))
    config = parse_args(["scan", "."])
    assert config.catalog_file == catalog_file
    monkeypatch.delenv("SCANNER_CATALOG")
    assert parse_args(["scan", "."]).catalog_file is None


def test_clean_project_exits_zero(write_project):
    root = write_project({"clean.py": "import hashlib\nh = hashlib.sha256(b'ok')\n"})
    code, output = run(["scan", str(root)])
    assert code == EXIT_CLEAN
    assert "misuse=no" in output


def test_des_ecb_fixture_exits_one_with_r6_r8():
    code, output = run(["scan", str(FIXTURES / "paper_corpus" / "des_ecb_tool")])
    assert code == EXIT_TRIGGERED
    assert "R6 misuse" in output and "R8 misuse" in output


def test_nonexistent_target_exits_two(tmp_path):
    code, _ = run(["scan", str(tmp_path / "missing")])
    assert code == EXIT_ERROR


def test_fail_on_never(write_project):
    code, _ = run(["scan", str(FIXTURES / "paper_corpus" / "des_ecb_tool"), "--fail-on", "never"])
    assert code == EXIT_CLEAN


def test_fail_on_any_counts_informational():
    code, _ = run(["scan", str(FIXTURES / "paper_corpus" / "md5_checksum"), "--fail-on", "any"])
    assert code == EXIT_TRIGGERED
    code, _ = run(["scan", str(FIXTURES / "paper_corpus" / "md5_checksum"), "--fail-on", "misuse"])
    assert code == EXIT_CLEAN


def test_rule_filter_isolates_findings():
    code, output = run(["scan", str(FIXTURES / "paper_corpus" / "des_ecb_tool"), "--rules", "R8", "--format", "json"])
    assert code == EXIT_TRIGGERED
    document = json.loads(output)
    assert [f["rule"] for f in document["findings"]] == ["R8"]


def test_emit_ir_and_graph(tmp_path):
    ir_path = tmp_path / "ir.json"
    graph_path = tmp_path / "graph.json"
    code, _ = run([
        "scan", str(FIXTURES / "must_may"),
        "--emit-ir", str(ir_path), "--emit-graph", str(graph_path),
    ])
    assert code == EXIT_TRIGGERED
    ir_doc = json.loads(ir_path.read_text(encoding="utf-8"))
    assert isinstance(ir_doc, list) and ir_doc
    expected_keys = {"unit_id", "call_name", "file", "line", "column", "scope", "produced_as", "parent_context", "arguments"}
    assert set(ir_doc[0]) == expected_keys
    graph_doc = json.loads(graph_path.read_text(encoding="utf-8"))
    assert set(graph_doc) == {"nodes", "edges"}
    kinds = {e["kind"] for e in graph_doc["edges"]}
    assert kinds == {"must", "may"}


def test_corpus_json_document_shape():
    code, output = run([
        "scan", str(FIXTURES / "paper_corpus"), "--corpus", "--format", "json", "--no-timings",
    ])
    assert code == EXIT_TRIGGERED
    document = json.loads(output)
    assert set(document) == {"projects", "corpus_stats"}
    assert [p["project_id"] for p in document["projects"]] == sorted(p["project_id"] for p in document["projects"])
    assert document["corpus_stats"]["total_projects"] == 8


def test_corpus_text_includes_summary():
    code, output = run(["scan", str(FIXTURES / "paper_corpus"), "--corpus", "--fail-on", "never"])
    assert code == EXIT_CLEAN
    assert "misusing projects by rule" in output
    assert "projects by market" in output


def test_metadata_flows_into_corpus_stats(tmp_path):
    corpus = tmp_path / "corpus"
    (corpus / "one").mkdir(parents=True)
    (corpus / "one" / "a.py").write_text("import random\nrandom.seed(7)\n", encoding="utf-8")
    meta = tmp_path / "meta.json"
    meta.write_text(json.dumps([{"project_id": "one", "market": "MarketZ", "category": "Security"}]), encoding="utf-8")
    code, output = run(["scan", str(corpus), "--corpus", "--metadata", str(meta), "--format", "json"])
    document = json.loads(output)
    assert document["corpus_stats"]["by_market"]["MarketZ"]["misuse_yes"] == 1
    assert document["projects"][0]["metadata"]["category"] == "Security"


def test_jobs_parallelism_does_not_change_output():
    argv = ["scan", str(FIXTURES / "paper_corpus"), "--corpus", "--format", "json", "--no-timings"]
    _, single = run(argv + ["--jobs", "1"])
    _, parallel = run(argv + ["--jobs", "8"])
    assert single == parallel


def test_timing_fields_present_by_default():
    _, output = run(["scan", str(FIXTURES / "paper_corpus" / "salted_kdf"), "--format", "json"])
    document = json.loads(output)
    assert document["ir_ms"] > 0.0
    assert "graph_ms" in document and "detect_ms" in document


def test_must_scope_flag_changes_cross_file_edges(tmp_path):
    project = tmp_path / "proj"
    project.mkdir()
    (project / "producer.py").write_text("mode = pick_mode('ecb')\n", encoding="utf-8")
    (project / "consumer.py").write_text(
        "from Crypto.Cipher import AES\ncipher = AES.new(key, mode)\n", encoding="utf-8"
    )
    code_project, _ = run(["scan", str(project), "--must-scope", "project"])
    code_file, _ = run(["scan", str(project), "--must-scope", "file"])
    # The ECB literal resolves across files only in project scope.
    assert code_project == EXIT_TRIGGERED
    assert code_file == EXIT_CLEAN


def test_config_thresholds(tmp_path):
    config_file = tmp_path / "thresholds.json"
    config_file.write_text(json.dumps({"r4.min_iterations": 50}), encoding="utf-8")
    project = tmp_path / "proj"
    project.mkdir()
    (project / "kdf.py").write_text(
        "from Crypto.Protocol.KDF import PBKDF2\nk = PBKDF2(password, salt, dkLen=16, count=100)\n",
        encoding="utf-8",
    )
    code, _ = run(["scan", str(project), "--config", str(config_file)])
    assert code == EXIT_CLEAN
    code, _ = run(["scan", str(project)])
    assert code == EXIT_TRIGGERED
