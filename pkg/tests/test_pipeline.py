from cryptoscan import discover_projects, load_catalog
from cryptoscan.pipeline import scan_project, scan_projects

from conftest import scan_path


def test_language_majority_label(write_project):
    root = write_project({"a.py": "x = 1\n", "b.py": "y = 2\n", "c.js": "const z = 1;\n"})
    report = scan_path(root).report
    assert report.language == "Python"
    assert report.language_tie is False


def test_language_tie_is_flagged(write_project):
    root = write_project({"a.py": "x = 1\n", "b.js": "const y = 1;\n"})
    report = scan_path(root).report
    assert report.language == "JavaScript"  # lexicographic tie-break
    assert report.language_tie is True


def test_declared_language_metadata_wins_in_aggregation(write_project):
    from cryptoscan.report import aggregate_corpus

    root = write_project({"a.py": "x = 1\n"})
    descriptor = discover_projects(root)[0]
    descriptor.metadata["language"] = "Go"
    report = scan_project(descriptor, load_catalog()).report
    stats = aggregate_corpus([report])
    assert "Go" in stats.by_language


def test_partial_files_listed_and_scan_continues(write_project):
    root = write_project(
        {
            "ok.py": "import hashlib\nh = hashlib.sha256(b'x')\n",
            "broken.py": "def f(:\n",
        }
    )
    report = scan_path(root).report
    assert report.partial_files == ["broken.py"]
    assert report.crypto_enabled is True


def test_crypto_enabled_only_for_crypto_roles(write_project):
    plain = scan_path(write_project({"a.py": "print('hello')\n"})).report
    assert plain.crypto_enabled is False
    crypto = scan_path(write_project({"b.py": "import hashlib\nh = hashlib.sha256(b'x')\n"})).report
    assert crypto.crypto_enabled is True and crypto.misuse is False


def test_unit_ids_are_project_relative(write_project):
    root = write_project({"pkg/mod.py": "value = helper(1)\n"})
    outcome = scan_path(root)
    assert [u.unit_id for u in outcome.units] == ["pkg/mod.py#0"]
    assert outcome.units[0].file == "pkg/mod.py"


def test_timings_are_populated(write_project):
    report = scan_path(write_project({"a.py": "x = helper(1)\n"})).report
    assert report.duration_ms > 0.0
    assert report.ir_ms > 0.0
    assert report.graph_ms >= 0.0 and report.detect_ms >= 0.0


def test_scan_projects_sorted_regardless_of_jobs(tmp_path):
    for name in ("zeta", "alpha", "mid"):
        directory = tmp_path / name
        directory.mkdir()
        (directory / "a.py").write_text("x = helper(1)\n", encoding="utf-8")
    catalog = load_catalog()
    descriptors = discover_projects(tmp_path, corpus_mode=True)
    sequential = [o.report.project_id for o in scan_projects(descriptors, catalog, jobs=1)]
    parallel = [o.report.project_id for o in scan_projects(descriptors, catalog, jobs=4)]
    assert sequential == parallel == ["alpha", "mid", "zeta"]
