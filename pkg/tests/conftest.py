import sys
from pathlib import Path

import pytest

FIXTURES = Path(__file__).parent / "fixtures"

sys.path.insert(0, str(Path(__file__).parent))


@pytest.fixture(scope="session")
def default_catalog():
    from cryptoscan import load_catalog

    return load_catalog()


@pytest.fixture()
def write_project(tmp_path):
    """Factory: write_project({'a.py': '...'}) -> project root path."""

    counter = {"n": 0}

    def factory(files, name=None):
        counter["n"] += 1
        root = tmp_path / (name or f"proj{counter['n']}")
        for rel, content in files.items():
            target = root / rel
            target.parent.mkdir(parents=True, exist_ok=True)
            target.write_text(content, encoding="utf-8")
        return root

    return factory


def scan_path(path, **kwargs):
    """Scan one project directory and return its ScanOutcome."""
    from cryptoscan import discover_projects, load_catalog
    from cryptoscan.pipeline import scan_project

    catalog = kwargs.pop("catalog", None) or load_catalog()
    descriptor = discover_projects(path)[0]
    return scan_project(descriptor, catalog, **kwargs)
