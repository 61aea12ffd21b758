"""Project discovery, source-file enumeration, and language detection.

Discovery and enumeration only read the filesystem; they never follow
paths outside the scan root and never partially read a file.
"""

import json
import logging
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

from .errors import MalformedMetadata, NonexistentRoot

logger = logging.getLogger(__name__)

# Vendored/generated trees would dominate findings with third-party noise.
SKIP_DIRS = {"node_modules", ".git", "vendor", "dist", "build", "__pycache__", "venv", ".venv"}

# Files larger than this are generated bundles, not hand-written tool code.
MAX_FILE_BYTES = 2 * 1024 * 1024

_EXTENSION_MAP = {
    ".py": "python",
    ".js": "javascript",
    ".mjs": "javascript",
    ".cjs": "javascript",
    ".ts": "typescript",
    ".tsx": "typescript",
}


class Language(Enum):
    PYTHON = "python"
    JAVASCRIPT = "javascript"
    TYPESCRIPT = "typescript"
    UNKNOWN = "unknown"

    @property
    def display(self) -> str:
        return {
            Language.PYTHON: "Python",
            Language.JAVASCRIPT: "JavaScript",
            Language.TYPESCRIPT: "TypeScript",
            Language.UNKNOWN: "Unknown",
        }[self]


@dataclass
class ProjectDescriptor:
    root_path: Path
    project_id: str
    metadata: dict = field(default_factory=dict)


@dataclass
class SourceFile:
    path: Path
    language: Language
    content: str
    size_bytes: int


def detect_language(path, content: str = "") -> Language:
    """Extension-based detection; the content parameter is reserved."""
    del content
    name = str(path)
    base = name[max(name.rfind("/"), name.rfind("\\")) + 1 :]
    dot = base.rfind(".")
    suffix = base[dot:].lower() if dot > 0 else ""
    return Language(_EXTENSION_MAP.get(suffix, "unknown"))


def _load_metadata(metadata_file: Path) -> dict:
    try:
        raw = json.loads(metadata_file.read_text(encoding="utf-8"))
    except (OSError, ValueError) as exc:
        raise MalformedMetadata(f"{metadata_file}: {exc}") from exc
    if not isinstance(raw, list):
        raise MalformedMetadata(f"{metadata_file}: top-level value must be a JSON array")
    table: dict = {}
    for index, record in enumerate(raw):
        if not isinstance(record, dict):
            raise MalformedMetadata(f"{metadata_file}: record {index} is not an object")
        project_id = record.get("project_id")
        if not isinstance(project_id, str) or not project_id:
            raise MalformedMetadata(f"{metadata_file}: record {index} has no project_id")
        if project_id in table:
            raise MalformedMetadata(f"{metadata_file}: duplicate project_id {project_id!r} (record {index})")
        entry = {}
        for key in ("market", "category", "language"):
            value = record.get(key)
            if value is not None:
                if not isinstance(value, str):
                    raise MalformedMetadata(f"{metadata_file}: record {index} field {key!r} is not a string")
                entry[key] = value
        table[project_id] = entry
    return table


def discover_projects(root, corpus_mode: bool = False, metadata_file=None) -> list:
    """Return the projects to scan under ``root``.

    Single mode yields one descriptor for root itself; corpus mode yields
    one descriptor per immediate subdirectory (hidden and skip-list names
    excluded), joined with metadata by directory name, sorted by
    project_id.
    """
    root = Path(root)
    if not root.is_dir():
        raise NonexistentRoot(f"scan root does not exist or is not a directory: {root}")
    metadata = _load_metadata(Path(metadata_file)) if metadata_file else {}

    if not corpus_mode:
        project_id = root.resolve().name or str(root)
        return [ProjectDescriptor(root, project_id, dict(metadata.get(project_id, {})))]

    descriptors = []
    for entry in sorted(root.iterdir(), key=lambda p: p.name):
        if not entry.is_dir():
            continue
        if entry.name.startswith(".") or entry.name in SKIP_DIRS:
            continue
        descriptors.append(ProjectDescriptor(entry, entry.name, dict(metadata.get(entry.name, {}))))
    return descriptors


def enumerate_source_files(project: ProjectDescriptor) -> list:
    """All recognized source files under the project root, sorted by path.

    Oversized and undecodable files are skipped with a warning; unreadable
    files never abort the scan.
    """
    files = []
    stack = [project.root_path]
    while stack:
        directory = stack.pop()
        try:
            entries = sorted(directory.iterdir(), key=lambda p: p.name)
        except OSError as exc:
            logger.warning("unreadable directory %s: %s", directory, exc)
            continue
        for entry in entries:
            if entry.is_dir() and not entry.is_symlink():
                if entry.name in SKIP_DIRS or entry.name.startswith("."):
                    continue
                stack.append(entry)
                continue
            if not entry.is_file():
                continue
            language = detect_language(entry)
            if language is Language.UNKNOWN:
                continue
            try:
                size = entry.stat().st_size
            except OSError as exc:
                logger.warning("unreadable file %s: %s", entry, exc)
                continue
            if size > MAX_FILE_BYTES:
                logger.warning("skipping %s: %d bytes exceeds the %d byte cap", entry, size, MAX_FILE_BYTES)
                continue
            try:
                content = entry.read_text(encoding="utf-8-sig")
            except UnicodeDecodeError:
                logger.warning("skipping %s: not valid UTF-8", entry)
                continue
            except OSError as exc:
                logger.warning("unreadable file %s: %s", entry, exc)
                continue
            files.append(SourceFile(entry, language, content, size))
    files.sort(key=lambda f: str(f.path))
    return files
