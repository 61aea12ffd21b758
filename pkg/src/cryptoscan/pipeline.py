"""Full scan pipeline: ingest -> IR -> graph -> taint -> rules -> report.

Per-project work is self-contained and immutable once produced, so
projects scan concurrently in a bounded pool; results merge by sorting
on project_id, which makes output independent of scheduling.
"""

import logging
import time
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from .catalog import CryptoApiCatalog, lookup
from .dependency import build_graph
from .errors import FatalParseError
from .extractor import extract_file, parse_to_ast
from .ingest import ProjectDescriptor, detect_language, enumerate_source_files
from .irmodel import _unit_sort_key
from .rules import evaluate_rules
from .report import ProjectReport
from .taint import identify_sinks, identify_sources, propagate

logger = logging.getLogger(__name__)


@dataclass
class ScanOutcome:
    report: ProjectReport
    units: list = field(default_factory=list)
    graph: object = None
    chains: list = field(default_factory=list)


def _relative_label(path, root) -> str:
    try:
        return path.relative_to(root).as_posix()
    except ValueError:
        return path.as_posix()


def _project_language(files) -> tuple:
    """Majority per-file language display label; lexicographic tie-break."""
    counts = Counter(f.language.display for f in files)
    if not counts:
        return "Unknown", False
    best = max(counts.values())
    winners = sorted(label for label, count in counts.items() if count == best)
    return winners[0], len(winners) > 1


def scan_project(
    descriptor: ProjectDescriptor,
    catalog: CryptoApiCatalog,
    enabled_rules=None,
    thresholds=None,
    must_scope: str = "project",
) -> ScanOutcome:
    started = time.perf_counter()

    ir_started = time.perf_counter()
    files = enumerate_source_files(descriptor)
    units = []
    bindings = []
    partial_files = []
    for file in files:
        label = _relative_label(file.path, descriptor.root_path)
        try:
            handle = parse_to_ast(file)
            extraction = extract_file(handle, file, label)
        except FatalParseError as exc:
            logger.warning("no parse tree for %s: %s", file.path, exc)
            partial_files.append(label)
            continue
        if extraction.partial:
            partial_files.append(label)
        units.extend(extraction.units)
        bindings.extend(extraction.bindings)
    units.sort(key=_unit_sort_key)
    ir_ms = (time.perf_counter() - ir_started) * 1000.0

    graph_started = time.perf_counter()
    graph = build_graph(units, catalog, bindings=bindings, must_scope=must_scope)
    graph_ms = (time.perf_counter() - graph_started) * 1000.0

    detect_started = time.perf_counter()
    sources = identify_sources(graph, catalog)
    sinks = identify_sinks(graph, catalog)
    chains = propagate(graph, sources, sinks)
    findings = evaluate_rules(
        graph, chains, catalog,
        enabled_rules=enabled_rules,
        thresholds=thresholds,
        project_id=descriptor.project_id,
    )
    detect_ms = (time.perf_counter() - detect_started) * 1000.0

    crypto_enabled = False
    for unit in units:
        spec = lookup(unit.call_name, detect_language(unit.file), catalog)
        if spec is not None and spec.role != "none":
            crypto_enabled = True
            break

    language, language_tie = _project_language(files)
    report = ProjectReport(
        project_id=descriptor.project_id,
        metadata=dict(descriptor.metadata),
        file_count=len(files),
        ir_unit_count=len(units),
        crypto_enabled=crypto_enabled,
        misuse=any(f.severity == "misuse" for f in findings),
        findings=findings,
        partial_files=sorted(set(partial_files)),
        duration_ms=(time.perf_counter() - started) * 1000.0,
        ir_ms=ir_ms,
        graph_ms=graph_ms,
        detect_ms=detect_ms,
        language=language,
        language_tie=language_tie,
    )
    return ScanOutcome(report=report, units=units, graph=graph, chains=chains)


def scan_projects(
    descriptors,
    catalog: CryptoApiCatalog,
    enabled_rules=None,
    thresholds=None,
    must_scope: str = "project",
    jobs: int = 1,
) -> list:
    """Scan every project with a bounded worker pool; results sorted by project_id."""

    def work(descriptor):
        return scan_project(descriptor, catalog, enabled_rules, thresholds, must_scope)

    if jobs <= 1 or len(descriptors) <= 1:
        outcomes = [work(d) for d in descriptors]
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(work, descriptors))
    outcomes.sort(key=lambda o: o.report.project_id)
    return outcomes
