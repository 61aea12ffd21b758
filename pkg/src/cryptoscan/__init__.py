"""Static detector for cryptographic API misuse in tool-server codebases."""

from .catalog import CryptoApiCatalog, CryptoApiSpec, load_catalog, lookup, semantic_category
from .dependency import DepEdge, DependencyGraph, build_graph, build_may_edges, build_must_edges, extract_fingerprint
from .ingest import Language, ProjectDescriptor, SourceFile, detect_language, discover_projects, enumerate_source_files
from .irmodel import Argument, IrUnit, deserialize_ir, serialize_ir
from .pipeline import scan_project, scan_projects
from .report import CorpusStats, ProjectReport, aggregate_corpus, emit_project_report, render_summary
from .rules import Finding, evaluate_rules
from .taint import OriginValue, TaintChain, identify_sinks, identify_sources, propagate, resolve_to_origin

__version__ = "0.1.0"

__all__ = [
    "Argument",
    "CorpusStats",
    "CryptoApiCatalog",
    "CryptoApiSpec",
    "DepEdge",
    "DependencyGraph",
    "Finding",
    "IrUnit",
    "Language",
    "OriginValue",
    "ProjectDescriptor",
    "ProjectReport",
    "SourceFile",
    "TaintChain",
    "aggregate_corpus",
    "build_graph",
    "build_may_edges",
    "build_must_edges",
    "deserialize_ir",
    "detect_language",
    "discover_projects",
    "emit_project_report",
    "enumerate_source_files",
    "evaluate_rules",
    "extract_fingerprint",
    "identify_sinks",
    "identify_sources",
    "load_catalog",
    "lookup",
    "propagate",
    "render_summary",
    "resolve_to_origin",
    "scan_project",
    "scan_projects",
    "semantic_category",
    "serialize_ir",
    "__version__",
]
