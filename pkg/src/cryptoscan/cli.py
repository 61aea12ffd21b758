"""Single-binary driver: scan one project or a corpus of them."""

import argparse
import io
import json
import logging
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

from .catalog import load_catalog
from .dependency import graph_to_dict
from .errors import CryptoscanError, UsageError
from .ingest import discover_projects
from .irmodel import _unit_sort_key, _unit_to_dict
from .pipeline import scan_projects
from .report import aggregate_corpus, emit_project_report, render_summary, report_to_dict, stats_to_dict
from .rules import DEFAULT_THRESHOLDS, RULE_IDS

logger = logging.getLogger(__name__)

EXIT_CLEAN = 0
EXIT_TRIGGERED = 1
EXIT_ERROR = 2


@dataclass
class ScanConfig:
    target: Path
    corpus_mode: bool = False
    metadata_file: Path = None
    catalog_file: Path = None
    enabled_rules: set = field(default_factory=lambda: set(RULE_IDS))
    output_format: str = "text"
    emit_ir: Path = None
    emit_graph: Path = None
    must_scope: str = "project"
    thresholds: dict = field(default_factory=dict)
    parallelism: int = 1
    fail_on: str = "misuse"
    timings: bool = True
    output: io.TextIOBase = None


def _parse_rules(text: str) -> set:
    rules = {part.strip().upper() for part in text.split(",") if part.strip()}
    unknown = rules - set(RULE_IDS)
    if unknown:
        raise UsageError(f"unknown rules: {', '.join(sorted(unknown))} (expected R1..R8)")
    if not rules:
        raise UsageError("at least one rule must be enabled")
    return rules


def _load_thresholds(path) -> dict:
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, ValueError) as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise UsageError(f"config {path} must be a JSON object")
    unknown = set(raw) - set(DEFAULT_THRESHOLDS)
    if unknown:
        raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
    return raw


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cryptoscan",
        description="Detect cryptographic API misuse in plugin-style tool-server code.",
    )
    commands = parser.add_subparsers(dest="command", required=True)
    scan = commands.add_parser("scan", help="scan a project directory or a corpus of them")
    scan.add_argument("target", help="project directory (or corpus root with --corpus)")
    scan.add_argument("--corpus", action="store_true", help="treat target as one directory per project")
    scan.add_argument("--metadata", metavar="FILE", help="corpus metadata JSON (market/category/language)")
    scan.add_argument("--catalog", metavar="FILE", help="extra API catalog JSON (default: $SCANNER_CATALOG)")
    scan.add_argument("--rules", metavar="LIST", help="comma-separated subset of R1..R8 (default: all)")
    scan.add_argument("--format", choices=("json", "text"), default="text", dest="output_format")
    scan.add_argument("--emit-ir", metavar="PATH", help="dump the call-site IR JSON")
    scan.add_argument("--emit-graph", metavar="PATH", help="dump the dependency graph JSON")
    scan.add_argument("--must-scope", choices=("file", "project"), default="project")
    scan.add_argument("--jobs", type=int, default=os.cpu_count() or 1, metavar="N")
    scan.add_argument("--fail-on", choices=("never", "misuse", "any"), default="misuse")
    scan.add_argument("--config", metavar="FILE", help="thresholds JSON (r4.min_iterations, r1.min_length, r1.min_entropy)")
    scan.add_argument("--no-timings", action="store_true", help="zero timing fields for byte-stable output")
    return parser


def parse_args(argv) -> ScanConfig:
    parser = _build_parser()
    buffer = io.StringIO()
    try:
        # argparse writes usage errors to stderr and exits; capture both.
        sys.stderr, original = buffer, sys.stderr
        try:
            namespace = parser.parse_args(argv)
        finally:
            sys.stderr = original
    except SystemExit as exc:
        if exc.code in (0, None):  # --help
            raise
        raise UsageError(buffer.getvalue().strip() or parser.format_usage()) from exc

    if namespace.jobs < 1:
        raise UsageError("--jobs must be >= 1")
    return ScanConfig(
        target=Path(namespace.target),
        corpus_mode=namespace.corpus,
        metadata_file=Path(namespace.metadata) if namespace.metadata else None,
        catalog_file=Path(namespace.catalog) if namespace.catalog else _catalog_from_env(),
        enabled_rules=_parse_rules(namespace.rules) if namespace.rules else set(RULE_IDS),
        output_format=namespace.output_format,
        emit_ir=Path(namespace.emit_ir) if namespace.emit_ir else None,
        emit_graph=Path(namespace.emit_graph) if namespace.emit_graph else None,
        must_scope=namespace.must_scope,
        thresholds=_load_thresholds(namespace.config) if namespace.config else {},
        parallelism=namespace.jobs,
        fail_on=namespace.fail_on,
        timings=not namespace.no_timings,
    )


def _catalog_from_env():
    value = os.environ.get("SCANNER_CATALOG")
    return Path(value) if value else None


def _strip_timings(report) -> None:
    report.duration_ms = 0.0
    report.ir_ms = 0.0
    report.graph_ms = 0.0
    report.detect_ms = 0.0


def _write_emissions(config: ScanConfig, outcomes) -> None:
    if config.emit_ir:
        if config.corpus_mode:
            payload = {
                o.report.project_id: [_unit_to_dict(u) for u in sorted(o.units, key=_unit_sort_key)]
                for o in outcomes
            }
        else:
            payload = [_unit_to_dict(u) for u in sorted(outcomes[0].units, key=_unit_sort_key)]
        config.emit_ir.write_text(json.dumps(payload, indent=2, ensure_ascii=True) + "\n", encoding="utf-8")
    if config.emit_graph:
        if config.corpus_mode:
            payload = {o.report.project_id: graph_to_dict(o.graph) for o in outcomes}
        else:
            payload = graph_to_dict(outcomes[0].graph)
        config.emit_graph.write_text(json.dumps(payload, indent=2, ensure_ascii=True) + "\n", encoding="utf-8")


def run_scan(config: ScanConfig) -> int:
    """Run the pipeline per project and write reports; returns the exit code."""
    out = config.output or sys.stdout
    try:
        catalog = load_catalog(config.catalog_file)
        descriptors = discover_projects(config.target, config.corpus_mode, config.metadata_file)
        outcomes = scan_projects(
            descriptors,
            catalog,
            enabled_rules=config.enabled_rules,
            thresholds=config.thresholds,
            must_scope=config.must_scope,
            jobs=config.parallelism,
        )
    except CryptoscanError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR

    reports = [o.report for o in outcomes]
    for report in reports:
        print(
            f"timing project={report.project_id} ir_ms={report.ir_ms:.3f} "
            f"graph_ms={report.graph_ms:.3f} detect_ms={report.detect_ms:.3f}",
            file=sys.stderr,
        )
        if not config.timings:
            _strip_timings(report)

    _write_emissions(config, outcomes)

    if config.corpus_mode:
        stats = aggregate_corpus(reports)
        if config.output_format == "json":
            document = {
                "projects": [report_to_dict(r) for r in reports],
                "corpus_stats": stats_to_dict(stats),
            }
            print(json.dumps(document, indent=2, ensure_ascii=True), file=out)
        else:
            for report in reports:
                print(emit_project_report(report, "text"), file=out)
                print("", file=out)
            print(render_summary(stats), file=out)
    else:
        print(emit_project_report(reports[0], config.output_format), file=out)

    if config.fail_on == "never":
        return EXIT_CLEAN
    if config.fail_on == "misuse":
        return EXIT_TRIGGERED if any(r.misuse for r in reports) else EXIT_CLEAN
    return EXIT_TRIGGERED if any(r.findings for r in reports) else EXIT_CLEAN


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        config = parse_args(list(sys.argv[1:] if argv is None else argv))
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except SystemExit:
        return EXIT_CLEAN
    return run_scan(config)


if __name__ == "__main__":
    sys.exit(main())
