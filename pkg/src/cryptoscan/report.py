"""Per-project reports and corpus-level aggregate statistics.

Aggregation counts projects, not raw findings: by_rule counts the
distinct misuse rules a project triggered, and rule co-occurrence counts
unordered rule pairs within one project. Projects without a label in a
dimension fall into the "Unknown" bucket.
"""

import json
from dataclasses import dataclass, field

from .errors import DuplicateProjectId

_DIMENSIONS = ("language", "category", "market")


@dataclass
class ProjectReport:
    project_id: str
    metadata: dict = field(default_factory=dict)
    file_count: int = 0
    ir_unit_count: int = 0
    crypto_enabled: bool = False
    misuse: bool = False
    findings: list = field(default_factory=list)
    partial_files: list = field(default_factory=list)
    duration_ms: float = 0.0
    ir_ms: float = 0.0
    graph_ms: float = 0.0
    detect_ms: float = 0.0
    language: str = "Unknown"
    language_tie: bool = False


@dataclass
class CorpusStats:
    total_projects: int = 0
    crypto_enabled_count: int = 0
    misuse_count: int = 0
    misuse_rate: float = 0.0
    by_rule: dict = field(default_factory=dict)
    rule_cooccurrence: dict = field(default_factory=dict)
    by_language: dict = field(default_factory=dict)
    by_category: dict = field(default_factory=dict)
    by_market: dict = field(default_factory=dict)


def _chain_to_json(chain):
    if chain is None:
        return None
    return [
        {"from": e.from_unit, "to": e.to_unit, "kind": e.kind, "witness": e.witness}
        for e in chain.hops
    ]


def report_to_dict(report: ProjectReport) -> dict:
    return {
        "project_id": report.project_id,
        "metadata": dict(sorted(report.metadata.items())),
        "crypto_enabled": report.crypto_enabled,
        "misuse": report.misuse,
        "findings": [
            {
                "rule": f.rule_id,
                "severity": f.severity,
                "confidence": f.confidence,
                "file": f.file,
                "line": f.line,
                "message": f.message,
                "chain": _chain_to_json(f.evidence),
            }
            for f in report.findings
        ],
        "partial_files": list(report.partial_files),
        "duration_ms": report.duration_ms,
        "file_count": report.file_count,
        "ir_unit_count": report.ir_unit_count,
        "language": report.language,
        "language_tie": report.language_tie,
        "ir_ms": report.ir_ms,
        "graph_ms": report.graph_ms,
        "detect_ms": report.detect_ms,
    }


def emit_project_report(report: ProjectReport, format: str = "text") -> str:
    """json: the documented schema; text: one line per finding."""
    if format == "json":
        return json.dumps(report_to_dict(report), indent=2, ensure_ascii=True)
    lines = [
        f"project {report.project_id}: files={report.file_count} units={report.ir_unit_count} "
        f"crypto={'yes' if report.crypto_enabled else 'no'} misuse={'yes' if report.misuse else 'no'}"
    ]
    for finding in report.findings:
        lines.append(f"{finding.rule_id} {finding.severity} {finding.file}:{finding.line} {finding.message}")
    for partial in report.partial_files:
        lines.append(f"warning: partial parse for {partial}")
    return "\n".join(lines)


def _project_label(report: ProjectReport, dimension: str) -> str:
    if dimension == "language":
        return report.metadata.get("language") or report.language or "Unknown"
    return report.metadata.get(dimension) or "Unknown"


def _misuse_rules(report: ProjectReport) -> list:
    return sorted({f.rule_id for f in report.findings if f.severity == "misuse"})


def aggregate_corpus(reports) -> CorpusStats:
    """Fold reports into corpus statistics; permutation-invariant."""
    stats = CorpusStats()
    seen = set()
    for report in sorted(reports, key=lambda r: r.project_id):
        if report.project_id in seen:
            raise DuplicateProjectId(f"duplicate project_id {report.project_id!r}")
        seen.add(report.project_id)
        stats.total_projects += 1
        if report.crypto_enabled:
            stats.crypto_enabled_count += 1
        if report.misuse:
            stats.misuse_count += 1
        rules = _misuse_rules(report)
        for rule in rules:
            stats.by_rule[rule] = stats.by_rule.get(rule, 0) + 1
        for i, first in enumerate(rules):
            for second in rules[i + 1 :]:
                key = f"{first}+{second}"
                stats.rule_cooccurrence[key] = stats.rule_cooccurrence.get(key, 0) + 1
        for dimension, bucket in (
            ("language", stats.by_language),
            ("category", stats.by_category),
            ("market", stats.by_market),
        ):
            label = _project_label(report, dimension)
            cell = bucket.setdefault(label, {"crypto_yes": 0, "crypto_no": 0, "misuse_yes": 0, "misuse_no": 0})
            cell["crypto_yes" if report.crypto_enabled else "crypto_no"] += 1
            cell["misuse_yes" if report.misuse else "misuse_no"] += 1
    if stats.crypto_enabled_count > 0:
        stats.misuse_rate = stats.misuse_count / stats.crypto_enabled_count
    stats.by_rule = dict(sorted(stats.by_rule.items()))
    stats.rule_cooccurrence = dict(sorted(stats.rule_cooccurrence.items()))
    stats.by_language = dict(sorted(stats.by_language.items()))
    stats.by_category = dict(sorted(stats.by_category.items()))
    stats.by_market = dict(sorted(stats.by_market.items()))
    return stats


def stats_to_dict(stats: CorpusStats) -> dict:
    return {
        "total_projects": stats.total_projects,
        "crypto_enabled_count": stats.crypto_enabled_count,
        "misuse_count": stats.misuse_count,
        "misuse_rate": stats.misuse_rate,
        "by_rule": stats.by_rule,
        "rule_cooccurrence": stats.rule_cooccurrence,
        "by_language": stats.by_language,
        "by_category": stats.by_category,
        "by_market": stats.by_market,
    }


def _format_table(title: str, rows: list, headers: tuple) -> list:
    widths = [len(h) for h in headers]
    rendered = [[str(cell) for cell in row] for row in rows]
    for row in rendered:
        for i, cell in enumerate(row):
            widths[i] = max(widths[i], len(cell))
    lines = [title, "-" * len(title)]
    lines.append("  ".join(h.ljust(widths[i]) for i, h in enumerate(headers)))
    for row in rendered:
        lines.append("  ".join(row[i].ljust(widths[i]) for i in range(len(headers))))
    return lines


def render_summary(stats: CorpusStats) -> str:
    """Fixed-width tables, one per dimension, misuse-count descending."""
    rate = f"{stats.misuse_rate:.3f}"
    lines = [
        f"projects={stats.total_projects} crypto_enabled={stats.crypto_enabled_count} "
        f"misuse={stats.misuse_count} misuse_rate={rate}",
        "",
    ]
    rule_rows = [(rule, count) for rule, count in sorted(stats.by_rule.items(), key=lambda kv: (-kv[1], kv[0]))]
    lines.extend(_format_table("misusing projects by rule", rule_rows, ("rule", "projects")))
    lines.append("")
    pair_rows = [(pair, count) for pair, count in sorted(stats.rule_cooccurrence.items(), key=lambda kv: (-kv[1], kv[0]))]
    lines.extend(_format_table("rule co-occurrence (projects)", pair_rows, ("rules", "projects")))
    for dimension, bucket in (
        ("language", stats.by_language),
        ("category", stats.by_category),
        ("market", stats.by_market),
    ):
        rows = [
            (label, cell["crypto_yes"], cell["crypto_no"], cell["misuse_yes"], cell["misuse_no"])
            for label, cell in sorted(bucket.items(), key=lambda kv: (-kv[1]["misuse_yes"], kv[0]))
        ]
        lines.append("")
        lines.extend(
            _format_table(
                f"projects by {dimension}",
                rows,
                (dimension, "crypto_yes", "crypto_no", "misuse_yes", "misuse_no"),
            )
        )
    return "\n".join(lines)
