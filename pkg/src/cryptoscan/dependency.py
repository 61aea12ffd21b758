"""Dependency graph construction: Def-Use must edges plus resource/semantic may edges.

Must edges link a produced variable to every call consuming it by name
(scope- and position-insensitive, interprocedural). May edges link call
pairs whose semantic categories form a risky pair and that share a
resource fingerprint or a variable name; they model compositions wired
up only at runtime, which is exactly what plugin-style tool servers
leave undetermined.
"""

import re
from dataclasses import dataclass, field

from .catalog import CryptoApiCatalog, semantic_category

_URL_RE = re.compile(r"^[a-z][a-z0-9+.\-]*://")
_DOTTED_FILENAME_RE = re.compile(r"^[\w.\- ]+\.[A-Za-z0-9]{1,5}$")


@dataclass(frozen=True)
class DepEdge:
    from_unit: str
    to_unit: str
    kind: str  # "must" | "may"
    witness: str


@dataclass
class ResourceFingerprint:
    kind: str  # "path" | "url" | "topic" | "identifier"
    canonical: str


@dataclass
class DependencyGraph:
    nodes: list
    edges: list
    bindings: list = field(default_factory=list)

    def __post_init__(self):
        self.units_by_id = {u.unit_id: u for u in self.nodes}
        self._out = {}
        self._in = {}
        for edge in self.edges:
            self._out.setdefault(edge.from_unit, []).append(edge)
            self._in.setdefault(edge.to_unit, []).append(edge)

    def unit(self, unit_id: str):
        return self.units_by_id[unit_id]

    def out_edges(self, unit_id: str) -> list:
        return self._out.get(unit_id, [])

    def in_edges(self, unit_id: str) -> list:
        return self._in.get(unit_id, [])


def _edge_sort_key(edge: DepEdge):
    return (edge.from_unit, edge.to_unit, edge.kind, edge.witness)


def _is_number(text: str) -> bool:
    try:
        float(text)
        return True
    except ValueError:
        return False


def build_must_edges(units, must_scope: str = "project") -> list:
    """Def-Use matching: produced_as of one call appearing as a variable argument of another."""
    producers = {}
    for unit in units:
        if unit.produced_as:
            producers.setdefault(unit.produced_as, []).append(unit)
    edges = set()
    for consumer in units:
        for argument in consumer.arguments:
            if argument.tag != "variable":
                continue
            for producer in producers.get(argument.value, ()):
                if producer.unit_id == consumer.unit_id:
                    continue
                if must_scope == "file" and producer.file != consumer.file:
                    continue
                edges.add(DepEdge(producer.unit_id, consumer.unit_id, "must", argument.value))
    return sorted(edges, key=_edge_sort_key)


def extract_fingerprint(unit, catalog: CryptoApiCatalog = None):
    """Resource anchor from the unit's constant arguments; first match wins."""
    id_patterns = [re.compile(p) for p in (catalog.identifier_patterns if catalog else [])]
    for argument in unit.arguments:
        if argument.tag != "constant":
            continue
        raw = argument.value.strip()
        if not raw or _is_number(raw):
            continue
        lowered = raw.lower()
        if _URL_RE.match(lowered):
            return ResourceFingerprint("url", lowered)
        if "/" in raw or "\\" in raw or _DOTTED_FILENAME_RE.match(raw):
            return ResourceFingerprint("path", lowered)
        for pattern in id_patterns:
            if pattern.fullmatch(raw):
                return ResourceFingerprint("identifier", raw)
    return None


def build_may_edges(units, catalog: CryptoApiCatalog) -> list:
    """Risky-pair gated edges between calls sharing a fingerprint or a variable name."""
    risky = set(catalog.risky_pairs)
    categories = [semantic_category(u, catalog) for u in units]
    fingerprints = [extract_fingerprint(u, catalog) for u in units]
    variables = [u.variable_names() for u in units]
    edges = set()
    for i, ci in enumerate(units):
        for j, cj in enumerate(units):
            if i == j:
                continue
            if (categories[i], categories[j]) not in risky:
                continue
            fp_i, fp_j = fingerprints[i], fingerprints[j]
            if fp_i is not None and fp_j is not None and fp_i.kind == fp_j.kind and fp_i.canonical == fp_j.canonical:
                edges.add(DepEdge(ci.unit_id, cj.unit_id, "may", fp_i.canonical))
                continue
            shared = variables[i] & variables[j]
            if shared:
                edges.add(DepEdge(ci.unit_id, cj.unit_id, "may", min(shared)))
    return sorted(edges, key=_edge_sort_key)


def build_graph(units, catalog: CryptoApiCatalog, bindings=None, must_scope: str = "project") -> DependencyGraph:
    """Nodes are the units; edges are deduplicated must plus may edges."""
    edges = set(build_must_edges(units, must_scope)) | set(build_may_edges(units, catalog))
    return DependencyGraph(
        nodes=list(units),
        edges=sorted(edges, key=_edge_sort_key),
        bindings=list(bindings or []),
    )


def graph_to_dict(graph: DependencyGraph) -> dict:
    return {
        "nodes": [u.unit_id for u in graph.nodes],
        "edges": [
            {"from": e.from_unit, "to": e.to_unit, "kind": e.kind, "witness": e.witness}
            for e in graph.edges
        ],
    }
