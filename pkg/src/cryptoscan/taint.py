"""Taint marking, forward propagation, and argument origin resolution.

Sources are external-input calls, secret-bearing constants, and
credential intake points; sinks are crypto operations and data egress.
Propagation runs forward over both must and may edges; origin resolution
walks Def-Use chains backwards until it bottoms out in a literal, an
external read, dynamic randomness, or gives up (unresolved).
"""

from collections import deque
from dataclasses import dataclass, field

from .catalog import CryptoApiCatalog, lookup, matches_any_marker
from .dependency import DependencyGraph
from .ingest import detect_language
from .lexicon import looks_like_secret_literal, matches_credential_lexicon

SINK_ROLES = {"hash", "symmetric_cipher", "kdf", "mac"}

_RESOLUTION_DEPTH_LIMIT = 16


@dataclass
class OriginValue:
    kind: str  # literal | external_input | dynamic_random | environment | unresolved
    literal_text: str = None
    resolution_path: list = field(default_factory=list)


@dataclass
class TaintChain:
    source_unit: str
    sink_unit: str
    hops: list  # DepEdge path, source to sink
    sensitivity: str = "generic"  # "credential" | "generic"

    def has_may_hop(self) -> bool:
        return any(edge.kind == "may" for edge in self.hops)


def find_binding(graph: DependencyGraph, unit, name: str):
    """Literal-binding for ``name`` visible from ``unit``, same file only."""
    candidates = [b for b in graph.bindings if b.name == name and b.file == unit.file]
    if not candidates:
        return None
    same_scope = [b for b in candidates if b.scope == unit.scope and b.line <= unit.line]
    if same_scope:
        return same_scope[-1]
    module_level = [b for b in candidates if b.scope == "<module>"]
    if module_level:
        return module_level[-1]
    return candidates[-1]


def credential_signal(graph: DependencyGraph, unit) -> bool:
    """Does this call touch credential-named data?

    Checks the callee path, argument names/texts, produced variable, and
    one level of literal-binding expansion for variable arguments (so a
    template assembled from `this.apiKey` taints the variable it binds).
    """
    if matches_credential_lexicon(unit.call_name):
        return True
    if unit.produced_as and matches_credential_lexicon(unit.produced_as):
        return True
    for argument in unit.arguments:
        if isinstance(argument.position, str) and matches_credential_lexicon(argument.position):
            return True
        if argument.tag in ("variable", "function_return") and matches_credential_lexicon(argument.value):
            return True
        if argument.tag == "variable":
            binding = find_binding(graph, unit, argument.value)
            if binding is not None and binding.kind in ("template", "expression") and matches_credential_lexicon(binding.text):
                return True
    return False


def identify_sources(graph: DependencyGraph, catalog: CryptoApiCatalog) -> set:
    """External-input reads, secret-bearing constants, and credential intake."""
    sources = set()
    for unit in graph.nodes:
        if matches_any_marker(unit.call_name, catalog.source_markers):
            sources.add(unit.unit_id)
            continue
        if any(a.tag == "constant" and looks_like_secret_literal(a.value) for a in unit.arguments):
            sources.add(unit.unit_id)
            continue
        if credential_signal(graph, unit):
            sources.add(unit.unit_id)
    return sources


def identify_sinks(graph: DependencyGraph, catalog: CryptoApiCatalog) -> set:
    """Crypto operations plus output/persistence/transmission calls."""
    sinks = set()
    for unit in graph.nodes:
        if matches_any_marker(unit.call_name, catalog.sink_markers):
            sinks.add(unit.unit_id)
            continue
        spec = lookup(unit.call_name, detect_language(unit.file), catalog)
        if spec is not None and spec.role in SINK_ROLES:
            sinks.add(unit.unit_id)
    return sinks


def _pick_edge(graph: DependencyGraph, from_unit: str, to_unit: str):
    # Parallel must/may edges: prefer the must edge, which carries the
    # definite-flow claim.
    parallel = [e for e in graph.out_edges(from_unit) if e.to_unit == to_unit]
    return sorted(parallel, key=lambda e: (e.kind != "must", e.witness))[0]


def _distances_from(graph: DependencyGraph, start: str, forward: bool) -> dict:
    edges_of = graph.out_edges if forward else graph.in_edges
    distances = {start: 0}
    queue = deque([start])
    while queue:
        current = queue.popleft()
        for edge in edges_of(current):
            other = edge.to_unit if forward else edge.from_unit
            if other not in distances:
                distances[other] = distances[current] + 1
                queue.append(other)
    return distances


def _shortest_witness_path(graph: DependencyGraph, source: str, sink: str, back_cache: dict):
    """Lexicographically smallest among the shortest source-to-sink paths."""
    if source == sink:
        return []
    back = back_cache.get(sink)
    if back is None:
        back = back_cache[sink] = _distances_from(graph, sink, forward=False)
    if source not in back:
        return None
    hops = []
    current = source
    while current != sink:
        step = back[current] - 1
        candidates = sorted(
            {e.to_unit for e in graph.out_edges(current) if back.get(e.to_unit) == step}
        )
        nxt = candidates[0]
        hops.append(_pick_edge(graph, current, nxt))
        current = nxt
    return hops


def propagate(graph: DependencyGraph, sources: set, sinks: set) -> list:
    """Forward closure: one chain per (source, sink) pair with a path.

    The witness path is the shortest one, ties broken by lexicographic
    unit_id sequence; a unit that is both source and sink yields a
    zero-hop chain.
    """
    chains = []
    back_cache = {}
    source_signal = {}
    for source_id in sorted(sources):
        reachable = _distances_from(graph, source_id, forward=True)
        for sink_id in sorted(sinks):
            if sink_id not in reachable:
                continue
            hops = _shortest_witness_path(graph, source_id, sink_id, back_cache)
            if hops is None:
                continue
            if source_id not in source_signal:
                source_signal[source_id] = credential_signal(graph, graph.unit(source_id))
            if source_signal[source_id] or any(matches_credential_lexicon(e.witness) for e in hops):
                sensitivity = "credential"
            else:
                sensitivity = "generic"
            chains.append(
                TaintChain(
                    source_unit=source_id,
                    sink_unit=sink_id,
                    hops=hops,
                    sensitivity=sensitivity,
                )
            )
    return chains


def _classify_producer(graph, producer, catalog, depth, visited, path):
    spec = lookup(producer.call_name, detect_language(producer.file), catalog)
    if spec is not None and spec.role == "prng":
        return OriginValue("dynamic_random", resolution_path=list(path))
    if matches_any_marker(producer.call_name, catalog.environment_markers):
        return OriginValue("environment", resolution_path=list(path))
    if matches_any_marker(producer.call_name, catalog.source_markers):
        return OriginValue("external_input", resolution_path=list(path))
    if spec is not None and spec.role != "none":
        # Output of another crypto primitive: a derived value, not a literal.
        return OriginValue("unresolved", resolution_path=list(path))
    arguments = producer.arguments
    if len(arguments) == 1:
        return _resolve(graph, producer, arguments[0], catalog, depth, visited, path)
    constants = [a for a in arguments if a.tag == "constant"]
    variables = [a for a in arguments if a.tag == "variable"]
    if len(constants) == 1 and not variables:
        return OriginValue("literal", literal_text=constants[0].value, resolution_path=list(path))
    return OriginValue("unresolved", resolution_path=list(path))


def _resolve(graph, unit, argument, catalog, depth, visited, path):
    if depth > _RESOLUTION_DEPTH_LIMIT:
        return OriginValue("unresolved", resolution_path=list(path))
    if argument.tag == "constant":
        return OriginValue("literal", literal_text=argument.value, resolution_path=list(path))
    if argument.tag == "function_return":
        spec = lookup(argument.value, detect_language(unit.file), catalog)
        if spec is not None and spec.role == "prng":
            return OriginValue("dynamic_random", resolution_path=list(path))
        if matches_any_marker(argument.value, catalog.environment_markers):
            return OriginValue("environment", resolution_path=list(path))
        if matches_any_marker(argument.value, catalog.source_markers):
            return OriginValue("external_input", resolution_path=list(path))
        return OriginValue("unresolved", resolution_path=list(path))
    if argument.tag == "variable":
        producers = sorted(
            {e.from_unit for e in graph.in_edges(unit.unit_id) if e.kind == "must" and e.witness == argument.value}
        )
        fallback = None
        for producer_id in producers:
            if producer_id in visited:
                continue
            visited.add(producer_id)
            path.append(producer_id)
            resolved = _classify_producer(graph, graph.unit(producer_id), catalog, depth + 1, visited, path)
            path.pop()
            if resolved.kind != "unresolved":
                return resolved
            fallback = resolved
        binding = find_binding(graph, unit, argument.value)
        if binding is not None and binding.kind == "literal":
            return OriginValue("literal", literal_text=binding.text, resolution_path=list(path))
        return fallback or OriginValue("unresolved", resolution_path=list(path))
    return OriginValue("unresolved", resolution_path=list(path))


def resolve_to_origin(graph: DependencyGraph, unit, argument, catalog: CryptoApiCatalog) -> OriginValue:
    """Recursive backward trace of an argument to its concrete provenance.

    Depth-limited and cycle-safe; unresolved is the fallback, never an
    exception.
    """
    return _resolve(graph, unit, argument, catalog, depth=0, visited={unit.unit_id}, path=[])
