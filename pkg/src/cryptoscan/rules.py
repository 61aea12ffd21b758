"""The eight misuse rules, evaluated over graph, taint chains, and origins.

Every checker is a pure function; evaluate_rules unions the enabled ones,
deduplicates, and sorts, so reports are deterministic and disabling one
rule removes exactly its findings.
"""

import re
from collections import deque
from dataclasses import dataclass, field

from .catalog import lookup
from .dependency import DependencyGraph
from .ingest import detect_language
from .lexicon import (
    DEFAULT_MIN_ENTROPY,
    DEFAULT_MIN_LENGTH,
    looks_like_secret_literal,
    matches_credential_lexicon,
)
from .taint import TaintChain, credential_signal, resolve_to_origin

RULE_IDS = ("R1", "R2", "R3", "R4", "R5", "R6", "R7", "R8")

DEFAULT_THRESHOLDS = {
    "r4.min_iterations": 10000,
    "r1.min_length": DEFAULT_MIN_LENGTH,
    "r1.min_entropy": DEFAULT_MIN_ENTROPY,
}

_IV_KEYWORDS = ("iv", "salt", "nonce", "initialization_vector")
_ITERATION_KEYWORDS = ("iterations", "count", "rounds")
_SEED_KEYWORDS = ("seed",)
_AUTHENTICATED_MODES = ("gcm", "ccm", "ocb", "eax", "siv", "poly1305")
_DEPRECATED_TOKENS = {"des", "des3", "3des", "tripledes", "rc4", "arc4", "arcfour", "rc2", "arc2", "blowfish", "bf"}
_FINALIZE_SEGMENTS = {"final", "finalize"}
_AUTH_TAG_SEGMENTS = {"getAuthTag", "setAuthTag", "getauthtag", "setauthtag"}


@dataclass
class Finding:
    rule_id: str
    severity: str  # "misuse" | "informational"
    confidence: str  # "definite" | "potential"
    project_id: str
    file: str
    line: int
    message: str
    evidence: TaintChain = None
    resolved_origins: list = field(default_factory=list)

    def dedup_key(self):
        return (self.project_id, self.rule_id, self.file, self.line, self.message)


def _spec_of(unit, catalog):
    return lookup(unit.call_name, detect_language(unit.file), catalog)


def _final_segment(call_name: str) -> str:
    return call_name.rsplit(".", 1)[-1]


def _receiver_prefix(call_name: str) -> str:
    parts = call_name.rsplit(".", 1)
    return parts[0] if len(parts) == 2 else ""


def _located_arguments(unit, spec, role_name: str, extra_keywords=()) -> list:
    """Arguments selected by catalog locators plus conventional keyword names."""
    locators = list(spec.locators(role_name)) if spec is not None else []
    found = []
    seen = set()
    for locator in locators:
        for argument in unit.arguments:
            if argument.position == locator and id(argument) not in seen:
                found.append(argument)
                seen.add(id(argument))
    for argument in unit.arguments:
        if isinstance(argument.position, str) and argument.position.lower() in extra_keywords:
            if id(argument) not in seen:
                found.append(argument)
                seen.add(id(argument))
    return found


def _dig_dict_text(text: str, key: str):
    """Best-effort value lookup inside a canonical dict rendering."""
    match = re.search(r"[{\s,]" + re.escape(key) + r"\s*[:=]\s*([^,}\n]+)", text)
    return match.group(1).strip().strip("\"'") if match else None


def _argument_mode_texts(graph, unit, spec, catalog) -> list:
    """Every text that could name this cipher call's mode or algorithm."""
    texts = []
    for argument in _located_arguments(unit, spec, "mode", ("mode",)):
        if argument.tag in ("variable", "constant", "function_return"):
            texts.append(argument.value)
        if argument.tag == "variable":
            origin = resolve_to_origin(graph, unit, argument, catalog)
            if origin.kind == "literal" and origin.literal_text:
                texts.append(origin.literal_text)
    for argument in _located_arguments(unit, spec, "algorithm"):
        if argument.tag == "constant":
            texts.append(argument.value)
        elif argument.tag == "variable":
            origin = resolve_to_origin(graph, unit, argument, catalog)
            if origin.kind == "literal" and origin.literal_text:
                texts.append(origin.literal_text)
    for argument in unit.arguments:
        if argument.tag == "dict_literal":
            dug = _dig_dict_text(argument.value, "mode")
            if dug:
                texts.append(dug)
    return texts


def _forward_reachable_ids(graph: DependencyGraph, start_ids, must_only: bool) -> set:
    seen = set(start_ids)
    queue = deque(start_ids)
    while queue:
        current = queue.popleft()
        for edge in graph.out_edges(current):
            if must_only and edge.kind != "must":
                continue
            if edge.to_unit not in seen:
                seen.add(edge.to_unit)
                queue.append(edge.to_unit)
    return seen


def chain_groups(graph: DependencyGraph) -> dict:
    """Units of one fluent call chain, grouped by (file, scope, chain root).

    Chain membership is recovered from the call_name convention: chained
    calls extend their root's name with "()." segments.
    """
    groups = {}
    for unit in graph.nodes:
        root = unit.call_name.split("()", 1)[0]
        groups.setdefault((unit.file, unit.scope, root), []).append(unit)
    return groups


def _credential_chains_to(chains, unit_ids: set) -> list:
    return [c for c in chains if c.sensitivity == "credential" and c.sink_unit in unit_ids]


# ---------------------------------------------------------------------------
# R1 - hard-coded keys and secrets


def check_fixed_secret(graph, chains, catalog, thresholds=None, project_id=""):
    thresholds = {**DEFAULT_THRESHOLDS, **(thresholds or {})}
    min_length = thresholds["r1.min_length"]
    min_entropy = thresholds["r1.min_entropy"]
    findings = []
    sink_like = _sink_like_ids(graph, catalog)
    key_param_args = set()

    for unit in graph.nodes:
        spec = _spec_of(unit, catalog)
        if spec is None or spec.role not in ("symmetric_cipher", "kdf", "mac"):
            continue
        for argument in _located_arguments(unit, spec, "key", ("key",)):
            key_param_args.add(id(argument))
            origin = resolve_to_origin(graph, unit, argument, catalog)
            if origin.kind == "literal" and origin.literal_text:
                findings.append(
                    Finding(
                        "R1", "misuse", "definite", project_id, unit.file, unit.line,
                        f"hard-coded key material reaches {unit.call_name}",
                        resolved_origins=[(argument.position, origin)],
                    )
                )

    for unit in graph.nodes:
        for argument in unit.arguments:
            if argument.tag != "constant" or id(argument) in key_param_args:
                continue
            if not looks_like_secret_literal(argument.value, min_length, min_entropy):
                continue
            bound_name = argument.position if isinstance(argument.position, str) else None
            if bound_name and matches_credential_lexicon(bound_name):
                findings.append(
                    Finding(
                        "R1", "misuse", "definite", project_id, unit.file, unit.line,
                        f"hard-coded secret passed as {bound_name} to {unit.call_name}",
                    )
                )
            elif unit.unit_id in sink_like or _reaches_any(graph, unit, sink_like):
                findings.append(
                    Finding(
                        "R1", "misuse", "definite", project_id, unit.file, unit.line,
                        f"hard-coded secret flows from {unit.call_name} to an output sink",
                    )
                )

    consumers = {}
    for unit in graph.nodes:
        for argument in unit.arguments:
            if argument.tag == "variable":
                consumers.setdefault((unit.file, argument.value), []).append(unit)
    for binding in graph.bindings:
        if binding.kind != "literal":
            continue
        if not looks_like_secret_literal(binding.text, min_length, min_entropy):
            continue
        if matches_credential_lexicon(binding.name):
            findings.append(
                Finding(
                    "R1", "misuse", "definite", project_id, binding.file, binding.line,
                    f"hard-coded secret assigned to {binding.name}",
                )
            )
            continue
        for consumer in consumers.get((binding.file, binding.name), ()):
            if consumer.unit_id in sink_like or _reaches_any(graph, consumer, sink_like):
                findings.append(
                    Finding(
                        "R1", "misuse", "definite", project_id, binding.file, binding.line,
                        f"hard-coded secret assigned to {binding.name} flows to an output sink",
                    )
                )
                break
    return findings


def _sink_like_ids(graph, catalog) -> set:
    from .taint import identify_sinks

    return identify_sinks(graph, catalog)


def _reaches_any(graph, unit, targets: set) -> bool:
    reachable = _forward_reachable_ids(graph, [unit.unit_id], must_only=False)
    reachable.discard(unit.unit_id)
    return bool(reachable & targets)


# ---------------------------------------------------------------------------
# R2 - constant IVs and salts


def check_fixed_iv_salt(graph, chains, catalog, thresholds=None, project_id=""):
    findings = []
    for unit in graph.nodes:
        spec = _spec_of(unit, catalog)
        if spec is None or spec.role not in ("symmetric_cipher", "kdf"):
            continue
        seen = set()
        for role_name in ("iv", "salt", "nonce"):
            for argument in _located_arguments(unit, spec, role_name, _IV_KEYWORDS):
                if id(argument) in seen:
                    continue
                seen.add(id(argument))
                origin = resolve_to_origin(graph, unit, argument, catalog)
                if origin.kind == "literal" and origin.literal_text:
                    label = argument.position if isinstance(argument.position, str) else role_name
                    findings.append(
                        Finding(
                            "R2", "misuse", "definite", project_id, unit.file, unit.line,
                            f"constant {label} value for {unit.call_name}",
                            resolved_origins=[(argument.position, origin)],
                        )
                    )
    return findings


# ---------------------------------------------------------------------------
# R3 - weak hash functions, split by context


def _weak_algorithm(graph, unit, spec, catalog):
    if not spec.weak_algorithms:
        return None
    if spec.locators("algorithm"):
        for argument in _located_arguments(unit, spec, "algorithm"):
            text = None
            if argument.tag == "constant":
                text = argument.value
            elif argument.tag == "variable":
                origin = resolve_to_origin(graph, unit, argument, catalog)
                if origin.kind == "literal":
                    text = origin.literal_text
            if text and text.strip().lower().replace("-", "") in {w.replace("-", "") for w in spec.weak_algorithms}:
                return text.strip().lower()
        return None
    return spec.weak_algorithms[0]


def check_weak_hash(graph, chains, catalog, thresholds=None, project_id=""):
    findings = []
    groups = chain_groups(graph)
    for unit in graph.nodes:
        spec = _spec_of(unit, catalog)
        if spec is None or spec.role != "hash":
            continue
        algorithm = _weak_algorithm(graph, unit, spec, catalog)
        if algorithm is None:
            continue
        root = unit.call_name.split("()", 1)[0]
        group = groups[(unit.file, unit.scope, root)]
        group_ids = {g.unit_id for g in group}

        evidence = None
        credential = False
        credential_chains = _credential_chains_to(chains, group_ids)
        if credential_chains:
            credential = True
            evidence = sorted(credential_chains, key=lambda c: (len(c.hops), c.source_unit))[0]
        elif any(credential_signal(graph, member) for member in group):
            credential = True
        else:
            auth_sinks = _auth_transmit_ids(graph, catalog) - group_ids
            if _forward_reachable_ids(graph, group_ids, must_only=True) & auth_sinks:
                credential = True
            elif _forward_reachable_ids(graph, group_ids, must_only=False) & auth_sinks:
                credential = True

        if credential:
            confidence = "potential" if evidence is not None and evidence.has_may_hop() else "definite"
            findings.append(
                Finding(
                    "R3", "misuse", confidence, project_id, unit.file, unit.line,
                    f"weak hash {algorithm} used in a credential context",
                    evidence=evidence,
                )
            )
        else:
            findings.append(
                Finding(
                    "R3", "informational", "definite", project_id, unit.file, unit.line,
                    f"weak hash {algorithm} (checksum-style use)",
                )
            )
    return findings


def _auth_transmit_ids(graph, catalog) -> set:
    from .catalog import semantic_category

    ids = set()
    for unit in graph.nodes:
        category = semantic_category(unit, catalog)
        spec = _spec_of(unit, catalog)
        if category in ("transmit", "upload") or (spec is not None and spec.role in ("mac", "signature")):
            ids.add(unit.unit_id)
    return ids


# ---------------------------------------------------------------------------
# R4 - insecure key derivation


def _parse_int_text(text: str):
    try:
        return int(str(text).strip().replace("_", ""), 10)
    except ValueError:
        try:
            return int(float(str(text).strip()))
        except ValueError:
            return None


def check_kdf_config(graph, chains, catalog, thresholds=None, project_id=""):
    thresholds = {**DEFAULT_THRESHOLDS, **(thresholds or {})}
    minimum = thresholds["r4.min_iterations"]
    findings = []

    for unit in graph.nodes:
        spec = _spec_of(unit, catalog)
        if spec is None or spec.role != "kdf":
            continue
        candidates = list(_located_arguments(unit, spec, "iterations", _ITERATION_KEYWORDS))
        values = []
        for argument in candidates:
            origin = resolve_to_origin(graph, unit, argument, catalog)
            if origin.kind == "literal":
                parsed = _parse_int_text(origin.literal_text)
                if parsed is not None:
                    values.append(parsed)
        for argument in unit.arguments:
            if argument.tag == "dict_literal":
                dug = _dig_dict_text(argument.value, "iterations")
                parsed = _parse_int_text(dug) if dug else None
                if parsed is not None:
                    values.append(parsed)
        for value in values:
            if value < minimum:
                findings.append(
                    Finding(
                        "R4", "misuse", "definite", project_id, unit.file, unit.line,
                        f"key derivation with {value} iterations (below {minimum})",
                    )
                )

    credential_sinks = {c.sink_unit for c in chains if c.sensitivity == "credential"}
    for edge in graph.edges:
        if edge.kind != "may":
            continue
        producer = graph.unit(edge.from_unit)
        consumer = graph.unit(edge.to_unit)
        producer_spec = _spec_of(producer, catalog)
        consumer_spec = _spec_of(consumer, catalog)
        if producer_spec is None or consumer_spec is None:
            continue
        if producer_spec.semantic_category != "derive" or producer_spec.role == "kdf":
            continue
        if consumer_spec.role != "symmetric_cipher":
            continue
        if not (credential_signal(graph, producer) or producer.unit_id in credential_sinks):
            continue
        chain = TaintChain(producer.unit_id, consumer.unit_id, [edge], "credential")
        findings.append(
            Finding(
                "R4", "misuse", "potential", project_id, consumer.file, consumer.line,
                f"ad-hoc key derivation {producer.call_name} can feed {consumer.call_name} without a KDF",
                evidence=chain,
            )
        )
    return findings


# ---------------------------------------------------------------------------
# R5 - static PRNG seeds


def check_static_seed(graph, chains, catalog, thresholds=None, project_id=""):
    findings = []
    for unit in graph.nodes:
        spec = _spec_of(unit, catalog)
        if spec is None or spec.role != "prng" or not spec.locators("seed"):
            continue
        for argument in _located_arguments(unit, spec, "seed", _SEED_KEYWORDS):
            origin = resolve_to_origin(graph, unit, argument, catalog)
            if origin.kind == "literal" and origin.literal_text is not None:
                findings.append(
                    Finding(
                        "R5", "misuse", "definite", project_id, unit.file, unit.line,
                        f"PRNG seeded with constant {origin.literal_text}",
                        resolved_origins=[(argument.position, origin)],
                    )
                )
    return findings


# ---------------------------------------------------------------------------
# R6 - ECB mode


def check_ecb_mode(graph, chains, catalog, thresholds=None, project_id=""):
    findings = []
    for unit in graph.nodes:
        spec = _spec_of(unit, catalog)
        if spec is None or spec.role != "symmetric_cipher":
            continue
        for text in _argument_mode_texts(graph, unit, spec, catalog):
            if "ecb" in text.lower():
                findings.append(
                    Finding(
                        "R6", "misuse", "definite", project_id, unit.file, unit.line,
                        f"ECB cipher mode ({text.strip()}) in {unit.call_name}",
                    )
                )
                break
    return findings


# ---------------------------------------------------------------------------
# R7 - encryption without integrity protection


def _mac_role_ids(graph, catalog) -> set:
    ids = set()
    for unit in graph.nodes:
        spec = _spec_of(unit, catalog)
        if spec is not None and spec.role == "mac":
            ids.add(unit.unit_id)
        elif _final_segment(unit.call_name).lower() in {s.lower() for s in _AUTH_TAG_SEGMENTS}:
            ids.add(unit.unit_id)
    return ids


def _edge_neighbors(graph, unit_ids: set) -> set:
    neighbors = set()
    for unit_id in unit_ids:
        neighbors.update(e.to_unit for e in graph.out_edges(unit_id))
        neighbors.update(e.from_unit for e in graph.in_edges(unit_id))
    return neighbors


def check_missing_integrity(graph, chains, catalog, thresholds=None, project_id=""):
    findings = []
    mac_ids = _mac_role_ids(graph, catalog)
    streams = {}
    for unit in graph.nodes:
        segment = _final_segment(unit.call_name)
        if segment.lower() in _FINALIZE_SEGMENTS or segment == "update" or segment in _AUTH_TAG_SEGMENTS:
            receiver = _receiver_prefix(unit.call_name)
            if receiver:
                streams.setdefault((unit.file, unit.scope, receiver), []).append(unit)

    for (file, scope, receiver), members in sorted(streams.items()):
        finalize_units = [u for u in members if _final_segment(u.call_name).lower() in _FINALIZE_SEGMENTS]
        if not finalize_units:
            continue
        if any(_final_segment(u.call_name) in _AUTH_TAG_SEGMENTS for u in members):
            continue
        member_ids = {u.unit_id for u in members}

        scope_ciphers = []
        for unit in graph.nodes:
            if unit.unit_id in member_ids or unit.file != file or unit.scope != scope:
                continue
            spec = _spec_of(unit, catalog)
            if spec is not None and spec.role == "symmetric_cipher":
                scope_ciphers.append(unit)
        producers = [u for u in scope_ciphers if u.produced_as == receiver]

        cipher_like = "cipher" in receiver.lower() or "encryptor" in receiver.lower() or bool(producers)
        if not cipher_like and not scope_ciphers:
            continue

        mode_texts = []
        for cipher_unit in producers or scope_ciphers:
            mode_texts.extend(_argument_mode_texts(graph, cipher_unit, _spec_of(cipher_unit, catalog), catalog))
        if any(marker in text.lower() for text in mode_texts for marker in _AUTHENTICATED_MODES):
            continue

        scope_unit_ids = {u.unit_id for u in graph.nodes if u.file == file and u.scope == scope}
        connected = member_ids | {u.unit_id for u in scope_ciphers}
        neighborhood = scope_unit_ids | _edge_neighbors(graph, connected)
        if mac_ids & neighborhood:
            continue

        confidence = "potential" if mac_ids else "definite"
        anchor = finalize_units[0]
        findings.append(
            Finding(
                "R7", "misuse", confidence, project_id, anchor.file, anchor.line,
                f"cipher stream {receiver} finalized without authentication tag in scope {scope}",
            )
        )
    return findings


# ---------------------------------------------------------------------------
# R8 - deprecated primitives


def _algorithm_tokens(text: str) -> set:
    return set(re.split(r"[-_/\s.]+", text.strip().lower())) - {""}


def check_deprecated_primitive(graph, chains, catalog, thresholds=None, project_id=""):
    findings = []
    for unit in graph.nodes:
        spec = _spec_of(unit, catalog)
        if spec is None:
            continue
        if spec.deprecated:
            label = spec.weak_algorithms[0] if spec.weak_algorithms else _final_segment(unit.call_name)
            findings.append(
                Finding(
                    "R8", "misuse", "definite", project_id, unit.file, unit.line,
                    f"deprecated primitive {label} via {unit.call_name}",
                )
            )
            continue
        for argument in _located_arguments(unit, spec, "algorithm"):
            text = None
            if argument.tag == "constant":
                text = argument.value
            elif argument.tag == "variable":
                origin = resolve_to_origin(graph, unit, argument, catalog)
                if origin.kind == "literal":
                    text = origin.literal_text
            if text and _algorithm_tokens(text) & _DEPRECATED_TOKENS:
                findings.append(
                    Finding(
                        "R8", "misuse", "definite", project_id, unit.file, unit.line,
                        f"deprecated algorithm {text.strip().lower()} via {unit.call_name}",
                    )
                )
                break
    return findings


# ---------------------------------------------------------------------------


_CHECKERS = {
    "R1": check_fixed_secret,
    "R2": check_fixed_iv_salt,
    "R3": check_weak_hash,
    "R4": check_kdf_config,
    "R5": check_static_seed,
    "R6": check_ecb_mode,
    "R7": check_missing_integrity,
    "R8": check_deprecated_primitive,
}


def evaluate_rules(graph, taint_chains, catalog, enabled_rules=None, thresholds=None, project_id="") -> list:
    """Union of the enabled checkers, deduplicated and sorted by (file, line, rule)."""
    enabled = set(enabled_rules) if enabled_rules is not None else set(RULE_IDS)
    findings = []
    seen = set()
    for rule_id in RULE_IDS:
        if rule_id not in enabled:
            continue
        for finding in _CHECKERS[rule_id](graph, taint_chains, catalog, thresholds, project_id):
            key = finding.dedup_key()
            if key not in seen:
                seen.add(key)
                findings.append(finding)
    findings.sort(key=lambda f: (f.file, f.line, f.rule_id, f.message))
    return findings
