"""Declarative knowledge base mapping API surfaces to crypto roles.

The catalog supplies the semantic category used by may-analysis, the
source/sink vocabulary used by taint, and per-API parameter locators used
by the rule checkers. It is data, not code: the default ships as JSON and
user catalogs extend or shadow it without a code change.
"""

import json
from dataclasses import dataclass, field
from importlib import resources

from .errors import AmbiguousPattern, MalformedCatalog
from .ingest import Language

ROLES = {"hash", "symmetric_cipher", "kdf", "prng", "key_material", "mac", "signature", "none"}
CATEGORIES = {"protect", "upload", "mask", "persist", "transmit", "input", "random", "derive", "other"}

# Argument-locator names understood by the rule checkers.
PARAM_ROLE_NAMES = {"key", "iv", "salt", "nonce", "seed", "iterations", "mode", "algorithm"}


@dataclass
class CryptoApiSpec:
    pattern: str
    language: str = "any"  # "any" or a Language value
    role: str = "none"
    semantic_category: str = "other"
    algorithm_param: object = None  # int position or keyword name
    weak_algorithms: list = field(default_factory=list)
    deprecated: bool = False
    # Optional locators: role name -> position | keyword | list of either.
    param_roles: dict = field(default_factory=dict)

    def locators(self, role_name: str) -> list:
        """All declared locators for one parameter role, in priority order."""
        if role_name == "algorithm" and self.algorithm_param is not None:
            return [self.algorithm_param]
        value = self.param_roles.get(role_name)
        if value is None:
            return []
        return list(value) if isinstance(value, list) else [value]


@dataclass
class CryptoApiCatalog:
    specs: list
    source_markers: list
    sink_markers: list
    risky_pairs: list  # list of (category, category) tuples
    environment_markers: list = field(default_factory=list)
    identifier_patterns: list = field(default_factory=list)

    def __post_init__(self):
        self._exact = {}
        self._suffix = []
        self._lookup_cache = {}
        for spec in self.specs:
            if spec.pattern.startswith("*."):
                self._suffix.append(spec)
            else:
                self._exact.setdefault(spec.pattern, []).append(spec)
        # Longest suffix first so the most specific pattern wins.
        self._suffix.sort(key=lambda s: (-len(s.pattern), s.pattern, s.language))


def _language_accepts(spec: CryptoApiSpec, language: Language) -> bool:
    return spec.language == "any" or spec.language == language.value


def lookup(call_name: str, language: Language, catalog: CryptoApiCatalog):
    """Most specific spec matching ``call_name``, or None.

    Exact pattern match is preferred; otherwise "*.suffix" patterns match
    a trailing dotted path (the final call segments). Language-specific
    entries beat language-any entries of the same pattern. The catalog is
    immutable after load, so results are memoized.
    """
    key = (call_name, language)
    try:
        return catalog._lookup_cache[key]
    except KeyError:
        pass
    found = None
    exact = [s for s in catalog._exact.get(call_name, ()) if _language_accepts(s, language)]
    if exact:
        found = sorted(exact, key=lambda s: s.language == "any")[0]
    else:
        for spec in catalog._suffix:
            if not _language_accepts(spec, language):
                continue
            suffix = spec.pattern[2:]
            if call_name == suffix or call_name.endswith("." + suffix):
                found = spec
                break
    catalog._lookup_cache[key] = found
    return found


def matches_any_marker(call_name: str, markers) -> bool:
    """Pattern-list membership test with the same grammar as lookup."""
    for pattern in markers:
        if pattern.startswith("*."):
            suffix = pattern[2:]
            if call_name == suffix or call_name.endswith("." + suffix):
                return True
        elif call_name == pattern:
            return True
    return False


def semantic_category(unit, catalog: CryptoApiCatalog) -> str:
    """High-level category of a call unit; unmatched units map to "other"."""
    from .ingest import detect_language

    spec = lookup(unit.call_name, detect_language(unit.file), catalog)
    return spec.semantic_category if spec else "other"


def _parse_spec(entry: dict, index: int, origin: str) -> CryptoApiSpec:
    if not isinstance(entry, dict):
        raise MalformedCatalog(f"{origin}: spec {index} is not an object")
    pattern = entry.get("pattern")
    if not isinstance(pattern, str) or not pattern:
        raise MalformedCatalog(f"{origin}: spec {index} has no pattern")
    language = entry.get("language", "any")
    if language not in {"any"} | {lang.value for lang in Language}:
        raise MalformedCatalog(f"{origin}: spec {index} has unknown language {language!r}")
    role = entry.get("role", "none")
    if role not in ROLES:
        raise MalformedCatalog(f"{origin}: spec {index} has unknown role {role!r}")
    category = entry.get("semantic_category", "other")
    if category not in CATEGORIES:
        raise MalformedCatalog(f"{origin}: spec {index} has unknown semantic_category {category!r}")
    algorithm_param = entry.get("algorithm_param")
    if algorithm_param is not None and not isinstance(algorithm_param, (int, str)):
        raise MalformedCatalog(f"{origin}: spec {index} algorithm_param must be a position or keyword")
    weak = entry.get("weak_algorithms", [])
    if not isinstance(weak, list) or not all(isinstance(w, str) for w in weak):
        raise MalformedCatalog(f"{origin}: spec {index} weak_algorithms must be a list of strings")
    param_roles = entry.get("param_roles", {})
    if not isinstance(param_roles, dict) or not set(param_roles) <= PARAM_ROLE_NAMES:
        raise MalformedCatalog(f"{origin}: spec {index} has unknown param_roles keys")
    return CryptoApiSpec(
        pattern=pattern,
        language=language,
        role=role,
        semantic_category=category,
        algorithm_param=algorithm_param,
        weak_algorithms=[w.strip().lower() for w in weak],
        deprecated=bool(entry.get("deprecated", False)),
        param_roles=param_roles,
    )


def _parse_document(document: dict, origin: str):
    if not isinstance(document, dict):
        raise MalformedCatalog(f"{origin}: catalog must be a JSON object")
    specs = [_parse_spec(e, i, origin) for i, e in enumerate(document.get("specs", []))]
    pairs = []
    for i, pair in enumerate(document.get("risky_pairs", [])):
        if not isinstance(pair, (list, tuple)) or len(pair) != 2 or not set(pair) <= CATEGORIES:
            raise MalformedCatalog(f"{origin}: risky_pairs[{i}] must name two semantic categories")
        pairs.append((pair[0], pair[1]))
    for key in ("source_markers", "sink_markers", "environment_markers", "identifier_patterns"):
        values = document.get(key, [])
        if not isinstance(values, list) or not all(isinstance(v, str) for v in values):
            raise MalformedCatalog(f"{origin}: {key} must be a list of strings")
    return specs, pairs, document


def _check_ambiguity(specs, origin: str):
    seen = set()
    for spec in specs:
        key = (spec.pattern, spec.language)
        if key in seen:
            raise AmbiguousPattern(f"{origin}: duplicate pattern {spec.pattern!r} for language {spec.language!r}")
        seen.add(key)


def load_catalog(path=None) -> CryptoApiCatalog:
    """Built-in default catalog, optionally extended/shadowed by a user file."""
    default_text = resources.files("cryptoscan.data").joinpath("default_catalog.json").read_text("utf-8")
    specs, pairs, document = _parse_document(json.loads(default_text), "default catalog")
    _check_ambiguity(specs, "default catalog")
    sources = list(document.get("source_markers", []))
    sinks = list(document.get("sink_markers", []))
    env_markers = list(document.get("environment_markers", []))
    id_patterns = list(document.get("identifier_patterns", []))

    if path is not None:
        try:
            user_doc = json.loads(open(path, encoding="utf-8").read())
        except (OSError, ValueError) as exc:
            raise MalformedCatalog(f"{path}: {exc}") from exc
        user_specs, user_pairs, user_document = _parse_document(user_doc, str(path))
        _check_ambiguity(user_specs, str(path))
        shadowed = {(s.pattern, s.language) for s in user_specs}
        specs = [s for s in specs if (s.pattern, s.language) not in shadowed] + user_specs
        for pair in user_pairs:
            if pair not in pairs:
                pairs.append(pair)
        for key, bucket in (
            ("source_markers", sources),
            ("sink_markers", sinks),
            ("environment_markers", env_markers),
            ("identifier_patterns", id_patterns),
        ):
            for value in user_document.get(key, []):
                if value not in bucket:
                    bucket.append(value)

    _check_ambiguity(specs, "merged catalog")
    return CryptoApiCatalog(
        specs=specs,
        source_markers=sources,
        sink_markers=sinks,
        risky_pairs=pairs,
        environment_markers=env_markers,
        identifier_patterns=id_patterns,
    )
