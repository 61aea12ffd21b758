"""Credential vocabulary and secret-literal heuristics.

Shared by the taint marker and the rule checkers so that "credential
context" means the same thing everywhere.
"""

import math

# Case-insensitive substrings that mark a variable, parameter or callee
# name as credential-bearing.
CREDENTIAL_LEXICON = (
    "password",
    "passwd",
    "pwd",
    "secret",
    "token",
    "api_key",
    "apikey",
    "private_key",
    "credential",
)

# Known provider key prefixes; a constant starting with one of these is a
# secret regardless of its entropy (vendor keys are often partially masked
# in the wild, which drags measured entropy down).
PROVIDER_PREFIXES = (
    "AIzaSy",
    "AKIA",
    "ASIA",
    "ghp_",
    "gho_",
    "github_pat_",
    "xoxb-",
    "xoxp-",
    "sk-ant-",
    "sk-proj-",
    "sk_live_",
    "pk_live_",
    "glpat-",
)

# Constants that look like documentation placeholders are never secrets.
_PLACEHOLDER_HINTS = ("example", "placeholder", "your-", "your_", "<", ">", "{", "}", "xxxx")

DEFAULT_MIN_LENGTH = 20
DEFAULT_MIN_ENTROPY = 3.5
_MIN_PREFIX_LENGTH = 12


def matches_credential_lexicon(text: str) -> bool:
    """True if any credential lexicon word occurs in ``text`` (case-insensitive)."""
    if not text:
        return False
    low = text.lower()
    return any(word in low for word in CREDENTIAL_LEXICON)


def shannon_entropy(text: str) -> float:
    """Shannon entropy of ``text`` in bits per character; 0.0 for empty input."""
    if not text:
        return 0.0
    counts: dict[str, int] = {}
    for ch in text:
        counts[ch] = counts.get(ch, 0) + 1
    n = len(text)
    return -sum((c / n) * math.log2(c / n) for c in counts.values())


def looks_like_secret_literal(
    text: str,
    min_length: int = DEFAULT_MIN_LENGTH,
    min_entropy: float = DEFAULT_MIN_ENTROPY,
) -> bool:
    """Secret-literal heuristic for hard-coded key detection.

    A string qualifies when it carries a known provider prefix, or when it
    is long and high-entropy. Whitespace and template placeholders
    disqualify a candidate outright.
    """
    if not text:
        return False
    if any(ch.isspace() for ch in text):
        return False
    low = text.lower()
    if any(hint in low for hint in _PLACEHOLDER_HINTS):
        return False
    if len(text) >= _MIN_PREFIX_LENGTH and any(text.startswith(p) for p in PROVIDER_PREFIXES):
        return True
    return len(text) >= min_length and shannon_entropy(text) >= min_entropy
