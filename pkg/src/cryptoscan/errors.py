"""Exception types shared across the scanner."""


class CryptoscanError(Exception):
    """Base class for all scanner errors."""


class NonexistentRoot(CryptoscanError):
    """Scan target does not exist or is not a directory."""


class MalformedMetadata(CryptoscanError):
    """Corpus metadata file could not be parsed or joined.

    The message always names the offending record (index or project_id).
    """


class MalformedCatalog(CryptoscanError):
    """Catalog file violates the catalog schema; message carries the entry index."""


class AmbiguousPattern(CryptoscanError):
    """Two catalog entries with identical patterns survived merging."""


class UnsupportedLanguage(CryptoscanError):
    """A front-end was requested for a language without one."""


class FatalParseError(CryptoscanError):
    """No parse tree at all could be produced for a source file."""


class DuplicateProjectId(CryptoscanError):
    """Two project reports with the same project_id were aggregated."""


class UsageError(CryptoscanError):
    """Bad command line; message includes help text."""
