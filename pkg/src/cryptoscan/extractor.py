"""Front-end dispatch: parse a source file and lower it to IR units.

parse_to_ast / extract_ir are the per-file surface; extract_file returns
the full extraction result (units, literal bindings, degraded-mode flag)
used by the pipeline.
"""

from . import frontend_js, frontend_py
from .errors import UnsupportedLanguage
from .ingest import Language, SourceFile
from .irmodel import ExtractionResult


def parse_to_ast(file: SourceFile):
    """Language-specific parse; a partial tree plus error marker on bad syntax."""
    if file.language is Language.PYTHON:
        return frontend_py.build_handle(file.content)
    if file.language in (Language.JAVASCRIPT, Language.TYPESCRIPT):
        return frontend_js.build_handle(file.content, str(file.path))
    raise UnsupportedLanguage(f"no front-end for {file.language.value}: {file.path}")


def extract_file(handle, file: SourceFile, file_label: str) -> ExtractionResult:
    if file.language is Language.PYTHON:
        return frontend_py.extract_python_ir(handle, file_label)
    if file.language in (Language.JAVASCRIPT, Language.TYPESCRIPT):
        return frontend_js.extract_javascript_ir(handle, file_label)
    raise UnsupportedLanguage(f"no front-end for {file.language.value}: {file.path}")


def extract_ir(handle, file: SourceFile, file_label: str = None) -> list:
    """One IrUnit per call expression, in source order."""
    label = file_label if file_label is not None else str(file.path)
    return extract_file(handle, file, label).units
