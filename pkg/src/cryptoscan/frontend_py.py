"""Python front-end: stdlib ast parsing plus call-site lowering.

The handle enriches the raw tree with parent back-references and a
symbol-table view (import aliases and literal bindings). Files with
syntax errors degrade: offending lines are blanked and parsing retried,
so intact statements still contribute units.
"""

import ast
import logging
from dataclasses import dataclass, field

from .irmodel import Argument, ExtractionResult, IrUnit, LiteralBinding, MODULE_SCOPE

logger = logging.getLogger(__name__)

_MAX_REPAIR_ATTEMPTS = 50
_MAX_EXPR_TEXT = 500


@dataclass
class PySymbolTable:
    aliases: dict = field(default_factory=dict)  # local name -> canonical dotted path
    bindings: list = field(default_factory=list)  # LiteralBinding, in source order

    def resolve_binding(self, name: str, scope: str, line: int):
        """Most recent binding of ``name`` visible from (scope, line).

        Same-scope bindings preceding the use win; otherwise the nearest
        preceding binding in any enclosing scope chain, otherwise any.
        """
        candidates = [b for b in self.bindings if b.name == name]
        if not candidates:
            return None
        same = [b for b in candidates if b.scope == scope and b.line <= line]
        if same:
            return same[-1]
        outer = [b for b in candidates if scope.startswith(b.scope) or b.scope == MODULE_SCOPE]
        if outer:
            return outer[-1]
        return candidates[-1]


@dataclass
class PyAstHandle:
    tree: ast.Module
    source: str
    parents: dict  # id(node) -> parent node
    symbols: PySymbolTable
    partial: bool

    def parent_of(self, node):
        return self.parents.get(id(node))


def parse_python(source: str):
    """Parse with blank-line repair; always yields some tree.

    Returns (tree, partial). ``partial`` is True when any line had to be
    blanked to make the file parse.
    """
    lines = source.splitlines()
    blanked = set()
    for _ in range(_MAX_REPAIR_ATTEMPTS):
        text = "\n".join("" if i in blanked else line for i, line in enumerate(lines))
        try:
            return ast.parse(text), bool(blanked)
        except SyntaxError as exc:
            index = (exc.lineno or 1) - 1
            index = max(0, min(index, len(lines) - 1)) if lines else 0
            while index >= 0 and index in blanked:
                index -= 1
            if index < 0 or not lines:
                break
            blanked.add(index)
    return ast.Module(body=[], type_ignores=[]), True


def build_handle(source: str) -> PyAstHandle:
    tree, partial = parse_python(source)
    parents = {}
    for node in ast.walk(tree):
        for child in ast.iter_child_nodes(node):
            parents[id(child)] = node
    symbols = PySymbolTable()
    _collect_imports(tree, symbols)
    handle = PyAstHandle(tree=tree, source=source, parents=parents, symbols=symbols, partial=partial)
    symbols.bindings = _collect_literal_bindings(handle)
    return handle


def _collect_imports(tree: ast.Module, symbols: PySymbolTable):
    # Only explicit `as` renames are unwrapped; unaliased imports keep the
    # written form so call names match what catalogs key on.
    for node in ast.walk(tree):
        if isinstance(node, ast.Import):
            for alias in node.names:
                if alias.asname and alias.asname != alias.name:
                    symbols.aliases[alias.asname] = alias.name
        elif isinstance(node, ast.ImportFrom) and node.module and node.level == 0:
            for alias in node.names:
                if alias.asname and alias.asname != alias.name:
                    symbols.aliases[alias.asname] = f"{node.module}.{alias.name}"


def _expr_text(node) -> str:
    try:
        text = ast.unparse(node)
    except Exception:  # pragma: no cover - unparse covers all stdlib nodes
        text = f"<{type(node).__name__}>"
    text = " ".join(text.split())
    return text[:_MAX_EXPR_TEXT]


def _render_constant(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, bytes):
        return value.decode("latin-1")
    if value is None:
        return "None"
    if value is True:
        return "True"
    if value is False:
        return "False"
    return repr(value)


def callee_name(node, symbols: PySymbolTable) -> str:
    """Canonical textual callee path: dotted chain with () for chained calls."""
    if isinstance(node, ast.Name):
        return symbols.aliases.get(node.id, node.id)
    if isinstance(node, ast.Attribute):
        return f"{callee_name(node.value, symbols)}.{node.attr}"
    if isinstance(node, ast.Call):
        return f"{callee_name(node.func, symbols)}()"
    if isinstance(node, ast.Subscript):
        return f"{callee_name(node.value, symbols)}[]"
    if isinstance(node, ast.Await):
        return callee_name(node.value, symbols)
    return "<expr>"


def classify_argument(node, symbols: PySymbolTable, position) -> Argument:
    """Tag one argument expression with the five-category taxonomy."""
    if isinstance(node, ast.Constant):
        return Argument(position, "constant", _render_constant(node.value))
    if isinstance(node, ast.JoinedStr):
        if all(isinstance(v, ast.Constant) for v in node.values):
            return Argument(position, "constant", "".join(str(v.value) for v in node.values))
        return Argument(position, "variable", _expr_text(node))
    if isinstance(node, (ast.List, ast.Tuple, ast.Set)):
        tags = [classify_argument(e, symbols, i).tag for i, e in enumerate(node.elts)]
        return Argument(position, "list_literal", _expr_text(node), element_tags=tags)
    if isinstance(node, ast.Dict):
        tags = [classify_argument(v, symbols, i).tag for i, v in enumerate(node.values)]
        return Argument(position, "dict_literal", _expr_text(node), element_tags=tags)
    if isinstance(node, ast.Call):
        return Argument(position, "function_return", callee_name(node.func, symbols))
    if isinstance(node, ast.Name):
        return Argument(position, "variable", node.id)
    if isinstance(node, ast.Attribute):
        return Argument(position, "variable", callee_name(node, symbols))
    if isinstance(node, ast.Await):
        return classify_argument(node.value, symbols, position)
    return Argument(position, "variable", _expr_text(node))


def _ascend_transparent(handle: PyAstHandle, node):
    parent = handle.parent_of(node)
    while isinstance(parent, ast.Await):
        node = parent
        parent = handle.parent_of(parent)
    return node, parent


def _call_context(handle: PyAstHandle, call: ast.Call):
    """(parent_context, produced_as) for one call node."""
    node, parent = _ascend_transparent(handle, call)
    if isinstance(parent, ast.Expr):
        return "expression_statement", None
    if isinstance(parent, ast.Assign) and parent.value is node:
        if len(parent.targets) == 1 and isinstance(parent.targets[0], ast.Name):
            return "assignment_rhs", parent.targets[0].id
        return "assignment_rhs", None
    if isinstance(parent, ast.AnnAssign) and parent.value is node:
        if isinstance(parent.target, ast.Name):
            return "assignment_rhs", parent.target.id
        return "assignment_rhs", None
    if isinstance(parent, ast.NamedExpr) and parent.value is node:
        return "assignment_rhs", parent.target.id
    if isinstance(parent, ast.Call) and node is not parent.func:
        return "argument_position", None
    if isinstance(parent, ast.keyword):
        return "argument_position", None
    if isinstance(parent, ast.Return):
        return "return_value", None
    return "other", None


_SCOPE_NODES = (ast.FunctionDef, ast.AsyncFunctionDef, ast.ClassDef, ast.Lambda)


def _scope_name(node) -> str:
    return getattr(node, "name", "<lambda>")


def _collect_literal_bindings(handle: PyAstHandle) -> list:
    bindings = []

    def scope_of(node):
        chain = []
        current = handle.parent_of(node)
        while current is not None:
            if isinstance(current, _SCOPE_NODES):
                chain.append(_scope_name(current))
            current = handle.parent_of(current)
        return "::".join(reversed(chain)) if chain else MODULE_SCOPE

    for node in ast.walk(handle.tree):
        target = None
        value = None
        if isinstance(node, ast.Assign) and len(node.targets) == 1 and isinstance(node.targets[0], ast.Name):
            target, value = node.targets[0].id, node.value
        elif isinstance(node, ast.AnnAssign) and isinstance(node.target, ast.Name) and node.value is not None:
            target, value = node.target.id, node.value
        if target is None:
            continue
        unwrapped = value.value if isinstance(value, ast.Await) else value
        if isinstance(unwrapped, ast.Call):
            # Call-produced bindings keep the symbol table complete; the
            # dependency graph, not the table, resolves their values.
            kind, text = "call", callee_name(unwrapped.func, handle.symbols)
        elif isinstance(unwrapped, ast.Constant):
            kind, text = "literal", _render_constant(unwrapped.value)
        elif isinstance(unwrapped, ast.JoinedStr):
            kind, text = "template", _expr_text(unwrapped)
        else:
            kind, text = "expression", _expr_text(unwrapped)
        bindings.append(LiteralBinding(target, kind, text, file="", line=node.lineno, scope=scope_of(node)))
    bindings.sort(key=lambda b: b.line)
    return bindings


def extract_python_ir(handle: PyAstHandle, file_label: str) -> ExtractionResult:
    """Lower every call expression into an IrUnit, in source order."""
    result = ExtractionResult(partial=handle.partial)
    symbols = handle.symbols
    ordinal = 0

    def emit(call: ast.Call, scope_chain: list):
        nonlocal ordinal
        arguments = []
        for i, arg in enumerate(call.args):
            if isinstance(arg, ast.Starred):
                arguments.append(Argument(i, "variable", _expr_text(arg)))
            else:
                arguments.append(classify_argument(arg, symbols, i))
        for kw in call.keywords:
            position = kw.arg if kw.arg is not None else "**"
            arguments.append(classify_argument(kw.value, symbols, position))
        context, produced_as = _call_context(handle, call)
        result.units.append(
            IrUnit(
                unit_id=f"{file_label}#{ordinal}",
                call_name=callee_name(call.func, symbols),
                file=file_label,
                line=call.lineno,
                column=call.col_offset,
                scope="::".join(scope_chain) if scope_chain else MODULE_SCOPE,
                arguments=arguments,
                produced_as=produced_as,
                parent_context=context,
            )
        )
        ordinal += 1

    def visit(node, scope_chain: list):
        if isinstance(node, _SCOPE_NODES):
            scope_chain = scope_chain + [_scope_name(node)]
        if isinstance(node, ast.Call):
            # Callee first so chained calls surface in reading order.
            visit(node.func, scope_chain)
            emit(node, scope_chain)
            for arg in node.args:
                visit(arg, scope_chain)
            for kw in node.keywords:
                visit(kw, scope_chain)
            return
        for child in ast.iter_child_nodes(node):
            visit(child, scope_chain)

    visit(handle.tree, [])

    for binding in handle.symbols.bindings:
        binding.file = file_label
    result.bindings = list(handle.symbols.bindings)
    result.call_node_count = sum(isinstance(n, ast.Call) for n in ast.walk(handle.tree))
    return result
