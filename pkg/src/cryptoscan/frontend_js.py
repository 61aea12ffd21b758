"""JavaScript/TypeScript front-end backed by @babel/parser.

A persistent Node helper process (one per worker thread) parses sources
into ESTree-style JSON; lowering happens here. Babel's errorRecovery
provides the degraded mode; errors it cannot recover from are repaired by
blanking the offending line and retrying, mirroring the Python front-end.
"""

import json
import logging
import os
import shutil
import subprocess
import threading
from dataclasses import dataclass, field
from importlib import resources

from .errors import FatalParseError
from .irmodel import Argument, ExtractionResult, IrUnit, LiteralBinding, MODULE_SCOPE

logger = logging.getLogger(__name__)

_MAX_REPAIR_ATTEMPTS = 20
_MAX_EXPR_TEXT = 500

_CALL_TYPES = {"CallExpression", "OptionalCallExpression", "NewExpression"}
_TRANSPARENT = {"TSAsExpression", "TSNonNullExpression", "TSTypeAssertion", "TSSatisfiesExpression", "ParenthesizedExpression", "AwaitExpression"}

_local = threading.local()
_node_path_lock = threading.Lock()
_node_path_env = None


def _global_node_modules() -> str:
    global _node_path_env
    with _node_path_lock:
        if _node_path_env is None:
            npm = shutil.which("npm")
            root = ""
            if npm:
                try:
                    root = subprocess.run(
                        [npm, "root", "-g"], capture_output=True, text=True, timeout=30
                    ).stdout.strip()
                except (OSError, subprocess.SubprocessError):
                    root = ""
            _node_path_env = root
    return _node_path_env


class _ParserProcess:
    """One Node helper process speaking the line protocol."""

    def __init__(self):
        node = shutil.which("node")
        if node is None:
            raise FatalParseError("node executable not found; JavaScript/TypeScript parsing needs Node.js")
        script = resources.files("cryptoscan.data").joinpath("babel_ast_server.js").read_text("utf-8")
        env = dict(os.environ)
        extra = _global_node_modules()
        if extra:
            existing = env.get("NODE_PATH", "")
            env["NODE_PATH"] = f"{extra}{os.pathsep}{existing}" if existing else extra
        self._proc = subprocess.Popen(
            [node, "-e", script],
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            stderr=subprocess.DEVNULL,
            text=True,
            env=env,
        )
        self._next_id = 0

    def request(self, source: str, dialect: str) -> dict:
        self._next_id += 1
        payload = json.dumps({"id": self._next_id, "source": source, "dialect": dialect})
        try:
            self._proc.stdin.write(payload + "\n")
            self._proc.stdin.flush()
            line = self._proc.stdout.readline()
        except (OSError, ValueError) as exc:
            raise FatalParseError(f"parser helper process failed: {exc}") from exc
        if not line:
            raise FatalParseError("parser helper process exited unexpectedly")
        response = json.loads(line)
        if response.get("fatal"):
            raise FatalParseError(response["fatal"])
        return response

    def close(self):
        try:
            self._proc.stdin.close()
            self._proc.wait(timeout=5)
        except (OSError, subprocess.SubprocessError, ValueError):
            self._proc.kill()


def _thread_parser() -> _ParserProcess:
    proc = getattr(_local, "parser", None)
    if proc is None or proc._proc.poll() is not None:
        proc = _ParserProcess()
        _local.parser = proc
    return proc


@dataclass
class JsAstHandle:
    root: dict
    source: str
    parents: dict  # id(node) -> parent node
    bindings: list = field(default_factory=list)
    partial: bool = False

    def parent_of(self, node):
        return self.parents.get(id(node))


def _dialect_for(path: str) -> str:
    lowered = str(path).lower()
    if lowered.endswith(".tsx"):
        return "tsx"
    if lowered.endswith(".ts"):
        return "ts"
    return "js"


def parse_javascript(source: str, dialect: str):
    """Parse with repair; returns (program_node, partial, parsed_text).

    parsed_text is exactly what the parser saw (newline-normalized,
    possibly with blanked lines), so byte offsets in the tree index into
    it; callers must slice against it, not the original source.
    """
    parser = _thread_parser()
    lines = source.splitlines()
    blanked = set()
    text = "\n".join(lines)
    for _ in range(_MAX_REPAIR_ATTEMPTS):
        text = "\n".join("" if i in blanked else line for i, line in enumerate(lines))
        response = parser.request(text, dialect)
        if response.get("ok"):
            return response["ast"], bool(blanked) or bool(response.get("errors")), text
        index = (response.get("line") or 1) - 1
        index = max(0, min(index, len(lines) - 1)) if lines else 0
        while index >= 0 and index in blanked:
            index -= 1
        if index < 0 or not lines:
            break
        blanked.add(index)
    return {"type": "Program", "body": [], "start": 0, "end": 0}, True, text


def _is_node(value) -> bool:
    return isinstance(value, dict) and isinstance(value.get("type"), str)


def _children(node: dict):
    for key, value in node.items():
        if key in ("loc", "extra"):
            continue
        if _is_node(value):
            yield value
        elif isinstance(value, list):
            for item in value:
                if _is_node(item):
                    yield item


def build_handle(source: str, path: str) -> JsAstHandle:
    root, partial, parsed_text = parse_javascript(source, _dialect_for(path))
    parents = {}
    stack = [root]
    while stack:
        node = stack.pop()
        for child in _children(node):
            parents[id(child)] = node
            stack.append(child)
    return JsAstHandle(root=root, source=parsed_text, parents=parents, partial=partial)


def _slice_text(handle: JsAstHandle, node: dict) -> str:
    start, end = node.get("start"), node.get("end")
    if isinstance(start, int) and isinstance(end, int):
        text = handle.source[start:end]
    else:
        text = f"<{node.get('type')}>"
    return " ".join(text.split())[:_MAX_EXPR_TEXT]


def _unwrap(node: dict) -> dict:
    while node.get("type") in _TRANSPARENT:
        inner = node.get("expression") or node.get("argument")
        if not _is_node(inner):
            break
        node = inner
    return node


def callee_name(node: dict) -> str:
    node = _unwrap(node)
    node_type = node.get("type")
    if node_type == "Identifier":
        return node.get("name", "<expr>")
    if node_type == "ThisExpression":
        return "this"
    if node_type == "Super":
        return "super"
    if node_type in ("MemberExpression", "OptionalMemberExpression"):
        base = callee_name(node["object"])
        if node.get("computed"):
            return f"{base}[]"
        prop = node.get("property", {})
        if prop.get("type") == "PrivateName":
            name = prop.get("id", {}).get("name", "")
            return f"{base}.#{name}"
        return f"{base}.{prop.get('name', '?')}"
    if node_type in _CALL_TYPES:
        return f"{callee_name(node['callee'])}()"
    return "<expr>"


def _render_number(node: dict) -> str:
    raw = (node.get("extra") or {}).get("raw")
    if isinstance(raw, str):
        return raw
    value = node.get("value")
    if isinstance(value, float) and value.is_integer():
        return str(int(value))
    return str(value)


def _template_is_static(node: dict) -> bool:
    return not node.get("expressions")


def _template_text(node: dict) -> str:
    return "".join(q.get("value", {}).get("cooked") or "" for q in node.get("quasis", []))


def classify_argument(handle: JsAstHandle, node: dict, position) -> Argument:
    node = _unwrap(node)
    node_type = node.get("type")
    if node_type == "StringLiteral":
        return Argument(position, "constant", node.get("value", ""))
    if node_type == "NumericLiteral":
        return Argument(position, "constant", _render_number(node))
    if node_type == "BooleanLiteral":
        return Argument(position, "constant", "true" if node.get("value") else "false")
    if node_type == "NullLiteral":
        return Argument(position, "constant", "null")
    if node_type == "BigIntLiteral":
        return Argument(position, "constant", str(node.get("value", "")))
    if node_type == "RegExpLiteral":
        return Argument(position, "constant", _slice_text(handle, node))
    if node_type == "TemplateLiteral":
        if _template_is_static(node):
            return Argument(position, "constant", _template_text(node))
        return Argument(position, "variable", _slice_text(handle, node))
    if node_type == "ArrayExpression":
        tags = [classify_argument(handle, e, i).tag for i, e in enumerate(node.get("elements", [])) if _is_node(e)]
        return Argument(position, "list_literal", _slice_text(handle, node), element_tags=tags)
    if node_type == "ObjectExpression":
        tags = []
        for prop in node.get("properties", []):
            if prop.get("type") == "ObjectProperty" and _is_node(prop.get("value")):
                tags.append(classify_argument(handle, prop["value"], len(tags)).tag)
            else:
                tags.append("variable")
        return Argument(position, "dict_literal", _slice_text(handle, node), element_tags=tags)
    if node_type in _CALL_TYPES:
        return Argument(position, "function_return", callee_name(node["callee"]))
    if node_type == "Identifier":
        return Argument(position, "variable", node.get("name", "<expr>"))
    if node_type in ("MemberExpression", "OptionalMemberExpression", "ThisExpression"):
        return Argument(position, "variable", callee_name(node))
    return Argument(position, "variable", _slice_text(handle, node))


def _declarator_name(node: dict):
    ident = node.get("id")
    if _is_node(ident) and ident.get("type") == "Identifier":
        return ident.get("name")
    return None


def _call_context(handle: JsAstHandle, call: dict):
    node = call
    parent = handle.parent_of(node)
    while parent is not None and parent.get("type") in _TRANSPARENT:
        node, parent = parent, handle.parent_of(parent)
    if parent is None:
        return "other", None
    parent_type = parent.get("type")
    if parent_type == "ExpressionStatement":
        return "expression_statement", None
    if parent_type == "VariableDeclarator" and parent.get("init") is node:
        return "assignment_rhs", _declarator_name(parent)
    if parent_type == "AssignmentExpression" and parent.get("right") is node and parent.get("operator") == "=":
        left = parent.get("left", {})
        name = left.get("name") if left.get("type") == "Identifier" else None
        return "assignment_rhs", name
    if parent_type in _CALL_TYPES and node is not parent.get("callee"):
        return "argument_position", None
    if parent_type == "ReturnStatement":
        return "return_value", None
    return "other", None


_FUNCTION_TYPES = {"FunctionDeclaration", "FunctionExpression", "ArrowFunctionExpression", "ClassMethod", "ClassPrivateMethod", "ObjectMethod", "TSDeclareMethod"}
_CLASS_TYPES = {"ClassDeclaration", "ClassExpression"}


def _function_scope_name(handle: JsAstHandle, node: dict) -> str:
    node_type = node.get("type")
    if node_type in ("ClassMethod", "ClassPrivateMethod", "ObjectMethod", "TSDeclareMethod"):
        key = node.get("key", {})
        if key.get("type") == "Identifier":
            return key.get("name", "<anonymous>")
        if key.get("type") == "PrivateName":
            return key.get("id", {}).get("name", "<anonymous>")
        if key.get("type") == "StringLiteral":
            return key.get("value", "<anonymous>")
        return "<anonymous>"
    ident = node.get("id")
    if _is_node(ident) and ident.get("type") == "Identifier":
        return ident.get("name")
    parent = handle.parent_of(node)
    if parent is not None:
        if parent.get("type") == "VariableDeclarator":
            name = _declarator_name(parent)
            if name:
                return name
        if parent.get("type") in ("ObjectProperty", "ClassProperty", "ClassPrivateProperty", "PropertyDefinition"):
            key = parent.get("key", {})
            if key.get("type") == "Identifier":
                return key.get("name", "<anonymous>")
            if key.get("type") == "PrivateName":
                return key.get("id", {}).get("name", "<anonymous>")
    return "<anonymous>"


def _literal_binding_fields(handle: JsAstHandle, value: dict):
    value = _unwrap(value)
    value_type = value.get("type")
    if value_type in _CALL_TYPES:
        return "call", callee_name(value.get("callee", {}))
    if value_type in ("StringLiteral", "NumericLiteral", "BooleanLiteral", "NullLiteral", "BigIntLiteral"):
        rendered = classify_argument(handle, value, 0).value
        return "literal", rendered
    if value_type == "TemplateLiteral":
        if _template_is_static(value):
            return "literal", _template_text(value)
        return "template", _slice_text(handle, value)
    return "expression", _slice_text(handle, value)


def extract_javascript_ir(handle: JsAstHandle, file_label: str) -> ExtractionResult:
    result = ExtractionResult(partial=handle.partial)
    ordinal = 0
    call_count = 0

    def emit(call: dict, scope_chain: list):
        nonlocal ordinal
        arguments = []
        for i, arg in enumerate(call.get("arguments", [])):
            if not _is_node(arg):
                continue
            if arg.get("type") == "SpreadElement":
                arguments.append(Argument(i, "variable", _slice_text(handle, arg)))
            else:
                arguments.append(classify_argument(handle, arg, i))
        context, produced_as = _call_context(handle, call)
        loc = (call.get("loc") or {}).get("start") or {}
        result.units.append(
            IrUnit(
                unit_id=f"{file_label}#{ordinal}",
                call_name=callee_name(call.get("callee", {})),
                file=file_label,
                line=loc.get("line", 1),
                column=loc.get("column", 0),
                scope="::".join(scope_chain) if scope_chain else MODULE_SCOPE,
                arguments=arguments,
                produced_as=produced_as,
                parent_context=context,
            )
        )
        ordinal += 1

    def record_binding(name: str, value: dict, line: int, scope_chain: list):
        fields = _literal_binding_fields(handle, value)
        if fields is None:
            return
        kind, text = fields
        result.bindings.append(
            LiteralBinding(name, kind, text, file=file_label, line=line, scope="::".join(scope_chain) or MODULE_SCOPE)
        )

    def visit(node: dict, scope_chain: list):
        nonlocal call_count
        node_type = node.get("type")
        if node_type in _FUNCTION_TYPES:
            scope_chain = scope_chain + [_function_scope_name(handle, node)]
        elif node_type in _CLASS_TYPES:
            ident = node.get("id")
            name = ident.get("name") if _is_node(ident) else None
            scope_chain = scope_chain + [name or "<anonymous>"]
        if node_type in _CALL_TYPES:
            call_count += 1
            visit(node.get("callee", {}), scope_chain)
            emit(node, scope_chain)
            for arg in node.get("arguments", []):
                if _is_node(arg):
                    visit(arg, scope_chain)
            return
        if node_type == "VariableDeclarator" and _is_node(node.get("init")):
            name = _declarator_name(node)
            if name:
                line = ((node.get("loc") or {}).get("start") or {}).get("line", 1)
                record_binding(name, node["init"], line, scope_chain)
        elif node_type == "AssignmentExpression" and node.get("operator") == "=":
            left = node.get("left", {})
            if left.get("type") == "Identifier" and _is_node(node.get("right")):
                line = ((node.get("loc") or {}).get("start") or {}).get("line", 1)
                record_binding(left["name"], node["right"], line, scope_chain)
        for child in _children(node):
            visit(child, scope_chain)

    visit(handle.root, [])
    result.bindings.sort(key=lambda b: b.line)
    result.call_node_count = call_count
    return result
