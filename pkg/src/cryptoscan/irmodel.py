"""Language-independent call-site IR.

One IrUnit per call expression, with arguments tagged into the five
categories constant / list_literal / dict_literal / function_return /
variable. The tag names are part of the wire format.
"""

import json
from dataclasses import dataclass, field

ARGUMENT_TAGS = ("constant", "list_literal", "dict_literal", "function_return", "variable")

PARENT_CONTEXTS = ("assignment_rhs", "expression_statement", "argument_position", "return_value", "other")

MODULE_SCOPE = "<module>"


@dataclass
class Argument:
    position: object  # int for positional, str for keyword/named
    tag: str
    value: str
    element_tags: list = None  # only for list_literal / dict_literal


@dataclass
class IrUnit:
    unit_id: str
    call_name: str
    file: str  # project-relative POSIX path
    line: int
    column: int
    scope: str
    arguments: list
    produced_as: str = None
    parent_context: str = "other"

    def variable_names(self) -> set:
        """Names this unit binds or consumes: produced_as plus variable args."""
        names = {a.value for a in self.arguments if a.tag == "variable"}
        if self.produced_as:
            names.add(self.produced_as)
        return names


@dataclass
class LiteralBinding:
    """A non-call assignment of a literal/template/expression to a simple name.

    Not part of the IR (the IR is call sites only); carried separately so
    secret-literal and origin checks can see `API_KEY = '...'`-style code.
    """

    name: str
    kind: str  # "literal" | "template" | "expression"
    text: str  # literal value, or normalized expression text
    file: str
    line: int
    scope: str


@dataclass
class ExtractionResult:
    units: list = field(default_factory=list)
    bindings: list = field(default_factory=list)
    partial: bool = False  # parse errors degraded this file
    call_node_count: int = 0  # independent count for the unit-count invariant


def _unit_sort_key(unit: IrUnit):
    # unit_id carries the extraction ordinal, which breaks (file, line,
    # column) ties between the calls of one fluent chain.
    return (unit.file, unit.line, unit.column, int(unit.unit_id.rsplit("#", 1)[1]))


def _argument_to_dict(argument: Argument) -> dict:
    return {
        "position": argument.position,
        "tag": argument.tag,
        "value": argument.value,
        "element_tags": argument.element_tags,
    }


def _unit_to_dict(unit: IrUnit) -> dict:
    return {
        "unit_id": unit.unit_id,
        "call_name": unit.call_name,
        "file": unit.file,
        "line": unit.line,
        "column": unit.column,
        "scope": unit.scope,
        "produced_as": unit.produced_as,
        "parent_context": unit.parent_context,
        "arguments": [_argument_to_dict(a) for a in unit.arguments],
    }


def serialize_ir(units) -> str:
    """Deterministic JSON for a unit list: stable key order, sorted units."""
    ordered = sorted(units, key=_unit_sort_key)
    return json.dumps([_unit_to_dict(u) for u in ordered], indent=2, ensure_ascii=True)


def deserialize_ir(text: str) -> list:
    units = []
    for raw in json.loads(text):
        units.append(
            IrUnit(
                unit_id=raw["unit_id"],
                call_name=raw["call_name"],
                file=raw["file"],
                line=raw["line"],
                column=raw["column"],
                scope=raw["scope"],
                produced_as=raw["produced_as"],
                parent_context=raw["parent_context"],
                arguments=[
                    Argument(
                        position=a["position"],
                        tag=a["tag"],
                        value=a["value"],
                        element_tags=a["element_tags"],
                    )
                    for a in raw["arguments"]
                ],
            )
        )
    return units
