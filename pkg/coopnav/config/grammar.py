"""
Syntax of run configuration files.

A file is a list of ``[section]`` headers and ``key = value`` lines. Values are
numbers, ``true``/``false``, double-quoted strings or bare words, and a value
may be a comma-separated list of those. ``#`` starts a comment. Use
`parse_config_text()` to turn a file into nested dictionaries; the meaning of
the keys is checked by :mod:`coopnav.config.visitors`.
"""

from __future__ import annotations

from typing import Any, Dict, List, Sequence, Tuple, Union

from parsimonious.exceptions import ParseError
from parsimonious.grammar import Grammar
from parsimonious.nodes import Node, NodeVisitor


class InvalidConfigError(Exception):
    pass


Scalar = Union[int, float, bool, str]
Value = Union[Scalar, List[Scalar]]
RawConfig = Dict[str, Dict[str, Value]]

CONFIG_GRAMMAR = Grammar(
    r"""
config = entry*
entry = blank_line / section_line / assignment_line

blank_line = hs comment? newline
section_line = hs section hs comment? newline
assignment_line = hs assignment hs comment? newline

section = open_bracket hs name hs close_bracket
assignment = name hs equals hs value_list
value_list = value (hs comma hs value)*
value = quoted_string / number / boolean / bare_word

number = ~r"[-+]?(?:[0-9]+\.?[0-9]*|\.[0-9]+)(?:[eE][-+]?[0-9]+)?(?![^\s,#])"
boolean = ~r"(?:true|false)(?![^\s,#])"i
quoted_string = ~r'"([^"\\]*(?:\\.[^"\\]*)*)"'
bare_word = ~r'[^\s,#"\[\]=]+'
name = ~r"[a-zA-Z_][a-zA-Z0-9_]*"

open_bracket = "["
close_bracket = "]"
equals = "="
comma = ","
comment = ~r"#[^\n]*"
newline = ~r"\r?\n"
hs = ~r"[ \t]*"
"""
)

Entry = Tuple[str, str, Value]


def parse_config_text(text: str) -> RawConfig:
    """
    Parse the text of a configuration file.

    :raises InvalidConfigError: On a syntax error, a key outside of any
        section or a key given twice.
    """
    if not text.endswith("\n"):
        text += "\n"
    try:
        tree = CONFIG_GRAMMAR.parse(text)
    except ParseError as e:
        line = text.count("\n", 0, e.pos) + 1
        raise InvalidConfigError(f"invalid configuration syntax on line {line}") from e
    entries = ConfigVisitor().visit(tree)

    raw: RawConfig = {}
    section = None
    for kind, name, value in entries:
        if kind == "section":
            section = name
            raw.setdefault(name, {})
            continue
        if section is None:
            raise InvalidConfigError(f"key '{name}' must follow a [section] header")
        if name in raw[section]:
            raise InvalidConfigError(f"{section}.{name} is given more than once")
        raw[section][name] = value
    return raw


class ConfigVisitor(NodeVisitor):  # type: ignore
    """Turns the parse tree into a flat list of section and key entries."""

    def visit_config(self, node: Node, children: Sequence[Any]) -> List[Entry]:
        return [entry for entry in children if entry is not None]

    def visit_entry(self, node: Node, children: Sequence[Any]) -> Any:
        return children[0]

    def visit_blank_line(self, node: Node, children: Sequence[Any]) -> None:
        return None

    def visit_section_line(self, node: Node, children: Sequence[Any]) -> Entry:
        return children[1]  # type: ignore

    def visit_assignment_line(self, node: Node, children: Sequence[Any]) -> Entry:
        return children[1]  # type: ignore

    def visit_section(self, node: Node, children: Sequence[Any]) -> Entry:
        _, _, name, _, _ = children
        return ("section", name, "")

    def visit_assignment(self, node: Node, children: Sequence[Any]) -> Entry:
        name, _, _, _, value = children
        return ("key", name, value)

    def visit_value_list(self, node: Node, children: Sequence[Any]) -> Value:
        first, rest = children
        if not rest:
            return first  # type: ignore
        return [first] + [item[3] for item in rest]

    def visit_value(self, node: Node, children: Sequence[Any]) -> Scalar:
        return children[0]  # type: ignore

    def visit_number(self, node: Node, children: Sequence[Any]) -> Union[int, float]:
        text = node.text
        if any(c in text for c in ".eE"):
            return float(text)
        return int(text)

    def visit_boolean(self, node: Node, children: Sequence[Any]) -> bool:
        return bool(node.text.lower() == "true")

    def visit_quoted_string(self, node: Node, children: Sequence[Any]) -> str:
        return str(node.text[1:-1].replace('\\"', '"').replace("\\\\", "\\"))

    def visit_bare_word(self, node: Node, children: Sequence[Any]) -> str:
        return str(node.text)

    def visit_name(self, node: Node, children: Sequence[Any]) -> str:
        return str(node.text)

    def generic_visit(self, node: Node, children: Sequence[Any]) -> Any:
        """The generic visit method."""
        return children
