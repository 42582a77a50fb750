"""Minimal JSON reader that remembers where every value sits in the text.

The standard library parser throws positions away once a document is
loaded; description diagnostics need them, so this reader returns a tree
of :class:`Node` objects, each carrying the 1-based line and column where
its value starts.  Object members map plain string keys to child nodes.

Stricter than the RFC in one way: duplicate object keys are an error
rather than a silent last-one-wins.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

_NUMBER_RE = re.compile(r"-?(?:0|[1-9]\d*)(?:\.\d+)?(?:[eE][+-]?\d+)?")
_ESCAPES = {'"': '"', "\\": "\\", "/": "/", "b": "\b", "f": "\f",
            "n": "\n", "r": "\r", "t": "\t"}


@dataclass
class Node:
    value: object  # dict[str, Node] | list[Node] | str | int | float | bool | None
    line: int
    column: int

    @property
    def kind(self) -> str:
        v = self.value
        if isinstance(v, dict):
            return "object"
        if isinstance(v, list):
            return "array"
        if isinstance(v, bool):
            return "boolean"
        if isinstance(v, int):
            return "integer"
        if isinstance(v, float):
            return "number"
        if isinstance(v, str):
            return "string"
        return "null"


class JsonSyntaxError(ValueError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{message} at line {line}, column {column}")
        self.reason = message
        self.line = line
        self.column = column


class _Reader:
    def __init__(self, text: str):
        self.text = text
        self.n = len(text)
        self.pos = 0
        self.line = 1
        self.column = 1

    def _advance(self, count: int = 1) -> None:
        for _ in range(count):
            if self.text[self.pos] == "\n":
                self.line += 1
                self.column = 1
            else:
                self.column += 1
            self.pos += 1

    def _error(self, message: str):
        raise JsonSyntaxError(message, self.line, self.column)

    def _skip_ws(self) -> None:
        while self.pos < self.n and self.text[self.pos] in " \t\r\n":
            self._advance()

    def _peek(self) -> str:
        return self.text[self.pos] if self.pos < self.n else ""

    def parse(self) -> Node:
        self._skip_ws()
        if self.pos >= self.n:
            self._error("empty document")
        node = self._value()
        self._skip_ws()
        if self.pos < self.n:
            self._error("trailing data after the document")
        return node

    def _value(self) -> Node:
        ch = self._peek()
        if ch == "{":
            return self._object()
        if ch == "[":
            return self._array()
        if ch == '"':
            line, col = self.line, self.column
            return Node(self._string(), line, col)
        if ch == "-" or ch.isdigit():
            return self._number()
        for literal, value in (("true", True), ("false", False), ("null", None)):
            if self.text.startswith(literal, self.pos):
                node = Node(value, self.line, self.column)
                self._advance(len(literal))
                return node
        if ch == "":
            self._error("unexpected end of input")
        self._error(f"unexpected character {ch!r}")

    def _object(self) -> Node:
        node = Node({}, self.line, self.column)
        members: dict[str, Node] = node.value
        self._advance()  # '{'
        self._skip_ws()
        if self._peek() == "}":
            self._advance()
            return node
        while True:
            self._skip_ws()
            if self._peek() != '"':
                self._error("expected a string key")
            key_line, key_col = self.line, self.column
            key = self._string()
            if key in members:
                raise JsonSyntaxError(f"duplicate key {key!r}", key_line, key_col)
            self._skip_ws()
            if self._peek() != ":":
                self._error("expected ':' after key")
            self._advance()
            self._skip_ws()
            members[key] = self._value()
            self._skip_ws()
            ch = self._peek()
            if ch == ",":
                self._advance()
                continue
            if ch == "}":
                self._advance()
                return node
            self._error("expected ',' or '}' in object")

    def _array(self) -> Node:
        node = Node([], self.line, self.column)
        items: list[Node] = node.value
        self._advance()  # '['
        self._skip_ws()
        if self._peek() == "]":
            self._advance()
            return node
        while True:
            self._skip_ws()
            items.append(self._value())
            self._skip_ws()
            ch = self._peek()
            if ch == ",":
                self._advance()
                continue
            if ch == "]":
                self._advance()
                return node
            self._error("expected ',' or ']' in array")

    def _string(self) -> str:
        self._advance()  # opening quote
        parts: list[str] = []
        while True:
            if self.pos >= self.n:
                self._error("unterminated string")
            ch = self.text[self.pos]
            if ch == '"':
                self._advance()
                return "".join(parts)
            if ch == "\\":
                self._advance()
                esc = self._peek()
                if esc in _ESCAPES:
                    parts.append(_ESCAPES[esc])
                    self._advance()
                elif esc == "u":
                    self._advance()
                    parts.append(self._unicode_escape())
                else:
                    self._error(f"bad escape \\{esc}")
            elif ch in "\n\r":
                self._error("newline inside string")
            else:
                parts.append(ch)
                self._advance()
        raise AssertionError("unreachable")

    def _unicode_escape(self) -> str:
        def hex4() -> int:
            if self.pos + 4 > self.n:
                self._error("truncated \\u escape")
            digits = self.text[self.pos:self.pos + 4]
            try:
                code = int(digits, 16)
            except ValueError:
                self._error(f"bad \\u escape {digits!r}")
            self._advance(4)
            return code

        code = hex4()
        if 0xD800 <= code <= 0xDBFF and self.text.startswith("\\u", self.pos):
            self._advance(2)
            low = hex4()
            if 0xDC00 <= low <= 0xDFFF:
                return chr(0x10000 + ((code - 0xD800) << 10) + (low - 0xDC00))
            return chr(code) + chr(low)
        return chr(code)

    def _number(self) -> Node:
        m = _NUMBER_RE.match(self.text, self.pos)
        if m is None:
            self._error("bad number")
        node_line, node_col = self.line, self.column
        literal = m.group(0)
        self._advance(len(literal))
        if "." in literal or "e" in literal or "E" in literal:
            return Node(float(literal), node_line, node_col)
        return Node(int(literal), node_line, node_col)


def parse_json(text: str) -> Node:
    """Parse a JSON document into a position-annotated node tree."""
    return _Reader(text).parse()
