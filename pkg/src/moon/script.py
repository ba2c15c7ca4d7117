"""The scenario scripting language.

A script states the order in which a notebook's code cells are meant to
be executed, combining three patterns::

    (E1 E2 ...)   linear: elements in the written order
    [E1 E2 ...]   any order: element blocks in any permutation, each block
                  completed before the next begins
    ?E            optional: E may be skipped
    Ci~Tj~...     a code cell and the text cells carrying its instructions

Whitespace separates siblings; ``~`` binds tighter than juxtaposition;
``?`` applies to exactly the next expression.  A bare top-level sequence
of expressions is an implicit linear group.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterator, Literal

from .errors import ScriptSyntaxError
from .notebook import CellRef, NotebookDoc


class Node:
    """Base class for script AST nodes."""

    __slots__ = ()


@dataclass(frozen=True)
class CellNode(Node):
    """A code cell reference with its associated text cells."""

    code: CellRef
    texts: tuple[CellRef, ...] = ()

    def __post_init__(self):
        if self.code.kind != "code":
            raise ValueError(f"cell node must reference a code cell, got {self.code}")
        for t in self.texts:
            if t.kind != "text":
                raise ValueError(f"associated cells must be text cells, got {t}")


@dataclass(frozen=True)
class Seq(Node):
    """Linear group: children execute in order."""

    children: tuple[Node, ...]

    def __post_init__(self):
        if not self.children:
            raise ValueError("linear group needs at least one child")


@dataclass(frozen=True)
class Any(Node):
    """Any-order group: child blocks execute in any permutation."""

    children: tuple[Node, ...]

    def __post_init__(self):
        if not self.children:
            raise ValueError("any-order group needs at least one child")


@dataclass(frozen=True)
class Opt(Node):
    """Optional: the child may be skipped entirely."""

    child: Node


@dataclass(frozen=True)
class Alt(Node):
    """Alternation over expanded any-order permutations.

    Produced by expansion only; the surface syntax cannot spell it.
    """

    children: tuple[Node, ...]

    def __post_init__(self):
        if not self.children:
            raise ValueError("alternation needs at least one child")


ScriptAst = Node


def children(node: Node) -> tuple[Node, ...]:
    if isinstance(node, (Seq, Any, Alt)):
        return node.children
    if isinstance(node, Opt):
        return (node.child,)
    return ()


def iter_cell_nodes(node: Node) -> Iterator[CellNode]:
    """All cell references in script order, duplicates included."""
    if isinstance(node, CellNode):
        yield node
    for child in children(node):
        yield from iter_cell_nodes(child)


def code_cells(node: Node) -> frozenset[CellRef]:
    """The distinct code cells the script mentions."""
    return frozenset(c.code for c in iter_cell_nodes(node))


def text_associations(node: Node) -> dict[CellRef, frozenset[CellRef]]:
    """Per code cell, the union of text cells associated over all occurrences."""
    assoc: dict[CellRef, set[CellRef]] = {}
    for cell in iter_cell_nodes(node):
        assoc.setdefault(cell.code, set()).update(cell.texts)
    return {code: frozenset(texts) for code, texts in assoc.items()}


def render(node: Node) -> str:
    """Canonical script text; ``parse_script(render(ast))`` is structurally equal."""
    if isinstance(node, CellNode):
        return "~".join(str(r) for r in (node.code, *node.texts))
    if isinstance(node, Seq):
        return "(" + " ".join(render(c) for c in node.children) + ")"
    if isinstance(node, Any):
        return "[" + " ".join(render(c) for c in node.children) + "]"
    if isinstance(node, Opt):
        return "?" + render(node.child)
    raise ValueError(f"{type(node).__name__} has no surface syntax")


# ---------------------------------------------------------------------------
# Parsing


@dataclass(frozen=True)
class _Token:
    type: str  # 'cell' | '(' | ')' | '[' | ']' | '?' | '~'
    text: str
    start: int
    end: int

    @property
    def span(self) -> tuple[int, int]:
        return (self.start, self.end)


_TOKEN_RE = re.compile(r"(?P<ws>\s+)|(?P<cell>[CT]\d+)|(?P<punct>[()\[\]?~])")
_BOUNDARY_RE = re.compile(r"[\s()\[\]?~]")


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            boundary = _BOUNDARY_RE.search(text, pos)
            end = boundary.start() if boundary else len(text)
            raise ScriptSyntaxError(f"unknown token {text[pos:end]!r}", (pos, end))
        if m.lastgroup == "cell":
            tokens.append(_Token("cell", m.group(), m.start(), m.end()))
        elif m.lastgroup == "punct":
            tokens.append(_Token(m.group(), m.group(), m.start(), m.end()))
        pos = m.end()
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self) -> _Token | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def take(self) -> _Token:
        tok = self.peek()
        if tok is None:
            end = len(self.text)
            raise ScriptSyntaxError("unexpected end of script", (end, end))
        self.pos += 1
        return tok

    def parse_script(self) -> Node:
        if not self.tokens:
            raise ScriptSyntaxError("empty script", (0, len(self.text)))
        exprs = [self.parse_expr()]
        while self.peek() is not None:
            exprs.append(self.parse_expr())
        if len(exprs) == 1:
            return exprs[0]
        return Seq(tuple(exprs))

    def parse_expr(self) -> Node:
        tok = self.take()
        if tok.type == "(":
            return Seq(self._parse_group(tok, ")"))
        if tok.type == "[":
            return Any(self._parse_group(tok, "]"))
        if tok.type == "?":
            return Opt(self.parse_expr())
        if tok.type == "cell":
            return self._parse_cell_term(tok)
        if tok.type in (")", "]"):
            raise ScriptSyntaxError(f"unbalanced {tok.text!r}", tok.span)
        raise ScriptSyntaxError(f"unexpected {tok.text!r}", tok.span)

    def _parse_group(self, opener: _Token, closer: str) -> tuple[Node, ...]:
        items = []
        while True:
            tok = self.peek()
            if tok is None:
                raise ScriptSyntaxError(
                    f"unbalanced {opener.text!r}: missing {closer!r}", opener.span
                )
            if tok.type == closer:
                self.take()
                if not items:
                    raise ScriptSyntaxError(
                        "empty group", (opener.start, tok.end)
                    )
                return tuple(items)
            items.append(self.parse_expr())

    def _parse_cell_term(self, first: _Token) -> CellNode:
        code = CellRef.parse(first.text)
        if code.kind != "code":
            raise ScriptSyntaxError(
                f"expected a code cell reference, got {first.text!r}", first.span
            )
        texts = []
        while (tok := self.peek()) is not None and tok.type == "~":
            self.take()
            ref_tok = self.take()
            if ref_tok.type != "cell":
                raise ScriptSyntaxError(
                    f"expected a text cell reference after '~', got {ref_tok.text!r}",
                    ref_tok.span,
                )
            ref = CellRef.parse(ref_tok.text)
            if ref.kind != "text":
                raise ScriptSyntaxError(
                    f"'~' must be followed by a text cell reference, got {ref_tok.text!r}",
                    ref_tok.span,
                )
            texts.append(ref)
        return CellNode(code, tuple(texts))


def parse_script(text: str) -> Node:
    """Parse script source into an AST, or raise one positioned syntax error."""
    return _Parser(text).parse_script()


# ---------------------------------------------------------------------------
# Validation


Severity = Literal["error", "warning"]


@dataclass(frozen=True)
class Issue:
    severity: Severity
    message: str
    ref: CellRef | None = None


@dataclass(frozen=True)
class ValidationReport:
    issues: tuple[Issue, ...] = ()

    @property
    def ok(self) -> bool:
        return all(i.severity != "error" for i in self.issues)

    def errors(self) -> tuple[Issue, ...]:
        return tuple(i for i in self.issues if i.severity == "error")

    def warnings(self) -> tuple[Issue, ...]:
        return tuple(i for i in self.issues if i.severity == "warning")


def validate_script(ast: Node, doc: NotebookDoc) -> ValidationReport:
    """Check a script against a notebook's cell structure.

    Errors: references out of range, or pointing at a cell of the wrong
    kind.  Warnings: notebook code cells the scenario never executes, and
    text cells associated with more than one distinct code cell.
    """
    issues: list[Issue] = []

    def check(ref: CellRef) -> bool:
        if ref.index >= len(doc):
            issues.append(Issue("error", f"{ref} out of range", ref))
            return False
        actual = doc.cells[ref.index].kind
        if actual != ref.kind:
            wanted = "a code cell" if ref.kind == "code" else "a text cell"
            issues.append(Issue("error", f"{ref} is not {wanted}", ref))
            return False
        return True

    referenced: set[CellRef] = set()
    text_to_codes: dict[CellRef, set[CellRef]] = {}
    for cell in iter_cell_nodes(ast):
        if check(cell.code):
            referenced.add(cell.code)
        for text in cell.texts:
            check(text)
            text_to_codes.setdefault(text, set()).add(cell.code)

    for cell in doc.cells:
        if cell.kind == "code" and cell.ref not in referenced:
            issues.append(
                Issue("warning", f"{cell.ref} is never executed by the scenario", cell.ref)
            )
    for text, codes in sorted(text_to_codes.items()):
        if len(codes) > 1:
            cells = ", ".join(str(c) for c in sorted(codes))
            issues.append(
                Issue("warning", f"{text} is associated with several code cells ({cells})", text)
            )

    return ValidationReport(tuple(dict.fromkeys(issues)))
