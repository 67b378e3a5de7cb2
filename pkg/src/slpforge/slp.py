"""Straight-line programs: representation, validation, expansion and text format.

An SLP is a list of productions ``A -> w`` with exactly one production per
nonterminal and an acyclic reference relation; it derives a single word.
Nonterminals are dense integer ids, terminals are single bytes.
"""

from __future__ import annotations

import os
import re
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

DEFAULT_BUDGET = 2**31
BUDGET_ENV = "SLPFORGE_BUDGET"

# nonterminals whose expansion fits here are cached as bytes during expand()
_MEMO_LIMIT = 1 << 16


class CapacityError(Exception):
    """An output or input would exceed the configured byte budget."""

    def __init__(self, needed: int, budget: int, what: str = "expansion"):
        super().__init__(f"{what} of {needed} bytes exceeds the limit of {budget} bytes")
        self.needed = needed
        self.budget = budget


class SLPError(ValueError):
    """Raised when an SLP is structurally invalid for the requested operation."""


class ParseError(SLPError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


def default_budget() -> int:
    value = os.environ.get(BUDGET_ENV)
    return int(value) if value else DEFAULT_BUDGET


class Symbol(NamedTuple):
    """A terminal byte (``nt=False``) or a nonterminal id (``nt=True``)."""

    nt: bool
    value: int

    @classmethod
    def terminal(cls, byte: int) -> Symbol:
        return cls(False, byte)

    @classmethod
    def nonterminal(cls, ident: int) -> Symbol:
        return cls(True, ident)

    def __repr__(self) -> str:
        return f"N{self.value}" if self.nt else repr(bytes([self.value]))[1:]


def terminals(word: bytes | str) -> tuple[Symbol, ...]:
    if isinstance(word, str):
        word = word.encode("latin-1")
    return tuple(Symbol(False, b) for b in word)


class Production(NamedTuple):
    head: int
    body: tuple[Symbol, ...]


@dataclass(frozen=True, eq=True)
class SLP:
    """Productions in creation order plus the start nonterminal.

    ``names`` maps ids to display names; missing ids fall back to ``S`` for
    the start and ``X<id>`` otherwise. Construction does not validate, see
    :func:`validate`.
    """

    productions: tuple[Production, ...]
    start: int
    names: dict[int, str] = field(default_factory=dict, compare=True)

    def __post_init__(self):
        prods = tuple(Production(p.head, tuple(p.body)) for p in self.productions)
        object.__setattr__(self, "productions", prods)
        names = dict(self.names)
        for head, body in prods:
            for ident in [head] + [s.value for s in body if s.nt]:
                if ident not in names:
                    names[ident] = "S" if ident == self.start else f"X{ident}"
        names.setdefault(self.start, "S")
        object.__setattr__(self, "names", names)

    def name(self, ident: int) -> str:
        if ident in self.names:
            return self.names[ident]
        return "S" if ident == self.start else f"X{ident}"

    @property
    def rules(self) -> dict[int, tuple[Symbol, ...]]:
        """Head -> body; on duplicate heads the first production wins."""
        out: dict[int, tuple[Symbol, ...]] = {}
        for head, body in self.productions:
            out.setdefault(head, body)
        return out

    @property
    def alphabet(self) -> frozenset[int]:
        return frozenset(s.value for p in self.productions for s in p.body if not s.nt)

    @property
    def size(self) -> int:
        return sum(len(p.body) for p in self.productions)

    def body_of(self, name: str) -> tuple[Symbol, ...]:
        for head, body in self.productions:
            if self.name(head) == name:
                return body
        raise KeyError(name)

    def __str__(self) -> str:
        return serialize(self)


def size(slp: SLP) -> int:
    return slp.size


# ---------------------------------------------------------------------------
# validation


@dataclass
class ValidationReport:
    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok


def _find_cycle(rules: dict[int, tuple[Symbol, ...]]) -> list[int] | None:
    WHITE, GREY, BLACK = 0, 1, 2
    color = dict.fromkeys(rules, WHITE)
    for root in rules:
        if color[root] != WHITE:
            continue
        color[root] = GREY
        path = [root]
        stack = [iter(rules[root])]
        while stack:
            for sym in stack[-1]:
                if not sym.nt or sym.value not in rules:
                    continue
                c = color[sym.value]
                if c == GREY:
                    return path[path.index(sym.value):] + [sym.value]
                if c == WHITE:
                    color[sym.value] = GREY
                    path.append(sym.value)
                    stack.append(iter(rules[sym.value]))
                    break
            else:
                stack.pop()
                color[path.pop()] = BLACK
    return None


def validate(slp: SLP) -> ValidationReport:
    report = ValidationReport()
    heads = {p.head for p in slp.productions}
    seen: set[int] = set()
    for idx, (head, body) in enumerate(slp.productions):
        if head in seen:
            report.violations.append(f"duplicate production for {slp.name(head)} (rule #{idx + 1})")
        seen.add(head)
        if not body:
            report.violations.append(f"empty body in rule {slp.name(head)} (rule #{idx + 1})")
        for sym in body:
            if sym.nt and sym.value not in heads:
                report.violations.append(
                    f"undefined nonterminal {slp.name(sym.value)} in rule {slp.name(head)}"
                )
            elif not sym.nt and not 0 <= sym.value < 256:
                report.violations.append(f"terminal {sym.value} is not a byte in rule {slp.name(head)}")
    if slp.start not in seen:
        report.violations.append(f"start nonterminal {slp.name(slp.start)} has no production")
    cycle = _find_cycle(slp.rules)
    if cycle:
        report.violations.append("cycle: " + " -> ".join(slp.name(i) for i in cycle))
    return report


def check(slp: SLP) -> SLP:
    report = validate(slp)
    if not report.ok:
        raise SLPError("; ".join(report.violations))
    return slp


# ---------------------------------------------------------------------------
# expansion


def _postorder(rules: dict[int, tuple[Symbol, ...]], root: int) -> list[int]:
    """Nonterminals reachable from ``root``, children before parents."""
    if root not in rules:
        raise SLPError(f"undefined nonterminal id {root}")
    order: list[int] = []
    done: set[int] = set()
    active = {root}
    stack = [(root, iter(rules[root]))]
    while stack:
        head, it = stack[-1]
        for sym in it:
            if not sym.nt or sym.value in done:
                continue
            if sym.value in active:
                raise SLPError("cyclic grammar")
            if sym.value not in rules:
                raise SLPError(f"undefined nonterminal id {sym.value}")
            active.add(sym.value)
            stack.append((sym.value, iter(rules[sym.value])))
            break
        else:
            stack.pop()
            active.discard(head)
            done.add(head)
            order.append(head)
    return order


def expansion_lengths(slp: SLP, nt: int | None = None) -> dict[int, int]:
    rules = slp.rules
    lengths: dict[int, int] = {}
    for head in _postorder(rules, slp.start if nt is None else nt):
        lengths[head] = sum(lengths[s.value] if s.nt else 1 for s in rules[head])
    return lengths


def length(slp: SLP, nt: int | None = None) -> int:
    nt = slp.start if nt is None else nt
    return expansion_lengths(slp, nt)[nt]


def expand(slp: SLP, nt: int | None = None, budget: int | None = None) -> bytes:
    """Return val(nt) (default: the start nonterminal) as bytes."""
    nt = slp.start if nt is None else nt
    budget = default_budget() if budget is None else budget
    rules = slp.rules
    lengths = expansion_lengths(slp, nt)
    if lengths[nt] > budget:
        raise CapacityError(lengths[nt], budget)

    memo: dict[int, bytes] = {}
    for head in lengths:  # postorder, so children are memoized first
        if lengths[head] <= _MEMO_LIMIT:
            memo[head] = b"".join(memo[s.value] if s.nt else bytes((s.value,)) for s in rules[head])
    if nt in memo:
        return memo[nt]

    out = bytearray()
    stack = [iter(rules[nt])]
    while stack:
        for sym in stack[-1]:
            if not sym.nt:
                out.append(sym.value)
            elif sym.value in memo:
                out += memo[sym.value]
            else:
                stack.append(iter(rules[sym.value]))
                break
        else:
            stack.pop()
    return bytes(out)


def _append_runs(acc: list[tuple[int, int]], runs: Iterable[tuple[int, int]]) -> None:
    for sym, count in runs:
        if acc and acc[-1][0] == sym:
            acc[-1] = (sym, acc[-1][1] + count)
        else:
            acc.append((sym, count))


def expand_runs(slp: SLP, nt: int | None = None) -> tuple[tuple[int, int], ...]:
    """val(nt) as maximal runs ``(byte, count)`` without materializing the word."""
    nt = slp.start if nt is None else nt
    rules = slp.rules
    memo: dict[int, tuple[tuple[int, int], ...]] = {}
    for head in _postorder(rules, nt):
        acc: list[tuple[int, int]] = []
        for sym in rules[head]:
            _append_runs(acc, memo[sym.value] if sym.nt else ((sym.value, 1),))
        memo[head] = tuple(acc)
    return memo[nt]


# ---------------------------------------------------------------------------
# text format

_NAME_RE = re.compile(r"[A-Za-z][A-Za-z0-9_]*")
_TERM_RE = re.compile(r"'(\\x[0-9A-Fa-f]{2}|\\[\\'nrt]|[^\\'])'")
_ESCAPES = {"\\\\": "\\", "\\'": "'", "\\n": "\n", "\\r": "\r", "\\t": "\t"}


def format_terminal(byte: int) -> str:
    ch = chr(byte)
    for esc, raw in _ESCAPES.items():
        if ch == raw:
            return f"'{esc}'"
    if 0x20 <= byte < 0x7F:
        return f"'{ch}'"
    return f"'\\x{byte:02x}'"


def format_symbol(slp: SLP, sym: Symbol) -> str:
    return slp.name(sym.value) if sym.nt else format_terminal(sym.value)


def format_body(slp: SLP, body: Sequence[Symbol]) -> str:
    return " ".join(format_symbol(slp, s) for s in body)


def serialize(slp: SLP) -> str:
    """Start production first, then the rest in creation order, one per line."""
    start = [p for p in slp.productions if p.head == slp.start][:1]
    rest = [p for p in slp.productions if not (start and p is start[0])]
    return "\n".join(f"{slp.name(h)} -> {format_body(slp, b)}" for h, b in start + rest)


def _unescape(token: str) -> int:
    if token.startswith("\\x"):
        return int(token[2:], 16)
    if token.startswith("\\"):
        return ord(_ESCAPES[token])
    code = ord(token)
    if code > 0xFF:
        raise ValueError("terminal is not a byte")
    return code


def parse(text: str) -> SLP:
    """Parse the one-production-per-line format; the first production is the start rule.

    Raises ParseError with a line/column on malformed input and SLPError if
    the grammar fails validation (duplicate heads, cycles, undefined names).
    """
    ids: dict[str, int] = {}
    productions: list[Production] = []
    lines: list[tuple[int, str, list[tuple[int, str, str]]]] = []

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw)
        if not line.strip():
            continue
        m = re.match(r"\s*([A-Za-z][A-Za-z0-9_]*)\s*->", line)
        if not m:
            col = len(line) - len(line.lstrip()) + 1
            raise ParseError("expected 'HEAD ->'", lineno, col)
        head = m.group(1)
        pos = m.end()
        items: list[tuple[int, str, str]] = []
        while True:
            while pos < len(line) and line[pos].isspace():
                pos += 1
            if pos >= len(line):
                break
            tm = _TERM_RE.match(line, pos)
            nm = _NAME_RE.match(line, pos)
            if tm:
                items.append((pos + 1, "t", tm.group(1)))
                pos = tm.end()
            elif nm:
                items.append((pos + 1, "n", nm.group(0)))
                pos = nm.end()
            else:
                raise ParseError(f"unexpected character {line[pos]!r}", lineno, pos + 1)
            if pos < len(line) and not line[pos].isspace():
                raise ParseError("items must be separated by whitespace", lineno, pos + 1)
        if not items:
            raise ParseError("empty right-hand side", lineno, pos + 1)
        ids.setdefault(head, len(ids))
        lines.append((lineno, head, items))

    if not lines:
        raise ParseError("no productions", 1, 1)

    for lineno, head, items in lines:
        body = []
        for col, kind, tok in items:
            if kind == "t":
                try:
                    body.append(Symbol(False, _unescape(tok)))
                except ValueError as exc:
                    raise ParseError(str(exc), lineno, col) from None
            else:
                body.append(Symbol(True, ids.setdefault(tok, len(ids))))
        productions.append(Production(ids[head], tuple(body)))

    names = {i: n for n, i in ids.items()}
    return check(SLP(tuple(productions), ids[lines[0][1]], names))


def _strip_comment(line: str) -> str:
    """Drop a trailing ``#`` comment, ignoring ``#`` inside quoted terminals."""
    pos = 0
    while pos < len(line):
        tm = _TERM_RE.match(line, pos)
        if tm:
            pos = tm.end()
        elif line[pos] == "#":
            return line[:pos]
        else:
            pos += 1
    return line


def from_rules(rules: Sequence[tuple[str, Sequence[str | int]]]) -> SLP:
    """Build an SLP from ``(name, items)`` pairs, the first being the start rule.

    Items that name a rule head are nonterminals; any other string is a run of
    terminal characters and ints are terminal bytes. Handy in tests.
    """
    ids = {name: i for i, (name, _) in enumerate(rules)}
    prods = []
    for name, items in rules:
        body: list[Symbol] = []
        for item in items:
            if isinstance(item, int):
                body.append(Symbol(False, item))
            elif item in ids:
                body.append(Symbol(True, ids[item]))
            else:
                body.extend(terminals(item))
        prods.append(Production(ids[name], tuple(body)))
    return SLP(tuple(prods), 0, {i: n for n, i in ids.items()})
