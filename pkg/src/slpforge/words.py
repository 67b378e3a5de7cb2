"""Word files: raw bytes, or run-length text like ``a*20 b a*41``."""

from __future__ import annotations

from itertools import groupby
from pathlib import Path
from typing import Iterable, Sequence, Union

from .slp import CapacityError, default_budget

# maximal runs (byte, count), count >= 1, adjacent bytes distinct
RleWord = tuple[tuple[int, int], ...]
Word = Union[bytes, RleWord]


def to_runs(word: bytes) -> RleWord:
    return tuple((b, sum(1 for _ in grp)) for b, grp in groupby(word))


def normalize_runs(runs: Iterable[tuple[int, int]]) -> RleWord:
    out: list[tuple[int, int]] = []
    for b, n in runs:
        if n <= 0:
            continue
        if out and out[-1][0] == b:
            out[-1] = (b, out[-1][1] + n)
        else:
            out.append((b, n))
    return tuple(out)


def runs_length(runs: Sequence[tuple[int, int]]) -> int:
    return sum(n for _, n in runs)


def from_runs(runs: Sequence[tuple[int, int]], budget: int | None = None) -> bytes:
    budget = default_budget() if budget is None else budget
    total = runs_length(runs)
    if total > budget:
        raise CapacityError(total, budget, "word")
    return b"".join(bytes((b,)) * n for b, n in runs)


def word_length(word: Word) -> int:
    return len(word) if isinstance(word, (bytes, bytearray)) else runs_length(word)


def as_runs(word: Word) -> RleWord:
    if isinstance(word, (bytes, bytearray)):
        return to_runs(bytes(word))
    return normalize_runs(word)


def _format_char(b: int) -> str:
    ch = chr(b)
    if ch.isspace() or ch in "*\\" or not 0x21 <= b < 0x7F:
        return f"\\x{b:02x}"
    return ch


def format_rle(runs: Sequence[tuple[int, int]]) -> str:
    return " ".join(_format_char(b) if n == 1 else f"{_format_char(b)}*{n}" for b, n in runs)


def parse_rle(text: str) -> RleWord:
    runs = []
    for pos, token in enumerate(text.split(), start=1):
        char, star, count = token.partition("*")
        if char.startswith("\\x") and len(char) == 4:
            try:
                b = int(char[2:], 16)
            except ValueError:
                raise ValueError(f"token {pos}: bad escape {char!r}") from None
        elif len(char) == 1 and ord(char) < 256:
            b = ord(char)
        else:
            raise ValueError(f"token {pos}: expected a single byte, got {char!r}")
        if star:
            if not count.isdigit() or int(count) < 1:
                raise ValueError(f"token {pos}: bad repeat count {count!r}")
            n = int(count)
        else:
            n = 1
        runs.append((b, n))
    return normalize_runs(runs)


def read_word(path: str | Path) -> Word:
    path = Path(path)
    if path.suffix == ".rle":
        return parse_rle(path.read_text(encoding="latin-1"))
    return path.read_bytes()


def write_word(path: str | Path, word: Word, rle: bool | None = None) -> None:
    path = Path(path)
    if rle is None:
        rle = path.suffix == ".rle"
    if rle:
        path.write_text(format_rle(as_runs(word)) + "\n", encoding="latin-1")
    else:
        path.write_bytes(word if isinstance(word, bytes) else from_runs(word))
