"""RePair as a global grammar-based compressor.

Two selection policies share one loop: ``MAXIMAL_STRING`` replaces a most
frequent maximal string, ``DIGRAM`` replaces a most frequent digram. Counts
always mean the maximum number of pairwise non-overlapping occurrences summed
over all rule bodies; occurrences never cross a body boundary. Ties go to the
leftmost first occurrence in body scan order (start rule, then rules in
creation order) and replacement is greedy left to right.

Rule bodies are kept as lists of maximal runs ``(symbol, count)``. A digram
``xy`` with ``x != y`` occurs exactly once per run boundary and ``xx`` occurs
``count // 2`` times per run, so one round costs time linear in the number of
runs rather than in the number of symbols. The witness words consist of a
handful of huge unary blocks, which this keeps cheap.
"""

from __future__ import annotations

import enum
from collections import defaultdict
from dataclasses import dataclass
from itertools import accumulate
from typing import Callable, Iterator, Sequence

from .slp import SLP, CapacityError, Production, Symbol, default_budget, format_terminal
from .words import Word, as_runs, word_length

# internal symbol encoding: bytes are 0..255, nonterminal id i is _NT + i
_NT = 256


class Variant(enum.Enum):
    MAXIMAL_STRING = "mg"
    DIGRAM = "digram"


@dataclass(frozen=True)
class Candidate:
    string: tuple[Symbol, ...]
    count: int
    first_pos: tuple[int, int]  # (index in body scan order, offset in that body)


@dataclass(frozen=True)
class RoundTrace:
    round: int
    chosen: Candidate
    new_nonterminal: int
    size_before: int
    size_after: int
    replaced_occurrences: int

    def format(self, slp: SLP | None = None) -> str:
        def name(sym: Symbol) -> str:
            if not sym.nt:
                return format_terminal(sym.value)
            return slp.name(sym.value) if slp is not None else _default_name(sym.value)

        chosen = " ".join(name(s) for s in self.chosen.string)
        return (
            f'round={self.round} chosen="{chosen}" count={self.chosen.count} '
            f"fresh={name(Symbol(True, self.new_nonterminal))} "
            f"size_before={self.size_before} size_after={self.size_after}"
        )


def _default_name(ident: int) -> str:
    return "S" if ident == 0 else f"X{ident}"


def count_nonoverlapping(needle: Sequence, haystack: Sequence) -> int:
    """Maximum number of pairwise disjoint occurrences (greedy from the left)."""
    m = len(needle)
    if m < 1:
        raise ValueError("needle must be nonempty")
    needle = list(needle)
    hay = list(haystack)
    count = i = 0
    while i + m <= len(hay):
        if hay[i:i + m] == needle:
            count += 1
            i += m
        else:
            i += 1
    return count


def _to_internal(sym: Symbol) -> int:
    return _NT + sym.value if sym.nt else sym.value


def _to_symbol(s: int) -> Symbol:
    return Symbol(True, s - _NT) if s >= _NT else Symbol(False, s)


class _Cand:
    """A candidate string in run form with its anchor occurrences.

    Unary strings ``x^e`` are anchored at every run of ``x`` with length >= e.
    Multi-run strings are anchored at the run whose tail they start in; each
    anchor is exactly one occurrence.
    """

    __slots__ = ("runs", "anchors", "count", "selected", "first", "length")

    def __init__(self, runs, anchors, count, selected, first):
        self.runs = runs
        self.anchors = anchors
        self.count = count
        self.selected = selected
        self.first = first
        self.length = sum(e for _, e in runs)

    def symbols(self) -> tuple[int, ...]:
        return tuple(s for s, e in self.runs for _ in range(e))


class RePair:
    """Mutable compression state; one instance per run."""

    def __init__(self, bodies: Sequence[Sequence[tuple[int, int]]], heads: Sequence[int],
                 next_id: int, names: dict[int, str] | None = None):
        self.syms: list[list[int]] = [[s for s, _ in body] for body in bodies]
        self.lens: list[list[int]] = [[n for _, n in body] for body in bodies]
        self.heads = list(heads)
        self.next_id = next_id
        self.names = dict(names or {})
        self.size = sum(sum(l) for l in self.lens)
        self.rounds = 0
        self._offs: list[list[int]] = []

    @classmethod
    def from_word(cls, word: Word) -> RePair:
        return cls([as_runs(word)], [0], 1, {0: "S"})

    @classmethod
    def from_slp(cls, slp: SLP) -> RePair:
        order = sorted(slp.productions, key=lambda p: p.head != slp.start)
        bodies = []
        for _, body in order:
            runs: list[tuple[int, int]] = []
            for sym in body:
                s = _to_internal(sym)
                if runs and runs[-1][0] == s:
                    runs[-1] = (s, runs[-1][1] + 1)
                else:
                    runs.append((s, 1))
            bodies.append(runs)
        next_id = max(slp.names, default=0) + 1
        return cls(bodies, [p.head for p in order], next_id, slp.names)

    # -- counting ---------------------------------------------------------

    def _refresh_offsets(self) -> None:
        self._offs = [list(accumulate(lens, initial=0)) for lens in self.lens]

    def _digrams(self) -> list[_Cand]:
        uni: dict[int, list[tuple[int, int]]] = defaultdict(list)
        pair: dict[tuple[int, int], list[tuple[int, int]]] = defaultdict(list)
        for b, (syms, lens) in enumerate(zip(self.syms, self.lens)):
            for j, s in enumerate(syms):
                if lens[j] >= 2:
                    uni[s].append((b, j))
                if j:
                    pair[(syms[j - 1], s)].append((b, j - 1))
        cands = [self._unary((x, 2), anchors) for x, anchors in uni.items()]
        for (x, y), anchors in pair.items():
            # distinct neighbours never overlap: every anchor is selected
            b, j = anchors[0]
            first = (b, self._offs[b][j + 1] - 1)
            cands.append(_Cand(((x, 1), (y, 1)), anchors, len(anchors), anchors, first))
        return cands

    def _unary(self, run: tuple[int, int], anchors: list[tuple[int, int]]) -> _Cand:
        e = run[1]
        lens = self.lens
        count = sum(lens[b][j] // e for b, j in anchors)
        b, j = anchors[0]
        return _Cand((run,), anchors, count, anchors, (b, self._offs[b][j]))

    def _multi(self, runs, anchors: list[tuple[int, int]], need: int) -> _Cand | None:
        if len(anchors) < need:
            return None
        r = len(runs)
        e1, er = runs[0][1], runs[-1][1]
        lens, offs = self.lens, self._offs
        selected = []
        last_b, last_end = -1, -1
        for b, j in anchors:
            start = offs[b][j + 1] - e1
            if b != last_b or start >= last_end:
                selected.append((b, j))
                last_b, last_end = b, offs[b][j + r - 1] + er
        if len(selected) < need:
            return None
        b, j = anchors[0]
        return _Cand(runs, anchors, len(selected), selected, (b, offs[b][j + 1] - e1))

    def _extensions(self, cand: _Cand, need: int) -> Iterator[_Cand]:
        runs = cand.runs
        r = len(runs)
        x, e = runs[-1]
        syms, lens = self.syms, self.lens
        same: list[tuple[int, int]] = []
        grow: dict[int, list[tuple[int, int]]] = defaultdict(list)
        for b, j in cand.anchors:
            q = j + r - 1
            if lens[b][q] > e:
                same.append((b, j))
            # a multi-run string can only continue into the next run when it
            # consumed the whole of its last run
            if (r == 1 or lens[b][q] == e) and q + 1 < len(syms[b]):
                grow[syms[b][q + 1]].append((b, j))
        if same:
            if r == 1:
                c = self._unary((x, e + 1), same)
                if c.count >= need:
                    yield c
            else:
                c = self._multi(runs[:-1] + ((x, e + 1),), same, need)
                if c is not None:
                    yield c
        for y, anchors in grow.items():
            c = self._multi(runs + ((y, 1),), anchors, need)
            if c is not None:
                yield c

    def find(self, runs: tuple[tuple[int, int], ...]) -> _Cand | None:
        """Locate an arbitrary string given in run form; offsets must be fresh."""
        anchors = []
        r = len(runs)
        for b, (syms, lens) in enumerate(zip(self.syms, self.lens)):
            for j in range(len(syms) - r + 1):
                if syms[j] != runs[0][0] or lens[j] < runs[0][1]:
                    continue
                if r == 1:
                    anchors.append((b, j))
                    continue
                q = j + r - 1
                if syms[q] != runs[-1][0] or lens[q] < runs[-1][1]:
                    continue
                if all(syms[j + i] == s and lens[j + i] == e for i, (s, e) in enumerate(runs[1:-1], 1)):
                    anchors.append((b, j))
        if not anchors:
            return None
        if r == 1:
            return self._unary(runs[0], anchors)
        return self._multi(runs, anchors, 0)

    # -- selection --------------------------------------------------------

    def _best_digram(self) -> _Cand | None:
        self._refresh_offsets()
        cands = self._digrams()
        if not cands:
            return None
        best = min(cands, key=lambda c: (-c.count, c.first))
        return best if best.count >= 2 else None

    def _best_maximal_string(self) -> _Cand | None:
        self._refresh_offsets()
        cands = self._digrams()
        t = max((c.count for c in cands), default=0)
        if t < 2:
            return None
        frontier = [c for c in cands if c.count == t]
        while True:
            longer = [ext for c in frontier for ext in self._extensions(c, t)]
            if not longer:
                break
            frontier = longer
        return min(frontier, key=lambda c: c.first)

    def select(self, variant: Variant) -> _Cand | None:
        if variant is Variant.DIGRAM:
            return self._best_digram()
        return self._best_maximal_string()

    def public(self, cand: _Cand) -> Candidate:
        return Candidate(tuple(_to_symbol(s) for s in cand.symbols()), cand.count, cand.first)

    # -- replacement ------------------------------------------------------

    def replace(self, cand: _Cand, fresh: int | None = None) -> int:
        """Replace the selected occurrences of ``cand`` by a fresh nonterminal id."""
        if cand.count < 2:
            raise ValueError("replacement needs at least two occurrences")
        fresh = self.next_id if fresh is None else fresh
        self.next_id = max(self.next_id, fresh + 1)
        X = _NT + fresh
        runs = cand.runs
        r = len(runs)
        by_body: dict[int, list[int]] = defaultdict(list)
        for b, j in cand.selected:
            by_body[b].append(j)

        for b, js in by_body.items():
            syms, lens = self.syms[b], self.lens[b]
            out_s: list[int] = []
            out_l: list[int] = []

            def emit(s: int, n: int) -> None:
                if n <= 0:
                    return
                if out_s and out_s[-1] == s:
                    out_l[-1] += n
                else:
                    out_s.append(s)
                    out_l.append(n)

            if r == 1:
                x, e = runs[0]
                chosen = set(js)
                for j, (s, n) in enumerate(zip(syms, lens)):
                    if j in chosen:
                        emit(X, n // e)
                        emit(s, n % e)
                    else:
                        emit(s, n)
            else:
                e1, er = runs[0][1], runs[-1][1]
                chosen = set(js)
                j = head = 0
                while j < len(syms):
                    if j in chosen:
                        emit(syms[j], lens[j] - head - e1)
                        emit(X, 1)
                        head = er
                        j += r - 1
                    else:
                        emit(syms[j], lens[j] - head)
                        head = 0
                        j += 1
            self.syms[b], self.lens[b] = out_s, out_l

        self.syms.append([s for s, _ in runs])
        self.lens.append([e for _, e in runs])
        self.heads.append(fresh)
        self.size -= cand.count * (cand.length - 1) - cand.length
        return fresh

    # -- driver -----------------------------------------------------------

    def run(self, variant: Variant, trace: Callable[[RoundTrace], None] | None = None,
            max_rounds: int | None = None) -> None:
        while max_rounds is None or self.rounds < max_rounds:
            cand = self.select(variant)
            if cand is None:
                break
            before = self.size
            fresh = self.replace(cand)
            self.rounds += 1
            if trace is not None:
                trace(RoundTrace(self.rounds, self.public(cand), fresh, before, self.size, cand.count))

    def to_slp(self) -> SLP:
        prods = []
        for head, syms, lens in zip(self.heads, self.syms, self.lens):
            body = tuple(_to_symbol(s) for s, n in zip(syms, lens) for _ in range(n))
            prods.append(Production(head, body))
        names = {h: self.names.get(h, _default_name(h)) for h in self.heads}
        return SLP(tuple(prods), self.heads[0], names)

    def start_runs(self) -> list[tuple[Symbol, int]]:
        return [(_to_symbol(s), n) for s, n in zip(self.syms[0], self.lens[0])]


def compress(word: Word, variant: Variant = Variant.MAXIMAL_STRING,
             trace: Callable[[RoundTrace], None] | None = None,
             max_rounds: int | None = None, budget: int | None = None) -> SLP:
    """Compress ``word`` (bytes or runs) to an SLP with the given selection policy."""
    budget = default_budget() if budget is None else budget
    n = word_length(word)
    if n < 1:
        raise ValueError("cannot compress the empty word")
    if n > budget:
        raise CapacityError(n, budget, "input")
    state = RePair.from_word(word)
    state.run(variant, trace, max_rounds)
    return state.to_slp()


def best_digram(slp: SLP) -> Candidate | None:
    state = RePair.from_slp(slp)
    cand = state._best_digram()
    return None if cand is None else state.public(cand)


def select_maximal_string(slp: SLP) -> Candidate | None:
    state = RePair.from_slp(slp)
    cand = state._best_maximal_string()
    return None if cand is None else state.public(cand)


def replace_left_to_right(slp: SLP, candidate: Candidate, fresh: int) -> SLP:
    """Replace greedy left-to-right occurrences of ``candidate.string`` by ``fresh``."""
    if candidate.count < 2:
        raise ValueError("replacement needs at least two occurrences")
    state = RePair.from_slp(slp)
    state._refresh_offsets()
    target = tuple(_to_internal(s) for s in candidate.string)
    runs: list[tuple[int, int]] = []
    for s in target:
        if runs and runs[-1][0] == s:
            runs[-1] = (s, runs[-1][1] + 1)
        else:
            runs.append((s, 1))
    cand = state.find(tuple(runs))
    if cand is None or cand.count < 2:
        raise ValueError("candidate string does not occur twice without overlap")
    state.replace(cand, fresh)
    return state.to_slp()
