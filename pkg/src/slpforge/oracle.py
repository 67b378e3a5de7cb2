"""Exact smallest SLPs for tiny words, and an exhaustive audit of RePair against them.

In a smallest SLP every non-start nonterminal is used at least twice (else
inlining it saves a symbol) and distinct nonterminals derive distinct words,
so the grammar is determined by a set F of factors of w that occur at least
twice without overlap. Given F, each factor's cheapest body is a shortest
parse over terminals and strictly shorter members of F, and the start body a
shortest parse of w over terminals and all of F. We branch over F, shortest
factors first, and bound each branch by the best start parse still possible.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import product

from .analysis import lemma3_lower_bound
from .repair import Variant, compress, count_nonoverlapping
from .slp import SLP, CapacityError, Production, Symbol, expand

MAX_ORACLE_LEN = 12
MAX_AUDIT_LEN = 10


@dataclass(frozen=True)
class OracleResult:
    word: bytes
    g: int
    witness: SLP


def _parse(target: bytes, factors: list[bytes]) -> tuple[int, list[bytes]]:
    """Fewest pieces spelling ``target``; pieces are single bytes or members of ``factors``."""
    n = len(target)
    INF = n + 1
    cost = [0] + [INF] * n
    back: list[bytes] = [b""] * (n + 1)
    for i in range(n):
        if cost[i] >= INF:
            continue
        c = cost[i] + 1
        if c < cost[i + 1]:
            cost[i + 1], back[i + 1] = c, target[i:i + 1]
        for f in factors:
            j = i + len(f)
            if j <= n and c < cost[j] and target.startswith(f, i):
                cost[j], back[j] = c, f
    pieces = []
    j = n
    while j:
        pieces.append(back[j])
        j -= len(back[j])
    return cost[n], pieces[::-1]


def candidate_factors(word: bytes) -> list[bytes]:
    seen = set()
    out = []
    for length in range(2, len(word) // 2 + 1):
        for i in range(len(word) - length + 1):
            f = word[i:i + length]
            if f not in seen:
                seen.add(f)
                if count_nonoverlapping(f, word) >= 2:
                    out.append(f)
    return out


def smallest_slp(word: bytes | str) -> OracleResult:
    if isinstance(word, str):
        word = word.encode("latin-1")
    if not 1 <= len(word) <= MAX_ORACLE_LEN:
        raise CapacityError(len(word), MAX_ORACLE_LEN, "oracle input")

    cands = candidate_factors(word)
    floor = lemma3_lower_bound(word)
    best = [len(word), []]  # S -> w

    def search(idx: int, chosen: list[bytes], cost: int) -> None:
        if best[0] <= floor:
            return
        optimistic, _ = _parse(word, chosen + cands[idx:])
        if cost + optimistic >= best[0]:
            return
        if idx == len(cands):
            best[0], best[1] = cost + optimistic, list(chosen)
            return
        f = cands[idx]
        body_cost, _ = _parse(f, chosen)
        chosen.append(f)
        search(idx + 1, chosen, cost + body_cost)
        chosen.pop()
        search(idx + 1, chosen, cost)

    search(0, [], 0)
    return OracleResult(word, best[0], _witness(word, best[1]))


def _witness(word: bytes, factors: list[bytes]) -> SLP:
    ids = {f: i for i, f in enumerate(factors, start=1)}

    def body(target: bytes, allowed: list[bytes]) -> tuple[Symbol, ...]:
        _, pieces = _parse(target, allowed)
        return tuple(Symbol(True, ids[p]) if p in ids and len(p) > 1 else Symbol(False, p[0]) for p in pieces)

    prods = [Production(0, body(word, factors))]
    for f in factors:
        prods.append(Production(ids[f], body(f, [x for x in factors if len(x) < len(f)])))
    return SLP(tuple(prods), 0)


@dataclass(frozen=True)
class AuditRow:
    word: bytes
    g: int
    repair_mg: int
    repair_digram: int
    lemma3_lb: int

    @property
    def ratio(self) -> float:
        return self.repair_mg / self.g


@dataclass
class AuditReport:
    rows: list[AuditRow] = field(default_factory=list)
    violations: list[str] = field(default_factory=list)

    @property
    def max_ratio(self) -> float:
        return max((r.ratio for r in self.rows), default=0.0)

    @property
    def worst(self) -> AuditRow | None:
        return max(self.rows, key=lambda r: r.ratio, default=None)

    def csv(self) -> str:
        lines = ["word,g,repair_mg,repair_digram,lemma3_lb"]
        lines += [f"{r.word.decode('latin-1')},{r.g},{r.repair_mg},{r.repair_digram},{r.lemma3_lb}"
                  for r in self.rows]
        return "\n".join(lines) + "\n"


def audit_word(word: bytes) -> tuple[AuditRow, list[str]]:
    problems = []
    res = smallest_slp(word)
    if expand(res.witness) != word or res.witness.size != res.g:
        problems.append(f"{word!r}: oracle witness is inconsistent")
    mg = compress(word, Variant.MAXIMAL_STRING)
    dg = compress(word, Variant.DIGRAM)
    for label, slp in (("mg", mg), ("digram", dg)):
        if expand(slp) != word:
            problems.append(f"{word!r}: {label} output does not expand to the input")
    lb = lemma3_lower_bound(word)
    row = AuditRow(word, res.g, mg.size, dg.size, lb)
    if not lb <= res.g <= min(len(word), mg.size, dg.size):
        problems.append(f"{word!r}: sandwich broken lb={lb} g={res.g} mg={mg.size} digram={dg.size}")
    return row, problems


def audit_corpus(max_len: int, alphabet: bytes = b"ab", jobs: int = 1) -> AuditReport:
    """Every word over ``alphabet`` of length 1..max_len, checked against the oracle."""
    if max_len > MAX_AUDIT_LEN:
        raise CapacityError(max_len, MAX_AUDIT_LEN, "audit word length")
    words = [bytes(t) for n in range(1, max_len + 1) for t in product(alphabet, repeat=n)]
    if jobs > 1:
        with ProcessPoolExecutor(jobs) as pool:
            results = list(pool.map(audit_word, words, chunksize=32))
    else:
        results = [audit_word(w) for w in words]
    report = AuditReport()
    for row, problems in results:
        report.rows.append(row)
        report.violations.extend(problems)
    return report
