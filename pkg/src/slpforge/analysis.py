"""Factor-count bounds, the unary start-rule formula, round-(k-1) structure checks
and approximation-ratio tables."""

from __future__ import annotations

import csv
import io
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .repair import RePair, RoundTrace, Variant, compress
from .slp import SLP, Production, Symbol, expand_runs, validate
from .witness import A, B, MAX_K, WitnessFamily, build_family, build_small_slp, ceil_log2

HUGE_WORD = 10**6
DEFAULT_FACTOR_CAP = 64


class StructureError(ValueError):
    """The intermediate grammar does not have the shape the analysis expects."""


# ---------------------------------------------------------------------------
# distinct factors


def _codes(word: Sequence) -> np.ndarray:
    if isinstance(word, (bytes, bytearray)):
        return np.frombuffer(bytes(word), dtype=np.uint8).astype(np.int64)
    try:
        alphabet = sorted(set(word))
    except TypeError:  # unorderable symbols: counts stay exact, suffix order does not
        alphabet = list(dict.fromkeys(word))
    ids = {x: i for i, x in enumerate(alphabet)}
    return np.fromiter((ids[x] for x in word), dtype=np.int64, count=len(word))


def _doubling_ranks(codes: np.ndarray, max_level: int | None = None) -> list[np.ndarray]:
    """``levels[L][i]`` identifies ``word[i:i + 2**L]`` (truncated at the end).

    Stops early once every window is distinct, which happens for full
    suffix sorting; ``max_level`` bounds the window length instead.
    """
    n = len(codes)
    _, rank = np.unique(codes, return_inverse=True)
    levels = [rank.astype(np.int64)]
    level = 0
    while (max_level is None or level < max_level) and (1 << level) < n:
        if max_level is None and levels[-1].max() == n - 1:
            break
        h = 1 << level
        prev = levels[-1]
        second = np.full(n, -1, dtype=np.int64)
        second[:n - h] = prev[h:]
        _, rank = np.unique(prev * (n + 1) + (second + 1), return_inverse=True)
        levels.append(rank.astype(np.int64))
        level += 1
    return levels


def _windows(levels: list[np.ndarray], n: int, length: int) -> int:
    level = length.bit_length() - 1
    r = levels[level]
    m = n - length + 1
    left = r[:m]
    right = r[length - (1 << level):length - (1 << level) + m]
    return len(np.unique(left * (n + 1) + right))


def distinct_factors(word: Sequence, length: int) -> int:
    """Number of distinct factors of ``word`` of the given length."""
    if length < 1:
        raise ValueError("factor length must be >= 1")
    n = len(word)
    if length > n:
        return 0
    levels = _doubling_ranks(_codes(word), max_level=length.bit_length() - 1)
    return _windows(levels, n, length)


def suffix_array_lcp(word: Sequence) -> tuple[np.ndarray, np.ndarray]:
    """Suffix array by prefix doubling; ``lcp[i]`` is the LCP of sa[i-1] and sa[i] (lcp[0]=0)."""
    codes = _codes(word)
    n = len(codes)
    if n == 0:
        return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64)
    levels = _doubling_ranks(codes)
    sa = np.argsort(levels[-1], kind="stable")
    a, b = sa[:-1], sa[1:]
    lcp = np.zeros(n - 1, dtype=np.int64)
    for level in range(len(levels) - 1, -1, -1):
        h = 1 << level
        pa, pb = a + lcp, b + lcp
        ok = (pa + h <= n) & (pb + h <= n)
        idx = np.nonzero(ok)[0]
        same = levels[level][pa[idx]] == levels[level][pb[idx]]
        lcp[idx[same]] += h
    return sa, np.concatenate([[0], lcp])


@dataclass
class FactorStats:
    """Distinct-factor counts ``d[l]`` for l = 1..max_len (``d[0]`` unused)."""

    n: int
    d: list[int]

    @classmethod
    def of(cls, word: Sequence, max_len: int | None = None) -> FactorStats:
        n = len(word)
        if n == 0:
            return cls(0, [0])
        if max_len is not None and max_len < n:
            levels = _doubling_ranks(_codes(word), max_level=max(max_len, 1).bit_length() - 1)
            return cls(n, [0] + [_windows(levels, n, l) for l in range(1, max_len + 1)])
        _, lcp = suffix_array_lcp(word)
        # suffixes sharing a length-l prefix are contiguous in suffix order
        hist = np.bincount(lcp, minlength=n + 2)
        at_least = np.cumsum(hist[::-1])[::-1]
        d = [0] + [n - l + 1 - int(at_least[l]) for l in range(1, n + 1)]
        return cls(n, d)

    def __getitem__(self, length: int) -> int:
        if length > self.n:
            return 0
        return self.d[length]

    @property
    def max_len(self) -> int:
        return len(self.d) - 1


def lemma3_lower_bound(word: Sequence, max_len: int | None = None) -> int:
    """max over l of ceil(d_l / l): a lower bound on the smallest SLP size.

    Words longer than 10^6 symbols scan only l <= 64 unless ``max_len`` says
    otherwise; any cap keeps the bound sound.
    """
    n = len(word)
    if n < 1:
        raise ValueError("word must be nonempty")
    if max_len is None and n > HUGE_WORD:
        max_len = DEFAULT_FACTOR_CAP
    stats = FactorStats.of(word, max_len)
    return max(-(-stats[l] // l) for l in range(1, stats.max_len + 1))


def lemma3_violation(word: Sequence, grammar_size: int, lengths: Sequence[int] | None = None) -> int | None:
    """First length l with d_l > grammar_size * l, or None."""
    if lengths is None:
        stats = FactorStats.of(word)
        lengths = range(1, stats.max_len + 1)
    else:
        stats = FactorStats.of(word, max(lengths))
    for l in lengths:
        if stats[l] > grammar_size * l:
            return l
    return None


# ---------------------------------------------------------------------------
# unary inputs


def unary_predicted_slp(m: int, letter: int = A) -> SLP:
    """The grammar RePair builds for a^m: doubling rules plus a start rule
    spelling the binary digits of m below the two leading copies."""
    if m < 1:
        raise ValueError("m must be >= 1")
    a = Symbol(False, letter)
    if m <= 3:
        return SLP((Production(0, (a,) * m),), 0)
    top = m.bit_length() - 2  # floor(log m) - 1
    X = [a] + [Symbol(True, i) for i in range(1, top + 1)]
    rules = [Production(1, (a, a))] + [Production(i, (X[i - 1], X[i - 1])) for i in range(2, top + 1)]
    start = [X[top], X[top]] + [X[i] for i in range(top, -1, -1) if m >> i & 1]
    return SLP((Production(0, tuple(start)), *rules), 0)


# ---------------------------------------------------------------------------
# the grammar after k-1 rounds


@dataclass
class RoundsResult:
    family: WitnessFamily
    slp: SLP
    trace: list[RoundTrace]


def run_k_minus_1_rounds(k: int, variant: Variant = Variant.MAXIMAL_STRING) -> RoundsResult:
    if not 4 <= k <= MAX_K:
        raise ValueError(f"k must be in [4, {MAX_K}], got {k}")
    family = build_family(k)
    trace: list[RoundTrace] = []
    slp = compress(family.runs, variant, trace.append, max_rounds=k - 1)
    return RoundsResult(family, slp, trace)


@dataclass(frozen=True)
class VFactors:
    k: int
    v: tuple[tuple[Symbol, ...], ...]

    def format(self, slp: SLP) -> str:
        return "; ".join(" ".join(_item(slp, s) for s in vi) or "ε" for vi in self.v)


def _item(slp: SLP, sym: Symbol) -> str:
    return slp.name(sym.value) if sym.nt else chr(sym.value)


def doubling_rules(k: int) -> dict[int, tuple[Symbol, ...]]:
    """X1 -> aa and X_i -> X_{i-1} X_{i-1} for 2 <= i <= k-1."""
    a = Symbol(False, A)
    rules = {1: (a, a)}
    for i in range(2, k):
        rules[i] = (Symbol(True, i - 1), Symbol(True, i - 1))
    return rules


def check_doubling_rules(slp: SLP, k: int) -> None:
    rules = {h: b for h, b in slp.rules.items() if h != slp.start}
    expected = doubling_rules(k)
    if rules != expected:
        extra = sorted(set(rules) ^ set(expected))
        bad = [h for h in expected if h in rules and rules[h] != expected[h]]
        raise StructureError(f"expected doubling rules X1..X{k - 1}; mismatched ids {extra + bad}")


def eq1_v_factor(family: WitnessFamily, i: int) -> tuple[Symbol, ...]:
    """f_{k-2}(w[i+2]) ... f_0(w[k+i]) with empty images dropped (1-based i)."""
    k = family.k
    out = []
    for j in range(k - 1):  # bit w[i+2+j] carries weight 2^(k-2-j)
        if family.bit(i + 2 + j):
            weight = k - 2 - j
            out.append(Symbol(True, weight) if weight else Symbol(False, A))
    return tuple(out)


def extract_v_factors(slp: SLP, k: int, family: WitnessFamily | None = None) -> VFactors:
    """Split the start rule at the b's and strip each segment's leading X_{k-1} run."""
    check_doubling_rules(slp, k)
    top = Symbol(True, k - 1)
    body = slp.rules[slp.start]
    segments: list[list[Symbol]] = [[]]
    for sym in body:
        if sym == Symbol(False, B):
            segments.append([])
        else:
            segments[-1].append(sym)
    if len(segments) != k:
        raise StructureError(f"start rule has {len(segments)} b-delimited segments, expected {k}")
    v = []
    for i, seg in enumerate(segments, start=1):
        if seg[:2] != [top, top]:
            raise StructureError(f"segment {i} does not start with X{k - 1} X{k - 1}")
        j = 0
        while j < len(seg) and seg[j] == top:
            j += 1
        rest = tuple(seg[j:])
        if top in rest:
            raise StructureError(f"segment {i} has X{k - 1} after its leading run")
        v.append(rest)
    result = VFactors(k, tuple(v))
    if family is not None:
        for i, vi in enumerate(result.v, start=1):
            expected = eq1_v_factor(family, i)
            if vi != expected:
                raise StructureError(f"v_{i} = {vi} differs from the bit formula {expected}")
    return result


# ---------------------------------------------------------------------------
# verification report


@dataclass
class Check:
    name: str
    ok: bool
    detail: str = ""

    def line(self) -> str:
        return f"{'PASS' if self.ok else 'FAIL'} {self.name}" + (f": {self.detail}" if self.detail else "")


@dataclass
class Report:
    checks: list[Check] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks)

    def add(self, name: str, ok: bool, detail: str = "") -> bool:
        self.checks.append(Check(name, bool(ok), detail))
        return bool(ok)

    def text(self) -> str:
        return "\n".join([c.line() for c in self.checks] + [f"note {n}" for n in self.notes])


def verify_claims(k: int) -> Report:
    """Check the O(k) grammar and the round-(k-1) structure of RePair on s_k."""
    report = Report()
    family = build_family(k)

    B_seq = family.B
    n = B_seq.order
    report.add("de_bruijn_windows", B_seq.distinct_windows() == 2**n - n + 1 and B_seq.bits[0] == "1",
               f"order {n}, {B_seq.distinct_windows()} distinct windows")

    small = build_small_slp(k)
    v = validate(small)
    report.add("claim1_valid", v.ok, "; ".join(v.violations))
    report.add("claim1_expands_to_s_k", expand_runs(small) == family.runs)
    report.add("claim1_size", small.size <= 8 * k, f"size {small.size} <= {8 * k}")

    rounds = run_k_minus_1_rounds(k)
    g = rounds.slp
    lengths = [len(t.chosen.string) for t in rounds.trace]
    report.add("digram_choices", len(lengths) == k - 1 and all(l == 2 for l in lengths),
               f"chosen lengths {lengths}")
    try:
        check_doubling_rules(g, k)
        report.add("doubling_rules", True, f"X1 -> a a, X_i -> X_(i-1) X_(i-1) for i <= {k - 1}")
    except StructureError as exc:
        report.add("doubling_rules", False, str(exc))
        return report

    try:
        vf = extract_v_factors(g, k)
        report.add("segment_prefixes", True, f"all {k} segments start X{k - 1} X{k - 1}")
    except StructureError as exc:
        report.add("segment_prefixes", False, str(exc))
        return report

    mismatch = [i for i, vi in enumerate(vf.v, 1) if vi != eq1_v_factor(family, i)]
    report.add("v_factors_match_bits", not mismatch,
               vf.format(g) if not mismatch else f"first mismatch at v_{mismatch[0]}")
    floor = math.ceil((k - 3) / 2)
    short = [i for i, vi in enumerate(vf.v, 1) if len(vi) < floor]
    report.add("v_factor_lengths", not short, f"min |v_i| = {min(map(len, vf.v))} >= {floor}")
    repeats = [i for i, vi in enumerate(vf.v, 1) if len(set(vi)) != len(vi)]
    report.add("v_factor_letters_distinct", not repeats)

    window = 2 * ceil_log2(k) + 2
    start_body = g.rules[g.start]
    measured = distinct_factors(start_body, window) if window <= len(start_body) else 0
    formula = k * (math.ceil((k - 3) / 2) - 2 * ceil_log2(k) - 1)
    report.notes.append(f"distinct length-{window} factors in start rule: {measured} (bound formula {formula})")
    return report


# ---------------------------------------------------------------------------
# ratio table


@dataclass(frozen=True)
class RatioReport:
    k: int
    n: int
    repair_size: int
    small_slp_size: int
    ratio: float
    rounds: int
    ms: float


CSV_HEADER = ["k", "n", "repair_size", "small_slp_size", "ratio", "rounds", "ms"]


def ratio_row(k: int, variant: Variant = Variant.MAXIMAL_STRING) -> RatioReport:
    family = build_family(k)
    t0 = time.perf_counter()
    state = RePair.from_word(family.runs)
    state.run(variant)
    ms = (time.perf_counter() - t0) * 1000
    small = build_small_slp(k).size
    return RatioReport(k, family.n, state.size, small, state.size / small, state.rounds, ms)


def ratio_table(k_min: int, k_max: int, variant: Variant = Variant.MAXIMAL_STRING,
                jobs: int = 1) -> list[RatioReport]:
    if not 4 <= k_min <= k_max <= MAX_K:
        raise ValueError(f"need 4 <= k_min <= k_max <= {MAX_K}, got {k_min}..{k_max}")
    ks = range(k_min, k_max + 1)
    if jobs > 1:
        with ProcessPoolExecutor(jobs) as pool:
            return list(pool.map(ratio_row, ks, [variant] * len(ks)))
    return [ratio_row(k, variant) for k in ks]


def ratios_increasing(rows: Sequence[RatioReport], from_k: int = 6) -> bool:
    judged = [r.ratio for r in rows if r.k >= from_k]
    return all(a < b for a, b in zip(judged, judged[1:]))


def to_csv(rows: Sequence[RatioReport], timing: bool = False) -> str:
    """CSV text; the ``ms`` column stays empty unless ``timing`` so output is reproducible."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for r in rows:
        writer.writerow([r.k, r.n, r.repair_size, r.small_slp_size, f"{r.ratio:.6f}", r.rounds,
                         f"{r.ms:.1f}" if timing else ""])
    return buf.getvalue()
