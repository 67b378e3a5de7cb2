"""The adversarial binary family s_k and its O(k) grammars.

``s_k = a^{m_1} b a^{m_2} b ... b a^{m_k}`` where ``m_i`` is the prefix of
length ``k+i`` of ``w_k = h(B[1:k])`` read as a binary number, ``B`` is a
De Bruijn sequence of order ceil(log2 k) starting with 1 and
``h(0)=01, h(1)=10``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

from .slp import SLP, CapacityError, Production, Symbol, default_budget
from .words import RleWord, format_rle

MAX_ORDER = 20
MIN_K, MAX_K = 2, 16

A, B = ord("a"), ord("b")


def ceil_log2(k: int) -> int:
    return (k - 1).bit_length()


@dataclass(frozen=True)
class DeBruijnSeq:
    order: int
    bits: str

    def __len__(self) -> int:
        return len(self.bits)

    def distinct_windows(self) -> int:
        n = self.order
        return len({self.bits[i:i + n] for i in range(len(self.bits) - n + 1)})


def lex_least_de_bruijn(n: int) -> str:
    """Concatenation of the binary Lyndon words of length dividing n, in lex order."""
    out: list[int] = []
    word = [-1]
    while word:
        word[-1] += 1
        m = len(word)
        if n % m == 0:
            out.extend(word)
        while len(word) < n:
            word.append(word[len(word) - m])
        while word and word[-1] == 1:
            word.pop()
    return "".join(map(str, out))


def de_bruijn(n: int) -> DeBruijnSeq:
    """Complement of the lexicographically least binary De Bruijn sequence of order n."""
    if not 1 <= n <= MAX_ORDER:
        raise ValueError(f"De Bruijn order must be in [1, {MAX_ORDER}], got {n}")
    least = lex_least_de_bruijn(n)
    return DeBruijnSeq(n, least.translate(str.maketrans("01", "10")))


def apply_h(bits: str) -> str:
    return "".join("01" if c == "0" else "10" for c in bits)


def _check_k(k: int) -> None:
    if not MIN_K <= k <= MAX_K:
        raise ValueError(f"k must be in [{MIN_K}, {MAX_K}], got {k}")


@dataclass(frozen=True)
class WitnessFamily:
    k: int
    B: DeBruijnSeq
    w: str
    block_lengths: tuple[int, ...]

    @property
    def n(self) -> int:
        """|s_k|"""
        return sum(self.block_lengths) + self.k - 1

    def bit(self, i: int) -> int:
        """w[i] with 1-based indexing."""
        return int(self.w[i - 1])

    @cached_property
    def runs(self) -> RleWord:
        runs: list[tuple[int, int]] = []
        for i, m in enumerate(self.block_lengths):
            if i:
                runs.append((B, 1))
            runs.append((A, m))
        return tuple(runs)

    def metadata(self) -> str:
        lines = [
            f"k={self.k}",
            f"B_order={self.B.order}",
            f"B={self.B.bits}",
            f"|B|={len(self.B)}",
            f"w={self.w}",
            "block_lengths=" + ",".join(map(str, self.block_lengths)),
            f"n={self.n}",
        ]
        return "\n".join(lines)


def build_family(k: int) -> WitnessFamily:
    _check_k(k)
    B_seq = de_bruijn(ceil_log2(k))
    w = apply_h(B_seq.bits[:k])
    blocks = tuple(int(w[:k + i], 2) for i in range(1, k + 1))
    return WitnessFamily(k, B_seq, w, blocks)


def materialize_s(family: WitnessFamily, format: str = "explicit",
                  budget: int | None = None) -> bytes | RleWord:
    if format == "run_length":
        return family.runs
    if format != "explicit":
        raise ValueError(f"unknown format {format!r}")
    budget = default_budget() if budget is None else budget
    if family.n > budget:
        raise CapacityError(family.n, budget, "s_k")
    return b"b".join(b"a" * m for m in family.block_lengths)


def s_k_text(family: WitnessFamily) -> str:
    return format_rle(family.runs)


def build_small_slp(k: int) -> SLP:
    """An SLP for s_k of size at most 8k.

    The first block is built by repeated doubling over the bits of m_1, each
    following block doubles its predecessor and appends an ``a`` when the next
    bit of w is 1, and the start rule lists the blocks separated by ``b``.
    """
    family = build_family(k)
    a = Symbol(False, A)
    prods: list[Production] = []

    def fresh(body: list[Symbol]) -> Symbol:
        ident = len(prods) + 1
        prods.append(Production(ident, tuple(body)))
        return Symbol(True, ident)

    m1 = family.block_lengths[0]
    top = a
    for bit in bin(m1)[3:]:
        top = fresh([top, top] + ([a] if bit == "1" else []))
    blocks = [top]
    for i in range(2, k + 1):
        prev = blocks[-1]
        blocks.append(fresh([prev, prev] + ([a] if family.bit(k + i) else [])))

    start: list[Symbol] = []
    for i, blk in enumerate(blocks):
        if i:
            start.append(Symbol(False, B))
        start.append(blk)
    return SLP((Production(0, tuple(start)), *prods), 0)
