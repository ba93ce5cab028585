"""Exact combinatorics of the recursive words ``e_k``.

Words are plain ``str`` objects over the three-letter alphabet ``"UDZ"``
(``U`` = up, ``D`` = down, ``Z`` = zero).  The elementary words are

    e_1     = UD
    e_{k+1} = e_k^{m_k} Z e_k  conj(e_k)^{m_k} Z conj(e_k)

where ``conj`` swaps ``U`` and ``D``.  Lengths, alternating sums and subword
counts are Python integers, so nothing overflows at large ``k``; letters of
huge words are located by block arithmetic instead of materialization.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Optional

import numpy as np

__all__ = [
    "Letter", "WordParams", "DEFAULT_PARAMS", "MATERIALIZE_CAP",
    "WordError", "CapExceededError", "PatternNotInLanguageError",
    "NotInSoficLanguageError",
    "conjugate", "build_elementary", "elementary_array", "length_of",
    "letter_at", "letters_range", "count_subwords", "occurrences",
    "count_enclosure", "CountEnclosure", "phi_frequency", "FrequencyEnclosure",
    "theta", "theta_of_elementary", "c_estimate", "CEstimate",
    "is_in_language", "SoficGraph", "sofic_graph", "sofic_member",
    "Factorization", "elementary_factorization", "minimality_check",
    "subword_complexity", "sofic_word_count_bound", "to_signs", "from_signs",
    "sofic_rejects",
]

MATERIALIZE_CAP = 10**7


class WordError(ValueError):
    """Base class for word-level errors."""


class CapExceededError(WordError):
    def __init__(self, k: int, length: int, cap: int):
        super().__init__(f"|e_{k}| = {length} exceeds materialization cap {cap}")
        self.k = k
        self.length = length
        self.cap = cap


class PatternNotInLanguageError(WordError):
    pass


class NotInSoficLanguageError(WordError):
    pass


class Letter(str, enum.Enum):
    UP = "U"
    DOWN = "D"
    ZERO = "Z"

    @property
    def sign(self) -> int:
        return _SIGN[self.value]

    @classmethod
    def from_char(cls, ch: str) -> "Letter":
        return cls(ch)


_SIGN = {"U": 1, "D": -1, "Z": 0}
_CONJ = str.maketrans("UD", "DU")
_SIGN_LUT = np.zeros(256, dtype=np.int8)
_SIGN_LUT[ord("U")] = 1
_SIGN_LUT[ord("D")] = -1
_CHARS = np.frombuffer(b"DZU", dtype=np.uint8)  # indexed by sign + 1


def _pow2(k: int) -> int:
    return 2**k


def _pow2_tail(j: int) -> Fraction:
    # sum_{i > j} 2^{-i}
    return Fraction(1, 2**j)


@dataclass(frozen=True)
class WordParams:
    """Parameter family ``(m_k)`` for the recursion.

    ``prefix`` overrides the first values; later values come from ``tail``.
    A user family must say whether it is summable and, for tail-product
    bounds, supply ``inverse_tail(j) >= sum_{i > j} 1 / m_i``.
    """

    prefix: tuple = ()
    tail: Callable[[int], int] = _pow2
    summable: bool = True
    inverse_tail: Optional[Callable[[int], Fraction]] = _pow2_tail
    name: str = "pow2"

    def __post_init__(self):
        for value in self.prefix:
            if int(value) < 2:
                raise WordError(f"m_k must be >= 2, got {value}")

    def m(self, k: int) -> int:
        if k < 1:
            raise WordError(f"m_k is defined for k >= 1, got {k}")
        if k <= len(self.prefix):
            value = int(self.prefix[k - 1])
        else:
            value = int(self.tail(k))
        if value < 2:
            raise WordError(f"m_{k} = {value} < 2")
        return value

    @property
    def is_builtin(self) -> bool:
        return self.tail is _pow2

    def describe(self) -> str:
        if self.prefix:
            return f"{self.name}[prefix={','.join(map(str, self.prefix))}]"
        return self.name


DEFAULT_PARAMS = WordParams()


def to_signs(word: str) -> np.ndarray:
    """Letters as an ``int8`` array of +1 / -1 / 0."""
    return _SIGN_LUT[np.frombuffer(word.encode("ascii"), dtype=np.uint8)]


def from_signs(signs: np.ndarray) -> str:
    return _CHARS[np.asarray(signs, dtype=np.int64) + 1].tobytes().decode("ascii")


def conjugate(word: str) -> str:
    """Swap ``U`` and ``D``; ``Z`` is fixed."""
    return word.translate(_CONJ)


@lru_cache(maxsize=None)
def _lengths(params: WordParams, k: int) -> tuple:
    out = [2]
    for j in range(1, k):
        out.append(2 * (params.m(j) + 1) * out[-1] + 2)
    return tuple(out)


def length_of(k: int, params: WordParams = DEFAULT_PARAMS) -> int:
    """Exact ``|e_k|``."""
    if k < 1:
        raise WordError(f"k must be >= 1, got {k}")
    return _lengths(params, k)[k - 1]


def theta_of_elementary(k: int, params: WordParams = DEFAULT_PARAMS) -> int:
    """Exact alternating sum of ``e_k`` via ``theta(e_{k+1}) = 2 (m_k - 1) theta(e_k)``."""
    if k < 1:
        raise WordError(f"k must be >= 1, got {k}")
    value = 2
    for j in range(1, k):
        value *= 2 * (params.m(j) - 1)
    return value


@lru_cache(maxsize=16)
def _build(params: WordParams, k: int) -> str:
    if k == 1:
        return "UD"
    prev = _build(params, k - 1)
    bar = conjugate(prev)
    m = params.m(k - 1)
    return prev * m + "Z" + prev + bar * m + "Z" + bar


def build_elementary(k: int, params: WordParams = DEFAULT_PARAMS,
                     cap: int = MATERIALIZE_CAP) -> str:
    """Materialize ``e_k`` as a string (refuses above ``cap`` letters)."""
    n = length_of(k, params)
    if n > cap:
        raise CapExceededError(k, n, cap)
    return _build(params, k)


@lru_cache(maxsize=16)
def _array(params: WordParams, k: int) -> np.ndarray:
    arr = to_signs(_build(params, k))
    arr.setflags(write=False)
    return arr


def elementary_array(k: int, params: WordParams = DEFAULT_PARAMS,
                     cap: int = MATERIALIZE_CAP) -> np.ndarray:
    """``e_k`` as a read-only sign array."""
    n = length_of(k, params)
    if n > cap:
        raise CapExceededError(k, n, cap)
    return _array(params, k)


def letter_at(k: int, i: int, params: WordParams = DEFAULT_PARAMS) -> Letter:
    """The ``i``-th letter of ``e_k`` in ``O(k)`` steps."""
    i = int(i)
    n = length_of(k, params)
    if not 0 <= i < n:
        raise IndexError(f"index {i} outside e_{k} of length {n}")
    conj = False
    while k > 1:
        sub = length_of(k - 1, params)
        m = params.m(k - 1)
        half = (m + 1) * sub + 1
        if i >= half:
            conj = not conj
            i -= half
        if i == m * sub:
            return Letter.ZERO
        if i > m * sub:
            i -= m * sub + 1
        else:
            i %= sub
        k -= 1
    ch = "UD"[i]
    if conj:
        ch = "DU"[i]
    return Letter(ch)


def letters_range(k: int, start: int, stop: int,
                  params: WordParams = DEFAULT_PARAMS,
                  cap: int = MATERIALIZE_CAP) -> np.ndarray:
    """Sign array of ``e_k[start:stop]`` without materializing ``e_k``.

    Levels at or below ``cap`` are sliced from the cached array; larger
    levels are split along the recursion into overlapping children.
    """
    start, stop = int(start), int(stop)
    n = length_of(k, params)
    if not 0 <= start <= stop <= n:
        raise IndexError(f"range [{start}, {stop}) outside e_{k} of length {n}")
    pieces: list = []
    _collect(k, start, stop, False, params, cap, pieces)
    if not pieces:
        return np.zeros(0, dtype=np.int8)
    if len(pieces) == 1:
        return np.array(pieces[0], dtype=np.int8)
    return np.concatenate(pieces).astype(np.int8, copy=False)


def _collect(k, start, stop, conj, params, cap, out):
    if start >= stop:
        return
    n = length_of(k, params)
    if n <= cap:
        block = _array(params, k)[start:stop]
        out.append(-block if conj else block)
        return
    sub = length_of(k - 1, params)
    m = params.m(k - 1)
    half = (m + 1) * sub + 1
    for h, flip in ((0, conj), (half, not conj)):
        lo, hi = max(start, h), min(stop, h + half)
        if lo >= hi:
            continue
        lo -= h
        hi -= h
        # children: m copies, the zero, one more copy
        run = m * sub
        if lo < run:
            first, last = lo // sub, (min(hi, run) - 1) // sub
            for c in range(first, last + 1):
                a = max(lo, c * sub) - c * sub
                b = min(hi, (c + 1) * sub) - c * sub
                _collect(k - 1, a, b, flip, params, cap, out)
        if lo <= run < hi:
            out.append(np.zeros(1, dtype=np.int8))
        if hi > run + 1:
            a = max(lo, run + 1) - run - 1
            b = hi - run - 1
            _collect(k - 1, a, b, flip, params, cap, out)


def occurrences(word: str, pattern: str) -> np.ndarray:
    """Start positions of (possibly overlapping) occurrences of ``pattern``."""
    if not pattern:
        raise WordError("empty pattern")
    n, p = len(word), len(pattern)
    if p > n:
        return np.zeros(0, dtype=np.int64)
    if n < 4096:
        out, i = [], word.find(pattern)
        while i >= 0:
            out.append(i)
            i = word.find(pattern, i + 1)
        return np.asarray(out, dtype=np.int64)
    w = np.frombuffer(word.encode("ascii"), dtype=np.uint8)
    v = np.frombuffer(pattern.encode("ascii"), dtype=np.uint8)
    mask = w[: n - p + 1] == v[0]
    for j in range(1, p):
        mask &= w[j: n - p + 1 + j] == v[j]
    return np.flatnonzero(mask)


def count_subwords(word: str, pattern: str) -> int:
    """Number of factorizations ``word = u pattern u'``."""
    if not pattern:
        raise WordError("empty pattern")
    if len(pattern) > len(word):
        return 0
    return int(occurrences(word, pattern).size)


def theta(word: str) -> int:
    """Alternating sum ``sum_i (-1)^i a_i`` with U=+1, D=-1, Z=0."""
    if not word:
        return 0
    s = to_signs(word).astype(np.int64)
    return int(s[0::2].sum() - s[1::2].sum())


@dataclass(frozen=True)
class CountEnclosure:
    """Integer intervals containing ``|e_k|_v`` and ``|conj(e_k)|_v``."""

    k: int
    base_level: int
    e_count: tuple
    bar_count: tuple

    @property
    def lower(self) -> int:
        return min(self.e_count[0], self.bar_count[0])

    @property
    def upper(self) -> int:
        return max(self.e_count[1], self.bar_count[1])


def count_enclosure(pattern: str, k: int, params: WordParams = DEFAULT_PARAMS,
                    base_level: Optional[int] = None) -> CountEnclosure:
    """Rigorous interval recursion for subword counts of ``e_k``.

    The base level is counted directly; each recursion step applies the
    concatenation bounds to the ``2 m + 4`` factors of ``e_{k+1}``, with
    the two literal zero factors counted exactly.
    """
    if not pattern:
        raise WordError("empty pattern")
    if base_level is None:
        base_level = 1
        while length_of(base_level, params) < 64 * len(pattern) and base_level < k:
            base_level += 1
    base_level = min(base_level, k)
    e0 = build_elementary(base_level, params)
    a = count_subwords(e0, pattern)
    b = count_subwords(conjugate(e0), pattern)
    e_iv, bar_iv = (a, a), (b, b)
    zeros = 2 if pattern == "Z" else 0
    slack_unit = len(pattern) - 1
    for j in range(base_level, k):
        m = params.m(j)
        lo = (m + 1) * (e_iv[0] + bar_iv[0]) + zeros
        hi = (m + 1) * (e_iv[1] + bar_iv[1]) + zeros + (2 * m + 3) * slack_unit
        e_iv = bar_iv = (lo, hi)
    return CountEnclosure(k, base_level, e_iv, bar_iv)


@dataclass(frozen=True)
class FrequencyEnclosure:
    pattern: str
    k: int
    lower: Fraction
    upper: Fraction

    @property
    def estimate(self) -> Fraction:
        return (self.lower + self.upper) / 2

    @property
    def width(self) -> Fraction:
        return self.upper - self.lower

    def __contains__(self, value) -> bool:
        return self.lower <= value <= self.upper


def phi_frequency(pattern: str, params: WordParams = DEFAULT_PARAMS,
                  K: int = 6, base_level: Optional[int] = None) -> FrequencyEnclosure:
    """Enclosure of the limit frequency of ``pattern`` at level ``K``."""
    if not is_in_language(pattern, params, K):
        raise PatternNotInLanguageError(
            f"{pattern!r} not found in e_{K}; membership unresolved")
    enc = count_enclosure(pattern, K, params, base_level)
    n = length_of(K, params)
    return FrequencyEnclosure(pattern, K, Fraction(enc.lower, n), Fraction(enc.upper, n))


@dataclass(frozen=True)
class CEstimate:
    ratio: Fraction
    lower: float
    upper: float
    K: int

    @property
    def tail_bracket(self) -> tuple:
        return (self.lower, self.upper)


def c_estimate(params: WordParams = DEFAULT_PARAMS, K: int = 6,
               exact_terms: int = 40) -> CEstimate:
    """``theta(e_K) / |e_K|`` plus a rigorous lower bound for its limit.

    The limit equals ``ratio * prod_{j >= K} r_j`` with
    ``r_j = (m_j - 1) / (m_j + 1 + 1/|e_j|)``.  The first ``exact_terms``
    factors are multiplied exactly; the remaining tail uses
    ``log(1 - x) >= -2x`` together with ``1 - r_j <= 2.5 / m_j``.
    """
    if K < 1:
        raise WordError(f"K must be >= 1, got {K}")
    ratio = Fraction(theta_of_elementary(K, params), length_of(K, params))
    J = K + exact_terms
    log_prod = 0.0
    for j in range(K, J):
        m = params.m(j)
        r = Fraction(m - 1) / (m + 1 + Fraction(1, length_of(j, params)))
        log_prod += math.log(r)
    if params.inverse_tail is None:
        raise WordError("family does not provide a tail bound for sum 1/m_k")
    tail = float(params.inverse_tail(J - 1))
    if 2.5 * tail > 0.5:
        raise WordError("tail too heavy for the log(1-x) >= -2x bound; raise exact_terms")
    log_prod -= 2 * 2.5 * tail
    # guard against rounding in the float accumulation
    log_prod -= 1e-12 * (1 + abs(log_prod))
    lower = math.nextafter(float(ratio) * math.exp(log_prod), 0.0)
    return CEstimate(ratio, lower, float(ratio), K)


def is_in_language(word: str, params: WordParams = DEFAULT_PARAMS, K: int = 6) -> bool:
    """Semi-decision: ``True`` iff ``word`` occurs in ``e_K``.

    ``False`` means *unknown at level K*, never a definite no; each ``e_k``
    is a prefix of ``e_{k+1}``, so the answer is monotone in ``K``.
    """
    if not word:
        return True
    return _in_host(word, params, K)


@lru_cache(maxsize=1 << 16)
def _in_host(word: str, params: WordParams, K: int) -> bool:
    return word in build_elementary(K, params)


@dataclass(frozen=True)
class SoficGraph:
    """Four-leaf clover presenting the shift of concatenated k-elementary words.

    Each loop leaves and re-enters the central vertex; ``loops`` lists the
    label sequences ``e_k, conj(e_k), e_k Z, conj(e_k) Z``.
    """

    k: int
    loops: tuple

    @property
    def n_vertices(self) -> int:
        return 1 + sum(len(w) - 1 for w in self.loops)

    @property
    def n_edges(self) -> int:
        return sum(len(w) for w in self.loops)

    def edges(self):
        """Yield ``(src, dst, label)`` with vertex 0 as the center."""
        vid = 1
        for word in self.loops:
            prev = 0
            for pos, ch in enumerate(word):
                if pos == len(word) - 1:
                    nxt = 0
                else:
                    nxt, vid = vid, vid + 1
                yield prev, nxt, ch
                prev = nxt


@lru_cache(maxsize=8)
def sofic_graph(k: int, params: WordParams = DEFAULT_PARAMS) -> SoficGraph:
    e = build_elementary(k, params)
    bar = conjugate(e)
    return SoficGraph(k, (e, bar, e + "Z", bar + "Z"))


def sofic_member(word: str, graph: SoficGraph) -> bool:
    """Whether ``word`` labels a finite walk on ``graph``.

    Subset simulation over states ``(loop, position)``; a walk may start
    and end anywhere.
    """
    if not word:
        return True
    loops = graph.loops
    # first letter: every edge carrying that label is a valid start
    states = set()
    for li, loop in enumerate(loops):
        pos = loop.find(word[0])
        while pos >= 0:
            states.add((li, pos + 1))
            pos = loop.find(word[0], pos + 1)
    for ch in word[1:]:
        if not states:
            return False
        nxt = set()
        at_center = False
        for li, pos in states:
            if pos == len(loops[li]):
                at_center = True
            elif loops[li][pos] == ch:
                nxt.add((li, pos + 1))
        if at_center:
            for li, loop in enumerate(loops):
                if loop[0] == ch:
                    nxt.add((li, 1))
        states = nxt
    return bool(states)


@lru_cache(maxsize=1 << 16)
def sofic_rejects(word: str, params: WordParams = DEFAULT_PARAMS, max_level: int = 3) -> int:
    """Smallest level ``j <= max_level`` whose clover rejects ``word``, else 0.

    A rejection certifies ``word`` is outside the language of ``Y``.
    """
    for j in range(1, max_level + 1):
        if not sofic_member(word, sofic_graph(j, params)):
            return j
    return 0


@dataclass(frozen=True)
class Factorization:
    """``word = head + "".join(inner) + tail``; ``inner`` are k-elementary."""

    k: int
    head: str
    inner: tuple
    tail: str

    @property
    def factors(self) -> list:
        out = [self.head] if self.head else []
        out.extend(self.inner)
        if self.tail:
            out.append(self.tail)
        return out

    def join(self) -> str:
        return self.head + "".join(self.inner) + self.tail


def elementary_factorization(word: str, k: int,
                             params: WordParams = DEFAULT_PARAMS) -> Factorization:
    """Leftmost-longest parse of ``word`` into k-elementary inner factors.

    The head is a proper suffix and the tail a proper prefix of some
    k-elementary word, so both have length at most ``|e_k|``.  A table of
    parseable suffixes removes the need for backtracking.
    """
    graph = sofic_graph(k, params)
    if not sofic_member(word, graph):
        raise NotInSoficLanguageError(f"word not presented by the level-{k} clover")
    loops = sorted(graph.loops, key=len, reverse=True)
    n = len(word)
    ok = [False] * (n + 1)
    for i in range(n, -1, -1):
        rest = word[i:]
        if any(len(rest) < len(u) and u.startswith(rest) for u in loops):
            ok[i] = True
            continue
        ok[i] = any(word.startswith(u, i) and ok[i + len(u)] for u in loops)
    limit = min(n, length_of(k, params))
    for s in range(limit + 1):
        head = word[:s]
        if s and not any(len(u) > s and u.endswith(head) for u in loops):
            continue
        if not ok[s]:
            continue
        inner, i = [], s
        while True:
            rest = word[i:]
            nxt = next((u for u in loops if word.startswith(u, i) and ok[i + len(u)]), None)
            if nxt is not None:
                inner.append(nxt)
                i += len(nxt)
                continue
            if any(len(rest) < len(u) and u.startswith(rest) for u in loops):
                return Factorization(k, head, tuple(inner), rest)
            break
    # the walk never visits the center: word sits inside a single loop
    return Factorization(k, word, (), "")


def minimality_check(pattern: str, k: int, params: WordParams = DEFAULT_PARAMS) -> bool:
    """Every window of length ``2|e_{k+1}| + 1`` in ``e_{k+2}`` contains
    ``pattern`` at both an even and an odd offset."""
    host = build_elementary(k + 2, params)
    if not is_in_language(pattern, params, k + 2):
        raise PatternNotInLanguageError(f"{pattern!r} not found in e_{k + 2}")
    width = 2 * length_of(k + 1, params) + 1
    last_start = len(host) - width
    if last_start < 0:
        return False
    occ = occurrences(host, pattern)
    reach = width - len(pattern)  # occurrence q fits window s iff s <= q <= s + reach
    for parity in (0, 1):
        q = occ[occ % 2 == parity]
        if q.size == 0 or q[0] > reach or q[-1] < last_start:
            return False
        if q.size > 1 and int(np.max(np.diff(q))) - 1 > reach:
            return False
    return True


def subword_complexity(word: str, n: int) -> int:
    """Number of distinct length-``n`` subwords of ``word``."""
    if n <= 0:
        return 1
    if n > len(word):
        return 0
    if n > 39:
        return len({word[i:i + n] for i in range(len(word) - n + 1)})
    digits = (to_signs(word).astype(np.int64) + 1)
    codes = np.zeros(len(word) - n + 1, dtype=np.int64)
    for j in range(n):
        codes = codes * 3 + digits[j: len(word) - n + 1 + j]
    return int(np.unique(codes).size)


def sofic_word_count_bound(k: int, n: int, params: WordParams = DEFAULT_PARAMS) -> float:
    """Upper bound on the number of length-``n`` words of the level-k clover shift.

    A walk is fixed by its starting edge and the loop chosen at each of at
    most ``n / |e_k| + 1`` visits to the center.
    """
    ek = length_of(k, params)
    return (4 * ek + 2) * 4.0 ** (n / ek + 1)
