"""Points of the full shift on ``{U, D, Z}`` and of the subshift ``Y``.

A point is a finite window onto a bi-infinite sequence: a generator that
knows its letters on an index range, plus a movable center.  Distances use
the ultrametric ``d(x, y) = RHO * 2**(-r)`` where ``r`` is the smallest
``|i|`` with ``x_i != y_i`` (the *agreement radius*), so every distance is
an exact integer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Union

import numpy as np

from . import words
from .words import DEFAULT_PARAMS, WordParams

__all__ = [
    "RHO", "LogDistance", "ElementaryGenerator", "ExplicitGenerator",
    "FlippedGenerator", "PointWindow", "OutOfWindowError", "InconclusiveError",
    "inside_elementary", "explicit_window", "flip_point", "point_at_radius", "coord", "shift",
    "dist", "bowen_dist", "dist_to_Y", "language_status",
    "generator_to_json", "generator_from_json",
]

RHO = 1.0 / 16.0
INF = math.inf


class OutOfWindowError(IndexError):
    """Coordinate requested outside the generator's defined range."""


class InconclusiveError(RuntimeError):
    """Language membership could not be resolved at the configured level."""


@dataclass(frozen=True, order=False)
class LogDistance:
    """Distance ``RHO * 2**(-radius)``; ``radius == inf`` means distance 0.

    With ``exact=False`` the radius is only a lower bound (the points agree
    on the whole scanned range).
    """

    radius: Union[int, float]
    exact: bool = True

    @property
    def value(self) -> float:
        if self.radius == INF:
            return 0.0
        return math.ldexp(RHO, -int(self.radius)) if self.radius < 1100 else 0.0

    @property
    def is_zero(self) -> bool:
        return self.radius == INF

    @property
    def neg_log(self) -> float:
        """``-log d`` (``inf`` for distance zero)."""
        if self.radius == INF:
            return INF
        return (self.radius + 4) * math.log(2.0)

    def __str__(self) -> str:
        if self.radius == INF:
            return "0"
        rel = "" if self.exact else "<="
        return f"{rel}rho*2^-{self.radius}"


# --------------------------------------------------------------------------
# generators


@dataclass(frozen=True)
class ElementaryGenerator:
    """Letters of ``e_k`` at absolute indices ``[0, |e_k|)``; lies in ``Y``."""

    k: int
    params: WordParams = DEFAULT_PARAMS

    @property
    def bounds(self) -> tuple:
        return 0, words.length_of(self.k, self.params)

    in_Y = True

    def block(self, start: int, stop: int) -> np.ndarray:
        return words.letters_range(self.k, start, stop, self.params)


@dataclass(frozen=True)
class ExplicitGenerator:
    """An explicit finite word; membership in ``Y`` is not assumed."""

    word: str

    @property
    def bounds(self) -> tuple:
        return 0, len(self.word)

    in_Y = False

    def block(self, start: int, stop: int) -> np.ndarray:
        return _explicit_signs(self.word)[start:stop]


@lru_cache(maxsize=64)
def _explicit_signs(word: str) -> np.ndarray:
    arr = words.to_signs(word)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class FlippedGenerator:
    """``base`` with the letter at absolute index ``flip`` replaced."""

    base: Union[ElementaryGenerator, ExplicitGenerator, "FlippedGenerator"]
    flip: int
    letter: str
    left_cert: int = 0  # word of this length ending at the flip is outside L(Y)
    right_cert: int = 0  # word of this length starting at the flip is outside L(Y)

    @property
    def bounds(self) -> tuple:
        return self.base.bounds

    in_Y = False

    def block(self, start: int, stop: int) -> np.ndarray:
        out = self.base.block(start, stop)
        if start <= self.flip < stop:
            out = np.array(out, dtype=np.int8)
            out[self.flip - start] = words.Letter(self.letter).sign
        return out


Generator = Union[ElementaryGenerator, ExplicitGenerator, FlippedGenerator]


@dataclass(frozen=True)
class PointWindow:
    """A point of the full shift, known on ``generator.bounds``.

    Coordinate ``i`` of the point is the generator's letter at absolute
    index ``center + i``.
    """

    generator: Generator
    center: int

    def __post_init__(self):
        lo, hi = self.generator.bounds
        if not lo <= self.center < hi:
            raise OutOfWindowError(f"center {self.center} outside [{lo}, {hi})")

    @property
    def valid_radius(self) -> int:
        lo, hi = self.generator.bounds
        return min(self.center - lo, hi - 1 - self.center)

    @property
    def valid_range(self) -> tuple:
        """Relative coordinates ``[a, b)`` that can be queried."""
        lo, hi = self.generator.bounds
        return lo - self.center, hi - self.center

    def block(self, a: int, b: int) -> np.ndarray:
        """Signs of coordinates ``a, ..., b - 1``."""
        lo, hi = self.generator.bounds
        if a > b or self.center + a < lo or self.center + b > hi:
            raise OutOfWindowError(
                f"coordinates [{a}, {b}) outside window [{lo - self.center}, {hi - self.center})")
        return self.generator.block(self.center + a, self.center + b)

    def word(self, a: int, b: int) -> str:
        return words.from_signs(self.block(a, b))

    def coord(self, i: int) -> words.Letter:
        return words.Letter(words.from_signs(self.block(i, i + 1)))

    def shift(self, n: int) -> "PointWindow":
        lo, hi = self.generator.bounds
        c = self.center + int(n)
        if not lo <= c < hi:
            raise OutOfWindowError(f"shift by {n} leaves the window [{lo}, {hi})")
        return PointWindow(self.generator, c)

    @property
    def in_Y(self) -> bool:
        return self.generator.in_Y

    def to_json(self) -> dict:
        return generator_to_json(self.generator) | {"center": str(self.center)}


def coord(p: PointWindow, i: int) -> words.Letter:
    return p.coord(i)


def shift(p: PointWindow, n: int) -> PointWindow:
    return p.shift(n)


def inside_elementary(k: int, pos: int, params: WordParams = DEFAULT_PARAMS) -> PointWindow:
    """The ``Y``-point read off ``e_k`` with coordinate 0 at ``pos``."""
    return PointWindow(ElementaryGenerator(k, params), int(pos))


def explicit_window(word: str, anchor: int) -> PointWindow:
    return PointWindow(ExplicitGenerator(word), int(anchor))


# --------------------------------------------------------------------------
# language membership


def language_status(word: str, params: WordParams = DEFAULT_PARAMS, K: int = 6,
                    sofic_levels: int = 3) -> Optional[bool]:
    """``True`` if ``word`` occurs in ``e_K``; ``False`` if a clover rejects
    it (a proof that it is outside the language); ``None`` otherwise."""
    # short words: the clover test is cheaper than a miss in e_K
    if len(word) <= 64 and words.sofic_rejects(word, params, sofic_levels):
        return False
    if words.is_in_language(word, params, K):
        return True
    if len(word) > 64 and words.sofic_rejects(word, params, sofic_levels):
        return False
    return None


def _certificate(signs: np.ndarray, params: WordParams, max_len: int,
                 sofic_levels: int) -> int:
    """Shortest prefix length of ``signs`` that a clover rejects (0 if none)."""
    for n in range(1, min(max_len, len(signs)) + 1):
        if words.sofic_rejects(words.from_signs(signs[:n]), params, sofic_levels):
            return n
    return 0


def flip_point(base: PointWindow, position: int, letter: Optional[str] = None,
               params: WordParams = DEFAULT_PARAMS, max_cert: int = 64,
               sofic_levels: int = 3) -> PointWindow:
    """Replace coordinate ``position`` of ``base`` by a letter outside the language.

    The replacement is chosen (when ``letter`` is None) so that short words
    ending at and starting at the flip are both rejected by a clover graph;
    these certificates make the distance to ``Y`` exact when ``base`` lies
    in ``Y``.  Raises ``InconclusiveError`` when no letter can be certified.
    """
    gen = base.generator
    absolute = base.center + int(position)
    lo, hi = gen.bounds
    if not lo <= absolute < hi:
        raise OutOfWindowError(f"flip position {position} outside window")
    current = words.from_signs(gen.block(absolute, absolute + 1))
    candidates = [letter] if letter is not None else [c for c in "ZUD" if c != current]
    best = None
    for ch in candidates:
        if ch == current:
            raise ValueError("replacement letter equals the current letter")
        trial = FlippedGenerator(gen, absolute, ch)
        left = trial.block(max(lo, absolute - max_cert + 1), absolute + 1)[::-1]
        right = trial.block(absolute, min(hi, absolute + max_cert))
        # a word ending at the flip, read backwards, is rejected iff its reversal is
        lc = _certificate_rev(left, params, max_cert, sofic_levels)
        rc = _certificate(right, params, max_cert, sofic_levels)
        if lc and rc and (best is None or max(lc, rc) < max(best[1], best[2])):
            best = (ch, lc, rc)
    if best is None:
        raise InconclusiveError(f"no certified replacement at position {position}")
    ch, lc, rc = best
    return PointWindow(FlippedGenerator(gen, absolute, ch, lc, rc), base.center)


def _certificate_rev(rev_signs: np.ndarray, params, max_len, sofic_levels) -> int:
    for n in range(1, min(max_len, len(rev_signs)) + 1):
        w = words.from_signs(rev_signs[:n][::-1])
        if words.sofic_rejects(w, params, sofic_levels):
            return n
    return 0


def point_at_radius(k: int, pos: int, radius: int, params: WordParams = DEFAULT_PARAMS,
                    side: int = 1, tries: int = 64, K: int = 6) -> PointWindow:
    """An off-``Y`` point at distance exactly ``RHO * 2**-radius`` from ``Y``.

    Starts from the ``e_k`` point at ``pos`` and flips coordinate
    ``side * radius``; moves the base one step at a time until the flip is
    certified and the distance comes out exact.
    """
    if radius < 1:
        raise ValueError("radius must be at least 1")
    for j in range(tries):
        base = inside_elementary(k, pos + j, params)
        try:
            q = flip_point(base, side * radius, params=params)
        except InconclusiveError:
            continue
        d = dist_to_Y(q, params, K)
        if d.exact and d.radius == radius:
            return q
    raise InconclusiveError(f"no certified point at radius {radius} near offset {pos}")


# --------------------------------------------------------------------------
# metrics


def dist(p: PointWindow, q: PointWindow, scan_cap: int) -> LogDistance:
    """Agreement-radius distance, scanning coordinates ``|i| <= scan_cap``."""
    a = p.block(-scan_cap, scan_cap + 1)
    b = q.block(-scan_cap, scan_cap + 1)
    diff = np.flatnonzero(a != b)
    if diff.size == 0:
        return LogDistance(scan_cap + 1, exact=False)
    return LogDistance(int(np.min(np.abs(diff - scan_cap))))


def bowen_dist(p: PointWindow, q: PointWindow, n: int, scan_cap: int) -> LogDistance:
    """``max_{|i| <= n} d(T^i p, T^i q)`` as an agreement radius ``max(0, r - n)``."""
    d = dist(p, q, scan_cap + n)
    return LogDistance(max(0, d.radius - n), d.exact)


def dist_to_Y(p: PointWindow, params: WordParams = DEFAULT_PARAMS, K: int = 6,
              sofic_levels: int = 3) -> LogDistance:
    """Distance from ``p`` to ``Y``: ``RHO * 2**-(n + 1)`` where ``n`` is the
    largest radius whose central block ``p[-n..n]`` is in the language."""
    return _dist_to_Y(p.generator, p.center, params, K, sofic_levels)


@lru_cache(maxsize=1 << 18)
def _dist_to_Y(gen, center, params, K, sofic_levels) -> LogDistance:
    if gen.in_Y:
        return LogDistance(INF)
    point = PointWindow(gen, center)
    R = point.valid_radius
    start, cert_radius = 0, None
    if isinstance(gen, FlippedGenerator) and gen.base.in_Y:
        # blocks of radius < |d| are blocks of the base, hence in the language
        d = gen.flip - center
        start = abs(d)
        spans = []
        if gen.left_cert:
            spans.append((d - gen.left_cert + 1, d))
        if gen.right_cert:
            spans.append((d, d + gen.right_cert - 1))
        if spans:
            cert_radius = min(max(-a, b) for a, b in spans)
    for n in range(start, R + 1):
        if cert_radius is not None and n >= cert_radius:
            return LogDistance(n)
        status = language_status(point.word(-n, n + 1), params, K, sofic_levels)
        if status is None:
            raise InconclusiveError(
                f"membership of the radius-{n} block unresolved at level {K}")
        if not status:
            return LogDistance(n)
    return LogDistance(R + 1, exact=False)


# --------------------------------------------------------------------------
# serialization


def generator_to_json(gen: Generator) -> dict:
    if isinstance(gen, ElementaryGenerator):
        return {"kind": "elementary", "k": gen.k, "params": gen.params.describe()}
    if isinstance(gen, ExplicitGenerator):
        return {"kind": "explicit", "word": gen.word}
    return {"kind": "flipped", "base": generator_to_json(gen.base), "flip": str(gen.flip),
            "letter": gen.letter, "left_cert": gen.left_cert, "right_cert": gen.right_cert}


def generator_from_json(data: dict, params: WordParams = DEFAULT_PARAMS) -> Generator:
    kind = data["kind"]
    if kind == "elementary":
        return ElementaryGenerator(int(data["k"]), params)
    if kind == "explicit":
        return ExplicitGenerator(data["word"])
    if kind == "flipped":
        return FlippedGenerator(generator_from_json(data["base"], params), int(data["flip"]),
                                data["letter"], int(data.get("left_cert", 0)),
                                int(data.get("right_cert", 0)))
    raise ValueError(f"unknown generator kind {kind!r}")
