"""Matrix cocycles over the shift: products, norms and finite-time exponents.

A cocycle map assigns a 2x2 real matrix to each point; products follow
``A^(n)(x) = A(T^{n-1} x) ... A(T x) A(x)``.  Long products are reduced
pairwise with every entry held as a float mantissa and an integer binary
exponent, so nothing overflows or underflows for ``n`` in the millions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import words
from .subshift import PointWindow
from .words import DEFAULT_PARAMS, WordParams

__all__ = [
    "CocycleMap", "ScaledProduct", "DeterminantError", "Observable",
    "op_norm", "op_norms", "product", "finite_lyap", "log_norm_trace",
    "walters_B", "constant_cocycle", "identity_cocycle", "psi_observable",
    "psi_value", "birkhoff_average", "walters_log_norm_oracle",
    "ScanResult", "exponent_scan", "NormGrowth", "sup_and_mean_norm_growth",
    "window_abs_theta", "PairedPoint", "sl2_square_cocycle", "fekete_violations",
    "mat_to_row",
]

CHUNK = 1 << 18


class DeterminantError(ValueError):
    pass


@dataclass(frozen=True)
class CocycleMap:
    """A matrix-valued map on points, depending on coordinates within
    ``window_radius`` of the center.

    ``batch(x, n)`` (optional) returns the stacked values ``A(T^i x)`` for
    ``i < n`` in one call; without it the values are evaluated one by one.
    """

    evaluate: Callable[[PointWindow], np.ndarray]
    window_radius: int = 0
    batch: Optional[Callable[[PointWindow, int], np.ndarray]] = None
    name: str = "cocycle"
    walters_scale: Optional[float] = None  # set for the Walters cocycle only

    def __call__(self, x) -> np.ndarray:
        return self.evaluate(x)

    def values(self, x, n: int) -> np.ndarray:
        if n <= 0:
            return np.zeros((0, 2, 2))
        if self.batch is not None:
            return self.batch(x, n)
        out = np.empty((n, 2, 2))
        for i in range(n):
            out[i] = self.evaluate(x.shift(i) if i else x)
        return out


@dataclass(frozen=True)
class ScaledProduct:
    """``exp(log_scale) * matrix`` with ``matrix`` of unit operator norm."""

    matrix: np.ndarray
    log_scale: float

    @property
    def log_norm(self) -> float:
        return self.log_scale

    def full(self) -> np.ndarray:
        return math.exp(self.log_scale) * self.matrix

    def apply_log(self, v: np.ndarray) -> float:
        """``log ||product @ v||``."""
        return self.log_scale + math.log(float(np.linalg.norm(self.matrix @ v)))


def op_norm(M: np.ndarray) -> float:
    """Largest singular value of a 2x2 matrix (closed form)."""
    a, b, c, d = float(M[0, 0]), float(M[0, 1]), float(M[1, 0]), float(M[1, 1])
    return 0.5 * (math.hypot(a + d, c - b) + math.hypot(a - d, b + c))


def op_norms(M: np.ndarray) -> np.ndarray:
    """Vectorized ``op_norm`` over a stack of shape ``(n, 2, 2)``."""
    a, b, c, d = M[:, 0, 0], M[:, 0, 1], M[:, 1, 0], M[:, 1, 1]
    return 0.5 * (np.hypot(a + d, c - b) + np.hypot(a - d, b + c))


def mat_to_row(M: np.ndarray) -> list:
    return [f"{float(v):.17g}" for v in np.asarray(M).reshape(4)]


# Products keep each entry as mantissa * 2**exponent.  A shared per-matrix
# scale is not enough: when a strong stretch is later undone by a contraction
# the small entries carry the answer and would have underflowed.


def _ext(m: np.ndarray) -> tuple:
    mant, ex = np.frexp(m)
    return mant, ex.astype(np.int64)


def _ext_add(am, ae, bm, be):
    e = np.maximum(ae, be)
    da = np.maximum(ae - e, -1100)
    db = np.maximum(be - e, -1100)
    s = np.ldexp(am, da) + np.ldexp(bm, db)
    sm, se = np.frexp(s)
    return sm, np.where(sm == 0, _ZERO_EXP, se + e)


_ZERO_EXP = -(1 << 40)


def _ext_matmul(Xm, Xe, Ym, Ye):
    """Stacked ``X @ Y`` in extended-exponent form."""
    out_m = np.empty(np.broadcast_shapes(Xm.shape, Ym.shape))
    out_e = np.empty(out_m.shape, dtype=np.int64)
    for i in range(2):
        for k in range(2):
            p0m, p0e = np.frexp(Xm[..., i, 0] * Ym[..., 0, k])
            p1m, p1e = np.frexp(Xm[..., i, 1] * Ym[..., 1, k])
            p0e = np.where(p0m == 0, _ZERO_EXP, p0e + Xe[..., i, 0] + Ye[..., 0, k])
            p1e = np.where(p1m == 0, _ZERO_EXP, p1e + Xe[..., i, 1] + Ye[..., 1, k])
            out_m[..., i, k], out_e[..., i, k] = _ext_add(p0m, p0e, p1m, p1e)
    return out_m, out_e


def _ext_fix_zeros(m, e):
    return m, np.where(m == 0, _ZERO_EXP, e)


def _ext_reduce(m: np.ndarray, e: np.ndarray) -> tuple:
    """Ordered product ``X[-1] @ ... @ X[0]`` of an extended-exponent stack."""
    while len(m) > 1:
        tail = None
        if len(m) % 2:
            tail = (m[-1:], e[-1:])
            m, e = m[:-1], e[:-1]
        m, e = _ext_matmul(m[1::2], e[1::2], m[0::2], e[0::2])
        if tail is not None:
            m = np.concatenate([m, tail[0]])
            e = np.concatenate([e, tail[1]])
    return m[0], e[0]


def _ext_to_scaled(m: np.ndarray, e: np.ndarray) -> tuple:
    """``(matrix, log2 scale)`` with ``matrix`` a float array of max entry ~1."""
    top = int(np.max(e)) if np.any(m != 0) else 0
    M = np.ldexp(m, np.maximum(e - top, -1100))
    return M, top


def _ext_log_norms(m: np.ndarray, e: np.ndarray) -> np.ndarray:
    top = np.max(e, axis=(-2, -1))
    M = np.ldexp(m, np.maximum(e - top[..., None, None], -1100))
    with np.errstate(divide="ignore"):
        return np.log(op_norms(M.reshape(-1, 2, 2))).reshape(top.shape) + top * math.log(2)


def _normalize(M: np.ndarray, log_scale: float) -> ScaledProduct:
    nrm = op_norm(M)
    if nrm == 0:
        return ScaledProduct(M, -math.inf)
    return ScaledProduct(M / nrm, log_scale + math.log(nrm))


def _log_abs_dets(mats: np.ndarray) -> tuple:
    dets = mats[:, 0, 0] * mats[:, 1, 1] - mats[:, 0, 1] * mats[:, 1, 0]
    sign = -1.0 if np.count_nonzero(dets < 0) % 2 else 1.0
    with np.errstate(divide="ignore"):
        return float(np.sum(np.log(np.abs(dets)))), sign


def _forward(A: CocycleMap, x, n: int, want_det: bool = False) -> tuple:
    Pm, Pe = _ext(np.eye(2))
    Pe = _ext_fix_zeros(Pm, Pe)[1]
    log_det, det_sign = 0.0, 1.0
    start = 0
    while start < n:
        count = min(CHUNK, n - start)
        mats = np.array(A.values(x.shift(start) if start else x, count), dtype=float)
        if want_det:
            ld, sg = _log_abs_dets(mats)
            log_det += ld
            det_sign *= sg
        m, e = _ext_fix_zeros(*_ext(mats))
        Cm, Ce = _ext_reduce(m, e)
        Pm, Pe = _ext_matmul(Cm, Ce, Pm, Pe)
        start += count
    M, top = _ext_to_scaled(Pm, Pe)
    return M, top * math.log(2), (log_det, det_sign)


def product(A: CocycleMap, x, n: int) -> ScaledProduct:
    """``A^(n)(x)``; negative ``n`` uses ``(A^(|n|)(T^n x))^{-1}``."""
    n = int(n)
    if n == 0:
        return ScaledProduct(np.eye(2), 0.0)
    if n > 0:
        M, log_scale, _ = _forward(A, x, n)
        return _normalize(M, log_scale)
    M, log_scale, (log_det, sign) = _forward(A, x.shift(n), -n, want_det=True)
    fwd = _normalize(M, log_scale)
    F = fwd.matrix
    # for 2x2, inverse = adj / det and ||adj|| = ||M||
    adj = np.array([[F[1, 1], -F[0, 1]], [-F[1, 0], F[0, 0]]]) * sign
    return ScaledProduct(adj, fwd.log_scale - log_det)


def finite_lyap(A: CocycleMap, x, n: int) -> float:
    """``(1/n) log ||A^(n)(x)||``."""
    return product(A, x, n).log_scale / n


def log_norm_trace(A: CocycleMap, x, n: int) -> np.ndarray:
    """``log ||A^(j)(x)||`` for ``j = 1..n`` via a prefix scan."""
    m, e = _ext_fix_zeros(*_ext(np.array(A.values(x, n), dtype=float)))
    d = 1
    while d < n:
        pm, pe = _ext_matmul(m[d:], e[d:], m[:-d], e[:-d])
        m = np.concatenate([m[:d], pm])
        e = np.concatenate([e[:d], pe])
        d *= 2
    return _ext_log_norms(m, e)


# --------------------------------------------------------------------------
# concrete cocycles


def walters_B(scale: float = 1.0) -> CocycleMap:
    """Antidiagonal cocycle ``[[0, e^{s phi}], [e^{-s phi}, 0]]`` with
    ``phi = +1, -1, 0`` for the letters ``U, D, Z`` at coordinate 0."""
    if not scale > 0:
        raise ValueError("scale must be positive")

    def evaluate(x):
        phi = scale * float(x.block(0, 1)[0])
        return np.array([[0.0, math.exp(phi)], [math.exp(-phi), 0.0]])

    def batch(x, n):
        phi = scale * x.block(0, n).astype(float)
        out = np.zeros((n, 2, 2))
        out[:, 0, 1] = np.exp(phi)
        out[:, 1, 0] = np.exp(-phi)
        return out

    return CocycleMap(evaluate, 0, batch, f"walters(s={scale:g})", walters_scale=scale)


def constant_cocycle(M: np.ndarray, name: str = "constant") -> CocycleMap:
    M = np.array(M, dtype=float)
    return CocycleMap(lambda x: M.copy(), 0, lambda x, n: np.broadcast_to(M, (n, 2, 2)).copy(),
                      name)


def identity_cocycle() -> CocycleMap:
    return constant_cocycle(np.eye(2), "identity")


def walters_log_norm_oracle(signs: np.ndarray, scale: float = 1.0) -> np.ndarray:
    """Exact ``log ||B^(n)||`` for ``n = 0..len(signs)`` from integer prefix sums.

    ``B^(n)`` is diagonal for even ``n`` and antidiagonal for odd ``n``;
    in both cases its norm is ``exp(scale * |theta(prefix of length n)|)``.
    Returns the integer array ``|theta|``; multiply by ``scale`` for logs.
    """
    s = np.asarray(signs, dtype=np.int64)
    alt = s.copy()
    alt[1::2] *= -1
    th = np.concatenate([[0], np.cumsum(alt)])
    return np.abs(th)


def window_abs_theta(signs: np.ndarray, n: int) -> np.ndarray:
    """``|theta(w[i:i+n])|`` for every start ``i`` (exact integers)."""
    s = np.asarray(signs, dtype=np.int64)
    alt = s.copy()
    alt[1::2] *= -1
    th = np.concatenate([[0], np.cumsum(alt)])
    diff = th[n:] - th[:-n] if n else np.zeros(len(s) + 1, dtype=np.int64)
    # a window starting at odd i has alternating signs flipped; |.| removes it
    return np.abs(diff)


@dataclass(frozen=True)
class Observable:
    """Scalar function of a point; ``batch(x, n)`` returns ``f(T^i x)``, ``i < n``."""

    func: Callable
    batch: Optional[Callable] = None
    name: str = "observable"

    def __call__(self, x) -> float:
        return self.func(x)

    def values(self, x, n: int) -> np.ndarray:
        if self.batch is not None:
            return self.batch(x, n)
        return np.array([self.func(x.shift(i) if i else x) for i in range(n)])


def psi_value(p, scale: float = 1.0) -> float:
    """``phi(p) - phi(T p)``."""
    b = p.block(0, 2).astype(float)
    return scale * (b[0] - b[1])


def psi_observable(scale: float = 1.0) -> Observable:
    def batch(x, n):
        b = x.block(0, n + 1).astype(float)
        return scale * (b[:-1] - b[1:])

    return Observable(lambda p: psi_value(p, scale), batch, "psi")


def birkhoff_average(f: Observable, p, n: int, step: int = 1) -> float:
    """``(1/n) sum_{i<n} f(T^{step i} p)``."""
    if n <= 0:
        raise ValueError("n must be positive")
    vals = f.values(p, (n - 1) * step + 1)[::step]
    return float(np.sum(vals[:n])) / n


# --------------------------------------------------------------------------
# exponent scans


@dataclass
class ScanResult:
    ns: np.ndarray
    log_norms: np.ndarray

    @property
    def exponents(self) -> np.ndarray:
        return self.log_norms / self.ns

    def min(self) -> tuple:
        i = int(np.argmin(self.exponents))
        return int(self.ns[i]), float(self.exponents[i])

    def max(self) -> tuple:
        i = int(np.argmax(self.exponents))
        return int(self.ns[i]), float(self.exponents[i])

    @property
    def spread(self) -> float:
        e = self.exponents
        return float(e.max() - e.min())

    def at(self, n: int) -> float:
        i = int(np.searchsorted(self.ns, n))
        if i >= len(self.ns) or self.ns[i] != n:
            raise KeyError(n)
        return float(self.exponents[i])


def exponent_scan(A: CocycleMap, x, n_max: int, parity: str = "even",
                  oracle: bool = False, n_min: int = 1) -> ScanResult:
    """Trace of finite-time exponents ``n -> (1/n) log ||A^(n)(x)||``.

    ``oracle=True`` (Walters cocycle only) uses exact prefix sums instead of
    matrix products.  ``parity`` is ``"even"``, ``"odd"`` or ``"all"``.
    """
    if oracle:
        if A.walters_scale is None:
            raise ValueError("the integer oracle applies to the Walters cocycle only")
        logs = A.walters_scale * walters_log_norm_oracle(x.block(0, n_max)).astype(float)[1:]
    else:
        logs = log_norm_trace(A, x, n_max)
    ns = np.arange(1, n_max + 1)
    keep = ns >= n_min
    if parity == "even":
        keep &= ns % 2 == 0
    elif parity == "odd":
        keep &= ns % 2 == 1
    return ScanResult(ns[keep], logs[keep])


@dataclass
class NormGrowth:
    n: int
    sup: float
    mean: float
    per_point: np.ndarray
    offsets: np.ndarray


def sup_and_mean_norm_growth(A: CocycleMap, k_level: int, n: int,
                             params: WordParams = DEFAULT_PARAMS, stride: int = 1,
                             oracle: Optional[bool] = None) -> NormGrowth:
    """Sup and mean of ``(1/n) log ||A^(n)(y)||`` over offsets of ``e_k``.

    Orbits are read inside ``e_{k+1}``, which starts with ``e_k``.  For the
    Walters cocycle the exact integer window scan is used unless
    ``oracle=False``.
    """
    host_len = words.length_of(k_level + 1, params)
    offsets = np.arange(0, words.length_of(k_level, params), stride)
    offsets = offsets[offsets + n <= host_len]
    if oracle is None:
        oracle = A.walters_scale is not None
    if oracle:
        host = words.letters_range(k_level + 1, 0, int(offsets[-1]) + n, params)
        vals = A.walters_scale * window_abs_theta(host, n)[offsets].astype(float) / n
    else:
        from .subshift import inside_elementary
        vals = np.array([finite_lyap(A, inside_elementary(k_level + 1, int(i), params), n)
                         for i in offsets])
    return NormGrowth(n, float(vals.max()), float(vals.mean()), vals, offsets)


def fekete_violations(sups: dict, tol: float = 0.0) -> list:
    """Pairs ``(m, n)`` with ``s_{m+n} > s_m + s_n + tol`` in a table of sup
    log-norms ``{n: s_n}`` (not normalized by ``n``)."""
    bad = []
    for m in sups:
        for n in sups:
            if m + n in sups and sups[m + n] > sups[m] + sups[n] + tol:
                bad.append((m, n))
    return bad


# --------------------------------------------------------------------------
# square recoding


@dataclass(frozen=True)
class PairedPoint:
    """Point of the shift on letter pairs: coordinate ``i`` is
    ``(base_{2i}, base_{2i+1})``; the shift acts as ``T^2`` on ``base``."""

    base: PointWindow

    def coord(self, i: int) -> tuple:
        return self.base.coord(2 * i), self.base.coord(2 * i + 1)

    def shift(self, n: int) -> "PairedPoint":
        return PairedPoint(self.base.shift(2 * int(n)))


def sl2_square_cocycle(B: CocycleMap, tol: float = 1e-9) -> CocycleMap:
    """``A(z) = B^(2)(h(z))`` on the pair recoding; values have determinant 1.

    ``B`` must have constant determinant ``+1`` or ``-1``; a pair of values
    whose determinants differ raises ``DeterminantError``.
    """

    def check(mats):
        dets = mats[:, 0, 0] * mats[:, 1, 1] - mats[:, 0, 1] * mats[:, 1, 0]
        if np.any(np.abs(np.abs(dets) - 1) > tol):
            raise DeterminantError("B values must have determinant +1 or -1")
        if np.any(np.abs(dets - dets[0]) > tol):
            raise DeterminantError("B determinant is not constant")

    def evaluate(z):
        pair = B.values(z.base, 2)
        check(pair)
        return pair[1] @ pair[0]

    def batch(z, n):
        vals = B.values(z.base, 2 * n)
        check(vals)
        return np.einsum("nij,njk->nik", vals[1::2], vals[0::2])

    return CocycleMap(evaluate, 2 * B.window_radius + 1, batch, f"square({B.name})")
